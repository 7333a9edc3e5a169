from setuptools import find_packages, setup
setup(
    name='join_tensors',
    version='0.1.0',
    packages=find_packages(exclude=['tests']),
    python_requires='>=3.9',
    install_requires=[
        "hydra-core",
        "imageio",
        "joblib",
        "numpy",
        "omegaconf",
        "pandas",
        "prettytable",
        "tqdm",
        "wandb",
    ],
    extras_require={
        "test": ["pytest"],
    },
    include_package_data=True,
)
