import os
import sys
import hydra
from pathlib import Path
import logging

from join_tensors.cli import main as run

logger = logging.getLogger(__name__)

@hydra.main(config_path='../cfg/', config_name='join_tensors.yaml')
def main(cfg):

    hydra_dir = Path(os.getcwd())
    logger.info(f"Running {cfg.command} in {hydra_dir}")

    sys.exit(run(cfg, run_dir=hydra_dir))

if __name__ == "__main__":
    main()
