"""Bracketing power method for the dominant eigenvalue of a positive symmetric tensor.

Each step maps x to (A x^{d-1})^{[1/(d-1)]}, normalized, and brackets the
eigenvalue between the smallest and largest ratio (A x^{d-1})_i / x_i^{d-1}.
The tensor is scaled so its largest entry is 1; brackets are scaled back.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from join_tensors.errors import BadSpec, BadValue, NotPositive, OddOrder
from .gerschgorin import GerschgorinRegion

logger = logging.getLogger(__name__)

INITIAL_POLICIES = ('uniform', 'given', 'random')


@dataclass
class PowerConfig:
    tol: float = 1e-10
    max_iterations: int = 10000
    initial: str = 'uniform'
    initial_vector: Optional[List[float]] = None
    seed: int = 0
    allow_odd: bool = False
    rescale: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise BadSpec(f'tolerance must be positive, got {self.tol}')
        if self.max_iterations < 1:
            raise BadSpec(f'max_iterations must be positive, got {self.max_iterations}')
        if self.initial not in INITIAL_POLICIES:
            raise BadSpec(f'initial vector policy must be one of {INITIAL_POLICIES}, got {self.initial!r}')
        if self.initial == 'given' and self.initial_vector is None:
            raise BadSpec("initial='given' needs initial_vector")

    @classmethod
    def from_cfg(cls, cfg):
        vector = cfg.get('initial_vector', None)
        return cls(
            tol=float(cfg.get('tol', 1e-10)),
            max_iterations=int(cfg.get('max_iterations', 10000)),
            initial=cfg.get('initial', 'uniform'),
            initial_vector=list(vector) if vector is not None else None,
            seed=int(cfg.get('seed', 0)),
            allow_odd=bool(cfg.get('allow_odd', False)),
            rescale=bool(cfg.get('rescale', True)),
        )

    def start(self, n):
        if self.initial == 'uniform':
            x = np.ones(n)
        elif self.initial == 'random':
            x = np.random.default_rng(self.seed).uniform(0.5, 1.5, size=n)
        else:
            x = np.asarray(self.initial_vector, dtype=np.float64)
            if x.shape != (n,):
                raise BadSpec(f'initial vector has shape {x.shape}, expected ({n},)')
            if not np.all(x > 0):
                raise BadValue('initial vector must be strictly positive')
        return x / np.linalg.norm(x)


@dataclass
class EigenEstimate:
    n: int
    d: int
    backend: str
    lambda_lower: float
    lambda_upper: float
    x: np.ndarray
    iterations: int
    converged: bool
    rayleigh: float
    history: List[Tuple[float, float]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def lam(self) -> float:
        return 0.5 * (self.lambda_lower + self.lambda_upper)

    def history_is_monotone(self, rtol=1e-12) -> bool:
        """Raw lower brackets never fall and upper brackets never rise, up to rtol."""
        for (lo0, hi0), (lo1, hi1) in zip(self.history, self.history[1:]):
            if lo1 < lo0 - rtol * abs(lo0) or hi1 > hi0 + rtol * abs(hi0):
                return False
        return True


def _brackets(ax, x, d):
    pos = x > 0
    ratios = ax[pos] / x[pos] ** (d - 1)
    return ratios.min(), ratios.max()


def power_method(C, cfg: Optional[PowerConfig] = None) -> EigenEstimate:
    """Runs on any float contractor.

    history holds the raw bracket of every iteration; the reported bracket is
    their running intersection.
    """
    cfg = cfg or PowerConfig()
    n, d = C.n, C.d
    warnings = []
    if d % 2:
        if not cfg.allow_odd:
            raise OddOrder(f'power method needs even order, got d = {d}')
        warnings.append(f'odd order d = {d} is outside the convergence theory of the method')
        logger.warning(warnings[-1])
    if not C.entries_positive():
        raise NotPositive('power method needs a tensor with positive entries')
    scale = 1.0 / float(C.max_abs_entry()) if cfg.rescale else 1.0

    x = cfg.start(n)
    ax = scale * C.apply(x)
    lower, upper = -np.inf, np.inf
    history = []
    converged = False
    k = 0
    for k in range(1, cfg.max_iterations + 1):
        if np.any(ax <= 0):
            raise NotPositive(f'nonpositive component in A x^(d-1) at iteration {k}')
        z = ax ** (1.0 / (d - 1))
        x = z / np.linalg.norm(z)
        ax = scale * C.apply(x)
        lo, hi = _brackets(ax, x, d)
        lower, upper = max(lower, lo), min(upper, hi)
        history.append((lo / scale, hi / scale))
        if upper - lower < cfg.tol:
            converged = True
            break
    rayleigh = float(np.dot(x, ax) / np.sum(x ** d)) / scale
    logger.debug(f'power method n={n} d={d}: [{lower / scale}, {upper / scale}] after {k} iterations')
    est = EigenEstimate(
        n, d, C.backend, lower / scale, upper / scale, x, k, converged, rayleigh, history, warnings)
    if not est.history_is_monotone():
        logger.warning(f'power method n={n} d={d}: bracket history is not monotone')
    return est


@dataclass(frozen=True)
class BoundCheck:
    holds: bool
    lambda_upper: float
    real_upper: float
    ratio: float
    slack: float


def bound_check(est: EigenEstimate, region: GerschgorinRegion, tol=None) -> BoundCheck:
    """lambda_upper <= real_upper up to float slack; ratio lambda / real_upper measures sharpness."""
    bound = region.real_upper
    slack = max(abs(bound) * 1e-12, tol if tol is not None else 0.0)
    holds = est.lambda_upper <= bound + slack
    ratio = est.lam / bound if bound else float('nan')
    if not holds:
        logger.error(f'eigenvalue bracket {est.lambda_upper} exceeds the Gerschgorin bound {bound}')
    return BoundCheck(bool(holds), est.lambda_upper, bound, ratio, slack)
