"""Gerschgorin-type inclusion region for join tensor eigenvalues.

Every eigenvalue lies in the union of disks |z - f(x_i)| <= (n^{d-1} - 1) c_i,
with c_i the largest |f(x_i v x_{i_2} v ... v x_{i_d})| over tuples other than
(i, ..., i). Those joins are exactly x_i v b for b in S^{v(d-1)}, except that
b = x_i itself only counts when some other x_j <= x_i can produce it.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

from join_tensors.lattices import OrderedSubset, join_closure
from join_tensors.models.decomp.polyadic import check_order
from join_tensors.models.decomp.valuation import ValuationFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GerschgorinRegion:
    n: int
    d: int
    centers: Tuple[float, ...]
    c: Tuple[float, ...]
    radii: Tuple[float, ...]

    @property
    def real_upper(self) -> float:
        return max(a + r for a, r in zip(self.centers, self.radii))

    @property
    def disks(self):
        return [{'center': a, 'radius': r} for a, r in zip(self.centers, self.radii)]


def gerschgorin_bound(S: OrderedSubset, f: ValuationFunction, d: int, mode=None) -> GerschgorinRegion:
    d = check_order(d)
    mode = f.resolve_mode(S.context, mode)
    ctx = S.context
    n = len(S)
    betas = join_closure(S, d - 1).elements
    centers, cs = [], []
    for i, x in enumerate(S):
        # b = x_i needs a witness (j, i, ..., i) with j != i and x_j <= x_i
        self_ok = d >= 3 and any(ctx.leq(y, x) for j, y in enumerate(S) if j != i)
        candidates = [abs(f.evaluate(ctx.join(x, b), mode)) for b in betas if b != x or self_ok]
        cs.append(float(max(candidates)) if candidates else 0.0)
        centers.append(float(f.evaluate(x, mode)))
    scale = float(n ** (d - 1) - 1)
    radii = tuple(scale * c for c in cs)
    logger.debug(f'Gerschgorin c = {cs}, radius factor {scale}')
    return GerschgorinRegion(n, d, tuple(centers), tuple(cs), radii)
