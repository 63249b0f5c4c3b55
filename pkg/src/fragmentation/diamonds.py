"""
Diamond planting and the Day-0 parameter set
"""

import math
from typing import Optional, Tuple

import structlog
from pydantic import BaseModel

from ..core.exceptions import ParameterError
from ..core.seeding import SeedStream
from ..models.fragment import DiamondLayout, Embedding
from ..models.graph import FamilySpec

logger = structlog.get_logger(__name__)


class Day0Params(BaseModel):
    """Diamond count, piece length, matching density and fragment size scale for one n"""
    n: int
    C: float
    w: float
    chi: int
    mu: int
    beta: float
    l0: int

    @property
    def cap(self) -> int:
        """Admissible fragment size l0 + 5 chi"""
        return self.l0 + 5 * self.chi

    @property
    def threshold(self) -> int:
        """Closed runs with at least this many vertices get cut"""
        return self.mu + 4


def default_w(n: int) -> float:
    """w = ln ln n"""
    if n < 3:
        raise ParameterError(f"w = ln ln n needs n >= 3, got {n}")
    return math.log(math.log(n))


def day0_parameters(n: int, C: float = 4.0, w: Optional[float] = None) -> Day0Params:
    """chi = floor(w sqrt(n)/ln n), mu = floor(10 C ln n/w), beta = n^(-1/3)/w, l0 = floor(C sqrt(n))"""
    w = default_w(n) if w is None else w
    if w <= 0 or C <= 0:
        raise ParameterError(f"w and C must be positive, got w={w}, C={C}")
    ln_n = math.log(n)
    return Day0Params(
        n=n,
        C=C,
        w=w,
        chi=int(math.floor(w * math.sqrt(n) / ln_n)),
        mu=int(math.floor(10 * C * ln_n / w)),
        beta=n ** (-1.0 / 3.0) / w,
        l0=int(math.floor(C * math.sqrt(n))),
    )


def near_equal_gaps(n: int, chi: int):
    """chi positive gaps differing by at most one with sum n - 4 chi"""
    q, r = divmod(n - 4 * chi, chi)
    return [q + 1] * r + [q] * (chi - r)


def plant_diamonds(n: int, chi: int, seed: int) -> Tuple[DiamondLayout, Embedding]:
    """Random rooted square-of-cycle copy with chi diamonds at near-equal distances along it"""
    if chi < 1:
        raise ParameterError(f"chi must be at least 1, got {chi}")
    if n < 6 * chi:
        raise ParameterError(f"n={n} leaves no room for {chi} diamonds with gaps, need n >= {6 * chi}")
    order = SeedStream(seed).permutation(n)
    gaps = near_equal_gaps(n, chi)
    starts = []
    position = 0
    for gap in gaps:
        starts.append(position)
        position += 4 + gap
    diamonds = [tuple(order[s + a] for a in range(4)) for s in starts]
    layout = DiamondLayout(n=n, chi=chi, diamonds=diamonds, gaps=gaps, starts=starts)
    logger.debug(f"Planted {chi} diamonds", n=n, gaps=sorted(set(gaps)))
    return layout, Embedding(family=FamilySpec.square_of_cycle(), perm=tuple(order))
