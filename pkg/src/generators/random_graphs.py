"""
Random graph generators: configuration-model regular graphs, G(n,m), G(n,p)
and the shared-weight coupling of G(n,p) across densities
"""

from typing import Iterable, Optional, Set

import numpy as np
import structlog

from ..core.config import settings
from ..core.exceptions import ParameterError, RetryExhaustedError
from ..core.seeding import SeedStream
from ..models.graph import Edge, Graph, pair_count, pair_index

logger = structlog.get_logger(__name__)


def _pair_arrays(n: int):
    return np.triu_indices(n, 1)


def random_regular(n: int, d: int, seed: int, max_attempts: Optional[int] = None) -> Graph:
    """d-regular simple graph from the configuration model with rejection of loops and multi-edges"""
    if d < 0 or (d * n) % 2 != 0:
        raise ParameterError(f"random_regular needs d*n even, got d={d}, n={n}")
    if d >= n:
        raise ParameterError(f"random_regular needs d < n, got d={d}, n={n}")

    attempts = max_attempts or settings.configuration_retry_cap
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)

    for attempt in range(1, attempts + 1):
        shuffled = rng.permutation(stubs)
        us, vs = shuffled[0::2], shuffled[1::2]
        if np.any(us == vs):
            continue
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        codes = lo * n + hi
        if np.unique(codes).size != codes.size:
            continue
        logger.debug(f"Configuration model accepted after {attempt} attempts", n=n, d=d)
        return Graph.trusted(n, zip(lo.tolist(), hi.tolist()), d=d)

    raise RetryExhaustedError(f"configuration model rejected {attempts} pairings for n={n}, d={d}")


class RandomGraphGenerator:
    """Seeded sampler of uniform random graphs"""

    def __init__(self, seed: int = 0):
        self.stream = SeedStream(seed)
        self.rejections = 0

    def gnm(self, n: int, m: int, forbidden: Optional[Iterable[Edge]] = None) -> Graph:
        """Uniform m-edge graph on [n] avoiding the forbidden pairs"""
        N = pair_count(n)
        blocked: Set[int] = {pair_index(u, v, n) for (u, v) in (forbidden or ())}
        available = N - len(blocked)
        if m < 0 or m > available:
            raise ParameterError(f"cannot place m={m} edges among {available} available pairs")
        rows, cols = _pair_arrays(n)
        if not blocked:
            chosen = self.stream.rng.choice(N, size=m, replace=False)
        else:
            mask = np.ones(N, dtype=bool)
            mask[list(blocked)] = False
            chosen = self.stream.rng.choice(np.flatnonzero(mask), size=m, replace=False)
        return Graph.trusted(n, zip(rows[chosen].tolist(), cols[chosen].tolist()))

    def gnm_rejecting(self, n: int, m: int, forbidden: Iterable[Edge], max_attempts: Optional[int] = None) -> Graph:
        """Uniform m-edge graph conditioned on missing the forbidden pairs, by rejection"""
        bad = set(forbidden)
        attempts = max_attempts or settings.configuration_retry_cap
        for _ in range(attempts):
            candidate = self.gnm(n, m)
            if not (candidate.edge_set & bad):
                return candidate
            self.rejections += 1
        raise RetryExhaustedError(f"G(n,m) hit forbidden pairs in {attempts} draws")

    def gnp(self, n: int, p: float) -> Graph:
        """Binomial random graph"""
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {p}")
        rows, cols = _pair_arrays(n)
        keep = self.stream.rng.random(rows.size) < p
        return Graph.trusted(n, zip(rows[keep].tolist(), cols[keep].tolist()))

    def permutation(self, n: int):
        return self.stream.permutation(n)


class SharedWeights:
    """One uniform weight per pair; G(n,p) is the set of pairs with weight below p"""

    def __init__(self, n: int, seed: int):
        self.n = n
        self.weights = np.random.default_rng(seed).random(pair_count(n))
        self._rows, self._cols = _pair_arrays(n)

    def graph_at(self, p: float) -> Graph:
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {p}")
        keep = self.weights < p if p < 1.0 else np.ones_like(self.weights, dtype=bool)
        return Graph.trusted(self.n, zip(self._rows[keep].tolist(), self._cols[keep].tolist()))
