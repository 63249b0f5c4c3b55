"""
Counting bounds on census buckets and their calibration
"""

import math
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, Field
from scipy.special import gammaln

from ..core.config import settings
from ..core.exceptions import ParameterError
from ..models.census import CensusKey, CensusTable, ExtensionProfile, delta_level

logger = structlog.get_logger(__name__)


class BoundConstants(BaseModel):
    """Constants of the alpha and beta bounds"""
    a1: float = 1.0
    a2: float = 1.0
    b1: float = 1.0
    b2: float = 1.0

    @classmethod
    def parse(cls, text: str) -> "BoundConstants":
        """'a1,a2,b1,b2' as accepted on the command line"""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) != 4:
            raise ParameterError(f"expected four constants a1,a2,b1,b2, got '{text}'")
        try:
            a1, a2, b1, b2 = (float(p) for p in parts)
        except ValueError:
            raise ParameterError(f"constants must be numbers, got '{text}'")
        return cls(a1=a1, a2=a2, b1=b1, b2=b2)


class CalibrationReport(BaseModel):
    """Minimal integer constants making the bounds hold on a reference census"""
    constants: BoundConstants
    alpha_keys: int
    beta_keys: int
    excluded_keys: int
    window: Optional[int] = None
    notes: Dict[str, str] = Field(default_factory=dict)


def log_binom(n: int, k: int, exact: bool = False) -> float:
    """ln C(n, k); -inf outside 0 <= k <= n"""
    if k < 0 or k > n:
        return -math.inf
    if exact:
        return math.log(math.comb(n, k))
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def log_factorial(n: int, exact: bool = False) -> float:
    if exact:
        return math.log(math.factorial(n))
    return float(gammaln(n + 1))


def _sigma(d: int, key: CensusKey) -> float:
    sigma = key.sigma(d)
    if sigma < 0:
        raise ParameterError(f"bound does not apply to negative excess {sigma} at {key.as_tuple()}")
    return float(sigma)


def log_max_binomial(x: int, sigma: float, d: int, exact: bool = False) -> float:
    """ln max over o <= (Delta+2) sigma of C(x, o)"""
    cap = min(int(math.floor((delta_level(d) + 2) * sigma)), x)
    return log_binom(x, min(cap, x // 2), exact)


def alpha_bound(d: int, n: int, key: CensusKey, consts: BoundConstants, exact: bool = False) -> float:
    """ln of C(n,c) C(x,c) e^(a1 c + a2 sigma) max C(x,o), bounding the bucket count"""
    if key.l == 0:
        raise ParameterError("bound domain starts at l >= 1")
    sigma = _sigma(d, key)
    return (
        log_binom(n, key.c, exact) + log_binom(key.x, key.c, exact)
        + consts.a1 * key.c + consts.a2 * sigma
        + log_max_binomial(key.x, sigma, d, exact)
    )


def beta_bound(d: int, n: int, key: CensusKey, consts: BoundConstants, aut: int, exact: bool = False) -> float:
    """ln of the bound on the number of family members extending a subgraph in the bucket"""
    if key.l == 0:
        raise ParameterError("bound domain starts at l >= 1")
    sigma = _sigma(d, key)
    x, c = key.x, key.c
    symmetry = c * math.log(x / c) + x * math.log(max(d - 1, 1)) - math.log(aut)
    return (
        log_factorial(n - x + c, exact)
        + consts.b1 * c + consts.b2 * sigma
        + min(symmetry, 0.0)
        + log_max_binomial(x, sigma, d, exact)
    )


def jhc_bound(h_edges: int, h_vertices: int, key: CensusKey, d: int, exact: bool = False) -> float:
    """ln of C(min(|E(H)|, |V(H)|), c) (16d)^l"""
    if key.c < 1:
        raise ParameterError("bound domain requires c >= 1")
    return log_binom(min(h_edges, h_vertices), key.c, exact) + key.l * math.log(16 * d)


def holds(count: int, log_bound: float, slack: Optional[float] = None) -> bool:
    """count <= bound with the configured relative slack in favour of the bound"""
    if count <= 0:
        return True
    slack = settings.bound_slack if slack is None else slack
    return math.log(count) <= log_bound + math.log1p(slack)


def _in_window(key: CensusKey, table: CensusTable, window: Optional[int]) -> bool:
    if key.sigma(table.d) < 0:
        return False
    if window is None or table.window is not None:
        return True
    # every component of a bucket with c components and x vertices fits when x - 2(c-1) <= window
    return key.x - 2 * (key.c - 1) <= window


def calibrate_constants(
    table: CensusTable,
    profile: Optional[ExtensionProfile],
    d: int,
    n: int,
    aut: int = 1,
    window: Optional[int] = None,
    max_total: int = 60,
) -> CalibrationReport:
    """Smallest integer (a1, a2) and (b1, b2), by total then by second constant, for which the bounds hold"""
    keys = [(key, count) for key, count in table.items() if _in_window(key, table, window)]
    excluded = len(table.counts) - len(keys)

    def search(check) -> Tuple[int, int]:
        for total in range(max_total + 1):
            for second in range(total + 1):
                if check(total - second, second):
                    return total - second, second
        raise ParameterError(f"no constants with total <= {max_total} satisfy the bound")

    def alpha_ok(a1, a2):
        consts = BoundConstants(a1=a1, a2=a2)
        return all(holds(count, alpha_bound(d, n, key, consts)) for key, count in keys)

    a1, a2 = search(alpha_ok)
    b1 = b2 = 0
    beta_keys = 0
    if profile is not None:
        beta_items = [(key, profile.maximum[key.as_tuple()]) for key, _ in keys if key.as_tuple() in profile.maximum]
        beta_keys = len(beta_items)

        def beta_ok(b1, b2):
            consts = BoundConstants(b1=b1, b2=b2)
            return all(holds(peak, beta_bound(d, n, key, consts, aut)) for key, peak in beta_items)

        b1, b2 = search(beta_ok)
    logger.info(f"Calibrated constants a=({a1},{a2}) b=({b1},{b2}) over {len(keys)} buckets")
    return CalibrationReport(
        constants=BoundConstants(a1=a1, a2=a2, b1=b1, b2=b2),
        alpha_keys=len(keys), beta_keys=beta_keys, excluded_keys=excluded, window=window,
    )


def bounds_table(
    table: CensusTable,
    consts: BoundConstants,
    aut: int = 1,
    profile: Optional[ExtensionProfile] = None,
    window: Optional[int] = None,
) -> pd.DataFrame:
    """Per bucket: count, log bounds, reference maximum extension count and pass flags"""
    d, n = table.d, table.n
    rows = []
    for key, count in table.items():
        sigma = key.sigma(d)
        applicable = _in_window(key, table, window)
        log_alpha = alpha_bound(d, n, key, consts) if applicable else np.nan
        log_beta = beta_bound(d, n, key, consts, aut) if applicable else np.nan
        log_jhc = jhc_bound(table.num_edges, n, key, d)
        beta_ref = profile.maximum.get(key.as_tuple()) if profile is not None else None
        rows.append({
            "l": key.l,
            "x": key.x,
            "c": key.c,
            "sigma": float(sigma),
            "count": count,
            "log_alpha_bound": log_alpha,
            "beta_ref": beta_ref,
            "log_beta_bound": log_beta,
            "log_jhc_bound": log_jhc,
            "alpha_pass": holds(count, log_alpha) if applicable else None,
            "beta_pass": holds(beta_ref, log_beta) if applicable and beta_ref is not None else None,
            "jhc_pass": holds(count, log_jhc),
        })
    return pd.DataFrame(rows)
