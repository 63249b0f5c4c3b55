"""
Tests for the counting bounds and their calibration
"""

import math

import pytest

from src.analysis.bounds import (
    BoundConstants,
    alpha_bound,
    beta_bound,
    bounds_table,
    calibrate_constants,
    holds,
    jhc_bound,
    log_binom,
)
from src.analysis.census import census, extension_profile
from src.core.exceptions import ParameterError
from src.models.census import CensusKey

EDGE = CensusKey(l=1, x=2, c=1)


def test_log_binom_exact_and_gamma_agree():
    assert log_binom(30, 12) == pytest.approx(log_binom(30, 12, exact=True))
    assert log_binom(5, 7) == -math.inf


def test_alpha_bound_single_edge():
    assert math.exp(alpha_bound(4, 10, EDGE, BoundConstants(a1=1, a2=1))) == pytest.approx(20 * math.e)


def test_jhc_bound_single_edge():
    assert math.exp(jhc_bound(20, 10, EDGE, 4)) == pytest.approx(640)


def test_bounds_reject_out_of_domain_keys():
    with pytest.raises(ParameterError):
        alpha_bound(4, 10, CensusKey(l=0, x=0, c=0), BoundConstants())
    with pytest.raises(ParameterError):
        alpha_bound(4, 10, CensusKey(l=6, x=4, c=1), BoundConstants())
    with pytest.raises(ParameterError):
        jhc_bound(20, 10, CensusKey(l=0, x=0, c=0), 4)


def test_beta_bound_needs_nonnegative_excess():
    # the whole square of C_8 has excess 16 - 16 - 3 < 0
    with pytest.raises(ParameterError):
        beta_bound(4, 8, CensusKey(l=16, x=8, c=1), BoundConstants(), aut=16)
    assert beta_bound(4, 8, CensusKey(l=5, x=4, c=1), BoundConstants(), aut=16) > 0


def test_holds_with_slack():
    assert holds(0, -math.inf)
    assert holds(20, math.log(20))
    assert not holds(21, math.log(20))


def test_calibrated_constants_make_every_row_pass(square8, square_spec):
    table = census(square8)
    profile = extension_profile(square8, square_spec)
    report = calibrate_constants(table, profile, 4, 8, aut=16)
    frame = bounds_table(table, report.constants, aut=16, profile=profile)
    assert frame["alpha_pass"].dropna().all()
    assert frame["beta_pass"].dropna().all()
    assert report.alpha_keys > 0
