import math

import numpy as np
import pytest

from riflab.hardy import (
    HardyGrid,
    ThresholdSearch,
    hp_norm_partial,
    hp_threshold,
    levelset_exponent_test,
    levelset_threshold,
    omega_measure,
    sample_deltas,
)

SMALL = HardyGrid(zhat_per_dim=512)


@pytest.mark.parametrize("k", [0, 1])
def test_h1_norm_is_degree(phi2, k):
    e = hp_norm_partial(phi2, k, 1.0, SMALL)
    assert e.status == "finite"
    assert e.value == pytest.approx(1.0, rel=1e-6)
    assert e.monotone
    means = np.array(e.means)
    assert np.all(np.diff(means) >= -1e-9)


def test_hp_above_threshold_is_infinite(phi2):
    assert hp_norm_partial(phi2, 0, 1.8, SMALL).status == "infinite"


def test_bounded_partial_is_finite_everywhere(phi_ex):
    e = hp_norm_partial(phi_ex, 2, 8.0, HardyGrid(zhat_per_dim=48))
    assert e.status == "finite"


def test_bad_arguments(phi2):
    with pytest.raises(ValueError):
        hp_norm_partial(phi2, 0, 0.0)
    with pytest.raises(IndexError):
        hp_norm_partial(phi2, 2, 1.0)


def test_slice_deltas_match_closed_form(phi2):
    # slice of 2 - z1 - z2 at z2 = e^{it}: zero of the numerator at 1/(2 - e^{-it})
    d, degenerate = sample_deltas(phi2, 0, 2000, seed=3)
    assert degenerate == 0
    assert np.all((d > 0) & (d < 1))
    assert d.min() < 0.05


def test_omega_profile_is_reproducible(phi2):
    a = omega_measure(phi2, 0, m=20000, seed=7)
    b = omega_measure(phi2, 0, m=20000, seed=7)
    assert a == b
    mu = np.array(a.measure)
    assert np.all(np.diff(mu) <= 0)
    assert mu[0] == pytest.approx(1.0)


def test_omega_bounded_partial(phi_ex):
    prof = omega_measure(phi_ex, 2, m=20000)
    assert prof.bounded
    assert math.isinf(levelset_threshold(prof))
    assert levelset_exponent_test(prof, 50) == "finite"


def test_levelset_test_sides(phi2):
    prof = omega_measure(phi2, 0, m=100000)
    assert levelset_exponent_test(prof, 1.0) == "finite"
    assert levelset_exponent_test(prof, 2.5) == "infinite"
    with pytest.raises(ValueError):
        levelset_exponent_test(prof, 0.5)


def test_threshold_combines_routes(phi2):
    e = hp_threshold(phi2, 0, ThresholdSearch(grid=SMALL, omega_samples=50000))
    assert e.status == "ok"
    assert e.threshold == pytest.approx(1.5, abs=0.15)
    assert set(e.routes) == {"quadrature", "levelset"}
