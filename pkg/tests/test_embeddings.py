import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riflab.embeddings import (
    chain_check,
    cs_from_ps,
    holder_check,
    hp_embed_feasible,
    interpolation_chain,
    membership_gain_verdict,
    norm_interp_check,
    ones_except,
    ps_from_cs,
)
from riflab.polycore import DimensionError, MultiPoly
from riflab.series import CoeffBox, expand_ratio

from conftest import random_poly

z1, z2 = MultiPoly.variables(2)
INF = math.inf


def test_split_examples():
    assert cs_from_ps([2]) == (2, 2)
    assert cs_from_ps([3, 2]) == (3, 3, 3)
    assert ps_from_cs([2, 4, 4]) == (2, 2)
    assert cs_from_ps(ps_from_cs([2, 4, 4])) == (2, 4, 4)


@pytest.mark.parametrize("n", range(2, 9))
def test_telescoping_is_exact(n):
    cs = cs_from_ps(list(range(n, 1, -1)))
    assert cs == (Fraction(n),) * n
    assert sum(1 / c for c in cs) == 1


@given(st.lists(st.floats(1.01, 20), min_size=1, max_size=6))
@settings(max_examples=100, deadline=None)
def test_round_trip(ps):
    cs = cs_from_ps(ps)
    assert sum(1 / c for c in cs) == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(ps_from_cs(cs), ps, rtol=1e-12)


def test_infeasible_cs():
    with pytest.raises(ValueError):
        ps_from_cs([2, 3])


def test_holder_examples():
    lhs, rhs, ok = holder_check(CoeffBox.from_poly(z1 * z2), [1, 1], [2, 2])
    assert lhs == pytest.approx(4) and rhs == pytest.approx(4) and ok
    lhs, rhs, ok = holder_check(CoeffBox.from_poly(z1 + z2), [1, 1], [2, 2])
    assert lhs == pytest.approx(4) and rhs == pytest.approx(5) and ok


def test_holder_dimension_mismatch():
    with pytest.raises(DimensionError):
        holder_check(CoeffBox.from_poly(z1 + z2), [1, 1], [3, 3, 3])


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_holder_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    b = CoeffBox.from_poly(random_poly(rng, n, int(rng.integers(1, 10))))
    cs = cs_from_ps(list(1.05 + 5 * rng.random(n - 1)))
    assert holder_check(b, rng.uniform(-3, 3, n), cs).holds


def test_norm_interp_monomial_equality():
    lhs, rhs, ok = norm_interp_check(CoeffBox.from_poly(z1**3 * z2), [0.2, -1], [1, 0.5], [0.3, 2], 3.0)
    assert lhs == pytest.approx(rhs, rel=1e-12) and ok


def test_norm_interp_phi2(phi2):
    b = expand_ratio(phi2.ptilde, phi2.p, (64, 64))
    assert norm_interp_check(b, [0, 0], [1, 1], [1, 1], 2).holds


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_norm_interp_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    b = CoeffBox.from_poly(random_poly(rng, n, int(rng.integers(1, 10))))
    args = [rng.uniform(-2, 2, n) for _ in range(3)]
    assert norm_interp_check(b, *args, 1.01 + 4 * rng.random()).holds


def test_feasibility_examples():
    assert hp_embed_feasible([0.5, 0.5], [(1, "closed"), (1, "closed")]).feasible
    assert not hp_embed_feasible([0.5, 0.5], [(1, "open"), (1, "open")]).feasible
    v = hp_embed_feasible([0.7, 0.7, 100], [1.5, 1.5, INF])
    assert v.feasible and 2 in v.outside_range
    assert sum(1 / c for c in v.cs) == pytest.approx(1)
    assert all(c * a <= t for c, a, t in zip(v.cs[:2], [0.7, 0.7], [1.5, 1.5]))
    assert hp_embed_feasible([1.0, 0.45, 100], [1.5, 1.5, INF]).feasible
    assert not hp_embed_feasible([0.8, 0.8, 1], [1.5, 1.5, INF]).feasible


def test_feasibility_nonpositive_weights():
    v = hp_embed_feasible([-1, 0.9], [INF, 1])
    assert v.feasible


@pytest.mark.parametrize("n", range(2, 9))
def test_chain_terminal_identity(n):
    ch = interpolation_chain(n)
    assert ch.terminal_ok
    assert ch.c == Fraction(2 * (n - 1), n)
    assert ch.V_prime == tuple(-2 * e for e in ones_except(n, n - 1))
    assert sum(ch.exponents) == 1 and set(ch.exponents) == {Fraction(1, n)}


def test_chain_small_cases():
    ch = interpolation_chain(2)
    assert ch.c == 1 and ch.Us[0] == (-2, 0)
    ch = interpolation_chain(3)
    assert ch.c == Fraction(4, 3)
    assert ch.Us == ((-4, -2, -2), (-2, -2, 0))


@pytest.mark.parametrize("n", [2, 3])
def test_chain_inequalities_hold(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        b = CoeffBox.from_poly(random_poly(rng, n, 6))
        assert chain_check(b, rng.uniform(-1, 1, n)).holds


def test_membership_gain():
    assert membership_gain_verdict(Fraction(-1, 2), 2).exponent == Fraction(1, 2)
    assert membership_gain_verdict(-1e-12, 4).exponent == pytest.approx(0.5)
    with pytest.raises(ValueError):
        membership_gain_verdict(0.1, 2)
