from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from riflab.polycore import MultiPoly
from riflab.rif import build_rif


def fav(n: int) -> MultiPoly:
    """``n - z_1 - ... - z_n``, stable with a single torus zero at (1, ..., 1)."""
    zs = MultiPoly.variables(n)
    p = MultiPoly.constant(n, n)
    for z in zs:
        p = p - z
    return p


def three_var_example() -> MultiPoly:
    z1, z2, z3 = MultiPoly.variables(3)
    return (2 - z1 - z2) + z3 * (2 * z1 * z2 - z1 - z2) / 2


@pytest.fixture(scope="session")
def phi2():
    return build_rif(fav(2))


@pytest.fixture(scope="session")
def phi3():
    return build_rif(fav(3))


@pytest.fixture(scope="session")
def phi_ex():
    return build_rif(three_var_example())


coeff = st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False)


@st.composite
def polys(draw, max_n=4, max_terms=12, max_deg=3):
    n = draw(st.integers(1, max_n))
    exps = draw(
        st.lists(st.tuples(*[st.integers(0, max_deg)] * n), min_size=1, max_size=max_terms, unique=True)
    )
    return MultiPoly(n, {e: draw(coeff) for e in exps})


def random_poly(rng: np.random.Generator, n: int, terms: int, max_deg: int = 3) -> MultiPoly:
    out = {}
    terms = min(terms, (max_deg + 1) ** n)
    while len(out) < terms:
        e = tuple(int(x) for x in rng.integers(0, max_deg + 1, n))
        out[e] = complex(rng.normal(), rng.normal())
    return MultiPoly(n, out)
