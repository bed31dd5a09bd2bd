import numpy as np
import pytest
from hypothesis import given, settings
from scipy.special import comb

from riflab.polycore import MultiPoly
from riflab.series import BoxTooLarge, CoeffBox, convolve_poly, diagonal, expand_ratio

from conftest import fav, polys

z1, z2 = MultiPoly.variables(2)


def test_binomial_oracle():
    box = expand_ratio(MultiPoly.constant(1, 2), fav(2), (30, 30))
    k1, k2 = np.indices(box.coeffs.shape)
    exact = comb(k1 + k2, k1) * 2.0 ** -(k1 + k2 + 1)
    m = k1 + k2 <= 30
    np.testing.assert_allclose(box.coeffs[m].real, exact[m], rtol=1e-12)


def test_phi2_coefficients(phi2):
    box = expand_ratio(phi2.ptilde, phi2.p, (4, 4))
    assert box[(1, 1)] == pytest.approx(0.5, abs=1e-15)
    assert box[(2, 2)] == pytest.approx(0.125, abs=1e-15)
    np.testing.assert_allclose(diagonal(box)[:4].real, [0, 0.5, 0.125, 0.0625], atol=1e-15)


def test_three_variable_box_shape():
    box = expand_ratio(MultiPoly.constant(1, 3), fav(3), (3, 4, 5))
    assert box.orders == (3, 4, 5)
    assert box.sub((1, 1, 1)).coeffs.shape == (2, 2, 2)


def test_box_limit():
    with pytest.raises(BoxTooLarge):
        expand_ratio(z1, fav(2), (100, 100), max_coeffs=1000)


def test_zero_constant_term():
    with pytest.raises(ZeroDivisionError):
        expand_ratio(z1, z1 + z2, (3, 3))


def test_box_is_read_only():
    box = CoeffBox(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        box.coeffs[0, 0] = 1


@given(polys(max_n=3, max_terms=5, max_deg=2), polys(max_n=3, max_terms=5, max_deg=2))
@settings(max_examples=60, deadline=None)
def test_convolving_back_gives_numerator(q, p):
    if q.n != p.n:
        return
    p = p + MultiPoly.constant(5 + sum(abs(c) for _, c in p), p.n)
    orders = (6,) * p.n
    box = expand_ratio(q, p, orders)
    np.testing.assert_allclose(convolve_poly(box, p), CoeffBox.from_poly(q, orders).coeffs, atol=1e-9)
