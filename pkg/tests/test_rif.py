import numpy as np
import pytest

from riflab.polycore import MultiPoly, reflect
from riflab.rif import (
    DegenerateVariable,
    InteriorZero,
    SliceVanishes,
    build_rif,
    slice_batch,
    slice_blaschke,
)

from conftest import fav, three_var_example

z1, z2 = MultiPoly.variables(2)


def test_two_variable_example_numerator(phi2):
    assert phi2.ptilde == 2 * z1 * z2 - z1 - z2
    assert phi2.multidegree == (1, 1)
    assert phi2.stability_certificate["max_unimodular_deviation"] < 1e-9


def test_vanishing_inside_rejected():
    with pytest.raises((InteriorZero, DegenerateVariable)):
        build_rif(z1)
    with pytest.raises(InteriorZero):
        build_rif(1 - 2 * z1 * z2)
    with pytest.raises(InteriorZero):
        build_rif(z1 - 0.5 + z2 * 0.1)


def test_constant_in_a_variable_rejected():
    with pytest.raises(DegenerateVariable):
        build_rif(MultiPoly(2, {(0, 0): 2, (1, 0): 1}))


def test_half_product_numerator():
    f = build_rif(1 - z1 * z2 / 2)
    assert f.ptilde.allclose(z1 * z2 - 0.5)


def test_three_variable_reflection():
    p = three_var_example()
    z1, z2, z3 = MultiPoly.variables(3)
    expected = (2 * z1 * z2 - z1 - z2) * z3 + (2 - z1 - z2) / 2
    assert reflect(p).allclose(expected)


def test_slice_at_minus_one(phi2):
    s = slice_blaschke(phi2, 1, [-1.0])
    assert len(s.zeros) == 1
    assert s.zeros[0] == pytest.approx(1 / 3)
    assert s.delta == pytest.approx(2 / 3)
    assert s.degree_defect == 0


def test_slice_closed_form(phi2):
    th = np.linspace(0.01, np.pi, 50)
    sb = slice_batch(phi2, 1, np.exp(1j * th)[:, None])
    np.testing.assert_allclose(sb.delta, 1 - (5 - 4 * np.cos(th)) ** -0.5, atol=1e-10)


def test_degenerate_slice_at_one(phi2):
    s = slice_blaschke(phi2, 1, [1.0])
    assert s.zeros == () and s.degree_defect == 1 and s.delta is None and s.is_constant


def test_counts_plus_defect_is_degree(phi3):
    rng = np.random.default_rng(0)
    sb = slice_batch(phi3, 0, np.exp(2j * np.pi * rng.random((500, 2))))
    assert np.all(sb.counts + sb.degree_defect == phi3.multidegree[0])
    assert np.all((sb.delta > 0) & (sb.delta <= 1))


def test_slice_needs_torus_point(phi2):
    with pytest.raises(ValueError):
        slice_blaschke(phi2, 1, [0.5])


def test_vanishing_slice_reported():
    # ptilde = z1 z2 - z1 vanishes identically on z2 = 1... build the RIF by hand
    from riflab.rif import RIF

    p = 2 - z1 + 0 * z2 + z2 * 0.5
    f = RIF(p, z1 * (z2 - 1), (1, 1))
    with pytest.raises(SliceVanishes):
        slice_blaschke(f, 0, [1.0])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_unimodular_on_torus(n):
    f = build_rif(fav(n))
    dev, kept = f.torus_deviation(10_000)
    assert dev < 1e-9 and kept > 9_000


def test_derivative_matches_finite_difference(phi_ex):
    z = np.array([0.3 + 0.1j, -0.2 + 0.4j, 0.5j])
    h = 1e-6
    for k in range(3):
        dz = np.zeros(3, complex)
        dz[k] = h
        fd = (phi_ex(z + dz) - phi_ex(z - dz)) / (2 * h)
        assert abs(phi_ex.derivative(z, k) - fd) < 1e-7
