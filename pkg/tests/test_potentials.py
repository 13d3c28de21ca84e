import math

import numpy as np
import pytest

from emnls.grid import make_grid
from emnls.potentials import (
    assemble_constants,
    custom_electric,
    divergence_residual,
    electric_constants,
    estimate_constants,
    gaussian_rotational_potential,
    gaussian_bump,
    gaussian_well,
    generic_btau,
    glued_power_potential,
    inverse_square_potential,
    l2r_linf_norm,
    potential_report,
    power_law_potential,
    sampled_potential,
    trapping_component,
    weighted_sup_norm,
    zero_potential,
)


@pytest.fixture(scope="module")
def points():
    rng = np.random.default_rng(7)
    d = rng.normal(size=(100, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return d * rng.uniform(0.2, 5.0, 100)[:, None]


@pytest.mark.parametrize("pot", [
    power_law_potential(0.5), power_law_potential(1.5, 0.3), glued_power_potential(0.5, 2.0),
    gaussian_rotational_potential(1.0, 1.3),
], ids=lambda p: p.kind)
def test_closed_form_btau_matches_field_tensor(pot, points):
    closed = np.stack(np.broadcast_arrays(*pot.btau(tuple(points.T))), axis=1)
    generic = generic_btau(pot, points)
    assert np.abs(closed - generic).max() <= 1e-10 * np.abs(closed).max()


def test_alpha_one_has_no_trapping(points):
    pot = power_law_potential(1.0, 2.0)
    closed = np.stack(np.broadcast_arrays(*pot.btau(tuple(points.T))), axis=1)
    assert np.all(closed == 0.0)
    assert np.abs(generic_btau(pot, points)).max() < 1e-12


def test_coulomb_gauge():
    g = make_grid(3, 32, 4.0)
    for pot in (power_law_potential(0.5), glued_power_potential(0.5, 2.0), gaussian_rotational_potential()):
        assert divergence_residual(pot, g) <= 1e-8


def test_lattice_trapping_matches_closed_form():
    g = make_grid(3, 32, 4.0)
    pot = gaussian_rotational_potential(1.0, 1.0)
    lat = trapping_component(pot, g)
    xs = g.dense_coords()
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = pot.btau(xs)
    for a, b in zip(lat, closed):
        b = np.array(np.broadcast_to(b, g.shape))
        b[g.origin_index] = 0.0
        np.testing.assert_allclose(a.values, b, atol=1e-12)


def test_sampled_potential_trapping_is_spectral():
    g = make_grid(3, 32, 6.0)
    pot = gaussian_rotational_potential(1.0, 1.5)
    samp = sampled_potential(g, pot.vector_on(g))
    lat = trapping_component(samp, g)
    ref = trapping_component(pot, g)
    err = max(np.abs(a.values - b.values).max() for a, b in zip(lat, ref))
    assert err < 1e-5


def test_weighted_norms():
    # |x|^2 |B_tau| = 2 (1 - alpha) c |x|^(2 - 2 alpha) on the equator, sup norm infinite unless alpha = 1
    assert weighted_sup_norm(power_law_potential(0.5)) == math.inf
    assert weighted_sup_norm(power_law_potential(1.0)) == 0.0
    glued = weighted_sup_norm(glued_power_potential(0.5, 2.0, 0.01))
    assert 0.0 < glued < 0.125
    assert weighted_sup_norm(glued_power_potential(0.5, 2.0, 0.02)) == pytest.approx(2 * glued, rel=1e-9)
    # Gaussian profile: sup of 2|x|^2 |f + s f'| |x_perp|/|x| is attained on the equator
    c, w = 1.0, 1.0
    r = np.linspace(1e-3, 5, 200001)
    expect = np.max(2 * r ** 2 * np.abs(c * np.exp(-r * r / w ** 2) * (1 - r * r / w ** 2)))
    assert weighted_sup_norm(gaussian_rotational_potential(c, w)) == pytest.approx(expect, rel=1e-6)
    assert l2r_linf_norm(glued_power_potential(0.5, 2.0)) < math.inf


def test_glued_rejects_unit_exponents():
    with pytest.raises(ValueError):
        glued_power_potential(1.0, 2.0)


def test_constant_arithmetic(b33):
    P = b33.params
    c = assemble_constants(P, b33.x_star, norm_x2_btau=0.06, a0=0.2, a1=0.05)
    b0 = 2.0 * 0.06
    xs_e = 0.8 ** (2 / (P.s_c * 2)) * b33.x_star
    assert c.b0 == pytest.approx(b0, rel=1e-12)
    assert c.c_of_A0_Btau == pytest.approx((0.4 + 0.05 + 2 * b0) / 6 * xs_e, rel=1e-12)
    assert c.satisfies_c1 is (6 * 0.2 + 0.1 + 4 * b0 < 2)
    with pytest.raises(ValueError):
        assemble_constants(P, b33.x_star, a0=1.0)


def test_electric_constants():
    # attractive inverse square: |x|^2 (A0)_- = c0 and d_r A0 > 0
    c0, c1 = electric_constants(inverse_square_potential(0.05, eps=0.0))
    assert c0 == pytest.approx(0.05, rel=1e-9)
    assert c1 == 0.0
    c0, c1 = electric_constants(gaussian_well(1.0))
    assert c0 == pytest.approx(math.exp(-1.0), rel=1e-9)
    assert c1 == 0.0
    # repulsive bump: (d_r A0)_- = 2 r e^{-r^2}, so sup r^3 (d_r A0)_- = 2 (2/e)^2
    _, c1 = electric_constants(gaussian_bump(1.0))
    assert c1 == pytest.approx(8 * math.exp(-2.0), rel=1e-9)
    with pytest.raises(ValueError, match="manual"):
        electric_constants(custom_electric(lambda xs: 0 * xs[0], regular=False))


def test_estimate_and_report(b33):
    pot = glued_power_potential(0.5, 2.0, 0.01)
    consts = estimate_constants(pot, None, b33.params, b33)
    assert consts.b0 == pytest.approx(2 * consts.norm_x2_btau)
    manual = estimate_constants(zero_potential(), gaussian_well(0.5), b33.params, b33,
                                manual_constants={"a0": 0.1, "a1": 0.0})
    assert manual.a0 == 0.1
    rep = potential_report(pot, None, b33.params, b33)
    assert rep["kind"] == "glued"
    assert rep["trapping_below_c_tau"] is True
    assert rep["c_tau"] == pytest.approx(0.125)
    assert rep["a_in_l4_loc"] is True
    assert potential_report(power_law_potential(0.5), None, b33.params, b33)["norms"]["x2_btau_sup"] == "inf"


def test_dilation_and_scaling():
    pot = gaussian_rotational_potential(1.0, 1.0)
    pts = (np.array([0.3, 0.7]), np.array([-0.2, 0.4]), np.array([0.1, 0.0]))
    lam = 2.0
    d = pot.dilated(lam)
    for a, b in zip(d.vector(pts), pot.vector(tuple(lam * x for x in pts))):
        np.testing.assert_allclose(a, lam * b)
    s = pot.scaled(3.0)
    for a, b in zip(s.btau(pts), pot.btau(pts)):
        np.testing.assert_allclose(a, 3 * b)
    assert pot.scaled(0.0).is_zero
