import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emnls.functionals import (
    DEFAULT_BAND,
    c_tau,
    classify,
    cpn_branches,
    cpn_constant,
    double_cut_chain,
    double_cut_check,
    electric_P,
    energy_report,
    kato_remainder,
    minimal_energy_P,
    p_star,
    p_star_curvature_bound,
    p_star_inverse,
    proximity_functionals,
    resolution_band,
    trapping_component,
    trapping_term,
)
from emnls.grid import Field, integrate, make_grid
from emnls.groundstate import ground_state, soliton_field
from emnls.potentials import (
    assemble_constants,
    gaussian_rotational_potential,
    inverse_square_potential,
    power_law_potential,
    zero_potential,
)


@pytest.fixture(scope="module")
def uq(b33, grid64):
    return soliton_field(b33, grid64, boundary_tol=1.0)


def test_soliton_energy_matches_bundle(b33, uq):
    rep = energy_report(uq, None, b33.params)
    assert rep.E_A == pytest.approx(b33.soliton_energy, rel=1e-4)
    assert rep.ME == pytest.approx(b33.me_threshold, rel=1e-4)
    assert rep.G == pytest.approx(b33.grad_threshold, rel=1e-4)
    # the tail of u_Q dips below zero, so |u| has kinks at round-off scale
    assert rep.E_K == pytest.approx(rep.E_A, rel=1e-6)


def test_homogeneity(b33, uq):
    P = b33.params
    r1 = energy_report(uq, None, P)
    r2 = energy_report(uq * 1.3, None, P)
    assert r2.mass == pytest.approx(1.3 ** 2 * r1.mass, rel=1e-13)
    assert r2.kinetic_A == pytest.approx(1.3 ** 2 * r1.kinetic_A, rel=1e-13)
    assert r2.nonlinear == pytest.approx(1.3 ** 4 * r1.nonlinear, rel=1e-13)
    assert r2.G == pytest.approx(1.3 * r1.G, rel=1e-13)


def test_zero_field(b33, grid32):
    rep = energy_report(Field(grid32, np.zeros(grid32.shape)), None, b33.params)
    assert rep.mass == 0.0 and rep.ME == 0.0


def test_electric_term_included(b33, uq):
    pot = zero_potential(electric=inverse_square_potential(0.1, eps=0.5))
    rep = energy_report(uq, pot, b33.params)
    assert rep.potential_term < 0
    base = energy_report(uq, None, b33.params)
    assert rep.E_A == pytest.approx(base.E_A + 0.5 * rep.potential_term, rel=1e-12)


def test_P_and_P_star(b33):
    assert minimal_energy_P(b33.x_star, b33) == pytest.approx(b33.me_threshold, rel=1e-8)
    assert p_star(0.0, b33) == 0.0
    with pytest.raises(ValueError):
        minimal_energy_P(-1.0, b33)
    with pytest.raises(ValueError):
        p_star(-2 * b33.x_star, b33)
    assert electric_P(10.0, b33, 0.0) == pytest.approx(minimal_energy_P(10.0, b33))


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1e5))
def test_p_star_properties(x):
    b = ground_state(3, 3.0)
    v = float(p_star(x, b))
    assert v >= -1e-9
    # increasing on [0, inf) and inverted by bisection
    assert float(p_star(x * 1.01 + 1e-3, b)) >= v
    if v > 1e-6:
        assert p_star_inverse(v, b) == pytest.approx(x, rel=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1e4))
def test_calculus_majorant(x):
    b = ground_state(3, 3.0)
    C = p_star_curvature_bound(b)
    assert float(p_star(x, b)) <= 0.5 * C * x * x * (1 + 1e-12) + 1e-12


def test_curvature_bound_branches():
    b = ground_state(3, 4.0)  # n(p-1) = 9 > 8
    assert p_star_curvature_bound(b) == math.inf
    assert math.isfinite(p_star_curvature_bound(b, upper=1.0))


def test_inverse_rejects_negative(b33):
    with pytest.raises(ValueError):
        p_star_inverse(-1.0, b33)
    assert p_star_inverse(0.0, b33) == 0.0


def test_cpn_and_c_tau(b33):
    le8, gt8 = cpn_branches(b33)
    assert cpn_constant(b33.params, b33) == le8
    b34 = ground_state(3, 4.0)
    assert cpn_constant(b34.params, b34) == cpn_branches(b34)[1]
    assert c_tau(b33.params, b33) == pytest.approx(0.125, rel=1e-12)


@pytest.mark.parametrize("scale,region", [(0.9, "R1"), (1.0, "Indeterminate"), (1.2, "R2"), (1.5, "R2")])
def test_classify_soliton_scales(b33, uq, scale, region):
    cl = classify(uq * scale, None, None, b33)
    assert cl.region == region
    assert cl.band >= DEFAULT_BAND
    assert cl.to_dict()["region"] == region


def test_classify_electric_variant(b33, uq):
    consts = assemble_constants(b33.params, b33.x_star, a0=0.05)
    pot = zero_potential(electric=inverse_square_potential(0.05 / 4, eps=0.0))
    cl = classify(uq * 0.9, pot, consts, b33)
    assert cl.electric_variant
    assert cl.me_threshold < b33.me_threshold
    assert cl.g_threshold < b33.grad_threshold


def test_classify_hypothesis_flags(b33, uq):
    cl = classify(uq * 1.2, power_law_potential(0.5, 0.01), None, b33)
    assert cl.blowup_hypotheses["trap_ok"] is False
    cl = classify(uq * 1.2, gaussian_rotational_potential(0.01, 1.0), None, b33)
    assert cl.blowup_hypotheses["trap_ok"] is True


def test_kato_remainder_real_field_vanishes(grid64):
    u = Field(grid64, np.exp(-grid64.radius ** 2))
    lhs, rhs = kato_remainder(u, None)
    assert abs(lhs) <= 1e-10 and abs(rhs) <= 1e-10


def test_kato_remainder_soliton_nyquist(b33, uq):
    # complex derivatives keep the Nyquist mode; the sampled u_Q has ~1e-8 of its
    # kinetic energy there, which shows up on both sides
    lhs, rhs = kato_remainder(uq, None)
    assert abs(lhs) < 1e-7 * b33.soliton_grad_sq
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_kato_remainder_plane_wave_phase(grid32):
    # u = rho e^{i k.x}: remainder = |k|^2 ||rho||^2
    rho = np.exp(-grid32.radius ** 2)
    x1 = grid32.coords()[0]
    u = Field(grid32, rho * np.exp(0.7j * x1))
    lhs, rhs = kato_remainder(u, None)
    assert lhs == pytest.approx(0.49 * (math.pi / 2) ** 1.5, rel=1e-8)
    assert rhs == pytest.approx(lhs, rel=1e-8)


def test_double_cut_examples(b33, uq, grid64):
    chain = double_cut_chain(uq * 0.5, None, b33)
    assert chain["region"] == "R1" and chain["holds"]
    x1 = grid64.coords()[0]
    boosted = Field(grid64, 1.5 * uq.values * np.exp(0.5j * x1))
    assert classify(boosted, None, None, b33).region == "R2"
    chain = double_cut_chain(boosted, None, b33)
    assert chain["region"] == "R2" and chain["holds"]
    assert set(chain["links"]) == {"kato_above_ground_state", "kato_order"}
    fast = Field(grid64, 1.5 * uq.values * np.exp(1j * x1))
    assert classify(fast, None, None, b33).region == "OutsideR"
    with pytest.raises(ValueError):
        double_cut_check(fast, None, b33)


def test_proximity_and_trapping(b33, uq, grid64):
    x1 = grid64.coords()[0]
    u = Field(grid64, 1.2 * uq.values * np.exp(0.2j * x1))
    f_rk, f_ke = proximity_functionals(u, None, b33)
    assert 0 < f_rk < f_ke
    assert trapping_term(u, None) == 0.0
    # real u: only the -|x| (A . B_tau) |u|^2 part survives
    pot = gaussian_rotational_potential(0.05, 1.0)
    A = pot.vector_on(grid64)
    B = trapping_component(pot, grid64)
    adotb = sum(np.broadcast_to(a, grid64.shape) * b.values for a, b in zip(A, B))
    closed = -integrate(Field(grid64, grid64.radius * adotb * uq.values ** 2))
    assert trapping_term(uq, pot) == pytest.approx(closed, rel=1e-12)


def test_resolution_band(grid32, grid64, b33):
    assert resolution_band(Field(grid32, np.zeros(grid32.shape))) == 0.0
    coarse = resolution_band(soliton_field(b33, make_grid(3, 32, 8.0), boundary_tol=1.0))
    fine = resolution_band(soliton_field(b33, grid64, boundary_tol=1.0))
    assert fine < coarse < 0.1


def test_proximity_at_ground_state(b33):
    # 64^3 lattice error in ||grad u||^2 ||u||^2 is ~1e-5 relative; 128^3 resolves it
    grid = make_grid(3, 128, 12.0)
    f_rk, f_ke = proximity_functionals(soliton_field(b33, grid, boundary_tol=1.0), None, b33)
    assert abs(f_ke) <= 1e-4
    assert abs(f_rk) <= 1e-6


def test_proximity_real_field_has_no_kato_remainder(b33, grid64):
    f_rk, _ = proximity_functionals(Field(grid64, np.exp(-grid64.radius ** 2)), None, b33)
    assert abs(f_rk) <= 1e-10
