import math

import numpy as np
import pytest

from emnls.grid import make_grid
from emnls.groundstate import (
    GroundStateBundle,
    GroundStateError,
    PhysParams,
    ground_state,
    gn_quotient,
    lattice_soliton,
    shooting_profile,
    solve_base_profile,
    soliton_field,
    soliton_instability_rate,
    sphere_area,
)

# frozen (n, p) = (3, 3) values; R(0) agrees with the shooting oracle
FROZEN_33 = {
    "R0": 4.33738768,
    "beta_sq": 0.5,
    "gamma": 0.57735027,
    "c_gn": 0.0407361021,
    "soliton_l2": 5.16959854,
    "soliton_grad_sq": 40.0871236,
    "soliton_energy": 6.68118727,
    "x_star": 1071.31832,
    "me_threshold": 178.553053,
    "grad_threshold": 5.72110124,
}


@pytest.mark.parametrize("n,p", [(3, 1 + 4 / 3), (3, 5.0), (4, 3.0), (2, 3.0), (3.5, 3.0)])
def test_window_rejected(n, p):
    with pytest.raises(ValueError):
        PhysParams(n, p)


def test_exponents():
    P = PhysParams(3, 3.0)
    assert P.s_c == 0.5
    assert P.mass_power == 2.0
    assert P.alpha == pytest.approx(math.sqrt(6) / 2)
    assert P.lam == 0.5
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_frozen_values(b33):
    prof_R0 = b33.Q(0.0) / b33.beta
    assert prof_R0 == pytest.approx(FROZEN_33["R0"], rel=1e-8)
    assert b33.beta ** 2 == pytest.approx(FROZEN_33["beta_sq"], rel=1e-8)
    assert b33.gamma == pytest.approx(FROZEN_33["gamma"], rel=1e-7)
    for key in ("c_gn", "soliton_l2", "soliton_grad_sq", "soliton_energy", "x_star",
                "me_threshold", "grad_threshold"):
        assert getattr(b33, key) == pytest.approx(FROZEN_33[key], rel=1e-8), key


@pytest.mark.parametrize("n,p", [(3, 3.0), (3, 4.0), (4, 2.5), (5, 2.0)])
def test_pokhozhaev_and_normalisation(n, p):
    b = ground_state(n, p)
    assert b.residuals["pokhozhaev_grad"] <= 1e-6
    assert b.residuals["pokhozhaev_lp"] <= 1e-6
    assert b.q_grad_l2 == pytest.approx(b.q_l2, rel=1e-6)
    assert b.q_lp1 == pytest.approx((p + 1) / 2 * b.q_l2 ** 2, rel=1e-6)


def test_shooting_oracle_agrees(b33):
    r, R, r_valid, amp = shooting_profile(b33.params)
    assert amp == pytest.approx(FROZEN_33["R0"], rel=1e-8)
    assert r_valid > 10.0
    m = r <= r_valid
    err = np.abs(b33.Q(r[m] / b33.gamma) / b33.beta - R[m]).max() / amp
    assert err < 1e-4


def test_solver_fails_loudly_on_small_box():
    with pytest.raises(GroundStateError) as ei:
        solve_base_profile(PhysParams(3, 3.0), r_max=4.0)
    assert "r_max" in str(ei.value)


def test_bundle_roundtrip(tmp_path, b33):
    jp, cp = b33.save(tmp_path / "b.json")
    back = GroundStateBundle.load(jp)
    assert back.x_star == b33.x_star
    r = np.linspace(0, 10, 57)
    np.testing.assert_array_equal(back.Q(r), b33.Q(r))


def test_soliton_field_box_check(b33):
    with pytest.raises(ValueError, match="box too small"):
        soliton_field(b33, make_grid(3, 16, 3.0))
    with pytest.raises(ValueError):
        soliton_field(b33, make_grid(2, 16, 30.0))


def test_gn_quotient_at_optimizer(b33, grid64):
    q = gn_quotient(soliton_field(b33, grid64, boundary_tol=1.0), b33.params)
    assert q == pytest.approx(b33.c_gn, rel=1e-4)


def test_lattice_soliton_is_stationary(b33):
    g = make_grid(3, 64, 10.0)
    w = lattice_soliton(b33, g).values
    k2 = sum(g.k_axis(j) ** 2 for j in range(3))
    lap = np.real(np.fft.ifftn(-k2 * np.fft.fftn(w)))
    res = lap - b33.lam * w + w ** 3
    assert np.abs(res).max() < 1e-9 * np.abs(w).max()
    raw = soliton_field(b33, g, boundary_tol=1.0).values
    assert np.abs(w - raw).max() < 2e-3 * raw.max()


def test_instability_rate(b33):
    sigma = soliton_instability_rate(b33, points=800, r_max=20.0)
    assert sigma == pytest.approx(2.75, abs=0.01)
