"""Named verification suites for the identities, inequalities and oracles of the library.

Each suite is deterministic given a seed and returns a JSON-ready dict::

    {"suite": name, "anchor": ..., "passed": bool,
     "margins": {check: slack}, "details": {...}}

A margin is the worst-case slack of one check over all of its cases;
the check passes when the slack is non-negative. Reports carry no timings,
so ``run_all`` with a fixed seed is byte-for-byte reproducible.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import brentq

from .functionals import (
    classify,
    cpn_constant,
    c_tau,
    double_cut_chain,
    energy_report,
    kato_remainder,
    minimal_energy_P,
    p_star,
    p_star_curvature_bound,
    p_star_inverse,
    trapping_term,
)
from .grid import Field, covariant_gradient, integrate, make_grid, norm_l2
from .groundstate import (
    PhysParams,
    ground_state,
    gn_quotient,
    shooting_profile,
    soliton_field,
)
from .potentials import (
    assemble_constants,
    divergence_residual,
    gaussian_rotational_potential,
    generic_btau,
    glued_power_potential,
    power_law_potential,
    trapping_component,
    weighted_sup_norm,
    zero_potential,
)

__all__ = ["SUITES", "UnknownSuiteError", "run_suite", "run_all", "report_json", "suite_names"]

SUITES = {}

# (n, p) pairs inside the intercritical window used by the scalar suites
WINDOW_CASES = ((3, 3.0), (3, 4.0), (4, 2.5))
# n(p-1) = 8 representative for the quadratic branch of P*
QUADRATIC_CASE = (3, 11.0 / 3.0)
BAND = 1e-9


class UnknownSuiteError(KeyError):
    def __init__(self, name):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unknown suite {self.name!r}; available: {', '.join(suite_names())}"


def suite(name, anchor):
    def deco(fn):
        SUITES[name] = (fn, anchor)
        return fn
    return deco


def suite_names():
    return list(SUITES)


class _Checks:
    """Accumulates worst-case slack per named check."""

    def __init__(self):
        self.margins = {}
        self.violations = {}

    def add(self, name, slack):
        slack = float(slack)
        prev = self.margins.get(name, math.inf)
        self.margins[name] = min(prev, slack) if math.isfinite(slack) else -math.inf
        self.violations[name] = self.violations.get(name, 0) + int(not slack >= 0.0)

    @property
    def passed(self):
        return all(v == 0 for v in self.violations.values())


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------- sample generation

def _bump(grid, center, width):
    xs = grid.coords()
    r2 = sum((x - c) ** 2 for x, c in zip(xs, center))
    return np.broadcast_to(np.exp(-r2 / width ** 2), grid.shape)


def _soliton_shape(rng, grid, q_vals, q0, perturb=True):
    """Lattice-shifted, phase-modulated soliton plus up to two complex Gaussian bumps."""
    xs = grid.coords()
    shift = tuple(int(s) for s in rng.integers(-4, 5, grid.n_dims))
    f = np.roll(q_vals, shift, axis=tuple(range(grid.n_dims))).astype(complex)
    # log-uniform sizes so that some shapes sit close to the ground state
    k = rng.normal(size=grid.n_dims) * 0.25 * 10.0 ** rng.uniform(-2.0, 0.0)
    f *= np.exp(1j * sum(kj * x for kj, x in zip(k, xs)))
    if perturb:
        for _ in range(int(rng.integers(0, 3))):
            c = rng.uniform(-2.0, 2.0, grid.n_dims)
            w = rng.uniform(0.8, 2.0)
            coef = 0.15 * q0 * 10.0 ** rng.uniform(-2.0, 0.0) * complex(rng.normal(), rng.normal())
            f = f + coef * _bump(grid, c, w)
    return Field(grid, f)


def _me_of_amplitude(rep, params):
    """Scaled energy of ``a*f`` from the report of ``f``, by homogeneity."""
    K, M, N = rep.kinetic_A, rep.mass, rep.nonlinear
    p, half_mp = params.p, params.mass_power / 2.0
    return lambda a: (0.5 * a * a * K - a ** (p + 1.0) * N / (p + 1.0)) * (a * a * M) ** half_mp


def _amplitude_windows(rep, params, threshold):
    """``(a_lo, a_hi)``: amplitudes below ``a_lo`` or above ``a_hi`` have ME below threshold.

    ``a_lo`` is None when the scaled energy never reaches the threshold.
    """
    me = _me_of_amplitude(rep, params)
    grid_a = np.geomspace(1e-3, 20.0, 4000)
    vals = me(grid_a)
    j = int(np.argmax(vals))
    if vals[j] < threshold:
        return None, float(grid_a[j])
    lo = brentq(lambda a: me(a) - threshold, grid_a[0], grid_a[j], xtol=1e-14)
    hi = brentq(lambda a: me(a) - threshold, grid_a[j], grid_a[-1], xtol=1e-14)
    return lo, hi


def _lattice(N=64, L=8.0):
    return make_grid(3, N, L)


# ---------------------------------------------------------------- suites

@suite("ground-state", "ground state: Pokhozhaev identities and independent shooting oracle")
def _ground_state(rng):
    chk = _Checks()
    details = {}
    for n, p in WINDOW_CASES:
        b = ground_state(n, p)
        res = b.residuals
        chk.add("pokhozhaev_grad", 1e-6 - res["pokhozhaev_grad"])
        chk.add("pokhozhaev_lp", 1e-6 - res["pokhozhaev_lp"])
        r, R, r_valid, amp = shooting_profile(b.params)
        m = r <= r_valid
        fixed = b.Q(r[m] / b.gamma) / b.beta
        err = float(np.abs(fixed - R[m]).max() / R[0])
        chk.add("shooting_linf", 1e-4 - err)
        details[f"n={n},p={p:g}"] = {
            "pokhozhaev_grad": res["pokhozhaev_grad"], "pokhozhaev_lp": res["pokhozhaev_lp"],
            "shooting_linf_rel": err, "shooting_r_valid": r_valid, "R0": amp,
            "c_gn": b.c_gn, "x_star": b.x_star,
        }
    return chk, details


@suite("gn-sharpness", "sharp Gagliardo-Nirenberg inequality and its optimizer")
def _gn_sharpness(rng, count=200):
    b = ground_state(3, 3.0)
    grid = _lattice()
    chk = _Checks()
    worst = -math.inf
    for _ in range(count):
        f = np.zeros(grid.shape)
        for _ in range(int(rng.integers(1, 5))):
            f = f + rng.uniform(-1.0, 1.0) * _bump(grid, rng.uniform(-2.0, 2.0, 3), rng.uniform(0.7, 2.0))
        q = gn_quotient(Field(grid, f), b.params) / b.c_gn - 1.0
        worst = max(worst, q)
        chk.add("random_below_c_gn", 1e-6 - q)
    at_q = gn_quotient(soliton_field(b, grid, boundary_tol=1.0), b.params) / b.c_gn - 1.0
    chk.add("optimizer_attains", 1e-4 - abs(at_q))
    return chk, {"fields": count, "max_relative_quotient_excess": worst,
                 "optimizer_relative_error": at_q}


@suite("minimal-energy", "minimal energy function P, its recentred transform P* and quadratic case")
def _minimal_energy(rng):
    chk = _Checks()
    details = {}
    for n, p in WINDOW_CASES + (QUADRATIC_CASE,):
        b = ground_state(n, p)
        err = _rel(float(minimal_energy_P(b.x_star, b)), b.me_threshold)
        chk.add("P_at_x_star", 1e-8 - err)
        chk.add("P_star_at_zero", 1e-12 - abs(float(p_star(0.0, b))))
        details[f"n={n},p={p:g}"] = {"P_x_star_rel_err": err, "P_star_0": float(p_star(0.0, b))}
    b = ground_state(*QUADRATIC_CASE)
    coef = (b.params.p + 1.0) / b.c_gn
    worst = 0.0
    for y in np.geomspace(1e-10, 1e4, 200):
        x = p_star_inverse(float(y), b, atol=1e-15)
        worst = max(worst, _rel(x, math.sqrt(coef * y)))
    chk.add("quadratic_inverse", 1e-10 - worst)
    details["quadratic_case"] = {"n": QUADRATIC_CASE[0], "p": QUADRATIC_CASE[1],
                                 "max_rel_err": worst, "y_range": [1e-10, 1e4]}
    return chk, details


@suite("kato-remainder", "Kato remainder identity")
def _kato(rng, count=20):
    grid = make_grid(3, 32, 6.0)
    xs = grid.dense_coords()
    pot = gaussian_rotational_potential(0.5, 1.5)
    A = pot.vector_on(grid)
    chk = _Checks()
    worst = 0.0
    for _ in range(count):
        w = rng.uniform(0.9, 1.6)
        c = rng.uniform(-0.5, 0.5, 3)
        eps = rng.uniform(-0.3, 0.3, 3)
        # rho = exp(-|x-c|^2/w^2) (1.5 + sum eps_j sin x_j) > 0
        env = np.exp(-sum((x - cj) ** 2 for x, cj in zip(xs, c)) / w ** 2)
        mod = 1.5 + sum(e * np.sin(x) for e, x in zip(eps, xs))
        rho = env * mod
        drho = [env * (-2.0 * (x - cj) / w ** 2 * mod + e * np.cos(x)) for x, cj, e in zip(xs, c, eps)]
        a = rng.normal(size=3)
        bq = rng.normal(size=3) * 0.2
        # phi = a.x + b1 x2 x3 + b2 x1 x3 + b3 x1 x2
        phi = sum(aj * x for aj, x in zip(a, xs)) + bq[0] * xs[1] * xs[2] + bq[1] * xs[0] * xs[2] \
            + bq[2] * xs[0] * xs[1]
        dphi = [a[0] + bq[1] * xs[2] + bq[2] * xs[1],
                a[1] + bq[0] * xs[2] + bq[2] * xs[0],
                a[2] + bq[0] * xs[1] + bq[1] * xs[0]]
        e = np.exp(1j * phi)
        u = Field(grid, rho * e)
        grad_u = [(dr + 1j * rho * dp) * e for dr, dp in zip(drho, dphi)]
        lhs, rhs = kato_remainder(u, pot, grad_u=grad_u, grad_abs=drho)
        oracle = integrate(Field(grid, rho ** 2 * sum((dp + aj) ** 2 for dp, aj in zip(dphi, A))))
        err = max(_rel(lhs, oracle), _rel(rhs, oracle))
        worst = max(worst, err)
        chk.add("remainder_identity", 1e-10 - err)
    return chk, {"fields": count, "max_rel_err": worst, "potential": "gaussian_rotational"}


@suite("identities", "exponent identity, soliton virial balance and GN rewriting")
def _identities(rng, count=100):
    chk = _Checks()
    details = {}
    worst_useful = 0.0
    for n in (3, 4, 5, 6):
        lo, hi = 1.0 + 4.0 / n, 1.0 + 4.0 / (n - 2.0)
        for t in np.linspace(0.05, 0.95, 19):
            P = PhysParams(n, lo + t * (hi - lo))
            left = 1.0 + P.s_c * (P.p - 1.0) / 2.0
            worst_useful = max(worst_useful, _rel(left, P.np1 / 4.0))
    chk.add("exponent_identity", 1e-8 - worst_useful)
    details["exponent_identity_max_rel"] = worst_useful

    worst_equal = 0.0
    for n, p in WINDOW_CASES + (QUADRATIC_CASE,):
        b = ground_state(n, p)
        P = b.params
        scale = b.soliton_l2 ** P.mass_power
        t1 = 4.0 * P.np1 * b.soliton_energy * scale
        t2 = 2.0 * (P.np1 - 4.0) * b.soliton_grad_sq * scale
        worst_equal = max(worst_equal, abs(t1 - t2) / max(abs(t1), abs(t2)))
    chk.add("soliton_virial_balance", 1e-8 - worst_equal)
    details["soliton_virial_balance_max_rel"] = worst_equal

    grid = make_grid(3, 32, 6.0)
    worst_rw = 0.0
    for _ in range(count):
        n, p = 3, float(rng.uniform(7.0 / 3.0 + 0.01, 4.99))
        P = PhysParams(n, p)
        f = np.zeros(grid.shape, dtype=complex)
        for _ in range(int(rng.integers(1, 4))):
            f = f + complex(rng.normal(), rng.normal()) * _bump(grid, rng.uniform(-1.5, 1.5, 3),
                                                                rng.uniform(0.7, 1.5))
        F = Field(grid, f)
        rep = energy_report(F, None, P)
        g, m = math.sqrt(rep.kinetic_A), norm_l2(F)
        left = g * g * (g ** P.s_c * m ** (1.0 - P.s_c)) ** (p - 1.0)
        right = g ** (P.np1 / 2.0) * m ** (2.0 - (n - 2.0) * (p - 1.0) / 2.0)
        worst_rw = max(worst_rw, _rel(left, right))
    chk.add("gn_rewriting", 1e-13 - worst_rw)
    details["gn_rewriting_max_rel"] = worst_rw
    details["gn_rewriting_fields"] = count
    return chk, details


def _trap_potential(params, bundle, fraction=0.5):
    base = gaussian_rotational_potential(1.0, 1.5)
    nrm = weighted_sup_norm(base, 2.0)
    return base.scaled(fraction * c_tau(params, bundle) / nrm)


@suite("lemma-bounds", "Kato-order bound, P* bound, ground state proximity bound and trapping bound on R2")
def _lemma_bounds(rng, target=500):
    b = ground_state(3, 3.0)
    P = b.params
    grid = _lattice()
    q_vals = soliton_field(b, grid, boundary_tol=1.0).values
    q0 = float(q_vals.max())
    pot = _trap_potential(P, b)
    trap_norm = weighted_sup_norm(pot, 2.0)
    btau = trapping_component(pot, grid)
    cp = cpn_constant(P, b)
    chk = _Checks()
    regions = {}
    kept = 0
    drawn = 0
    min_fke = math.inf
    while kept < target:
        shape = _soliton_shape(rng, grid, q_vals, q0)
        rep = energy_report(shape, pot, P)
        _, a_hi = _amplitude_windows(rep, P, b.me_threshold)
        # log-uniform excess over the threshold amplitude reaches close to the ground state
        for a in a_hi * (1.0 + 10.0 ** rng.uniform(-3.0, math.log10(0.5), 4)):
            u = shape * float(a)
            drawn += 1
            grads = covariant_gradient(u, pot)
            ru = energy_report(u, pot, P, grads=grads)
            cl = classify(u, pot, None, b, trap_norm=trap_norm, report=ru)
            regions[cl.region] = regions.get(cl.region, 0) + 1
            if cl.region != "R2":
                continue
            kept += 1
            r = cl.report
            f_rk = r["x_value"] - r["x_kato"]
            f_ke = r["x_value"] - b.x_star
            min_fke = min(min_fke, f_ke)
            tol = BAND * max(1.0, f_ke)
            chk.add("kato_order", f_ke - f_rk + tol)
            chk.add("p_star_bound", float(p_star(f_ke, b)) - 0.5 * f_rk + tol)
            chk.add("proximity", cp * f_ke - math.sqrt(max(f_rk, 0.0)) + tol)
            trap = trapping_term(u, pot, btau=btau, grads=grads)
            lhs = 8.0 * math.sqrt(r["mass"]) ** P.mass_power * trap
            chk.add("trapping", 2.0 * (P.np1 - 4.0) * f_ke - lhs + 1e-8)
            if kept >= target:
                break
    return chk, {"samples_r2": kept, "drawn": drawn, "regions": dict(sorted(regions.items())),
                 "C_pn": cp, "c_tau": c_tau(P, b), "trap_norm": trap_norm,
                 "min_F_KE": min_fke}


@suite("double-cut", "Double Cut Lemma, energy trapping and minimal-energy lower bounds")
def _double_cut(rng, target=1000):
    b = ground_state(3, 3.0)
    P = b.params
    grid = _lattice()
    q_vals = soliton_field(b, grid, boundary_tol=1.0).values
    q0 = float(q_vals.max())
    pot = zero_potential()
    chk = _Checks()
    regions = {}
    kept = 0
    min_gap = math.inf
    raw_min = math.inf
    while kept < target:
        shape = _soliton_shape(rng, grid, q_vals, q0)
        rep = energy_report(shape, pot, P)
        a_lo, a_hi = _amplitude_windows(rep, P, b.me_threshold)
        amps = list(a_hi * (1.0 + 10.0 ** rng.uniform(-3.0, math.log10(0.5), 2)))
        if a_lo is not None:
            amps += list(a_lo * rng.uniform(0.5, 1.0, 2))
        for a in amps:
            u = shape * float(a)
            ru = energy_report(u, pot, P)
            cl = classify(u, pot, None, b, trap_norm=0.0, report=ru)
            regions[cl.region] = regions.get(cl.region, 0) + 1
            if cl.region not in ("R1", "R2"):
                continue
            kept += 1
            r = cl.report
            gap = abs(r["x_value"] - b.x_star) / b.x_star
            min_gap = min(min_gap, gap)
            chk.add("outside_excluded_band", gap - BAND)
            chain = double_cut_chain(u, pot, b, report=ru)
            chk.add("region_agrees", 0.0 if chain["region"] == cl.region else -1.0)
            G, Gk, thr = chain["G"], chain["G_kato"], chain["threshold"]
            kato = (G - Gk) / G + BAND
            if chain["region"] == "R1":
                chk.add("r1_below_ground_state", (thr - G) / thr - BAND)
                chk.add("r1_kato_order", kato)
            else:
                chk.add("r2_kato_above_ground_state", (Gk - thr) / thr - BAND)
                chk.add("r2_kato_order", kato)
            # lower bounds by P; the slack is the lattice GN deficit, so compare against the
            # resolution band of the field rather than an absolute floor
            tol = BAND + cl.band * r["nonlinear"] * math.sqrt(r["mass"]) ** P.mass_power
            raw = r["ME"] - float(minimal_energy_P(r["x_value"], b))
            ek = r["E_K"] * math.sqrt(r["mass"]) ** P.mass_power
            raw_k = ek - float(minimal_energy_P(r["x_kato"], b))
            raw_min = min(raw_min, raw, raw_k)
            chk.add("P_bound", raw + tol)
            chk.add("P_bound_kato", raw_k + tol)
            if kept >= target:
                break
    return chk, {"samples": kept, "regions": dict(sorted(regions.items())),
                 "min_relative_gap_to_x_star": min_gap,
                 "min_P_bound_slack_without_band": raw_min}


@suite("calculus", "calculus lemma for P* with its curvature bound")
def _calculus(rng, points=1000):
    chk = _Checks()
    details = {}
    for n, p in WINDOW_CASES + (QUADRATIC_CASE,):
        b = ground_state(n, p)
        upper = math.inf if b.params.np1 <= 8.0 else 1.0
        C = p_star_curvature_bound(b, upper)
        x_hi = 10.0 * b.x_star if math.isinf(upper) else upper
        xs = np.linspace(0.0, x_hi, points, endpoint=math.isinf(upper))
        ps = p_star(xs, b)
        scale = max(1.0, float(np.max(np.abs(ps))))
        slack_f = float(np.min(0.5 * C * xs ** 2 - ps)) + 1e-12 * scale
        y_hi = float(p_star(x_hi, b))
        ys = np.linspace(0.0, y_hi, points, endpoint=False)
        slack_inv = min(p_star_inverse(float(y), b, atol=1e-15) - math.sqrt(2.0 * y / C) for y in ys)
        slack_inv += 1e-12 * max(1.0, x_hi)
        chk.add("quadratic_majorant", slack_f)
        chk.add("inverse_minorant", slack_inv)
        details[f"n={n},p={p:g}"] = {"C": C, "interval_end": x_hi if math.isfinite(upper) else "inf",
                                    "slack_f": slack_f, "slack_inverse": slack_inv}
    return chk, details


@suite("scaling", "invariance of G and scaled energy under the NLS dilation")
def _scaling(rng):
    b = ground_state(3, 3.0)
    P = b.params
    grid = make_grid(3, 128, 10.0)
    pot = gaussian_rotational_potential(0.5, 1.5)
    k = np.array([0.3, -0.2, 0.1])
    w = 1.5

    def field(lam):
        xs = grid.coords()
        r2 = sum((lam * x) ** 2 for x in xs)
        ph = sum(kj * lam * x for kj, x in zip(k, xs))
        return Field(grid, lam ** (2.0 / (P.p - 1.0)) * np.exp(-r2 / w ** 2 + 1j * ph) * (1.0 + 0.0j))

    base = energy_report(field(1.0), pot, P)
    chk = _Checks()
    details = {}
    for lam in (0.5, 2.0):
        rep = energy_report(field(lam), pot.dilated(lam), P)
        eg, em = _rel(rep.G, base.G), _rel(rep.ME, base.ME)
        chk.add("G_invariant", 1e-6 - eg)
        chk.add("ME_invariant", 1e-6 - em)
        details[f"lambda={lam:g}"] = {"G_rel_err": eg, "ME_rel_err": em}
    return chk, details


@suite("potentials", "trapping component of rotational potentials and constant arithmetic")
def _potentials(rng, points=100):
    chk = _Checks()
    details = {}
    dirs = rng.normal(size=(points, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    pts = dirs * rng.uniform(0.2, 6.0, points)[:, None]
    family = {
        "power_law(0.5)": power_law_potential(0.5, 1.0),
        "power_law(1.5)": power_law_potential(1.5, 1.0),
        "glued(0.5,2)": glued_power_potential(0.5, 2.0, 1.0),
        "gaussian_rotational": gaussian_rotational_potential(1.0, 1.0),
    }
    for name, pot in family.items():
        closed = np.stack(np.broadcast_arrays(*pot.btau(tuple(pts.T))), axis=1)
        generic = generic_btau(pot, pts)
        err = float(np.abs(closed - generic).max() / max(np.abs(closed).max(), 1e-300))
        chk.add("btau_closed_vs_generic", 1e-10 - err)
        details[name] = {"btau_rel_err": err}
    zero = power_law_potential(1.0, 1.0)
    closed = np.stack(np.broadcast_arrays(*zero.btau(tuple(pts.T))), axis=1)
    chk.add("alpha_one_exact_zero", 0.0 if np.all(closed == 0.0) else -float(np.abs(closed).max()))
    details["power_law(1)"] = {"btau_max_abs": float(np.abs(closed).max())}
    grid = make_grid(3, 32, 4.0)
    div = max(divergence_residual(p, grid) for p in family.values())
    chk.add("coulomb_gauge", 1e-8 - div)
    details["max_divergence"] = div
    P = PhysParams(3, 3.0)
    b = ground_state(3, 3.0)
    worst = 0.0
    for nx2, a0, a1 in ((0.01, 0.0, 0.0), (0.05, 0.1, 0.02), (0.2, 0.3, 0.1)):
        c = assemble_constants(P, b.x_star, nx2, a0, a1)
        b0 = 2.0 / (P.n - 2.0) * nx2
        xs_e = (1.0 - a0) ** (2.0 / (P.s_c * (P.p - 1.0))) * b.x_star
        cval = (2.0 * a0 + a1 + 2.0 * b0) / P.np1 * xs_e
        flag = P.np1 * a0 + 2.0 * a1 + 4.0 * b0 < P.np1 - 4.0
        worst = max(worst, _rel(c.b0, b0), _rel(c.c_of_A0_Btau, cval))
        chk.add("c1_flag", 0.0 if c.satisfies_c1 == flag else -1.0)
    chk.add("constant_arithmetic", 1e-12 - worst)
    details["constant_arithmetic_max_rel"] = worst
    return chk, details


@suite("virial", "virial identity along a short free-space run")
def _virial(rng):
    from .evolution import SimConfig, simulate

    cfg = SimConfig(grid_points=32, half_width=8.0, potential={"kind": "zero"},
                    initial={"kind": "gaussian", "amplitude": 1.0, "width": 1.2},
                    dt=4e-3, t_end=0.4, output_stride=5, name="verify-virial")
    traj = simulate(cfg)
    sd = traj.column("V_second_diff")[1:-1]
    rhs = traj.column("virial_rhs")[1:-1]
    err = float(np.max(np.abs(sd - rhs)) / np.max(np.abs(rhs)))
    chk = _Checks()
    chk.add("second_difference_matches", 1e-2 - err)
    return chk, {"relative_mismatch": err, "status": traj.status, "records": len(traj)}


# ---------------------------------------------------------------- running

def _seed_for(name, seed):
    # independent stream per suite so that suites can run in any order
    return np.random.default_rng([int(seed), sum(map(ord, name)), len(name)])


def run_suite(name, seed=0):
    """Run one suite; raises UnknownSuiteError for names not in :data:`SUITES`."""
    if name not in SUITES:
        raise UnknownSuiteError(name)
    fn, anchor = SUITES[name]
    chk, details = fn(_seed_for(name, seed))
    return {
        "suite": name,
        "anchor": anchor,
        "seed": int(seed),
        "passed": chk.passed,
        "margins": dict(sorted(chk.margins.items())),
        "violations": dict(sorted(chk.violations.items())),
        "details": details,
    }


def run_all(seed=0, workers=1):
    """Every suite, aggregated in registry order whatever the worker count."""
    names = suite_names()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: run_suite(n, seed), names))
    else:
        results = [run_suite(n, seed) for n in names]
    return {"seed": int(seed), "passed": all(r["passed"] for r in results), "suites": results}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def report_json(report):
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
