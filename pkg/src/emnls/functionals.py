"""Energies, scale-invariant quantities, threshold functions and the region classifier.

Throughout, ``mp = 2(1-s_c)/s_c`` is the mass exponent that makes
``||grad_A u||^2 ||u||^mp`` and ``E_A[u] ||u||^mp`` invariant under the
NLS scaling.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import (
    Field,
    boundary_max,
    covariant_gradient,
    gradient,
    integrate,
    spectral_tail_fraction,
)
from .potentials import trapping_component

__all__ = [
    "EnergyReport",
    "Classification",
    "energy_report",
    "minimal_energy_P",
    "electric_P",
    "p_star",
    "p_star_inverse",
    "p_star_curvature_bound",
    "cpn_constant",
    "cpn_branches",
    "c_tau",
    "kato_remainder",
    "proximity_functionals",
    "trapping_term",
    "resolution_band",
    "classify",
    "double_cut_chain",
    "double_cut_check",
    "DEFAULT_BAND",
]

DEFAULT_BAND = 1e-9


def _sq_norm(fields):
    return sum(integrate(Field(f.grid, np.abs(f.values) ** 2)) for f in fields)


@dataclass
class EnergyReport:
    mass: float
    kinetic_A: float
    potential_term: float
    nonlinear: float
    E_A: float
    E_K: float
    G: float
    ME: float
    kato_kinetic: float  # ||grad |u|||^2
    x_value: float  # ||grad_A u||^2 ||u||^mp
    x_kato: float  # ||grad |u|||^2 ||u||^mp
    G_kato: float

    def to_dict(self):
        return asdict(self)


def _modulus_gradient(u):
    return gradient(Field(u.grid, np.abs(u.values)))


def energy_report(u, pot, params, grads=None):
    """All energy-type functionals of ``u`` by lattice quadrature.

    ``grads`` may carry precomputed ``grad_A u`` fields.
    """
    s_c, p = params.s_c, params.p
    mp = params.mass_power
    vals = u.values
    dens = np.abs(vals) ** 2
    mass = integrate(Field(u.grid, dens))
    if mass == 0.0:
        return EnergyReport(*([0.0] * 12))
    if grads is None:
        grads = covariant_gradient(u, pot)
    kin = _sq_norm(grads)
    kin_mod = _sq_norm(_modulus_gradient(u))
    electric = getattr(pot, "electric", None) if pot is not None else None
    pterm = integrate(Field(u.grid, electric.on(u.grid) * dens)) if electric is not None else 0.0
    nl = integrate(Field(u.grid, dens ** ((p + 1.0) / 2.0)))
    e_a = 0.5 * kin - nl / (p + 1.0) + 0.5 * pterm
    e_k = 0.5 * kin_mod - nl / (p + 1.0) + 0.5 * pterm
    m = math.sqrt(mass)
    scale = m ** mp
    return EnergyReport(
        mass=mass,
        kinetic_A=kin,
        potential_term=pterm,
        nonlinear=nl,
        E_A=e_a,
        E_K=e_k,
        G=math.sqrt(kin) ** s_c * m ** (1.0 - s_c),
        ME=e_a * scale,
        kato_kinetic=kin_mod,
        x_value=kin * scale,
        x_kato=kin_mod * scale,
        G_kato=math.sqrt(kin_mod) ** s_c * m ** (1.0 - s_c),
    )


# ---------------------------------------------------------------- P, P*, constants

def minimal_energy_P(x, bundle):
    """``P(x) = x/2 - C_GN/(p+1) x^(n(p-1)/4)``."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("P is defined for x >= 0")
    p = bundle.params.p
    q = bundle.params.np1 / 4.0
    return 0.5 * x - bundle.c_gn / (p + 1.0) * np.asarray(x, dtype=float) ** q


def electric_P(x, bundle, a0):
    """``F(x) = (1-a0) x/2 - C_GN/(p+1) x^(n(p-1)/4)``."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("F is defined for x >= 0")
    p = bundle.params.p
    q = bundle.params.np1 / 4.0
    return 0.5 * (1.0 - a0) * x - bundle.c_gn / (p + 1.0) * np.asarray(x, dtype=float) ** q


def p_star(x, bundle):
    """``P*(x) = P(x_star) - P(x + x_star)``, defined for ``x >= -x_star``."""
    xs = bundle.x_star
    if np.any(np.asarray(x) < -xs):
        raise ValueError("P* is defined for x >= -x_star")
    p = bundle.params.p
    q = bundle.params.np1 / 4.0
    c = bundle.c_gn / (p + 1.0)
    x = np.asarray(x, dtype=float)
    # P'(x_star) = 0 makes the linear terms cancel exactly, leaving
    # c x_star^q g(x/x_star) with g(t) = (1+t)^q - 1 - q t
    return c * xs ** q * _curvature_part(x / xs, q)


def _curvature_part(t, q, cut=0.05, terms=40):
    """``(1+t)^q - 1 - q t`` without cancellation; a binomial series for ``|t| < cut``."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = np.abs(t) < cut
    ts = t[small]
    acc = np.zeros_like(ts)
    coef = q * (q - 1.0) / 2.0
    power = ts * ts
    for k in range(2, terms + 2):
        acc += coef * power
        coef *= (q - k) / (k + 1.0)
        power = power * ts
    out[small] = acc
    tb = t[~small]
    out[~small] = np.expm1(q * np.log1p(tb)) - q * tb
    return out if out.ndim else float(out)


def p_star_inverse(y, bundle, atol=1e-12, max_iter=400):
    """Inverse of P* on ``[0, inf)`` by bisection to ``atol``."""
    y = float(y)
    if y < 0 or not math.isfinite(y):
        raise ValueError("P*^-1 needs a finite y >= 0")
    if y == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while p_star(hi, bundle) < y:
        lo, hi = hi, 2.0 * hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= atol or mid in (lo, hi):
            break
        if p_star(mid, bundle) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def p_star_curvature_bound(bundle, upper=math.inf):
    """Sup of ``(P*)''`` on ``[0, upper)``; infinite when unbounded there."""
    p = bundle.params.p
    q = bundle.params.np1 / 4.0
    c = bundle.c_gn / (p + 1.0) * q * (q - 1.0)
    xs = bundle.x_star
    if q <= 2.0:
        return c * xs ** (q - 2.0)
    if not math.isfinite(upper):
        return math.inf
    return c * (upper + xs) ** (q - 2.0)


def cpn_branches(bundle):
    """Both closed forms ``(le8, gt8)`` of the proximity constant, whatever ``n(p-1)`` is."""
    params = bundle.params
    p, npm = params.p, params.np1
    k = 16.0 * (p + 1.0) / (bundle.c_gn * npm * (npm - 4.0))
    e = (npm - 8.0) / 8.0
    le8 = k ** -0.5 * bundle.x_star ** e
    gt8 = 1.0 + k ** -0.5 * (1.0 + bundle.x_star) ** e
    return le8, gt8


def cpn_constant(params, bundle):
    """Ground-state proximity constant, choosing the branch by ``n(p-1) <= 8``."""
    le8, gt8 = cpn_branches(bundle)
    return le8 if params.np1 <= 8.0 else gt8


def c_tau(params, bundle):
    """Admissible trapping size ``min(K / (C_pn ||u_Q||^((1-s_c)/s_c) ||grad u_Q||), K)``."""
    n, s_c = params.n, params.s_c
    k = (n - 2.0) * (params.np1 - 4.0) / 16.0
    cp = cpn_constant(params, bundle)
    first = k / (cp * bundle.soliton_l2 ** ((1.0 - s_c) / s_c) * math.sqrt(bundle.soliton_grad_sq))
    return min(first, k)


# ---------------------------------------------------------------- Kato and proximity

def kato_remainder(u, pot, grad_u=None, grad_abs=None, floor=1e-12):
    """``(||grad_A u||^2 - ||grad |u|||^2, int_{u != 0} |Im(conj(u)/|u| grad_A u)|^2)``.

    Gradients are spectral unless ``grad_u`` (plain gradient of u) or
    ``grad_abs`` (gradient of |u|) are given as arrays. When only
    ``grad_u`` is given, ``grad |u| = Re(conj(u) grad u)/|u|`` on the support.
    """
    g = u.grid
    vals = np.asarray(u.values, dtype=complex)
    mod = np.abs(vals)
    support = mod > floor * mod.max() if mod.max() > 0 else np.zeros(g.shape, bool)
    arrays = None if pot is None else pot.vector_on(g)
    if grad_u is None:
        dA = [d.values for d in covariant_gradient(Field(g, vals), pot)]
    else:
        dA = [np.asarray(d, dtype=complex) + (0 if arrays is None else 1j * a * vals)
              for d, a in zip(grad_u, arrays if arrays is not None else [None] * g.n_dims)]
    if grad_abs is None:
        if grad_u is None:
            dmod = [d.values for d in gradient(Field(g, mod))]
        else:
            safe = np.where(support, mod, 1.0)
            dmod = [np.where(support, np.real(np.conj(vals) * d) / safe, 0.0) for d in grad_u]
    else:
        dmod = [np.asarray(d, dtype=float) for d in grad_abs]
    lhs = sum(integrate(Field(g, np.abs(d) ** 2)) for d in dA) - sum(
        integrate(Field(g, d * d)) for d in dmod)
    phase = np.where(support, np.conj(vals) / np.where(support, mod, 1.0), 0.0)
    rhs = sum(integrate(Field(g, np.where(support, np.imag(phase * d) ** 2, 0.0))) for d in dA)
    return float(lhs), float(rhs)


def proximity_functionals(u, pot, bundle, report=None):
    """``(F_RK, F_KE)``: scaled Kato remainder and kinetic excess over ``x_star``."""
    params = bundle.params
    rep = report or energy_report(u, pot, params)
    f_rk = rep.x_value - rep.x_kato
    f_ke = rep.x_value - bundle.x_star
    return f_rk, f_ke


def trapping_term(u, pot, btau=None, grads=None):
    """``Im int |x| u B_tau . conj(grad_A u)``."""
    if pot is None or pot.is_zero:
        return 0.0
    g = u.grid
    if btau is None:
        btau = trapping_component(pot, g)
    if grads is None:
        grads = covariant_gradient(u, pot)
    r = g.radius
    acc = np.zeros(g.shape)
    for b, d in zip(btau, grads):
        acc += np.imag(u.values * b.values * np.conj(d.values))
    return integrate(Field(g, r * acc))


# ---------------------------------------------------------------- classification

def resolution_band(u):
    """Relative discretisation error estimate for lattice functionals of ``u``.

    ``sqrt`` of the spectral power fraction in the top third of the band
    (aliasing and unresolved scales), or the squared relative boundary value
    (periodic truncation), whichever is larger. Both are conservative for
    the smooth decaying fields in scope.
    """
    peak = float(np.abs(u.values).max())
    if peak == 0.0:
        return 0.0
    tail = math.sqrt(spectral_tail_fraction(u))
    edge = (boundary_max(u) / peak) ** 2
    return max(tail, edge)


@dataclass
class Classification:
    region: str  # R1, R2, OutsideR or Indeterminate
    me_margin: float
    g_margin: float
    electric_variant: bool
    blowup_hypotheses: dict
    band: float
    me_value: float
    me_threshold: float
    g_value: float
    g_threshold: float
    reason: str = ""
    report: dict = field(default_factory=dict)

    @property
    def indeterminate(self):
        return self.region == "Indeterminate"

    def to_dict(self):
        return asdict(self)


def classify(u0, pot, consts, bundle, params=None, band=DEFAULT_BAND, resolution=True,
             trap_norm=None, report=None):
    """Place ``u0`` in R1, R2, outside R, or flag it as indeterminate at tolerance.

    The energy test compares ``E_A ||u||^mp`` with its threshold, which is
    equivalent to comparing ``E^s_c ||u||^(2(1-s_c))`` for non-negative energy
    and keeps negative energies inside R. Margins are relative. A margin
    within the band (``band`` or the lattice resolution estimate, whichever is
    larger) gives Indeterminate. ``trap_norm`` short-cuts the evaluation of
    ``||x|^2 B_tau||_inf`` when the caller already has it, and ``report`` reuses
    an :class:`EnergyReport` of ``u0``.
    """
    from .potentials import weighted_sup_norm

    params = params or bundle.params
    rep = report or energy_report(u0, pot, params)
    electric = pot is not None and getattr(pot, "electric", None) is not None
    electric_variant = bool(electric or (consts is not None and not consts.trivial))
    a0 = consts.a0 if consts is not None else 0.0
    if electric_variant:
        e = 1.0 + 2.0 / (params.s_c * (params.p - 1.0))
        me_thr = (1.0 - a0) ** e * bundle.me_threshold - consts.c_of_A0_Btau
        g_thr = (1.0 - a0) ** (1.0 / (params.p - 1.0)) * bundle.grad_threshold
    else:
        me_thr = bundle.me_threshold
        g_thr = bundle.grad_threshold

    eff_band = band
    if resolution:
        eff_band = max(band, resolution_band(u0))

    ct = c_tau(params, bundle)
    if trap_norm is not None:
        pass
    elif consts is not None:
        trap_norm = consts.norm_x2_btau
    elif pot is None or pot.is_zero:
        trap_norm = 0.0
    else:
        trap_norm = weighted_sup_norm(pot, 2.0)
    hyps = {
        "trap_ok": bool(trap_norm < ct),
        "c1_ok": bool(consts.satisfies_c1) if consts is not None else True,
        "finite_variance": bool(np.isfinite(integrate(Field(u0.grid, u0.grid.radius ** 2 * np.abs(u0.values) ** 2)))),
    }
    me_margin = (me_thr - rep.ME) / abs(me_thr)
    g_margin = (rep.G - g_thr) / g_thr if rep.mass > 0 else -1.0
    common = dict(me_margin=me_margin, g_margin=g_margin, electric_variant=electric_variant,
                  blowup_hypotheses=hyps, band=eff_band, me_value=rep.ME, me_threshold=me_thr,
                  g_value=rep.G, g_threshold=g_thr, report=rep.to_dict())
    if abs(me_margin) <= eff_band:
        return Classification("Indeterminate", reason="energy within band of threshold", **common)
    if me_margin < 0:
        return Classification("OutsideR", reason="energy above threshold", **common)
    if abs(g_margin) <= eff_band:
        return Classification("Indeterminate", reason="gradient level within band of threshold", **common)
    return Classification("R1" if g_margin < 0 else "R2", **common)


def double_cut_chain(u, pot, bundle, params=None, band=DEFAULT_BAND, report=None):
    """Evaluate the region chain for ``u`` in R.

    Returns a dict with the region and each link of the chain. Raises
    ValueError when ``u`` is not below the energy threshold.
    """
    params = params or bundle.params
    rep = report or energy_report(u, pot, params)
    thr = bundle.grad_threshold
    if not rep.ME < bundle.me_threshold * (1.0 - band):
        raise ValueError("double cut applies only below the ground-state energy level")
    kato = rep.G_kato <= rep.G * (1.0 + band)
    if rep.G < thr:
        region = "R1"
        links = {"kato_order": kato, "below_ground_state": rep.G < thr * (1.0 - band)}
    else:
        region = "R2"
        links = {"kato_above_ground_state": rep.G_kato > thr * (1.0 + band), "kato_order": kato}
    return {"region": region, "holds": all(links.values()), "links": links,
            "G": rep.G, "G_kato": rep.G_kato, "threshold": thr,
            "x_gap": (rep.x_value - bundle.x_star) / bundle.x_star}


def double_cut_check(u, pot, bundle, params=None, band=DEFAULT_BAND):
    """True iff the full chain of the region containing ``u`` holds."""
    return double_cut_chain(u, pot, bundle, params, band)["holds"]
