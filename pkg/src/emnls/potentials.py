"""Electromagnetic potentials, trapping components and the constants built from them.

Magnetic potentials here are rotational, ``A = f(|x|^2) (-x_2, x_1, 0)`` in
three dimensions, which is divergence free for any profile f. Closed-form
evaluators take a tuple of coordinate arrays and must stay analytic in the
coordinates (no ``abs``), so that derivatives can be taken by complex step.

Electric potentials are radial closed forms; only those dominated by an
inverse square have constants that the magnetic Hardy inequality certifies.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import Field, gradient

__all__ = [
    "Potential",
    "ElectricPotential",
    "PotentialConstants",
    "zero_potential",
    "rotational_potential",
    "power_law_potential",
    "glued_power_potential",
    "gaussian_rotational_potential",
    "sampled_potential",
    "inverse_square_potential",
    "gaussian_well",
    "gaussian_bump",
    "custom_electric",
    "field_tensor",
    "generic_btau",
    "trapping_component",
    "divergence_residual",
    "weighted_sup_norm",
    "l2r_linf_norm",
    "shell_sup",
    "electric_constants",
    "assemble_constants",
    "estimate_constants",
    "potential_report",
]

_CSTEP = 1e-30


def _sq(xs):
    return sum(x * x for x in xs)


def _zeros_like(x):
    return 0.0 * x


def _points_tuple(points):
    pts = np.asarray(points)
    if pts.ndim == 1:
        pts = pts[None, :]
    return tuple(pts[:, j] for j in range(pts.shape[1]))


class Potential:
    """Magnetic vector potential with optional electric part.

    Parameters
    ----------
    kind : str
    vector : callable, optional
        ``vector(xs) -> tuple of n arrays``; analytic in the coordinates.
    btau : callable, optional
        Closed-form trapping component with the same signature.
    electric : ElectricPotential, optional
    coulomb : bool
        Whether ``div A = 0`` is claimed.
    meta : dict
        Family parameters and tail exponents for reports.
    arrays : sequence of arrays, optional
        Lattice samples, for the ``sampled`` kind.
    """

    def __init__(self, kind, n_dims=3, vector=None, btau=None, electric=None, coulomb=True,
                 meta=None, arrays=None, grid=None):
        self.kind = kind
        self.n_dims = n_dims
        self.vector = vector
        self.btau = btau
        self.electric = electric
        self.coulomb = coulomb
        self.meta = dict(meta or {})
        self._arrays = arrays
        self._grid = grid
        self._cache = {}

    def __repr__(self):
        return f"Potential(kind={self.kind!r}, meta={self.meta})"

    @property
    def is_zero(self):
        return self.kind == "zero"

    @property
    def has_closed_form(self):
        return self.vector is not None

    def with_electric(self, electric):
        return Potential(self.kind, self.n_dims, self.vector, self.btau, electric, self.coulomb,
                         self.meta, self._arrays, self._grid)

    def scaled(self, factor):
        """Potential with ``A`` multiplied by ``factor`` (electric part dropped)."""
        if self.is_zero or factor == 0:
            return zero_potential(self.n_dims)
        vec, bt = self.vector, self.btau
        arrays = None if self._arrays is None else [factor * a for a in self._arrays]
        meta = dict(self.meta, amplitude=self.meta.get("amplitude", 1.0) * factor)
        return Potential(
            self.kind, self.n_dims,
            None if vec is None else (lambda xs: tuple(factor * a for a in vec(xs))),
            None if bt is None else (lambda xs: tuple(factor * b for b in bt(xs))),
            None, self.coulomb, meta, arrays, self._grid,
        )

    def dilated(self, lam):
        """``A_lam(x) = lam A(lam x)``, the companion of ``u_lam = lam^(2/(p-1)) u(lam x)``."""
        if self.is_zero:
            return self
        vec, bt = self.vector, self.btau
        if vec is None:
            raise ValueError("dilation needs a closed-form potential")
        meta = dict(self.meta, dilation=self.meta.get("dilation", 1.0) * lam)
        return Potential(
            self.kind, self.n_dims,
            lambda xs: tuple(lam * a for a in vec(tuple(lam * x for x in xs))),
            None if bt is None else (lambda xs: tuple(lam ** 2 * b for b in bt(tuple(lam * x for x in xs)))),
            None, self.coulomb, meta,
        )

    def vector_on(self, grid):
        """Per-axis lattice samples of A; None for the zero potential."""
        if self.is_zero:
            return None
        if self._arrays is not None:
            if grid != self._grid:
                raise ValueError(f"sampled potential lives on {self._grid}, requested {grid}")
            return self._arrays
        key = ("A", grid)
        if key not in self._cache:
            xs = grid.dense_coords()
            with np.errstate(divide="ignore", invalid="ignore"):
                comps = self.vector(xs)
            out = []
            for c in comps:
                c = np.array(np.broadcast_to(c, grid.shape), dtype=float)
                c[grid.origin_index] = 0.0
                out.append(c)
            self._cache[key] = out
        return self._cache[key]

    def a_squared_on(self, grid):
        arrs = self.vector_on(grid)
        if arrs is None:
            return None
        return sum(a * a for a in arrs)

    def max_abs(self, grid):
        a2 = self.a_squared_on(grid)
        return 0.0 if a2 is None else float(np.sqrt(a2.max()))


def zero_potential(n_dims=3, electric=None):
    return Potential("zero", n_dims, electric=electric, meta={})


def _require_3d(n_dims):
    if n_dims != 3:
        raise ValueError(f"the rotational construction is three-dimensional; got n = {n_dims}")


def rotational_potential(f, f_prime, n_dims=3, kind="rotational", meta=None):
    """``A = f(|x|^2)(-x_2, x_1, 0)`` with trapping ``2(f + s f')/|x| (-x_2, x_1, 0)``."""
    _require_3d(n_dims)

    def vector(xs):
        x1, x2, x3 = xs
        fs = f(_sq(xs))
        return (-x2 * fs, x1 * fs, _zeros_like(x3))

    def btau(xs):
        x1, x2, x3 = xs
        s = _sq(xs)
        g = 2.0 * (f(s) + s * f_prime(s)) / np.sqrt(s)
        return (-x2 * g, x1 * g, _zeros_like(x3))

    return Potential(kind, 3, vector, btau, coulomb=True, meta=meta)


def power_law_potential(alpha, amplitude=1.0):
    """``f(s) = amplitude * s^(-alpha)``, so ``|A| ~ |x|^(1-2 alpha)`` and ``B_tau`` vanishes at alpha = 1."""
    a = float(alpha)
    c = float(amplitude)
    inner = 2.0 * a - 1.0
    pot = rotational_potential(
        lambda s: c * s ** (-a),
        lambda s: -a * c * s ** (-a - 1.0),
        kind="power_law",
        meta={"alpha": a, "amplitude": c, "A_exponent_inner": inner, "A_exponent_outer": inner,
              "B_exponent_inner": 2.0 * a, "B_exponent_outer": 2.0 * a},
    )

    def btau(xs):
        # factored form keeps alpha = 1 exactly zero
        x1, x2, x3 = xs
        s = _sq(xs)
        g = 2.0 * (1.0 - a) * c * s ** (-a - 0.5)
        return (-x2 * g, x1 * g, _zeros_like(x3))

    pot.btau = btau
    return pot


def _smoothstep(r, r0=0.5, r1=1.0):
    """Quintic ramp from 0 at r0 to 1 at r1 and its r-derivative; branch on the real part."""
    t = (r - r0) / (r1 - r0)
    tr = np.real(t)
    poly = t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)
    dpoly = 30.0 * t * t * (1.0 - t) ** 2 / (r1 - r0)
    chi = np.where(tr <= 0.0, 0.0 * t, np.where(tr >= 1.0, 1.0 + 0.0 * t, poly))
    dchi = np.where((tr <= 0.0) | (tr >= 1.0), 0.0 * t, dpoly)
    return chi, dchi


def glued_power_potential(beta, gamma, amplitude=1.0):
    """Rotational potential with ``|A| ~ |x|^-beta`` inside B(1/2) and ``|x|^-gamma`` outside B(1).

    The profile is ``f = (1-chi) s^-a_in + chi s^-a_out`` with
    ``a = (1 + exponent)/2`` and a C^2 quintic ramp ``chi(|x|)`` on [1/2, 1].
    """
    beta = float(beta)
    gamma = float(gamma)
    if beta == 1.0 or gamma == 1.0:
        raise ValueError("glued exponents must differ from 1 (beta = 1 or gamma = 1 makes B_tau vanish)")
    a_in = (1.0 + beta) / 2.0
    a_out = (1.0 + gamma) / 2.0
    c = float(amplitude)

    def f(s):
        chi, _ = _smoothstep(np.sqrt(s))
        return c * ((1.0 - chi) * s ** (-a_in) + chi * s ** (-a_out))

    def fp(s):
        r = np.sqrt(s)
        chi, dchi = _smoothstep(r)
        dchi_ds = dchi / (2.0 * r)
        lo, hi = s ** (-a_in), s ** (-a_out)
        return c * (dchi_ds * (hi - lo) - (1.0 - chi) * a_in * lo / s - chi * a_out * hi / s)

    return rotational_potential(
        f, fp, kind="glued",
        meta={"beta": beta, "gamma": gamma, "amplitude": c,
              "A_exponent_inner": beta, "A_exponent_outer": gamma,
              "B_exponent_inner": beta + 1.0, "B_exponent_outer": gamma + 1.0},
    )


def gaussian_rotational_potential(amplitude=1.0, width=1.0):
    """Smooth ``f(s) = amplitude * exp(-s/width^2)``; bounded A with nonzero trapping."""
    c = float(amplitude)
    w2 = float(width) ** 2
    return rotational_potential(
        lambda s: c * np.exp(-s / w2),
        lambda s: -c / w2 * np.exp(-s / w2),
        kind="gaussian_rotational",
        meta={"amplitude": c, "width": float(width)},
    )


def sampled_potential(grid, arrays, coulomb=False):
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    if len(arrays) != grid.n_dims or any(a.shape != grid.shape for a in arrays):
        raise ValueError("sampled potential needs one array of the grid shape per axis")
    return Potential("sampled", grid.n_dims, coulomb=coulomb, arrays=arrays, grid=grid)


# ---------------------------------------------------------------- electric part

class ElectricPotential:
    """Real potential ``A0``; radial closed forms carry ``profile(r)`` and ``dprofile(r)``."""

    def __init__(self, kind, value, radial_derivative=None, profile=None, dprofile=None,
                 certifiable=False, meta=None):
        self.kind = kind
        self.value = value
        self.radial_derivative = radial_derivative
        self.profile = profile
        self.dprofile = dprofile
        self.certifiable = certifiable
        self.meta = dict(meta or {})
        self._cache = {}

    def __repr__(self):
        return f"ElectricPotential(kind={self.kind!r}, meta={self.meta})"

    def _on(self, grid, fn, tag):
        if fn is None:
            raise ValueError(f"electric potential {self.kind!r} has no {tag} evaluator")
        key = (tag, grid)
        if key not in self._cache:
            with np.errstate(divide="ignore", invalid="ignore"):
                v = np.array(np.broadcast_to(fn(grid.dense_coords()), grid.shape), dtype=float)
            v[~np.isfinite(v)] = 0.0
            v[grid.origin_index] = v[grid.origin_index] if self.meta.get("regular", False) else 0.0
            self._cache[key] = v
        return self._cache[key]

    def on(self, grid):
        return self._on(grid, self.value, "value")

    def radial_derivative_on(self, grid):
        return self._on(grid, self.radial_derivative, "radial derivative")


def _radial_electric(kind, prof, dprof, certifiable, meta):
    def value(xs):
        return prof(np.sqrt(_sq(xs)))

    def radial_derivative(xs):
        return dprof(np.sqrt(_sq(xs)))

    return ElectricPotential(kind, value, radial_derivative, prof, dprof, certifiable, meta)


def inverse_square_potential(c0, eps=0.0):
    """``A0 = -c0 / (|x|^2 + eps^2)``; attractive, with ``|x|^2 (A0)_- <= c0``."""
    c0 = float(c0)
    e2 = float(eps) ** 2
    return _radial_electric(
        "inverse_square",
        lambda r: -c0 / (r * r + e2),
        lambda r: 2.0 * c0 * r / (r * r + e2) ** 2,
        True,
        {"c0": c0, "eps": float(eps), "regular": e2 > 0},
    )


def gaussian_well(depth, width=1.0):
    d, w2 = float(depth), float(width) ** 2
    return _radial_electric(
        "gaussian_well",
        lambda r: -d * np.exp(-r * r / w2),
        lambda r: 2.0 * d * r / w2 * np.exp(-r * r / w2),
        True,
        {"depth": d, "width": float(width), "regular": True},
    )


def gaussian_bump(height, width=1.0):
    h, w2 = float(height), float(width) ** 2
    return _radial_electric(
        "gaussian_bump",
        lambda r: h * np.exp(-r * r / w2),
        lambda r: -2.0 * h * r / w2 * np.exp(-r * r / w2),
        True,
        {"height": h, "width": float(width), "regular": True},
    )


def custom_electric(value, radial_derivative=None, regular=True):
    """User-supplied ``A0(xs)``; constants cannot be certified and must be entered by hand."""
    return ElectricPotential("custom", value, radial_derivative, certifiable=False,
                             meta={"regular": regular})


# ---------------------------------------------------------------- field tensor

def _jacobian(potential, xs):
    """``J[j][k] = d_j A_k`` by complex step."""
    if potential.vector is None:
        raise ValueError("complex-step derivatives need a closed-form potential")
    n = len(xs)
    jac = []
    for j in range(n):
        shifted = tuple(x + (1j * _CSTEP if i == j else 0.0) for i, x in enumerate(xs))
        comps = potential.vector(shifted)
        jac.append([np.imag(np.asarray(c)) / _CSTEP for c in comps])
    return jac


def field_tensor(potential, points):
    """``F_jk = d_j A_k - d_k A_j`` at an ``(m, n)`` array of points; shape ``(m, n, n)``."""
    xs = _points_tuple(np.asarray(points, dtype=float))
    jac = _jacobian(potential, xs)
    n = len(xs)
    m = len(xs[0])
    F = np.empty((m, n, n))
    for j in range(n):
        for k in range(n):
            F[:, j, k] = np.broadcast_to(jac[j][k] - jac[k][j], (m,))
    return F


def generic_btau(potential, points):
    """``(B_tau)_k = (x_j/|x|) F_jk`` from the field tensor; ``(m, n)`` array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    F = field_tensor(potential, pts)
    r = np.linalg.norm(pts, axis=1)
    return np.einsum("mj,mjk->mk", pts / r[:, None], F)


def trapping_component(potential, grid):
    """Lattice samples of ``B_tau`` from the generic F_jk contraction; zero at the origin.

    Closed-form potentials are differentiated by complex step; sampled ones
    spectrally.
    """
    n = grid.n_dims
    if potential.is_zero:
        return [Field(grid, np.zeros(grid.shape)) for _ in range(n)]
    xs = grid.dense_coords()
    r = grid.radius
    with np.errstate(divide="ignore", invalid="ignore"):
        if potential.has_closed_form:
            jac = _jacobian(potential, xs)
        else:
            arrays = potential.vector_on(grid)
            grads = [gradient(Field(grid, a)) for a in arrays]
            jac = [[grads[k][j].values for k in range(n)] for j in range(n)]
        out = []
        for k in range(n):
            acc = np.zeros(grid.shape)
            for j in range(n):
                if j != k:
                    acc = acc + xs[j] * (jac[j][k] - jac[k][j])
            b = acc / r
            b[grid.origin_index] = 0.0
            b[~np.isfinite(b)] = 0.0
            out.append(Field(grid, b))
    return out


def divergence_residual(potential, grid):
    """``max |div A|`` over lattice points other than the origin."""
    if potential.is_zero:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        if potential.has_closed_form:
            jac = _jacobian(potential, grid.dense_coords())
            div = sum(np.broadcast_to(jac[j][j], grid.shape) for j in range(grid.n_dims))
        else:
            arrays = potential.vector_on(grid)
            div = sum(gradient(Field(grid, a))[j].values for j, a in enumerate(arrays))
    div = np.array(div, dtype=float)
    div[grid.origin_index] = 0.0
    return float(np.nanmax(np.abs(div)))


# ---------------------------------------------------------------- norms

def _directions(refine=1):
    m = 200 * refine
    k = np.arange(m) + 0.5
    z = 1.0 - 2.0 * k / m
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    rho = np.sqrt(1.0 - z * z)
    fib = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    t = np.linspace(0.0, 2.0 * math.pi, 64 * refine, endpoint=False)
    ring = np.stack([np.cos(t), np.sin(t), np.zeros_like(t)], axis=1)
    return np.vstack([fib, ring, np.eye(3), -np.eye(3)])


def _btau_evaluator(B):
    if isinstance(B, Potential):
        if B.is_zero:
            return None
        if B.btau is not None:
            return B.btau
        return lambda xs: tuple(generic_btau(B, np.stack(xs, axis=1)).T)
    return B


def shell_sup(B, radii, weight_exponent=0.0, refine=1):
    """``max_{|x| = r} |x|^w |B(x)|`` for each radius, over a spherical design plus the equator."""
    fn = _btau_evaluator(B)
    radii = np.asarray(radii, dtype=float)
    if fn is None:
        return np.zeros_like(radii)
    dirs = _directions(refine)
    pts = radii[:, None, None] * dirs[None, :, :]
    xs = tuple(pts[..., j].ravel() for j in range(3))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        comps = fn(xs)
        mag = np.sqrt(sum(np.abs(np.broadcast_to(c, xs[0].shape)) ** 2 for c in comps))
    mag = mag.reshape(len(radii), len(dirs))
    return radii ** weight_exponent * np.nanmax(mag, axis=1)


def _log_slope(r, h):
    ok = h > 0
    if ok.sum() < 2:
        return -np.inf
    return float(np.polyfit(np.log(r[ok]), np.log(h[ok]), 1)[0])


def _is_lattice_fields(B):
    return isinstance(B, (list, tuple)) and B and isinstance(B[0], Field)


def weighted_sup_norm(B, weight_exponent=2.0, r_range=(0.0, math.inf), refine=1,
                      slope_tol=0.05):
    """``sup |x|^w |B(x)|``.

    ``B`` is a Potential (its trapping component is used), a closed-form
    evaluator, or a list of lattice Fields. For closed forms the sup is taken
    over geometric radial shells, and a growing power-law tail at an open end
    (0 or infinity) returns ``inf``. Lattice fields give the plain lattice max
    with the origin excluded.
    """
    if weight_exponent < 0:
        raise ValueError("weight_exponent must be >= 0")
    if _is_lattice_fields(B):
        grid = B[0].grid
        mag = np.sqrt(sum(np.abs(b.values) ** 2 for b in B))
        vals = grid.radius ** weight_exponent * mag
        vals[grid.origin_index] = 0.0
        return float(vals.max())
    if _btau_evaluator(B) is None:
        return 0.0
    lo, hi = r_range
    lo_open, hi_open = lo <= 0.0, not math.isfinite(hi)
    r_lo = 1e-8 if lo_open else lo
    r_hi = 1e6 if hi_open else hi
    per_decade = 60 * refine
    count = max(int(per_decade * math.log10(r_hi / r_lo)), 16)
    radii = np.geomspace(r_lo, r_hi, count)
    h = shell_sup(B, radii, weight_exponent, refine)
    if not np.all(np.isfinite(h)):
        return math.inf
    if not np.any(h > 0):
        return 0.0
    if lo_open and _log_slope(radii[:per_decade], h[:per_decade]) < -slope_tol:
        return math.inf
    if hi_open and _log_slope(radii[-per_decade:], h[-per_decade:]) > slope_tol:
        return math.inf
    i = int(np.argmax(h))
    best = float(h[i])
    if 0 < i < count - 1:
        a, b = radii[i - 1], radii[i + 1]
        g = (math.sqrt(5.0) - 1.0) / 2.0
        for _ in range(40):
            c, d = b - g * (b - a), a + g * (b - a)
            hc, hd = shell_sup(B, np.array([c, d]), weight_exponent, refine)
            best = max(best, hc, hd)
            if hc >= hd:
                b = d
            else:
                a = c
    return float(best)


def l2r_linf_norm(B, weight_exponent=1.5, refine=1, slope_tol=0.05):
    """``(int_0^inf sup_{|x|=r} |x|^w |B|^2 dr)^(1/2)``, with power-law tail corrections.

    Shells are geometric on (0, 1], linear on [1, 16] and geometric again
    beyond. A tail whose squared shell sup is not integrable returns ``inf``.
    """
    if _btau_evaluator(B) is None:
        return 0.0
    r_lo, r_hi = 1e-8, 1e6
    k = 40 * refine
    radii = np.unique(np.concatenate([
        np.geomspace(r_lo, 1.0, 8 * k),
        np.linspace(1.0, 16.0, 30 * k),
        np.geomspace(16.0, r_hi, 5 * k),
    ]))
    h2 = shell_sup(B, radii, weight_exponent, refine) ** 2
    if not np.all(np.isfinite(h2)):
        return math.inf
    total = float(np.trapezoid(h2, radii)) if hasattr(np, "trapezoid") else float(np.trapz(h2, radii))
    e0 = _log_slope(radii[:k], h2[:k])
    e1 = _log_slope(radii[-k:], h2[-k:])
    if np.any(h2[:k] > 0) and e0 <= -1.0 + slope_tol:
        return math.inf
    if np.any(h2[-k:] > 0) and e1 >= -1.0 - slope_tol:
        return math.inf
    if np.isfinite(e0) and h2[0] > 0:
        total += h2[0] * r_lo / (e0 + 1.0)
    if np.isfinite(e1) and h2[-1] > 0:
        total += h2[-1] * r_hi / (-e1 - 1.0)
    return math.sqrt(total)


# ---------------------------------------------------------------- constants

@dataclass
class PotentialConstants:
    a0: float
    a1: float
    b0: float
    norm_x2_btau: float
    norm_l2r_linf: float
    c_of_A0_Btau: float
    satisfies_c1: bool
    x_star_electric: float
    c0: float = 0.0
    c1: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def trivial(self):
        return self.a0 == 0.0 and self.a1 == 0.0 and self.b0 == 0.0

    def to_dict(self):
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return out


def assemble_constants(params, x_star, norm_x2_btau=0.0, a0=0.0, a1=0.0,
                       norm_l2r_linf=0.0, c0=0.0, c1=0.0, meta=None):
    """Arithmetic that turns Hardy-certified constants into ``b0``, ``C(A0, B_tau)`` and the flag.

    ``b0 = 2/(n-2) ||x|^2 B_tau||_inf``; ``x_star`` is scaled by
    ``(1-a0)^(2/(s_c(p-1)))`` and ``C = (2 a0 + a1 + 2 b0)/(n(p-1)) x_star``.
    """
    n, p = params.n, params.p
    if not 0.0 <= a0 < 1.0:
        raise ValueError(f"a0 = {a0} is outside [0, 1); the electric part is too strong")
    if a1 < 0:
        raise ValueError("a1 must be non-negative")
    b0 = 2.0 / (n - 2.0) * norm_x2_btau
    npm = params.np1
    xs_e = (1.0 - a0) ** (2.0 / (params.s_c * (p - 1.0))) * x_star
    c_val = (2.0 * a0 + a1 + 2.0 * b0) / npm * xs_e
    flag = bool(npm * a0 + 2.0 * a1 + 4.0 * b0 < npm - 4.0)
    return PotentialConstants(a0, a1, b0, norm_x2_btau, norm_l2r_linf, c_val, flag, xs_e,
                              c0, c1, dict(meta or {}))


def _radial_sup(fun, r_lo=1e-6, r_hi=1e4, count=6000):
    r = np.geomspace(r_lo, r_hi, count)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        v = np.nan_to_num(fun(r), nan=0.0)
    i = int(np.argmax(v))
    # golden refinement between the neighbours of the sampled max
    a = r[max(i - 1, 0)]
    b = r[min(i + 1, count - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(80):
        c = b - g * (b - a)
        d = a + g * (b - a)
        if fun(np.array([c]))[0] >= fun(np.array([d]))[0]:
            b = d
        else:
            a = c
    return float(max(v[i], fun(np.array([0.5 * (a + b)]))[0]))


def electric_constants(electric):
    """``c0 = sup |x|^2 (A0)_-`` and ``c1 = sup |x|^3 (d_r A0)_-`` for a certifiable radial A0."""
    if electric is None:
        return 0.0, 0.0
    if not electric.certifiable:
        raise ValueError(
            f"electric potential {electric.kind!r} is not inverse-square dominated; "
            "enter a0 and a1 manually (manual_constants={'a0': ..., 'a1': ...})"
        )
    c0 = _radial_sup(lambda r: r * r * np.maximum(-electric.profile(r), 0.0))
    c1 = _radial_sup(lambda r: r ** 3 * np.maximum(-electric.dprofile(r), 0.0))
    return c0, c1


def estimate_constants(potential, electric, params, bundle, manual_constants=None):
    """Hardy-certified ``a0, a1``, trapping ``b0``, ``C(A0, B_tau)`` and the (c1) flag."""
    n = params.n
    hardy = (2.0 / (n - 2.0)) ** 2
    if electric is None and potential is not None:
        electric = potential.electric
    if manual_constants is not None:
        a0 = float(manual_constants.get("a0", 0.0))
        a1 = float(manual_constants.get("a1", 0.0))
        c0, c1 = a0 / hardy, a1 / hardy
    else:
        c0, c1 = electric_constants(electric)
        a0, a1 = c0 * hardy, c1 * hardy
    if a0 >= 1.0:
        raise ValueError(f"a0 = {a0:.6g} >= 1 violates the admissibility of the electric potential")
    if potential is None or potential.is_zero:
        nx2, nl2 = 0.0, 0.0
    else:
        nx2 = weighted_sup_norm(potential, 2.0)
        nl2 = l2r_linf_norm(potential, 1.5) if n == 3 else math.nan
    meta = {"potential": getattr(potential, "kind", "zero"),
            "electric": getattr(electric, "kind", None)}
    return assemble_constants(params, bundle.x_star, nx2, a0, a1, nl2, c0, c1, meta)


def potential_report(potential, electric, params, bundle):
    """JSON-ready summary used by the ``potential-report`` subcommand."""
    from .functionals import c_tau

    consts = estimate_constants(potential, electric, params, bundle)
    ct = c_tau(params, bundle)
    meta = dict(getattr(potential, "meta", {}) or {})
    inner = meta.get("A_exponent_inner")
    report = {
        "kind": getattr(potential, "kind", "zero"),
        "exponents": {k: v for k, v in meta.items() if "exponent" in k},
        "parameters": {k: v for k, v in meta.items() if "exponent" not in k},
        "electric": None if electric is None else {"kind": electric.kind, **electric.meta},
        "norms": {
            "x2_btau_sup": consts.norm_x2_btau,
            "x32_btau_l2r_linf": consts.norm_l2r_linf,
        },
        "constants": consts.to_dict(),
        "c1": consts.satisfies_c1,
        "c_tau": ct,
        "trapping_below_c_tau": bool(consts.norm_x2_btau < ct),
        # local self-adjointness needs A in L^4_loc, i.e. 4 * inner exponent < n
        "a_in_l4_loc": None if inner is None else bool(4.0 * inner < params.n),
    }
    for k in ("x2_btau_sup", "x32_btau_l2r_linf"):
        v = report["norms"][k]
        if isinstance(v, float) and not math.isfinite(v):
            report["norms"][k] = "inf"
    return report
