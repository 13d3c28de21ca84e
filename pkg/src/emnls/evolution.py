"""Split-step time integration of the focusing emNLS and trajectory diagnostics.

The equation integrated is, in Coulomb gauge,

    i u_t = -Lap u - 2i A.grad u + (A0 + |A|^2) u - |u|^(p-1) u.

One step is a Strang splitting: half a step of the pointwise part (exact,
since ``|u|`` is invariant under it), a full step of the nonlocal linear
part, and another pointwise half step. The nonlocal part is itself split
into half steps of the exact free flow around a classical RK4 step of the
magnetic advection ``u_t = -2 A.grad u``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

from . import kernels
from .functionals import energy_report, trapping_term
from .grid import Field, covariant_gradient, integrate, make_grid, spectral_tail_fraction
from .groundstate import PhysParams, ground_state, lattice_soliton, soliton_field
from .potentials import (
    gaussian_bump,
    gaussian_rotational_potential,
    gaussian_well,
    glued_power_potential,
    inverse_square_potential,
    power_law_potential,
    trapping_component,
    zero_potential,
)

__all__ = [
    "ConfigError",
    "SimConfig",
    "DiagnosticsRecord",
    "Trajectory",
    "Stepper",
    "step",
    "simulate",
    "virial_rhs",
    "virial_terms",
    "build_potential",
    "build_initial",
    "second_difference",
    "write_diagnostics_csv",
    "STATUSES",
]

log = logging.getLogger(__name__)

STATUSES = ("running", "global_window_ok", "blowup_detected", "resolution_lost")
MONOTONE_WINDOW = 20


class ConfigError(ValueError):
    """Invalid simulation config; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ---------------------------------------------------------------- specs

_MAGNETIC = {
    "zero": (lambda: None, ()),
    "power_law": (power_law_potential, ("alpha", "amplitude")),
    "glued": (glued_power_potential, ("beta", "gamma", "amplitude")),
    "gaussian_rotational": (gaussian_rotational_potential, ("amplitude", "width")),
}
_ELECTRIC = {
    "gaussian_well": (gaussian_well, ("depth", "width")),
    "gaussian_bump": (gaussian_bump, ("height", "width")),
    "inverse_square": (inverse_square_potential, ("c0", "eps")),
}


def _spec_call(table, spec, where):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(where, "expected an object with a 'kind' key")
    kind = spec["kind"]
    if kind not in table:
        raise ConfigError(f"{where}.kind", f"unknown kind {kind!r}; choose from {sorted(table)}")
    fn, keys = table[kind]
    extra = set(spec) - set(keys) - {"kind"}
    if extra:
        raise ConfigError(f"{where}.{sorted(extra)[0]}", f"unexpected key for kind {kind!r}")
    try:
        kwargs = {k: float(spec[k]) for k in keys if k in spec}
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"non-numeric parameter ({exc})") from None
    try:
        return fn(**kwargs)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def build_potential(spec=None, electric=None):
    """Potential from JSON-style specs, e.g. ``{"kind": "glued", "beta": 0.5, "gamma": 2}``."""
    spec = spec or {"kind": "zero"}
    el = None if electric in (None, {}) else _spec_call(_ELECTRIC, electric, "electric")
    mag = _spec_call(_MAGNETIC, spec, "potential")
    if mag is None:
        return zero_potential(3, electric=el)
    return mag.with_electric(el) if el is not None else mag


def build_initial(spec, grid, bundle=None, boundary_tol=1e-2):
    """Initial field from a spec.

    Kinds: ``soliton`` (``scale``, optional ``envelope_width`` for a Gaussian
    finite-variance cut-off, ``relax`` to use the lattice stationary state
    and ``phase`` wavevector), ``gaussian``
    (``amplitude``, ``width``, optional ``center`` and ``phase``), ``zero``
    and ``file`` (``path`` written by :func:`emnls.grid.save_field`).
    """
    from .grid import load_field

    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("initial", "expected an object with a 'kind' key")
    kind = spec["kind"]
    xs = grid.coords()
    if kind == "zero":
        vals = np.zeros(grid.shape, dtype=complex)
    elif kind == "soliton":
        if bundle is None:
            raise ConfigError("initial", "soliton data needs a ground-state bundle")
        scale = float(spec.get("scale", 1.0))
        try:
            if spec.get("relax", False):
                vals = lattice_soliton(bundle, grid, scale, boundary_tol=boundary_tol).values.astype(complex)
            else:
                vals = soliton_field(bundle, grid, scale, boundary_tol=boundary_tol).values.astype(complex)
        except ValueError as exc:
            raise ConfigError("grid.L", str(exc)) from None
        w = spec.get("envelope_width")
        if w is not None:
            vals *= np.exp(-grid.radius ** 2 / float(w) ** 2)
    elif kind == "gaussian":
        amp = float(spec.get("amplitude", 1.0))
        w = float(spec.get("width", 1.0))
        c = spec.get("center", [0.0] * grid.n_dims)
        r2 = sum((x - float(ci)) ** 2 for x, ci in zip(xs, c))
        vals = amp * np.exp(-np.broadcast_to(r2, grid.shape) / w ** 2).astype(complex)
    elif kind == "file":
        f = load_field(spec["path"])
        if f.grid != grid:
            raise ConfigError("initial.path", f"field grid {f.grid} differs from config grid {grid}")
        vals = f.values.astype(complex)
    else:
        raise ConfigError("initial.kind", f"unknown kind {kind!r}")
    k = spec.get("phase")
    if k is not None:
        if len(k) != grid.n_dims:
            raise ConfigError("initial.phase", f"need {grid.n_dims} components")
        vals = vals * np.exp(1j * sum(float(kj) * x for kj, x in zip(k, xs)))
    return Field(grid, vals)


@dataclass
class SimConfig:
    """Everything needed to reproduce one run."""

    n: int = 3
    p: float = 3.0
    grid_points: int = 64
    half_width: float = 8.0
    potential: dict = field(default_factory=lambda: {"kind": "zero"})
    electric: Optional[dict] = None
    initial: dict = field(default_factory=lambda: {"kind": "soliton", "scale": 0.9})
    dt: float = 1e-3
    t_end: float = 1.0
    output_stride: int = 10
    blowup_gradient_factor: float = 10.0
    spectral_tail_threshold: float = 1e-4
    dealias: bool = False
    nonlinear: bool = True
    boundary_tol: float = 1e-2
    seed: int = 0
    name: str = "run"
    warnings: list = field(default_factory=list, compare=False)

    @property
    def params(self):
        return PhysParams(self.n, self.p)

    @property
    def grid(self):
        return make_grid(self.n, self.grid_points, self.half_width)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        known = {f.name for f in fields(cls)} - {"warnings"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config key")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"malformed JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        d = asdict(self)
        d.pop("warnings")
        return d

    def validate(self):
        """Check fields; CFL violations are warnings recorded in ``self.warnings``."""
        def positive(name, v):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
                raise ConfigError(name, f"must be a positive finite number, got {v!r}")

        for name in ("dt", "t_end", "half_width", "blowup_gradient_factor", "spectral_tail_threshold",
                     "boundary_tol"):
            positive(name, getattr(self, name))
        if not isinstance(self.output_stride, int) or self.output_stride < 1:
            raise ConfigError("output_stride", f"must be an integer >= 1, got {self.output_stride!r}")
        if self.n != 3:
            raise ConfigError("n", "time evolution is implemented for n = 3 only")
        try:
            self.params
        except ValueError as exc:
            raise ConfigError("p", str(exc)) from None
        try:
            grid = self.grid
        except ValueError as exc:
            raise ConfigError("grid_points", str(exc)) from None
        pot = build_potential(self.potential, self.electric)
        self.warnings = []
        h = grid.spacing
        if self.dt > h * h / math.pi:
            self.warnings.append(f"dt = {self.dt:g} exceeds h^2/pi = {h * h / math.pi:g}")
        amax = pot.max_abs(grid)
        if amax > 0 and self.dt > h / (2.0 * amax):
            self.warnings.append(f"dt = {self.dt:g} exceeds advective bound h/(2 max|A|) = {h / (2 * amax):g}")
        for w in self.warnings:
            log.warning("config %s: %s", self.name, w)
        return self


# ---------------------------------------------------------------- stepping

class Stepper:
    """Precomputed operators for repeated steps with fixed ``dt``."""

    def __init__(self, grid, pot, params, dt, nonlinear=True, dealias=False):
        self.grid = grid
        self.pot = pot if pot is not None else zero_potential(grid.n_dims)
        self.params = params
        self.dt = float(dt)
        self.nonlinear = nonlinear
        self.pm1 = float(params.p - 1.0)
        ksq = sum(grid.k_axis(j) ** 2 for j in range(grid.n_dims))
        self.half_free = np.exp(-0.5j * self.dt * ksq)
        self.full_free = self.half_free * self.half_free
        self.mask = None
        if dealias:
            kcut = (2.0 / 3.0) * math.pi / grid.spacing
            keep = np.ones(grid.shape, dtype=bool)
            for j in range(grid.n_dims):
                keep &= np.abs(grid.k_axis(j)) <= kcut
            self.mask = keep
        self.avec = self.pot.vector_on(grid)
        real_pot = None
        if self.avec is not None:
            real_pot = sum(a * a for a in self.avec)
        el = self.pot.electric
        if el is not None:
            a0 = np.broadcast_to(el.on(grid), grid.shape)
            real_pot = a0.copy() if real_pot is None else real_pot + a0
        self.real_pot = None if real_pot is None else np.ascontiguousarray(real_pot, dtype=float)
        active = [] if self.avec is None else [j for j, a in enumerate(self.avec) if np.any(a)]
        n_pts = grid.points_per_dim
        self.kd_active = [(j, 1j * grid.k_axis(j).reshape(
            [n_pts if i == j else 1 for i in range(grid.n_dims)])) for j in active]
        self.avec_active = [np.ascontiguousarray(self.avec[j]) for j in active]

    def _pointwise(self, u, tau):
        if self.nonlinear:
            return kernels.phase_rotate(u, self.real_pot, tau, self.pm1)
        if self.real_pot is not None:
            u *= np.exp(-1j * tau * self.real_pot)
        return u

    def _advection(self, v):
        # -2 A.grad v; each partial derivative by 1-D transforms along its own axis
        grads = [sfft.ifft(k * sfft.fft(v, axis=j), axis=j) for j, k in self.kd_active]
        return kernels.advection_rhs(grads, self.avec_active, np.empty_like(v))

    def _rk4(self, u):
        h = self.dt
        k = self._advection(u)
        acc = k.copy()
        k = self._advection(u + (0.5 * h) * k)
        acc += 2.0 * k
        k = self._advection(u + (0.5 * h) * k)
        acc += 2.0 * k
        k = self._advection(u + h * k)
        acc += k
        acc *= h / 6.0
        acc += u
        return acc

    def _free(self, u, prop):
        uh = sfft.fftn(u)
        uh *= prop
        if self.mask is not None:
            uh *= self.mask
        return sfft.ifftn(uh)

    def _linear(self, u):
        if self.avec is None:
            return self._free(u, self.full_free)
        u = self._free(u, self.half_free)
        u = self._rk4(u)
        return self._free(u, self.half_free)

    def __call__(self, u):
        """Advance the complex array ``u`` by one step; returns a new array."""
        return self.advance(u, 1)

    def advance(self, u, steps):
        """``steps`` consecutive steps.

        Adjacent pointwise half steps are fused into one full step, which is
        exact because ``|u|`` does not change under the pointwise flow.
        """
        u = np.array(u, dtype=complex)
        u = self._pointwise(u, 0.5 * self.dt)
        for i in range(steps):
            u = self._linear(u)
            u = self._pointwise(u, self.dt if i < steps - 1 else 0.5 * self.dt)
        return u


def step(u, pot, params, dt, nonlinear=True, dealias=False):
    """One Strang step of size ``dt``; see :class:`Stepper` for repeated use."""
    st = Stepper(u.grid, pot, params, dt, nonlinear=nonlinear, dealias=dealias)
    return Field(u.grid, st(u.values))


# ---------------------------------------------------------------- virial

def virial_terms(u, pot, params, grads=None, btau=None, report=None):
    """The five virial contributions, keyed ``energy``, ``kinetic``, ``electric``, ``electric_radial``, ``trapping``."""
    n, p = params.n, params.p
    np1 = n * (p - 1.0)
    g = u.grid
    if grads is None:
        grads = covariant_gradient(u, pot)
    rep = report or energy_report(u, pot, params, grads=grads)
    dens = np.abs(u.values) ** 2
    el = getattr(pot, "electric", None) if pot is not None else None
    e_term = 0.0
    e_rad = 0.0
    if el is not None:
        if el.radial_derivative is None:
            raise ValueError("virial identity needs the radial derivative of A0")
        e_term = -2.0 * np1 * integrate(Field(g, el.on(g) * dens))
        e_rad = -4.0 * integrate(Field(g, g.radius * el.radial_derivative_on(g) * dens))
    trap = 0.0 if pot is None or pot.is_zero else 8.0 * trapping_term(u, pot, btau=btau, grads=grads)
    return {
        "energy": 4.0 * np1 * rep.E_A,
        "kinetic": -2.0 * (np1 - 4.0) * rep.kinetic_A,
        "electric": e_term,
        "electric_radial": e_rad,
        "trapping": trap,
    }


def virial_rhs(u, pot, params, grads=None, btau=None, report=None):
    """Right-hand side of the virial identity ``V'' = ...`` for ``V = int |x|^2 |u|^2``."""
    return float(sum(virial_terms(u, pot, params, grads, btau, report).values()))


def second_difference(t, v):
    """Three-point second derivative on a possibly non-uniform grid; NaN at the ends."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.full(v.shape, np.nan)
    if len(v) < 3:
        return out
    hm = t[1:-1] - t[:-2]
    hp = t[2:] - t[1:-1]
    out[1:-1] = 2.0 * ((v[2:] - v[1:-1]) / hp - (v[1:-1] - v[:-2]) / hm) / (hp + hm)
    return out


# ---------------------------------------------------------------- simulate

@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    E_A: float
    grad_A_norm: float
    G: float
    V: float
    V_second_diff: float
    virial_rhs: float
    trapping_term: float
    F_RK: float
    F_KE: float
    spectral_tail: float
    below_grad_threshold: bool
    status: str = "running"

    def to_row(self):
        return [self.t, self.mass, self.E_A, self.grad_A_norm, self.G, self.V, self.V_second_diff,
                self.virial_rhs, self.trapping_term, self.F_RK, self.F_KE, self.spectral_tail,
                int(self.below_grad_threshold), self.status]


CSV_COLUMNS = [f.name for f in fields(DiagnosticsRecord)]


class Trajectory(list):
    """List of DiagnosticsRecord with run-level status attributes."""

    def __init__(self, records=(), status="running", trigger=None, t_trigger=None, meta=None):
        super().__init__(records)
        self.status = status
        self.trigger = trigger
        self.t_trigger = t_trigger
        self.meta = dict(meta or {})
        self.final_field = None

    def column(self, name):
        return np.array([getattr(r, name) for r in self], dtype=float)

    def summary(self):
        mass = self.column("mass")
        energy = self.column("E_A")
        out = {
            "status": self.status,
            "trigger": self.trigger,
            "t_trigger": self.t_trigger,
            "records": len(self),
            "t_final": self[-1].t if self else 0.0,
            "max_mass_drift": _max_rel_drift(mass),
            "max_energy_drift": _max_rel_drift(energy),
            "grad_threshold_side": _threshold_side(self),
            "blowup_note": ("blowup_detected is a numerical proxy (gradient growth or spectral "
                            "tail loss with monotone gradient growth), not a proof of blow-up"),
        }
        out.update(self.meta)
        return out


def _max_rel_drift(x):
    if len(x) == 0 or x[0] == 0.0:
        return 0.0 if len(x) == 0 or not np.any(x) else float(np.max(np.abs(x - x[0])))
    return float(np.max(np.abs(x - x[0])) / abs(x[0]))


def _threshold_side(records):
    flags = {r.below_grad_threshold for r in records}
    if flags == {True}:
        return "below"
    if flags == {False}:
        return "above"
    return "mixed" if flags else "none"


def _monotone_tail(values, window=MONOTONE_WINDOW):
    if len(values) < window:
        return False
    tail = np.asarray(values[-window:])
    return bool(np.all(np.diff(tail) > 0))


def simulate(cfg, on_record: Optional[Callable] = None, bundle=None, keep_field=False):
    """Run ``cfg`` and return a :class:`Trajectory`.

    A record is taken every ``output_stride`` steps and at the last step.
    The run stops early when the field stops being finite, when
    ``grad_A_norm`` reaches ``blowup_gradient_factor`` times its initial
    value, or when the spectral tail fraction exceeds its threshold. An
    early stop is reported as ``blowup_detected`` only if ``grad_A_norm``
    increased strictly over the last 20 records, and as
    ``resolution_lost`` otherwise.
    """
    if isinstance(cfg, dict):
        cfg = SimConfig.from_dict(cfg)
    else:
        cfg.validate()
    params = cfg.params
    grid = cfg.grid
    pot = build_potential(cfg.potential, cfg.electric)
    if bundle is None:
        bundle = ground_state(params.n, params.p)
    u0 = build_initial(cfg.initial, grid, bundle, boundary_tol=cfg.boundary_tol)
    stepper = Stepper(grid, pot, params, cfg.dt, nonlinear=cfg.nonlinear, dealias=cfg.dealias)
    btau = None if pot.is_zero else trapping_component(pot, grid)
    r2 = grid.radius ** 2

    def diagnose(t, vals):
        u = Field(grid, vals)
        grads = covariant_gradient(u, pot)
        rep = energy_report(u, pot, params, grads=grads)
        kato_scale = rep.x_value - rep.x_kato
        rec = DiagnosticsRecord(
            t=t,
            mass=rep.mass,
            E_A=rep.E_A,
            grad_A_norm=math.sqrt(rep.kinetic_A),
            G=rep.G,
            V=integrate(Field(grid, r2 * np.abs(vals) ** 2)),
            V_second_diff=math.nan,
            virial_rhs=virial_rhs(u, pot, params, grads=grads, btau=btau, report=rep),
            trapping_term=trapping_term(u, pot, btau=btau, grads=grads),
            F_RK=kato_scale,
            F_KE=rep.x_value - bundle.x_star,
            spectral_tail=spectral_tail_fraction(u) if rep.mass > 0 else 0.0,
            below_grad_threshold=bool(rep.G < bundle.grad_threshold),
        )
        return rec

    n_steps = int(math.ceil(cfg.t_end / cfg.dt - 1e-9))
    traj = Trajectory(meta={"config": cfg.to_dict(), "warnings": list(cfg.warnings),
                            "backend": kernels.BACKEND, "grad_threshold": bundle.grad_threshold})
    vals = u0.values
    rec = diagnose(0.0, vals)
    traj.append(rec)
    g0 = rec.grad_A_norm
    trigger = None
    k = 0
    while k < n_steps:
        chunk = min(cfg.output_stride, n_steps - k)
        vals = stepper.advance(vals, chunk)
        k += chunk
        if not np.all(np.isfinite(vals)):
            trigger = "non_finite"
            traj.append(DiagnosticsRecord(k * cfg.dt, *([math.nan] * 11), False, "running"))
            break
        rec = diagnose(k * cfg.dt, vals)
        traj.append(rec)
        if on_record is not None:
            on_record(rec)
        if g0 > 0 and rec.grad_A_norm >= cfg.blowup_gradient_factor * g0:
            trigger = "gradient_factor"
            break
        if rec.spectral_tail > cfg.spectral_tail_threshold:
            trigger = "spectral_tail"
            break

    sd = second_difference(traj.column("t"), traj.column("V"))
    for r, v in zip(traj, sd):
        r.V_second_diff = float(v)
    if trigger is None:
        status = "global_window_ok"
    elif trigger != "non_finite" and _monotone_tail([r.grad_A_norm for r in traj]):
        status = "blowup_detected"
    else:
        status = "resolution_lost"
    traj.status = status
    traj.trigger = trigger
    traj.t_trigger = traj[-1].t if trigger else None
    traj[-1].status = status
    if keep_field:
        traj.final_field = Field(grid, vals)
    return traj


# ---------------------------------------------------------------- output

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_diagnostics_csv(records, path=None):
    """Write (or return, when ``path`` is None) the diagnostics CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
