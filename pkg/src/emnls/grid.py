"""Periodic Cartesian lattice, spectral derivatives and lattice quadrature.

The box ``[-L, L)^n`` stands in for R^n. Fields handed to this module are
expected to have decayed to round-off level at the box boundary; nothing here
checks that except :func:`boundary_max`.

Arrays are indexed ``[i_1, ..., i_n]`` so axis 0 is the x_1 direction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "gradient",
    "covariant_gradient",
    "laplacian_symbol",
    "integrate",
    "norm_l2",
    "norm_lp",
    "spectral_tail_fraction",
    "boundary_max",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class Grid:
    n_dims: int
    points_per_dim: int
    half_width: float

    @property
    def shape(self):
        return (self.points_per_dim,) * self.n_dims

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.points_per_dim

    @property
    def cell_volume(self):
        return self.spacing ** self.n_dims

    @cached_property
    def axis(self):
        """1-D coordinates ``-L + i*h``; the origin is the point ``i = N/2``."""
        return -self.half_width + self.spacing * np.arange(self.points_per_dim)

    @cached_property
    def wavenumbers(self):
        """Per-axis wavenumbers ``pi*m/L`` in FFT order."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.points_per_dim, d=self.spacing)
        return tuple(k.copy() for _ in range(self.n_dims))

    @cached_property
    def _derivative_k(self):
        # first derivatives drop the unpaired Nyquist mode so real fields stay real
        k = 2.0 * np.pi * np.fft.fftfreq(self.points_per_dim, d=self.spacing)
        k[self.points_per_dim // 2] = 0.0
        return k

    def coords(self):
        """Broadcastable coordinate arrays ``(x_1, ..., x_n)``."""
        out = []
        for j in range(self.n_dims):
            shp = [1] * self.n_dims
            shp[j] = self.points_per_dim
            out.append(self.axis.reshape(shp))
        return tuple(out)

    def dense_coords(self):
        return tuple(np.broadcast_to(c, self.shape) for c in self.coords())

    @cached_property
    def radius(self):
        r2 = sum(c * c for c in self.coords())
        return np.sqrt(np.broadcast_to(r2, self.shape))

    @property
    def origin_index(self):
        return (self.points_per_dim // 2,) * self.n_dims

    def k_axis(self, j, derivative=False):
        k = self._derivative_k if derivative else self.wavenumbers[j]
        shp = [1] * self.n_dims
        shp[j] = self.points_per_dim
        return k.reshape(shp)

    def header(self):
        return {"n_dims": self.n_dims, "N": self.points_per_dim, "L": self.half_width}


@dataclass
class Field:
    """Values of a real or complex function sampled on ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def copy(self):
        return Field(self.grid, self.values.copy())

    def with_values(self, values):
        return Field(self.grid, values)

    def __mul__(self, other):
        if isinstance(other, Field):
            _same_grid(self, other)
            other = other.values
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, Field):
            _same_grid(self, other)
            other = other.values
        return Field(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Field):
            _same_grid(self, other)
            other = other.values
        return Field(self.grid, self.values - other)

    def abs(self):
        return Field(self.grid, np.abs(self.values))


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def make_grid(n_dims, points_per_dim, half_width):
    """Build a periodic lattice on ``[-L, L)^n`` with ``N`` points per axis."""
    n_dims = int(n_dims)
    N = int(points_per_dim)
    if n_dims < 1:
        raise ValueError(f"n_dims must be >= 1, got {n_dims}")
    if N < 8 or N & (N - 1):
        raise ValueError(f"points_per_dim must be a power of two >= 8, got {points_per_dim}")
    if not half_width > 0 or not math.isfinite(half_width):
        raise ValueError(f"half_width must be positive and finite, got {half_width}")
    return Grid(n_dims, N, float(half_width))


def _fft(a):
    return sfft.fftn(a)


def _ifft(a):
    return sfft.ifftn(a)


def gradient(f, keep_nyquist=None):
    """Spectral partial derivatives of ``f`` along every axis.

    The unpaired Nyquist mode is differentiated only for complex fields (or
    when ``keep_nyquist`` is set), so that real fields stay real and complex
    fields see the same ``|k|^2`` as the free propagator. Each derivative
    uses 1-D transforms along its own axis, which is the same operator as
    the full n-D spectral derivative at a fraction of the cost.
    """
    g = f.grid
    if keep_nyquist is None:
        keep_nyquist = f.is_complex
    vals = f.values
    N = g.points_per_dim
    out = []
    for j in range(g.n_dims):
        shp = [1] * g.n_dims
        if not f.is_complex and not keep_nyquist:
            k = g._derivative_k[: N // 2 + 1]
            shp[j] = k.size
            d = sfft.irfft(1j * k.reshape(shp) * sfft.rfft(vals, axis=j), n=N, axis=j)
        else:
            k = g.k_axis(j, derivative=not keep_nyquist)
            d = sfft.ifft(1j * k * sfft.fft(vals, axis=j), axis=j)
            if not f.is_complex:
                d = d.real
        out.append(Field(g, d))
    return out


def _vector_arrays(potential, grid):
    if potential is None:
        return None
    if hasattr(potential, "vector_on"):
        arrays = potential.vector_on(grid)
    else:
        arrays = potential
    if arrays is None:
        return None
    arrays = [np.asarray(a.values if isinstance(a, Field) else a) for a in arrays]
    if len(arrays) != grid.n_dims:
        raise ValueError(f"vector potential has {len(arrays)} components, grid has {grid.n_dims} axes")
    for a in arrays:
        if np.broadcast_shapes(a.shape, grid.shape) != grid.shape:
            raise ValueError(f"vector potential sampled on shape {a.shape}, field grid is {grid.shape}")
    return arrays


def covariant_gradient(f, potential):
    """``D_j f = d_j f + i A_j f`` for each axis.

    ``potential`` is a Potential (anything with ``vector_on(grid)``), a
    sequence of per-axis arrays, or None.
    """
    grads = gradient(Field(f.grid, f.values.astype(complex, copy=False)))
    arrays = _vector_arrays(potential, f.grid)
    if arrays is None:
        return grads
    return [Field(f.grid, d.values + 1j * a * f.values) for d, a in zip(grads, arrays)]


def laplacian_symbol(grid):
    """``|k|^2`` on the full spectral lattice."""
    return sum(grid.k_axis(j) ** 2 for j in range(grid.n_dims))


def integrate(f):
    """Rectangle-rule integral ``h^n * sum(f)`` of a real field."""
    vals = f.values if isinstance(f, Field) else f
    if np.iscomplexobj(vals):
        raise TypeError("integrate expects a real field")
    grid = f.grid
    return float(grid.cell_volume * np.sum(vals))


def norm_lp(f, q):
    """``(int |f|^q)^(1/q)``."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    m = np.abs(f.values)
    return integrate(Field(f.grid, m ** q)) ** (1.0 / q)


def norm_l2(f):
    m = np.abs(f.values)
    return math.sqrt(integrate(Field(f.grid, m * m)))


def spectral_tail_fraction(f):
    """Fraction of spectral power in modes with some ``|k_j|`` above 2/3 of the cutoff."""
    g = f.grid
    power = np.abs(_fft(f.values)) ** 2
    total = power.sum()
    if total == 0.0:
        return 0.0
    kcut = (2.0 / 3.0) * math.pi / g.spacing
    mask = np.zeros(g.shape, dtype=bool)
    for j in range(g.n_dims):
        mask |= np.abs(g.k_axis(j)) > kcut
    return float(power[mask].sum() / total)


def boundary_max(f):
    """Largest ``|f|`` on the box faces (any index 0 along some axis)."""
    v = np.abs(f.values)
    return float(max(np.take(v, 0, axis=j).max() for j in range(f.grid.n_dims)))


def save_field(path, f, fmt="bin"):
    """Write ``path`` plus a ``path.json`` header.

    Lattice order has the x_1 index varying fastest. Complex values are stored
    as interleaved (re, im) pairs.
    """
    path = Path(path)
    flat = np.ravel(f.values, order="F")
    header = dict(f.grid.header(), dtype="complex128" if f.is_complex else "float64",
                  order="x1-fastest", format=fmt)
    if fmt == "bin":
        data = flat.astype(np.complex128 if f.is_complex else np.float64)
        data.astype(data.dtype.newbyteorder("<")).tofile(path)
    elif fmt == "csv":
        with open(path, "w") as fh:
            if f.is_complex:
                fh.write("re,im\n")
                for z in flat:
                    fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")
            else:
                fh.write("value\n")
                for x in flat:
                    fh.write(f"{float(x)!r}\n")
    else:
        raise ValueError(f"unknown field format {fmt!r}")
    with open(str(path) + ".json", "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)


def load_field(path):
    path = Path(path)
    with open(str(path) + ".json") as fh:
        header = json.load(fh)
    grid = make_grid(header["n_dims"], header["N"], header["L"])
    is_complex = header["dtype"] == "complex128"
    if header.get("format", "bin") == "bin":
        flat = np.fromfile(path, dtype="<c16" if is_complex else "<f8")
    else:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        flat = raw[:, 0] + 1j * raw[:, 1] if is_complex else raw[:, 0]
    values = np.reshape(flat, grid.shape, order="F")
    return Field(grid, values)
