"""Pure numpy implementations of the hot loops.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
"""

import numpy as np

OVERSHOOT = 1
UNDERSHOOT = -1
UNDECIDED = 0


def phase_rotate(u, potential, tau, pm1):
    """In place ``u <- u * exp(-1j*tau*(potential - |u|**pm1))``.

    ``potential`` may be None for a zero real multiplier.
    """
    mod = np.abs(u)
    theta = mod ** pm1 if pm1 != 2.0 else mod * mod
    if potential is not None:
        theta = potential - theta
    else:
        theta = -theta
    u *= np.exp(-1j * tau * theta)
    return u


def advection_rhs(grads, vec_potential, out):
    """``out <- -2 * sum_j A_j * d_j u``."""
    out[...] = 0.0
    for g, a in zip(grads, vec_potential):
        out += a * g
    out *= -2.0
    return out


def _ode_rhs(r, R, S, dim, p):
    return S, -(dim - 1.0) / r * S + R - np.abs(R) ** (p - 1.0) * R


def shoot_radial(amplitudes, dim, p, h, nsteps):
    """Integrate R'' + (dim-1)/r R' - R + |R|^(p-1) R = 0 from r = 0 for each amplitude.

    Fixed-step RK4 started from the Taylor expansion at r = h. Integration for
    one amplitude stops at the first sign change of R (overshoot) or the first
    positive slope while R > 0 (undershoot).

    Returns an int array: +1 overshoot, -1 undershoot, 0 undecided.
    """
    a = np.asarray(amplitudes, dtype=float)
    curv = (a - np.abs(a) ** (p - 1.0) * a) / dim
    R = a + 0.5 * curv * h * h
    S = curv * h
    status = np.zeros(a.shape, dtype=np.int64)
    active = np.ones(a.shape, dtype=bool)
    r = h
    for i in range(1, nsteps + 1):
        k1r, k1s = _ode_rhs(r, R, S, dim, p)
        k2r, k2s = _ode_rhs(r + 0.5 * h, R + 0.5 * h * k1r, S + 0.5 * h * k1s, dim, p)
        k3r, k3s = _ode_rhs(r + 0.5 * h, R + 0.5 * h * k2r, S + 0.5 * h * k2s, dim, p)
        k4r, k4s = _ode_rhs(r + h, R + h * k3r, S + h * k3s, dim, p)
        Rn = R + h / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
        Sn = S + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
        r += h
        over = active & (Rn <= 0.0)
        under = active & ~over & (Sn > 0.0)
        status[over] = OVERSHOOT
        status[under] = UNDERSHOOT
        active &= ~(over | under)
        R = np.where(active, Rn, R)
        S = np.where(active, Sn, S)
        if not active.any():
            break
    return status


def radial_profile(amplitude, dim, p, h, nsteps):
    """Samples R(k*h), k = 0..nsteps, of one shooting trajectory (NaN after it stops)."""
    out = np.full(nsteps + 1, np.nan)
    a = float(amplitude)
    curv = (a - abs(a) ** (p - 1.0) * a) / dim
    out[0] = a
    R = a + 0.5 * curv * h * h
    S = curv * h
    out[1] = R
    r = h
    for i in range(2, nsteps + 1):
        k1r, k1s = _ode_rhs(r, R, S, dim, p)
        k2r, k2s = _ode_rhs(r + 0.5 * h, R + 0.5 * h * k1r, S + 0.5 * h * k1s, dim, p)
        k3r, k3s = _ode_rhs(r + 0.5 * h, R + 0.5 * h * k2r, S + 0.5 * h * k2s, dim, p)
        k4r, k4s = _ode_rhs(r + h, R + h * k3r, S + h * k3s, dim, p)
        R = R + h / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r)
        S = S + h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s)
        r += h
        if R <= 0.0 or S > 0.0:
            break
        out[i] = R
    return out
