# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the loops in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, pow, sqrt

cnp.import_array()

cdef int OVERSHOOT = 1
cdef int UNDERSHOOT = -1


def phase_rotate(u, potential, double tau, double pm1):
    cdef double complex[::1] uf = u.reshape(-1)
    cdef double[::1] vf
    cdef Py_ssize_t i, n = uf.shape[0]
    cdef double re, im, m2, th, c, s
    cdef bint has_v = potential is not None
    cdef bint cubic = pm1 == 2.0
    if has_v:
        vf = np.ascontiguousarray(potential, dtype=np.float64).reshape(-1)
    for i in range(n):
        re = uf[i].real
        im = uf[i].imag
        m2 = re * re + im * im
        if cubic:
            th = -m2
        else:
            th = -pow(m2, 0.5 * pm1)
        if has_v:
            th = th + vf[i]
        th = -tau * th
        c = cos(th)
        s = sin(th)
        uf[i] = (re * c - im * s) + 1j * (re * s + im * c)
    return u


def advection_rhs(grads, vec_potential, out):
    cdef double complex[::1] of = out.reshape(-1)
    cdef double complex[::1] g0, g1, g2
    cdef double[::1] a0, a1, a2
    cdef Py_ssize_t i, n = of.shape[0]
    cdef int m = len(grads)
    if m == 0:
        for i in range(n):
            of[i] = 0.0
        return out
    if m > 3:
        raise ValueError("at most three components")
    g0 = grads[0].reshape(-1)
    a0 = np.ascontiguousarray(vec_potential[0], dtype=np.float64).reshape(-1)
    if m == 1:
        for i in range(n):
            of[i] = -2.0 * a0[i] * g0[i]
        return out
    g1 = grads[1].reshape(-1)
    a1 = np.ascontiguousarray(vec_potential[1], dtype=np.float64).reshape(-1)
    if m == 2:
        for i in range(n):
            of[i] = -2.0 * (a0[i] * g0[i] + a1[i] * g1[i])
        return out
    g2 = grads[2].reshape(-1)
    a2 = np.ascontiguousarray(vec_potential[2], dtype=np.float64).reshape(-1)
    for i in range(n):
        of[i] = -2.0 * (a0[i] * g0[i] + a1[i] * g1[i] + a2[i] * g2[i])
    return out


cdef inline double _force(double r, double R, double S, double dim, double p) nogil:
    return -(dim - 1.0) / r * S + R - pow(fabs(R), p - 1.0) * R


cdef int _shoot_one(double a, double dim, double p, double h, long nsteps,
                    double* out) nogil:
    cdef double curv = (a - pow(fabs(a), p - 1.0) * a) / dim
    cdef double R = a + 0.5 * curv * h * h
    cdef double S = curv * h
    cdef double r = h
    cdef double k1r, k1s, k2r, k2s, k3r, k3s, k4r, k4s, Rn, Sn
    cdef long i
    if out != NULL:
        out[0] = a
        out[1] = R
    for i in range(2, nsteps + 1):
        k1r = S
        k1s = _force(r, R, S, dim, p)
        k2r = S + 0.5 * h * k1s
        k2s = _force(r + 0.5 * h, R + 0.5 * h * k1r, k2r, dim, p)
        k3r = S + 0.5 * h * k2s
        k3s = _force(r + 0.5 * h, R + 0.5 * h * k2r, k3r, dim, p)
        k4r = S + h * k3s
        k4s = _force(r + h, R + h * k3r, k4r, dim, p)
        Rn = R + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        Sn = S + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        r = r + h
        if Rn <= 0.0:
            return OVERSHOOT
        if Sn > 0.0:
            return UNDERSHOOT
        R = Rn
        S = Sn
        if out != NULL:
            out[i] = R
    return 0


def shoot_radial(amplitudes, double dim, double p, double h, long nsteps):
    cdef double[::1] a = np.ascontiguousarray(amplitudes, dtype=np.float64).reshape(-1)
    status = np.zeros(a.shape[0], dtype=np.int64)
    cdef long long[::1] st = status
    cdef Py_ssize_t k
    for k in range(a.shape[0]):
        st[k] = _shoot_one(a[k], dim, p, h, nsteps + 1, NULL)
    return status.reshape(np.shape(amplitudes))


def radial_profile(double amplitude, double dim, double p, double h, long nsteps):
    out = np.full(nsteps + 1, np.nan)
    cdef double[::1] o = out
    _shoot_one(amplitude, dim, p, h, nsteps, &o[0])
    return out
