# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled time-stepping kernel.

Mirrors ``advance`` in ``_kernels_py``: same update order, same quadratures,
fused into a single pass per step with no temporaries beyond two work rows.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, copysign, isfinite

cnp.import_array()

FORCE_NONLINEAR = 0
FORCE_LINEAR = 1


cdef inline double _force(double u, double u_star, double edge, double two_stiff, int mode) nogil:
    cdef double x, m
    if mode == 1:
        return u
    x = fabs(u)
    if x <= edge:
        m = 2.0 * x
    elif x <= u_star:
        m = two_stiff * (u_star - x)
    else:
        return 0.0
    if m == 0.0:
        return 0.0
    return copysign(m, u)


cdef void _accel(const double[::1] u, double[::1] a, double[::1] f,
                 double dx2, double u_star, double edge, double two_stiff,
                 int mode, Py_ssize_t n) nogil:
    cdef Py_ssize_t j
    for j in range(n):
        f[j] = _force(u[j], u_star, edge, two_stiff, mode)
    a[0] = (u[1] - 2.0 * u[0] + u[1]) / dx2 - f[0]
    for j in range(1, n - 1):
        a[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) / dx2 - f[j]
    a[n - 1] = (u[n - 2] - 2.0 * u[n - 1] + u[n - 2]) / dx2 - f[n - 1]


cdef double _source(const double[::1] u, const double[::1] f, double dx, Py_ssize_t n) nogil:
    # ||grad u||^2 (cell sums) + <u, f> (trapezoid)
    cdef Py_ssize_t j
    cdef double g = 0.0, d, s = 0.0
    for j in range(n - 1):
        d = u[j + 1] - u[j]
        g += d * d
    for j in range(1, n - 1):
        s += u[j] * f[j]
    s += 0.5 * (u[0] * f[0] + u[n - 1] * f[n - 1])
    return g / dx + dx * s


def advance(double[::1] u, double[::1] v, double dx, double dt, long nsteps,
            double u_star, double sigma, int mode):
    """Advance ``(u, v)`` in place by ``nsteps`` steps.

    Returns ``(dissipation, j_source, bad_step)`` exactly as the numpy
    fallback does.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t j
    cdef long k
    cdef double h = 0.5 * dt
    cdef double dx2 = dx * dx
    cdef double edge = u_star - 1.0 / sigma
    cdef double two_stiff = 2.0 * (u_star * sigma - 1.0)
    cdef double inv = 1.0 + h
    cdef double diss = 0.0, jsrc = 0.0, kin, q0, q1, vm, vn
    cdef double[::1] a = np.empty(n)
    cdef double[::1] f = np.empty(n)
    cdef double[::1] vh = np.empty(n)
    cdef long bad = -1

    if v.shape[0] != n or n < 3:
        raise ValueError("u and v must have equal length >= 3")

    with nogil:
        _accel(u, a, f, dx2, u_star, edge, two_stiff, mode, n)
        q0 = _source(u, f, dx, n)
        for k in range(nsteps):
            for j in range(n):
                vh[j] = v[j] + h * (a[j] - v[j])
                u[j] = u[j] + dt * vh[j]
            _accel(u, a, f, dx2, u_star, edge, two_stiff, mode, n)
            kin = 0.0
            for j in range(n):
                vn = (vh[j] + h * a[j]) / inv
                vm = 0.5 * (v[j] + vn)
                if j == 0 or j == n - 1:
                    kin += 0.5 * vm * vm
                else:
                    kin += vm * vm
                v[j] = vn
            kin = dx * kin
            q1 = _source(u, f, dx, n)
            diss += dt * kin
            jsrc += h * (q0 + q1) - dt * kin
            if not (isfinite(kin) and isfinite(q1)):
                bad = k
                break
            q0 = q1
    return diss, jsrc, bad
