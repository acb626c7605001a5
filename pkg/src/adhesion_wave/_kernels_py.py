"""Pure numpy implementation of the time-stepping kernels.

This is the fallback used when the compiled extension is unavailable, and
the reference the extension is checked against. Arithmetic is ordered the
same way as in ``_kernels.pyx`` so that both backends agree to rounding.
"""

import numpy as np

FORCE_NONLINEAR = 0
FORCE_LINEAR = 1


def laplacian(u, dx):
    """Second-order Neumann Laplacian with mirror ghost nodes."""
    dx2 = dx * dx
    out = np.empty_like(u)
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / dx2
    out[0] = (u[1] - 2.0 * u[0] + u[1]) / dx2
    out[-1] = (u[-2] - 2.0 * u[-1] + u[-2]) / dx2
    return out


def force(u, u_star, sigma, mode):
    if mode == FORCE_LINEAR:
        return u.copy()
    edge = u_star - 1.0 / sigma
    stiff = u_star * sigma - 1.0
    x = np.abs(u)
    mag = np.where(x <= edge, 2.0 * x, np.where(x <= u_star, (2.0 * stiff) * (u_star - x), 0.0))
    out = np.copysign(mag, u)
    out[mag == 0.0] = 0.0
    return out


def weighted_sq(a, dx):
    """Trapezoid quadrature of ``a**2`` on the nodes."""
    return dx * (np.dot(a[1:-1], a[1:-1]) + 0.5 * (a[0] * a[0] + a[-1] * a[-1]))


def weighted_dot(a, b, dx):
    return dx * (np.dot(a[1:-1], b[1:-1]) + 0.5 * (a[0] * b[0] + a[-1] * b[-1]))


def grad_sq(u, dx):
    """Cell sum of squared forward differences, times dx."""
    d = np.diff(u)
    return np.dot(d, d) / dx


def step_arrays(u, v, dx, dt, u_star, sigma, mode):
    """One step; returns ``(u_new, v_new, v_mid)`` without touching inputs."""
    h = 0.5 * dt
    a0 = laplacian(u, dx) - force(u, u_star, sigma, mode)
    vh = v + h * (a0 - v)
    un = u + dt * vh
    a1 = laplacian(un, dx) - force(un, u_star, sigma, mode)
    vn = (vh + h * a1) / (1.0 + h)
    return un, vn, 0.5 * (v + vn)


def advance(u, v, dx, dt, nsteps, u_star, sigma, mode):
    """Advance ``(u, v)`` in place by ``nsteps`` steps.

    Returns ``(dissipation, j_source, bad_step)``: the increments of the
    time integrals of ``||v||^2`` and ``||grad u||^2 + <u, f(u)> - ||v||^2``
    over the advanced interval, and the index of the first step producing a
    non-finite value (``-1`` when all steps were finite).
    """
    h = 0.5 * dt
    diss = 0.0
    jsrc = 0.0
    f0 = force(u, u_star, sigma, mode)
    a0 = laplacian(u, dx) - f0
    q0 = grad_sq(u, dx) + weighted_dot(u, f0, dx)
    # overflow is reported through bad_step, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(nsteps):
            vh = v + h * (a0 - v)
            un = u + dt * vh
            f1 = force(un, u_star, sigma, mode)
            a1 = laplacian(un, dx) - f1
            vn = (vh + h * a1) / (1.0 + h)
            vm = 0.5 * (v + vn)
            kin = weighted_sq(vm, dx)
            q1 = grad_sq(un, dx) + weighted_dot(un, f1, dx)
            diss += dt * kin
            jsrc += h * (q0 + q1) - dt * kin
            u[:] = un
            v[:] = vn
            if not (np.isfinite(kin) and np.isfinite(q1)):
                return diss, jsrc, k
            a0 = a1
            q0 = q1
    return diss, jsrc, -1
