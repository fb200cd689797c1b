"""Pure-Python/NumPy implementation of the integration kernels.

Mirrors ``_kernels.pyx`` function for function; selected by
:mod:`cpbath.kernels` when the compiled module is unavailable.

Conventions shared with the compiled version:

* ``h`` is the N x N Hamiltonian (angular units) permuted so that the chart
  pivot is the last row/column; then ``xh = (x, 1)``.
* ``x`` is complex of length N-1 and is updated in place; so are the bath
  arrays ``q`` and ``p``.
* ``advance_*`` return ``(t, h_next, status, n_accepted)``; ``status`` is one
  of the ``ST_*`` codes below.
"""
import numpy as np

BACKEND = "python"

ST_DONE = 0
ST_CHART = 1
ST_UNDERFLOW = 2
ST_SINGULAR = 3
ST_MAXSTEPS = 4

SINGULAR_COND = 1e12

# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def isolated_rhs(h, x):
    """Hamilton's equations without bath, fixed chart."""
    m = x.size
    hx = h[:, :m] @ x + h[:, m]
    d = (np.vdot(x, hx[:m]) + hx[m]).real
    nrm = 1.0 + np.vdot(x, x).real
    g = (hx[:m] * nrm - d * x) / (nrm * nrm)
    return -1j * nrm * (g + x * np.vdot(x, g))


def cp_rhs(h, x, gammas, out):
    """Noise-averaged Markovian velocity; returns a status code.

    ``gammas`` all zero short-circuits to the isolated flow so the two
    paths are bitwise identical.
    """
    a = isolated_rhs(h, x)
    if not np.any(gammas):
        out[:] = a
        return ST_DONE
    nrm = 1.0 + np.vdot(x, x).real
    # velocity = a + b @ u with u_k = d|x^k|^2/dt
    w = 2.0 * x * gammas
    b = -1j * nrm * (np.diag(w) + np.outer(x, x.conj() * w))
    rhs = 2.0 * (x.conj() * a).real
    mat = 2.0 * (x.conj()[:, None] * b).real
    lin = np.eye(x.size) - mat
    if np.linalg.cond(lin) > SINGULAR_COND:
        return ST_SINGULAR
    u = np.linalg.solve(lin, rhs)
    out[:] = a + b @ u
    return ST_DONE


def bath_rhs(h, x, q, p, owner, c, inv_m, mw2, kappa, dx, dq, dp):
    """Coupled system + explicit oscillator velocities.

    ``owner[i]`` is the system coordinate oscillator ``i`` couples to,
    ``kappa[j] = sum_i c_i^2 / (m_i w_i^2)`` over that coordinate's
    oscillators (counterterm weight).
    """
    m = x.size
    s = np.bincount(owner, weights=c * q, minlength=m)
    r2 = (x * x.conj()).real
    f = -x * s + x * r2 * kappa
    nrm = 1.0 + r2.sum()
    hx = h[:, :m] @ x + h[:, m]
    d = (np.vdot(x, hx[:m]) + hx[m]).real
    g = (hx[:m] * nrm - d * x) / (nrm * nrm) + f
    dx[:] = -1j * nrm * (g + x * np.vdot(x, g))
    dq[:] = p * inv_m
    dp[:] = -mw2 * q + c * r2[owner]
    return ST_DONE


def _error_norm(err_parts, y0_parts, y1_parts, atol, rtol):
    total = 0.0
    count = 0
    for e, y0, y1 in zip(err_parts, y0_parts, y1_parts):
        sc = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
        total += np.sum((e / sc) ** 2)
        count += e.size
    return np.sqrt(total / count)


def _as_reals(v):
    return (v.real, v.imag) if np.iscomplexobj(v) else (v,)


def _dopri(f, ys, t, t_end, h, atol, rtol, h_max, max_steps, chart_limit):
    """Generic Dormand-Prince driver over a tuple of state arrays ``ys``.

    ``f(ys, outs)`` fills ``outs`` and returns a status.  The first array is
    the projective coordinate vector (used for the chart check).
    """
    if t >= t_end:
        return t, h, ST_DONE, 0
    k = [[np.empty_like(y) for y in ys] for _ in range(7)]
    st = f(ys, k[0])
    if st:
        return t, h, st, 0
    n_acc = 0
    h = min(h, h_max)
    while n_acc < max_steps:
        last = False
        h_try = h
        if t + h_try >= t_end:
            h_try = t_end - t
            last = True
        st = ST_DONE
        for s in range(1, 7):
            stage = [
                y + h_try * sum(a * kk[j] for a, kk in zip(_A[s], k) if a != 0.0)
                for j, y in enumerate(ys)
            ]
            st = f(stage, k[s])
            if st:
                break
        if st:
            # a failed trial stage only rejects the step
            h = 0.2 * h_try
            if h < 1e-14 * max(1.0, abs(t)):
                return t, h, st, n_acc
            continue
        y_new = stage  # stage 6 is the 5th order solution (FSAL)
        err = [h_try * sum(e * k[s][j] for s, e in enumerate(_E) if e != 0.0) for j in range(len(ys))]
        parts_e, parts_0, parts_1 = [], [], []
        for j in range(len(ys)):
            parts_e += _as_reals(err[j])
            parts_0 += _as_reals(ys[j])
            parts_1 += _as_reals(y_new[j])
        en = _error_norm(parts_e, parts_0, parts_1, atol, rtol)
        if not np.isfinite(en):
            en = 1e10
        if en <= 1.0:
            t = t_end if last else t + h_try
            for y, yn in zip(ys, y_new):
                y[...] = yn
            k[0], k[6] = k[6], k[0]
            n_acc += 1
            fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h_new = min(h_max, h_try * fac)
            if last:
                return t, max(h, h_new), ST_DONE, n_acc
            h = h_new
            if chart_limit > 0.0:
                x = ys[0]
                if 1.0 + np.vdot(x, x).real > chart_limit:
                    return t, h, ST_CHART, n_acc
        else:
            h = h_try * max(0.2, 0.9 * en ** -0.2)
        if h < 1e-14 * max(1.0, abs(t)):
            return t, h, ST_UNDERFLOW, n_acc
    return t, h, ST_MAXSTEPS, n_acc


def advance_cp(h, gammas, x, t, t_end, h_step, atol, rtol, h_max, chart_limit, max_steps):
    """Adaptive integration of the Markovian CP flow from ``t`` to ``t_end``."""
    gammas = np.asarray(gammas, dtype=float)

    def f(ys, outs):
        return cp_rhs(h, ys[0], gammas, outs[0])

    return _dopri(f, (x,), t, t_end, h_step, atol, rtol, h_max, max_steps, chart_limit)


def advance_bath(h, x, q, p, owner, c, inv_m, mw2, kappa, t, t_end, h_step, atol, rtol, h_max, max_steps):
    """Adaptive integration of system + explicit bath from ``t`` to ``t_end``."""

    def f(ys, outs):
        return bath_rhs(h, ys[0], ys[1], ys[2], owner, c, inv_m, mw2, kappa, outs[0], outs[1], outs[2])

    return _dopri(f, (x, q, p), t, t_end, h_step, atol, rtol, h_max, max_steps, 0.0)


def rk4_cp(h, gammas, x, t, t_end, dt, chart_limit):
    """Classical fixed-step RK4 from ``t`` to ``t_end`` (last step shortened)."""
    gammas = np.asarray(gammas, dtype=float)
    k1, k2, k3, k4 = (np.empty_like(x) for _ in range(4))
    n = 0
    while t < t_end:
        step = min(dt, t_end - t)
        for kk, (xs, fac) in zip(
            (k1, k2, k3, k4),
            ((x, 0.0), (None, 0.5), (None, 0.5), (None, 1.0)),
        ):
            if xs is None:
                xs = x + fac * step * prev
            st = cp_rhs(h, xs, gammas, kk)
            if st:
                return t, dt, st, n
            prev = kk
        x += step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_end if t + step >= t_end else t + step
        n += 1
        if chart_limit > 0.0 and 1.0 + np.vdot(x, x).real > chart_limit and t < t_end:
            return t, dt, ST_CHART, n
    return t, dt, ST_DONE, n
