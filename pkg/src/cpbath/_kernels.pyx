# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels (same contract as ``_kernels_py``).

State vectors are packed into one flat double buffer
``[Re x, Im x, q, p]`` so the Dormand-Prince loop is shared by the
Markovian and the explicit-bath models.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, isfinite
from libc.stdlib cimport malloc, calloc, free

cnp.import_array()

BACKEND = "cython"

ST_DONE = 0
ST_CHART = 1
ST_UNDERFLOW = 2
ST_SINGULAR = 3
ST_MAXSTEPS = 4

cdef enum:
    _DONE = 0
    _CHART = 1
    _UNDERFLOW = 2
    _SINGULAR = 3
    _MAXSTEPS = 4

SINGULAR_COND = 1e12
cdef double _SINGULAR_COND = 1e12

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784, A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40


cdef struct Model:
    int kind            # 0: Markovian CP, 1: explicit bath
    int m               # number of projective coordinates
    int n               # number of oscillators
    int any_gamma
    double *hr          # Hamiltonian, row-major, real part
    double *hi          # imaginary part
    double *gammas
    long *owner
    double *c
    double *inv_m
    double *mw2
    double *kappa
    # work space
    double *hxr
    double *hxi
    double *ar
    double *ai
    double *gr
    double *gi
    double *lin
    double *rhs
    double *s
    double *r2


cdef inline void _hx(Model *md, const double *y) noexcept nogil:
    cdef int m = md.m, N = m + 1, i, k
    cdef double sr, si, hr, hi, xr, xi
    for i in range(N):
        sr = md.hr[i * N + m]
        si = md.hi[i * N + m]
        for k in range(m):
            hr = md.hr[i * N + k]
            hi = md.hi[i * N + k]
            xr = y[k]
            xi = y[m + k]
            sr += hr * xr - hi * xi
            si += hr * xi + hi * xr
        md.hxr[i] = sr
        md.hxi[i] = si


cdef inline void _symplectic(int m, double nrm, const double *y, const double *gr, const double *gi,
                             double *outr, double *outi) noexcept nogil:
    # out = -i nrm (g + x (x^dagger g))
    cdef int k
    cdef double pr = 0.0, pi = 0.0, xr, xi, vr, vi
    for k in range(m):
        xr = y[k]
        xi = y[m + k]
        pr += xr * gr[k] + xi * gi[k]
        pi += xr * gi[k] - xi * gr[k]
    for k in range(m):
        xr = y[k]
        xi = y[m + k]
        vr = gr[k] + xr * pr - xi * pi
        vi = gi[k] + xr * pi + xi * pr
        outr[k] = nrm * vi
        outi[k] = -nrm * vr


cdef inline double _energy_gradient(Model *md, const double *y, double *nrm_out) noexcept nogil:
    """Fill md.gr/md.gi with d(energy)/d(conj x); return nrm."""
    cdef int m = md.m, k
    cdef double nrm = 1.0, d, xr, xi
    _hx(md, y)
    d = md.hxr[m]
    for k in range(m):
        xr = y[k]
        xi = y[m + k]
        nrm += xr * xr + xi * xi
        d += xr * md.hxr[k] + xi * md.hxi[k]
    for k in range(m):
        md.gr[k] = (md.hxr[k] * nrm - d * y[k]) / (nrm * nrm)
        md.gi[k] = (md.hxi[k] * nrm - d * y[m + k]) / (nrm * nrm)
    nrm_out[0] = nrm
    return d


cdef int _solve(int m, double *a, double *b) noexcept nogil:
    # Gaussian elimination with partial pivoting, in place; b <- a^-1 b.
    cdef int i, j, k, piv
    cdef double big, tmp, f, dmax = 0.0, dmin = 1e308
    for k in range(m):
        piv = k
        big = fabs(a[k * m + k])
        for i in range(k + 1, m):
            if fabs(a[i * m + k]) > big:
                big = fabs(a[i * m + k])
                piv = i
        if big == 0.0:
            return _SINGULAR
        if piv != k:
            for j in range(m):
                tmp = a[k * m + j]
                a[k * m + j] = a[piv * m + j]
                a[piv * m + j] = tmp
            tmp = b[k]
            b[k] = b[piv]
            b[piv] = tmp
        if big > dmax:
            dmax = big
        if big < dmin:
            dmin = big
        for i in range(k + 1, m):
            f = a[i * m + k] / a[k * m + k]
            if f != 0.0:
                for j in range(k, m):
                    a[i * m + j] -= f * a[k * m + j]
                b[i] -= f * b[k]
    if dmax / dmin > _SINGULAR_COND:
        return _SINGULAR
    for i in range(m - 1, -1, -1):
        tmp = b[i]
        for j in range(i + 1, m):
            tmp -= a[i * m + j] * b[j]
        b[i] = tmp / a[i * m + i]
    return _DONE


cdef int _cp_rhs(Model *md, const double *y, double *dy) noexcept nogil:
    cdef int m = md.m, j, k
    cdef double nrm, xr, xi, wr, wi, cr, ci, br, bi, vr, vi
    _energy_gradient(md, y, &nrm)
    _symplectic(m, nrm, y, md.gr, md.gi, md.ar, md.ai)
    if not md.any_gamma:
        for k in range(m):
            dy[k] = md.ar[k]
            dy[m + k] = md.ai[k]
        return _DONE
    # velocity = a + B u,  B_kj = -i nrm (delta_kj + x_k conj(x_j)) w_j,  w_j = 2 gamma_j x_j
    for k in range(m):
        xr = y[k]
        xi = y[m + k]
        md.rhs[k] = 2.0 * (xr * md.ar[k] + xi * md.ai[k])
    for k in range(m):
        for j in range(m):
            wr = 2.0 * md.gammas[j] * y[j]
            wi = 2.0 * md.gammas[j] * y[m + j]
            # c = delta_kj + x_k conj(x_j)
            cr = y[k] * y[j] + y[m + k] * y[m + j]
            ci = y[m + k] * y[j] - y[k] * y[m + j]
            if k == j:
                cr += 1.0
            vr = cr * wr - ci * wi
            vi = cr * wi + ci * wr
            br = nrm * vi
            bi = -nrm * vr
            md.lin[k * m + j] = -2.0 * (y[k] * br + y[m + k] * bi)
            if k == j:
                md.lin[k * m + j] += 1.0
    if _solve(m, md.lin, md.rhs):
        return _SINGULAR
    # back-substitute: F_j = w_j u_j, dy = a - i nrm (F + x (x^dagger F))
    for j in range(m):
        md.s[j] = 2.0 * md.gammas[j] * md.rhs[j]
        md.gr[j] = md.s[j] * y[j]
        md.gi[j] = md.s[j] * y[m + j]
    _symplectic(m, nrm, y, md.gr, md.gi, dy, dy + m)
    for k in range(m):
        dy[k] += md.ar[k]
        dy[m + k] += md.ai[k]
    return _DONE


cdef int _bath_rhs(Model *md, const double *y, double *dy) noexcept nogil:
    cdef int m = md.m, n = md.n, i, j, k
    cdef const double *q = y + 2 * m
    cdef const double *p = y + 2 * m + n
    cdef double nrm, xr, xi, f
    for j in range(m):
        md.s[j] = 0.0
        md.r2[j] = y[j] * y[j] + y[m + j] * y[m + j]
    for i in range(n):
        md.s[md.owner[i]] += md.c[i] * q[i]
    _energy_gradient(md, y, &nrm)
    for j in range(m):
        f = -md.s[j] + md.r2[j] * md.kappa[j]
        md.gr[j] += y[j] * f
        md.gi[j] += y[m + j] * f
    _symplectic(m, nrm, y, md.gr, md.gi, dy, dy + m)
    for i in range(n):
        dy[2 * m + i] = p[i] * md.inv_m[i]
        dy[2 * m + n + i] = -md.mw2[i] * q[i] + md.c[i] * md.r2[md.owner[i]]
    return _DONE


cdef inline int _rhs(Model *md, const double *y, double *dy) noexcept nogil:
    if md.kind == 0:
        return _cp_rhs(md, y, dy)
    return _bath_rhs(md, y, dy)


cdef int _stages(Model *md, int dim, const double *y, double h, double *k1, double *k2, double *k3,
                 double *k4, double *k5, double *k6, double *k7, double *yt, double *yn) noexcept nogil:
    cdef int i, st
    for i in range(dim):
        yt[i] = y[i] + h * A21 * k1[i]
    st = _rhs(md, yt, k2)
    if st:
        return st
    for i in range(dim):
        yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    st = _rhs(md, yt, k3)
    if st:
        return st
    for i in range(dim):
        yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    st = _rhs(md, yt, k4)
    if st:
        return st
    for i in range(dim):
        yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    st = _rhs(md, yt, k5)
    if st:
        return st
    for i in range(dim):
        yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    st = _rhs(md, yt, k6)
    if st:
        return st
    for i in range(dim):
        yn[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
    return _rhs(md, yn, k7)


cdef int _dopri(Model *md, int dim, double *y, double *t_io, double t_end, double *h_io,
                double atol, double rtol, double h_max, double chart_limit, long max_steps,
                long *n_out) noexcept nogil:
    cdef double *buf = <double *> malloc(9 * dim * sizeof(double))
    if buf == NULL:
        return -1
    cdef double *k1 = buf
    cdef double *k2 = buf + dim
    cdef double *k3 = buf + 2 * dim
    cdef double *k4 = buf + 3 * dim
    cdef double *k5 = buf + 4 * dim
    cdef double *k6 = buf + 5 * dim
    cdef double *k7 = buf + 6 * dim
    cdef double *yt = buf + 7 * dim
    cdef double *yn = buf + 8 * dim
    cdef double *tmp
    cdef double t = t_io[0], h = h_io[0], h_try, h_new, en, sc, e, a0, a1, fac, nrm
    cdef int last, st, i
    cdef int m = md.m
    cdef long n_acc = 0
    n_out[0] = 0
    if t >= t_end:
        free(buf)
        return _DONE
    st = _rhs(md, y, k1)
    if st:
        free(buf)
        return st
    if h > h_max:
        h = h_max
    st = _MAXSTEPS
    while n_acc < max_steps:
        last = 0
        h_try = h
        if t + h_try >= t_end:
            h_try = t_end - t
            last = 1
        st = _stages(md, dim, y, h_try, k1, k2, k3, k4, k5, k6, k7, yt, yn)
        if st:
            # a failed trial stage only rejects the step
            h = 0.2 * h_try
            if h < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                break
            continue
        en = 0.0
        for i in range(dim):
            e = h_try * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            a0 = fabs(y[i])
            a1 = fabs(yn[i])
            sc = atol + rtol * (a0 if a0 > a1 else a1)
            en += (e / sc) * (e / sc)
        en = sqrt(en / dim)
        if not isfinite(en):
            en = 1e10
        if en <= 1.0:
            t = t_end if last else t + h_try
            for i in range(dim):
                y[i] = yn[i]
            tmp = k1
            k1 = k7
            k7 = tmp
            n_acc += 1
            if en == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * pow(en, -0.2)
                if fac > 5.0:
                    fac = 5.0
                if fac < 0.2:
                    fac = 0.2
            h_new = h_try * fac
            if h_new > h_max:
                h_new = h_max
            if last:
                h = h if h > h_new else h_new
                st = _DONE
                break
            h = h_new
            if chart_limit > 0.0:
                nrm = 1.0
                for i in range(m):
                    nrm += y[i] * y[i] + y[m + i] * y[m + i]
                if nrm > chart_limit:
                    st = _CHART
                    break
        else:
            fac = 0.9 * pow(en, -0.2)
            if fac < 0.2:
                fac = 0.2
            h = h_try * fac
        if h < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
            st = _UNDERFLOW
            break
        st = _MAXSTEPS
    free(buf)
    t_io[0] = t
    h_io[0] = h
    n_out[0] = n_acc
    return st


cdef class _ModelHolder:
    """Owns the numpy buffers a Model points into."""
    cdef Model md
    cdef object keep
    cdef double *work

    def __cinit__(self):
        self.work = NULL

    def __dealloc__(self):
        if self.work != NULL:
            free(self.work)

    cdef void setup(self, object h, object gammas, object owner, object c, object inv_m, object mw2,
                    object kappa, int kind, int n) except *:
        cdef int N = h.shape[0]
        cdef int m = N - 1
        cdef cnp.ndarray[double, ndim=1] hr = np.ascontiguousarray(np.real(h), dtype=np.float64).ravel()
        cdef cnp.ndarray[double, ndim=1] hi = np.ascontiguousarray(np.imag(h), dtype=np.float64).ravel()
        cdef cnp.ndarray[double, ndim=1] g = np.ascontiguousarray(
            np.zeros(m) if gammas is None else gammas, dtype=np.float64)
        cdef cnp.ndarray[long, ndim=1] ow = np.ascontiguousarray(
            np.zeros(1, dtype=np.int64) if owner is None else owner, dtype=np.int64)
        cdef cnp.ndarray[double, ndim=1] cc = np.ascontiguousarray(np.zeros(1) if c is None else c, dtype=np.float64)
        cdef cnp.ndarray[double, ndim=1] im = np.ascontiguousarray(np.zeros(1) if inv_m is None else inv_m, dtype=np.float64)
        cdef cnp.ndarray[double, ndim=1] w2 = np.ascontiguousarray(np.zeros(1) if mw2 is None else mw2, dtype=np.float64)
        cdef cnp.ndarray[double, ndim=1] kp = np.ascontiguousarray(np.zeros(m) if kappa is None else kappa, dtype=np.float64)
        self.keep = (hr, hi, g, ow, cc, im, w2, kp)
        self.md.kind = kind
        self.md.m = m
        self.md.n = n
        self.md.any_gamma = 1 if np.any(g != 0.0) else 0
        self.md.hr = &hr[0]
        self.md.hi = &hi[0]
        self.md.gammas = &g[0]
        self.md.owner = &ow[0]
        self.md.c = &cc[0]
        self.md.inv_m = &im[0]
        self.md.mw2 = &w2[0]
        self.md.kappa = &kp[0]
        self.work = <double *> calloc(2 * N + 8 * m + m * m + 1, sizeof(double))
        if self.work == NULL:
            raise MemoryError()
        self.md.hxr = self.work
        self.md.hxi = self.work + N
        self.md.ar = self.work + 2 * N
        self.md.ai = self.work + 2 * N + m
        self.md.gr = self.work + 2 * N + 2 * m
        self.md.gi = self.work + 2 * N + 3 * m
        self.md.rhs = self.work + 2 * N + 4 * m
        self.md.s = self.work + 2 * N + 5 * m
        self.md.r2 = self.work + 2 * N + 6 * m
        self.md.lin = self.work + 2 * N + 7 * m


def _pack(x, *reals):
    return np.concatenate([np.real(x), np.imag(x)] + [np.asarray(r, dtype=np.float64) for r in reals])


def _unpack_x(cnp.ndarray[double, ndim=1] y, x):
    m = x.shape[0]
    x[:] = y[:m] + 1j * y[m:2 * m]


def isolated_rhs(h, x):
    out = np.empty(x.shape[0], dtype=complex)
    cp_rhs(h, x, np.zeros(x.shape[0]), out)
    return out


def cp_rhs(h, x, gammas, out):
    cdef _ModelHolder mh = _ModelHolder()
    mh.setup(h, gammas, None, None, None, None, None, 0, 0)
    cdef cnp.ndarray[double, ndim=1] y = _pack(x)
    cdef cnp.ndarray[double, ndim=1] dy = np.empty_like(y)
    cdef int st = _cp_rhs(&mh.md, &y[0], &dy[0])
    if st == _DONE:
        _unpack_x(dy, out)
    return st


def bath_rhs(h, x, q, p, owner, c, inv_m, mw2, kappa, dx, dq, dp):
    cdef int n = q.shape[0]
    cdef int m = x.shape[0]
    cdef _ModelHolder mh = _ModelHolder()
    mh.setup(h, None, owner, c, inv_m, mw2, kappa, 1, n)
    cdef cnp.ndarray[double, ndim=1] y = _pack(x, q, p)
    cdef cnp.ndarray[double, ndim=1] dy = np.empty_like(y)
    cdef int st = _bath_rhs(&mh.md, &y[0], &dy[0])
    _unpack_x(dy, dx)
    dq[:] = dy[2 * m:2 * m + n]
    dp[:] = dy[2 * m + n:]
    return st


def advance_cp(h, gammas, x, double t, double t_end, double h_step, double atol, double rtol,
               double h_max, double chart_limit, long max_steps):
    cdef _ModelHolder mh = _ModelHolder()
    mh.setup(h, gammas, None, None, None, None, None, 0, 0)
    cdef cnp.ndarray[double, ndim=1] y = _pack(x)
    cdef long n_acc = 0
    cdef int st
    with nogil:
        st = _dopri(&mh.md, y.shape[0], &y[0], &t, t_end, &h_step, atol, rtol, h_max, chart_limit,
                    max_steps, &n_acc)
    if st < 0:
        raise MemoryError()
    _unpack_x(y, x)
    return t, h_step, st, n_acc


def advance_bath(h, x, q, p, owner, c, inv_m, mw2, kappa, double t, double t_end, double h_step,
                 double atol, double rtol, double h_max, long max_steps):
    cdef int n = q.shape[0]
    cdef int m = x.shape[0]
    cdef _ModelHolder mh = _ModelHolder()
    mh.setup(h, None, owner, c, inv_m, mw2, kappa, 1, n)
    cdef cnp.ndarray[double, ndim=1] y = _pack(x, q, p)
    cdef long n_acc = 0
    cdef int st
    with nogil:
        st = _dopri(&mh.md, y.shape[0], &y[0], &t, t_end, &h_step, atol, rtol, h_max, 0.0,
                    max_steps, &n_acc)
    if st < 0:
        raise MemoryError()
    _unpack_x(y, x)
    q[:] = y[2 * m:2 * m + n]
    p[:] = y[2 * m + n:]
    return t, h_step, st, n_acc


def rk4_cp(h, gammas, x, double t, double t_end, double dt, double chart_limit):
    cdef _ModelHolder mh = _ModelHolder()
    mh.setup(h, gammas, None, None, None, None, None, 0, 0)
    cdef cnp.ndarray[double, ndim=1] y = _pack(x)
    cdef int dim = y.shape[0], i, st = _DONE, m = x.shape[0]
    cdef cnp.ndarray[double, ndim=2] k = np.empty((5, dim))
    cdef double step, nrm
    cdef long n = 0
    while t < t_end:
        step = dt if dt < t_end - t else t_end - t
        st = _cp_rhs(&mh.md, &y[0], &k[0, 0])
        if st:
            break
        for i in range(dim):
            k[4, i] = y[i] + 0.5 * step * k[0, i]
        st = _cp_rhs(&mh.md, &k[4, 0], &k[1, 0])
        if st:
            break
        for i in range(dim):
            k[4, i] = y[i] + 0.5 * step * k[1, i]
        st = _cp_rhs(&mh.md, &k[4, 0], &k[2, 0])
        if st:
            break
        for i in range(dim):
            k[4, i] = y[i] + step * k[2, i]
        st = _cp_rhs(&mh.md, &k[4, 0], &k[3, 0])
        if st:
            break
        for i in range(dim):
            y[i] += step / 6.0 * (k[0, i] + 2.0 * k[1, i] + 2.0 * k[2, i] + k[3, i])
        t = t_end if t + step >= t_end else t + step
        n += 1
        if chart_limit > 0.0 and t < t_end:
            nrm = 1.0
            for i in range(m):
                nrm += y[i] * y[i] + y[m + i] * y[m + i]
            if nrm > chart_limit:
                st = _CHART
                break
    _unpack_x(y, x)
    return t, dt, st, n
