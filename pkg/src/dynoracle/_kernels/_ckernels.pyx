# cython: language_level=3
"""Compiled kernels; same signatures and semantics as ``_pykernels``."""
import numpy as np

cimport cython
from libc.math cimport sqrt, fabs, copysign, isfinite, INFINITY

cdef enum:
    CONVERGED = 0
    MAX_ITERS = 1
    DIVERGED = 2


cdef inline void _matvec(const double[:, ::1] M, const double[::1] x, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(M.shape[0]):
        s = 0.0
        for j in range(M.shape[1]):
            s += M[i, j] * x[j]
        out[i] = s


cdef inline void _rmatvec(const double[:, ::1] M, const double[::1] y, double[::1] out) noexcept nogil:
    # out = M^T y
    cdef Py_ssize_t i, j
    for j in range(M.shape[1]):
        out[j] = 0.0
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            out[j] += M[i, j] * y[i]


cdef inline double _norm(const double[::1] v) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(v.shape[0]):
        s += v[i] * v[i]
    return sqrt(s)


def jacobi_eigvalsh(S, double tol=1e-12, int max_sweeps=100):
    cdef double[:, ::1] A = np.array(S, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double scale = 0.0, off, diag2, apq, theta, t, c, s, xp, xq
    if n == 0:
        return np.empty(0), 0
    with nogil:
        for p in range(n):
            for q in range(n):
                scale += A[p, q] * A[p, q]
    scale = sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        with nogil:
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off += A[p, q] * A[p, q]
        off = sqrt(off)
        if off <= tol * scale:
            return np.sort(np.array([A[i, i] for i in range(n)])), sweep
        if sweep == max_sweeps:
            break
        with nogil:
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    if apq == 0.0:
                        continue
                    theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        xp = A[i, p]
                        xq = A[i, q]
                        A[i, p] = c * xp - s * xq
                        A[i, q] = s * xp + c * xq
                    for i in range(n):
                        xp = A[p, i]
                        xq = A[q, i]
                        A[p, i] = c * xp - s * xq
                        A[q, i] = s * xp + c * xq
    return None, max_sweeps


def cholesky_lower(P):
    cdef double[:, ::1] Pm = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t n = Pm.shape[0]
    L_arr = np.zeros((n, n))
    cdef double[:, ::1] L = L_arr
    cdef Py_ssize_t i, j, k
    cdef double d, s, ljj
    cdef bint ok = True
    with nogil:
        for j in range(n):
            d = 0.0
            for k in range(j):
                d += L[j, k] * L[j, k]
            d = Pm[j, j] - d
            if not d > 0.0:
                ok = False
                break
            ljj = sqrt(d)
            L[j, j] = ljj
            for i in range(j + 1, n):
                s = 0.0
                for k in range(j):
                    s += L[i, k] * L[j, k]
                L[i, j] = (Pm[i, j] - s) / ljj
    return L_arr, bool(ok)


def pdgm_quadratic(Qf, qf, Qg, qg, A, double eta1, double eta2, x0, y0,
                   int max_iters, double tol, double div_limit):
    cdef const double[:, ::1] Qf_ = np.ascontiguousarray(Qf, dtype=np.float64)
    cdef const double[::1] qf_ = np.ascontiguousarray(qf, dtype=np.float64)
    cdef const double[:, ::1] Qg_ = np.ascontiguousarray(Qg, dtype=np.float64)
    cdef const double[::1] qg_ = np.ascontiguousarray(qg, dtype=np.float64)
    cdef const double[:, ::1] A_ = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t m = A_.shape[0], n = A_.shape[1], i
    X_arr = np.empty((max_iters + 1, n))
    Y_arr = np.empty((max_iters + 1, m))
    R_arr = np.empty(max_iters + 1)
    cdef double[:, ::1] X = X_arr
    cdef double[:, ::1] Y = Y_arr
    cdef double[::1] R = R_arr
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] y = np.array(y0, dtype=np.float64)
    cdef double[::1] gx = np.empty(n), tx = np.empty(n)
    cdef double[::1] gy = np.empty(m), ty = np.empty(m)
    cdef double res
    cdef int k = 0, status = MAX_ITERS
    with nogil:
        for k in range(max_iters + 1):
            _matvec(Qf_, x, gx)
            _rmatvec(A_, y, tx)
            for i in range(n):
                gx[i] = (gx[i] + qf_[i]) + tx[i]
            _matvec(A_, x, gy)
            _matvec(Qg_, y, ty)
            for i in range(m):
                gy[i] = gy[i] - (ty[i] + qg_[i])
            res = _norm(gx) + _norm(gy)
            for i in range(n):
                X[k, i] = x[i]
            for i in range(m):
                Y[k, i] = y[i]
            R[k] = res
            if res < tol:
                status = CONVERGED
                break
            if not isfinite(res) or _norm(x) + _norm(y) > div_limit:
                status = DIVERGED
                break
            if k == max_iters:
                break
            for i in range(n):
                x[i] = x[i] - eta1 * gx[i]
            for i in range(m):
                y[i] = y[i] + eta2 * gy[i]
    return X_arr[:k + 1], Y_arr[:k + 1], R_arr[:k + 1], status


def state_space_quadratic(Qf, qf, Qg, qg, A, double eta1, double c1, double c2,
                          double c3, double eta2, x0, xi1, xi2,
                          int max_iters, double tol, double div_limit):
    cdef const double[:, ::1] Qf_ = np.ascontiguousarray(Qf, dtype=np.float64)
    cdef const double[::1] qf_ = np.ascontiguousarray(qf, dtype=np.float64)
    cdef const double[:, ::1] Qg_ = np.ascontiguousarray(Qg, dtype=np.float64)
    cdef const double[::1] qg_ = np.ascontiguousarray(qg, dtype=np.float64)
    cdef const double[:, ::1] A_ = np.ascontiguousarray(A, dtype=np.float64)
    cdef Py_ssize_t m = A_.shape[0], n = A_.shape[1], i
    X_arr = np.empty((max_iters + 1, n))
    Y_arr = np.empty((max_iters + 1, m))
    R_arr = np.empty(max_iters + 1)
    cdef double[:, ::1] X = X_arr
    cdef double[:, ::1] Y = Y_arr
    cdef double[::1] R = R_arr
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    s1_arr = np.array(xi1, dtype=np.float64)
    s2_arr = np.array(xi2, dtype=np.float64)
    cdef double[::1] s1 = s1_arr
    cdef double[::1] s2 = s2_arr
    cdef double[::1] y = np.empty(m), v = np.empty(m), Ax = np.empty(m)
    cdef double[::1] gx = np.empty(n), tx = np.empty(n)
    cdef double[::1] gy = np.empty(m), ty = np.empty(m), gv = np.empty(m)
    cdef double res, old
    cdef int k = 0, status = MAX_ITERS
    with nogil:
        for k in range(max_iters + 1):
            for i in range(m):
                y[i] = (1.0 + c3) * s1[i] - c3 * s2[i]
                v[i] = (1.0 + c2) * s1[i] - c2 * s2[i]
            _matvec(A_, x, Ax)
            _matvec(Qf_, x, gx)
            _rmatvec(A_, y, tx)
            for i in range(n):
                gx[i] = (gx[i] + qf_[i]) + tx[i]
            _matvec(Qg_, y, ty)
            for i in range(m):
                gy[i] = Ax[i] - (ty[i] + qg_[i])
            res = _norm(gx) + _norm(gy)
            for i in range(n):
                X[k, i] = x[i]
            for i in range(m):
                Y[k, i] = y[i]
            R[k] = res
            if res < tol:
                status = CONVERGED
                break
            if not isfinite(res) or _norm(x) + _norm(y) > div_limit:
                status = DIVERGED
                break
            if k == max_iters:
                break
            _matvec(Qg_, v, gv)
            for i in range(m):
                gv[i] = (gv[i] + qg_[i]) - Ax[i]
            for i in range(n):
                x[i] = x[i] - eta1 * gx[i]
            for i in range(m):
                old = s1[i]
                s1[i] = (1.0 + c1) * s1[i] - c1 * s2[i] - eta2 * gv[i]
                s2[i] = old
    return X_arr[:k + 1], Y_arr[:k + 1], R_arr[:k + 1], status, s1_arr, s2_arr


cdef double _lmi_value(const double[:, :, ::1] Ms, double rho2, double p, double r) noexcept nogil:
    cdef Py_ssize_t i
    cdef double u = 1.0 - p, worst = -INFINITY
    cdef double a, b, c, d, pa, pb, pc, pd, s00, s01, s11, half, lam
    for i in range(Ms.shape[0]):
        a = Ms[i, 0, 0]
        b = Ms[i, 0, 1]
        c = Ms[i, 1, 0]
        d = Ms[i, 1, 1]
        pa = p * a + r * c
        pb = p * b + r * d
        pc = r * a + u * c
        pd = r * b + u * d
        s00 = a * pa + c * pc - rho2 * p
        s01 = a * pb + c * pd - rho2 * r
        s11 = b * pb + d * pd - rho2 * u
        half = 0.5 * (s00 - s11)
        lam = 0.5 * (s00 + s11) + sqrt(half * half + s01 * s01)
        if lam > worst:
            worst = lam
    return worst


cdef double _INVPHI = (sqrt(5.0) - 1.0) / 2.0


cdef double _inner(const double[:, :, ::1] Ms, double rho2, double p, int iters, double* r_out) noexcept nogil:
    cdef double w = sqrt(p * (1.0 - p)) if p * (1.0 - p) > 0.0 else 0.0
    cdef double a = -w, b = w, c, d, fc, fd
    cdef int it
    if w == 0.0:
        r_out[0] = 0.0
        return _lmi_value(Ms, rho2, p, 0.0)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = _lmi_value(Ms, rho2, p, c)
    fd = _lmi_value(Ms, rho2, p, d)
    for it in range(iters):
        if fc <= fd:
            b = d
            d = c
            fd = fc
            c = b - _INVPHI * (b - a)
            fc = _lmi_value(Ms, rho2, p, c)
        else:
            a = c
            c = d
            fc = fd
            d = a + _INVPHI * (b - a)
            fd = _lmi_value(Ms, rho2, p, d)
    if fc <= fd:
        r_out[0] = c
        return fc
    r_out[0] = d
    return fd


def lmi_min_margin(Ms, double rho, int iters=60):
    cdef const double[:, :, ::1] M_ = np.ascontiguousarray(np.asarray(Ms, dtype=np.float64).reshape(-1, 2, 2))
    cdef double rho2 = rho * rho
    cdef double a = 0.0, b = 1.0, c, d, fc, fd, rc, rd
    cdef int it
    with nogil:
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc = _inner(M_, rho2, c, iters, &rc)
        fd = _inner(M_, rho2, d, iters, &rd)
        for it in range(iters):
            if fc <= fd:
                b = d
                d = c
                fd = fc
                rd = rc
                c = b - _INVPHI * (b - a)
                fc = _inner(M_, rho2, c, iters, &rc)
            else:
                a = c
                c = d
                fc = fd
                rc = rd
                d = a + _INVPHI * (b - a)
                fd = _inner(M_, rho2, d, iters, &rd)
    if fc <= fd:
        return fc, c, rc
    return fd, d, rd
