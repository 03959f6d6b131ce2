"""Pure numpy implementation of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Results agree across backends to rounding; within one backend the PDGM and
state-space loops are bit-identical when the oracle reduces to gradient
descent.
"""
import math

import numpy as np

CONVERGED = 0
MAX_ITERS = 1
DIVERGED = 2


def jacobi_eigvalsh(S, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, sweeps)`` with eigenvalues in ascending order,
    or ``(None, sweeps)`` if the off-diagonal mass did not fall below
    ``tol * ||S||_F`` within ``max_sweeps``.
    """
    A = np.array(S, dtype=np.float64, copy=True)
    n = A.shape[0]
    if n == 0:
        return np.empty(0), 0
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), 0
    thresh = tol * scale
    for sweep in range(max_sweeps + 1):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= thresh:
            return np.sort(np.diag(A).copy()), sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q]
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :]
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
    return None, max_sweeps


def cholesky_lower(P):
    """Lower Cholesky factor of ``P``; returns ``(L, ok)``.

    ``ok`` is False as soon as a non-positive pivot appears, in which case
    ``L`` is only partially filled.
    """
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        d = P[j, j] - float(L[j, :j] @ L[j, :j])
        if not d > 0.0:
            return L, False
        ljj = math.sqrt(d)
        L[j, j] = ljj
        if j + 1 < n:
            L[j + 1:, j] = (P[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / ljj
    return L, True


def pdgm_quadratic(Qf, qf, Qg, qg, A, eta1, eta2, x0, y0, max_iters, tol, div_limit):
    """Simultaneous gradient descent-ascent on quadratic data.

    Returns ``(X, Y, R, status)``: iterates, saddle residuals and the
    terminal status code.
    """
    n = A.shape[1]
    m = A.shape[0]
    X = np.empty((max_iters + 1, n))
    Y = np.empty((max_iters + 1, m))
    R = np.empty(max_iters + 1)
    AT = A.T
    x = np.array(x0, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    status = MAX_ITERS
    k = 0
    for k in range(max_iters + 1):
        gx = Qf @ x + qf + AT @ y
        gy = A @ x - (Qg @ y + qg)
        res = np.linalg.norm(gx) + np.linalg.norm(gy)
        X[k] = x
        Y[k] = y
        R[k] = res
        if res < tol:
            status = CONVERGED
            break
        if not math.isfinite(res) or np.linalg.norm(x) + np.linalg.norm(y) > div_limit:
            status = DIVERGED
            break
        if k == max_iters:
            break
        x = x - eta1 * gx
        y = y + eta2 * gy
    return X[:k + 1], Y[:k + 1], R[:k + 1], status


def state_space_quadratic(Qf, qf, Qg, qg, A, eta1, c1, c2, c3, eta2, x0, xi1, xi2,
                          max_iters, tol, div_limit):
    """Primal gradient loop fed by the two-state first-order oracle.

    The x-update reads the oracle output ``y^k`` and the oracle consumes
    ``x^k``, so both updates start from the same iterate.
    Returns ``(X, Y, R, status, xi1, xi2)``.
    """
    n = A.shape[1]
    m = A.shape[0]
    X = np.empty((max_iters + 1, n))
    Y = np.empty((max_iters + 1, m))
    R = np.empty(max_iters + 1)
    AT = A.T
    x = np.array(x0, dtype=np.float64)
    s1 = np.array(xi1, dtype=np.float64)
    s2 = np.array(xi2, dtype=np.float64)
    status = MAX_ITERS
    k = 0
    for k in range(max_iters + 1):
        y = (1.0 + c3) * s1 - c3 * s2
        v = (1.0 + c2) * s1 - c2 * s2
        Ax = A @ x
        gx = Qf @ x + qf + AT @ y
        gy = Ax - (Qg @ y + qg)
        res = np.linalg.norm(gx) + np.linalg.norm(gy)
        X[k] = x
        Y[k] = y
        R[k] = res
        if res < tol:
            status = CONVERGED
            break
        if not math.isfinite(res) or np.linalg.norm(x) + np.linalg.norm(y) > div_limit:
            status = DIVERGED
            break
        if k == max_iters:
            break
        gv = (Qg @ v + qg) - Ax
        x = x - eta1 * gx
        s1, s2 = (1.0 + c1) * s1 - c1 * s2 - eta2 * gv, s1
    return X[:k + 1], Y[:k + 1], R[:k + 1], status, s1, s2


def _lmi_value(Ms, rho2, p, r):
    # max_i lambda_max(M_i^T P M_i - rho^2 P), P = [[p, r], [r, 1 - p]]
    u = 1.0 - p
    worst = -math.inf
    for M in Ms:
        a, b = M[0]
        c, d = M[1]
        # P M
        pa = p * a + r * c
        pb = p * b + r * d
        pc = r * a + u * c
        pd = r * b + u * d
        s00 = a * pa + c * pc - rho2 * p
        s01 = a * pb + c * pd - rho2 * r
        s11 = b * pb + d * pd - rho2 * u
        half = 0.5 * (s00 - s11)
        lam = 0.5 * (s00 + s11) + math.sqrt(half * half + s01 * s01)
        if lam > worst:
            worst = lam
    return worst


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, a, b, iters):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def lmi_min_margin(Ms, rho, iters=60):
    """Minimise ``max_i lambda_max(M_i^T P M_i - rho^2 P)`` over trace-one 2x2 P >= 0.

    The objective is convex in P, so nested golden-section search on
    ``p = P[0, 0]`` and ``r = P[0, 1]`` finds the global minimum. Returns
    ``(value, p, r)``; a negative value certifies ``||M_i||_P < rho``.
    """
    Ms = [np.asarray(M, dtype=np.float64).tolist() for M in Ms]
    rho2 = rho * rho

    def inner(p):
        w = math.sqrt(max(p * (1.0 - p), 0.0))
        if w == 0.0:
            return 0.0, _lmi_value(Ms, rho2, p, 0.0)
        return _golden(lambda r: _lmi_value(Ms, rho2, p, r), -w, w, iters)

    best = {}

    def outer(p):
        r, val = inner(p)
        best[p] = r
        return val

    p, val = _golden(outer, 0.0, 1.0, iters)
    return val, p, best[p]
