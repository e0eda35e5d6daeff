"""Hot numeric kernels, each in a numba loop form and a vectorized numpy form.

The public names (``k01``, ``spinor_and_gradient``, ``fourier_sum``) point at
whichever backend :mod:`diracwidth._accel` selected. Both forms are always
importable under ``*_numba`` / ``*_numpy`` so they can be compared directly.
"""
import math

import numpy as np

from ._accel import njit, pick

EULER_GAMMA = 0.57721566490153286061
_SERIES_CUT = 2.0
_CF_EPS = 1e-16
_CF_MAXIT = 10_000


# ---------------------------------------------------------------------------
# modified Bessel functions K0, K1

@njit
def _k01_scalar(x):
    if x <= _SERIES_CUT:
        t = 0.25 * x * x
        lg = math.log(0.5 * x)
        # I0 and the harmonic-number sum for K0
        term0 = 1.0
        i0 = 1.0
        s0 = 0.0
        # I1/(x/2) and the digamma sum for K1
        term1 = 1.0
        i1 = 1.0
        harm = 0.0
        s1 = -2.0 * EULER_GAMMA + 1.0
        k = 0
        while True:
            k += 1
            harm += 1.0 / k
            term0 *= t / (k * k)
            i0 += term0
            s0 += term0 * harm
            term1 *= t / (k * (k + 1.0))
            i1 += term1
            s1 += term1 * (-2.0 * EULER_GAMMA + harm + harm + 1.0 / (k + 1.0))
            if term0 * (harm + 1.0) < 1e-18 * abs(s0 + i0) and term1 * (harm + 2.0) < 1e-18 * abs(s1):
                break
            if k > 200:
                break
        k0 = -(lg + EULER_GAMMA) * i0 + s0
        k1 = 1.0 / x + lg * (0.5 * x * i1) - 0.25 * x * s1
        return k0, k1
    # Steed's continued fraction with exponential prefactor (Temme's CF2).
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, _CF_MAXIT):
        a -= 2.0 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _CF_EPS:
            break
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


@njit
def _k01_loop(x):
    k0 = np.empty(x.shape[0])
    k1 = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        k0[i], k1[i] = _k01_scalar(x[i])
    return k0, k1


def k01_numba(x):
    return _k01_loop(np.ascontiguousarray(np.ravel(x), dtype=np.float64))


def k01_numpy(x):
    x = np.asarray(x, dtype=float).ravel()
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    lo = x <= _SERIES_CUT
    if lo.any():
        xs = x[lo]
        t = 0.25 * xs * xs
        lg = np.log(0.5 * xs)
        term0 = np.ones_like(xs)
        term1 = np.ones_like(xs)
        i0 = np.ones_like(xs)
        i1 = np.ones_like(xs)
        s0 = np.zeros_like(xs)
        s1 = np.full_like(xs, -2.0 * EULER_GAMMA + 1.0)
        harm = 0.0
        for k in range(1, 40):
            harm += 1.0 / k
            term0 = term0 * t / (k * k)
            i0 += term0
            s0 += term0 * harm
            term1 = term1 * t / (k * (k + 1.0))
            i1 += term1
            s1 += term1 * (-2.0 * EULER_GAMMA + 2.0 * harm + 1.0 / (k + 1.0))
        k0[lo] = -(lg + EULER_GAMMA) * i0 + s0
        k1[lo] = 1.0 / xs + lg * (0.5 * xs * i1) - 0.25 * xs * s1
    hi = ~lo
    if hi.any():
        xs = x[hi]
        b = 2.0 * (1.0 + xs)
        d = 1.0 / b
        h = d.copy()
        delh = d.copy()
        q1 = np.zeros_like(xs)
        q2 = np.ones_like(xs)
        a1 = 0.25
        q = np.full_like(xs, a1)
        c = a1
        a = -a1
        s = 1.0 + q * delh
        active = np.ones(xs.shape, dtype=bool)
        for i in range(1, _CF_MAXIT):
            a -= 2.0 * i
            c = -a * c / (i + 1.0)
            qnew = (q1 - b * q2) / a
            q1, q2 = q2, qnew
            q = q + c * qnew
            b = b + 2.0
            d = 1.0 / (b + a * d)
            delh = np.where(active, (b * d - 1.0) * delh, 0.0)
            h = h + delh
            dels = q * delh
            s = s + dels
            active &= np.abs(dels / s) >= _CF_EPS
            if not active.any():
                break
        h = a1 * h
        kk0 = np.sqrt(np.pi / (2.0 * xs)) * np.exp(-xs) / s
        k0[hi] = kk0
        k1[hi] = kk0 * (xs + 0.5 - h) / xs
    return k0, k1


k01 = pick(k01_numba, k01_numpy)


# ---------------------------------------------------------------------------
# positive-energy spinor and its momentum gradient

@njit
def spinor_and_gradient_numba(P, m):
    n = P.shape[0]
    u = np.zeros((n, 4), dtype=np.complex128)
    du = np.zeros((n, 3, 4), dtype=np.complex128)
    for i in range(n):
        p1 = P[i, 0]
        p2 = P[i, 1]
        p3 = P[i, 2]
        E = math.sqrt(p1 * p1 + p2 * p2 + p3 * p3 + m * m)
        c = 1.0 / math.sqrt(2.0 * E * (E + m))
        a = (E + m) * c
        g = -c * c * c * (2.0 * E + m) / E
        u[i, 0] = a
        u[i, 2] = p3 * c
        u[i, 3] = complex(p1 * c, -p2 * c)
        pj = (p1, p2, p3)
        for j in range(3):
            du[i, j, 0] = -m * pj[j] / (4.0 * a * E * E * E)
            v3 = p3 * pj[j] * g
            if j == 2:
                v3 += c
            du[i, j, 2] = v3
            re = p1 * pj[j] * g
            im = -p2 * pj[j] * g
            if j == 0:
                re += c
            elif j == 1:
                im -= c
            du[i, j, 3] = complex(re, im)
    return u, du


def spinor_and_gradient_numpy(P, m):
    P = np.asarray(P, dtype=float)
    p1, p2, p3 = P[:, 0], P[:, 1], P[:, 2]
    E = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3 + m * m)
    c = 1.0 / np.sqrt(2.0 * E * (E + m))
    a = (E + m) * c
    g = -c**3 * (2.0 * E + m) / E
    n = P.shape[0]
    u = np.zeros((n, 4), dtype=complex)
    u[:, 0] = a
    u[:, 2] = p3 * c
    u[:, 3] = (p1 - 1j * p2) * c
    du = np.zeros((n, 3, 4), dtype=complex)
    du[:, :, 0] = -m * P / (4.0 * a * E**3)[:, None]
    du[:, :, 2] = (p3 * g)[:, None] * P
    du[:, 2, 2] += c
    du[:, :, 3] = ((p1 - 1j * p2) * g)[:, None] * P
    du[:, 0, 3] += c
    du[:, 1, 3] -= 1j * c
    return u, du


def _spinor_and_gradient_numba(P, m):
    return spinor_and_gradient_numba(np.ascontiguousarray(P, dtype=np.float64), float(m))


spinor_and_gradient = pick(_spinor_and_gradient_numba, spinor_and_gradient_numpy)


# ---------------------------------------------------------------------------
# weighted plane-wave sums: out[j, c] = sum_k w_k A[k, c] exp(i P_k . X_j)

@njit
def fourier_sum_numba(P, W, A, X):
    nx = X.shape[0]
    nk = P.shape[0]
    nc = A.shape[1]
    out = np.zeros((nx, nc), dtype=np.complex128)
    for j in range(nx):
        x0 = X[j, 0]
        x1 = X[j, 1]
        x2 = X[j, 2]
        for k in range(nk):
            ph = P[k, 0] * x0 + P[k, 1] * x1 + P[k, 2] * x2
            e = W[k] * complex(math.cos(ph), math.sin(ph))
            for c in range(nc):
                out[j, c] += e * A[k, c]
    return out


def fourier_sum_numpy(P, W, A, X, chunk=200_000):
    P = np.asarray(P, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.zeros((X.shape[0], A.shape[1]), dtype=complex)
    for start in range(0, P.shape[0], chunk):
        sl = slice(start, start + chunk)
        phase = np.exp(1j * (X @ P[sl].T)) * W[sl][None, :]
        out += phase @ A[sl]
    return out


def _fourier_sum_numba(P, W, A, X):
    return fourier_sum_numba(
        np.ascontiguousarray(P, dtype=np.float64),
        np.ascontiguousarray(W, dtype=np.float64),
        np.ascontiguousarray(A, dtype=np.complex128),
        np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64),
    )


fourier_sum = pick(_fourier_sum_numba, fourier_sum_numpy)
