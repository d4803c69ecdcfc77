"""Compiled inner loops.

Everything here is O(n^2) scalar work that would be dominated by interpreter
overhead in numpy.  Values carried through long recursions use a float64
mantissa plus an int64 binary exponent so that seeds far below the double
range (e.g. sin(beta)**m for m in the thousands) do not flush to zero.
"""

import math

import numpy as np
from numba import njit

_SHIFT = 256
_BIG = 2.0 ** _SHIFT
_SMALL = 2.0 ** -_SHIFT


@njit(cache=True, nogil=True)
def legendre_rows(n_max, x, s, keep_all):
    """Semi-normalized Q_n^m(x) by increasing degree at fixed order.

    ``s`` is sqrt(1 - x^2), passed separately so callers holding sin(beta)
    keep full relative accuracy near the poles.  Returns the rows for degrees
    ``n_max - 1`` and ``n_max`` (the first is empty when n_max == 0) and, if
    ``keep_all``, the whole triangle in row-major order n(n+1)/2 + m.
    """
    u_prev = np.zeros(n_max + 1)
    u_cur = np.zeros(n_max + 1)
    ex = np.zeros(n_max + 1, dtype=np.int64)
    if keep_all:
        tri = np.zeros((n_max + 1) * (n_max + 2) // 2)
    else:
        tri = np.zeros(0)

    u_cur[0] = 1.0
    diag_u = 1.0
    diag_e = 0
    if keep_all:
        tri[0] = 1.0
    last = np.zeros(1)
    last[0] = 1.0
    prev_row = np.zeros(0)

    for n in range(n_max):
        for m in range(n + 1):
            den = math.sqrt(float((n + 1 - m) * (n + 1 + m)))
            a = (2 * n + 1) * x / den
            b = math.sqrt(float((n - m) * (n + m))) / den
            v = a * u_cur[m] - b * u_prev[m]
            u_prev[m] = u_cur[m]
            u_cur[m] = v
            if abs(v) > _BIG:
                u_cur[m] *= _SMALL
                u_prev[m] *= _SMALL
                ex[m] += _SHIFT
        # new diagonal entry Q_{n+1}^{n+1}
        diag_u *= -math.sqrt((2.0 * n + 1.0) / (2.0 * n + 2.0)) * s
        mant, e = math.frexp(diag_u)
        diag_u = mant
        diag_e += e
        u_cur[n + 1] = diag_u
        u_prev[n + 1] = 0.0
        ex[n + 1] = diag_e
        if n == n_max - 1:
            prev_row = last
        last = np.empty(n + 2)
        for m in range(n + 2):
            last[m] = math.ldexp(u_cur[m], ex[m])
        if keep_all:
            off = (n + 1) * (n + 2) // 2
            for m in range(n + 2):
                tri[off + m] = last[m]
    return prev_row, last, tri


@njit(cache=True, nogil=True)
def legendre_degree(n, xs, ss):
    """Q_n^m(x_j) for m = 0..n at many abscissae, fixed degree ``n``.

    Downward three-term recursion in m (stable: the wanted solution grows as
    m decreases), normalized by the closed form of Q_n^n.  Output shape is
    (len(xs), n + 1).
    """
    npts = xs.shape[0]
    out = np.zeros((npts, n + 1))
    # |Q_n^n| = c_n s^n with c_n = prod sqrt((2k-1)/(2k)), no underflow in c_n
    log_c = 0.0
    for k in range(1, n + 1):
        log_c += 0.5 * math.log((2.0 * k - 1.0) / (2.0 * k))
    sign_n = -1.0 if n % 2 == 1 else 1.0
    mant = np.zeros(n + 1)
    exps = np.zeros(n + 1, dtype=np.int64)
    for j in range(npts):
        x = xs[j]
        s = ss[j]
        if s == 0.0:
            out[j, 0] = sign_n if x < 0.0 else 1.0
            continue
        ratio = x / s
        # scaled recursion, entry m is mant[m] * 2**exps[m] relative to Q_n^n
        u_hi = 0.0
        u = 1.0
        e_run = 0
        mant[n] = 1.0
        exps[n] = 0
        for m in range(n, 0, -1):
            num = 2.0 * m * ratio * u + math.sqrt(float((n + m + 1) * (n - m))) * u_hi
            v = -num / math.sqrt(float((n + m) * (n - m + 1)))
            u_hi = u
            u = v
            if abs(u) > _BIG:
                u *= _SMALL
                u_hi *= _SMALL
                e_run += _SHIFT
            mant[m - 1] = u
            exps[m - 1] = e_run
        log2_qnn = (log_c + n * math.log(s)) / math.log(2.0)
        k = math.floor(log2_qnn)
        frac = sign_n * 2.0 ** (log2_qnn - k)
        for m in range(n + 1):
            out[j, m] = math.ldexp(mant[m] * frac, exps[m] + int(k))
    return out


@njit(inline="always")
def _idx(mp, m):
    return m * m + m + mp


@njit(cache=True, nogil=True)
def sweep(n, data, d):
    """Fill layers m' = 2..n and m' = -1..-n of a degree-n triangle in place.

    ``data`` is indexed m*m + m + m' and must hold layers m' = 0 and 1.
    ``d[k + n + 1]`` is the recursion coefficient d_n^k, k = -n-1..n.
    """
    off = n + 1
    # forward: layer m'+1 from layers m' and m'-1
    for mp in range(1, n):
        dmp = d[mp + off]
        dm1 = d[mp - 1 + off]
        for m in range(mp + 1, n + 1):
            v = dm1 * data[_idx(mp - 1, m)] - d[m - 1 + off] * data[_idx(mp, m - 1)]
            if m < n:
                v += d[m + off] * data[_idx(mp, m + 1)]
            data[_idx(mp + 1, m)] = v / dmp
    # backward: layer m'-1 from layers m' and m'+1
    for mp in range(0, -n, -1):
        dlo = d[mp - 1 + off]
        dp = d[mp + off]
        for m in range(1 - mp, n + 1):
            v = dp * data[_idx(mp + 1, m)] + d[m - 1 + off] * data[_idx(mp, m - 1)]
            if m < n:
                v -= d[m + off] * data[_idx(mp, m + 1)]
            data[_idx(mp - 1, m)] = v / dlo


@njit(cache=True, nogil=True)
def expand_rows(n, data, mp_lo, mp_hi):
    """Dense rows m' = mp_lo..mp_hi (inclusive) of H_n, columns m = -n..n."""
    out = np.empty((mp_hi - mp_lo + 1, 2 * n + 1))
    for i in range(mp_hi - mp_lo + 1):
        mp = mp_lo + i
        for j in range(2 * n + 1):
            m = j - n
            if abs(m) >= abs(mp):
                a, b = (mp, m) if m >= 0 else (-mp, -m)
            else:
                a, b = (m, mp) if mp >= 0 else (-m, -mp)
            out[i, j] = data[b * b + b + a]
    return out
