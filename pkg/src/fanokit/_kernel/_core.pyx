# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of fanokit._kernel.pure (same algorithms, C doubles)."""

from libc.math cimport ceil, exp, fabs, log2
from libc.stdlib cimport free, malloc

BACKEND = "compiled"

cdef double _SERIES_CUTOFF = 1e-20
cdef double _TAYLOR_CUTOFF = 1e-24
cdef double _EPS = 2.220446049250313e-16


cdef void _tri_matmul(double* a, double* b, double* out, int d) noexcept nogil:
    cdef int i, l, j
    cdef double s
    for i in range(d * d):
        out[i] = 0.0
    for i in range(d):
        for l in range(i, d):
            s = a[i * d + l]
            if s != 0.0:
                for j in range(l, d):
                    out[i * d + j] += s * b[l * d + j]


cdef int _expm_upper(double* a, double* e, int d, double* work1, double* work2) noexcept nogil:
    cdef int i, j, m
    cdef double mx, t, inv
    cdef double* term = work1
    cdef double* nxt = work2
    cdef double* tmp
    for i in range(d):
        for j in range(d):
            e[i * d + j] = 1.0 if i == j else 0.0
            term[i * d + j] = a[i * d + j]
    m = 1
    while True:
        mx = 0.0
        for i in range(d):
            for j in range(i, d):
                e[i * d + j] += term[i * d + j]
                t = fabs(term[i * d + j])
                if t > mx:
                    mx = t
        if mx < _TAYLOR_CUTOFF or m > 60:
            return m
        m += 1
        _tri_matmul(term, a, nxt, d)
        inv = 1.0 / m
        for i in range(d * d):
            nxt[i] *= inv
        tmp = term
        term = nxt
        nxt = tmp


def dd_exp_weighted(z, b, int k):
    """Corner entries [D_0..D_k] of the block node-matrix exponential; see pure twin."""
    cdef int n1 = len(z)
    cdef int d = n1 * (k + 1)
    cdef int i, p, q, j, off, terms
    cdef double mu = 0.0, spread = 0.0, bmax = 0.0, h, t
    cdef double* zz = <double*>malloc(n1 * sizeof(double))
    cdef double* bb = <double*>malloc(n1 * sizeof(double))
    cdef double* a = <double*>malloc(d * d * sizeof(double))
    cdef double* e = <double*>malloc(d * d * sizeof(double))
    cdef double* w1 = <double*>malloc(d * d * sizeof(double))
    cdef double* w2 = <double*>malloc(d * d * sizeof(double))
    try:
        for i in range(n1):
            zz[i] = z[i]
            bb[i] = b[i] if k else 0.0
        for i in range(n1):
            mu += zz[i]
        mu /= n1
        for i in range(n1):
            t = fabs(zz[i] - mu)
            if t > spread:
                spread = t
            if k and fabs(bb[i]) > bmax:
                bmax = fabs(bb[i])
        q = <int>ceil(log2((spread + 1.0 + bmax) / 0.5))
        if q < 0:
            q = 0
        h = 0.5 ** q
        for i in range(d * d):
            a[i] = 0.0
        for p in range(k + 1):
            off = p * n1
            for i in range(n1):
                a[(off + i) * d + off + i] = (zz[i] - mu) * h
                if i + 1 < n1:
                    a[(off + i) * d + off + i + 1] = h
                if p + 1 <= k:
                    a[(off + i) * d + off + n1 + i] = bb[i] * h
        terms = _expm_upper(a, e, d, w1, w2)
        for p in range(q):
            _tri_matmul(e, e, w1, d)
            for i in range(d * d):
                e[i] = w1[i]
        scale = exp(mu)
        corner = [e[0 * d + j * n1 + (n1 - 1)] * scale for j in range(k + 1)]
        err = (terms + q * d) * 4.0 * _EPS
        return corner, err
    finally:
        free(zz); free(bb); free(a); free(e); free(w1); free(w2)


def dd_exp(z):
    corner, err = dd_exp_weighted(z, None, 0)
    return corner[0], err


def dd_exp_series(z):
    cdef int n1 = len(z)
    cdef int n = n1 - 1
    cdef int i, j, maxj = 60, term_count
    cdef double mu = 0.0, coeff, total, term, x
    cdef double* hpoly = <double*>malloc((maxj + 1) * sizeof(double))
    try:
        for i in range(n1):
            mu += z[i]
        mu /= n1
        hpoly[0] = 1.0
        for j in range(1, maxj + 1):
            hpoly[j] = 0.0
        for i in range(n1):
            x = z[i] - mu
            for j in range(1, maxj + 1):
                hpoly[j] += x * hpoly[j - 1]
        coeff = 1.0
        for i in range(1, n + 1):
            coeff /= i
        total = coeff
        term_count = 1
        for j in range(1, maxj + 1):
            coeff /= n + j
            term = hpoly[j] * coeff
            total += term
            term_count += 1
            if j >= 2 and fabs(term) < _SERIES_CUTOFF * fabs(total):
                break
        err = term_count * (n1 + 1) * _EPS + 10.0 * _SERIES_CUTOFF
        return exp(mu) * total, err
    finally:
        free(hpoly)


def compensated_tree_sum(values):
    cdef int nvals = len(values)
    if nvals == 0:
        return 0.0
    cdef double* buf = <double*>malloc(nvals * sizeof(double))
    cdef int i
    try:
        for i in range(nvals):
            buf[i] = values[i]
        hi, lo = _reduce(buf, 0, nvals)
        return hi + lo
    finally:
        free(buf)


cdef (double, double) _reduce(double* v, int lo, int hi) noexcept nogil:
    cdef double h1, l1, h2, l2, s, bb, e, lo_part, hi_out, lo_out
    cdef int mid
    if hi - lo == 1:
        return v[lo], 0.0
    mid = (lo + hi) // 2
    h1, l1 = _reduce(v, lo, mid)
    h2, l2 = _reduce(v, mid, hi)
    s = h1 + h2
    bb = s - h1
    e = (h1 - (s - bb)) + (h2 - bb)
    lo_part = l1 + l2 + e
    hi_out = s + lo_part
    bb = hi_out - s
    lo_out = (s - (hi_out - bb)) + (lo_part - bb)
    return hi_out, lo_out
