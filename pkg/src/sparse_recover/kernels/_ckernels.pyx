# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: soft-thresholding and RIP subset enumeration.

Gram blocks are at most a few dozen columns wide, so spectral norms are
taken in place (Householder tridiagonalization plus Sturm bisection for
the two extreme eigenvalues) instead of calling LAPACK once per subset.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef int _count_below(const double* d, const double* e2, int n, double x) noexcept nogil:
    """Sturm count: eigenvalues of the tridiagonal (d, e) strictly below x."""
    cdef int i, cnt = 0
    cdef double q = d[0] - x
    if q < 0.0:
        cnt += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = d[i] - x - e2[i - 1] / q
        if q < 0.0:
            cnt += 1
    return cnt


cdef double _bisect(const double* d, const double* e2, int n, int k,
                    double lo, double hi, double tol) noexcept nogil:
    """k-th smallest eigenvalue (0-based) of the tridiagonal, inside [lo, hi]."""
    cdef double mid
    cdef int it
    for it in range(128):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid <= lo or mid >= hi:
            break
        if _count_below(d, e2, n, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


cdef double _sym_spectral_radius(double* a, int n, double* w) noexcept nogil:
    """Largest |eigenvalue| of the symmetric n x n matrix ``a`` (destroyed).

    Householder reduction to tridiagonal form, then Sturm bisection for the
    two extreme eigenvalues. ``w`` is scratch of length 4n.
    """
    cdef double* d = w
    cdef double* e2 = w + n
    cdef double* v = w + 2 * n
    cdef double* pw = w + 3 * n
    cdef int i, j, k, m
    cdef double alpha, nrm, kk, lo, hi, r, lmin, lmax
    if n == 1:
        return fabs(a[0])
    if n == 2:
        lo = 0.5 * (a[0] + a[3])
        hi = 0.5 * (a[0] - a[3])
        return fabs(lo) + sqrt(hi * hi + a[1] * a[1])
    for k in range(n - 2):
        m = n - k - 1
        nrm = 0.0
        for i in range(m):
            v[i] = a[(k + 1 + i) * n + k]
            nrm += v[i] * v[i]
        nrm = sqrt(nrm)
        alpha = -nrm if v[0] >= 0.0 else nrm
        d[k] = a[k * n + k]
        e2[k] = alpha * alpha
        if nrm == 0.0:
            continue
        v[0] -= alpha
        nrm = 0.0
        for i in range(m):
            nrm += v[i] * v[i]
        if nrm == 0.0:
            continue
        nrm = sqrt(nrm)
        for i in range(m):
            v[i] /= nrm
        # p = A v on the trailing block, then w = p - (v'p) v
        kk = 0.0
        for i in range(m):
            r = 0.0
            for j in range(m):
                r += a[(k + 1 + i) * n + k + 1 + j] * v[j]
            pw[i] = r
            kk += v[i] * r
        for i in range(m):
            pw[i] -= kk * v[i]
        for i in range(m):
            for j in range(m):
                a[(k + 1 + i) * n + k + 1 + j] -= 2.0 * (v[i] * pw[j] + pw[i] * v[j])
    d[n - 2] = a[(n - 2) * n + n - 2]
    d[n - 1] = a[(n - 1) * n + n - 1]
    r = a[(n - 1) * n + n - 2]
    e2[n - 2] = r * r
    # Gershgorin interval
    lo = d[0]
    hi = d[0]
    for i in range(n):
        r = 0.0
        if i > 0:
            r += sqrt(e2[i - 1])
        if i < n - 1:
            r += sqrt(e2[i])
        if d[i] - r < lo:
            lo = d[i] - r
        if d[i] + r > hi:
            hi = d[i] + r
    r = 1e-14 * (fabs(lo) + fabs(hi)) + 1e-300
    lo -= r
    hi += r
    # absolute resolution relative to the spectral scale is all the max needs
    r = 2.3e-16 * (fabs(lo) if fabs(lo) > fabs(hi) else fabs(hi))
    lmin = _bisect(d, e2, n, 0, lo, hi, r)
    lmax = _bisect(d, e2, n, n - 1, lo, hi, r)
    return fabs(lmin) if fabs(lmin) > fabs(lmax) else fabs(lmax)


cdef double _deviation(const double[:, ::1] G, const long* idx, int s, double* buf,
                       double floor) noexcept nogil:
    """||G_TT - I||_2, or -1 when the Frobenius bound shows it cannot exceed ``floor``."""
    cdef int i, j
    cdef double fro = 0.0
    for i in range(s):
        for j in range(s):
            buf[i * s + j] = G[idx[i], idx[j]]
        buf[i * s + i] -= 1.0
        for j in range(s):
            fro += buf[i * s + j] * buf[i * s + j]
    if fro <= floor * floor:
        return -1.0
    return _sym_spectral_radius(buf, s, buf + s * s)


cdef double _cross_norm(const double[:, ::1] G, const long* ia, const long* ib, int s,
                        double* blk, double* buf, double floor) noexcept nogil:
    """||G_{T,T'}||_2, or -1 when the Frobenius bound shows it cannot exceed ``floor``."""
    cdef int i, j, k
    cdef double acc, fro = 0.0
    if s == 1:
        return fabs(G[ia[0], ib[0]])
    for i in range(s):
        for j in range(s):
            acc = G[ia[i], ib[j]]
            blk[i * s + j] = acc
            fro += acc * acc
    if fro <= floor * floor:
        return -1.0
    # B^T B
    for i in range(s):
        for j in range(i, s):
            acc = 0.0
            for k in range(s):
                acc += blk[k * s + i] * blk[k * s + j]
            buf[i * s + j] = acc
            buf[j * s + i] = acc
    return sqrt(_sym_spectral_radius(buf, s, buf + s * s))


cdef bint _next_comb(long* c, int k, int n) noexcept nogil:
    """Advance ``c`` to the next k-combination of range(n) in lex order."""
    cdef int i = k - 1
    cdef int j
    while i >= 0 and c[i] == n - k + i:
        i -= 1
    if i < 0:
        return False
    c[i] += 1
    for j in range(i + 1, k):
        c[j] = c[j - 1] + 1
    return True


def soft_threshold(const double[::1] v, double thr):
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double x
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            x = v[i]
            if x > thr:
                o[i] = x - thr
            elif x < -thr:
                o[i] = x + thr
            else:
                o[i] = 0.0
    return out


def max_deviation_all(const double[:, ::1] G, int s):
    """Max of ||G_TT - I||_2 over every s-subset T, in lexicographic order."""
    cdef int d = G.shape[0]
    cdef long* c = <long*> malloc(s * sizeof(long))
    cdef double* buf = <double*> malloc((s * s + 4 * s) * sizeof(double))
    cdef double best = 0.0, val
    cdef long long count = 0
    cdef int i
    if c == NULL or buf == NULL:
        free(c)
        free(buf)
        raise MemoryError()
    try:
        with nogil:
            for i in range(s):
                c[i] = i
            while True:
                val = _deviation(G, c, s, buf, best)
                if val > best:
                    best = val
                count += 1
                if not _next_comb(c, s, d):
                    break
    finally:
        free(c)
        free(buf)
    return best, count


def max_deviation_subsets(const double[:, ::1] G, const long[:, ::1] idx):
    cdef Py_ssize_t n = idx.shape[0]
    cdef int s = idx.shape[1]
    cdef double* buf = <double*> malloc((s * s + 4 * s) * sizeof(double))
    cdef double best = 0.0, val
    cdef Py_ssize_t r
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                val = _deviation(G, &idx[r, 0], s, buf, best)
                if val > best:
                    best = val
    finally:
        free(buf)
    return best


def max_cross_all(const double[:, ::1] G, int s):
    """Max of ||G_{T,T'}||_2 over unordered disjoint pairs of s-subsets.

    A pair is visited once, with min(T) < min(T').
    """
    cdef int d = G.shape[0]
    cdef long* a = <long*> malloc(s * sizeof(long))
    cdef long* pos = <long*> malloc(s * sizeof(long))
    cdef long* b = <long*> malloc(s * sizeof(long))
    cdef long* avail = <long*> malloc(d * sizeof(long))
    cdef char* used = <char*> malloc(d * sizeof(char))
    cdef double* blk = <double*> malloc(s * s * sizeof(double))
    cdef double* buf = <double*> malloc((s * s + 4 * s) * sizeof(double))
    cdef double best = 0.0, val
    cdef long long count = 0
    cdef int i, j, navail
    if a == NULL or pos == NULL or b == NULL or avail == NULL or used == NULL or blk == NULL or buf == NULL:
        free(a); free(pos); free(b); free(avail); free(used); free(blk); free(buf)
        raise MemoryError()
    try:
        with nogil:
            for i in range(s):
                a[i] = i
            while True:
                for j in range(d):
                    used[j] = 0
                for i in range(s):
                    used[a[i]] = 1
                navail = 0
                for j in range(a[0] + 1, d):
                    if not used[j]:
                        avail[navail] = j
                        navail += 1
                if navail >= s:
                    for i in range(s):
                        pos[i] = i
                    while True:
                        for i in range(s):
                            b[i] = avail[pos[i]]
                        val = _cross_norm(G, a, b, s, blk, buf, best)
                        if val > best:
                            best = val
                        count += 1
                        if not _next_comb(pos, s, navail):
                            break
                if not _next_comb(a, s, d):
                    break
    finally:
        free(a); free(pos); free(b); free(avail); free(used); free(blk); free(buf)
    return best, count


def max_cross_pairs(const double[:, ::1] G, const long[:, ::1] ia, const long[:, ::1] ib):
    cdef Py_ssize_t n = ia.shape[0]
    cdef int s = ia.shape[1]
    cdef double* blk = <double*> malloc(s * s * sizeof(double))
    cdef double* buf = <double*> malloc((s * s + 4 * s) * sizeof(double))
    cdef double best = 0.0, val
    cdef Py_ssize_t r
    if blk == NULL or buf == NULL:
        free(blk); free(buf)
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                val = _cross_norm(G, &ia[r, 0], &ib[r, 0], s, blk, buf, best)
                if val > best:
                    best = val
    finally:
        free(blk); free(buf)
    return best
