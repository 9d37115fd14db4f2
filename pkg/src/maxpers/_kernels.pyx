# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled clique expansion and boundary-matrix reduction.

Mirrors ``_kernels_py``; see that module for the contracts.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t
from libcpp.vector cimport vector

cnp.import_array()


cdef inline Py_ssize_t _upper_start(const int64_t[::1] nbrs, Py_ssize_t lo, Py_ssize_t hi, int64_t x) nogil:
    # first position in nbrs[lo:hi] holding a value > x
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if nbrs[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _find(const int64_t[::1] nbrs, Py_ssize_t lo, Py_ssize_t end, int64_t x) nogil:
    # position of x in sorted nbrs[lo:end], or -1
    cdef Py_ssize_t hi = end, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if nbrs[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < end and nbrs[lo] == x:
        return lo
    return -1


def expand_cliques(const int64_t[:, ::1] cliques, const int64_t[::1] indptr,
                   const int64_t[::1] nbrs, const double[::1] ndist, const int64_t[::1] eid):
    cdef Py_ssize_t m = cliques.shape[0]
    cdef Py_ssize_t w = cliques.shape[1]
    cdef Py_ssize_t c, t, q, start, hi, pos, a, b
    cdef int64_t last, cand, v
    cdef double md
    cdef bint ok
    cdef vector[int64_t] out
    cdef vector[double] outd
    cdef vector[int64_t] outp
    cdef vector[int64_t] oute
    cdef vector[int64_t] rowe = vector[int64_t](w)
    with nogil:
        for c in range(m):
            last = cliques[c, w - 1]
            hi = indptr[last + 1]
            start = _upper_start(nbrs, indptr[last], hi, last)
            for t in range(start, hi):
                cand = nbrs[t]
                md = ndist[t]
                ok = True
                rowe[w - 1] = eid[t]
                for q in range(w - 1):
                    v = cliques[c, q]
                    a = indptr[v]
                    b = indptr[v + 1]
                    pos = _find(nbrs, a, b, cand)
                    if pos < 0:
                        ok = False
                        break
                    rowe[q] = eid[pos]
                    if ndist[pos] > md:
                        md = ndist[pos]
                if ok:
                    for q in range(w):
                        out.push_back(cliques[c, q])
                    out.push_back(cand)
                    outd.push_back(md)
                    outp.push_back(c)
                    for q in range(w):
                        oute.push_back(rowe[q])
    cdef Py_ssize_t k = outd.size()
    new = np.empty((k, w + 1), dtype=np.int64)
    dist = np.empty(k, dtype=np.float64)
    parent = np.empty(k, dtype=np.int64)
    edges = np.empty((k, w), dtype=np.int64)
    cdef int64_t[:, ::1] ev = edges
    cdef int64_t[:, ::1] nv = new
    cdef double[::1] dv = dist
    cdef int64_t[::1] pv = parent
    cdef Py_ssize_t i
    for i in range(k):
        dv[i] = outd[i]
        pv[i] = outp[i]
        for q in range(w):
            ev[i, q] = oute[i * w + q]
        for q in range(w + 1):
            nv[i, q] = out[i * (w + 1) + q]
    return new, dist, parent, edges


cdef inline void _symdiff(vector[int64_t]& a, vector[int64_t]& b, vector[int64_t]& out) nogil:
    cdef size_t i = 0, j = 0
    cdef size_t na = a.size(), nb = b.size()
    out.clear()
    while i < na and j < nb:
        if a[i] < b[j]:
            out.push_back(a[i])
            i += 1
        elif b[j] < a[i]:
            out.push_back(b[j])
            j += 1
        else:
            i += 1
            j += 1
    while i < na:
        out.push_back(a[i])
        i += 1
    while j < nb:
        out.push_back(b[j])
        j += 1


def reduce_twist(const int64_t[::1] indptr, const int64_t[::1] indices, const int64_t[::1] dims, int max_dim):
    cdef Py_ssize_t n = dims.shape[0]
    lows_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] lows = lows_arr
    cdef vector[char] cleared = vector[char](n, 0)
    cdef vector[vector[int64_t]] stored = vector[vector[int64_t]](n)
    cdef vector[int64_t] col
    cdef vector[int64_t] tmp
    cdef Py_ssize_t j, t
    cdef int64_t p, c
    cdef int dim
    with nogil:
        for dim in range(max_dim, 0, -1):
            for j in range(n):
                if dims[j] != dim or cleared[j]:
                    continue
                col.clear()
                for t in range(indptr[j], indptr[j + 1]):
                    col.push_back(indices[t])
                while col.size() > 0:
                    c = lows[col.back()]
                    if c < 0:
                        break
                    _symdiff(col, stored[c], tmp)
                    col.swap(tmp)
                if col.size() > 0:
                    p = col.back()
                    lows[p] = j
                    cleared[p] = 1
                    stored[j].swap(col)
    return lows_arr


cdef inline int _cmp_rows(const int64_t* a, const int64_t* b, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t q
    for q in range(w):
        if a[q] != b[q]:
            return -1 if a[q] < b[q] else 1
    return 0


def locate_rows(const int64_t[:, ::1] table, const int64_t[::1] first_ptr, const int64_t[:, ::1] query):
    cdef Py_ssize_t nq = query.shape[0]
    cdef Py_ssize_t w = query.shape[1]
    cdef Py_ssize_t i, lo, hi, mid, end
    cdef int64_t v
    out_arr = np.full(nq, -1, dtype=np.int64)
    if nq == 0 or table.shape[0] == 0:
        return out_arr
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t nv = first_ptr.shape[0] - 1
    cdef const int64_t* tp = &table[0, 0]
    cdef const int64_t* qp = &query[0, 0]
    cdef const int64_t* row
    with nogil:
        for i in range(nq):
            row = qp + i * w
            v = row[0]
            if v < 0 or v >= nv:
                continue
            lo = first_ptr[v]
            end = first_ptr[v + 1]
            hi = end
            while lo < hi:
                mid = (lo + hi) >> 1
                if _cmp_rows(tp + mid * w, row, w) < 0:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < end and _cmp_rows(tp + lo * w, row, w) == 0:
                out[i] = lo
    return out_arr


def antitranspose(const int64_t[::1] indptr, const int64_t[::1] indices, Py_ssize_t n):
    t_indptr_arr = np.zeros(n + 1, dtype=np.int64)
    t_indices_arr = np.empty(indices.shape[0], dtype=np.int64)
    cdef int64_t[::1] t_indptr = t_indptr_arr
    cdef int64_t[::1] t_indices = t_indices_arr
    cdef vector[int64_t] fill = vector[int64_t](n, 0)
    cdef Py_ssize_t e, c, col
    with nogil:
        for e in range(indices.shape[0]):
            t_indptr[n - indices[e]] += 1
        for c in range(n):
            t_indptr[c + 1] += t_indptr[c]
        c = n - 1
        while c >= 0:
            for e in range(indptr[c], indptr[c + 1]):
                col = n - 1 - indices[e]
                t_indices[t_indptr[col] + fill[col]] = n - 1 - c
                fill[col] += 1
            c -= 1
    return t_indptr_arr, t_indices_arr
