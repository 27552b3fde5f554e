# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled exact hypervolume kernel (minimization, dimension sweep).

Mirrors _hv_py.hv_exact: recursion over the last objective, sweeping
slabs between consecutive coordinate values and recursing on the
dominance-filtered projections of the points seen so far.
"""

from libc.stdlib cimport free, malloc


cdef int _insert_filtered(double* active, Py_ssize_t m, double* p, int dd) noexcept:
    """Insert p into the active set, keeping it mutually non-dominated.

    Returns the new set size; order is not preserved (removals swap the
    last row in), the recursion re-sorts anyway.
    """
    cdef Py_ssize_t j = 0
    cdef int t, le_all, ge_all
    cdef double* q
    while j < m:
        q = active + j * dd
        le_all = 1
        ge_all = 1
        for t in range(dd):
            if q[t] > p[t]:
                le_all = 0
            if q[t] < p[t]:
                ge_all = 0
        if le_all:
            return <int> m  # an existing point dominates (or equals) p
        if ge_all:
            m -= 1
            for t in range(dd):
                active[j * dd + t] = active[m * dd + t]
            continue  # re-check the swapped-in row at slot j
        j += 1
    for t in range(dd):
        active[m * dd + t] = p[t]
    return <int> (m + 1)


cdef double _hv2(double* pts, Py_ssize_t n, double* ref) noexcept:
    # 2-D sweep: sort by first coordinate, accumulate improving strips.
    cdef Py_ssize_t* order = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef Py_ssize_t i, j
    cdef Py_ssize_t key
    if order == NULL:
        return -1.0
    for i in range(n):
        order[i] = i
    # insertion sort by x ascending (n stays small in practice)
    for i in range(1, n):
        key = order[i]
        j = i - 1
        while j >= 0 and pts[order[j] * 2] > pts[key * 2]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key
    cdef double best = ref[1]
    cdef double vol = 0.0
    cdef double x, y
    for i in range(n):
        x = pts[order[i] * 2]
        y = pts[order[i] * 2 + 1]
        if y < best:
            vol += (ref[0] - x) * (best - y)
            best = y
    free(order)
    return vol


cdef double _hv_rec(double* pts, Py_ssize_t n, int d, double* ref) noexcept:
    cdef Py_ssize_t i, j, m
    cdef Py_ssize_t key
    cdef int t
    cdef double lo, z, z_next, total
    if n == 0:
        return 0.0
    if d == 1:
        lo = pts[0]
        for i in range(1, n):
            if pts[i] < lo:
                lo = pts[i]
        return ref[0] - lo
    if d == 2:
        return _hv2(pts, n, ref)

    cdef Py_ssize_t* order = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef double* active = <double*> malloc(n * (d - 1) * sizeof(double))
    cdef double* proj = <double*> malloc((d - 1) * sizeof(double))
    if order == NULL or active == NULL or proj == NULL:
        free(order)
        free(active)
        free(proj)
        return -1.0
    for i in range(n):
        order[i] = i
    # insertion sort by last coordinate ascending
    for i in range(1, n):
        key = order[i]
        j = i - 1
        while j >= 0 and pts[order[j] * d + d - 1] > pts[key * d + d - 1]:
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = key

    total = 0.0
    m = 0
    for i in range(n):
        z = pts[order[i] * d + d - 1]
        if i + 1 < n:
            z_next = pts[order[i + 1] * d + d - 1]
        else:
            z_next = ref[d - 1]
        for t in range(d - 1):
            proj[t] = pts[order[i] * d + t]
        m = _insert_filtered(active, m, proj, d - 1)
        if z_next > z:
            total += (z_next - z) * _hv_rec(active, m, d - 1, ref)
    free(order)
    free(active)
    free(proj)
    return total


def hv_exact(points, ref):
    """Exact hypervolume of `points` against reference `ref`.

    points: sequence of length-d sequences, all componentwise <= ref.
    """
    cdef Py_ssize_t n = len(points)
    cdef int d = len(ref)
    cdef Py_ssize_t i
    cdef int t
    if n == 0:
        return 0.0
    cdef double* flat = <double*> malloc(n * d * sizeof(double))
    cdef double* refbuf = <double*> malloc(d * sizeof(double))
    if flat == NULL or refbuf == NULL:
        free(flat)
        free(refbuf)
        raise MemoryError()
    try:
        for t in range(d):
            refbuf[t] = ref[t]
        for i in range(n):
            row = points[i]
            for t in range(d):
                flat[i * d + t] = row[t]
        result = _hv_rec(flat, n, d, refbuf)
    finally:
        free(flat)
        free(refbuf)
    if result < 0.0:
        raise MemoryError()
    return result
