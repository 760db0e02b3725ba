# cython: boundscheck=False, wraparound=False, cdivision=True
"""In-place Walsh-Hadamard butterfly kernels (compiled hot path).

Natural (Hadamard) ordering, no normalization. Lengths must be powers
of two; the callers in ``fjlt.hadamard`` validate before dispatching.
"""


cpdef void fwht(double[::1] x):
    """Replace x by H x using the radix-2 butterfly, unit-stride inner loop."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double a, b
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
        h <<= 1


cpdef void fwht_batch(double[:, ::1] xs):
    """Transform every row of a C-contiguous 2-D array in place."""
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t r, h, i, j
    cdef double a, b
    for r in range(m):
        h = 1
        while h < n:
            for i in range(0, n, 2 * h):
                for j in range(i, i + h):
                    a = xs[r, j]
                    b = xs[r, j + h]
                    xs[r, j] = a + b
                    xs[r, j + h] = a - b
            h <<= 1
