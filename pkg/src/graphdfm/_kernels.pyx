# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

DB_DESIGNS = ("general", "column_max_marginal", "column_x1", "column_argmax_pt", "entry_max_marginal")
cdef double ALIVE_EPS = 1e-15


cdef inline bint _keep(int design, Py_ssize_t a, Py_ssize_t b, Py_ssize_t z1, Py_ssize_t anchor,
                       Py_ssize_t hub) nogil:
    if design == 0:
        return True
    if design == 4:
        if anchor == z1:
            return False
        return (a == anchor and b == z1) or (a == z1 and b == anchor)
    return a == hub or b == hub


def rate_table(p0, double t, double omega, double eta, str design, Py_ssize_t anchor, Py_ssize_t zc):
    cdef const double[::1] q = np.ascontiguousarray(p0, dtype=np.float64)
    cdef Py_ssize_t Z = q.shape[0]
    out = np.zeros((zc, Z, Z), dtype=np.float64)
    cdef double[:, :, ::1] T = out
    cdef double[::1] p = np.empty(Z)
    cdef double[::1] d = np.empty(Z)
    cdef char[::1] alive = np.empty(Z, dtype=np.int8)
    cdef int code = DB_DESIGNS.index(design)
    cdef Py_ssize_t z1, a, b, n_alive, hub
    cdef double denom, diff, total, best
    for z1 in range(zc):
        n_alive = 0
        hub = 0
        best = -1.0
        for a in range(Z):
            p[a] = (1.0 - t) * q[a]
            d[a] = -q[a]
        p[z1] += t
        d[z1] += 1.0
        for a in range(Z):
            alive[a] = p[a] > ALIVE_EPS or a == z1
            n_alive += alive[a]
            if p[a] > best:
                best = p[a]
                hub = a
        if code == 1:
            hub = anchor
        elif code == 2:
            hub = z1
        for a in range(Z):
            if p[a] <= ALIVE_EPS:
                continue
            denom = n_alive * p[a]
            total = 0.0
            for b in range(Z):
                if b == a:
                    continue
                if alive[b]:
                    diff = d[b] - d[a]
                    if diff > 0.0:
                        T[z1, a, b] += diff / denom
                if b == z1 and omega != 0.0:
                    T[z1, a, b] += omega / denom
                if eta != 0.0 and _keep(code, a, b, z1, anchor, hub):
                    T[z1, a, b] += eta * p[b]
                total += T[z1, a, b]
            T[z1, a, a] = -total
    return out


def expected_rates(states, post, table):
    cdef const long[::1] s = np.ascontiguousarray(states, dtype=np.int64)
    cdef const double[:, ::1] w = np.ascontiguousarray(post, dtype=np.float64)
    cdef const double[:, :, ::1] T = np.ascontiguousarray(table, dtype=np.float64)
    cdef Py_ssize_t D = s.shape[0], K = w.shape[1], Z = T.shape[2]
    out = np.zeros((D, Z), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, k, j
    cdef double wk
    with nogil:
        for i in range(D):
            for k in range(K):
                wk = w[i, k]
                if wk == 0.0:
                    continue
                for j in range(Z):
                    o[i, j] += wk * T[k, s[i], j]
    return out


def categorical(probs, u):
    cdef const double[:, ::1] P = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const double[::1] U = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t D = P.shape[0], Z = P.shape[1] if P.shape[0] else 0
    out = np.zeros(D, dtype=np.int64)
    cdef long[::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double total, thresh, acc
    with nogil:
        for i in range(D):
            total = 0.0
            for j in range(Z):
                total += P[i, j]
            thresh = U[i] * total
            acc = 0.0
            k = 0
            for j in range(Z):
                acc += P[i, j]
                if acc <= thresh:
                    k += 1
            o[i] = k
    return out
