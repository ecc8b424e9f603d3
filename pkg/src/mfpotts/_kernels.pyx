# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.

Every function here has a NumPy twin in :mod:`mfpotts._pykernels` with the
same signature and return convention; :mod:`mfpotts._backend` picks one at
import time.  Keep the two in step.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, fabs

cnp.import_array()

ctypedef cnp.float64_t f64


cdef double _full_energy(const f64[:, ::1] A, const f64[:, ::1] J,
                         const f64[::1] h, const long[::1] y, Py_ssize_t n) noexcept nogil:
    cdef double pair = 0.0, field = 0.0, row
    cdef Py_ssize_t i, j
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += A[i, j] * J[y[i], y[j]]
        pair += row
        field += h[y[i]]
    return 0.5 * pair + field


cdef double _flip_delta(const f64[:, ::1] A, const f64[:, ::1] J,
                        const f64[::1] h, const long[::1] y, Py_ssize_t n,
                        Py_ssize_t i, long a, long b) noexcept nogil:
    # energy change when site i goes from color a to color b, other sites fixed
    cdef double d = 0.0
    cdef Py_ssize_t j
    for j in range(n):
        if j != i:
            d += A[i, j] * (J[b, y[j]] - J[a, y[j]])
    d += 0.5 * A[i, i] * (J[b, b] - J[a, a])
    return d + h[b] - h[a]


def energies(const f64[:, ::1] A, const f64[:, ::1] J, const f64[::1] h,
             long long start, long long count):
    """Hamiltonian of configurations ``start .. start+count-1``.

    Configuration index ``c`` encodes colors in mixed radix, site 0 fastest:
    ``y_i = (c // q**i) % q``.  Consecutive configurations are updated
    incrementally and re-anchored with a full evaluation whenever a digit at
    or above ``anchor`` rolls, which bounds rounding drift.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef long q = J.shape[0]
    cdef cnp.ndarray[f64, ndim=1] out_arr = np.empty(count, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef long[::1] y = np.zeros(n, dtype=np.int_)
    cdef long long c = start, t
    cdef Py_ssize_t i, anchor = 0
    cdef long long span = 1
    cdef double H
    if count <= 0:
        return out_arr
    while anchor < n and span < 512:
        span *= q
        anchor += 1
    for i in range(n):
        y[i] = c % q
        c //= q
    with nogil:
        H = _full_energy(A, J, h, y, n)
        out[0] = H
        for t in range(1, count):
            i = 0
            while i < n:
                if y[i] + 1 < q:
                    if i < anchor:
                        H += _flip_delta(A, J, h, y, n, i, y[i], y[i] + 1)
                    y[i] += 1
                    break
                if i < anchor:
                    H += _flip_delta(A, J, h, y, n, i, y[i], 0)
                y[i] = 0
                i += 1
            if i >= anchor:
                H = _full_energy(A, J, h, y, n)
            out[t] = H
    return out_arr


def jacobi_eigh(A_in, double rel_tol, int max_sweeps):
    """Cyclic (row-by-row) Jacobi rotations on a dense symmetric matrix.

    Only rows ``p`` and ``r`` are rotated in place; columns are restored by
    symmetry, and eigenvectors are accumulated as rows of ``vt`` so that all
    inner loops are contiguous.  Returns ``(eigenvalues, eigenvectors,
    sweeps, converged)`` with unsorted eigenvalues, eigenvectors in columns.
    """
    cdef cnp.ndarray[f64, ndim=2] Aw = np.array(A_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = Aw.shape[0]
    cdef cnp.ndarray[f64, ndim=2] Vt = np.eye(n, dtype=np.float64)
    cdef f64[:, ::1] a = Aw
    cdef f64[:, ::1] vt = Vt
    cdef Py_ssize_t p, r, k
    cdef double fro = 0.0, off, theta, t, c, s, apq, app, arr, x, z
    cdef int sweep = 0
    cdef bint converged = False
    for p in range(n):
        for r in range(n):
            fro += a[p, r] * a[p, r]
    fro = sqrt(fro)
    with nogil:
        while True:
            off = 0.0
            for p in range(n):
                for r in range(n):
                    if p != r:
                        off += a[p, r] * a[p, r]
            if sqrt(off) <= rel_tol * fro:
                converged = True
                break
            if sweep >= max_sweeps:
                break
            sweep += 1
            for p in range(n - 1):
                for r in range(p + 1, n):
                    apq = a[p, r]
                    if apq == 0.0:
                        continue
                    app = a[p, p]
                    arr = a[r, r]
                    theta = (arr - app) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x = a[p, k]
                        z = a[r, k]
                        a[p, k] = c * x - s * z
                        a[r, k] = s * x + c * z
                    for k in range(n):
                        a[k, p] = a[p, k]
                        a[k, r] = a[r, k]
                    a[p, p] = app - t * apq
                    a[r, r] = arr + t * apq
                    a[p, r] = 0.0
                    a[r, p] = 0.0
                    for k in range(n):
                        x = vt[p, k]
                        z = vt[r, k]
                        vt[p, k] = c * x - s * z
                        vt[r, k] = s * x + c * z
    return np.diag(Aw).copy(), Vt.T.copy(), sweep, bool(converged)


def subset_scan(const f64[:, ::1] M):
    """Gray-code scan over all subsets S of rows of a k x k matrix.

    With ``v(S) = sum_{i in S} M[i, :]`` and ``tot = v(all)`` returns the
    integer masks maximising

    * ``max(sum v+, -sum v-)``   (cut norm, best T chosen per S)
    * ``sum |2 v - tot|``        (inf->1 norm, f = +1 on S, best g per f)
    * ``sum |v|``

    as ``(cut_mask, inf_mask, abs_mask)``.  Ties keep the first mask in Gray
    order.  Values are recomputed by the caller from the masks.
    """
    cdef Py_ssize_t k = M.shape[0]
    cdef cnp.ndarray[f64, ndim=1] v_arr = np.zeros(k, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=1] tot_arr = np.asarray(M).sum(axis=0)
    cdef f64[::1] v = v_arr
    cdef f64[::1] tot = tot_arr
    cdef unsigned long long g, prev = 0, cur, nsub = 1ULL << k, changed
    cdef Py_ssize_t bit, j
    cdef double pos, neg, ab, u, val
    cdef double best_cut = 0.0, best_inf = -1.0, best_abs = 0.0
    cdef unsigned long long cut_mask = 0, inf_mask = 0, abs_mask = 0
    with nogil:
        # S = empty: v = 0, so only the inf->1 candidate is nonzero
        val = 0.0
        for j in range(k):
            val += fabs(tot[j])
        best_inf = val
        for g in range(1, nsub):
            cur = g ^ (g >> 1)
            changed = cur ^ prev
            bit = 0
            while (changed >> bit) != 1:
                bit += 1
            if cur & changed:
                for j in range(k):
                    v[j] += M[bit, j]
            else:
                for j in range(k):
                    v[j] -= M[bit, j]
            prev = cur
            pos = 0.0
            neg = 0.0
            ab = 0.0
            for j in range(k):
                if v[j] > 0.0:
                    pos += v[j]
                else:
                    neg -= v[j]
                u = 2.0 * v[j] - tot[j]
                ab += fabs(u)
            val = pos if pos >= neg else neg
            if val > best_cut:
                best_cut = val
                cut_mask = cur
            if ab > best_inf:
                best_inf = ab
                inf_mask = cur
            if pos + neg > best_abs:
                best_abs = pos + neg
                abs_mask = cur
    return int(cut_mask), int(inf_mask), int(abs_mask)


def mf_sweep(const f64[:, ::1] K, const f64[:, ::1] J, const f64[::1] h,
             f64[:, ::1] theta, double damping):
    """One in-place Gauss-Seidel sweep of the softmax update, sites in order.

    Row i becomes ``(1-damping) * T(gamma_i + h) + damping * theta_i`` with
    ``gamma_ir = sum_s J_rs sum_j K_ij theta_js``.  Returns the largest
    sup-norm row change.
    """
    cdef Py_ssize_t n = K.shape[0], q = J.shape[0]
    cdef Py_ssize_t i, j, r, s
    cdef cnp.ndarray[f64, ndim=1] g_arr = np.empty(q, dtype=np.float64)
    cdef cnp.ndarray[f64, ndim=1] e_arr = np.empty(q, dtype=np.float64)
    cdef f64[::1] g = g_arr
    cdef f64[::1] e = e_arr
    cdef double mx, tot, new, diff, worst = 0.0
    with nogil:
        for i in range(n):
            for s in range(q):
                g[s] = 0.0
            for j in range(n):
                if K[i, j] != 0.0:
                    for s in range(q):
                        g[s] += K[i, j] * theta[j, s]
            for r in range(q):
                e[r] = h[r]
                for s in range(q):
                    e[r] += J[r, s] * g[s]
            mx = e[0]
            for r in range(1, q):
                if e[r] > mx:
                    mx = e[r]
            tot = 0.0
            for r in range(q):
                e[r] = exp(e[r] - mx)
                tot += e[r]
            for r in range(q):
                new = (1.0 - damping) * (e[r] / tot) + damping * theta[i, r]
                diff = fabs(new - theta[i, r])
                if diff > worst:
                    worst = diff
                theta[i, r] = new
    return worst
