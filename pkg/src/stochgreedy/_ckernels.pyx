# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled replay kernel. Mirrors _pykernels.replay loop for loop."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double ONE_THIRD = 1.0 / 3.0
cdef double TWO_THIRDS = 2.0 / 3.0


def replay(w_in, a1_in, a2_in, kind_in, q1_in, ell_in, agpos_in, coins_in):
    cdef const double[:, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef const long long[::1] a1 = np.ascontiguousarray(a1_in, dtype=np.int64)
    cdef const long long[::1] a2 = np.ascontiguousarray(a2_in, dtype=np.int64)
    cdef const long long[::1] kind = np.ascontiguousarray(kind_in, dtype=np.int64)
    cdef const double[::1] q1 = np.ascontiguousarray(q1_in, dtype=np.float64)
    cdef const long long[::1] ell = np.ascontiguousarray(ell_in, dtype=np.int64)
    cdef const long long[::1] agpos = np.ascontiguousarray(agpos_in, dtype=np.int64)
    cdef const double[:, :, ::1] coins = np.ascontiguousarray(coins_in, dtype=np.float64)

    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t n = w.shape[1]
    cdef Py_ssize_t R = coins.shape[0]

    assign_np = np.empty((R, m), dtype=np.int64)
    gsum_np = np.zeros((m, n))
    gsq_np = np.zeros((m, n))
    mgsum_np = np.zeros(m)
    mgsq_np = np.zeros(m)
    values_np = np.zeros(R)
    maxw_np = np.zeros(n)
    mark_np = np.zeros(n, dtype=np.int64)

    cdef long long[:, ::1] assign = assign_np
    cdef double[:, ::1] gsum = gsum_np
    cdef double[:, ::1] gsq = gsq_np
    cdef double[::1] mgsum = mgsum_np
    cdef double[::1] mgsq = mgsq_np
    cdef double[::1] values = values_np
    cdef double[::1] maxw = maxw_np
    cdef long long[::1] mark = mark_np

    cdef Py_ssize_t r, k, a
    cdef long long x, y, kd, target, al, ao, mk
    cdef double g, u, c, tot

    for r in range(R):
        for a in range(n):
            maxw[a] = 0.0
            mark[a] = 3
        for k in range(m):
            for a in range(n):
                g = w[k, a] - maxw[a]
                if g < 0.0:
                    g = 0.0
                gsum[k, a] += g
                gsq[k, a] += g * g
            u = coins[r, k, 0]
            c = coins[r, k, 1]
            x = a1[k]
            y = a2[k]
            kd = kind[k]
            if kd == 0:
                target = x
            elif kd == 1:
                if c < q1[k]:
                    target = x
                else:
                    target = y
            else:
                if u <= ONE_THIRD:
                    target = x
                    mark[x] = 1
                    mark[y] = 2
                elif u <= TWO_THIRDS:
                    target = y
                    mark[y] = 1
                    mark[x] = 2
                else:
                    if ell[k] == 1:
                        al = x
                        ao = y
                    else:
                        al = y
                        ao = x
                    mk = mark[al]
                    if agpos[k] == 1 and mk == 1:
                        target = ao
                    elif agpos[k] == 1 and mk == 2:
                        target = al
                    elif c < 0.5:
                        target = x
                    else:
                        target = y
                    mark[x] = 3
                    mark[y] = 3
            g = w[k, target] - maxw[target]
            if g < 0.0:
                g = 0.0
            mgsum[k] += g
            mgsq[k] += g * g
            if w[k, target] > maxw[target]:
                maxw[target] = w[k, target]
            assign[r, k] = target
        tot = 0.0
        for a in range(n):
            tot += maxw[a]
        values[r] = tot
    return assign_np, gsum_np, gsq_np, mgsum_np, mgsq_np, values_np
