"""Pure-Python replay kernel, used when the compiled extension is unavailable.

Must stay loop-for-loop identical to _ckernels.pyx so that both backends give
bitwise-equal results on the same coin array.
"""

import numpy as np

ONE_THIRD = 1.0 / 3.0
TWO_THIRDS = 2.0 / 3.0


def replay(w, a1, a2, kind, q1, ell, agpos, coins):
    """Replay a frozen policy over coin draws.

    coins has shape (R, m, 2): column 0 is u, column 1 the auxiliary or
    fallback coin. Returns (assign, gain_sum, gain_sq, mg_sum, mg_sq, values).
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    m, n = w.shape
    R = coins.shape[0]
    assign = np.empty((R, m), dtype=np.int64)
    gsum = np.zeros((m, n))
    gsq = np.zeros((m, n))
    mgsum = np.zeros(m)
    mgsq = np.zeros(m)
    values = np.zeros(R)
    wl = w.tolist()
    a1l, a2l, kl, ql = a1.tolist(), a2.tolist(), kind.tolist(), q1.tolist()
    ell_l, agl = ell.tolist(), agpos.tolist()
    gs = gsum.tolist()
    gq = gsq.tolist()
    ms = [0.0] * m
    mq = [0.0] * m
    for r in range(R):
        maxw = [0.0] * n
        mark = [3] * n
        cr = coins[r].tolist()
        row_assign = [0] * m
        for k in range(m):
            wk = wl[k]
            for a in range(n):
                g = wk[a] - maxw[a]
                if g < 0.0:
                    g = 0.0
                gs[k][a] += g
                gq[k][a] += g * g
            u = cr[k][0]
            c = cr[k][1]
            x = a1l[k]
            y = a2l[k]
            kd = kl[k]
            if kd == 0:
                target = x
            elif kd == 1:
                target = x if c < ql[k] else y
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
                    if ell_l[k] == 1:
                        al, ao = x, y
                    else:
                        al, ao = y, x
                    mk = mark[al]
                    if agl[k] == 1 and mk == 1:
                        target = ao
                    elif agl[k] == 1 and mk == 2:
                        target = al
                    else:
                        target = x if c < 0.5 else y
                    mark[x] = 3
                    mark[y] = 3
            g = wk[target] - maxw[target]
            if g < 0.0:
                g = 0.0
            ms[k] += g
            mq[k] += g * g
            if wk[target] > maxw[target]:
                maxw[target] = wk[target]
            row_assign[k] = target
        assign[r] = row_assign
        tot = 0.0
        for a in range(n):
            tot += maxw[a]
        values[r] = tot
    gsum[:] = gs
    gsq[:] = gq
    mgsum[:] = ms
    mgsq[:] = mq
    return assign, gsum, gsq, mgsum, mgsq, values
