"""Compiled sweep kernel for the marginal Gibbs sampler.

Operates on flat preallocated arrays; families are dispatched by integer code
(0 = Pitman-Yor, 1 = Gnedin, 2 = MFM with a precomputed log-V table).  Join
weights and the new-block weight of one level share a common denominator, so
they enter the categorical unnormalized; the dish-level block is divided by
its own total where the full conditional mixes the two levels.

Falls back to plain Python when numba is unavailable (slow but identical
logic); the public API lives in :mod:`hssm.gibbs`.
"""

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

FAM_PY = 0
FAM_GN = 1
FAM_MFM = 2


@njit(cache=True)
def _log0(x):
    return math.log(x) if x > 0.0 else -np.inf


@njit(cache=True)
def _log_ml(n, s, ss, m0, s2, a, b, flat):
    """Log marginal likelihood of one block under the Normal/NIG base."""
    if flat or n == 0:
        return 0.0
    an = a + 0.5 * n
    q = ss - 2.0 * m0 * s + n * m0 * m0
    dev = s - n * m0
    bn = b + 0.5 * q - 0.5 * s2 * dev * dev / (1.0 + n * s2)
    if bn <= 0.0:
        # unreachable for valid stats; keeps log well defined under roundoff
        bn = 1e-300
    return (-0.5 * n * math.log(2.0 * math.pi)
            - 0.5 * math.log(1.0 + n * s2)
            + a * math.log(b) - an * math.log(bn)
            + math.lgamma(an) - math.lgamma(a))


@njit(cache=True)
def _join_weight(fam, p0, p1, V, n, k, cnt):
    """Unnormalized weight for joining an existing block of size cnt."""
    if fam == FAM_PY:
        return cnt - p0
    if fam == FAM_GN:
        return (cnt + 1.0) * (n - k + p0)
    return math.exp(V[n + 1, k] - V[n, k]) * (cnt - p0)


@njit(cache=True)
def _new_weight(fam, p0, p1, V, n, k):
    """Unnormalized weight for opening a new block."""
    if fam == FAM_PY:
        w = p1 + p0 * k
        return w if w > 0.0 else 0.0
    if fam == FAM_GN:
        w = k * (k - p0) + p1
        return w if w > 0.0 else 0.0
    return math.exp(V[n + 1, k + 1] - V[n, k])


@njit(cache=True)
def _categorical_log(wlog, nopt):
    mx = wlog[0]
    for q in range(1, nopt):
        if wlog[q] > mx:
            mx = wlog[q]
    tot = 0.0
    for q in range(nopt):
        wlog[q] = math.exp(wlog[q] - mx)
        tot += wlog[q]
    u = np.random.random() * tot
    acc = 0.0
    for q in range(nopt):
        acc += wlog[q]
        if u < acc:
            return q
    return nopt - 1


@njit(cache=True)
def run_sweeps(y, grp_off,
               fam_b, pb0, pb1, Vb,
               fam_t, pt0, pt1, Vt,
               m0, s2, a, b, flat,
               sweeps, burn_in, thin, seed, init_single,
               snap_d, snap_D, snap_ntab, snap_size, snap_dish):
    """Initialization pass plus ``sweeps`` full sweeps; snapshots filled in place."""
    N = y.shape[0]
    I = grp_off.shape[0] - 1
    maxT = snap_size.shape[2]
    maxD = N + 1

    ntab = np.zeros(I, dtype=np.int64)
    tab_dish = np.full((I, maxT), -1, dtype=np.int64)
    tab_cnt = np.zeros((I, maxT), dtype=np.int64)
    tab_sum = np.zeros((I, maxT), dtype=np.float64)
    tab_ssq = np.zeros((I, maxT), dtype=np.float64)
    table_of = np.full(N, -1, dtype=np.int64)

    ndish = 0
    m_d = np.zeros(maxD, dtype=np.int64)
    d_cnt = np.zeros(maxD, dtype=np.int64)
    d_sum = np.zeros(maxD, dtype=np.float64)
    d_ssq = np.zeros(maxD, dtype=np.float64)
    m_tot = 0

    wlog = np.zeros(2 * N + 2, dtype=np.float64)
    opt_table = np.zeros(2 * N + 2, dtype=np.int64)
    opt_dish = np.zeros(2 * N + 2, dtype=np.int64)
    delta = np.zeros(maxD, dtype=np.float64)

    np.random.seed(seed)
    si = 0

    if init_single:
        # everyone in restaurant i at table 1; all tables share dish 1
        ndish = 1
        for i in range(I):
            lo, hi = grp_off[i], grp_off[i + 1]
            ntab[i] = 1
            tab_dish[i, 0] = 0
            for j in range(lo, hi):
                table_of[j] = 0
                tab_cnt[i, 0] += 1
                tab_sum[i, 0] += y[j]
                tab_ssq[i, 0] += y[j] * y[j]
                d_cnt[0] += 1
                d_sum[0] += y[j]
                d_ssq[0] += y[j] * y[j]
            m_d[0] += 1
            m_tot += 1

    start = 0 if init_single else -1
    for sweep in range(start, sweeps):
        # ---- customer step (sweep == -1 is the sequential seating pass) ----
        for i in range(I):
            lo, hi = grp_off[i], grp_off[i + 1]
            n_i = hi - lo
            for j in range(lo, hi):
                yy = y[j]
                if sweep >= 0:
                    # remove customer j, pruning emptied tables and dishes
                    t = table_of[j]
                    d = tab_dish[i, t]
                    tab_cnt[i, t] -= 1
                    tab_sum[i, t] -= yy
                    tab_ssq[i, t] -= yy * yy
                    d_cnt[d] -= 1
                    d_sum[d] -= yy
                    d_ssq[d] -= yy * yy
                    if tab_cnt[i, t] == 0:
                        for tt in range(t, ntab[i] - 1):
                            tab_dish[i, tt] = tab_dish[i, tt + 1]
                            tab_cnt[i, tt] = tab_cnt[i, tt + 1]
                            tab_sum[i, tt] = tab_sum[i, tt + 1]
                            tab_ssq[i, tt] = tab_ssq[i, tt + 1]
                        ntab[i] -= 1
                        for jj in range(lo, hi):
                            if table_of[jj] > t:
                                table_of[jj] -= 1
                        m_d[d] -= 1
                        m_tot -= 1
                        if m_d[d] == 0:
                            for dd in range(d, ndish - 1):
                                m_d[dd] = m_d[dd + 1]
                                d_cnt[dd] = d_cnt[dd + 1]
                                d_sum[dd] = d_sum[dd + 1]
                                d_ssq[dd] = d_ssq[dd + 1]
                            ndish -= 1
                            for ii in range(I):
                                for tt in range(ntab[ii]):
                                    if tab_dish[ii, tt] > d:
                                        tab_dish[ii, tt] -= 1
                    table_of[j] = -1
                    n_cur = n_i - 1
                else:
                    n_cur = j - lo  # customers seated so far in this restaurant

                for d in range(ndish):
                    delta[d] = (_log_ml(d_cnt[d] + 1, d_sum[d] + yy, d_ssq[d] + yy * yy,
                                        m0, s2, a, b, flat)
                                - _log_ml(d_cnt[d], d_sum[d], d_ssq[d], m0, s2, a, b, flat))
                d_new = _log_ml(1, yy, yy * yy, m0, s2, a, b, flat)

                k = ntab[i]
                nopt = 0
                if n_cur == 0:
                    # empty restaurant: a new table is forced
                    lognu = 0.0
                else:
                    for c in range(k):
                        wj = _join_weight(fam_b, pb0, pb1, Vb, n_cur, k, float(tab_cnt[i, c]))
                        wlog[nopt] = _log0(wj) + delta[tab_dish[i, c]]
                        opt_table[nopt] = c
                        opt_dish[nopt] = -1
                        nopt += 1
                    lognu = _log0(_new_weight(fam_b, pb0, pb1, Vb, n_cur, k))
                if ndish > 0:
                    ttot = 0.0
                    for d in range(ndish):
                        ttot += _join_weight(fam_t, pt0, pt1, Vt, m_tot, ndish, float(m_d[d]))
                    nu_t = _new_weight(fam_t, pt0, pt1, Vt, m_tot, ndish)
                    ttot += nu_t
                    for d in range(ndish):
                        wj = _join_weight(fam_t, pt0, pt1, Vt, m_tot, ndish, float(m_d[d]))
                        wlog[nopt] = lognu + _log0(wj) - _log0(ttot) + delta[d]
                        opt_table[nopt] = -1
                        opt_dish[nopt] = d
                        nopt += 1
                    wlog[nopt] = lognu + _log0(nu_t) - _log0(ttot) + d_new
                else:
                    wlog[nopt] = lognu + d_new
                opt_table[nopt] = -1
                opt_dish[nopt] = -1
                nopt += 1

                pick = _categorical_log(wlog, nopt)
                if opt_table[pick] >= 0:
                    c = opt_table[pick]
                    d = tab_dish[i, c]
                else:
                    c = ntab[i]
                    ntab[i] += 1
                    tab_cnt[i, c] = 0
                    tab_sum[i, c] = 0.0
                    tab_ssq[i, c] = 0.0
                    if opt_dish[pick] >= 0:
                        d = opt_dish[pick]
                    else:
                        d = ndish
                        ndish += 1
                        m_d[d] = 0
                        d_cnt[d] = 0
                        d_sum[d] = 0.0
                        d_ssq[d] = 0.0
                    tab_dish[i, c] = d
                    m_d[d] += 1
                    m_tot += 1
                table_of[j] = c
                tab_cnt[i, c] += 1
                tab_sum[i, c] += yy
                tab_ssq[i, c] += yy * yy
                d_cnt[d] += 1
                d_sum[d] += yy
                d_ssq[d] += yy * yy

        if sweep < 0:
            continue

        # ---- table step: reassign every table's dish ----
        for i in range(I):
            for c in range(ntab[i]):
                d = tab_dish[i, c]
                bc = tab_cnt[i, c]
                bs = tab_sum[i, c]
                bq = tab_ssq[i, c]
                m_d[d] -= 1
                m_tot -= 1
                d_cnt[d] -= bc
                d_sum[d] -= bs
                d_ssq[d] -= bq
                if m_d[d] == 0:
                    for dd in range(d, ndish - 1):
                        m_d[dd] = m_d[dd + 1]
                        d_cnt[dd] = d_cnt[dd + 1]
                        d_sum[dd] = d_sum[dd + 1]
                        d_ssq[dd] = d_ssq[dd + 1]
                    ndish -= 1
                    for ii in range(I):
                        for tt in range(ntab[ii]):
                            if tab_dish[ii, tt] > d:
                                tab_dish[ii, tt] -= 1

                base = _log_ml(bc, bs, bq, m0, s2, a, b, flat)
                nopt = 0
                for dd in range(ndish):
                    wj = _join_weight(fam_t, pt0, pt1, Vt, m_tot, ndish, float(m_d[dd]))
                    wlog[nopt] = _log0(wj) + (
                        _log_ml(d_cnt[dd] + bc, d_sum[dd] + bs, d_ssq[dd] + bq,
                                m0, s2, a, b, flat)
                        - _log_ml(d_cnt[dd], d_sum[dd], d_ssq[dd], m0, s2, a, b, flat))
                    nopt += 1
                wlog[nopt] = _log0(_new_weight(fam_t, pt0, pt1, Vt, m_tot, ndish)) + base
                nopt += 1

                pick = _categorical_log(wlog, nopt)
                if pick < ndish:
                    d = pick
                else:
                    d = ndish
                    ndish += 1
                    m_d[d] = 0
                    d_cnt[d] = 0
                    d_sum[d] = 0.0
                    d_ssq[d] = 0.0
                tab_dish[i, c] = d
                m_d[d] += 1
                m_tot += 1
                d_cnt[d] += bc
                d_sum[d] += bs
                d_ssq[d] += bq

        if sweep >= burn_in and (sweep - burn_in) % thin == thin - 1:
            if si < snap_D.shape[0]:
                for i in range(I):
                    for j in range(grp_off[i], grp_off[i + 1]):
                        snap_d[si, j] = tab_dish[i, table_of[j]]
                    snap_ntab[si, i] = ntab[i]
                    for c in range(ntab[i]):
                        snap_size[si, i, c] = tab_cnt[i, c]
                        snap_dish[si, i, c] = tab_dish[i, c]
                snap_D[si] = ndish
                si += 1
    return si
