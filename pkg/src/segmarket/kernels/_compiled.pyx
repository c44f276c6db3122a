# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled market evaluation kernel.

Semantics mirror ``python_backend`` loop for loop; the pure-Python module is
the reference and the equivalence is covered by tests on random instances.
"""

from libc.math cimport log, pow

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"


def eval_profile(pm, n, c, psize_override=None):
    cdef Py_ssize_t N = pm.n_firms, M = pm.n_segments, P = pm.n_platforms
    cdef cnp.int64_t[:, ::1] nn = np.ascontiguousarray(n, dtype=np.int64)
    cdef double[:, ::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    psize_arr = pm.psize if psize_override is None else np.asarray(psize_override, float)
    cdef double[::1] psize = np.ascontiguousarray(psize_arr, dtype=np.float64)
    cdef double[::1] alpha = np.ascontiguousarray(pm.alpha, dtype=np.float64)
    cdef cnp.int64_t[::1] pid = np.ascontiguousarray(pm.pid, dtype=np.int64)
    cdef double[:, ::1] fc = np.ascontiguousarray(pm.fc, dtype=np.float64)
    cdef double[::1] bc = np.ascontiguousarray(pm.bc, dtype=np.float64)
    cdef double[::1] h2 = np.ascontiguousarray(pm.h2, dtype=np.float64)
    cdef double[::1] listings = np.ascontiguousarray(pm.listings, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(pm.mu, dtype=np.float64)
    cdef double[::1] lam_l = np.ascontiguousarray(pm.lam_l, dtype=np.float64)
    cdef double[::1] lam_g = np.ascontiguousarray(pm.lam_g, dtype=np.float64)
    cdef cnp.int64_t[::1] adj_ptr = np.ascontiguousarray(pm.adj_ptr, dtype=np.int64)
    cdef cnp.int64_t[::1] adj_col = np.ascontiguousarray(pm.adj_col, dtype=np.int64)
    cdef double[::1] adj_w = np.ascontiguousarray(pm.adj_w, dtype=np.float64)
    cdef double[::1] tau0 = np.ascontiguousarray(pm.tau0, dtype=np.float64)
    cdef double[::1] rho = np.ascontiguousarray(pm.rho, dtype=np.float64)
    cdef double[::1] cap = np.ascontiguousarray(pm.cap, dtype=np.float64)
    cdef double gamma = pm.gamma, beta = pm.beta, eta = pm.eta
    cdef double c0 = pm.c0, theta = pm.theta, kappa = pm.kappa

    hn_np = np.zeros((N, M))
    presence_np = np.zeros((N, M))
    response_np = np.zeros((N, M))
    attract_np = np.zeros((N, M))
    share_np = np.zeros((N, M))
    coverage_np = np.zeros((P, M))
    alloc_local_np = np.zeros((P, M))
    alloc_global_np = np.zeros((P, M))
    aggregate_np = np.zeros((P, M))
    matched_np = np.zeros((P, M))
    transactions_np = np.zeros((N, M))
    cost_np = np.zeros(N)
    profit_np = np.zeros(N)
    cdef double[:, ::1] hn = hn_np
    cdef double[:, ::1] presence = presence_np
    cdef double[:, ::1] response = response_np
    cdef double[:, ::1] attract = attract_np
    cdef double[:, ::1] share = share_np
    cdef double[:, ::1] coverage = coverage_np
    cdef double[:, ::1] alloc_local = alloc_local_np
    cdef double[:, ::1] alloc_global = alloc_global_np
    cdef double[:, ::1] aggregate = aggregate_np
    cdef double[:, ::1] matched = matched_np
    cdef double[:, ::1] transactions = transactions_np
    cdef double[::1] cost = cost_np
    cdef double[::1] profit = profit_np

    cdef Py_ssize_t i, m, p, k
    cdef double boost, spill, denom, agg, total_local, total_global
    cdef double x, raw, rev, ci, cov
    cdef long tot_branches
    cdef bint saturated = False

    for i in range(N):
        for m in range(M):
            hn[i, m] = pow(<double>nn[i, m], eta) if nn[i, m] > 0 else 0.0

    for i in range(N):
        boost = 1.0 + kappa * log(psize[i])
        for m in range(M):
            spill = 0.0
            for k in range(adj_ptr[m], adj_ptr[m + 1]):
                spill += adj_w[k] * hn[i, adj_col[k]]
            presence[i, m] = hn[i, m] + gamma * spill
            response[i, m] = pow(c0 + cc[i, m], theta) * boost
            attract[i, m] = alpha[i] * presence[i, m] * response[i, m]

    for m in range(M):
        denom = 0.0
        for i in range(N):
            if nn[i, m] > 0:
                denom += attract[i, m]
        if denom > 0.0:
            for i in range(N):
                if nn[i, m] > 0:
                    share[i, m] = attract[i, m] / denom * listings[m]
                    coverage[pid[i], m] += share[i, m]

    for m in range(M):
        for p in range(P):
            agg = coverage[p, m]
            for k in range(adj_ptr[m], adj_ptr[m + 1]):
                agg += coverage[p, adj_col[k]]
            aggregate[p, m] = agg
        total_local = 0.0
        total_global = 0.0
        for p in range(P):
            total_local += coverage[p, m]
            total_global += aggregate[p, m]
        for p in range(P):
            if total_local > 0.0:
                alloc_local[p, m] = lam_l[m] * coverage[p, m] / total_local
            if total_global > 0.0:
                alloc_global[p, m] = lam_g[m] * aggregate[p, m] / total_global

    for m in range(M):
        for p in range(P):
            x = alloc_local[p, m] + alloc_global[p, m]
            if x > 0.0:
                raw = tau0[m] * pow(x, rho[m])
                if raw > cap[m]:
                    saturated = True
                    raw = cap[m]
                matched[p, m] = x * raw

    for i in range(N):
        for m in range(M):
            cov = coverage[pid[i], m]
            if cov > 0.0 and share[i, m] > 0.0:
                transactions[i, m] = matched[pid[i], m] * share[i, m] / cov

    for i in range(N):
        rev = 0.0
        tot_branches = 0
        ci = 0.0
        for m in range(M):
            rev += beta * (mu[m] - cc[i, m]) * transactions[i, m]
            if nn[i, m] > 0:
                ci += fc[i, m] + bc[i] * nn[i, m]
                tot_branches += nn[i, m]
        ci += h2[i] * (<double>tot_branches) ** 2
        cost[i] = ci
        profit[i] = rev - ci

    return {
        "presence": presence_np, "response": response_np, "attract": attract_np,
        "share": share_np, "coverage": coverage_np, "alloc_local": alloc_local_np,
        "alloc_global": alloc_global_np, "transactions": transactions_np,
        "cost": cost_np, "profit": profit_np, "saturated": saturated,
    }


def deviation_context(pm, n, c, i):
    cdef Py_ssize_t N = pm.n_firms, M = pm.n_segments, P = pm.n_platforms
    cdef cnp.int64_t[:, ::1] nn = np.ascontiguousarray(n, dtype=np.int64)
    cdef double[:, ::1] cc = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] psize = np.ascontiguousarray(pm.psize, dtype=np.float64)
    cdef double[::1] alpha = np.ascontiguousarray(pm.alpha, dtype=np.float64)
    cdef cnp.int64_t[::1] pid = np.ascontiguousarray(pm.pid, dtype=np.int64)
    cdef cnp.int64_t[::1] adj_ptr = np.ascontiguousarray(pm.adj_ptr, dtype=np.int64)
    cdef cnp.int64_t[::1] adj_col = np.ascontiguousarray(pm.adj_col, dtype=np.int64)
    cdef double[::1] adj_w = np.ascontiguousarray(pm.adj_w, dtype=np.float64)
    cdef double gamma = pm.gamma, eta = pm.eta
    cdef double c0 = pm.c0, theta = pm.theta, kappa = pm.kappa

    hn_np = np.zeros((N, M))
    rival_total_np = np.zeros(M)
    platform_rival_np = np.zeros((P, M))
    cdef double[:, ::1] hn = hn_np
    cdef double[::1] rival_total = rival_total_np
    cdef double[:, ::1] platform_rival = platform_rival_np

    cdef Py_ssize_t k, m, a
    cdef double boost, spill, f, psi, r

    for k in range(N):
        for m in range(M):
            hn[k, m] = pow(<double>nn[k, m], eta) if nn[k, m] > 0 else 0.0

    for k in range(N):
        if k == <Py_ssize_t>i:
            continue
        boost = 1.0 + kappa * log(psize[k])
        for m in range(M):
            if nn[k, m] <= 0:
                continue
            spill = 0.0
            for a in range(adj_ptr[m], adj_ptr[m + 1]):
                spill += adj_w[a] * hn[k, adj_col[a]]
            f = hn[k, m] + gamma * spill
            psi = pow(c0 + cc[k, m], theta) * boost
            r = alpha[k] * f * psi
            rival_total[m] += r
            platform_rival[pid[k], m] += r

    return {
        "i": int(i), "N": int(N), "M": int(M), "P": int(P),
        "pid_i": int(pid[i]),
        "alpha_i": float(alpha[i]),
        "boost_i": 1.0 + kappa * log(psize[i]),
        "rival_total": rival_total_np,
        "platform_rival": platform_rival_np,
        "adj_ptr": np.asarray(pm.adj_ptr, dtype=np.int64),
        "adj_col": np.asarray(pm.adj_col, dtype=np.int64),
        "adj_w": np.asarray(pm.adj_w, dtype=np.float64),
        "listings": np.asarray(pm.listings, dtype=np.float64),
        "mu": np.asarray(pm.mu, dtype=np.float64),
        "lam_l": np.asarray(pm.lam_l, dtype=np.float64),
        "lam_g": np.asarray(pm.lam_g, dtype=np.float64),
        "tau0": np.asarray(pm.tau0, dtype=np.float64),
        "rho": np.asarray(pm.rho, dtype=np.float64),
        "cap": np.asarray(pm.cap, dtype=np.float64),
        "fc_i": np.asarray(pm.fc[i], dtype=np.float64),
        "bc_i": float(pm.bc[i]), "h2_i": float(pm.h2[i]),
        "gamma": gamma, "beta": pm.beta, "eta": eta,
        "c0": c0, "theta": theta,
    }


def profit_batch(ctx, n_cand, c_cand):
    cdef cnp.int64_t[:, ::1] nc = np.ascontiguousarray(n_cand, dtype=np.int64)
    cdef double[:, ::1] cv = np.ascontiguousarray(c_cand, dtype=np.float64)
    cdef Py_ssize_t K = nc.shape[0]
    cdef Py_ssize_t M = ctx["M"], P = ctx["P"]
    cdef Py_ssize_t pid_i = ctx["pid_i"]
    cdef double alpha_i = ctx["alpha_i"], boost_i = ctx["boost_i"]
    cdef double[::1] rival_total = ctx["rival_total"]
    cdef double[:, ::1] platform_rival = ctx["platform_rival"]
    cdef cnp.int64_t[::1] adj_ptr = ctx["adj_ptr"]
    cdef cnp.int64_t[::1] adj_col = ctx["adj_col"]
    cdef double[::1] adj_w = ctx["adj_w"]
    cdef double[::1] listings = ctx["listings"]
    cdef double[::1] mu = ctx["mu"]
    cdef double[::1] lam_l = ctx["lam_l"]
    cdef double[::1] lam_g = ctx["lam_g"]
    cdef double[::1] tau0 = ctx["tau0"]
    cdef double[::1] rho = ctx["rho"]
    cdef double[::1] cap = ctx["cap"]
    cdef double[::1] fc_i = ctx["fc_i"]
    cdef double bc_i = ctx["bc_i"], h2_i = ctx["h2_i"]
    cdef double gamma = ctx["gamma"], beta = ctx["beta"], eta = ctx["eta"]
    cdef double c0 = ctx["c0"], theta = ctx["theta"]

    out_np = np.empty(K)
    cdef double[::1] out = out_np
    cov_np = np.zeros((P, M))
    cdef double[:, ::1] cov = cov_np
    sigma_np = np.zeros(M)
    cdef double[::1] sigma_i = sigma_np
    hn_np = np.zeros(M)
    cdef double[::1] hn_i = hn_np

    cdef Py_ssize_t k, m, p, a, j
    cdef double denom, r_i, spill, f, scale, rev, own_cov
    cdef double total_local, total_global, agg, agg_i, x, raw, cost
    cdef long tot

    for k in range(K):
        for m in range(M):
            hn_i[m] = pow(<double>nc[k, m], eta) if nc[k, m] > 0 else 0.0
        for m in range(M):
            denom = rival_total[m]
            r_i = 0.0
            if nc[k, m] > 0:
                spill = 0.0
                for a in range(adj_ptr[m], adj_ptr[m + 1]):
                    spill += adj_w[a] * hn_i[adj_col[a]]
                f = hn_i[m] + gamma * spill
                r_i = alpha_i * f * pow(c0 + cv[k, m], theta) * boost_i
                denom += r_i
            if denom > 0.0:
                scale = listings[m] / denom
                sigma_i[m] = r_i * scale
                for p in range(P):
                    cov[p, m] = platform_rival[p, m] * scale
                cov[pid_i, m] += sigma_i[m]
            else:
                sigma_i[m] = 0.0
                for p in range(P):
                    cov[p, m] = 0.0

        rev = 0.0
        for m in range(M):
            own_cov = cov[pid_i, m]
            if own_cov <= 0.0 or sigma_i[m] <= 0.0:
                continue
            total_local = 0.0
            total_global = 0.0
            agg_i = 0.0
            for p in range(P):
                agg = cov[p, m]
                for a in range(adj_ptr[m], adj_ptr[m + 1]):
                    agg += cov[p, adj_col[a]]
                total_local += cov[p, m]
                total_global += agg
                if p == pid_i:
                    agg_i = agg
            x = 0.0
            if total_local > 0.0:
                x += lam_l[m] * own_cov / total_local
            if total_global > 0.0:
                x += lam_g[m] * agg_i / total_global
            if x > 0.0:
                raw = tau0[m] * pow(x, rho[m])
                if raw > cap[m]:
                    raw = cap[m]
                rev += beta * (mu[m] - cv[k, m]) * x * raw * sigma_i[m] / own_cov

        cost = 0.0
        tot = 0
        for m in range(M):
            if nc[k, m] > 0:
                cost += fc_i[m] + bc_i * nc[k, m]
                tot += nc[k, m]
        cost += h2_i * (<double>tot) ** 2
        out[k] = rev - cost
    return out_np
