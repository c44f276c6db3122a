"""Pure-Python market evaluation kernel.

This is the reference implementation: every quantity is computed with the
same plain loops the compiled kernel uses, so the two backends can be
checked against each other on random instances.  The scalar hot path
(`profit_batch`) avoids numpy per-candidate overhead because typical
instances have only a handful of firms and segments.
"""

from __future__ import annotations

from math import log

import numpy as np

from .pack import PackedMarket

NAME = "python"


def eval_profile(pm: PackedMarket, n, c, psize_override=None) -> dict:
    """Evaluate one strategy profile. Returns matrices keyed by quantity."""
    N, M, P = pm.n_firms, pm.n_segments, pm.n_platforms
    nn = np.asarray(n, dtype=np.int64)
    cc = np.asarray(c, dtype=float)
    psize = pm.psize if psize_override is None else np.asarray(psize_override, float)

    eta, gamma = pm.eta, pm.gamma
    c0, theta, kappa = pm.c0, pm.theta, pm.kappa
    hn = np.zeros((N, M))
    for i in range(N):
        for m in range(M):
            hn[i, m] = float(nn[i, m]) ** eta if nn[i, m] > 0 else 0.0

    presence = np.zeros((N, M))
    response = np.zeros((N, M))
    attract = np.zeros((N, M))
    for i in range(N):
        boost = 1.0 + kappa * log(psize[i])
        for m in range(M):
            spill = 0.0
            for k in range(pm.adj_ptr[m], pm.adj_ptr[m + 1]):
                spill += pm.adj_w[k] * hn[i, pm.adj_col[k]]
            presence[i, m] = hn[i, m] + gamma * spill
            response[i, m] = (c0 + cc[i, m]) ** theta * boost
            attract[i, m] = pm.alpha[i] * presence[i, m] * response[i, m]

    share = np.zeros((N, M))
    coverage = np.zeros((P, M))
    for m in range(M):
        denom = 0.0
        for i in range(N):
            if nn[i, m] > 0:
                denom += attract[i, m]
        if denom > 0.0:
            for i in range(N):
                if nn[i, m] > 0:
                    share[i, m] = attract[i, m] / denom * pm.listings[m]
                    coverage[pm.pid[i], m] += share[i, m]

    alloc_local = np.zeros((P, M))
    alloc_global = np.zeros((P, M))
    aggregate = np.zeros((P, M))
    for m in range(M):
        for p in range(P):
            agg = coverage[p, m]
            for k in range(pm.adj_ptr[m], pm.adj_ptr[m + 1]):
                agg += coverage[p, pm.adj_col[k]]
            aggregate[p, m] = agg
        total_local = sum(coverage[p, m] for p in range(P))
        total_global = sum(aggregate[p, m] for p in range(P))
        for p in range(P):
            if total_local > 0.0:
                alloc_local[p, m] = pm.lam_l[m] * coverage[p, m] / total_local
            if total_global > 0.0:
                alloc_global[p, m] = pm.lam_g[m] * aggregate[p, m] / total_global

    saturated = False
    matched = np.zeros((P, M))
    for m in range(M):
        for p in range(P):
            x = alloc_local[p, m] + alloc_global[p, m]
            if x > 0.0:
                raw = pm.tau0[m] * x ** pm.rho[m]
                if raw > pm.cap[m]:
                    saturated = True
                    raw = pm.cap[m]
                matched[p, m] = x * raw

    transactions = np.zeros((N, M))
    for i in range(N):
        for m in range(M):
            cov = coverage[pm.pid[i], m]
            if cov > 0.0 and share[i, m] > 0.0:
                transactions[i, m] = matched[pm.pid[i], m] * share[i, m] / cov

    cost = np.zeros(N)
    profit = np.zeros(N)
    for i in range(N):
        rev = 0.0
        tot_branches = 0
        ci = 0.0
        for m in range(M):
            rev += pm.beta * (pm.mu[m] - cc[i, m]) * transactions[i, m]
            if nn[i, m] > 0:
                ci += pm.fc[i, m] + pm.bc[i] * nn[i, m]
                tot_branches += nn[i, m]
        ci += pm.h2[i] * float(tot_branches) ** 2
        cost[i] = ci
        profit[i] = rev - ci

    return {
        "presence": presence, "response": response, "attract": attract,
        "share": share, "coverage": coverage, "alloc_local": alloc_local,
        "alloc_global": alloc_global, "transactions": transactions,
        "cost": cost, "profit": profit, "saturated": saturated,
    }


def deviation_context(pm: PackedMarket, n, c, i: int) -> dict:
    """Freeze everything that does not depend on firm i's own strategy."""
    N, M, P = pm.n_firms, pm.n_segments, pm.n_platforms
    nn = np.asarray(n, dtype=np.int64)
    cc = np.asarray(c, dtype=float)
    eta = pm.eta

    hn = [[float(nn[k, m]) ** eta if nn[k, m] > 0 else 0.0 for m in range(M)]
          for k in range(N)]
    rival_total = [0.0] * M           # sum of active rival attractiveness per segment
    platform_rival = [[0.0] * M for _ in range(P)]
    for k in range(N):
        if k == i:
            continue
        boost = 1.0 + pm.kappa * log(pm.psize[k])
        for m in range(M):
            if nn[k, m] <= 0:
                continue
            spill = 0.0
            for a in range(pm.adj_ptr[m], pm.adj_ptr[m + 1]):
                spill += pm.adj_w[a] * hn[k][pm.adj_col[a]]
            f = hn[k][m] + pm.gamma * spill
            psi = (pm.c0 + cc[k, m]) ** pm.theta * boost
            r = pm.alpha[k] * f * psi
            rival_total[m] += r
            platform_rival[pm.pid[k]][m] += r

    adj = [[(int(pm.adj_col[a]), float(pm.adj_w[a]))
            for a in range(pm.adj_ptr[m], pm.adj_ptr[m + 1])] for m in range(M)]
    nbrs = [[j for j, _ in adj[m]] for m in range(M)]
    return {
        "i": i, "N": N, "M": M, "P": P,
        "pid_i": int(pm.pid[i]),
        "alpha_i": float(pm.alpha[i]),
        "boost_i": 1.0 + pm.kappa * log(pm.psize[i]),
        "rival_total": rival_total,
        "platform_rival": platform_rival,
        "adj": adj, "nbrs": nbrs,
        "listings": [float(x) for x in pm.listings],
        "mu": [float(x) for x in pm.mu],
        "lam_l": [float(x) for x in pm.lam_l],
        "lam_g": [float(x) for x in pm.lam_g],
        "tau0": [float(x) for x in pm.tau0],
        "rho": [float(x) for x in pm.rho],
        "cap": [float(x) for x in pm.cap],
        "fc_i": [float(x) for x in pm.fc[i]],
        "bc_i": float(pm.bc[i]), "h2_i": float(pm.h2[i]),
        "gamma": pm.gamma, "beta": pm.beta, "eta": pm.eta,
        "c0": pm.c0, "theta": pm.theta,
    }


def profit_batch(ctx: dict, n_cand, c_cand) -> np.ndarray:
    """Profit of firm i for each candidate own strategy, rivals held fixed."""
    n_cand = np.asarray(n_cand, dtype=np.int64)
    c_cand = np.asarray(c_cand, dtype=float)
    K = n_cand.shape[0]
    M, P = ctx["M"], ctx["P"]
    pid_i = ctx["pid_i"]
    alpha_i, boost_i = ctx["alpha_i"], ctx["boost_i"]
    rival_total = ctx["rival_total"]
    platform_rival = ctx["platform_rival"]
    adj, nbrs = ctx["adj"], ctx["nbrs"]
    listings, mu = ctx["listings"], ctx["mu"]
    lam_l, lam_g = ctx["lam_l"], ctx["lam_g"]
    tau0, rho, cap = ctx["tau0"], ctx["rho"], ctx["cap"]
    fc_i, bc_i, h2_i = ctx["fc_i"], ctx["bc_i"], ctx["h2_i"]
    gamma, beta, eta, c0, theta = (
        ctx["gamma"], ctx["beta"], ctx["eta"], ctx["c0"], ctx["theta"])

    out = np.empty(K)
    cov = [[0.0] * M for _ in range(P)]
    sigma_i = [0.0] * M
    hn_i = [0.0] * M
    for k in range(K):
        nk = n_cand[k]
        ck = c_cand[k]
        for m in range(M):
            hn_i[m] = float(nk[m]) ** eta if nk[m] > 0 else 0.0
        for m in range(M):
            denom = rival_total[m]
            r_i = 0.0
            if nk[m] > 0:
                spill = 0.0
                for j, w in adj[m]:
                    spill += w * hn_i[j]
                f = hn_i[m] + gamma * spill
                r_i = alpha_i * f * (c0 + ck[m]) ** theta * boost_i
                denom += r_i
            if denom > 0.0:
                scale = listings[m] / denom
                sigma_i[m] = r_i * scale
                for p in range(P):
                    cov[p][m] = platform_rival[p][m] * scale
                cov[pid_i][m] += sigma_i[m]
            else:
                sigma_i[m] = 0.0
                for p in range(P):
                    cov[p][m] = 0.0

        rev = 0.0
        for m in range(M):
            own_cov = cov[pid_i][m]
            if own_cov <= 0.0 or sigma_i[m] <= 0.0:
                continue
            total_local = 0.0
            total_global = 0.0
            agg_i = 0.0
            for p in range(P):
                cpm = cov[p][m]
                agg = cpm
                for j in nbrs[m]:
                    agg += cov[p][j]
                total_local += cpm
                total_global += agg
                if p == pid_i:
                    agg_i = agg
            x = 0.0
            if total_local > 0.0:
                x += lam_l[m] * own_cov / total_local
            if total_global > 0.0:
                x += lam_g[m] * agg_i / total_global
            if x > 0.0:
                raw = tau0[m] * x ** rho[m]
                if raw > cap[m]:
                    raw = cap[m]
                rev += beta * (mu[m] - ck[m]) * x * raw * sigma_i[m] / own_cov

        cost = 0.0
        tot = 0
        for m in range(M):
            if nk[m] > 0:
                cost += fc_i[m] + bc_i * nk[m]
                tot += nk[m]
        cost += h2_i * float(tot) ** 2
        out[k] = rev - cost
    return out
