"""Searcher allocation and the transaction technology.

Local searchers split across platforms in proportion to same-segment
coverage; global searchers in proportion to coverage aggregated over the
segment and its neighbors.  Transactions scale by a capped increasing-returns
match probability.
"""

from __future__ import annotations

import numpy as np


def allocate_searchers(coverage, adjacency, local_searchers, global_searchers
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Allocate both searcher types to platforms, per segment.

    `coverage` is (platforms, segments); `adjacency` is per-segment
    ((neighbor, weight), ...) — only the neighbor indices matter here.
    A segment with zero total (aggregate) coverage allocates nothing.
    """
    cov = np.atleast_2d(np.asarray(coverage, dtype=float))
    if np.any(cov < 0):
        raise ValueError("coverage must be >= 0")
    n_p, n_m = cov.shape
    lam_l = np.asarray(local_searchers, dtype=float)
    lam_g = np.asarray(global_searchers, dtype=float)

    aggregate = cov.copy()
    for m, nbrs in enumerate(adjacency):
        for j, _w in nbrs:
            aggregate[:, m] += cov[:, j]

    nu_l = np.zeros_like(cov)
    nu_g = np.zeros_like(cov)
    for m in range(n_m):
        tot_l = cov[:, m].sum()
        if tot_l > 0:
            nu_l[:, m] = lam_l[m] * cov[:, m] / tot_l
        tot_g = aggregate[:, m].sum()
        if tot_g > 0:
            nu_g[:, m] = lam_g[m] * aggregate[:, m] / tot_g
    return nu_l, nu_g


def transaction_probability(x: float, match_rate: float = 0.01,
                            match_exponent: float = 1.0,
                            match_cap: float = 1.0) -> tuple[float, bool]:
    """Match probability for x searchers, plus a flag set when the cap binds.

    Beyond the cap the searcher-volume curve x*tau(x) stops being convex, so
    callers treating convexity as given must check the flag.
    """
    if x < 0:
        raise ValueError("searcher volume must be >= 0")
    if x == 0:
        return 0.0, False
    raw = match_rate * x ** match_exponent
    if raw > match_cap:
        return match_cap, True
    return raw, False


def transactions(nu_l, nu_g, share, coverage, platform_ids,
                 match_rate=0.01, match_exponent=1.0, match_cap=1.0
                 ) -> tuple[np.ndarray, bool]:
    """Per-firm transactions: platform match volume split by within-platform share."""
    nu = np.asarray(nu_l, dtype=float) + np.asarray(nu_g, dtype=float)
    share = np.atleast_2d(np.asarray(share, dtype=float))
    cov = np.atleast_2d(np.asarray(coverage, dtype=float))
    pid = np.asarray(platform_ids)
    n_f, n_m = share.shape
    rate = np.broadcast_to(np.asarray(match_rate, dtype=float), (n_m,))
    expo = np.broadcast_to(np.asarray(match_exponent, dtype=float), (n_m,))
    cap = np.broadcast_to(np.asarray(match_cap, dtype=float), (n_m,))

    saturated = False
    q = np.zeros((n_f, n_m))
    for i in range(n_f):
        p = pid[i]
        for m in range(n_m):
            if cov[p, m] <= 0 or share[i, m] <= 0:
                continue
            tau, sat = transaction_probability(nu[p, m], rate[m], expo[m], cap[m])
            saturated |= sat
            q[i, m] = nu[p, m] * tau * share[i, m] / cov[p, m]
    return q, saturated


def total_transactions(q) -> np.ndarray:
    """Row sums: each firm's transactions across segments."""
    return np.atleast_2d(np.asarray(q, dtype=float)).sum(axis=1)
