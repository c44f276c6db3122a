"""Flat array view of a market configuration, shared by both kernel backends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import MarketConfig


@dataclass
class PackedMarket:
    """Configuration unpacked into contiguous arrays for the evaluation kernels."""

    n_firms: int
    n_segments: int
    n_platforms: int
    alpha: np.ndarray      # (N,) efficiency
    pid: np.ndarray        # (N,) platform index
    psize: np.ndarray      # (N,) platform size as used by the concession response
    fc: np.ndarray         # (N, M) entry cost
    bc: np.ndarray         # (N,) per-branch cost
    h2: np.ndarray         # (N,) global convexity coefficient
    listings: np.ndarray   # (M,)
    mu: np.ndarray         # (M,)
    v: np.ndarray          # (M,)
    r: np.ndarray          # (M,)
    lam_l: np.ndarray      # (M,)
    lam_g: np.ndarray      # (M,)
    adj_ptr: np.ndarray    # (M+1,) CSR pointers into adj_col/adj_w
    adj_col: np.ndarray
    adj_w: np.ndarray
    gamma: float
    beta: float
    eta: float             # presence exponent
    c0: float              # concession base
    theta: float           # concession exponent
    kappa: float           # platform boost
    tau0: np.ndarray       # (M,)
    rho: np.ndarray        # (M,)
    cap: np.ndarray        # (M,)


def pack(config: MarketConfig) -> PackedMarket:
    n, m = config.num_intermediaries, config.num_segments
    pid = config.platform_ids()
    psize = config.platform_sizes()
    fc = np.zeros((n, m))
    for i, firm in enumerate(config.firms):
        fc[i, :] = firm.entry_cost if len(firm.entry_cost) == m else firm.entry_cost[0]
    ptr = np.zeros(m + 1, dtype=np.int64)
    cols, ws = [], []
    for s, nbrs in enumerate(config.adjacency):
        for j, w in nbrs:
            cols.append(j)
            ws.append(w)
        ptr[s + 1] = len(cols)
    return PackedMarket(
        n_firms=n, n_segments=m, n_platforms=int(pid.max()) + 1,
        alpha=np.array([f.efficiency for f in config.firms]),
        pid=pid, psize=psize, fc=fc,
        bc=np.array([f.branch_cost for f in config.firms]),
        h2=np.array([f.global_convexity for f in config.firms]),
        listings=config.listings.copy(), mu=config.base_price.copy(),
        v=config.gross_benefit.copy(), r=config.reserve_utility.copy(),
        lam_l=config.local_searchers.copy(), lam_g=config.global_searchers.copy(),
        adj_ptr=ptr, adj_col=np.array(cols, dtype=np.int64),
        adj_w=np.array(ws, dtype=float),
        gamma=config.spillover, beta=config.commission,
        eta=config.forms.presence_exponent, c0=config.forms.concession_base,
        theta=config.forms.concession_exponent, kappa=config.forms.platform_boost,
        tau0=config.forms.per_segment("match_rate", m),
        rho=config.forms.per_segment("match_exponent", m),
        cap=config.forms.per_segment("match_cap", m),
    )
