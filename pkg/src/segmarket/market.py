"""Static market primitives: presence, concession response, attractiveness,
listings capture, platform coverage, concentration, and full-profile evaluation.

All functions are pure; `evaluate` dispatches the profile computation to the
active kernel backend and assembles a `MarketOutcome`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import MarketConfig, StrategyProfile
from .economics import WelfareReport, welfare_decompose


def effective_presence(branches: int, neighbor_branches, spillover: float,
                       presence_exponent: float = 1.0) -> float:
    """Local branch effect plus weighted spillover from adjacent segments.

    `neighbor_branches` is an iterable of (branch_count, weight) pairs.
    """
    if branches < 0:
        raise ValueError("branch count must be >= 0")
    total = float(branches) ** presence_exponent if branches > 0 else 0.0
    spill = 0.0
    for nb, w in neighbor_branches:
        if nb < 0 or w < 0:
            raise ValueError("neighbor branch counts and weights must be >= 0")
        spill += w * (float(nb) ** presence_exponent if nb > 0 else 0.0)
    return total + spillover * spill


def concession_response(concession: float, platform_size: int,
                        concession_base: float = 1.0,
                        concession_exponent: float = 0.5,
                        platform_boost: float = 0.25) -> float:
    """Strictly increasing, strictly concave response to a price concession,
    amplified by platform size."""
    if platform_size < 1:
        raise ValueError("platform size must be >= 1")
    if concession < 0:
        raise ValueError("concession must be >= 0")
    return (concession_base + concession) ** concession_exponent * \
        (1.0 + platform_boost * math.log(platform_size))


def attractiveness(efficiency: float, presence: float, response: float) -> float:
    """Efficiency-scaled product of presence and concession response."""
    if efficiency <= 0:
        raise ValueError("efficiency must be > 0")
    if presence < 0 or response <= 0:
        raise ValueError("presence must be >= 0 and response > 0")
    return efficiency * presence * response


def capture_shares(attract, branches, listings: float) -> np.ndarray:
    """Proportional listings capture with zero-branch exclusion.

    Firms with no branches are removed from both numerator and denominator,
    so active firms split the full listings pool.  All-zero attractiveness
    yields all-zero shares.
    """
    r = np.asarray(attract, dtype=float)
    n = np.asarray(branches)
    if np.any(r < 0):
        raise ValueError("attractiveness must be >= 0")
    if listings <= 0:
        raise ValueError("listings must be > 0")
    active = n > 0
    denom = float(r[active].sum())
    shares = np.zeros_like(r)
    if denom > 0:
        shares[active] = r[active] / denom * listings
    return shares


def platform_coverage(shares: np.ndarray, membership: list[list[int]]) -> np.ndarray:
    """Sum member shares per platform per segment.

    `membership` must partition firm indices 0..N-1.
    """
    shares = np.atleast_2d(np.asarray(shares, dtype=float))
    n = shares.shape[0]
    flat = [i for group in membership for i in group]
    if sorted(flat) != list(range(n)):
        raise ValueError("membership must partition the firm indices")
    cov = np.zeros((len(membership), shares.shape[1]))
    for p, group in enumerate(membership):
        for i in group:
            cov[p] += shares[i]
    return cov


HHI_BANDS = ((1000.0, "low"), (2500.0, "moderate"), (float("inf"), "high"))


def hhi(shares_percent) -> tuple[float, str]:
    """Herfindahl-Hirschman index of percentage shares, with its band label.

    Band edges are inclusive on the upper end: low <= 1000 < moderate <= 2500
    < high <= 10000.
    """
    s = np.asarray(shares_percent, dtype=float)
    if np.any(s < 0):
        raise ValueError("shares must be >= 0")
    if abs(s.sum() - 100.0) > 1e-9:
        raise ValueError("shares must sum to 100")
    value = float(np.sum(s * s))
    for edge, label in HHI_BANDS:
        if value <= edge:
            return value, label
    raise AssertionError("unreachable")


@dataclass
class MarketOutcome:
    """Everything derived from one strategy profile."""

    presence: np.ndarray       # (N, M)
    response: np.ndarray       # (N, M)
    attract: np.ndarray        # (N, M)
    share: np.ndarray          # (N, M)
    coverage: np.ndarray       # (P, M)
    alloc_local: np.ndarray    # (P, M)
    alloc_global: np.ndarray   # (P, M)
    transactions: np.ndarray   # (N, M)
    prices: np.ndarray         # (N, M)
    cost: np.ndarray           # (N,)
    profit: np.ndarray         # (N,)
    saturated: bool
    platform_ids: np.ndarray   # (N,)
    welfare: WelfareReport

    @property
    def total_transactions(self) -> np.ndarray:
        return self.transactions.sum(axis=1)

    def segment_hhi(self, segment: int) -> tuple[float, str] | None:
        """Concentration of listing capture in one segment, None when empty."""
        s = self.share[:, segment]
        tot = s.sum()
        if tot <= 0:
            return None
        return hhi(s / tot * 100.0)


def evaluate(config: MarketConfig, profile: StrategyProfile,
             psize_override=None) -> MarketOutcome:
    """Full market outcome for one profile via the active kernel backend."""
    profile.validate(config)
    pm = kernels.pack(config)
    raw = kernels.eval_profile(pm, profile.branches, profile.concessions,
                               psize_override=psize_override)
    prices = config.commission * (config.base_price[None, :] - profile.concessions)
    welfare = welfare_decompose(
        transactions=raw["transactions"], concessions=profile.concessions,
        base_price=config.base_price, gross_benefit=config.gross_benefit,
        reserve_utility=config.reserve_utility, commission=config.commission,
        total_cost=float(raw["cost"].sum()))
    return MarketOutcome(
        presence=raw["presence"], response=raw["response"], attract=raw["attract"],
        share=raw["share"], coverage=raw["coverage"],
        alloc_local=raw["alloc_local"], alloc_global=raw["alloc_global"],
        transactions=raw["transactions"], prices=prices,
        cost=raw["cost"], profit=raw["profit"], saturated=raw["saturated"],
        platform_ids=pm.pid, welfare=welfare)
