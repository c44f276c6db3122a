"""Prices, costs, profits, and the welfare decomposition."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


def per_transaction_price(commission: float, base_price: float,
                          concession: float) -> float:
    """Intermediary revenue per transaction: commission on the net sale price."""
    if concession >= base_price:
        raise ValueError("concession must stay below the base price")
    if concession < 0:
        raise ValueError("concession must be >= 0")
    return commission * (base_price - concession)


def segment_cost(branches: int, entry_cost: float, branch_cost: float) -> float:
    """Entry cost when active plus linear per-branch cost."""
    if branches < 0:
        raise ValueError("branch count must be >= 0")
    if branches == 0:
        return 0.0
    return entry_cost + branch_cost * branches


def firm_cost(branches_row, entry_costs, branch_cost: float,
              global_convexity: float) -> float:
    """Total cost across segments plus the convex firm-wide branch term."""
    total = 0.0
    n_total = 0
    for n, fc in zip(branches_row, entry_costs):
        total += segment_cost(int(n), fc, branch_cost)
        n_total += int(n)
    return total + global_convexity * float(n_total) ** 2


def profit_vector(prices, transactions, firm_costs) -> np.ndarray:
    """Per-firm profit: price-weighted transactions minus total costs."""
    prices = np.asarray(prices, dtype=float)
    q = np.asarray(transactions, dtype=float)
    return (prices * q).sum(axis=1) - np.asarray(firm_costs, dtype=float)


@dataclass
class WelfareReport:
    """Per-segment and total surplus accounting.

    The identity buyer + seller + fees - cost == total holds by construction;
    `accounting_residual` reports the numerical slack.
    """

    buyer_surplus: np.ndarray    # (M,)
    seller_surplus: np.ndarray   # (M,)
    fee_revenue: np.ndarray      # (M,)
    total_cost: float
    total_welfare: float
    negative_seller_surplus: bool  # some transaction paid sellers below reserve

    @property
    def buyer_total(self) -> float:
        return float(self.buyer_surplus.sum())

    @property
    def seller_total(self) -> float:
        return float(self.seller_surplus.sum())

    @property
    def fee_total(self) -> float:
        return float(self.fee_revenue.sum())

    @property
    def accounting_residual(self) -> float:
        return (self.buyer_total + self.seller_total + self.fee_total
                - self.total_cost - self.total_welfare)


def welfare_decompose(transactions, concessions, base_price, gross_benefit,
                      reserve_utility, commission: float,
                      total_cost: float) -> WelfareReport:
    """Split realized surplus into buyer, seller, and fee components.

    Buyer surplus per transaction is the gross benefit net of the price paid;
    sellers receive the net price less commission, relative to their reserve.
    """
    q = np.asarray(transactions, dtype=float)
    c = np.asarray(concessions, dtype=float)
    mu = np.asarray(base_price, dtype=float)[None, :]
    v = np.asarray(gross_benefit, dtype=float)[None, :]
    r = np.asarray(reserve_utility, dtype=float)[None, :]
    if np.any(v <= r):
        warnings.warn("gross benefit does not exceed reserve utility in some "
                      "segment; welfare signs are not meaningful", stacklevel=2)

    net = mu - c
    buyer = (q * (v - net)).sum(axis=0)
    seller_cell = (1.0 - commission) * net - r
    seller = (q * seller_cell).sum(axis=0)
    fees = (q * commission * net).sum(axis=0)
    total = float((q * (v - r)).sum() - total_cost)
    return WelfareReport(
        buyer_surplus=buyer, seller_surplus=seller, fee_revenue=fees,
        total_cost=total_cost, total_welfare=total,
        negative_seller_surplus=bool(np.any((q > 0) & (seller_cell < 0))))
