"""Named comparative-statics experiments.

Each experiment re-solves the equilibrium before and after a shock (pinning
the same initial profile and sweep order so the comparison is meaningful),
verifies the relevant behavioral assumptions on the solved pair, and then
checks every directional claim that is conditional on those assumptions.
Claims whose assumptions fail are reported not_applicable, never as failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import MarketConfig, StrategyProfile
from .solver import (
    EquilibriumResult,
    SolverSettings,
    check_dominance,
    check_large_firm_dominance,
    classify_market_modularity,
    dominance_verdict,
    iterated_best_response,
)
from .market import evaluate

DIRECTION_TOL = 1e-9

#: model results -> the experiment that exercises each of them
RESULT_EXPERIMENTS = {
    "offline_expansion": "efficiency_shock",
    "simultaneous_efficiency": "group_efficiency_shock",
    "platform_consolidation": "consolidation_event",
    "coexistence": "coexistence_scan",
    "local_global_segmentation": "searcher_shock",
    "efficiency_welfare": "efficiency_shock/welfare",
    "simultaneous_welfare": "group_efficiency_shock/welfare",
    "consolidation_welfare": "consolidation_event/welfare",
}


@dataclass
class Claim:
    claim_id: str
    verdict: str                 # holds | fails | not_applicable
    conditions: tuple[str, ...]  # assumption requirements, "!" negates
    detail: str = ""


@dataclass
class ExperimentReport:
    scenario: str
    experiment: str
    pre: EquilibriumResult
    post: EquilibriumResult
    assumptions: dict
    claims: list[Claim]
    welfare_delta: dict[str, float]
    extra: dict = field(default_factory=dict)

    def claim(self, claim_id: str) -> Claim:
        for c in self.claims:
            if c.claim_id == claim_id:
                return c
        raise KeyError(claim_id)

    def failed_claims(self) -> list[Claim]:
        return [c for c in self.claims if c.verdict == "fails"]


def _conditions_met(conditions: tuple[str, ...], assumptions: dict) -> bool:
    for cond in conditions:
        negate = cond.startswith("!")
        key = cond.lstrip("!")
        if "=" in key:
            key, want = key.split("=", 1)
            ok = assumptions.get(key) == want
        else:
            ok = bool(assumptions.get(key))
        if negate:
            ok = not ok
        if not ok:
            return False
    return True


def _claim(claims: list[Claim], claim_id: str, conditions: tuple[str, ...],
           assumptions: dict, satisfied: bool, detail: str = "") -> None:
    if not _conditions_met(conditions, assumptions):
        claims.append(Claim(claim_id, "not_applicable", conditions, detail))
    else:
        claims.append(Claim(claim_id, "holds" if satisfied else "fails",
                            conditions, detail))


def _weakly_up(post, pre, tol: float = DIRECTION_TOL) -> bool:
    return bool(np.all(np.asarray(post) >= np.asarray(pre) - tol))


def _weakly_down(post, pre, tol: float = DIRECTION_TOL) -> bool:
    return bool(np.all(np.asarray(post) <= np.asarray(pre) + tol))


def _welfare_delta(pre: EquilibriumResult, post: EquilibriumResult
                   ) -> dict[str, float]:
    wp, wq = pre.outcome.welfare, post.outcome.welfare
    return {
        "buyer": wq.buyer_total - wp.buyer_total,
        "seller": wq.seller_total - wp.seller_total,
        "fees": wq.fee_total - wp.fee_total,
        "cost": wq.total_cost - wp.total_cost,
        "total": wq.total_welfare - wp.total_welfare,
    }


def _base_assumptions(config_pre: MarketConfig, config_post: MarketConfig,
                      pre: EquilibriumResult, post: EquilibriumResult,
                      expanding: set[int]) -> dict:
    assumptions: dict = {}
    assumptions["modularity"] = classify_market_modularity(config_pre, pre.profile)
    dom = check_dominance(config_pre, config_post, pre.profile, post.profile,
                          expanding)
    assumptions["dominance_by_firm"] = dom
    assumptions["dominance"] = dominance_verdict(dom)
    alpha = [f.efficiency for f in config_post.firms]
    if alpha.count(max(alpha)) == 1:
        overall, per_seg = check_large_firm_dominance(
            config_post, pre.profile, post.profile, pre.outcome.transactions)
        assumptions["large_firm_dominance"] = overall
        assumptions["large_firm_dominance_by_segment"] = per_seg
    else:
        assumptions["large_firm_dominance"] = False
        assumptions["large_firm_dominance_by_segment"] = None
        assumptions["large_firm_dominance_note"] = "tied efficiency maximum"
    assumptions["saturation"] = bool(pre.outcome.saturated or
                                     post.outcome.saturated)
    return assumptions


# --------------------------------------------------------------------------
# Experiments
# --------------------------------------------------------------------------

def efficiency_shock(config: MarketConfig, firm: int, delta: float,
                     scenario: str = "custom",
                     settings: SolverSettings | None = None,
                     initial: StrategyProfile | None = None
                     ) -> ExperimentReport:
    """Raise one firm's efficiency and check the offline-expansion claims."""
    if delta < 0:
        raise ValueError("efficiency shock must be >= 0")
    settings = settings or SolverSettings()
    post_config = config.with_efficiency({firm: delta})
    pre = iterated_best_response(config, initial, settings)
    post = iterated_best_response(post_config, initial, settings)

    assumptions = _base_assumptions(config, post_config, pre, post, {firm})
    rivals = [k for k in range(config.num_intermediaries) if k != firm]
    claims: list[Claim] = []

    _claim(claims, "branches_up", (), assumptions,
           _weakly_up(post.profile.branches[firm], pre.profile.branches[firm]),
           detail=f"firm {firm} branches {pre.profile.branches[firm]}"
                  f" -> {post.profile.branches[firm]}")
    _claim(claims, "attractiveness_up", ("dominance",), assumptions,
           _weakly_up(post.outcome.attract[firm], pre.outcome.attract[firm]))
    _claim(claims, "share_up", ("dominance",), assumptions,
           _weakly_up(post.outcome.share[firm], pre.outcome.share[firm]))
    _claim(claims, "own_concession_down", ("modularity=submodular",), assumptions,
           _weakly_down(post.profile.concessions[firm],
                        pre.profile.concessions[firm]))
    if rivals:
        _claim(claims, "rival_concessions_up", ("modularity=submodular",),
               assumptions,
               _weakly_up(post.profile.concessions[rivals],
                          pre.profile.concessions[rivals]))
    else:
        claims.append(Claim("rival_concessions_up", "not_applicable",
                            ("modularity=submodular",), "no rivals"))
    _claim(claims, "profit_up", (), assumptions,
           post.outcome.profit[firm] >= pre.outcome.profit[firm] - DIRECTION_TOL,
           detail=f"profit {pre.outcome.profit[firm]:.6g}"
                  f" -> {post.outcome.profit[firm]:.6g}")

    return ExperimentReport(
        scenario=scenario, experiment="efficiency_shock", pre=pre, post=post,
        assumptions=assumptions, claims=claims,
        welfare_delta=_welfare_delta(pre, post),
        extra={"firm": firm, "delta": delta})


def group_efficiency_shock(config: MarketConfig, members: set[int],
                           delta: float, scenario: str = "custom",
                           settings: SolverSettings | None = None
                           ) -> ExperimentReport:
    """Simultaneous efficiency increase for a set of firms.

    Also solves the matching single-firm counterfactuals: the members'
    concession cuts must be smaller than when each member is shocked alone.
    """
    if not members:
        raise ValueError("the shocked set must be non-empty")
    if delta < 0:
        raise ValueError("efficiency shock must be >= 0")
    settings = settings or SolverSettings()
    members = set(members)
    post_config = config.with_efficiency({i: delta for i in members})
    pre = iterated_best_response(config, None, settings)
    post = iterated_best_response(post_config, None, settings)

    singles = {
        i: iterated_best_response(config.with_efficiency({i: delta}), None,
                                  settings)
        for i in sorted(members)
    }

    assumptions = _base_assumptions(config, post_config, pre, post, members)
    outsiders = [k for k in range(config.num_intermediaries) if k not in members]
    member_list = sorted(members)
    claims: list[Claim] = []
    cond = ("modularity=submodular", "dominance")

    _claim(claims, "members_branches_up", cond, assumptions,
           _weakly_up(post.profile.branches[member_list],
                      pre.profile.branches[member_list]))
    _claim(claims, "members_transactions_up", cond, assumptions,
           _weakly_up(post.outcome.transactions[member_list],
                      pre.outcome.transactions[member_list]))
    _claim(claims, "members_concessions_down", cond, assumptions,
           _weakly_down(post.profile.concessions[member_list],
                        pre.profile.concessions[member_list]))
    moderated = all(
        np.all(post.profile.concessions[i] >=
               singles[i].profile.concessions[i] - DIRECTION_TOL)
        for i in member_list)
    _claim(claims, "concession_cuts_moderated", cond, assumptions, moderated,
           detail="joint-shock concessions at least the single-shock levels")
    if outsiders:
        _claim(claims, "outsiders_branches_down", cond, assumptions,
               _weakly_down(post.profile.branches[outsiders],
                            pre.profile.branches[outsiders]))
        _claim(claims, "outsiders_transactions_down", cond, assumptions,
               _weakly_down(post.outcome.transactions[outsiders],
                            pre.outcome.transactions[outsiders]))
    else:
        for cid in ("outsiders_branches_down", "outsiders_transactions_down"):
            claims.append(Claim(cid, "not_applicable", cond, "no outsiders"))

    return ExperimentReport(
        scenario=scenario, experiment="group_efficiency_shock", pre=pre,
        post=post, assumptions=assumptions, claims=claims,
        welfare_delta=_welfare_delta(pre, post),
        extra={"members": member_list, "delta": delta,
               "singles": {i: singles[i].profile for i in member_list}})


def _member_platform_stats(config: MarketConfig, result_outcome,
                           members: list[int]):
    """Coverage and allocation of each member's own platform, per segment."""
    pid = config.platform_ids()
    cov = np.array([result_outcome.coverage[pid[i]] for i in members])
    alloc = np.array([
        result_outcome.alloc_local[pid[i]] + result_outcome.alloc_global[pid[i]]
        for i in members])
    return cov, alloc


def consolidation_event(config: MarketConfig, members: set[int],
                        scenario: str = "custom",
                        settings: SolverSettings | None = None,
                        label: str = "merged") -> ExperimentReport:
    """Merge the members' platforms and check the consolidation claims.

    The strategies-fixed phase re-evaluates the pre-equilibrium profile under
    the merged membership: member concession response, attractiveness,
    platform coverage, and searcher allocation must all weakly rise, which
    holds without any behavioral assumption.  The equilibrium phase re-solves
    and checks transactions, profits, and the concession direction.
    """
    settings = settings or SolverSettings()
    members = sorted(set(members))
    pid = config.platform_ids()
    if len({int(pid[i]) for i in members}) < 2:
        raise ValueError("consolidation must span at least two distinct platforms")
    post_config = config.with_platform_labels({i: label for i in members})

    pre = iterated_best_response(config, None, settings)
    post = iterated_best_response(post_config, None, settings)

    fixed = evaluate(post_config, pre.profile)
    pre_cov, pre_alloc = _member_platform_stats(config, pre.outcome, members)
    fix_cov, fix_alloc = _member_platform_stats(post_config, fixed, members)

    assumptions = _base_assumptions(config, post_config, pre, post, set(members))
    claims: list[Claim] = []

    _claim(claims, "fixed_response_up", (), assumptions,
           _weakly_up(fixed.response[members], pre.outcome.response[members]))
    _claim(claims, "fixed_attractiveness_up", (), assumptions,
           _weakly_up(fixed.attract[members], pre.outcome.attract[members]))
    _claim(claims, "fixed_coverage_up", (), assumptions,
           _weakly_up(fix_cov, pre_cov))
    _claim(claims, "fixed_allocation_up", (), assumptions,
           _weakly_up(fix_alloc, pre_alloc))
    _claim(claims, "fixed_share_up", (), assumptions,
           _weakly_up(fixed.share[members], pre.outcome.share[members]))
    _claim(claims, "fixed_transactions_up", ("!saturation",), assumptions,
           _weakly_up(fixed.transactions[members],
                      pre.outcome.transactions[members]))

    cond = ("modularity=submodular", "dominance")
    _claim(claims, "members_transactions_up", cond, assumptions,
           _weakly_up(post.outcome.transactions[members],
                      pre.outcome.transactions[members]))
    _claim(claims, "members_profit_up", cond, assumptions,
           _weakly_up(post.outcome.profit[members], pre.outcome.profit[members]))
    if assumptions["modularity"] == "submodular":
        direction_ok = _weakly_down(post.profile.concessions[members],
                                    pre.profile.concessions[members])
    elif assumptions["modularity"] == "supermodular":
        direction_ok = _weakly_up(post.profile.concessions[members],
                                  pre.profile.concessions[members])
    else:
        direction_ok = True
    _claim(claims, "concession_direction_per_modularity",
           ("!modularity=indeterminate",), assumptions, direction_ok)

    return ExperimentReport(
        scenario=scenario, experiment="consolidation_event", pre=pre, post=post,
        assumptions=assumptions, claims=claims,
        welfare_delta=_welfare_delta(pre, post),
        extra={"members": members, "fixed_outcome": fixed,
               "fixed_coverage": fix_cov, "pre_coverage": pre_cov,
               "fixed_allocation": fix_alloc, "pre_allocation": pre_alloc})


def searcher_shock(config: MarketConfig, segment: int, delta: float,
                   kind: str = "local", scenario: str = "custom",
                   settings: SolverSettings | None = None) -> ExperimentReport:
    """Raise one segment's searcher mass; compares local and global variants.

    The global twin of the shock is always solved so the report can test
    whether the top-efficiency firm expands more under global searchers.
    """
    if delta < 0:
        raise ValueError("searcher shock must be >= 0")
    if kind not in ("local", "global"):
        raise ValueError("searcher kind must be 'local' or 'global'")
    settings = settings or SolverSettings()
    pre = iterated_best_response(config, None, settings)
    variants = {
        k: iterated_best_response(config.with_searchers(segment, delta, k),
                                  None, settings)
        for k in ("local", "global")
    }
    post = variants[kind]

    alpha = np.array([f.efficiency for f in config.firms])
    top = int(np.argmax(alpha))
    inc = {k: v.profile.branches[:, segment] - pre.profile.branches[:, segment]
           for k, v in variants.items()}

    assumptions = _base_assumptions(
        config, config, pre, post,
        expanding=set(range(config.num_intermediaries)))
    claims: list[Claim] = []
    _claim(claims, "branches_up_in_segment", (), assumptions,
           _weakly_up(post.profile.branches[:, segment],
                      pre.profile.branches[:, segment]))
    others = [k for k in range(config.num_intermediaries) if k != top]
    top_leads = all(inc[kind][top] >= inc[kind][k] for k in others) \
        if others else True
    _claim(claims, "top_firm_expands_most", (), assumptions, top_leads,
           detail=f"increments {inc[kind].tolist()} (top firm {top})")
    _claim(claims, "global_expands_top_at_least_local", (), assumptions,
           bool(inc["global"][top] >= inc["local"][top]),
           detail=f"top increment global {int(inc['global'][top])}"
                  f" vs local {int(inc['local'][top])}")

    return ExperimentReport(
        scenario=scenario, experiment="searcher_shock", pre=pre, post=post,
        assumptions=assumptions, claims=claims,
        welfare_delta=_welfare_delta(pre, post),
        extra={"segment": segment, "delta": delta, "kind": kind,
               "increments": inc,
               "variants": {k: v.profile for k, v in variants.items()}})


def coexistence_scan(config: MarketConfig, alpha_values, cost_multipliers,
                     scenario: str = "custom",
                     settings: SolverSettings | None = None
                     ) -> ExperimentReport:
    """Sweep the top firm's efficiency and rivals' costs; record coexistence.

    At every grid point the most efficient firm must weakly lead in total
    branches and profit while at least one rival stays active somewhere.
    """
    settings = settings or SolverSettings()
    if config.num_intermediaries < 2:
        raise ValueError("coexistence needs at least two firms")
    base = iterated_best_response(config, None, settings)
    points = []
    lead_ok = True
    coexist_ok = True
    for a in alpha_values:
        for cmult in cost_multipliers:
            firms = []
            for i, f in enumerate(config.firms):
                if i == 0:
                    firms.append(f.__class__(
                        efficiency=a, platform=f.platform, entry_cost=f.entry_cost,
                        branch_cost=f.branch_cost,
                        global_convexity=f.global_convexity))
                else:
                    firms.append(f.__class__(
                        efficiency=f.efficiency, platform=f.platform,
                        entry_cost=tuple(x * cmult for x in f.entry_cost),
                        branch_cost=f.branch_cost * cmult,
                        global_convexity=f.global_convexity))
            point_cfg = config._replace(firms=tuple(firms))
            res = iterated_best_response(point_cfg, None, settings)
            alpha = np.array([f.efficiency for f in point_cfg.firms])
            top = int(np.argmax(alpha))
            others = [k for k in range(point_cfg.num_intermediaries) if k != top]
            leads = all(
                res.profile.branches[top].sum() >= res.profile.branches[k].sum()
                and res.outcome.profit[top] >= res.outcome.profit[k] - DIRECTION_TOL
                for k in others)
            coexists = any(res.profile.branches[k].sum() > 0 for k in others)
            lead_ok &= leads
            coexist_ok &= coexists
            points.append({
                "alpha": float(a), "cost_multiplier": float(cmult),
                "top_leads": leads, "rivals_active": coexists,
                "branches": res.profile.branches.copy(),
                "profit": res.outcome.profit.copy()})

    assumptions = {"modularity": classify_market_modularity(config, base.profile),
                   "saturation": bool(base.outcome.saturated)}
    claims = [
        Claim("efficient_firm_leads", "holds" if lead_ok else "fails", (),
              f"{len(points)} grid points"),
        Claim("no_monopolization", "holds" if coexist_ok else "fails", (),
              f"{len(points)} grid points"),
    ]
    return ExperimentReport(
        scenario=scenario, experiment="coexistence_scan", pre=base, post=base,
        assumptions=assumptions, claims=claims,
        welfare_delta={k: 0.0 for k in ("buyer", "seller", "fees", "cost", "total")},
        extra={"points": points})


def welfare_shock_report(report: ExperimentReport) -> list[Claim]:
    """Assumption-routed welfare verdicts for a solved experiment.

    With large-firm dominance the seller and total surpluses must not fall;
    without it the buyer surplus must not fall.  The other components stay
    informational (their deltas are already in the report).  Saturation of
    the match technology voids the convexity step, so everything becomes
    informational.
    """
    assumptions = report.assumptions
    delta = report.welfare_delta
    claims: list[Claim] = []
    base = ("modularity=submodular", "dominance", "!saturation")
    _claim(claims, "seller_surplus_up", base + ("large_firm_dominance",),
           assumptions, delta["seller"] >= -DIRECTION_TOL,
           detail=f"d_seller={delta['seller']:.6g}")
    _claim(claims, "total_welfare_up", base + ("large_firm_dominance",),
           assumptions, delta["total"] >= -DIRECTION_TOL,
           detail=f"d_total={delta['total']:.6g}")
    _claim(claims, "buyer_surplus_up", base + ("!large_firm_dominance",),
           assumptions, delta["buyer"] >= -DIRECTION_TOL,
           detail=f"d_buyer={delta['buyer']:.6g}")
    report.claims.extend(claims)
    return claims
