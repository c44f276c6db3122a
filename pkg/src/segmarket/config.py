"""Market configuration: domain types, validation, and JSON loading.

A market is a set of geographic segments populated by intermediary firms.
Each firm chooses, per segment, an integer branch count and a real-valued
price concession.  Everything downstream (shares, searcher allocation,
transactions, profits, welfare) is a pure function of the configuration
and one strategy profile.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

INDEPENDENT = "independent"


class ConfigError(ValueError):
    """Raised when a configuration violates the published schema."""


@dataclass(frozen=True)
class FormParams:
    """Parameters of the three functional forms.

    presence:   h(n) = n ** presence_exponent, with h(0) = 0.
    concession: psi(c, p) = (concession_base + c) ** concession_exponent
                * (1 + platform_boost * ln p).
    matching:   tau(x) = min(match_cap, match_rate * x ** match_exponent),
                per segment (scalars broadcast).
    """

    presence_exponent: float = 1.0
    concession_base: float = 1.0
    concession_exponent: float = 0.5
    platform_boost: float = 0.25
    match_rate: tuple[float, ...] = (0.01,)
    match_exponent: tuple[float, ...] = (1.0,)
    match_cap: tuple[float, ...] = (1.0,)

    def validate(self, num_segments: int) -> None:
        if not 0.0 < self.presence_exponent <= 1.0:
            raise ConfigError("forms.presence_exponent must be in (0, 1]")
        if self.concession_base <= 0.0:
            raise ConfigError("forms.concession_base must be > 0")
        if not 0.0 < self.concession_exponent < 1.0:
            raise ConfigError("forms.concession_exponent must be in (0, 1)")
        if self.platform_boost < 0.0:
            raise ConfigError("forms.platform_boost must be >= 0")
        for name in ("match_rate", "match_exponent", "match_cap"):
            vals = getattr(self, name)
            if len(vals) not in (1, num_segments):
                raise ConfigError(
                    f"forms.{name} must be a scalar or one value per segment")
            if any(v <= 0.0 for v in vals):
                raise ConfigError(f"forms.{name} entries must be > 0")

    def per_segment(self, name: str, num_segments: int) -> np.ndarray:
        vals = getattr(self, name)
        if len(vals) == 1:
            return np.full(num_segments, vals[0])
        return np.asarray(vals, dtype=float)


@dataclass(frozen=True)
class IntermediaryProfile:
    """One firm: efficiency, cost structure, and platform membership."""

    efficiency: float
    platform: str = INDEPENDENT
    entry_cost: tuple[float, ...] = (0.0,)   # per-segment fixed entry cost
    branch_cost: float = 0.0                 # per-branch cost
    global_convexity: float = 0.0            # coefficient of (total branches)^2

    def validate(self, idx: int, num_segments: int) -> None:
        if self.efficiency <= 0.0:
            raise ConfigError(f"firms[{idx}].efficiency must be > 0")
        if len(self.entry_cost) not in (1, num_segments):
            raise ConfigError(
                f"firms[{idx}].entry_cost must be a scalar or one value per segment")
        if any(v < 0.0 for v in self.entry_cost) or self.branch_cost < 0.0 \
                or self.global_convexity < 0.0:
            raise ConfigError(f"firms[{idx}] cost parameters must be >= 0")
        if not self.platform:
            raise ConfigError(f"firms[{idx}].platform must be a non-empty label")


@dataclass
class MarketConfig:
    """Full market primitives for N firms on M segments."""

    base_price: np.ndarray        # mu, (M,)
    listings: np.ndarray          # L, (M,)
    gross_benefit: np.ndarray     # v, (M,)
    reserve_utility: np.ndarray   # r, (M,)
    local_searchers: np.ndarray   # (M,)
    global_searchers: np.ndarray  # (M,)
    adjacency: tuple[tuple[tuple[int, float], ...], ...]  # per segment: ((j, w), ...)
    spillover: float              # gamma
    commission: float             # beta, in (0, 1)
    firms: tuple[IntermediaryProfile, ...]
    forms: FormParams = field(default_factory=FormParams)
    branch_cap: np.ndarray | None = None      # (N, M) int
    concession_cap: np.ndarray | None = None  # (N, M) float

    def __post_init__(self):
        m = len(self.base_price)
        n = len(self.firms)
        for name in ("base_price", "listings", "gross_benefit", "reserve_utility",
                     "local_searchers", "global_searchers"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (m,):
                raise ConfigError(f"segments.{name} must have one value per segment")
            setattr(self, name, arr)
        if self.branch_cap is None:
            self.branch_cap = np.full((n, m), 3, dtype=np.int64)
        else:
            self.branch_cap = np.asarray(self.branch_cap, dtype=np.int64)
            if self.branch_cap.shape != (n, m):
                raise ConfigError("branch_cap must have shape (firms, segments)")
        if self.concession_cap is None:
            self.concession_cap = 0.3 * np.broadcast_to(self.base_price, (n, m)).copy()
        else:
            self.concession_cap = np.asarray(self.concession_cap, dtype=float)
            if self.concession_cap.shape != (n, m):
                raise ConfigError("concession_cap must have shape (firms, segments)")
        self.validate()

    # ----- sizes -----
    @property
    def num_segments(self) -> int:
        return len(self.base_price)

    @property
    def num_intermediaries(self) -> int:
        return len(self.firms)

    def validate(self) -> None:
        m, n = self.num_segments, self.num_intermediaries
        if m < 1:
            raise ConfigError("segments: at least one segment required")
        if n < 1:
            raise ConfigError("firms: at least one intermediary required")
        if np.any(self.base_price <= 0.0):
            raise ConfigError("segments.base_price must be > 0")
        if np.any(self.listings <= 0.0):
            raise ConfigError("segments.listings must be > 0")
        if np.any(self.local_searchers < 0.0) or np.any(self.global_searchers < 0.0):
            raise ConfigError("segments searcher masses must be >= 0")
        if len(self.adjacency) != m:
            raise ConfigError("segments.adjacency must list neighbors for every segment")
        for i, nbrs in enumerate(self.adjacency):
            for j, w in nbrs:
                if not 0 <= j < m:
                    raise ConfigError(f"segments.adjacency[{i}]: neighbor {j} out of range")
                if j == i:
                    raise ConfigError(
                        f"segments.adjacency[{i}]: a segment cannot neighbor itself")
                if w < 0.0:
                    raise ConfigError(f"segments.adjacency[{i}]: weights must be >= 0")
            if len({j for j, _ in nbrs}) != len(nbrs):
                raise ConfigError(f"segments.adjacency[{i}]: duplicate neighbor index")
        if self.spillover < 0.0:
            raise ConfigError("spillover must be >= 0")
        if not 0.0 < self.commission < 1.0:
            raise ConfigError("commission must be in (0, 1)")
        self.forms.validate(m)
        for idx, firm in enumerate(self.firms):
            firm.validate(idx, m)
        if np.any(self.branch_cap < 1):
            raise ConfigError("branch_cap entries must be >= 1")
        if np.any(self.concession_cap < 0.0):
            raise ConfigError("concession_cap entries must be >= 0")
        if np.any(self.concession_cap >= self.base_price[None, :]):
            raise ConfigError(
                "concession_cap must stay below base_price so net prices are positive")

    # ----- platform structure -----
    def platform_ids(self) -> np.ndarray:
        """Integer platform index per firm, in order of first appearance.

        Firms labelled "independent" always form singleton platforms.
        """
        ids = np.empty(self.num_intermediaries, dtype=np.int64)
        seen: dict[str, int] = {}
        nxt = 0
        for i, firm in enumerate(self.firms):
            if firm.platform == INDEPENDENT:
                ids[i] = nxt
                nxt += 1
            else:
                if firm.platform not in seen:
                    seen[firm.platform] = nxt
                    nxt += 1
                ids[i] = seen[firm.platform]
        return ids

    def platform_sizes(self) -> np.ndarray:
        """|P(i)| per firm."""
        ids = self.platform_ids()
        counts = np.bincount(ids)
        return counts[ids].astype(float)

    def platform_members(self) -> list[list[int]]:
        ids = self.platform_ids()
        groups: list[list[int]] = [[] for _ in range(int(ids.max()) + 1)]
        for i, p in enumerate(ids):
            groups[int(p)].append(i)
        return groups

    # ----- shock helpers (return modified copies) -----
    def with_efficiency(self, deltas: dict[int, float]) -> "MarketConfig":
        firms = list(self.firms)
        for i, d in deltas.items():
            f = firms[i]
            firms[i] = IntermediaryProfile(
                efficiency=f.efficiency + d, platform=f.platform,
                entry_cost=f.entry_cost, branch_cost=f.branch_cost,
                global_convexity=f.global_convexity)
        return self._replace(firms=tuple(firms))

    def with_searchers(self, segment: int, delta: float, kind: str) -> "MarketConfig":
        if kind == "local":
            arr = self.local_searchers.copy()
            arr[segment] += delta
            return self._replace(local_searchers=arr)
        if kind == "global":
            arr = self.global_searchers.copy()
            arr[segment] += delta
            return self._replace(global_searchers=arr)
        raise ConfigError("searcher kind must be 'local' or 'global'")

    def with_platform_labels(self, labels: dict[int, str]) -> "MarketConfig":
        firms = list(self.firms)
        for i, lab in labels.items():
            f = firms[i]
            firms[i] = IntermediaryProfile(
                efficiency=f.efficiency, platform=lab,
                entry_cost=f.entry_cost, branch_cost=f.branch_cost,
                global_convexity=f.global_convexity)
        return self._replace(firms=tuple(firms))

    def _replace(self, **changes) -> "MarketConfig":
        kwargs = dict(
            base_price=self.base_price, listings=self.listings,
            gross_benefit=self.gross_benefit, reserve_utility=self.reserve_utility,
            local_searchers=self.local_searchers, global_searchers=self.global_searchers,
            adjacency=self.adjacency, spillover=self.spillover,
            commission=self.commission, firms=self.firms, forms=self.forms,
            branch_cap=self.branch_cap.copy(), concession_cap=self.concession_cap.copy())
        kwargs.update(changes)
        return MarketConfig(**kwargs)

    # ----- serialization -----
    def to_dict(self) -> dict:
        """Emit the config with every default filled in (echo form)."""
        forms = {
            "presence_exponent": self.forms.presence_exponent,
            "concession_base": self.forms.concession_base,
            "concession_exponent": self.forms.concession_exponent,
            "platform_boost": self.forms.platform_boost,
            "match_rate": list(self.forms.match_rate),
            "match_exponent": list(self.forms.match_exponent),
            "match_cap": list(self.forms.match_cap),
        }
        return {
            "segments": {
                "base_price": self.base_price.tolist(),
                "listings": self.listings.tolist(),
                "gross_benefit": self.gross_benefit.tolist(),
                "reserve_utility": self.reserve_utility.tolist(),
                "local_searchers": self.local_searchers.tolist(),
                "global_searchers": self.global_searchers.tolist(),
                "adjacency": [[[j, w] for j, w in nbrs] for nbrs in self.adjacency],
            },
            "firms": [
                {
                    "efficiency": f.efficiency,
                    "platform": f.platform,
                    "entry_cost": list(f.entry_cost),
                    "branch_cost": f.branch_cost,
                    "global_convexity": f.global_convexity,
                }
                for f in self.firms
            ],
            "spillover": self.spillover,
            "commission": self.commission,
            "forms": forms,
            "branch_cap": self.branch_cap.tolist(),
            "concession_cap": self.concession_cap.tolist(),
        }


@dataclass
class StrategyProfile:
    """Per-firm, per-segment branch counts and concessions."""

    branches: np.ndarray     # (N, M) int
    concessions: np.ndarray  # (N, M) float

    def __post_init__(self):
        self.branches = np.asarray(self.branches, dtype=np.int64)
        self.concessions = np.asarray(self.concessions, dtype=float)
        if self.branches.shape != self.concessions.shape or self.branches.ndim != 2:
            raise ConfigError("profile branches and concessions must share shape (N, M)")

    def validate(self, config: MarketConfig) -> None:
        n, m = config.num_intermediaries, config.num_segments
        if self.branches.shape != (n, m):
            raise ConfigError("profile shape does not match the configuration")
        if np.any(self.branches < 0) or np.any(self.branches > config.branch_cap):
            raise ConfigError("branches must lie in [0, branch_cap]")
        if np.any(self.concessions < 0.0) or \
                np.any(self.concessions > config.concession_cap + 1e-12):
            raise ConfigError("concessions must lie in [0, concession_cap]")

    def copy(self) -> "StrategyProfile":
        return StrategyProfile(self.branches.copy(), self.concessions.copy())

    @staticmethod
    def initial(config: MarketConfig) -> "StrategyProfile":
        """Default starting point: one branch everywhere, concessions at half cap."""
        n, m = config.num_intermediaries, config.num_segments
        return StrategyProfile(np.ones((n, m), dtype=np.int64),
                               0.5 * config.concession_cap.copy())


# --------------------------------------------------------------------------
# JSON loading with strict schema checking
# --------------------------------------------------------------------------

_SEGMENT_KEYS = {"base_price", "listings", "gross_benefit", "reserve_utility",
                 "local_searchers", "global_searchers", "adjacency"}
_FIRM_KEYS = {"efficiency", "platform", "entry_cost", "branch_cost",
              "global_convexity"}
_FORM_KEYS = {"presence_exponent", "concession_base", "concession_exponent",
              "platform_boost", "match_rate", "match_exponent", "match_cap"}
_TOP_KEYS = {"segments", "firms", "spillover", "commission", "forms",
             "branch_cap", "concession_cap"}


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key '{sorted(unknown)[0]}'")


def _as_list(value, m: int, key: str) -> list[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)] * m
    if isinstance(value, list) and len(value) == m:
        return [float(v) for v in value]
    raise ConfigError(f"{key} must be a number or a list with one entry per segment")


def config_from_dict(doc: dict) -> MarketConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be an object")
    _reject_unknown(doc, _TOP_KEYS, "config")
    for key in ("segments", "firms"):
        if key not in doc:
            raise ConfigError(f"config: missing required key '{key}'")

    seg = doc["segments"]
    if not isinstance(seg, dict):
        raise ConfigError("segments must be an object")
    _reject_unknown(seg, _SEGMENT_KEYS, "segments")
    for key in ("base_price", "listings"):
        if key not in seg:
            raise ConfigError(f"segments: missing required key '{key}'")
    mu_raw = seg["base_price"]
    if isinstance(mu_raw, list):
        m = len(mu_raw)
    else:
        m = len(seg["listings"]) if isinstance(seg["listings"], list) else 1
    mu = _as_list(mu_raw, m, "segments.base_price")
    listings = _as_list(seg["listings"], m, "segments.listings")
    gross = _as_list(seg.get("gross_benefit", [1.2 * x for x in mu]), m,
                     "segments.gross_benefit")
    reserve = _as_list(seg.get("reserve_utility", [0.2 * x for x in mu]), m,
                       "segments.reserve_utility")
    lam_l = _as_list(seg.get("local_searchers", 0.0), m, "segments.local_searchers")
    lam_g = _as_list(seg.get("global_searchers", 0.0), m, "segments.global_searchers")
    adj_raw = seg.get("adjacency", [[] for _ in range(m)])
    if not isinstance(adj_raw, list) or len(adj_raw) != m:
        raise ConfigError("segments.adjacency must list neighbors for every segment")
    adjacency = []
    for i, nbrs in enumerate(adj_raw):
        row = []
        for item in nbrs:
            if not (isinstance(item, list) and len(item) == 2):
                raise ConfigError(
                    f"segments.adjacency[{i}]: entries must be [neighbor, weight] pairs")
            row.append((int(item[0]), float(item[1])))
        adjacency.append(tuple(row))

    firms_raw = doc["firms"]
    if not isinstance(firms_raw, list) or not firms_raw:
        raise ConfigError("firms must be a non-empty list")
    firms = []
    for idx, fd in enumerate(firms_raw):
        if not isinstance(fd, dict):
            raise ConfigError(f"firms[{idx}] must be an object")
        _reject_unknown(fd, _FIRM_KEYS, f"firms[{idx}]")
        if "efficiency" not in fd:
            raise ConfigError(f"firms[{idx}]: missing required key 'efficiency'")
        entry = fd.get("entry_cost", 0.0)
        entry_list = _as_list(entry, m, f"firms[{idx}].entry_cost") \
            if isinstance(entry, list) else [float(entry)]
        firms.append(IntermediaryProfile(
            efficiency=float(fd["efficiency"]),
            platform=str(fd.get("platform", INDEPENDENT)),
            entry_cost=tuple(entry_list),
            branch_cost=float(fd.get("branch_cost", 0.0)),
            global_convexity=float(fd.get("global_convexity", 0.0)),
        ))
    n = len(firms)

    forms_raw = doc.get("forms", {})
    if not isinstance(forms_raw, dict):
        raise ConfigError("forms must be an object")
    _reject_unknown(forms_raw, _FORM_KEYS, "forms")

    def form_tuple(key, default):
        v = forms_raw.get(key, default)
        if isinstance(v, list):
            return tuple(float(x) for x in v)
        return (float(v),)

    forms = FormParams(
        presence_exponent=float(forms_raw.get("presence_exponent", 1.0)),
        concession_base=float(forms_raw.get("concession_base", 1.0)),
        concession_exponent=float(forms_raw.get("concession_exponent", 0.5)),
        platform_boost=float(forms_raw.get("platform_boost", 0.25)),
        match_rate=form_tuple("match_rate", 0.01),
        match_exponent=form_tuple("match_exponent", 1.0),
        match_cap=form_tuple("match_cap", 1.0),
    )

    def cap_matrix(key, default_fn):
        raw = doc.get(key)
        if raw is None:
            return default_fn()
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            return np.full((n, m), raw)
        arr = np.asarray(raw, dtype=float)
        if arr.shape != (n, m):
            raise ConfigError(f"{key} must be a scalar or an (firms x segments) matrix")
        return arr

    branch_cap = cap_matrix("branch_cap", lambda: np.full((n, m), 3.0))
    concession_cap = cap_matrix(
        "concession_cap", lambda: 0.3 * np.tile(np.asarray(mu), (n, 1)))

    return MarketConfig(
        base_price=np.asarray(mu), listings=np.asarray(listings),
        gross_benefit=np.asarray(gross), reserve_utility=np.asarray(reserve),
        local_searchers=np.asarray(lam_l), global_searchers=np.asarray(lam_g),
        adjacency=tuple(adjacency), spillover=float(doc.get("spillover", 0.0)),
        commission=float(doc.get("commission", 0.027)), firms=tuple(firms),
        forms=forms, branch_cap=branch_cap.astype(np.int64),
        concession_cap=concession_cap,
    )


def load_config(path: str | Path) -> MarketConfig:
    """Load, validate, and default-fill a market configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def welfare_primitives_ok(config: MarketConfig) -> bool:
    """True when gross benefit exceeds reserve utility in every segment."""
    return bool(np.all(config.gross_benefit > config.reserve_utility))
