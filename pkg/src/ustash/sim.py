"""Trace-driven simulator of the on-board stash protocol.

Requests are processed in sequence against a stash that starts empty.
A request whose consumed prefix is already stashed is a full hit and is
served over local WiFi. Otherwise the missing tail is downloaded
cooperatively: the stash takes a share x over its cellular link, the
user the rest over theirs, and after consumption the user-downloaded
part is pushed back so the whole consumed prefix ends up stashed.

Stashed fractions are contiguous prefixes of the content (users watch
from the start). There is no eviction: stash capacity is reported, not
enforced.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum

from .model import CostParams, NetworkParams
from .workload import ContentClass, Request, Trace


class PolicyKind(Enum):
    FIXED = "fixed"
    OPTIMAL = "optimal"
    NO_STASH = "nostash"
    ALL_STASH = "allstash"


@dataclass(frozen=True)
class SplitPolicy:
    """How the stash share of a cooperative download is chosen.

    x_min/x_max, when set, bound the stash share as fractions of the
    portion being downloaded (an advertised floor or marketing ceiling).
    """

    kind: PolicyKind
    x: float | None = None
    x_min: float | None = None
    x_max: float | None = None

    def __post_init__(self):
        if self.kind is PolicyKind.FIXED:
            if self.x is None or not 0 <= self.x <= 1:
                raise ValueError("Fixed policy needs x in [0, 1]")
        lo = 0.0 if self.x_min is None else self.x_min
        hi = 1.0 if self.x_max is None else self.x_max
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"need 0 <= x_min <= x_max <= 1, got ({self.x_min}, {self.x_max})")

    @classmethod
    def fixed(cls, x: float, x_min=None, x_max=None) -> "SplitPolicy":
        return cls(PolicyKind.FIXED, x=x, x_min=x_min, x_max=x_max)

    @classmethod
    def optimal(cls, x_min=None, x_max=None) -> "SplitPolicy":
        return cls(PolicyKind.OPTIMAL, x_min=x_min, x_max=x_max)

    @classmethod
    def no_stash(cls) -> "SplitPolicy":
        return cls(PolicyKind.NO_STASH)

    @classmethod
    def all_stash(cls) -> "SplitPolicy":
        return cls(PolicyKind.ALL_STASH)


class Classification(Enum):
    FULL_HIT = "full_hit"
    PARTIAL_HIT = "partial_hit"
    MISS = "miss"


class StashState:
    """Per-content stashed prefix fractions and the stored byte total."""

    def __init__(self):
        self._fractions: dict[str, float] = {}
        self.total_stored_mb = 0.0

    def fraction(self, content_id: str) -> float:
        return self._fractions.get(content_id, 0.0)

    def store(self, content_id: str, fraction: float, size_mb: float) -> None:
        """Raise the stashed prefix of a content; fractions never decrease."""
        old = self._fractions.get(content_id, 0.0)
        if fraction < old:
            raise ValueError(f"stash fraction cannot decrease ({old} -> {fraction})")
        self._fractions[content_id] = fraction
        self.total_stored_mb += (fraction - old) * size_mb

    def __len__(self) -> int:
        return len(self._fractions)


@dataclass(frozen=True)
class SimParams:
    """Network, cost, and accounting options for one run."""

    net: NetworkParams
    cost: CostParams
    # When False the stash neither serves hits nor accepts content; the
    # split policy alone decides who pays for each download.
    stash_enabled: bool = True
    # "consumed": a full hit takes view_ratio * size / omega_l.
    # "full_size": a full hit takes size / omega_l, matching the analytic
    # model's hit term exactly, for cross-validation runs.
    hit_time: str = "consumed"

    def __post_init__(self):
        if self.hit_time not in ("consumed", "full_size"):
            raise ValueError(f"unknown hit_time mode {self.hit_time!r}")


@dataclass(frozen=True)
class RequestOutcome:
    index: int
    content_id: str
    content_class: ContentClass
    view_ratio: float
    classification: Classification
    local_mb: float
    user_cellular_mb: float
    stash_cellular_mb: float
    completion_s: float
    user_cost_cents: float
    stash_cost_cents: float


@dataclass
class ClassCounts:
    requests: int = 0
    full_hits: int = 0
    partial_hits: int = 0
    misses: int = 0


@dataclass
class RunMetrics:
    total: int
    full_hits: int
    partial_hits: int
    misses: int
    hit_rate: float
    partial_hit_rate: float
    byte_hit_rate: float
    local_mb: float
    user_cellular_mb: float
    stash_cellular_mb: float
    requested_mb: float
    user_cost_cents: float
    stash_cost_cents: float
    mean_completion_s: float
    total_stored_mb: float
    hit_rate_series: list[tuple[int, float]] = field(default_factory=list)
    per_class: dict[str, ClassCounts] = field(default_factory=dict)

    def class_rate(self, content_class: ContentClass, which: str) -> float:
        """Per-class hit rate, e.g. class_rate(VIDEO, "full_hits")."""
        counts = self.per_class.get(content_class.value)
        if counts is None or counts.requests == 0:
            return 0.0
        return getattr(counts, which) / counts.requests

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "full_hits": self.full_hits,
            "partial_hits": self.partial_hits,
            "misses": self.misses,
            "hit_rate": self.hit_rate,
            "partial_hit_rate": self.partial_hit_rate,
            "byte_hit_rate": self.byte_hit_rate,
            "local_mb": self.local_mb,
            "user_cellular_mb": self.user_cellular_mb,
            "stash_cellular_mb": self.stash_cellular_mb,
            "requested_mb": self.requested_mb,
            "user_cost_cents": self.user_cost_cents,
            "stash_cost_cents": self.stash_cost_cents,
            "system_cost_cents": self.user_cost_cents + self.stash_cost_cents,
            "mean_completion_s": self.mean_completion_s,
            "total_stored_mb": self.total_stored_mb,
            "hit_rate_series": [[n, r] for n, r in self.hit_rate_series],
            "per_class": {
                cls: {"requests": c.requests, "full_hits": c.full_hits,
                      "partial_hits": c.partial_hits, "misses": c.misses}
                for cls, c in self.per_class.items()
            },
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def classify(stash: StashState, req: Request) -> tuple[Classification, float]:
    """Classify a request against the stash; returns the stashed fraction too."""
    f = stash.fraction(req.content_id)
    if f >= req.view_ratio:
        return Classification.FULL_HIT, f
    if f > 0.0:
        return Classification.PARTIAL_HIT, f
    return Classification.MISS, 0.0


def resolve_split(policy: SplitPolicy, remaining: float, net: NetworkParams) -> float:
    """Stash share (in view-fraction units) of a download of size `remaining`."""
    if not 0 < remaining <= 1:
        raise ValueError(f"remaining must be in (0, 1], got {remaining}")
    if policy.kind is PolicyKind.OPTIMAL:
        x = remaining * net.omega_b / (net.omega_u + net.omega_b)
    elif policy.kind is PolicyKind.FIXED:
        x = min(policy.x, remaining)
    elif policy.kind is PolicyKind.NO_STASH:
        x = 0.0
    else:  # ALL_STASH
        x = remaining
    if policy.x_min is not None:
        x = max(x, policy.x_min * remaining)
    if policy.x_max is not None:
        x = min(x, policy.x_max * remaining)
    return x


def process_request(stash: StashState, req: Request, size_mb: float,
                    content_class: ContentClass, policy: SplitPolicy,
                    params: SimParams) -> RequestOutcome:
    """Process one request, mutating the stash, and account for all bytes.

    Every request satisfies local + user + stash bytes = view_ratio * size.
    """
    net, cost = params.net, params.cost
    view = req.view_ratio

    if params.stash_enabled:
        classification, f = classify(stash, req)
    else:
        classification, f = Classification.MISS, 0.0

    if classification is Classification.FULL_HIT:
        served = size_mb if params.hit_time == "full_size" else view * size_mb
        return RequestOutcome(
            req.index, req.content_id, content_class, view, classification,
            local_mb=view * size_mb, user_cellular_mb=0.0, stash_cellular_mb=0.0,
            completion_s=served / net.omega_l, user_cost_cents=0.0, stash_cost_cents=0.0,
        )

    remaining = view - f
    x = resolve_split(policy, remaining, net)
    user_share = remaining - x
    local_time = f * size_mb / net.omega_l
    # Legs run in parallel; the slowest one completes the request.
    completion = max(local_time, user_share * size_mb / net.omega_u,
                     x * size_mb / net.omega_b)
    if params.stash_enabled:
        stash.store(req.content_id, view, size_mb)
    return RequestOutcome(
        req.index, req.content_id, content_class, view, classification,
        local_mb=f * size_mb,
        user_cellular_mb=user_share * size_mb,
        stash_cellular_mb=x * size_mb,
        completion_s=completion,
        user_cost_cents=cost.phi_u * user_share * size_mb,
        stash_cost_cents=cost.phi_b * x * size_mb,
    )


def run(trace: Trace, policy: SplitPolicy, params: SimParams,
        sample_interval: int = 1000,
        collect_outcomes: bool = False) -> RunMetrics | tuple[RunMetrics, list[RequestOutcome]]:
    """Run a trace against an initially empty stash and aggregate metrics.

    The cumulative full-hit rate is sampled every sample_interval requests.
    Deterministic: identical inputs give identical metrics.
    """
    stash = StashState()
    catalog = trace.catalog
    counts = {Classification.FULL_HIT: 0, Classification.PARTIAL_HIT: 0,
              Classification.MISS: 0}
    per_class: dict[str, ClassCounts] = {}
    local = user = stash_cell = requested = 0.0
    user_cost_total = stash_cost_total = completion_total = 0.0
    series: list[tuple[int, float]] = []
    outcomes: list[RequestOutcome] = []

    for i, req in enumerate(trace.requests, start=1):
        content_class, _, size_mb = catalog.resolve(req.content_id)
        outcome = process_request(stash, req, size_mb, content_class, policy, params)
        counts[outcome.classification] += 1
        cc = per_class.setdefault(content_class.value, ClassCounts())
        cc.requests += 1
        if outcome.classification is Classification.FULL_HIT:
            cc.full_hits += 1
        elif outcome.classification is Classification.PARTIAL_HIT:
            cc.partial_hits += 1
        else:
            cc.misses += 1
        local += outcome.local_mb
        user += outcome.user_cellular_mb
        stash_cell += outcome.stash_cellular_mb
        requested += req.view_ratio * size_mb
        user_cost_total += outcome.user_cost_cents
        stash_cost_total += outcome.stash_cost_cents
        completion_total += outcome.completion_s
        if collect_outcomes:
            outcomes.append(outcome)
        if sample_interval and i % sample_interval == 0:
            series.append((i, counts[Classification.FULL_HIT] / i))

    n = len(trace.requests)
    if sample_interval and (not series or series[-1][0] != n):
        series.append((n, counts[Classification.FULL_HIT] / n))

    metrics = RunMetrics(
        total=n,
        full_hits=counts[Classification.FULL_HIT],
        partial_hits=counts[Classification.PARTIAL_HIT],
        misses=counts[Classification.MISS],
        hit_rate=counts[Classification.FULL_HIT] / n,
        partial_hit_rate=counts[Classification.PARTIAL_HIT] / n,
        byte_hit_rate=local / requested if requested > 0 else 0.0,
        local_mb=local,
        user_cellular_mb=user,
        stash_cellular_mb=stash_cell,
        requested_mb=requested,
        user_cost_cents=user_cost_total,
        stash_cost_cents=stash_cost_total,
        mean_completion_s=completion_total / n,
        total_stored_mb=stash.total_stored_mb,
        hit_rate_series=series,
        per_class=per_class,
    )
    if collect_outcomes:
        return metrics, outcomes
    return metrics


# ---------------------------------------------------------------------------
# Canonical access scenarios

SCENARIOS = ("direct", "onboard-wifi", "cache-wifi", "ustash")


def scenario_setup(name: str, params: SimParams) -> tuple[SplitPolicy, SimParams]:
    """Policy and stash switch for each canonical content-access setting.

    direct: users download everything over their own cellular links.
    onboard-wifi: the vehicle's backhaul carries everything, no cache.
    cache-wifi: the backhaul carries everything, with an on-board cache.
    ustash: cooperative split downloads with push-back stashing.
    """
    if name == "direct":
        return SplitPolicy.no_stash(), SimParams(params.net, params.cost, False, params.hit_time)
    if name == "onboard-wifi":
        return SplitPolicy.all_stash(), SimParams(params.net, params.cost, False, params.hit_time)
    if name == "cache-wifi":
        return SplitPolicy.all_stash(), SimParams(params.net, params.cost, True, params.hit_time)
    if name == "ustash":
        return SplitPolicy.optimal(), SimParams(params.net, params.cost, True, params.hit_time)
    raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")


def compare_scenarios(trace: Trace, params: SimParams,
                      scenarios=SCENARIOS, sample_interval: int = 1000) -> dict[str, RunMetrics]:
    """Run the canonical scenarios on the identical trace."""
    results = {}
    for name in scenarios:
        policy, run_params = scenario_setup(name, params)
        results[name] = run(trace, policy, run_params, sample_interval)
    return results


def write_outcome_log(path, outcomes: list[RequestOutcome]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "content_id", "class", "view_ratio", "classification",
                         "local_mb", "user_mb", "stash_mb", "completion_s",
                         "user_cost", "stash_cost"])
        for o in outcomes:
            writer.writerow([o.index, o.content_id, o.content_class.value,
                             f"{o.view_ratio:.10g}", o.classification.value,
                             f"{o.local_mb:.10g}", f"{o.user_cellular_mb:.10g}",
                             f"{o.stash_cellular_mb:.10g}", f"{o.completion_s:.10g}",
                             f"{o.user_cost_cents:.10g}", f"{o.stash_cost_cents:.10g}"])
