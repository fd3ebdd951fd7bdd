"""Closed-form cost and completion-time model of collaborative downloads.

A request for content of size s and consumed fraction V is split on a
stash miss: the stash downloads x over its cellular link (bandwidth
omega_b), the user downloads V - x over theirs (omega_u), and the slower
leg determines the completion time. Stash hits are served over local
WiFi (omega_l). The module works in a constant abstraction where every
content has the mean size (mean_size_mb) and the mean view ratio
(1/lambda_e); exact per-content sums are available to validate the
approximations.

All bandwidths are MB/s, sizes MB, costs cents/MB, times seconds.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .workload import ZipfParams, expected_unique


@dataclass(frozen=True)
class NetworkParams:
    """Link bandwidths in MB/s: user cellular, stash cellular, local WiFi."""

    omega_u: float
    omega_b: float
    omega_l: float

    def __post_init__(self):
        if min(self.omega_u, self.omega_b, self.omega_l) <= 0:
            raise ValueError("bandwidths must be positive")
        if not self.omega_l >= self.omega_b >= self.omega_u:
            # The derivations assume this ordering; results are still computed.
            warnings.warn(
                f"bandwidth ordering omega_l >= omega_b >= omega_u violated: "
                f"({self.omega_l}, {self.omega_b}, {self.omega_u}) MB/s",
                stacklevel=2,
            )


@dataclass(frozen=True)
class CostParams:
    """Per-MB download cost in cents for the user and the stash provider."""

    phi_u: float
    phi_b: float

    def __post_init__(self):
        if self.phi_u < 0 or self.phi_b < 0:
            raise ValueError("costs must be non-negative")


@dataclass(frozen=True)
class ObjectiveWeights:
    gamma_t: float = 1.0
    gamma_b: float = 1.0
    gamma_u: float = 1.0

    def __post_init__(self):
        if min(self.gamma_t, self.gamma_b, self.gamma_u) < 0:
            raise ValueError("weights must be non-negative")

    @property
    def all_unit(self) -> bool:
        return self.gamma_t == self.gamma_b == self.gamma_u == 1.0


@dataclass(frozen=True)
class ModelParams:
    zipf: ZipfParams
    mean_size_mb: float
    lambda_e: float
    n: int
    net: NetworkParams
    cost: CostParams
    weights: ObjectiveWeights = ObjectiveWeights()

    def __post_init__(self):
        if self.mean_size_mb <= 0 or self.lambda_e <= 0 or self.n < 1:
            raise ValueError("mean_size_mb, lambda_e must be positive and n >= 1")

    def with_(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ObjectivePoint:
    """One point of the combined objective at split ratio x.

    t_norm, cb_norm and cu_norm are completion time, stash cost and user
    cost normalized by their maxima over x in [0, 1]. h_sum is the
    weighted sum of the three; h_dist the weighted Euclidean distance of
    the point from the origin.
    """

    x: float
    t_norm: float
    cb_norm: float
    cu_norm: float
    h_sum: float
    h_dist: float


# ---------------------------------------------------------------------------
# Per-request completion time and the optimal split

def completion_time_miss(size_mb: float, view_ratio: float, x: float,
                         net: NetworkParams) -> float:
    """Completion time of one miss: the slower of the two cellular legs."""
    if size_mb <= 0:
        raise ValueError("size must be positive")
    if not 0 <= x <= view_ratio <= 1:
        raise ValueError(f"need 0 <= x <= view_ratio <= 1, got x={x}, view_ratio={view_ratio}")
    return max(size_mb * (view_ratio - x) / net.omega_u, size_mb * x / net.omega_b)


def x_optimal(net: NetworkParams, lambda_e: float) -> float:
    """Expected optimal stash share of a download: omega_b / (lambda_e (omega_u + omega_b)).

    Minimizes the expected miss completion time by equalizing the two
    cellular legs at the mean view ratio 1/lambda_e. Values above 1 (possible
    for lambda_e < 1) are capped at 1 with a warning.
    """
    if lambda_e <= 0:
        raise ValueError("lambda_e must be positive")
    x = net.omega_b / (lambda_e * (net.omega_u + net.omega_b))
    if x > 1.0:
        warnings.warn(f"optimal split {x:.4f} exceeds 1; capped", stacklevel=2)
        return 1.0
    return x


# ---------------------------------------------------------------------------
# Expected completion time over a request population

def unique_fraction(mp: ModelParams) -> float:
    """Expected fraction of requests that are first touches (misses)."""
    return expected_unique(mp.zipf, mp.n) / mp.n


def expected_completion(mp: ModelParams, x: float) -> float:
    """Expected per-request completion time at stash share x, in seconds.

    Misses (one per expected unique content) take the slower cellular leg
    at the mean view ratio; hits are served whole over local WiFi.
    """
    if not 0 <= x <= 1:
        raise ValueError(f"x must be in [0, 1], got {x}")
    u = unique_fraction(mp)
    view = 1.0 / mp.lambda_e
    miss_time = max((view - x) / mp.net.omega_u, x / mp.net.omega_b)
    return mp.mean_size_mb * (u * miss_time + (1.0 - u) / mp.net.omega_l)


def expected_completion_min(mp: ModelParams) -> float:
    """Minimum expected completion time, via the closed form.

    Equals expected_completion evaluated at the optimal split; the two
    derivations are kept separate so they can cross-check each other.
    """
    x_opt = mp.net.omega_b / (mp.lambda_e * (mp.net.omega_u + mp.net.omega_b))
    if x_opt > 1.0:
        return expected_completion(mp, 1.0)
    e_y = expected_unique(mp.zipf, mp.n)
    return (mp.mean_size_mb / mp.n) * (
        e_y * (1.0 / (mp.lambda_e * (mp.net.omega_u + mp.net.omega_b)) - 1.0 / mp.net.omega_l)
        + mp.n / mp.net.omega_l
    )


# ---------------------------------------------------------------------------
# Costs

def _touch_probabilities(mp: ModelParams) -> np.ndarray:
    from .workload import zipf_pmf_vector

    pmf = zipf_pmf_vector(mp.zipf)
    return -np.expm1(mp.n * np.log1p(-pmf))


def stash_cost(mp: ModelParams, x: float, mode: str = "approx",
               sizes: np.ndarray | None = None,
               x_k: np.ndarray | None = None) -> float:
    """Expected total stash download cost in cents at stash share x.

    approx mode uses the constant abstraction (phi_b * mean_size * E(Y) * x);
    exact mode sums phi_b * s_k * x_k over all contents weighted by their
    touch probabilities, with optional per-content sizes and shares.
    """
    if mode == "approx":
        return mp.cost.phi_b * mp.mean_size_mb * expected_unique(mp.zipf, mp.n) * x
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    q = _touch_probabilities(mp)
    s_k = np.full(mp.zipf.m, mp.mean_size_mb) if sizes is None else np.asarray(sizes)
    xs = np.full(mp.zipf.m, x) if x_k is None else np.asarray(x_k)
    return float(mp.cost.phi_b * np.sum(s_k * xs * q))


def user_cost(mp: ModelParams, x: float, mode: str = "approx",
              sizes: np.ndarray | None = None,
              x_k: np.ndarray | None = None) -> float:
    """Expected total user download cost in cents at stash share x.

    The user leg is the mean view ratio 1/lambda_e minus the stash share.
    """
    view = 1.0 / mp.lambda_e
    if mode == "approx":
        e_y = expected_unique(mp.zipf, mp.n)
        return mp.cost.phi_u * mp.mean_size_mb * e_y * (view - x)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    q = _touch_probabilities(mp)
    s_k = np.full(mp.zipf.m, mp.mean_size_mb) if sizes is None else np.asarray(sizes)
    xs = np.full(mp.zipf.m, x) if x_k is None else np.asarray(x_k)
    return float(mp.cost.phi_u * np.sum(s_k * (view - xs) * q))


def system_cost(mp: ModelParams, x: float) -> float:
    """Combined stash plus user cost; affine in x with slope sign(phi_b - phi_u)."""
    return stash_cost(mp, x) + user_cost(mp, x)


# ---------------------------------------------------------------------------
# Combined objective H

def _h_components(mp: ModelParams, x: float) -> tuple[float, float, float]:
    # The combined objective is defined at view ratio 1 (worst case), so
    # the time term uses V = 1 regardless of mp.lambda_e.
    u = unique_fraction(mp)
    net = mp.net
    hit = (1.0 - u) / net.omega_l
    t = u * max((1.0 - x) / net.omega_u, x / net.omega_b) + hit
    t_max = max(u / net.omega_u + hit, u / net.omega_b + hit)
    # Stash cost is maximal at x = 1, user cost at x = 0; both are affine.
    return t / t_max, x, 1.0 - x


def h_metric(mp: ModelParams, x: float) -> ObjectivePoint:
    """Normalized (time, stash cost, user cost) point and its H values at x."""
    if not 0 <= x <= 1:
        raise ValueError(f"x must be in [0, 1], got {x}")
    t_norm, cb_norm, cu_norm = _h_components(mp, x)
    w = mp.weights
    h_sum = w.gamma_t * t_norm + w.gamma_b * cb_norm + w.gamma_u * cu_norm
    h_dist = math.sqrt((w.gamma_t * t_norm) ** 2 + (w.gamma_b * cb_norm) ** 2
                       + (w.gamma_u * cu_norm) ** 2)
    return ObjectivePoint(x, t_norm, cb_norm, cu_norm, h_sum, h_dist)


def h_argmin(mp: ModelParams, grid_step: float = 1e-4) -> tuple[float, float]:
    """Split ratio minimizing h_sum, and the minimum value.

    Under unit weights the minimizer has the closed form
    omega_b / (omega_u + omega_b); other weights fall back to a grid
    search (ties resolved toward smaller x).
    """
    if mp.weights.all_unit:
        x_star = mp.net.omega_b / (mp.net.omega_u + mp.net.omega_b)
        return x_star, h_metric(mp, x_star).h_sum
    xs = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    values = [h_metric(mp, float(x)).h_sum for x in xs]
    i = int(np.argmin(values))
    return float(xs[i]), float(values[i])


def h_min_formula(mp: ModelParams) -> float:
    """Reference closed form for min H under unit weights.

    Kept verbatim for comparison; it drops a dimensionless term relative
    to evaluating h_metric at the minimizer, so h_argmin is authoritative
    where the two disagree.
    """
    e_y = expected_unique(mp.zipf, mp.n)
    net = mp.net
    return (1.0 + 1.0 / (mp.n * net.omega_u)
            - net.omega_l * net.omega_b * e_y
            / ((e_y * (net.omega_l - net.omega_u) + mp.n * net.omega_u)
               * (net.omega_u + net.omega_b)))


# ---------------------------------------------------------------------------
# Hit rate and sweep table

def expected_hit_rate(p: ZipfParams, n: int) -> float:
    """Expected stash hit rate after n requests: (n - E(Y)) / n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n - expected_unique(p, n)) / n


def model_sweep(mp: ModelParams, xs) -> list[dict]:
    """Evaluate the model over a grid of split ratios.

    One row per x with expected completion time, the three costs, and the
    normalized objective components.
    """
    rows = []
    for x in xs:
        x = float(x)
        point = h_metric(mp, x)
        rows.append({
            "x": x,
            "expected_T_s": expected_completion(mp, x),
            "cost_stash_cents": stash_cost(mp, x),
            "cost_user_cents": user_cost(mp, x),
            "cost_system_cents": system_cost(mp, x),
            "t_norm": point.t_norm,
            "cb_norm": point.cb_norm,
            "cu_norm": point.cu_norm,
            "h_sum": point.h_sum,
            "h_dist": point.h_dist,
        })
    return rows
