"""Synthetic commuter workload generation.

Content popularity is Zipf within each of two content classes (video and
non-video), content sizes are Gamma distributed and fixed per item at
catalog build time, and per-request consumed fractions (view ratios) are
exponential for video and exactly 1 for non-video. A trace interleaves
the two classes with a per-request Bernoulli draw controlled by the
mixing ratio r_v (non-video requests per video request).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

# View ratios live in (0, 1]; exponential draws are clamped into [VIEW_EPS, 1].
VIEW_EPS = 1e-6
# Gamma draws with extreme shape parameters underflow to 0.0; sizes must stay
# positive, so they are floored at one byte (in MB).
SIZE_FLOOR_MB = 1e-9


class ContentClass(Enum):
    VIDEO = "video"
    NON_VIDEO = "nonvideo"

    @property
    def id_prefix(self) -> str:
        return "v" if self is ContentClass.VIDEO else "n"


_PREFIX_TO_CLASS = {"v": ContentClass.VIDEO, "n": ContentClass.NON_VIDEO}


@dataclass(frozen=True)
class ZipfParams:
    """Zipf popularity over ranks 1..m with exponent s."""

    s: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"catalog size must be >= 1, got {self.m}")
        if self.s < 0:
            raise ValueError(f"Zipf exponent must be >= 0, got {self.s}")


@dataclass(frozen=True)
class SizeParams:
    """Gamma size distribution: shape * scale_mb is the mean size in MB."""

    shape: float
    scale_mb: float

    def __post_init__(self):
        if self.shape <= 0 or self.scale_mb <= 0:
            raise ValueError("Gamma shape and scale must be positive")

    @property
    def mean_mb(self) -> float:
        return self.shape * self.scale_mb


@dataclass(frozen=True)
class ViewParams:
    """Exponential view-ratio rate; larger means shorter typical views."""

    lambda_e: float

    def __post_init__(self):
        if self.lambda_e <= 0:
            raise ValueError("lambda_e must be positive")


@dataclass(frozen=True)
class ClassConfig:
    zipf: ZipfParams
    size: SizeParams
    view: ViewParams


@dataclass(frozen=True)
class WorkloadConfig:
    video: ClassConfig
    nonvideo: ClassConfig
    r_v: float
    n_requests: int
    seed: int

    def __post_init__(self):
        if self.r_v <= 0:
            raise ValueError("r_v must be positive")
        if self.n_requests < 1:
            raise ValueError("n_requests must be >= 1")

    def for_class(self, cls: ContentClass) -> ClassConfig:
        return self.video if cls is ContentClass.VIDEO else self.nonvideo


@dataclass(frozen=True)
class ContentItem:
    id: str
    content_class: ContentClass
    rank: int
    size_mb: float


@dataclass(frozen=True)
class Request:
    index: int
    content_id: str
    view_ratio: float


# ---------------------------------------------------------------------------
# Popularity

@lru_cache(maxsize=128)
def _harmonic(m: int, s: float) -> float:
    """Generalized harmonic number: sum over 1..m of 1/k^s."""
    return float(np.sum(np.arange(1, m + 1, dtype=np.float64) ** -s))


def zipf_pmf(k: int, p: ZipfParams) -> float:
    """Probability of the rank-k item under Zipf(s) over 1..m."""
    if not 1 <= k <= p.m:
        raise ValueError(f"rank {k} out of range 1..{p.m}")
    return (1.0 / k**p.s) / _harmonic(p.m, p.s)


def zipf_pmf_vector(p: ZipfParams) -> np.ndarray:
    """Full pmf over ranks 1..m as an array (index 0 is rank 1)."""
    weights = np.arange(1, p.m + 1, dtype=np.float64) ** -p.s
    return weights / weights.sum()


def expected_unique(p: ZipfParams, n: int) -> float:
    """Expected number of distinct items among n Zipf-distributed requests.

    Computed as sum over k of 1 - (1 - p_k)^n, evaluated in log space so
    very small probabilities do not lose precision at large n.
    """
    if n < 0:
        raise ValueError("request count must be >= 0")
    if n == 0:
        return 0.0
    return _expected_unique_cached(p, int(n))


@lru_cache(maxsize=4096)
def _expected_unique_cached(p: ZipfParams, n: int) -> float:
    pmf = zipf_pmf_vector(p)
    with np.errstate(divide="ignore"):  # p_k == 1 for m = 1; expm1(-inf) is exact
        return float(-np.expm1(n * np.log1p(-pmf)).sum())


def unique_count_std(p: ZipfParams, n: int) -> float:
    """Upper bound on the standard deviation of the unique count.

    Treats per-item touch indicators as independent Bernoulli; the true
    covariances are negative, so this is conservative for banding.
    """
    pmf = zipf_pmf_vector(p)
    q = -np.expm1(n * np.log1p(-pmf))
    return float(math.sqrt(np.sum(q * (1.0 - q))))


class ZipfSampler:
    """Inverse-CDF rank sampler over a precomputed cumulative table."""

    def __init__(self, params: ZipfParams):
        self.params = params
        self._cum = np.cumsum(zipf_pmf_vector(params))
        self._cum[-1] = 1.0

    def sample(self, rng: np.random.Generator, size: int | None = None):
        u = rng.random(size)
        ranks = np.searchsorted(self._cum, u, side="right") + 1
        if size is None:
            return int(ranks)
        return ranks.astype(np.int64)


def sample_rank(p: ZipfParams, rng: np.random.Generator) -> int:
    return ZipfSampler(p).sample(rng)


# ---------------------------------------------------------------------------
# Sizes and view ratios

def sample_size(sp: SizeParams, rng: np.random.Generator, size: int | None = None):
    """Draw Gamma-distributed content sizes in MB, floored at one byte."""
    draws = rng.gamma(sp.shape, sp.scale_mb, size)
    return np.maximum(draws, SIZE_FLOOR_MB) if size is not None else max(draws, SIZE_FLOOR_MB)


def sample_view_ratio(vp: ViewParams, content_class: ContentClass,
                      rng: np.random.Generator, size: int | None = None):
    """Draw consumed fractions in (0, 1].

    Non-video content is always consumed whole (ratio exactly 1). Video
    draws are exponential with rate lambda_e, clamped into [VIEW_EPS, 1].
    """
    if content_class is ContentClass.NON_VIDEO:
        return np.ones(size) if size is not None else 1.0
    draws = rng.exponential(1.0 / vp.lambda_e, size)
    return np.clip(draws, VIEW_EPS, 1.0)


# ---------------------------------------------------------------------------
# Catalog and trace

class ContentCatalog:
    """The content universe: per-class Zipf popularity and fixed item sizes.

    Items are identified by compact string ids ("v<rank>" for video,
    "n<rank>" for non-video); lookups parse the id rather than holding a
    per-item index, so multi-million item catalogs stay cheap.
    """

    def __init__(self, zipf_by_class: dict[ContentClass, ZipfParams],
                 sizes_by_class: dict[ContentClass, np.ndarray]):
        self._zipf = dict(zipf_by_class)
        self._sizes = {c: np.asarray(s, dtype=np.float64) for c, s in sizes_by_class.items()}
        for cls, zp in self._zipf.items():
            if len(self._sizes[cls]) != zp.m:
                raise ValueError(f"{cls.value}: {len(self._sizes[cls])} sizes for m={zp.m}")
            if np.any(self._sizes[cls] <= 0):
                raise ValueError(f"{cls.value}: sizes must be positive")
        self._samplers = {c: ZipfSampler(zp) for c, zp in self._zipf.items()}

    @classmethod
    def from_config(cls, cfg: WorkloadConfig, rng: np.random.Generator | None = None) -> "ContentCatalog":
        """Build the catalog for a workload config, sampling item sizes once."""
        if rng is None:
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
        zipf, sizes = {}, {}
        # Fixed draw order (video then non-video) keeps builds reproducible.
        for content_class in (ContentClass.VIDEO, ContentClass.NON_VIDEO):
            cc = cfg.for_class(content_class)
            zipf[content_class] = cc.zipf
            sizes[content_class] = sample_size(cc.size, rng, cc.zipf.m)
        return cls(zipf, sizes)

    @classmethod
    def uniform(cls, m: int, size_mb: float, s: float,
                content_class: ContentClass = ContentClass.NON_VIDEO) -> "ContentCatalog":
        """Single-class catalog with one constant size, for model validation."""
        zp = ZipfParams(s=s, m=m)
        return cls({content_class: zp}, {content_class: np.full(m, size_mb)})

    @property
    def classes(self) -> tuple[ContentClass, ...]:
        return tuple(self._zipf)

    def zipf(self, content_class: ContentClass) -> ZipfParams:
        return self._zipf[content_class]

    def n_items(self) -> int:
        return sum(zp.m for zp in self._zipf.values())

    def sample_ranks(self, content_class: ContentClass, rng: np.random.Generator, size: int) -> np.ndarray:
        return self._samplers[content_class].sample(rng, size)

    def with_zipf_exponent(self, s: float) -> "ContentCatalog":
        """Same items and sizes under a different popularity skew."""
        zipf = {c: ZipfParams(s, zp.m) for c, zp in self._zipf.items()}
        return ContentCatalog(zipf, self._sizes)

    def content_id(self, content_class: ContentClass, rank: int) -> str:
        return f"{content_class.id_prefix}{rank}"

    def resolve(self, content_id: str) -> tuple[ContentClass, int, float]:
        """Map an id to (class, rank, size_mb)."""
        content_class = _PREFIX_TO_CLASS[content_id[0]]
        rank = int(content_id[1:])
        return content_class, rank, float(self._sizes[content_class][rank - 1])

    def item(self, content_id: str) -> ContentItem:
        content_class, rank, size_mb = self.resolve(content_id)
        return ContentItem(content_id, content_class, rank, size_mb)


@dataclass
class Trace:
    """An ordered request sequence plus the catalog that produced it."""

    requests: list[Request]
    catalog: ContentCatalog
    config: WorkloadConfig | None = None
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.requests)

    def __iter__(self) -> Iterator[Request]:
        return iter(self.requests)

    def unique_contents(self) -> int:
        return len({r.content_id for r in self.requests})

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "content_id", "class", "rank", "size_mb", "view_ratio"])
            for req in self.requests:
                cls, rank, size_mb = self.catalog.resolve(req.content_id)
                writer.writerow([req.index, req.content_id, cls.value, rank,
                                 f"{size_mb:.10g}", f"{req.view_ratio:.10g}"])

    def to_json(self, path, config_echo: dict | None = None) -> None:
        """Column-oriented JSON document embedding the generating config."""
        doc = {
            "seed": self.seed,
            "config": config_echo,
            "n_requests": len(self.requests),
            "content_id": [r.content_id for r in self.requests],
            "view_ratio": [round(r.view_ratio, 10) for r in self.requests],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh)


def generate_trace(cfg: WorkloadConfig, rng: np.random.Generator | None = None,
                   catalog: ContentCatalog | None = None) -> Trace:
    """Generate a synthetic trace of cfg.n_requests requests.

    Each request is video with probability 1/(1 + r_v), its rank is drawn
    from the class Zipf, and its view ratio from the class view model.
    Draw order is fixed (class flags, video ranks, non-video ranks, video
    views) so identical seeds give byte-identical traces.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    if catalog is None:
        catalog = ContentCatalog.from_config(cfg)

    n = cfg.n_requests
    is_video = rng.random(n) < 1.0 / (1.0 + cfg.r_v)
    n_video = int(is_video.sum())

    ranks = np.empty(n, dtype=np.int64)
    if n_video:
        ranks[is_video] = catalog.sample_ranks(ContentClass.VIDEO, rng, n_video)
    if n - n_video:
        ranks[~is_video] = catalog.sample_ranks(ContentClass.NON_VIDEO, rng, n - n_video)

    views = np.ones(n)
    if n_video:
        views[is_video] = sample_view_ratio(cfg.video.view, ContentClass.VIDEO, rng, n_video)

    requests = []
    video_prefix = ContentClass.VIDEO.id_prefix
    nonvideo_prefix = ContentClass.NON_VIDEO.id_prefix
    for i in range(n):
        prefix = video_prefix if is_video[i] else nonvideo_prefix
        requests.append(Request(i, f"{prefix}{ranks[i]}", float(views[i])))
    return Trace(requests, catalog, cfg, cfg.seed)
