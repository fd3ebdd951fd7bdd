"""Spatio-temporal correlation metrics over request sets.

Jaccard similarity between the content sets of two request groups, and
normalized source entropy of a single content item across sources. Both
are used to gauge how concentrated content interest is across vehicles,
routes, or days.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class RequestSet:
    """A labeled set of content ids requested by one group (bus, route, day)."""

    label: str
    ids: frozenset

    @classmethod
    def of(cls, label: str, ids: Iterable) -> "RequestSet":
        return cls(label, frozenset(ids))


@dataclass(frozen=True)
class SourceCounts:
    """Per-source request counts for one content item.

    n is the declared number of sources (routes/buses), which may exceed
    the number of sources that actually requested the item.
    """

    counts: tuple
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")
        if sum(self.counts) <= 0:
            raise ValueError("at least one count must be positive")

    @classmethod
    def observed(cls, counts: Iterable) -> "SourceCounts":
        """Counts with n set to the number of sources present."""
        counts = tuple(counts)
        return cls(counts, len(counts))


def jaccard(a: RequestSet, b: RequestSet) -> float:
    """Intersection over union of two content sets.

    Two empty sets are defined as perfectly similar (1.0) with a warning;
    the degenerate case never occurs with real groups.
    """
    union = a.ids | b.ids
    if not union:
        warnings.warn("Jaccard of two empty sets; returning 1.0", stacklevel=2)
        return 1.0
    return len(a.ids & b.ids) / len(union)


def source_entropy(sc: SourceCounts) -> float:
    """Entropy of a content's source distribution, normalized into [0, 1].

    0 means all requests came from a single source, 1 means a uniform
    spread over all n declared sources. Natural log is used internally;
    the normalized ratio is base-invariant. n = 1 returns 0 (a single
    source is fully concentrated by definition).
    """
    if sc.n == 1:
        return 0.0
    total = sum(sc.counts)
    probs = [c / total for c in sc.counts if c > 0]
    raw = -sum(p * math.log(p) for p in probs)
    return raw / math.log(sc.n)


def similarity_matrix(groups: Sequence[RequestSet]) -> np.ndarray:
    """Pairwise Jaccard matrix: symmetric, unit diagonal, entries in [0, 1]."""
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    k = len(groups)
    mat = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            mat[i, j] = mat[j, i] = jaccard(groups[i], groups[j])
    return mat


def entropy_cdf(collection: Iterable[SourceCounts]) -> list[tuple[float, float]]:
    """Empirical CDF of per-content source entropies.

    Returns (entropy value, cumulative fraction) pairs sorted by value,
    one pair per distinct value, ending at fraction 1.0.
    """
    values = sorted(source_entropy(sc) for sc in collection)
    if not values:
        raise ValueError("empty collection")
    total = len(values)
    out: list[tuple[float, float]] = []
    for i, v in enumerate(values):
        if i + 1 < total and values[i + 1] == v:
            continue
        out.append((v, (i + 1) / total))
    return out


# ---------------------------------------------------------------------------
# CSV interfaces

def load_request_sets(path) -> list[RequestSet]:
    """Read "label,content_id" rows into one RequestSet per label."""
    by_label: dict[str, set] = defaultdict(set)
    order: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty request-set file")
        if [h.strip().lower() for h in header[:2]] != ["label", "content_id"]:
            raise ValueError(f"{path}: expected header 'label,content_id'")
        for row in reader:
            if not row:
                continue
            label, content_id = row[0].strip(), row[1].strip()
            if label not in by_label:
                order.append(label)
            by_label[label].add(content_id)
    return [RequestSet.of(label, by_label[label]) for label in order]


def source_counts_by_content(path) -> dict[str, SourceCounts]:
    """Per-content request counts across the labels of a request-set CSV.

    n is declared as the total number of labels in the file, whether or
    not a given content was requested from each.
    """
    counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    labels: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if not row:
                continue
            label, content_id = row[0].strip(), row[1].strip()
            if label not in labels:
                labels.append(label)
            counts[content_id][label] += 1
    n = len(labels)
    return {
        cid: SourceCounts(tuple(per_label[lab] for lab in labels if per_label[lab] > 0), n)
        for cid, per_label in counts.items()
    }


def write_similarity_csv(path, groups: Sequence[RequestSet], matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [g.label for g in groups])
        for g, row in zip(groups, matrix):
            writer.writerow([g.label] + [f"{v:.10g}" for v in row])


def write_entropy_cdf_csv(path, cdf: Sequence[tuple[float, float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entropy", "cumulative_fraction"])
        for value, frac in cdf:
            writer.writerow([f"{value:.10g}", f"{frac:.10g}"])
