"""Dispersion, divergence, color-encoding, and histogram computations.

Color intensity runs from 0 (white) to 1 (full red). The coefficient of
variation uses the population standard deviation; entropy and KL are
reported in bits; KL applies additive smoothing over the joint support so
it is defined for disjoint count classes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .aggregate import CallPath, PathCountMatrix, PathNode, UnknownPath, _walk_paths
from .model import RequestSet

# Category used when an invocation carries no value for the queried tag.
ABSENT_CATEGORY = "⟨absent⟩"


class EmptySamples(ValueError):
    """Dispersion of an empty sample list is undefined."""


class ZeroMean(ValueError):
    """CV is undefined when the sample mean is zero."""


class EmptyInput(ValueError):
    """A histogram needs at least one latency."""


class OutOfRange(ValueError):
    """Subset latencies must fall within the histogram's edges."""


class DegenerateSelection(ValueError):
    """Recoloring needs a non-empty proper subset of the traces."""


@dataclass(frozen=True)
class ColorValue:
    """White-to-red intensity, clamped to [0, 1]."""

    intensity: float

    def __post_init__(self) -> None:
        clamped = min(max(float(self.intensity), 0.0), 1.0)
        object.__setattr__(self, "intensity", clamped)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probabilities over a finite support (sums to 1 within 1e-9)."""

    support: tuple[Any, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.probabilities):
            raise ValueError("support and probabilities must align")
        if any(p < 0 for p in self.probabilities):
            raise ValueError("probabilities must be non-negative")
        total = sum(self.probabilities)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def from_counts(cls, counts: Mapping[Any, float]) -> "DiscreteDistribution":
        if not counts:
            raise ValueError("cannot normalize an empty count map")
        support = tuple(sorted(counts))
        total = float(sum(counts.values()))
        if total <= 0:
            raise ValueError("counts must sum to a positive total")
        return cls(support, tuple(counts[v] / total for v in support))


@dataclass(frozen=True)
class Histogram:
    """Equal-width latency bins; the last bin is closed on both ends."""

    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    bin_rule: str


def coefficient_of_variation(samples: Sequence[float] | np.ndarray) -> float:
    """Population standard deviation divided by the mean."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise EmptySamples("no samples")
    mean = float(arr.mean())
    if mean == 0.0:
        raise ZeroMean("mean is zero; CV undefined")
    return float(arr.std() / mean)


def cv_to_color(cv: float) -> ColorValue:
    """Linear white-to-red on [0, 1]; CV >= 1 saturates at full red."""
    return ColorValue(min(cv, 1.0))


def gini_index(dist: DiscreteDistribution) -> float:
    """1 - sum of squared probabilities (0 for a pure distribution)."""
    return 1.0 - sum(p * p for p in dist.probabilities)


def shannon_entropy(dist: DiscreteDistribution) -> float:
    """Entropy in bits, with 0*log(0) taken as 0."""
    return -sum(p * math.log2(p) for p in dist.probabilities if p > 0.0)


def kl_divergence(
    p_counts: Mapping[Any, float],
    q_counts: Mapping[Any, float],
    alpha: float = 0.5,
) -> float:
    """KL divergence D(p || q) in bits over additively smoothed counts.

    Both count maps are smoothed with alpha on their joint support of size
    K: p'_i = (c_i + alpha) / (N + alpha * K). Smoothing keeps the result
    finite when one side never observed a value.
    """
    if alpha <= 0:
        raise ValueError("smoothing alpha must be > 0")
    support = sorted(set(p_counts) | set(q_counts))
    if not support:
        raise ValueError("both count maps are empty")
    k = len(support)
    p_total = float(sum(p_counts.values()))
    q_total = float(sum(q_counts.values()))
    divergence = 0.0
    for value in support:
        p = (float(p_counts.get(value, 0)) + alpha) / (p_total + alpha * k)
        q = (float(q_counts.get(value, 0)) + alpha) / (q_total + alpha * k)
        divergence += p * math.log2(p / q)
    # Gibbs' inequality guarantees >= 0; rounding can leave a tiny negative.
    return max(divergence, 0.0)


def divergence_to_color(d: float, d_max: float = 1.0) -> ColorValue:
    """Linear intensity up to d_max bits, then saturated."""
    if d_max <= 0:
        raise ValueError("d_max must be positive")
    return ColorValue(min(d / d_max, 1.0))


def _freedman_diaconis_bins(arr: np.ndarray) -> tuple[int, str]:
    n = arr.size
    q75, q25 = np.percentile(arr, [75, 25])
    iqr = float(q75 - q25)
    span = float(arr.max() - arr.min())
    if iqr > 0.0:
        width = 2.0 * iqr / n ** (1.0 / 3.0)
        return max(1, math.ceil(span / width)), "freedman-diaconis"
    return max(1, math.ceil(math.log2(n)) + 1), "sturges"


def build_histogram(
    latencies_us: Sequence[int] | np.ndarray, bins: int | None = None
) -> Histogram:
    """Equal-width histogram over [min, max] of the latencies.

    Without an explicit bin count the Freedman-Diaconis rule applies,
    falling back to Sturges when the IQR is zero; a degenerate min == max
    input collapses to a single bin.
    """
    arr = np.asarray(latencies_us, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("no latencies")
    lo, hi = float(arr.min()), float(arr.max())
    if bins is not None:
        if bins < 1:
            raise ValueError("bins must be >= 1")
        n_bins, rule = int(bins), "fixed"
    elif lo == hi:
        n_bins, rule = 1, "degenerate"
    else:
        n_bins, rule = _freedman_diaconis_bins(arr)
    if lo == hi:
        # np.histogram convention for a zero-width range.
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(arr, bins=n_bins, range=(lo, hi))
    return Histogram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        bin_rule=rule,
    )


def highlight_counts(
    hist: Histogram, subset_latencies_us: Sequence[int] | np.ndarray
) -> list[int]:
    """Bin the subset with the histogram's own edges (element-wise <= counts)."""
    arr = np.asarray(subset_latencies_us, dtype=np.float64)
    if arr.size == 0:
        return [0] * len(hist.counts)
    if float(arr.min()) < hist.bin_edges[0] or float(arr.max()) > hist.bin_edges[-1]:
        raise OutOfRange("subset latency outside histogram range")
    counts, _ = np.histogram(arr, bins=np.asarray(hist.bin_edges))
    return [int(c) for c in counts]


def recolor_tree(
    matrix: PathCountMatrix,
    selection: Iterable[str],
    alpha: float = 0.5,
    d_max: float = 1.0,
) -> dict[CallPath, ColorValue]:
    """Color every path by how much the selection's count distribution
    diverges from the complement's, D(selection || complement)."""
    selected = set(selection)
    mask = np.fromiter(
        (tid in selected for tid in matrix.trace_ids), dtype=bool, count=matrix.n_traces
    )
    n_selected = int(mask.sum())
    if n_selected == 0 or n_selected == matrix.n_traces:
        raise DegenerateSelection(
            f"selection of {n_selected}/{matrix.n_traces} traces has no complement"
        )
    colors: dict[CallPath, ColorValue] = {}
    for j, path in enumerate(matrix.paths):
        row = matrix.counts[j]
        p_counts = Counter(row[mask].tolist())
        q_counts = Counter(row[~mask].tolist())
        d = kl_divergence(p_counts, q_counts, alpha=alpha)
        colors[path] = divergence_to_color(d, d_max=d_max)
    return colors


def categorical_value_counts(
    requests: RequestSet, path: CallPath, tag_key: str
) -> dict[str, int]:
    """Tag-value counts over all invocations of a path across the request set.

    Invocations without the tag count toward the absent category.
    """
    counts: dict[str, int] = {}
    seen = False
    for trace in requests.traces:
        for span_path, span in _walk_paths(trace):
            if span_path != path:
                continue
            seen = True
            value = span.tags.get(tag_key, ABSENT_CATEGORY)
            counts[value] = counts.get(value, 0) + 1
    if not seen:
        raise UnknownPath(path.encode())
    return counts


def categorical_counts_from_node(node: PathNode, tag_key: str) -> dict[str, int]:
    """Same distribution as categorical_value_counts, from aggregated node data.

    The node records observed tag values per key; invocations that carried
    no value for the key make up the absent category.
    """
    counts = dict(node.tag_value_counts.get(tag_key, {}))
    absent = node.total_invocations - sum(counts.values())
    if absent > 0:
        counts[ABSENT_CATEGORY] = absent
    return counts


def categorical_attribute_dispersion(
    requests: RequestSet, path: CallPath, tag_key: str, metric: str
) -> float:
    """Gini or entropy of a tag's value distribution over a path's invocations."""
    counts = categorical_value_counts(requests, path, tag_key)
    dist = DiscreteDistribution.from_counts(counts)
    if metric == "gini":
        return gini_index(dist)
    if metric == "entropy":
        return shannon_entropy(dist)
    raise ValueError(f"unknown metric {metric!r}; expected 'gini' or 'entropy'")
