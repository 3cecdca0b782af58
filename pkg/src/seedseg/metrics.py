"""Evaluation metrics for estimated segmentations.

MSE of the fitted signal, boundary-augmented Hausdorff distance between
change point sets, V-measure of the induced segment clusterings
(Rosenberg & Hirschberg, 2007), and the error in the number of change
points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from seedseg.select import Segmentation

__all__ = [
    "EVAL_CSV_HEADER",
    "EvalReport",
    "count_error",
    "hausdorff",
    "mse",
    "v_measure",
]

CpSet = Union[Segmentation, Iterable[int]]


def _cps(x: CpSet) -> tuple[int, ...]:
    if isinstance(x, Segmentation):
        return x.changepoints
    return tuple(sorted(int(c) for c in x))


def mse(est: Segmentation, series: Sequence[float], truth: Sequence[float]) -> float:
    """Mean squared error of the piecewise-mean fit against the true means."""
    x = np.asarray(series, dtype=float)
    f = np.asarray(truth, dtype=float)
    if len(x) != len(f):
        raise ValueError(f"series length {len(x)} != truth length {len(f)}")
    bounds = np.array((0,) + _cps(est) + (len(x),))
    lengths = np.diff(bounds)
    means = np.add.reduceat(x, bounds[:-1]) / lengths
    fitted = np.repeat(means, lengths)
    return float(np.mean((fitted - f) ** 2))


def _directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    # max over a of the distance to the nearest point of b; b sorted
    pos = np.searchsorted(b, a)
    left = b[np.clip(pos - 1, 0, len(b) - 1)]
    right = b[np.clip(pos, 0, len(b) - 1)]
    return float(np.max(np.minimum(np.abs(a - left), np.abs(a - right))))


def hausdorff(est: CpSet, truth: CpSet, length: int) -> float:
    """Symmetric Hausdorff distance after adjoining {0, T} to both sets.

    The boundary augmentation keeps the distance finite when one side is
    empty.
    """
    a = np.unique(np.array((0, length) + _cps(est)))
    b = np.unique(np.array((0, length) + _cps(truth)))
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))


def _entropy(counts: np.ndarray, total: int) -> float:
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log(p)))


def v_measure(est: CpSet, truth: CpSet, length: int) -> float:
    """V-measure of the segmentations viewed as clusterings of 1..T.

    V = 2hc/(h+c) with homogeneity h = 1 - H(C|K)/H(C) and completeness
    c = 1 - H(K|C)/H(K); classes C are the true segments, clusters K the
    estimated ones, entropies in natural log.  h = 1 when H(C) = 0, c = 1
    when H(K) = 0, and V = 0 when h + c = 0.
    """
    true_bounds = np.array((0,) + _cps(truth) + (length,))
    est_bounds = np.array((0,) + _cps(est) + (length,))
    classes = np.repeat(np.arange(len(true_bounds) - 1), np.diff(true_bounds))
    clusters = np.repeat(np.arange(len(est_bounds) - 1), np.diff(est_bounds))
    pairs = classes * np.int64(len(est_bounds)) + clusters
    joint = np.unique(pairs, return_counts=True)[1]
    class_counts = np.diff(true_bounds)
    cluster_counts = np.diff(est_bounds)
    h_c = _entropy(class_counts, length)
    h_k = _entropy(cluster_counts, length)
    h_joint = _entropy(joint, length)
    h_c_given_k = h_joint - h_k
    h_k_given_c = h_joint - h_c
    h = 1.0 if h_c == 0 else 1.0 - h_c_given_k / h_c
    c = 1.0 if h_k == 0 else 1.0 - h_k_given_c / h_k
    if h + c == 0:
        return 0.0
    return 2.0 * h * c / (h + c)


def count_error(est: CpSet, truth: CpSet) -> int:
    """N - N_hat: positive when change points were missed."""
    return len(_cps(truth)) - len(_cps(est))


EVAL_CSV_HEADER = "mse,hausdorff,vmeasure,count_error,total_length,time_ms"


@dataclass(frozen=True)
class EvalReport:
    """One evaluated run; serialises to a CSV row under EVAL_CSV_HEADER."""

    mse: float
    hausdorff: float
    v_measure: float
    count_error: int
    total_length: int
    time_ms: float

    def __post_init__(self):
        if not 0.0 <= self.v_measure <= 1.0 + 1e-12:
            raise ValueError(f"v_measure outside [0, 1]: {self.v_measure}")
        if self.hausdorff < 0:
            raise ValueError(f"hausdorff must be >= 0: {self.hausdorff}")

    def to_csv_row(self) -> str:
        return (
            f"{self.mse:.6g},{self.hausdorff:.6g},{self.v_measure:.6g},"
            f"{self.count_error},{self.total_length},{self.time_ms:.3f}"
        )
