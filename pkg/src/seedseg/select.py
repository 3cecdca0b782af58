"""Turning candidate splits into change point estimates.

Greedy selection repeatedly accepts the surviving candidate with maximal
gain; narrowest-over-threshold accepts the shortest qualifying interval.
Both eliminate every interval whose open interior contains an accepted
point, tracked in a balanced tree so each containment check costs
O(log n).  Solution paths record the segmentations swept out by all
thresholds, and an information criterion picks the final model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from seedseg.gain import Candidate, PrefixSums

__all__ = [
    "OrderedBreakIndex",
    "Penalty",
    "Segmentation",
    "SolutionPath",
    "auto_threshold",
    "estimate_noise_sd",
    "fit_segmentation",
    "greedy_path_arrays",
    "greedy_select",
    "greedy_select_arrays",
    "greedy_solution_path",
    "ic_score",
    "not_select",
    "not_select_arrays",
    "not_solution_path",
    "penalty_value",
    "select_by_ic",
]

_MAD_SCALE = 0.6745  # third-quartile point of the standard normal


class _Node:
    __slots__ = ("key", "left", "right", "height")

    def __init__(self, key: int):
        self.key = key
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None
        self.height = 1


def _height(node: Optional[_Node]) -> int:
    return node.height if node is not None else 0


def _rebalance(node: _Node) -> _Node:
    node.height = 1 + max(_height(node.left), _height(node.right))
    bal = _height(node.left) - _height(node.right)
    if bal > 1:
        if _height(node.left.left) < _height(node.left.right):
            node.left = _rotate_left(node.left)
        return _rotate_right(node)
    if bal < -1:
        if _height(node.right.right) < _height(node.right.left):
            node.right = _rotate_right(node.right)
        return _rotate_left(node)
    return node


def _rotate_right(node: _Node) -> _Node:
    pivot = node.left
    node.left = pivot.right
    pivot.right = node
    node.height = 1 + max(_height(node.left), _height(node.right))
    pivot.height = 1 + max(_height(pivot.left), _height(pivot.right))
    return pivot


def _rotate_left(node: _Node) -> _Node:
    pivot = node.right
    node.right = pivot.left
    pivot.left = node
    node.height = 1 + max(_height(node.left), _height(node.right))
    pivot.height = 1 + max(_height(pivot.left), _height(pivot.right))
    return pivot


class OrderedBreakIndex:
    """Ordered set of found change points backed by an AVL tree.

    Insert, predecessor/successor and open-range containment all run in
    O(log n) worst case.  Single writer; no concurrent mutation.
    """

    def __init__(self, keys: Sequence[int] = ()):
        self._root: Optional[_Node] = None
        self._size = 0
        for k in keys:
            self.insert(int(k))

    def __len__(self) -> int:
        return self._size

    def __contains__(self, key: int) -> bool:
        node = self._root
        while node is not None:
            if key == node.key:
                return True
            node = node.left if key < node.key else node.right
        return False

    def __iter__(self) -> Iterator[int]:
        stack: list[_Node] = []
        node = self._root
        while stack or node is not None:
            while node is not None:
                stack.append(node)
                node = node.left
            node = stack.pop()
            yield node.key
            node = node.right

    def insert(self, key: int) -> bool:
        """Insert ``key``; returns False (a no-op) if already present."""
        inserted = [True]

        def _insert(node: Optional[_Node]) -> _Node:
            if node is None:
                return _Node(key)
            if key == node.key:
                inserted[0] = False
                return node
            if key < node.key:
                node.left = _insert(node.left)
            else:
                node.right = _insert(node.right)
            return _rebalance(node)

        self._root = _insert(self._root)
        if inserted[0]:
            self._size += 1
        return inserted[0]

    def neighbors(self, key: int) -> tuple[Optional[int], Optional[int]]:
        """Strict predecessor and successor of ``key`` (either may be None)."""
        pred: Optional[int] = None
        succ: Optional[int] = None
        node = self._root
        while node is not None:
            if node.key < key:
                pred = node.key
                node = node.right
            elif node.key > key:
                succ = node.key
                node = node.left
            else:
                p = node.left
                while p is not None:
                    pred = p.key
                    p = p.right
                p = node.right
                while p is not None:
                    succ = p.key
                    p = p.left
                break
        return pred, succ

    def successor_above(self, key: int) -> Optional[int]:
        """Smallest stored key strictly greater than ``key``."""
        succ: Optional[int] = None
        node = self._root
        while node is not None:
            if node.key > key:
                succ = node.key
                node = node.left
            else:
                node = node.right
        return succ

    def contains_in_open_range(self, left: int, right: int) -> bool:
        """True iff some stored point p satisfies left < p < right."""
        succ = self.successor_above(left)
        return succ is not None and succ < right


@dataclass(frozen=True)
class Segmentation:
    """Sorted change point locations with, when fitted, segment means and RSS."""

    changepoints: tuple[int, ...]
    means: Optional[tuple[float, ...]] = None
    rss: Optional[float] = None

    def __post_init__(self):
        cps = self.changepoints
        if any(cps[i] >= cps[i + 1] for i in range(len(cps) - 1)):
            raise ValueError("change points must be strictly increasing")

    def __len__(self) -> int:
        return len(self.changepoints)


def fit_segmentation(ps: PrefixSums, changepoints: Sequence[int]) -> Segmentation:
    """Segmentation with per-segment sample means and total RSS."""
    cps = tuple(int(c) for c in changepoints)
    T = ps.length
    if cps and not (0 < cps[0] and cps[-1] < T):
        raise ValueError(f"change points must lie in 1..{T - 1}")
    bounds = (0,) + cps + (T,)
    means = []
    rss = 0.0
    for a, b in zip(bounds[:-1], bounds[1:]):
        means.append(ps.segment_sum(a, b) / (b - a))
        rss += ps.segment_rss(a, b)
    return Segmentation(changepoints=cps, means=tuple(means), rss=rss)


def _candidate_arrays(candidates: Sequence[Candidate]):
    n = len(candidates)
    gains = np.fromiter((c.gain for c in candidates), dtype=float, count=n)
    splits = np.fromiter((c.split for c in candidates), dtype=np.int64, count=n)
    lefts = np.fromiter((c.interval.left for c in candidates), dtype=np.int64, count=n)
    rights = np.fromiter((c.interval.right for c in candidates), dtype=np.int64, count=n)
    return gains, splits, lefts, rights


def greedy_select_arrays(
    gains: np.ndarray,
    splits: np.ndarray,
    lefts: np.ndarray,
    rights: np.ndarray,
    kappa: float,
    max_accept: Optional[int] = None,
) -> list[int]:
    """Candidate indices accepted by greedy selection, in acceptance order.

    Candidates are visited by decreasing gain (ties keep input order); a
    candidate is accepted iff its gain exceeds ``kappa`` and its interval's
    interior contains no previously accepted point.  This one-pass scan is
    exactly the iterative pick-max / eliminate loop.  ``max_accept`` stops
    after that many acceptances (the accepted prefix is unaffected).
    """
    order = np.argsort(-gains, kind="stable")
    index = OrderedBreakIndex()
    accepted: list[int] = []
    limit = len(order) if max_accept is None else max_accept
    for j in order:
        if gains[j] <= kappa or len(accepted) >= limit:
            break
        if not index.contains_in_open_range(lefts[j], rights[j]):
            index.insert(int(splits[j]))
            accepted.append(int(j))
    return accepted


def not_select_arrays(
    gains: np.ndarray,
    splits: np.ndarray,
    lefts: np.ndarray,
    rights: np.ndarray,
    kappa: float,
    inclusive: bool = False,
) -> list[int]:
    """Candidate indices accepted by narrowest-over-threshold selection.

    Qualifying candidates (gain > kappa, or >= kappa when ``inclusive``) are
    visited by (length, left, split); the same elimination rule as greedy
    applies.
    """
    qual = gains >= kappa if inclusive else gains > kappa
    idx = np.nonzero(qual)[0]
    lengths = rights[idx] - lefts[idx]
    order = idx[np.lexsort((splits[idx], lefts[idx], lengths))]
    index = OrderedBreakIndex()
    accepted: list[int] = []
    for j in order:
        if not index.contains_in_open_range(lefts[j], rights[j]):
            index.insert(int(splits[j]))
            accepted.append(int(j))
    return accepted


def _finish(
    splits_accepted: Sequence[int], ps: Optional[PrefixSums]
) -> Segmentation:
    cps = tuple(sorted(int(s) for s in splits_accepted))
    if ps is None:
        return Segmentation(changepoints=cps)
    return fit_segmentation(ps, cps)


def greedy_select(
    candidates: Sequence[Candidate], kappa: float, ps: Optional[PrefixSums] = None
) -> Segmentation:
    """Greedy selection at threshold ``kappa`` (strict: accepted gains > kappa)."""
    if kappa < 0:
        raise ValueError("threshold must be >= 0")
    gains, splits, lefts, rights = _candidate_arrays(candidates)
    acc = greedy_select_arrays(gains, splits, lefts, rights, kappa)
    return _finish(splits[acc], ps)


def not_select(
    candidates: Sequence[Candidate], kappa: float, ps: Optional[PrefixSums] = None
) -> Segmentation:
    """Narrowest-over-threshold selection at threshold ``kappa``."""
    if kappa < 0:
        raise ValueError("threshold must be >= 0")
    gains, splits, lefts, rights = _candidate_arrays(candidates)
    acc = not_select_arrays(gains, splits, lefts, rights, kappa)
    return _finish(splits[acc], ps)


class SolutionPath:
    """Ordered (threshold, segmentation) pairs for decreasing thresholds.

    Greedy paths are nested and stored incrementally (one added point per
    entry), so a full path over O(T) candidates needs O(T) memory; general
    paths store explicit segmentations.
    """

    def __init__(
        self,
        thresholds: Sequence[float],
        *,
        increments: Optional[Sequence[int]] = None,
        segmentations: Optional[Sequence[tuple[int, ...]]] = None,
    ):
        if (increments is None) == (segmentations is None):
            raise ValueError("provide exactly one of increments / segmentations")
        self.thresholds = np.asarray(thresholds, dtype=float)
        self._increments = (
            np.asarray(increments, dtype=np.int64) if increments is not None else None
        )
        self._segmentations = list(segmentations) if segmentations is not None else None
        n = len(self.thresholds)
        stored = len(self._increments) if self._increments is not None else len(self._segmentations)
        if n != stored:
            raise ValueError("thresholds and segmentations disagree in length")

    @property
    def nested(self) -> bool:
        return self._increments is not None

    @property
    def increments(self) -> np.ndarray:
        if self._increments is None:
            raise ValueError("not a nested path")
        return self._increments

    def __len__(self) -> int:
        return len(self.thresholds)

    def changepoints_at(self, i: int) -> tuple[int, ...]:
        """Change points of the ``i``-th path entry (0-based)."""
        if self._increments is not None:
            return tuple(sorted(int(s) for s in self._increments[: i + 1]))
        return self._segmentations[i]

    def entries(self) -> Iterator[tuple[float, tuple[int, ...]]]:
        for i, t in enumerate(self.thresholds):
            yield float(t), self.changepoints_at(i)


def greedy_path_arrays(
    gains: np.ndarray,
    splits: np.ndarray,
    lefts: np.ndarray,
    rights: np.ndarray,
    max_breaks: Optional[int] = None,
) -> SolutionPath:
    """Full greedy solution path (threshold 0), nested by construction.

    ``max_breaks`` truncates the path after that many acceptances; the
    retained prefix is identical to the untruncated path's.
    """
    acc = greedy_select_arrays(gains, splits, lefts, rights, 0.0, max_accept=max_breaks)
    return SolutionPath(
        thresholds=[float(gains[j]) for j in acc],
        increments=[int(splits[j]) for j in acc],
    )


def greedy_solution_path(candidates: Sequence[Candidate]) -> SolutionPath:
    """Greedy path: entry i holds the model after the (i+1)-th acceptance,
    with the accepted gain as its threshold."""
    gains, splits, lefts, rights = _candidate_arrays(candidates)
    return greedy_path_arrays(gains, splits, lefts, rights)


def not_path_arrays(
    gains: np.ndarray,
    splits: np.ndarray,
    lefts: np.ndarray,
    rights: np.ndarray,
) -> SolutionPath:
    """Narrowest-over-threshold path over all distinct candidate gains.

    Entry with threshold g is the selection for any kappa just below g;
    adjacent duplicate segmentations are collapsed (first threshold kept).
    Worst case O(T^2 log T) work; the path need not be nested.
    """
    distinct = np.unique(gains[gains > 0.0])[::-1]
    # one shared (length, left, split) order; each threshold scan filters it
    lengths = rights - lefts
    order = np.lexsort((splits, lefts, lengths))
    gains_ordered = gains[order]
    thresholds: list[float] = []
    segs: list[tuple[int, ...]] = []
    for g in distinct:
        index = OrderedBreakIndex()
        accepted: list[int] = []
        for j in order[gains_ordered >= g]:
            if not index.contains_in_open_range(lefts[j], rights[j]):
                index.insert(int(splits[j]))
                accepted.append(j)
        seg = tuple(sorted(int(splits[j]) for j in accepted))
        if not segs or seg != segs[-1]:
            thresholds.append(float(g))
            segs.append(seg)
    return SolutionPath(thresholds=thresholds, segmentations=segs)


def not_solution_path(candidates: Sequence[Candidate]) -> SolutionPath:
    gains, splits, lefts, rights = _candidate_arrays(candidates)
    return not_path_arrays(gains, splits, lefts, rights)


@dataclass(frozen=True)
class Penalty:
    """Model-size penalty; PEN(S + one point) - PEN(S) is O(1) for all kinds.

    Kinds: ``constant`` charges alpha per break; ``bic`` charges
    2 * sigma_sq * log(T) per break; ``ssic`` charges (log T)**theta per
    break on top of the Gaussian log-RSS data term (handled in
    :func:`ic_score`).
    """

    kind: str
    alpha: float = 1.0
    theta: float = 1.01
    sigma_sq: float = 1.0

    _KINDS = ("constant", "bic", "ssic")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown penalty kind {self.kind!r}, expected one of {self._KINDS}")

    @classmethod
    def constant(cls, alpha: float) -> "Penalty":
        return cls(kind="constant", alpha=alpha)

    @classmethod
    def bic(cls, sigma_sq: float) -> "Penalty":
        return cls(kind="bic", sigma_sq=sigma_sq)

    @classmethod
    def ssic(cls, theta: float = 1.01) -> "Penalty":
        if theta <= 1.0:
            raise ValueError("ssic exponent theta must exceed 1")
        return cls(kind="ssic", theta=theta)

    @property
    def additive(self) -> bool:
        """True when the criterion is RSS + PEN (usable by the exact solver)."""
        return self.kind in ("constant", "bic")

    def per_break(self, length: int) -> float:
        if self.kind == "constant":
            return self.alpha
        if self.kind == "bic":
            return 2.0 * self.sigma_sq * math.log(length)
        return math.log(length) ** self.theta


def penalty_value(penalty: Penalty, n_breaks: int, length: int) -> float:
    """PEN(S) for |S| = n_breaks on a series of the given length."""
    if n_breaks < 0:
        raise ValueError("n_breaks must be >= 0")
    return n_breaks * penalty.per_break(length)


def _ssic_score(rss: float, n_breaks: int, T: int, penalty: Penalty) -> float:
    if rss <= 0.0:
        warnings.warn(
            "ssic is degenerate on a perfectly fitted segmentation (RSS = 0);"
            " returning -inf",
            RuntimeWarning,
            stacklevel=3,
        )
        return -math.inf
    return 0.5 * T * math.log(rss / T) + penalty_value(penalty, n_breaks, T)


def ic_score(ps: PrefixSums, seg: Segmentation, penalty: Penalty) -> float:
    """Information criterion value of a segmentation.

    Additive kinds score RSS + PEN; ``ssic`` scores
    (T/2) log(RSS/T) + |S| (log T)**theta.
    """
    T = ps.length
    cps = seg.changepoints
    bounds = (0,) + cps + (T,)
    rss = sum(ps.segment_rss(a, b) for a, b in zip(bounds[:-1], bounds[1:]))
    if penalty.kind == "ssic":
        return _ssic_score(rss, len(cps), T, penalty)
    return rss + penalty_value(penalty, len(cps), T)


def select_by_ic(
    path: SolutionPath,
    ps: PrefixSums,
    penalty: Penalty,
    max_breaks: Optional[int] = None,
) -> Segmentation:
    """Best path entry (or the empty segmentation) under the criterion.

    Ties pick the model with fewer change points.  Nested paths are walked
    incrementally: each added point costs one O(log T) neighbour lookup and
    an O(1) RSS update.

    For ``ssic`` the comparison is restricted to models with at most
    ``max_breaks`` change points, by default ceil(T/2): the log-RSS data
    term diverges to -inf on saturated fits, so an unrestricted minimum
    degenerates to the largest model on the path.  Additive criteria are
    unrestricted unless a cap is passed explicitly.
    """
    T = ps.length
    if max_breaks is None and penalty.kind == "ssic":
        max_breaks = (T + 1) // 2
    cap = max_breaks if max_breaks is not None else T

    def score(rss: float, k: int) -> float:
        if penalty.kind == "ssic":
            return _ssic_score(rss, k, T, penalty)
        return rss + penalty_value(penalty, k, T)

    best_i = -1  # -1 encodes the empty segmentation
    best_score = score(ps.segment_rss(0, T), 0)
    if path.nested:
        index = OrderedBreakIndex()
        rss = ps.segment_rss(0, T)
        for i, point in enumerate(path.increments):
            if i >= cap:
                break
            point = int(point)
            pred, succ = index.neighbors(point)
            lo = pred if pred is not None else 0
            hi = succ if succ is not None else T
            rss += (
                ps.segment_rss(lo, point)
                + ps.segment_rss(point, hi)
                - ps.segment_rss(lo, hi)
            )
            index.insert(point)
            s = score(max(rss, 0.0), i + 1)
            if s < best_score:
                best_score = s
                best_i = i
    else:
        for i in range(len(path)):
            cps = path.changepoints_at(i)
            if len(cps) > cap:
                continue
            bounds = (0,) + cps + (T,)
            rss = sum(ps.segment_rss(a, b) for a, b in zip(bounds[:-1], bounds[1:]))
            s = score(rss, len(cps))
            if s < best_score or (s == best_score and best_i >= 0 and len(cps) < len(path.changepoints_at(best_i))):
                best_score = s
                best_i = i
    if best_i < 0:
        return fit_segmentation(ps, ())
    return fit_segmentation(ps, path.changepoints_at(best_i))


def auto_threshold(length: int, sigma_hat: float, scale: float = 1.3) -> float:
    """Detection threshold ``scale * sigma_hat * sqrt(2 log T)``."""
    if length < 2:
        raise ValueError("series length must be >= 2")
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be >= 0")
    if scale <= 0:
        raise ValueError("scale must be > 0")
    return scale * sigma_hat * math.sqrt(2.0 * math.log(length))


def estimate_noise_sd(series: Sequence[float]) -> float:
    """Robust noise scale: median |first difference| / (sqrt(2) * 0.6745).

    Insensitive to a small number of mean shifts since each contributes a
    single outlying difference.
    """
    x = np.asarray(series, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two observations")
    return float(np.median(np.abs(np.diff(x)))) / (math.sqrt(2.0) * _MAD_SCALE)
