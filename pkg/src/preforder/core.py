"""Core domain types: instance sets, ordering functions, preference matrices,
feedback, total orders, and the agreement metrics defined on them.

Conventions used throughout the package:

* Instances are interned: externally they are string labels, internally dense
  indices ``0..n-1``.  All matrices and rank vectors are indexed by interned
  position.
* A preference value near 1 recommends ranking the first argument above the
  second; 1/2 is an abstention.  Matrices are dense ``n x n`` float arrays
  whose diagonal is stored as 0 and never read.
* A total order maps each instance to a distinct rank in ``1..n`` where a
  *higher* rank means ranked above.

All types are immutable after construction (arrays are marked read-only), so
every operation here is a pure function that is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

COMPLEMENT_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-9


class GuardError(ValueError):
    """A size or feasibility guard was violated (e.g. brute force too large)."""


class AuditError(RuntimeError):
    """A runtime guarantee that must always hold was observed to fail."""


class _Bottom:
    """Sentinel score for an instance the ordering function abstains on.

    Incomparable with every number: an abstaining instance induces a 1/2
    preference against everything.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class InstanceSet:
    """An interned, ordered set of instance labels.

    The position of a label in ``labels`` is its internal index; the mapping
    is a bijection, so two sets are interchangeable iff their label tuples
    are equal.
    """

    labels: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        index = {label: i for i, label in enumerate(self.labels)}
        if len(index) != len(self.labels):
            raise ValueError("instance labels must be unique")
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, labels: Iterable[str]) -> "InstanceSet":
        return cls(tuple(labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown instance label: {label!r}") from None

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)


def _check_same_instances(a, b) -> None:
    if a.instances.labels != b.instances.labels:
        raise ValueError("operands are defined over different instance sets")


@dataclass(frozen=True)
class OrderingFunction:
    """A total assignment of scores (or BOTTOM) to an instance set.

    Higher score means ranked above; BOTTOM abstains and compares to nothing.
    """

    instances: InstanceSet
    scores: np.ndarray          # float, undefined where not ranked
    ranked: np.ndarray          # bool, False where the score is BOTTOM

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        ranked = np.asarray(self.ranked, dtype=bool)
        if scores.shape != (self.instances.n,) or ranked.shape != scores.shape:
            raise ValueError("score vector shape does not match the instance set")
        if not np.all(np.isfinite(scores[ranked])):
            raise ValueError("ranked scores must be finite numbers")
        object.__setattr__(self, "scores", _readonly(scores))
        object.__setattr__(self, "ranked", _readonly(ranked))

    @classmethod
    def from_scores(cls, instances: InstanceSet, mapping: Mapping[str, object]) -> "OrderingFunction":
        """Build from a label->score mapping; every label must be covered.

        Scores are numbers or BOTTOM.
        """
        missing = [lab for lab in instances.labels if lab not in mapping]
        if missing:
            raise ValueError(f"ordering function is missing scores for {missing}")
        scores = np.zeros(instances.n)
        ranked = np.ones(instances.n, dtype=bool)
        for lab, value in mapping.items():
            i = instances.index(lab)
            if value is BOTTOM:
                ranked[i] = False
            else:
                scores[i] = float(value)  # type: ignore[arg-type]
        return cls(instances, scores, ranked)

    def score_values(self) -> set[float]:
        """Distinct numeric scores actually used (BOTTOM excluded)."""
        return set(float(s) for s in self.scores[self.ranked])

    def pairwise(self, u: int, v: int) -> float:
        """Induced preference of instance index ``u`` over ``v``: 1, 0 or 1/2."""
        if u == v or not (self.ranked[u] and self.ranked[v]):
            return 0.5
        if self.scores[u] > self.scores[v]:
            return 1.0
        if self.scores[u] < self.scores[v]:
            return 0.0
        return 0.5


@dataclass(frozen=True)
class PreferenceMatrix:
    """Dense pairwise preference values over an interned instance set.

    Entries live in ``[0, 1]``; the diagonal is stored as 0 by convention and
    never read.  Complementarity (``values[u, v] + values[v, u] == 1``) holds
    for matrices produced by :func:`induce_preference` and
    :func:`combine_preferences` but is *not* required in general — loaded
    graphs may be arbitrary.
    """

    instances: InstanceSet
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        n = self.instances.n
        if values.shape != (n, n):
            raise ValueError(f"preference matrix must be {n}x{n}, got {values.shape}")
        off = ~np.eye(n, dtype=bool)
        bad = (values[off] < 0.0) | (values[off] > 1.0) | ~np.isfinite(values[off])
        if bad.any():
            raise ValueError("preference values must lie in [0, 1]")
        if np.any(np.diagonal(values) != 0.0):
            values = values.copy()
            np.fill_diagonal(values, 0.0)
        object.__setattr__(self, "values", _readonly(values))

    @property
    def n(self) -> int:
        return self.instances.n

    def is_complementary(self, tol: float = COMPLEMENT_TOL) -> bool:
        n = self.n
        off = ~np.eye(n, dtype=bool)
        return bool(np.all(np.abs((self.values + self.values.T)[off] - 1.0) <= tol))

    def entry(self, u_label: str, v_label: str) -> float:
        return float(self.values[self.instances.index(u_label), self.instances.index(v_label)])


@dataclass(frozen=True)
class Feedback:
    """Asserted preference pairs ``winner should be ranked above loser``.

    Pairs may repeat (repeats accumulate weight) and may be cyclic; weights
    are strictly positive and default to 1.
    """

    instances: InstanceSet
    winners: np.ndarray     # int indices
    losers: np.ndarray      # int indices
    weights: np.ndarray     # positive floats

    def __post_init__(self):
        winners = np.asarray(self.winners, dtype=np.int64)
        losers = np.asarray(self.losers, dtype=np.int64)
        weights = np.asarray(self.weights, dtype=float)
        if not (winners.shape == losers.shape == weights.shape) or winners.ndim != 1:
            raise ValueError("winners, losers and weights must be 1-d and aligned")
        if np.any(winners == losers):
            raise ValueError("feedback pairs must have distinct winner and loser")
        n = self.instances.n
        if winners.size and (winners.min() < 0 or winners.max() >= n or losers.min() < 0 or losers.max() >= n):
            raise ValueError("feedback pair index out of range")
        if np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
            raise ValueError("feedback weights must be positive finite numbers")
        object.__setattr__(self, "winners", _readonly(winners))
        object.__setattr__(self, "losers", _readonly(losers))
        object.__setattr__(self, "weights", _readonly(weights))

    @classmethod
    def from_pairs(cls, instances: InstanceSet,
                   pairs: Iterable[tuple[str, str] | tuple[str, str, float]]) -> "Feedback":
        winners, losers, weights = [], [], []
        for pair in pairs:
            if len(pair) == 2:
                w_lab, l_lab = pair      # type: ignore[misc]
                weight = 1.0
            else:
                w_lab, l_lab, weight = pair  # type: ignore[misc]
            winners.append(instances.index(w_lab))
            losers.append(instances.index(l_lab))
            weights.append(float(weight))
        return cls(instances, np.array(winners, dtype=np.int64),
                   np.array(losers, dtype=np.int64), np.array(weights))

    @property
    def size(self) -> int:
        return int(self.winners.size)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def max_pair_weight(self) -> float:
        """Largest accumulated weight over distinct ordered pairs."""
        if self.size == 0:
            return 0.0
        keys = self.winners * self.instances.n + self.losers
        order = np.argsort(keys, kind="stable")
        sums = {}
        for k, w in zip(keys[order], self.weights[order]):
            sums[int(k)] = sums.get(int(k), 0.0) + float(w)
        return max(sums.values())


@dataclass(frozen=True)
class TotalOrder:
    """A strict total order: bijection from instances onto ranks ``1..n``.

    Rank ``n`` is the top of the list; rank 1 the bottom.
    """

    instances: InstanceSet
    ranks: np.ndarray

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.int64)
        n = self.instances.n
        if ranks.shape != (n,):
            raise ValueError("rank vector shape does not match the instance set")
        if sorted(ranks.tolist()) != list(range(1, n + 1)):
            raise ValueError("ranks must be a bijection onto 1..n")
        object.__setattr__(self, "ranks", _readonly(ranks))

    @classmethod
    def from_descending(cls, instances: InstanceSet, labels_top_down: Sequence[str]) -> "TotalOrder":
        if len(labels_top_down) != instances.n:
            raise ValueError("descending label list must cover every instance")
        n = instances.n
        ranks = np.zeros(n, dtype=np.int64)
        for pos, lab in enumerate(labels_top_down):
            ranks[instances.index(lab)] = n - pos
        return cls(instances, ranks)

    @classmethod
    def from_rank_array(cls, instances: InstanceSet, ranks: np.ndarray) -> "TotalOrder":
        return cls(instances, ranks)

    @property
    def n(self) -> int:
        return self.instances.n

    def rank_of(self, label: str) -> int:
        return int(self.ranks[self.instances.index(label)])

    def position_of(self, label: str) -> int:
        """1-based position from the top (1 = ranked first)."""
        return self.n - self.rank_of(label) + 1

    def descending_indices(self) -> np.ndarray:
        return np.argsort(-self.ranks, kind="stable")

    def descending_labels(self) -> list[str]:
        return [self.instances.labels[i] for i in self.descending_indices()]


@dataclass(frozen=True)
class ReducedGraph:
    """Per unordered pair, the single surviving directed edge.

    The edge points toward the direction with the larger preference value and
    carries the absolute difference; equal pairs keep no edge.  Stored densely
    (``weights[u, v] > 0`` iff the edge ``u -> v`` survived).
    """

    instances: InstanceSet
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        n = self.instances.n
        if weights.shape != (n, n):
            raise ValueError("reduced graph weight matrix has the wrong shape")
        object.__setattr__(self, "weights", _readonly(weights))

    @property
    def n(self) -> int:
        return self.instances.n

    def edge_weight(self, u_label: str, v_label: str) -> float:
        return float(self.weights[self.instances.index(u_label), self.instances.index(v_label)])

    def edges(self) -> list[tuple[str, str, float]]:
        us, vs = np.nonzero(self.weights)
        labs = self.instances.labels
        return [(labs[u], labs[v], float(self.weights[u, v])) for u, v in zip(us, vs)]

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def as_matrix(self) -> PreferenceMatrix:
        """The reduced weights viewed as a (non-complementary) preference matrix."""
        return PreferenceMatrix(self.instances, self.weights.copy())


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def induce_preference(f: OrderingFunction) -> PreferenceMatrix:
    """Three-valued preference matrix induced by an ordering function.

    ``1`` where ``f(u) > f(v)``, ``0`` where ``f(u) < f(v)``, ``1/2`` on ties
    and wherever either side abstains.  Complementarity holds exactly because
    every entry comes from {0, 1/2, 1}.
    """
    s = f.scores
    cmp = np.sign(s[:, None] - s[None, :])
    both = f.ranked[:, None] & f.ranked[None, :]
    values = 0.5 + 0.5 * np.where(both, cmp, 0.0)
    np.fill_diagonal(values, 0.0)
    return PreferenceMatrix(f.instances, values)


def combine_preferences(weights: Sequence[float],
                        prefs: Sequence[PreferenceMatrix]) -> PreferenceMatrix:
    """Entrywise weighted sum of preference matrices.

    Weights must be nonnegative and sum to 1 (tolerance 1e-9); all matrices
    must share one interned instance set.  Combining complementary inputs
    yields a complementary output within the same tolerance.
    """
    if len(weights) != len(prefs):
        raise ValueError(f"{len(weights)} weights for {len(prefs)} matrices")
    if len(prefs) == 0:
        raise ValueError("need at least one matrix to combine")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("combination weights must be nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"combination weights must sum to 1, got {w.sum()!r}")
    base = prefs[0].instances
    for p in prefs[1:]:
        if p.instances.labels != base.labels:
            raise ValueError("matrices are defined over different instance sets")
    acc = np.zeros((base.n, base.n))
    for wi, p in zip(w, prefs):
        acc += wi * p.values
    np.clip(acc, 0.0, 1.0, out=acc)
    np.fill_diagonal(acc, 0.0)
    return PreferenceMatrix(base, acc)


def agree(order: TotalOrder, pref: PreferenceMatrix) -> float:
    """Total preference weight consistent with the order.

    Sum of ``pref[u, v]`` over all ordered pairs ranked ``u`` above ``v``.
    """
    _check_same_instances(order, pref)
    above = order.ranks[:, None] > order.ranks[None, :]
    return float(pref.values[above].sum())


def disagree(order: TotalOrder, pref: PreferenceMatrix) -> float:
    """Total preference weight the order overrides: ``sum of (1 - pref[u, v])``
    over pairs ranked ``u`` above ``v``.  ``agree + disagree == n(n-1)/2``.
    """
    _check_same_instances(order, pref)
    above = order.ranks[:, None] > order.ranks[None, :]
    return float((1.0 - pref.values[above]).sum())


def feedback_loss(pref: PreferenceMatrix, feedback: Feedback) -> float:
    """Weighted probability that the matrix disagrees with a feedback pair.

    ``1 - (sum of weight * pref[winner, loser]) / (sum of weights)``; lies in
    ``[0, 1]``.  Undefined (raises) on empty feedback.
    """
    _check_same_instances(pref, feedback)
    if feedback.size == 0:
        raise ValueError("loss is undefined for empty feedback")
    picked = pref.values[feedback.winners, feedback.losers]
    return float(1.0 - (feedback.weights * picked).sum() / feedback.total_weight)


def reduce_preferences(pref: PreferenceMatrix) -> ReducedGraph:
    """Keep, per unordered pair, one directed edge with the preference margin.

    Edge ``u -> v`` survives with weight ``max(pref[u, v] - pref[v, u], 0)``;
    pairs with equal values in both directions keep no edge.
    """
    diff = np.maximum(pref.values - pref.values.T, 0.0)
    return ReducedGraph(pref.instances, diff)
