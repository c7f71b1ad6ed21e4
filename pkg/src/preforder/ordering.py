"""Turning a preference matrix into a total order.

Algorithms provided:

* :func:`greedy_order` — repeatedly extract the node whose outgoing weight
  exceeds its incoming weight by the most; guaranteed to reach at least half
  of the best achievable agreement.
* :func:`scc_greedy_order` — pre-partition the reduced graph into strongly
  connected components, order the components topologically, and solve inside
  each component (exhaustively when small, greedily otherwise).
* :func:`randomized_order` — best of many random permutations and their
  reverses.
* :func:`brute_force_optimal` — exact optimum by permutation enumeration,
  usable as an oracle on small inputs.
* :func:`binary_linear_order` — exact linear-time optimum for weighted
  combinations of two-valued scoring functions.

Also here: the seeded random-graph generator, an adversarial family on which
plain greedy hits its worst-case factor, and the two goodness ratios used by
the benchmark harness.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import (
    GuardError,
    InstanceSet,
    OrderingFunction,
    PreferenceMatrix,
    ReducedGraph,
    TotalOrder,
    WEIGHT_SUM_TOL,
    reduce_preferences,
)

BRUTE_GUARD = 12          # n! enumeration is refused above this size
DEFAULT_BRUTE_THRESHOLD = 5   # components at most this large are solved exactly
_ENUM_CHUNK = 40320


@dataclass(frozen=True)
class PotentialStep:
    """Snapshot of the greedy potentials just before one extraction.

    ``potentials[v]`` is meaningful for ``v`` in ``live``; over the live set
    the potentials always sum to zero (total in-weight equals total
    out-weight), which forces the selected maximum to be nonnegative.
    """

    live: tuple[int, ...]
    potentials: np.ndarray
    selected: int

    def live_sum(self) -> float:
        return float(self.potentials[list(self.live)].sum())


@dataclass(frozen=True)
class ComponentDag:
    """Strongly connected components of a reduced graph, topologically ordered.

    ``components`` partitions the instance indices; earlier components never
    receive an edge from later ones.  ``edges`` holds inter-component
    adjacency as (earlier_pos, later_pos) pairs over component positions.
    """

    instances: InstanceSet
    components: tuple[tuple[int, ...], ...]
    edges: frozenset[tuple[int, int]]


def _agree_of_ranks(values: np.ndarray, ranks: np.ndarray) -> float:
    above = ranks[:, None] > ranks[None, :]
    return float(values[above].sum())


def _reduced_agree_of_ranks(values: np.ndarray, ranks: np.ndarray) -> float:
    diff = np.maximum(values - values.T, 0.0)
    above = ranks[:, None] > ranks[None, :]
    return float(diff[above].sum())


def _ranks_from_top_down(top_down: np.ndarray) -> np.ndarray:
    n = top_down.size
    ranks = np.empty(n, dtype=np.int64)
    ranks[top_down] = np.arange(n, 0, -1)
    return ranks


def _greedy_ranks(values: np.ndarray, trace: list | None = None) -> np.ndarray:
    n = values.shape[0]
    pi = values.sum(axis=1) - values.sum(axis=0)
    live = np.ones(n, dtype=bool)
    ranks = np.zeros(n, dtype=np.int64)
    for remaining in range(n, 0, -1):
        t = int(np.argmax(np.where(live, pi, -np.inf)))
        if trace is not None:
            trace.append(PotentialStep(tuple(int(i) for i in np.flatnonzero(live)),
                                       pi.copy(), t))
        ranks[t] = remaining
        live[t] = False
        pi += values[t, :] - values[:, t]
    return ranks


def _require_nonempty(pref: PreferenceMatrix) -> None:
    if pref.n < 1:
        raise ValueError("ordering requires at least one instance")


def greedy_order(pref: PreferenceMatrix) -> TotalOrder:
    """Order by repeated extraction of the maximum-potential node.

    The potential of a node is its total outgoing preference weight minus its
    total incoming weight; the extracted node takes the highest remaining
    rank and the potentials of the rest are updated for its removal.  Ties at
    the maximum go to the smallest interned index.
    """
    _require_nonempty(pref)
    return TotalOrder(pref.instances, _greedy_ranks(pref.values))


def greedy_order_trace(pref: PreferenceMatrix) -> tuple[TotalOrder, tuple[PotentialStep, ...]]:
    """Like :func:`greedy_order` but also returns the per-step potential tables."""
    _require_nonempty(pref)
    trace: list[PotentialStep] = []
    ranks = _greedy_ranks(pref.values, trace)
    return TotalOrder(pref.instances, ranks), tuple(trace)


def condensation(reduced: ReducedGraph) -> ComponentDag:
    """Strongly connected components of the reduced graph in topological order.

    Component order is any linearization of the inter-component edges; among
    simultaneously available components the one containing the smallest
    instance index goes first, which makes the result deterministic.
    """
    n = reduced.n
    if n < 1:
        raise ValueError("condensation requires at least one instance")
    adj = reduced.weights > 0.0
    n_comp, labels = connected_components(csr_matrix(adj), directed=True,
                                          connection="strong")
    members = [np.flatnonzero(labels == c) for c in range(n_comp)]

    us, vs = np.nonzero(adj)
    comp_edges = {(int(labels[u]), int(labels[v]))
                  for u, v in zip(us, vs) if labels[u] != labels[v]}
    out: dict[int, list[int]] = {c: [] for c in range(n_comp)}
    indeg = [0] * n_comp
    for a, b in comp_edges:
        out[a].append(b)
        indeg[b] += 1

    ready = [(int(members[c][0]), c) for c in range(n_comp) if indeg[c] == 0]
    heapq.heapify(ready)
    topo: list[int] = []
    while ready:
        _, c = heapq.heappop(ready)
        topo.append(c)
        for b in out[c]:
            indeg[b] -= 1
            if indeg[b] == 0:
                heapq.heappush(ready, (int(members[b][0]), b))
    components = tuple(tuple(int(i) for i in members[c]) for c in topo)
    pos = {c: k for k, c in enumerate(topo)}
    edges = frozenset((pos[a], pos[b]) for a, b in comp_edges)
    return ComponentDag(reduced.instances, components, edges)


def scc_greedy_order(pref: PreferenceMatrix,
                     brute_threshold: int = DEFAULT_BRUTE_THRESHOLD) -> TotalOrder:
    """Component-aware ordering: topological between components, exact or
    greedy within them.

    The reduced graph fixes the relative order of distinct strongly connected
    components (every optimal order agrees with all inter-component edges).
    Components of at most ``brute_threshold`` nodes are ordered by exhaustive
    enumeration over the reduced weights, larger ones greedily.  Thresholds
    beyond the enumeration guard (12) are capped there.
    """
    _require_nonempty(pref)
    if brute_threshold < 1:
        raise ValueError("brute_threshold must be at least 1")
    limit = min(brute_threshold, BRUTE_GUARD)
    reduced = reduce_preferences(pref)
    dag = condensation(reduced)
    d = reduced.weights
    ranks = np.zeros(pref.n, dtype=np.int64)
    next_top = pref.n
    for comp in dag.components:
        idx = np.array(comp, dtype=np.int64)
        sub = d[np.ix_(idx, idx)]
        m = idx.size
        if m <= limit:
            sub_ranks, _ = _enumerate_optimal(sub)
        else:
            sub_ranks = _greedy_ranks(sub)
        ranks[idx] = next_top - m + sub_ranks
        next_top -= m
    return TotalOrder(pref.instances, ranks)


def _enumerate_optimal(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact optimum by permutation enumeration.

    Returns the rank vector with the lexicographically smallest rank
    assignment among maximizers, plus the optimal agreement value.
    """
    n = values.shape[0]
    if n > BRUTE_GUARD:
        raise GuardError(f"exhaustive enumeration refused for n={n} > {BRUTE_GUARD}")
    best_val = -np.inf
    best_ranks: np.ndarray | None = None
    rank_row = np.arange(n, 0, -1, dtype=np.int64)
    perm_iter = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(perm_iter, _ENUM_CHUNK))
        if not chunk:
            break
        arr = np.asarray(chunk, dtype=np.int64)
        vals = np.zeros(arr.shape[0])
        for i in range(n):
            for j in range(i + 1, n):
                vals += values[arr[:, i], arr[:, j]]
        cmax = float(vals.max())
        if cmax < best_val:
            continue
        cand = arr[vals == cmax]
        ranks_mat = np.empty_like(cand)
        ranks_mat[np.arange(cand.shape[0])[:, None], cand] = rank_row[None, :]
        lex = np.lexsort(ranks_mat.T[::-1])
        chunk_best = ranks_mat[lex[0]]
        if cmax > best_val or tuple(chunk_best) < tuple(best_ranks):  # type: ignore[arg-type]
            best_val = cmax
            best_ranks = chunk_best
    assert best_ranks is not None
    return best_ranks, best_val


def brute_force_optimal(pref: PreferenceMatrix) -> tuple[TotalOrder, float]:
    """Exact best order and its agreement value, by full enumeration.

    Guarded at n <= 12; among maximizers the lexicographically smallest rank
    assignment is returned so results are reproducible.
    """
    _require_nonempty(pref)
    ranks, value = _enumerate_optimal(pref.values)
    return TotalOrder(pref.instances, ranks), value


def randomized_order(pref: PreferenceMatrix, trials: int | None = None,
                     seed: int = 0) -> TotalOrder:
    """Best of ``trials`` random permutations and their reverses.

    For every drawn permutation either it or its reverse agrees with at least
    half of the reduced edge weight, so the kept order always does too.
    ``trials`` defaults to ``10 * n``.  Deterministic given (seed, trials).
    """
    _require_nonempty(pref)
    n = pref.n
    if trials is None:
        trials = 10 * n
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    perms = rng.permuted(np.tile(np.arange(n), (trials, 1)), axis=1)
    v = pref.values
    agrees = np.zeros(trials)
    for i in range(n):
        for j in range(i + 1, n):
            agrees += v[perms[:, i], perms[:, j]]
    # a permutation and its reverse split the total off-diagonal weight
    rev = v.sum() - agrees
    k = int(np.argmax(np.maximum(agrees, rev)))
    top_down = perms[k] if agrees[k] >= rev[k] else perms[k, ::-1]
    return TotalOrder(pref.instances, _ranks_from_top_down(top_down))


def _check_combination_weights(weights: Sequence[float], count: int) -> np.ndarray:
    if len(weights) != count:
        raise ValueError(f"{len(weights)} weights for {count} scoring functions")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0):
        raise ValueError("combination weights must be nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"combination weights must sum to 1, got {w.sum()!r}")
    return w


def binary_linear_order(fs: Sequence[OrderingFunction],
                        weights: Sequence[float]) -> TotalOrder:
    """Exact optimum for a weighted combination of two-valued score functions.

    All functions must map into one common two-element numeric score set with
    no abstentions.  Sorting by the weighted sum of (normalized) scores
    maximizes agreement with the combined preference matrix; for every pair
    the combined matrix's larger direction is realized.  Ties are broken by
    smallest interned index.
    """
    if len(fs) == 0:
        raise ValueError("need at least one scoring function")
    w = _check_combination_weights(weights, len(fs))
    base = fs[0].instances
    for f in fs[1:]:
        if f.instances.labels != base.labels:
            raise ValueError("scoring functions are defined over different instance sets")
    union: set[float] = set()
    for f in fs:
        if not f.ranked.all():
            raise ValueError("two-valued ordering requires fully ranked functions")
        union |= f.score_values()
    if len(union) > 2:
        raise ValueError(f"score sets must share at most two values, saw {sorted(union)}")
    hi = max(union)
    rho = np.zeros(base.n)
    if len(union) == 2:
        for wi, f in zip(w, fs):
            rho += wi * (f.scores == hi)
    top_down = np.argsort(-rho, kind="stable")
    return TotalOrder(base, _ranks_from_top_down(top_down))


def random_pref_graph(n: int, seed: int = 0) -> PreferenceMatrix:
    """Uniform random complementary preference matrix on ``n`` instances.

    Each unordered pair draws one value uniformly from [0, 1); the opposite
    direction gets its complement, so complementarity holds exactly.
    """
    if n < 2:
        raise ValueError("random preference graphs need at least 2 instances")
    rng = np.random.default_rng(seed)
    values = np.zeros((n, n))
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(iu.size)
    values[iu, ju] = draws
    values[ju, iu] = 1.0 - draws
    instances = InstanceSet.of(f"v{i}" for i in range(n))
    return PreferenceMatrix(instances, values)


def greedy_worst_case_family(k: int) -> PreferenceMatrix:
    """Adversarial instance where plain greedy only reaches half of optimal.

    ``k`` source nodes each point at a hub, which points at ``k + 2`` sinks
    (all edges weight 1, everything else 0).  The hub has the largest
    potential, so greedy extracts it first and forfeits all k incoming edges,
    scoring ``k + 2`` against the optimum ``2k + 2``.  The graph is already a
    partial order, so the component-aware algorithm recovers the optimum.

    Nodes are labeled "1" .. "2k+3" left to right; the hub is node ``k + 1``.
    """
    if k < 1:
        raise ValueError("family parameter k must be at least 1")
    n = 2 * k + 3
    hub = k  # interned index of the node labeled k+1
    values = np.zeros((n, n))
    values[:hub, hub] = 1.0
    values[hub, hub + 1:] = 1.0
    instances = InstanceSet.of(str(i + 1) for i in range(n))
    return PreferenceMatrix(instances, values)


def goodness_vs_optimal(order: TotalOrder, optimal: TotalOrder,
                        pref: PreferenceMatrix) -> float:
    """Reduced-edge weight kept by ``order`` relative to the optimal order.

    A degenerate graph whose optimal order keeps no reduced weight scores 1.0
    (any order is perfect there).
    """
    if order.instances.labels != pref.instances.labels \
            or optimal.instances.labels != pref.instances.labels:
        raise ValueError("orders and matrix must share one instance set")
    num = _reduced_agree_of_ranks(pref.values, order.ranks)
    den = _reduced_agree_of_ranks(pref.values, optimal.ranks)
    if den == 0.0:
        return 1.0
    return num / den


def goodness_vs_total(order: TotalOrder, pref: PreferenceMatrix) -> float:
    """Reduced-edge weight kept by ``order`` relative to all reduced weight."""
    if order.instances.labels != pref.instances.labels:
        raise ValueError("order and matrix must share one instance set")
    diff = np.maximum(pref.values - pref.values.T, 0.0)
    den = float(diff.sum())
    if den == 0.0:
        return 1.0
    above = order.ranks[:, None] > order.ranks[None, :]
    return float(diff[above].sum()) / den
