"""Simulated metasearch evaluation.

A dataset is a set of queries, each with one relevant page and one ranked
list per search expert.  Experts are encoded as scoring functions (first
listed page scores highest, unlisted pages score zero or abstain), feedback
is simulated either as full relevance (relevant page beats everything) or as
click data (relevant page beats only the pages shown above it), and systems
are compared by leave-one-out rank statistics: top-k counts, capped average
rank, and per-expert sign tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Feedback,
    InstanceSet,
    OrderingFunction,
    TotalOrder,
    induce_preference,
)
from .hedge import (
    LearnerConfig,
    LearnerState,
    init_learner,
    predict_from_matrices,
    round_update,
)

DEFAULT_LIST_CAP = 30
DEFAULT_RANK_CAP = DEFAULT_LIST_CAP + 1
Z_THRESHOLD = 3.090  # one-sided normal quantile for confidence 0.999

Rank = int | None


@dataclass(frozen=True)
class Query:
    """One search task: an id, the single relevant page, and each expert's
    ranked result list (possibly empty, never with duplicates)."""

    id: str
    relevant: str
    expert_lists: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not any(self.expert_lists):
            raise ValueError(f"query {self.id!r} has no nonempty expert list")
        for i, listing in enumerate(self.expert_lists):
            if len(set(listing)) != len(listing):
                raise ValueError(f"query {self.id!r} expert {i} lists a page twice")

    def universe(self) -> InstanceSet:
        """All pages any expert returned, in first-appearance order."""
        seen: dict[str, None] = {}
        for listing in self.expert_lists:
            for label in listing:
                seen.setdefault(label)
        return InstanceSet.of(seen)


@dataclass(frozen=True)
class Dataset:
    queries: tuple[Query, ...]
    n_experts: int
    list_cap: int = DEFAULT_LIST_CAP

    def __post_init__(self):
        if self.list_cap < 1:
            raise ValueError("list cap must be at least 1")
        for q in self.queries:
            if len(q.expert_lists) != self.n_experts:
                raise ValueError(
                    f"query {q.id!r} has {len(q.expert_lists)} lists, expected {self.n_experts}")
            for i, listing in enumerate(q.expert_lists):
                if len(listing) > self.list_cap:
                    raise ValueError(
                        f"query {q.id!r} expert {i} exceeds the list cap {self.list_cap}")


def encode_expert(listing: Sequence[str], universe: InstanceSet,
                  mode: str = "zero", cap: int = DEFAULT_LIST_CAP) -> OrderingFunction:
    """Scores for one expert's list: the k-th listed page gets ``cap + 1 - k``.

    Unlisted pages score 0 in ``zero`` mode; in ``bottom`` mode they abstain,
    which induces 1/2 preferences against everything.
    """
    if mode not in ("zero", "bottom"):
        raise ValueError(f"unknown encoding mode: {mode!r}")
    if len(listing) > cap:
        raise ValueError(f"list of {len(listing)} pages exceeds the cap {cap}")
    if len(set(listing)) != len(listing):
        raise ValueError("expert list contains a duplicate page")
    scores = np.zeros(universe.n)
    ranked = np.ones(universe.n, dtype=bool)
    if mode == "bottom":
        ranked[:] = False
    for k, label in enumerate(listing, start=1):
        i = universe.index(label)  # raises if the list leaves the universe
        scores[i] = cap + 1 - k
        ranked[i] = True
    return OrderingFunction(universe, scores, ranked)


def full_feedback(relevant: str, universe: InstanceSet) -> Feedback:
    """The relevant page is preferred to every other page, unit weights."""
    rel = universe.index(relevant)
    others = [i for i in range(universe.n) if i != rel]
    return Feedback(universe,
                    np.full(len(others), rel, dtype=np.int64),
                    np.array(others, dtype=np.int64),
                    np.ones(len(others)))


def click_feedback(presented: TotalOrder, relevant: str) -> Feedback:
    """The relevant page is preferred to exactly the pages presented above it."""
    universe = presented.instances
    rel = universe.index(relevant)
    above = np.flatnonzero(presented.ranks > presented.ranks[rel])
    return Feedback(universe,
                    np.full(above.size, rel, dtype=np.int64),
                    above.astype(np.int64),
                    np.ones(above.size))


def avg_rank(ranks: Sequence[Rank], cap: int = DEFAULT_RANK_CAP) -> float:
    """Mean rank after replacing missing or beyond-cap ranks with the cap."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if len(ranks) == 0:
        raise ValueError("average rank of an empty sequence is undefined")
    eff = [cap if (r is None or r > cap - 1) else r for r in ranks]
    return sum(eff) / len(eff)


def top_k(ranks: Sequence[Rank], k: int) -> int:
    """How many ranks land within the top k (missing never does)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return sum(1 for r in ranks if r is not None and r <= k)


@dataclass(frozen=True)
class SignTestResult:
    """Normal-approximation sign test of a learned system against one expert.

    ``reject_h1`` rejects "the expert ranks better with probability >= 1/2";
    ``reject_h2`` rejects "the expert ranks no worse with probability >= 1/2"
    (ties side with the expert there, making it strictly harder to reject).
    Queries where neither side ranks the page within the cap are incomparable
    and dropped; with no comparable queries, nothing is rejected.
    """

    z_h1: float
    z_h2: float
    n_comparable: int
    reject_h1: bool
    reject_h2: bool


def sign_test(learned_ranks: Sequence[Rank], expert_ranks: Sequence[Rank],
              cap: int = DEFAULT_RANK_CAP) -> SignTestResult:
    if len(learned_ranks) != len(expert_ranks):
        raise ValueError("rank sequences must be aligned by query")
    wins_against_h1 = 0   # queries where the expert is not strictly better
    wins_against_h2 = 0   # queries where the learned system is strictly better
    n = 0
    for lr, er in zip(learned_ranks, expert_ranks):
        l_eff = cap if (lr is None or lr > cap - 1) else lr
        e_eff = cap if (er is None or er > cap - 1) else er
        if l_eff > cap - 1 and e_eff > cap - 1:
            continue
        n += 1
        if not (e_eff < l_eff):
            wins_against_h1 += 1
        if l_eff < e_eff:
            wins_against_h2 += 1
    if n == 0:
        return SignTestResult(float("nan"), float("nan"), 0, False, False)
    half_sd = (n / 4.0) ** 0.5
    z1 = (wins_against_h1 - n / 2.0) / half_sd
    z2 = (wins_against_h2 - n / 2.0) / half_sd
    return SignTestResult(z1, z2, n, z1 >= Z_THRESHOLD, z2 >= Z_THRESHOLD)


@dataclass(frozen=True)
class EvalReport:
    """Leave-one-out ranks for the learned system and every expert.

    Ranks are 1-based positions of the relevant page (None when a system did
    not rank it at all); ``cap`` is the artificial rank assigned to missing
    or beyond-cap entries when averaging.
    """

    query_ids: tuple[str, ...]
    learned_ranks: tuple[Rank, ...]
    expert_ranks: tuple[tuple[Rank, ...], ...]
    cap: int
    feedback_mode: str

    def learned_avg_rank(self) -> float:
        return avg_rank(self.learned_ranks, self.cap)

    def expert_avg_rank(self, i: int) -> float:
        return avg_rank(self.expert_ranks[i], self.cap)

    def sign_test_vs_expert(self, i: int) -> SignTestResult:
        return sign_test(self.learned_ranks, self.expert_ranks[i], self.cap)

    def to_text(self) -> str:
        k_max = self.cap - 1
        lines = ["# system\ttop1\ttop10\ttop30\tavg_rank"]

        def row(name: str, ranks: Sequence[Rank]) -> str:
            return (f"{name}\t{top_k(ranks, 1)}\t{top_k(ranks, min(10, k_max))}"
                    f"\t{top_k(ranks, k_max)}\t{avg_rank(ranks, self.cap):.4f}")

        lines.append(row("learned", self.learned_ranks))
        for i, ranks in enumerate(self.expert_ranks):
            lines.append(row(f"expert_{i}", ranks))
        lines.append("# signtest\texpert\tn_comparable\tz_h1\tz_h2\treject_h1\treject_h2")
        for i in range(len(self.expert_ranks)):
            s = self.sign_test_vs_expert(i)
            lines.append(f"signtest\texpert_{i}\t{s.n_comparable}\t{s.z_h1:.4f}"
                         f"\t{s.z_h2:.4f}\t{int(s.reject_h1)}\t{int(s.reject_h2)}")
        return "\n".join(lines) + "\n"


def _expert_standalone_rank(query: Query, expert: int) -> Rank:
    listing = query.expert_lists[expert]
    try:
        return listing.index(query.relevant) + 1
    except ValueError:
        return None


def _lower_median(values: list[int]) -> int:
    return sorted(values)[(len(values) - 1) // 2]


def _train_fold(dataset: Dataset, config: LearnerConfig, skip: int,
                feedback_mode: str, order_of_training: Sequence[int],
                encoded: list[list[OrderingFunction]],
                matrices: list[list]) -> LearnerState:
    state = init_learner(config)
    for qi in order_of_training:
        if qi == skip:
            continue
        query = dataset.queries[qi]
        experts = encoded[qi]
        universe = experts[0].instances
        if feedback_mode == "full":
            fb = full_feedback(query.relevant, universe) \
                if query.relevant in universe else Feedback.from_pairs(universe, [])
            state = round_update(state, experts, fb, keep_record=False)
        else:
            prediction = predict_from_matrices(state, matrices[qi])
            fb = click_feedback(prediction[1], query.relevant) \
                if query.relevant in universe else Feedback.from_pairs(universe, [])
            state = round_update(state, experts, fb, prediction=prediction,
                                 keep_record=False)
    return state


def leave_one_out(dataset: Dataset, config: LearnerConfig,
                  feedback_mode: str = "full", permutations: int = 100,
                  seed: int = 0, encode_mode: str = "zero") -> EvalReport:
    """Evaluate the learner by holding out each query in turn.

    Training under full feedback is order-invariant (final weights depend
    only on the set of training queries), so that mode trains once per fold
    in canonical query order and ignores ``permutations`` and ``seed``.
    Click feedback depends on each round's presented order, so that mode
    repeats training over ``permutations`` seeded shuffles of the training
    queries and records the lower median of the held-out ranks.
    """
    if len(dataset.queries) == 0:
        raise ValueError("leave-one-out needs a nonempty dataset")
    if feedback_mode not in ("full", "click"):
        raise ValueError(f"unknown feedback mode: {feedback_mode!r}")
    if permutations < 1:
        raise ValueError("permutations must be at least 1")
    if config.n_experts != dataset.n_experts:
        raise ValueError("learner is configured for a different expert count")

    q_count = len(dataset.queries)
    encoded: list[list[OrderingFunction]] = []
    matrices: list[list] = []
    for q in dataset.queries:
        universe = q.universe()
        fs = [encode_expert(listing, universe, mode=encode_mode, cap=dataset.list_cap)
              for listing in q.expert_lists]
        encoded.append(fs)
        matrices.append([induce_preference(f) for f in fs])

    learned: list[Rank] = []
    for fold in range(q_count):
        query = dataset.queries[fold]
        universe = encoded[fold][0].instances
        if query.relevant not in universe:
            learned.append(None)
            continue
        if feedback_mode == "full":
            state = _train_fold(dataset, config, fold, feedback_mode,
                                range(q_count), encoded, matrices)
            _, order = predict_from_matrices(state, matrices[fold])
            learned.append(order.position_of(query.relevant))
        else:
            per_perm: list[int] = []
            for p in range(permutations):
                rng = np.random.default_rng(np.random.SeedSequence((seed, fold, p)))
                shuffled = rng.permutation(q_count)
                state = _train_fold(dataset, config, fold, feedback_mode,
                                    shuffled.tolist(), encoded, matrices)
                _, order = predict_from_matrices(state, matrices[fold])
                per_perm.append(order.position_of(query.relevant))
            learned.append(_lower_median(per_perm))

    expert_ranks = tuple(
        tuple(_expert_standalone_rank(q, i) for q in dataset.queries)
        for i in range(dataset.n_experts))
    return EvalReport(
        query_ids=tuple(q.id for q in dataset.queries),
        learned_ranks=tuple(learned),
        expert_ranks=expert_ranks,
        cap=dataset.list_cap + 1,
        feedback_mode=feedback_mode)


def gen_synthetic(n_queries: int, n_experts: int, qualities: Sequence[float],
                  universe_size: int, seed: int = 0, list_len: int = 10,
                  list_cap: int = DEFAULT_LIST_CAP) -> Dataset:
    """Seeded synthetic dataset with controllable expert quality.

    Expert ``i`` includes the relevant page in its list with probability
    ``qualities[i]`` and, when it does, places it near the top for strong
    experts (the position is ``1 + Binomial(list_len - 1, (1 - q) / 2)``, so
    quality 1 always lists it first).  Queries are resampled until at least
    one expert lists the relevant page, mirroring how real query sets only
    keep searches some expert could answer.
    """
    if n_queries < 1 or n_experts < 1:
        raise ValueError("need at least one query and one expert")
    if len(qualities) != n_experts:
        raise ValueError(f"expected {n_experts} quality values")
    if any(not (0.0 <= q <= 1.0) for q in qualities):
        raise ValueError("qualities must lie in [0, 1]")
    if max(qualities) <= 0.0:
        raise ValueError("at least one expert needs positive quality")
    if not (1 <= list_len <= list_cap):
        raise ValueError("list_len must lie in 1..list_cap")
    if universe_size <= list_len:
        raise ValueError("universe_size must exceed list_len")

    queries = []
    for t in range(n_queries):
        rng = np.random.default_rng(np.random.SeedSequence((seed, t)))
        pool = [f"q{t}p{j}" for j in range(universe_size)]
        relevant = pool[int(rng.integers(universe_size))]
        others = [p for p in pool if p != relevant]
        while True:
            lists = []
            hit = False
            for q in qualities:
                include = rng.random() < q
                if include:
                    hit = True
                    pos = 1 + int(rng.binomial(list_len - 1, (1.0 - q) / 2.0))
                    fillers = rng.choice(others, size=list_len - 1, replace=False)
                    listing = list(fillers[:pos - 1]) + [relevant] + list(fillers[pos - 1:])
                else:
                    listing = list(rng.choice(others, size=list_len, replace=False))
                lists.append(tuple(listing))
            if hit:
                break
        queries.append(Query(id=f"q{t}", relevant=relevant, expert_lists=tuple(lists)))
    return Dataset(queries=tuple(queries), n_experts=n_experts, list_cap=list_cap)
