"""On-line multiplicative-weight allocation over ranking experts.

Each round the learner combines the experts' induced preference matrices
with its current weight vector, orders the round's instances with a
configurable ordering algorithm, then downweights each expert by
``beta ** loss`` against the observed feedback and renormalizes.

Two guarantees are auditable at runtime:

* the cumulative loss bound: total combined loss never exceeds
  ``a(beta) * (best expert's cumulative loss) + c(beta) * ln(N)`` with
  ``a = ln(1/beta) / (1 - beta)`` and ``c = 1 / (1 - beta)``;
* a per-round triangle inequality relating the produced order's loss to the
  combined matrix's disagreement with that order plus the combined loss.

State is immutable: ``round_update`` returns a fresh state, and
``round_predict`` is a pure function of state and experts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import (
    Feedback,
    OrderingFunction,
    PreferenceMatrix,
    TotalOrder,
    disagree,
    induce_preference,
    combine_preferences,
)
from .ordering import (
    DEFAULT_BRUTE_THRESHOLD,
    brute_force_optimal,
    greedy_order,
    randomized_order,
    scc_greedy_order,
)

ORDERING_ALGORITHMS = ("greedy", "scc_greedy", "randomized", "brute")
LOSS_BOUND_TOL = 1e-6
TRIANGLE_TOL = 1e-9
_WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class LearnerConfig:
    """Hyperparameters: learning rate in (0, 1), expert count, and the
    ordering algorithm used to turn combined matrices into orders."""

    beta: float = 0.5
    n_experts: int = 1
    ordering_algorithm: str = "greedy"
    brute_threshold: int = DEFAULT_BRUTE_THRESHOLD
    trials: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie strictly between 0 and 1")
        if self.n_experts < 1:
            raise ValueError("need at least one expert")
        if self.ordering_algorithm not in ORDERING_ALGORITHMS:
            raise ValueError(f"unknown ordering algorithm: {self.ordering_algorithm!r}")


@dataclass(frozen=True)
class RoundRecord:
    """Losses observed on one feedback round.

    ``disagree_term`` is the combined matrix's disagreement with the round's
    order, scaled by (largest accumulated pair weight) / (total feedback
    weight); with unit weights that is exactly disagreement / |F|.
    """

    t: int
    combined_loss: float
    expert_losses: tuple[float, ...]
    order_loss: float
    disagree_term: float


@dataclass(frozen=True)
class LossBoundAudit:
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class LearnerState:
    config: LearnerConfig
    weights: np.ndarray
    round: int
    cum_loss_combined: float
    cum_loss_per_expert: np.ndarray
    feedback_rounds: int
    records: tuple[RoundRecord, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        c = np.asarray(self.cum_loss_per_expert, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "cum_loss_per_expert", c)


def init_learner(config: LearnerConfig,
                 prior: Sequence[float] | None = None) -> LearnerState:
    """Fresh state with uniform weights (or a supplied simplex prior)."""
    n = config.n_experts
    if prior is None:
        weights = np.full(n, 1.0 / n)
    else:
        weights = np.asarray(prior, dtype=float)
        if weights.shape != (n,):
            raise ValueError(f"prior must supply {n} weights")
        if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("prior weights must be nonnegative and sum to 1")
    return LearnerState(config=config, weights=weights, round=0,
                        cum_loss_combined=0.0,
                        cum_loss_per_expert=np.zeros(n),
                        feedback_rounds=0, records=())


def bound_coefficients(beta: float) -> tuple[float, float]:
    """Multiplier on the best expert's loss and on ln(N) in the loss bound."""
    return math.log(1.0 / beta) / (1.0 - beta), 1.0 / (1.0 - beta)


def _check_experts(state: LearnerState, experts: Sequence[OrderingFunction]) -> None:
    if len(experts) != state.config.n_experts:
        raise ValueError(
            f"expected {state.config.n_experts} experts, got {len(experts)}")
    base = experts[0].instances
    for f in experts[1:]:
        if f.instances.labels != base.labels:
            raise ValueError("experts must share the round's instance set")


def _order_matrix(pref: PreferenceMatrix, config: LearnerConfig,
                  round_index: int) -> TotalOrder:
    alg = config.ordering_algorithm
    if alg == "greedy":
        return greedy_order(pref)
    if alg == "scc_greedy":
        return scc_greedy_order(pref, brute_threshold=config.brute_threshold)
    if alg == "brute":
        return brute_force_optimal(pref)[0]
    seed = int(np.random.SeedSequence((config.seed, round_index))
               .generate_state(1, np.uint64)[0])
    return randomized_order(pref, trials=config.trials, seed=seed)


def expert_losses(experts: Sequence[OrderingFunction],
                  feedback: Feedback) -> np.ndarray:
    """Per-expert loss against the feedback, straight from the score vectors.

    Matches the loss of each expert's induced preference matrix without
    materializing any matrix.
    """
    if feedback.size == 0:
        raise ValueError("loss is undefined for empty feedback")
    total = feedback.total_weight
    wi, li = feedback.winners, feedback.losers
    losses = np.empty(len(experts))
    for k, f in enumerate(experts):
        both = f.ranked[wi] & f.ranked[li]
        cmp = np.sign(f.scores[wi] - f.scores[li])
        vals = 0.5 + 0.5 * np.where(both, cmp, 0.0)
        losses[k] = 1.0 - float((feedback.weights * vals).sum()) / total
    return losses


def predict_from_matrices(state: LearnerState,
                          matrices: Sequence[PreferenceMatrix]) -> tuple[PreferenceMatrix, TotalOrder]:
    """Combine already-induced expert matrices and order the instances.

    Useful when the same experts recur across rounds and their induced
    matrices are cached.
    """
    if len(matrices) != state.config.n_experts:
        raise ValueError(
            f"expected {state.config.n_experts} matrices, got {len(matrices)}")
    pref = combine_preferences(state.weights, matrices)
    order = _order_matrix(pref, state.config, state.round)
    return pref, order


def round_predict(state: LearnerState,
                  experts: Sequence[OrderingFunction]) -> tuple[PreferenceMatrix, TotalOrder]:
    """Combine the experts under the current weights and order the instances.

    Pure with respect to state; the randomized ordering algorithm derives its
    seed from (config seed, round index) so prediction stays reproducible.
    """
    _check_experts(state, experts)
    return predict_from_matrices(state, [induce_preference(f) for f in experts])


def round_update(state: LearnerState, experts: Sequence[OrderingFunction],
                 feedback: Feedback,
                 prediction: tuple[PreferenceMatrix, TotalOrder] | None = None,
                 keep_record: bool = True) -> LearnerState:
    """Apply one multiplicative update and return the successor state.

    Empty feedback skips the update entirely (the loss is undefined there)
    but still advances the round counter.  ``prediction`` may pass through an
    already-computed (matrix, order) pair to avoid recomputing it for the
    round record; ``keep_record=False`` skips the record, which also skips
    computing the order when no prediction is supplied.
    """
    _check_experts(state, experts)
    if feedback.instances.labels != experts[0].instances.labels:
        raise ValueError("feedback must cover the round's instance set")
    if feedback.size == 0:
        return replace(state, round=state.round + 1)

    losses = expert_losses(experts, feedback)
    combined = float(state.weights @ losses)

    record = None
    if keep_record:
        pref, order = prediction if prediction is not None \
            else round_predict(state, experts)
        rw = order.ranks[feedback.winners]
        rl = order.ranks[feedback.losers]
        order_loss = 1.0 - float(
            (feedback.weights * (rw > rl)).sum()) / feedback.total_weight
        scale = feedback.max_pair_weight() / feedback.total_weight
        record = RoundRecord(
            t=state.round + 1, combined_loss=combined,
            expert_losses=tuple(float(x) for x in losses),
            order_loss=order_loss,
            disagree_term=scale * disagree(order, pref))

    raw = state.weights * np.power(state.config.beta, losses)
    raw = np.maximum(raw, _WEIGHT_FLOOR)
    new_weights = raw / raw.sum()
    return LearnerState(
        config=state.config,
        weights=new_weights,
        round=state.round + 1,
        cum_loss_combined=state.cum_loss_combined + combined,
        cum_loss_per_expert=state.cum_loss_per_expert + losses,
        feedback_rounds=state.feedback_rounds + 1,
        records=state.records + (record,) if record is not None else state.records)


def audit_loss_bound(state: LearnerState) -> LossBoundAudit:
    """Check the cumulative combined loss against the best-expert bound."""
    if state.feedback_rounds == 0:
        raise ValueError("loss bound audit needs at least one feedback round")
    a, c = bound_coefficients(state.config.beta)
    lhs = state.cum_loss_combined
    rhs = a * float(state.cum_loss_per_expert.min()) + c * math.log(state.config.n_experts)
    return LossBoundAudit(lhs=lhs, rhs=rhs, holds=lhs <= rhs + LOSS_BOUND_TOL)


def audit_loss_triangle(record: RoundRecord) -> bool:
    """Per-round inequality: the order's loss never exceeds the scaled
    disagreement plus the combined matrix's loss."""
    return record.order_loss <= record.disagree_term + record.combined_loss + TRIANGLE_TOL


def round_log_lines(state: LearnerState) -> list[str]:
    """One text record per feedback round:
    ``t  combined_loss  order_loss  best_expert_cum_loss  bound_rhs``."""
    if not state.records:
        return []
    a, c = bound_coefficients(state.config.beta)
    log_n = math.log(state.config.n_experts)
    cum = np.zeros(state.config.n_experts)
    lines = []
    for rec in state.records:
        cum += np.asarray(rec.expert_losses)
        best = float(cum.min())
        rhs = a * best + c * log_n
        lines.append(f"{rec.t}\t{rec.combined_loss:.6f}\t{rec.order_loss:.6f}"
                     f"\t{best:.6f}\t{rhs:.6f}")
    return lines


def weight_lines(state: LearnerState) -> list[str]:
    """Weight snapshot: ``expert_index  weight`` per line."""
    return [f"{i}\t{w:.9f}" for i, w in enumerate(state.weights)]
