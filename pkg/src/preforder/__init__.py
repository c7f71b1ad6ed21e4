"""preforder: learn pairwise preferences from ranking experts and turn them
into near-optimal total orders."""

from .core import (
    AuditError,
    BOTTOM,
    Feedback,
    GuardError,
    InstanceSet,
    OrderingFunction,
    PreferenceMatrix,
    ReducedGraph,
    TotalOrder,
    agree,
    combine_preferences,
    disagree,
    feedback_loss,
    induce_preference,
    reduce_preferences,
)
from .ordering import (
    ComponentDag,
    PotentialStep,
    binary_linear_order,
    brute_force_optimal,
    condensation,
    goodness_vs_optimal,
    goodness_vs_total,
    greedy_order,
    greedy_order_trace,
    greedy_worst_case_family,
    random_pref_graph,
    randomized_order,
    scc_greedy_order,
)
from .bench import (
    BenchResult,
    format_bench_report,
    optimal_agreements_batch,
    run_bench,
)
from .hedge import (
    LearnerConfig,
    LearnerState,
    LossBoundAudit,
    RoundRecord,
    audit_loss_bound,
    audit_loss_triangle,
    bound_coefficients,
    expert_losses,
    init_learner,
    predict_from_matrices,
    round_predict,
    round_update,
)
from .metasearch import (
    Dataset,
    EvalReport,
    Query,
    SignTestResult,
    avg_rank,
    click_feedback,
    encode_expert,
    full_feedback,
    gen_synthetic,
    leave_one_out,
    sign_test,
    top_k,
)
from .fileio import (
    ParseError,
    Round,
    format_dataset,
    parse_dataset,
    parse_feedback,
    parse_graph,
    parse_rounds,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
