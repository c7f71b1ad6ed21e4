"""Command-line front end.

Subcommands: ``order`` a preference graph file, run the on-line ``hedge``
learner over a rounds file, ``bench`` the ordering algorithms on random
graphs, evaluate ``metasearch`` datasets by leave-one-out, and ``gen``
synthetic datasets.  Output is tab-separated text on stdout; every command is
deterministic given its flags (bench timing is opt-in for that reason).

Exit codes: 0 success, 1 audit failure, 2 parse/usage error, 3 guard
violation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import BENCH_ALGORITHMS, format_bench_report, run_bench
from .core import AuditError, GuardError, agree, disagree
from .fileio import ParseError, format_dataset, parse_dataset, parse_graph, parse_rounds
from .hedge import (
    LearnerConfig,
    audit_loss_bound,
    init_learner,
    round_log_lines,
    round_predict,
    round_update,
    weight_lines,
)
from .metasearch import gen_synthetic, leave_one_out
from .ordering import (
    DEFAULT_BRUTE_THRESHOLD,
    brute_force_optimal,
    goodness_vs_total,
    greedy_order,
    randomized_order,
    scc_greedy_order,
)

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_PARSE = 2
EXIT_GUARD = 3
EXIT_IO = 4


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_sizes(spec: str) -> list[int]:
    """Size sets like ``3-9`` or ``3,5,20-30``."""
    sizes: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo_text, hi_text = part.split("-", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise ValueError(f"empty size range {part!r}")
            sizes.update(range(lo, hi + 1))
        else:
            sizes.add(int(part))
    if not sizes:
        raise ValueError("no sizes given")
    return sorted(sizes)


def _parse_qualities(spec: str) -> list[float]:
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def _order_with(pref, algo: str, brute_threshold: int, trials: int | None, seed: int):
    if algo == "greedy":
        return greedy_order(pref)
    if algo == "scc_greedy":
        return scc_greedy_order(pref, brute_threshold=brute_threshold)
    if algo == "brute":
        return brute_force_optimal(pref)[0]
    return randomized_order(pref, trials=trials, seed=seed)


def _cmd_order(args) -> int:
    pref = parse_graph(_read(args.graph))
    order = _order_with(pref, args.algo, args.brute_threshold, args.trials, args.seed)
    print("order\t" + ">".join(order.descending_labels()))
    print(f"agree\t{agree(order, pref):.6f}")
    print(f"disagree\t{disagree(order, pref):.6f}")
    print(f"goodness_vs_total\t{goodness_vs_total(order, pref):.6f}")
    return EXIT_OK


def _cmd_hedge(args) -> int:
    rounds = parse_rounds(_read(args.rounds))
    config = LearnerConfig(beta=args.beta, n_experts=len(rounds[0].experts),
                           ordering_algorithm=args.algo,
                           brute_threshold=args.brute_threshold,
                           trials=args.trials, seed=args.seed)
    state = init_learner(config)
    for rnd in rounds:
        prediction = round_predict(state, rnd.experts)
        state = round_update(state, rnd.experts, rnd.feedback, prediction=prediction)
    print("# t\tcombined_loss\torder_loss\tbest_expert_cum_loss\tbound_rhs")
    for line in round_log_lines(state):
        print(line)
    print("# expert_index\tweight")
    for line in weight_lines(state):
        print(line)
    if state.feedback_rounds == 0:
        print("audit\tno_feedback_rounds")
        return EXIT_OK
    audit = audit_loss_bound(state)
    verdict = "ok" if audit.holds else "FAIL"
    print(f"audit\t{audit.lhs:.6f}\t{audit.rhs:.6f}\t{verdict}")
    return EXIT_OK if audit.holds else EXIT_AUDIT


def _cmd_bench(args) -> int:
    vs_optimal = {"auto": None, "optimal": True, "total": False}[args.mode]
    results = run_bench(args.sizes, args.count, algorithms=args.algos,
                        seed=args.seed, vs_optimal=vs_optimal,
                        scc_brute_threshold=args.scc_brute_threshold)
    sys.stdout.write(format_bench_report(results, timing=args.timing))
    return EXIT_OK


def _cmd_metasearch(args) -> int:
    dataset = parse_dataset(_read(args.dataset))
    config = LearnerConfig(beta=args.beta, n_experts=dataset.n_experts,
                           ordering_algorithm=args.algo,
                           brute_threshold=args.brute_threshold,
                           trials=args.trials, seed=args.seed)
    report = leave_one_out(dataset, config, feedback_mode=args.feedback,
                           permutations=args.permutations, seed=args.seed,
                           encode_mode=args.encode)
    sys.stdout.write(report.to_text())
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.qualities is not None:
        qualities = args.qualities
        n_experts = args.experts if args.experts is not None else len(qualities)
        if len(qualities) != n_experts:
            raise ValueError(
                f"{len(qualities)} qualities for {n_experts} experts")
    else:
        if args.experts is None:
            raise ValueError("give --experts, --qualities, or both")
        n_experts = args.experts
        qualities = [0.5] * n_experts
    dataset = gen_synthetic(args.queries, n_experts, qualities,
                            universe_size=args.universe, seed=args.seed,
                            list_len=args.list_len)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(format_dataset(dataset))
    return EXIT_OK


def _add_ordering_flags(sub, default_algo: str = "scc_greedy"):
    sub.add_argument("--algo", choices=("greedy", "scc_greedy", "randomized", "brute"),
                     default=default_algo, help="ordering algorithm")
    sub.add_argument("--brute-threshold", type=int, default=DEFAULT_BRUTE_THRESHOLD,
                     dest="brute_threshold",
                     help="components at most this large are ordered exhaustively")
    sub.add_argument("--trials", type=int, default=None,
                     help="random permutations for --algo randomized (default 10n)")
    sub.add_argument("--seed", type=int, default=0, help="random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="preforder",
        description="Order instances by learned pairwise preferences.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_order = subs.add_parser("order", help="order the instances of a preference graph file")
    p_order.add_argument("graph", help="graph file: 'u v weight' lines, missing pairs are 1/2")
    _add_ordering_flags(p_order)
    p_order.set_defaults(handler=_cmd_order)

    p_hedge = subs.add_parser("hedge", help="run the on-line learner over a rounds file")
    p_hedge.add_argument("rounds", help="rounds file: X/E/F blocks separated by blank lines")
    p_hedge.add_argument("--beta", type=float, default=0.5, help="learning rate in (0, 1)")
    _add_ordering_flags(p_hedge, default_algo="greedy")
    p_hedge.set_defaults(handler=_cmd_hedge)

    p_bench = subs.add_parser("bench", help="compare ordering algorithms on random graphs")
    p_bench.add_argument("--sizes", type=_parse_sizes, required=True,
                         help="graph sizes, e.g. 3-9 or 3,5,20-30")
    p_bench.add_argument("--count", type=int, default=100, help="graphs per size")
    p_bench.add_argument("--algos", type=lambda s: tuple(s.split(",")),
                         default=BENCH_ALGORITHMS,
                         help="comma-separated subset of greedy,scc_greedy,randomized")
    p_bench.add_argument("--mode", choices=("auto", "optimal", "total"), default="auto",
                         help="whether to compute the vs-optimal ratio")
    p_bench.add_argument("--seed", type=int, default=0, help="master seed")
    p_bench.add_argument("--scc-brute-threshold", type=int, default=1,
                         dest="scc_brute_threshold",
                         help="exhaustive-ordering threshold inside components (1 = greedy only)")
    p_bench.add_argument("--timing", action="store_true",
                         help="include wall-clock micros (breaks byte-for-byte determinism)")
    p_bench.set_defaults(handler=_cmd_bench)

    p_meta = subs.add_parser("metasearch", help="leave-one-out evaluation of a dataset file")
    p_meta.add_argument("dataset", help="dataset file: Q/E blocks separated by blank lines")
    p_meta.add_argument("--feedback", choices=("full", "click"), default="full")
    p_meta.add_argument("--beta", type=float, default=0.5, help="learning rate in (0, 1)")
    p_meta.add_argument("--permutations", type=int, default=100,
                        help="training-order shuffles for click feedback")
    p_meta.add_argument("--encode", choices=("zero", "bottom"), default="zero",
                        help="how unlisted pages score")
    _add_ordering_flags(p_meta, default_algo="greedy")
    p_meta.set_defaults(handler=_cmd_metasearch)

    p_gen = subs.add_parser("gen", help="generate a synthetic dataset file")
    p_gen.add_argument("--queries", type=int, required=True)
    p_gen.add_argument("--experts", type=int, default=None)
    p_gen.add_argument("--qualities", type=_parse_qualities, default=None,
                       help="comma-separated per-expert inclusion probabilities")
    p_gen.add_argument("--universe", type=int, default=25, help="candidate pages per query")
    p_gen.add_argument("--list-len", type=int, default=10, dest="list_len")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output dataset path")
    p_gen.set_defaults(handler=_cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
