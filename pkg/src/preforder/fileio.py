"""Line-oriented text formats for graphs, feedback, learning rounds, and
query datasets.

All formats are UTF-8, tab- or space-delimited, with ``#`` comment lines
ignored; labels therefore must not contain whitespace.  Parse failures raise
:class:`ParseError` carrying the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BOTTOM, Feedback, InstanceSet, OrderingFunction, PreferenceMatrix
from .metasearch import Dataset, Query


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_graph(text: str) -> PreferenceMatrix:
    """Preference graph: one ``u v weight`` entry per line.

    Unlisted ordered pairs default to 1/2; duplicate entries are rejected.
    """
    entries: list[tuple[int, str, str, float]] = []
    labels: dict[str, None] = {}
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 'u v weight', got {line!r}")
        u, v, w_text = parts
        if u == v:
            raise ParseError(lineno, f"self edge on {u!r}")
        try:
            w = float(w_text)
        except ValueError:
            raise ParseError(lineno, f"bad weight {w_text!r}") from None
        if not (0.0 <= w <= 1.0):
            raise ParseError(lineno, f"weight {w} outside [0, 1]")
        labels.setdefault(u)
        labels.setdefault(v)
        entries.append((lineno, u, v, w))
    if not labels:
        raise ParseError(0, "no graph entries")
    instances = InstanceSet.of(labels)
    n = instances.n
    values = np.full((n, n), 0.5)
    np.fill_diagonal(values, 0.0)
    seen: set[tuple[int, int]] = set()
    for lineno, u, v, w in entries:
        ui, vi = instances.index(u), instances.index(v)
        if (ui, vi) in seen:
            raise ParseError(lineno, f"duplicate entry {u!r} -> {v!r}")
        seen.add((ui, vi))
        values[ui, vi] = w
    return PreferenceMatrix(instances, values)


def parse_feedback(text: str, instances: InstanceSet) -> Feedback:
    """Feedback pairs: ``winner loser`` with an optional positive weight."""
    pairs: list[tuple[str, str, float]] = []
    for lineno, line in _content_lines(text):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(lineno, f"expected 'winner loser [weight]', got {line!r}")
        winner, loser = parts[0], parts[1]
        weight = 1.0
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"bad weight {parts[2]!r}") from None
        for lab in (winner, loser):
            if lab not in instances:
                raise ParseError(lineno, f"unknown instance {lab!r}")
        if winner == loser:
            raise ParseError(lineno, "winner and loser must differ")
        if weight <= 0.0:
            raise ParseError(lineno, f"weight must be positive, got {weight}")
        pairs.append((winner, loser, weight))
    return Feedback.from_pairs(instances, pairs)


@dataclass(frozen=True)
class Round:
    """One parsed learning round: instance set, expert scores, feedback."""

    instances: InstanceSet
    experts: tuple[OrderingFunction, ...]
    feedback: Feedback


def parse_rounds(text: str) -> list[Round]:
    """Round blocks for the on-line learner, separated by blank lines.

    Each block is one ``X`` line naming the round's instances, one ``E`` line
    per expert giving scores positionally (``_`` abstains), and zero or more
    ``F winner loser [weight]`` feedback lines.  Every round must supply the
    same number of expert lines.
    """
    rounds: list[Round] = []
    block: list[tuple[int, str]] = []

    def flush(block_lines: list[tuple[int, str]]):
        if not block_lines:
            return
        first_no, first = block_lines[0]
        parts = first.split()
        if parts[0] != "X" or len(parts) < 2:
            raise ParseError(first_no, "round must start with 'X label...'")
        try:
            instances = InstanceSet.of(parts[1:])
        except ValueError as exc:
            raise ParseError(first_no, str(exc)) from None
        experts: list[OrderingFunction] = []
        fb_pairs: list[tuple[str, str, float]] = []
        for lineno, line in block_lines[1:]:
            parts = line.split()
            if parts[0] == "E":
                if fb_pairs:
                    raise ParseError(lineno, "expert lines must precede feedback lines")
                tokens = parts[1:]
                if len(tokens) != instances.n:
                    raise ParseError(
                        lineno, f"expected {instances.n} scores, got {len(tokens)}")
                mapping: dict[str, object] = {}
                for lab, tok in zip(instances.labels, tokens):
                    if tok == "_":
                        mapping[lab] = BOTTOM
                    else:
                        try:
                            mapping[lab] = float(tok)
                        except ValueError:
                            raise ParseError(lineno, f"bad score {tok!r}") from None
                experts.append(OrderingFunction.from_scores(instances, mapping))
            elif parts[0] == "F":
                if len(parts) not in (3, 4):
                    raise ParseError(lineno, f"expected 'F winner loser [weight]', got {line!r}")
                winner, loser = parts[1], parts[2]
                weight = 1.0
                if len(parts) == 4:
                    try:
                        weight = float(parts[3])
                    except ValueError:
                        raise ParseError(lineno, f"bad weight {parts[3]!r}") from None
                for lab in (winner, loser):
                    if lab not in instances:
                        raise ParseError(lineno, f"unknown instance {lab!r}")
                if winner == loser or weight <= 0.0:
                    raise ParseError(lineno, "feedback needs distinct labels and positive weight")
                fb_pairs.append((winner, loser, weight))
            else:
                raise ParseError(lineno, f"unexpected line {line!r} inside a round")
        if not experts:
            raise ParseError(first_no, "round has no expert lines")
        rounds.append(Round(instances, tuple(experts),
                            Feedback.from_pairs(instances, fb_pairs)))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            flush(block)
            block = []
            continue
        block.append((lineno, line))
    flush(block)
    if not rounds:
        raise ParseError(0, "no rounds found")
    counts = {len(r.experts) for r in rounds}
    if len(counts) != 1:
        raise ParseError(0, f"rounds disagree on expert count: {sorted(counts)}")
    return rounds


def parse_dataset(text: str, list_cap: int = 30) -> Dataset:
    """Query dataset: ``Q id relevant`` then ``E index label...`` lines per
    query, queries separated by blank lines.

    The expert count is the largest expert index seen plus one; experts a
    query omits get empty lists.
    """
    blocks: list[list[tuple[int, str]]] = []
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if block:
                blocks.append(block)
            block = []
            continue
        block.append((lineno, line))
    if block:
        blocks.append(block)
    if not blocks:
        raise ParseError(0, "no queries found")

    parsed: list[tuple[int, str, str, dict[int, tuple[str, ...]]]] = []
    n_experts = 0
    for blk in blocks:
        first_no, first = blk[0]
        parts = first.split()
        if parts[0] != "Q" or len(parts) != 3:
            raise ParseError(first_no, "query must start with 'Q id relevant'")
        qid, relevant = parts[1], parts[2]
        lists: dict[int, tuple[str, ...]] = {}
        for lineno, line in blk[1:]:
            parts = line.split()
            if parts[0] != "E" or len(parts) < 2:
                raise ParseError(lineno, f"expected 'E index label...', got {line!r}")
            try:
                idx = int(parts[1])
            except ValueError:
                raise ParseError(lineno, f"bad expert index {parts[1]!r}") from None
            if idx < 0:
                raise ParseError(lineno, "expert index must be nonnegative")
            if idx in lists:
                raise ParseError(lineno, f"duplicate expert index {idx}")
            lists[idx] = tuple(parts[2:])
            n_experts = max(n_experts, idx + 1)
        parsed.append((first_no, qid, relevant, lists))

    queries = []
    for first_no, qid, relevant, lists in parsed:
        expert_lists = tuple(lists.get(i, ()) for i in range(n_experts))
        try:
            queries.append(Query(id=qid, relevant=relevant, expert_lists=expert_lists))
        except ValueError as exc:
            raise ParseError(first_no, str(exc)) from None
    try:
        return Dataset(queries=tuple(queries), n_experts=n_experts, list_cap=list_cap)
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None


def format_dataset(dataset: Dataset) -> str:
    """Inverse of :func:`parse_dataset`; writes every expert line, even empty ones."""
    chunks = []
    for q in dataset.queries:
        lines = [f"Q {q.id} {q.relevant}"]
        for i, listing in enumerate(q.expert_lists):
            lines.append(" ".join(["E", str(i), *listing]).rstrip())
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
