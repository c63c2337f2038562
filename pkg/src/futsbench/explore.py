"""State-space exploration and serialization.

:func:`explore` computes the breadth-first closure of a model's
initial term under all step relations of its language, producing a
:class:`FutsModel`: an ordered state table (ids assigned in discovery
order) plus, per relation, every non-zero weight function keyed by
(source state, label).  Zero functions are implicit, so lookups
default to the domain's zero.

Serializers render a model to deterministic JSON (states in
exploration order, entries in canonical key order) or to Graphviz DOT
(one edge per non-zero entry, labelled ``label / value``; transitions
through inner distributions draw one edge per inner target with the
whole distribution inline).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import ExplorationLimitError
from .fsfun import FinFn, ff_zero
from .semiring import sr_format
from .sem_futs import RelationSpec, StepContext, futs_step, relation_labels, relation_specs
from .syntax import Model, Term, pretty, term_actions

DEFAULT_MAX_STATES = 10_000


@dataclass(frozen=True)
class StateInfo:
    """One discovered state: dense id, canonical key, readable text."""

    id: int
    key: str
    pretty: str


@dataclass
class RelationData:
    """One step relation of an explored model."""

    name: str
    kind: str  # "simple" | "nested"
    tag: str
    inner_tag: Optional[str]
    labels: Tuple[str, ...]
    # (source state id, label, non-zero weight function)
    transitions: List[Tuple[int, str, FinFn]] = field(default_factory=list)

    def function_at(self, state_id: int, label: str) -> FinFn:
        for source, lab, fn in self.transitions:
            if source == state_id and lab == label:
                return fn
        return ff_zero(self.tag)


@dataclass
class FutsModel:
    """An explored model: the finite state-to-function system."""

    lang: str
    states: List[StateInfo]
    index: dict  # canonical key -> state id
    relations: List[RelationData]
    init_id: int
    ctx: Optional[StepContext] = None  # kept for callers needing term access


def _support_keys(fn: FinFn, kind: str):
    """All state keys a function can continue into."""
    if kind == "simple":
        for key, _ in fn.entries:
            yield key
    else:
        for inner, _ in fn.entries:
            for key, _ in inner.entries:
                yield key


def explore(
    model: Model,
    max_states: int = DEFAULT_MAX_STATES,
    extra_roots: Sequence[Term] = (),
) -> FutsModel:
    """Breadth-first closure of the model's initial term (plus any

    extra root terms) under every relation of its language.
    """
    ctx = StepContext(model)
    specs = relation_specs(model.lang)
    # Action labels must also cover the extra roots, which may mention
    # actions the model's own definitions never use.
    root_actions: set = set()
    for root in extra_roots:
        root_actions.update(term_actions(root))
    relations = []
    for s in specs:
        labels = relation_labels(s, model)
        if s.fixed_labels is None and root_actions:
            labels = tuple(sorted(set(labels) | root_actions))
        relations.append(RelationData(s.name, s.kind, s.tag, s.inner_tag, labels))

    index: dict = {}
    states: List[StateInfo] = []
    queue: deque = deque()

    def discover(key: str) -> int:
        found = index.get(key)
        if found is not None:
            return found
        if len(states) >= max_states:
            raise ExplorationLimitError(
                f"exploration exceeded {max_states} states "
                f"with {len(queue)} states still on the frontier"
            )
        state_id = len(states)
        index[key] = state_id
        states.append(StateInfo(state_id, key, pretty(ctx.term_of(key))))
        queue.append(key)
        return state_id

    init_id = discover(ctx.init_key)
    for root in extra_roots:
        discover(ctx.register(root))

    while queue:
        key = queue.popleft()
        source = index[key]
        for spec, data in zip(specs, relations):
            for label in data.labels:
                fn = futs_step(ctx, key, spec.name, label)
                if not fn.entries:
                    continue
                data.transitions.append((source, label, fn))
                for succ in _support_keys(fn, spec.kind):
                    discover(succ)

    return FutsModel(model.lang, states, index, relations, init_id, ctx)


def function_at(fm: FutsModel, relation: str, state_id: int, label: str) -> FinFn:
    """The (possibly zero) weight function of one state and label."""
    for data in fm.relations:
        if data.name == relation:
            return data.function_at(state_id, label)
    raise ValueError(f"model has no relation {relation!r}")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _entry_json(fn: FinFn, kind: str) -> list:
    out = []
    for key, value in fn.entries:
        if kind == "nested" and isinstance(key, FinFn):
            out.append(
                {
                    "inner": _entry_json(key, "simple"),
                    "value": sr_format(value),
                }
            )
        else:
            out.append({"target": key, "value": sr_format(value)})
    return out


def to_json(fm: FutsModel) -> str:
    """Deterministic JSON rendering of an explored model."""
    doc = {
        "language": fm.lang,
        "init": fm.init_id,
        "states": [{"id": s.id, "term": s.key} for s in fm.states],
        "relations": [
            {
                "labels": list(data.labels),
                "kind": data.kind,
                "semiring": data.tag,
                "transitions": [
                    {
                        "source": source,
                        "label": label,
                        "continuation": _entry_json(fn, data.kind),
                    }
                    for source, label, fn in data.transitions
                ],
            }
            for data in fm.relations
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _inline_distribution(fm: FutsModel, inner: FinFn) -> str:
    parts = (
        f"s{fm.index[key]} -> {sr_format(value)}" for key, value in inner.entries
    )
    return "[" + ", ".join(parts) + "]"


def to_dot(fm: FutsModel) -> str:
    """Graphviz rendering: states as nodes (readable term text as the

    node label), one edge per non-zero entry labelled ``label / value``.
    """
    lines = ["digraph model {", "  rankdir=LR;", '  __init [shape=point, label=""];']
    lines.append(f"  __init -> s{fm.init_id};")
    for state in fm.states:
        lines.append(f'  s{state.id} [label="{_dot_escape(state.pretty)}"];')
    for data in fm.relations:
        for source, label, fn in data.transitions:
            if data.kind == "nested":
                for inner, _ in fn.entries:
                    inline = _inline_distribution(fm, inner)
                    for key, value in inner.entries:
                        lines.append(
                            f"  s{source} -> s{fm.index[key]} "
                            f'[label="{_dot_escape(f"{label} / {sr_format(value)} of {inline}")}"];'
                        )
            else:
                for key, value in fn.entries:
                    lines.append(
                        f"  s{source} -> s{fm.index[key]} "
                        f'[label="{_dot_escape(f"{label} / {sr_format(value)}")}"];'
                    )
    lines.append("}")
    return "\n".join(lines) + "\n"
