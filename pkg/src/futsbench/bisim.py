"""Bisimilarity for explored function-transition systems.

Two states are bisimilar when, relation by relation and label by label,
their continuation functions assign the same total weight to every class
of a stable partition.  This module computes the coarsest such partition
by signature-based refinement, provides a brute-force oracle for small
systems, builds an independent partition from the step-derivation oracle,
and constructs quotient systems.
"""

from dataclasses import dataclass
from fractions import Fraction
import json
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import FutsError, SizeLimitError, UnknownStateError
from .explore import DEFAULT_MAX_STATES, FutsModel, RelationData, StateInfo, explore
from .fsfun import ff_block_sums, ff_make
from .semiring import Value, sr_add, sr_constants, sr_format, sr_is_zero
from .sem_oracle import (
    action_distributions,
    delay_derivations,
    interactive_transitions,
    pepa_transitions,
    timed_transitions,
)
from .syntax import Model, term_key

BRUTE_FORCE_MAX = 8


@dataclass(frozen=True)
class Partition:
    """A block assignment: state id -> block id.

    Block ids are dense (0..k-1) and ordered by least member state id.
    """

    assignment: Tuple[int, ...]

    @property
    def n_blocks(self) -> int:
        return max(self.assignment) + 1 if self.assignment else 0

    def block_of(self, state_id: int) -> int:
        if not (0 <= state_id < len(self.assignment)):
            raise UnknownStateError(f"no state with id {state_id}")
        return self.assignment[state_id]

    def blocks(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in range(self.n_blocks)]
        for state_id, block in enumerate(self.assignment):
            out[block].append(state_id)
        return out


def canonical_assignment(raw: Sequence[int]) -> Tuple[int, ...]:
    """Renumber blocks densely in order of first appearance."""
    seen: Dict[int, int] = {}
    out = []
    for b in raw:
        if b not in seen:
            seen[b] = len(seen)
        out.append(seen[b])
    return tuple(out)


def partition_to_json(partition: Partition) -> str:
    return json.dumps({"blocks": partition.blocks()}, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Indexed transition tables
# ---------------------------------------------------------------------------
#
# For refinement we replace state keys by integer state ids once, so each
# round only touches integers and semiring values.
#
#   simple entry:  ((target_id, value), ...)
#   nested entry:  ((((target_id, value), ...), outer_value), ...)

_SimpleEntries = Tuple[Tuple[int, Value], ...]


def _indexed_tables(fm: FutsModel):
    tables = []
    for data in fm.relations:
        table: Dict[Tuple[int, str], tuple] = {}
        for source, label, fn in data.transitions:
            if data.kind == "simple":
                table[(source, label)] = tuple(
                    (fm.index[key], value) for key, value in fn.entries
                )
            else:
                table[(source, label)] = tuple(
                    (
                        tuple((fm.index[key], value) for key, value in inner.entries),
                        outer_value,
                    )
                    for inner, outer_value in fn.entries
                )
        tables.append(table)
    return tables


def _block_sum_sig(entries: _SimpleEntries, assignment: Sequence[int]):
    """Canonical per-block totals: sorted (block, value text) pairs."""
    acc: Dict[int, Value] = {}
    for target, value in entries:
        block = assignment[target]
        acc[block] = sr_add(acc[block], value) if block in acc else value
    return tuple(
        (block, sr_format(value))
        for block, value in sorted(acc.items(), key=lambda kv: kv[0])
        if not sr_is_zero(value)
    )


def _lifted_sig(entry, assignment: Sequence[int]):
    """Nested functions: classify inner functions by their per-block totals,
    then fold the outer values of inner functions that fall together."""
    acc: Dict[tuple, Value] = {}
    for inner_entries, outer_value in entry:
        inner_sig = _block_sum_sig(inner_entries, assignment)
        acc[inner_sig] = (
            sr_add(acc[inner_sig], outer_value) if inner_sig in acc else outer_value
        )
    return tuple(
        (inner_sig, sr_format(value))
        for inner_sig, value in sorted(acc.items(), key=lambda kv: kv[0])
        if not sr_is_zero(value)
    )


def _state_signature(relations, tables, state_id: int, assignment: Sequence[int]):
    parts = []
    for data, table in zip(relations, tables):
        for label in data.labels:
            entry = table.get((state_id, label))
            if entry is None:
                parts.append(())
            elif data.kind == "simple":
                parts.append(_block_sum_sig(entry, assignment))
            else:
                parts.append(_lifted_sig(entry, assignment))
    return tuple(parts)


def _refine_loop(n_states: int, sig_of: Callable[[int, Sequence[int]], tuple]) -> Partition:
    """Split blocks by signature until nothing splits any more."""
    if n_states == 0:
        return Partition(())
    assignment = [0] * n_states
    for _ in range(n_states + 1):
        seen: Dict[tuple, int] = {}
        new: List[int] = []
        for state_id in range(n_states):
            key = (assignment[state_id], sig_of(state_id, assignment))
            if key not in seen:
                seen[key] = len(seen)
            new.append(seen[key])
        if new == assignment:
            return Partition(tuple(assignment))
        assignment = new
    raise FutsError("internal error: partition refinement did not stabilise")


def refine(fm: FutsModel) -> Partition:
    """Coarsest partition whose per-block continuation totals are stable."""
    tables = _indexed_tables(fm)

    def sig_of(state_id: int, assignment: Sequence[int]) -> tuple:
        return _state_signature(fm.relations, tables, state_id, assignment)

    return _refine_loop(len(fm.states), sig_of)


def _check_state_id(fm: FutsModel, state_id: int) -> None:
    if not isinstance(state_id, int) or not (0 <= state_id < len(fm.states)):
        raise UnknownStateError(f"no state with id {state_id!r}")


def bisimilar(fm: FutsModel, left: int, right: int) -> bool:
    _check_state_id(fm, left)
    _check_state_id(fm, right)
    partition = refine(fm)
    return partition.assignment[left] == partition.assignment[right]


# ---------------------------------------------------------------------------
# Distinguishing witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """First point, in canonical order, where two states' signatures split."""

    relation: str
    label: str
    subject: str  # "block 3" or "distribution [block 0 -> 1/2, ...]"
    left: str
    right: str


def _describe_inner_sig(inner_sig) -> str:
    if not inner_sig:
        return "distribution []"
    body = ", ".join(f"block {block} -> {text}" for block, text in inner_sig)
    return f"distribution [{body}]"


def distinguish(fm: FutsModel, left: int, right: int) -> Optional[Witness]:
    """A (relation, label, block) witness for non-bisimilarity, or None."""
    _check_state_id(fm, left)
    _check_state_id(fm, right)
    partition = refine(fm)
    if partition.assignment[left] == partition.assignment[right]:
        return None
    tables = _indexed_tables(fm)
    assignment = partition.assignment
    for data, table in zip(fm.relations, tables):
        zero_text = sr_format(sr_constants(data.tag)[0])
        for label in data.labels:
            entry_l = table.get((left, label), ())
            entry_r = table.get((right, label), ())
            if data.kind == "simple":
                sums_l = dict(_block_sum_sig(entry_l, assignment))
                sums_r = dict(_block_sum_sig(entry_r, assignment))
                for block in sorted(set(sums_l) | set(sums_r)):
                    if sums_l.get(block) != sums_r.get(block):
                        return Witness(
                            data.name,
                            label,
                            f"block {block}",
                            sums_l.get(block, zero_text),
                            sums_r.get(block, zero_text),
                        )
            else:
                lift_l = dict(_lifted_sig(entry_l, assignment))
                lift_r = dict(_lifted_sig(entry_r, assignment))
                for inner_sig in sorted(set(lift_l) | set(lift_r)):
                    if lift_l.get(inner_sig) != lift_r.get(inner_sig):
                        return Witness(
                            data.name,
                            label,
                            _describe_inner_sig(inner_sig),
                            lift_l.get(inner_sig, zero_text),
                            lift_r.get(inner_sig, zero_text),
                        )
    raise FutsError(
        "internal error: states in different blocks have identical signatures"
    )


# ---------------------------------------------------------------------------
# Brute-force oracle (small systems)
# ---------------------------------------------------------------------------


def _all_assignments(n_states: int):
    """Every partition of {0..n-1}, as canonical dense assignments."""
    assignment = [0] * n_states

    def rec(i: int, used: int):
        if i == n_states:
            yield tuple(assignment)
            return
        for block in range(used):
            assignment[i] = block
            yield from rec(i + 1, used)
        assignment[i] = used
        yield from rec(i + 1, used + 1)

    yield from rec(1, 1)


def brute_force(fm: FutsModel) -> Partition:
    """Coarsest stable partition found by checking every partition.

    Only usable on systems of at most BRUTE_FORCE_MAX states; the result is
    the transitive-closure union of all partitions whose blocks agree on
    per-block continuation totals for every relation and label.
    """
    n_states = len(fm.states)
    if n_states > BRUTE_FORCE_MAX:
        raise SizeLimitError(
            f"brute-force bisimilarity is capped at {BRUTE_FORCE_MAX} states; "
            f"this system has {n_states}"
        )
    if n_states == 0:
        return Partition(())
    tables = _indexed_tables(fm)

    # Raw-value signatures (no text rendering, set-based so nothing ever
    # needs to order semiring values) keep the inner loop fast.
    def raw_block_sums(entries, assignment):
        acc: Dict[int, Value] = {}
        for target, value in entries:
            block = assignment[target]
            acc[block] = sr_add(acc[block], value) if block in acc else value
        return frozenset(
            (block, value) for block, value in acc.items() if not sr_is_zero(value)
        )

    # Per-state list of (kind, entry, target ids) for each relation/label.
    per_state: List[List[tuple]] = [[] for _ in range(n_states)]
    label_mask: List[tuple] = []
    for state_id in range(n_states):
        mask = []
        for data, table in zip(fm.relations, tables):
            for label in data.labels:
                entry = table.get((state_id, label))
                mask.append(entry is not None)
                if entry is None:
                    continue
                if data.kind == "simple":
                    targets = tuple(sorted({t for t, _ in entry}))
                else:
                    targets = tuple(
                        sorted({t for inner, _ in entry for t, _ in inner})
                    )
                per_state[state_id].append((data.kind, entry, targets, len(mask) - 1))
        label_mask.append(tuple(mask))

    sig_cache: Dict[tuple, tuple] = {}

    def signature(state_id: int, assignment: Sequence[int]) -> tuple:
        parts = []
        for kind, entry, targets, slot in per_state[state_id]:
            cache_key = (state_id, slot, tuple(assignment[t] for t in targets))
            part = sig_cache.get(cache_key)
            if part is None:
                if kind == "simple":
                    part = raw_block_sums(entry, assignment)
                else:
                    acc: Dict[frozenset, Value] = {}
                    for inner_entries, outer_value in entry:
                        isig = raw_block_sums(inner_entries, assignment)
                        acc[isig] = (
                            sr_add(acc[isig], outer_value)
                            if isig in acc
                            else outer_value
                        )
                    part = frozenset(
                        (isig, value)
                        for isig, value in acc.items()
                        if not sr_is_zero(value)
                    )
                sig_cache[cache_key] = part
            parts.append((slot, part))
        return tuple(parts)

    def is_stable(assignment: Sequence[int]) -> bool:
        rep_mask: Dict[int, tuple] = {}
        for state_id in range(n_states):
            block = assignment[state_id]
            mask = label_mask[state_id]
            if rep_mask.setdefault(block, mask) != mask:
                return False
        rep_sig: Dict[int, tuple] = {}
        for state_id in range(n_states):
            block = assignment[state_id]
            sig = signature(state_id, assignment)
            if rep_sig.setdefault(block, sig) != sig:
                return False
        return True

    parent = list(range(n_states))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    for assignment in _all_assignments(n_states):
        if is_stable(assignment):
            leaders: Dict[int, int] = {}
            for state_id, block in enumerate(assignment):
                if block in leaders:
                    union(leaders[block], state_id)
                else:
                    leaders[block] = state_id

    merged = canonical_assignment([find(s) for s in range(n_states)])
    if not is_stable(merged):
        raise FutsError(
            "internal error: union of stable partitions is not stable"
        )
    return Partition(merged)


# ---------------------------------------------------------------------------
# Independent partition from the step-derivation oracle
# ---------------------------------------------------------------------------


def oracle_partition(
    model: Model,
    max_states: int = DEFAULT_MAX_STATES,
    extra_roots: Sequence = (),
) -> Partition:
    """Coarsest behavioural partition computed from step derivations only.

    The state table comes from the shared exploration (so block ids line up
    with `refine(explore(model))`), but every signature is built from the
    derivation-based step functions, not from the weight functions."""
    fm = explore(model, max_states=max_states, extra_roots=extra_roots)
    return oracle_partition_from(fm)


def oracle_partition_from(fm: FutsModel) -> Partition:
    n_states = len(fm.states)
    if n_states == 0:
        return Partition(())
    ctx = fm.ctx
    if ctx is None:
        raise FutsError("oracle partition needs the exploration context")
    model = ctx.model
    terms = [ctx.term_of(state.key) for state in fm.states]

    def state_of(term) -> int:
        key = term_key(term)
        try:
            return fm.index[key]
        except KeyError:
            raise UnknownStateError(
                f"step-derivation target {key!r} is not an explored state"
            ) from None

    act_data = next(data for data in fm.relations if data.name == "act")
    act_labels = act_data.labels

    def fraction_sums(pairs, assignment):
        acc: Dict[int, Fraction] = {}
        for rate, target in pairs:
            block = assignment[target]
            acc[block] = acc.get(block, Fraction(0)) + rate
        return tuple(
            (block, rate)
            for block, rate in sorted(acc.items(), key=lambda kv: kv[0])
            if rate != 0
        )

    lang = fm.lang
    if lang == "pepa":
        moves = [
            {
                action: tuple(
                    (rate, state_of(target))
                    for rate, target in pepa_transitions(model, term, action)
                )
                for action in act_labels
            }
            for term in terms
        ]

        def sig_of(state_id: int, assignment: Sequence[int]) -> tuple:
            return tuple(
                fraction_sums(moves[state_id][action], assignment)
                for action in act_labels
            )

    elif lang == "iml":
        imoves = [
            {
                action: tuple(
                    sorted(
                        state_of(target)
                        for target in interactive_transitions(model, term, action)
                    )
                )
                for action in act_labels
            }
            for term in terms
        ]
        dmoves = [
            tuple((rate, state_of(target)) for rate, target in delay_derivations(model, term))
            for term in terms
        ]

        def sig_of(state_id: int, assignment: Sequence[int]) -> tuple:
            parts = [
                tuple(sorted({assignment[t] for t in imoves[state_id][action]}))
                for action in act_labels
            ]
            parts.append(fraction_sums(dmoves[state_id], assignment))
            return tuple(parts)

    elif lang == "tpc":
        imoves = [
            {
                action: tuple(
                    sorted(
                        state_of(target)
                        for target in interactive_transitions(model, term, action)
                    )
                )
                for action in act_labels
            }
            for term in terms
        ]
        tmoves = [
            tuple(
                sorted(
                    (amount, state_of(target))
                    for amount, target in timed_transitions(model, term)
                )
            )
            for term in terms
        ]

        def sig_of(state_id: int, assignment: Sequence[int]) -> tuple:
            parts = [
                tuple(sorted({assignment[t] for t in imoves[state_id][action]}))
                for action in act_labels
            ]
            parts.append(
                tuple(
                    sorted({(amount, assignment[t]) for amount, t in tmoves[state_id]})
                )
            )
            return tuple(parts)

    elif lang == "mal":
        amoves = [
            {
                action: tuple(
                    tuple((state_of(target), mass) for target, mass in dist)
                    for dist in action_distributions(model, term, action)
                )
                for action in act_labels
            }
            for term in terms
        ]
        dmoves = [
            tuple((rate, state_of(target)) for rate, target in delay_derivations(model, term))
            for term in terms
        ]

        def dist_class(dist, assignment):
            acc: Dict[int, Fraction] = {}
            for target, mass in dist:
                block = assignment[target]
                acc[block] = acc.get(block, Fraction(0)) + mass
            return tuple(sorted(acc.items(), key=lambda kv: kv[0]))

        def sig_of(state_id: int, assignment: Sequence[int]) -> tuple:
            parts = [
                tuple(
                    sorted(
                        {
                            dist_class(dist, assignment)
                            for dist in amoves[state_id][action]
                        }
                    )
                )
                for action in act_labels
            ]
            parts.append(fraction_sums(dmoves[state_id], assignment))
            return tuple(parts)

    else:
        raise FutsError(f"unsupported language {lang!r}")

    return _refine_loop(n_states, sig_of)


# ---------------------------------------------------------------------------
# Quotients
# ---------------------------------------------------------------------------


def minimize(fm: FutsModel, partition: Partition) -> FutsModel:
    """Quotient system: one state per block, block-sum continuations.

    The partition must be stable (refining it must not split anything);
    each block is represented by its least member state."""
    n_states = len(fm.states)
    if len(partition.assignment) != n_states:
        raise FutsError(
            f"partition covers {len(partition.assignment)} states, model has {n_states}"
        )
    assignment = list(canonical_assignment(partition.assignment))
    tables = _indexed_tables(fm)
    rep_sig: Dict[int, tuple] = {}
    for state_id in range(n_states):
        block = assignment[state_id]
        sig = _state_signature(fm.relations, tables, state_id, assignment)
        if rep_sig.setdefault(block, sig) != sig:
            raise FutsError("partition is not stable; refusing to quotient")

    n_blocks = max(assignment) + 1
    rep_state: List[StateInfo] = [None] * n_blocks  # type: ignore[list-item]
    for state in fm.states:  # ids ascending, so first hit is least member
        block = assignment[state.id]
        if rep_state[block] is None:
            rep_state[block] = state

    key_block = {state.key: assignment[state.id] for state in fm.states}
    states = [
        StateInfo(block, rep.key, rep.pretty) for block, rep in enumerate(rep_state)
    ]
    index = {rep.key: block for block, rep in enumerate(rep_state)}

    relations: List[RelationData] = []
    for data in fm.relations:
        fns = {(source, label): fn for source, label, fn in data.transitions}
        quotient = RelationData(data.name, data.kind, data.tag, data.inner_tag, data.labels)
        for block, rep in enumerate(rep_state):
            for label in data.labels:
                fn = fns.get((rep.id, label))
                if fn is None:
                    continue
                if data.kind == "simple":
                    sums = ff_block_sums(fn, key_block)
                    qfn = ff_make(
                        data.tag,
                        [(rep_state[b].key, value) for b, value in sums.items()],
                    )
                else:
                    pairs = []
                    for inner, outer_value in fn.entries:
                        inner_sums = ff_block_sums(inner, key_block)
                        qinner = ff_make(
                            inner.tag,
                            [
                                (rep_state[b].key, value)
                                for b, value in inner_sums.items()
                            ],
                        )
                        pairs.append((qinner, outer_value))
                    qfn = ff_make(data.tag, pairs)
                if qfn.entries:
                    quotient.transitions.append((block, label, qfn))
        relations.append(quotient)

    return FutsModel(
        lang=fm.lang,
        states=states,
        index=index,
        relations=relations,
        init_id=assignment[fm.init_id],
        ctx=None,
    )


def disjoint_union(left: FutsModel, right: FutsModel, prefix: str = "u2!") -> FutsModel:
    """Side-by-side union of two explored systems over the same relations.

    The right-hand states are renamed with a prefix no term key can start
    with, so the two state spaces cannot collide."""
    if left.lang != right.lang:
        raise FutsError("cannot union systems of different languages")
    if len(left.relations) != len(right.relations) or any(
        dl.name != dr.name or dl.kind != dr.kind or dl.labels != dr.labels
        for dl, dr in zip(left.relations, right.relations)
    ):
        raise FutsError("cannot union systems with different relations or labels")

    offset = len(left.states)

    def rename_key(key: str) -> str:
        return prefix + key

    def rename_fn(fn, kind: str):
        if kind == "simple":
            return ff_make(
                fn.tag, [(rename_key(key), value) for key, value in fn.entries]
            )
        return ff_make(
            fn.tag,
            [
                (
                    ff_make(
                        inner.tag,
                        [(rename_key(key), value) for key, value in inner.entries],
                    ),
                    outer_value,
                )
                for inner, outer_value in fn.entries
            ],
        )

    states = list(left.states) + [
        StateInfo(offset + state.id, rename_key(state.key), state.pretty)
        for state in right.states
    ]
    index = dict(left.index)
    for key, state_id in right.index.items():
        index[rename_key(key)] = offset + state_id

    relations: List[RelationData] = []
    for dl, dr in zip(left.relations, right.relations):
        merged = RelationData(dl.name, dl.kind, dl.tag, dl.inner_tag, dl.labels)
        merged.transitions = list(dl.transitions) + [
            (offset + source, label, rename_fn(fn, dl.kind))
            for source, label, fn in dr.transitions
        ]
        relations.append(merged)

    return FutsModel(
        lang=left.lang,
        states=states,
        index=index,
        relations=relations,
        init_id=left.init_id,
        ctx=None,
    )
