"""State-to-function semantics of the four calculi.

Each language is given by one or two labelled *step relations*; a step
maps a state (a closed term) and a label to a finite-support weight
function over continuation states:

* ``pepa``: one relation over the action alphabet into non-negative
  rationals (race rates, with the synchronisation rate of a shared
  action bounded by the slower side's total).
* ``iml``: an interactive relation over actions into booleans, plus a
  ``delta`` relation into rationals for exponential delays.
* ``tpc``: an interactive relation over actions into booleans, plus a
  ``tick`` relation into finite sets of naturals collecting the
  amounts of time a state can let pass towards each continuation.
* ``mal``: an action relation whose function is boolean over *inner
  probability distributions* (continuation states weighted by exact
  probabilities), plus a ``delta`` relation like ``iml``'s.

States are identified by their canonical term text; a
:class:`StepContext` keeps the key-to-term registry and a memo of
computed steps for one model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple

from .errors import DelayCycleError, FutsError, UnguardedRecursionError, UnknownStateError
from .fsfun import (
    FinFn,
    ff_add,
    ff_dirac,
    ff_lift_injective,
    ff_make,
    ff_oplus,
    ff_scale,
    ff_zero,
)
from .semiring import BOOL, NATSET, NNRAT, TOP, make_bool, make_natset, make_rat
from .syntax import (
    ActPrefix,
    Choice,
    Const,
    Coop,
    Model,
    Nil,
    Par,
    ProbPrefix,
    RatedPrefix,
    RatePrefix,
    Term,
    TimePrefix,
    alphabet,
    term_key,
)

ACT = "act"
DELAY = "delay"
TICK = "tick"

DELTA_LABEL = "delta"
TICK_LABEL = "tick"


@dataclass(frozen=True)
class RelationSpec:
    """Shape of one step relation of a language."""

    name: str  # "act" | "delay" | "tick"
    kind: str  # "simple" | "nested"
    tag: str  # weight domain of the (outer) function
    inner_tag: Optional[str]  # weight domain of inner distributions, if nested
    fixed_labels: Optional[Tuple[str, ...]]  # None: the model's action alphabet


_SPECS = {
    "pepa": (RelationSpec(ACT, "simple", NNRAT, None, None),),
    "iml": (
        RelationSpec(ACT, "simple", BOOL, None, None),
        RelationSpec(DELAY, "simple", NNRAT, None, (DELTA_LABEL,)),
    ),
    "tpc": (
        RelationSpec(ACT, "simple", BOOL, None, None),
        RelationSpec(TICK, "simple", NATSET, None, (TICK_LABEL,)),
    ),
    "mal": (
        RelationSpec(ACT, "nested", BOOL, NNRAT, None),
        RelationSpec(DELAY, "simple", NNRAT, None, (DELTA_LABEL,)),
    ),
}


def relation_specs(lang: str) -> Tuple[RelationSpec, ...]:
    try:
        return _SPECS[lang]
    except KeyError:
        raise ValueError(f"unknown language {lang!r}") from None


def relation_labels(spec: RelationSpec, model: Model) -> Tuple[str, ...]:
    """The labels of a relation for a concrete model (sorted)."""
    if spec.fixed_labels is not None:
        return spec.fixed_labels
    return tuple(alphabet(model))


class StepContext:
    """Per-model bookkeeping: key/term registry and a step memo."""

    def __init__(self, model: Model):
        relation_specs(model.lang)  # validates the language
        self.model = model
        self.registry: dict = {}
        self.memo: dict = {}
        self.init_key = self.register(model.init)

    def register(self, term: Term) -> str:
        key = term_key(term)
        self.registry.setdefault(key, term)
        return key

    def term_of(self, key: str) -> Term:
        try:
            return self.registry[key]
        except KeyError:
            raise UnknownStateError(f"unknown state key {key!r}") from None


def futs_step(ctx: StepContext, key: str, relation: str, label: str) -> FinFn:
    """The weight function of state ``key`` under ``relation``/``label``.

    Results are memoised per context, so exploring a model computes
    every step once.
    """
    memo_key = (relation, label, key)
    cached = ctx.memo.get(memo_key)
    if cached is not None:
        return cached
    term = ctx.term_of(key)
    lang = ctx.model.lang
    try:
        compute = _DISPATCH[(lang, relation)]
    except KeyError:
        raise ValueError(f"language {lang!r} has no relation {relation!r}") from None
    result = compute(ctx, term, label)
    ctx.memo[memo_key] = result
    return result


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _pair_ctor(ctx: StepContext, cls, actions: frozenset) -> Callable[[str, str], str]:
    """Key builder recombining two continuation states under a binary

    composition operator; injective because keys identify terms.
    """

    def ctor(left_key: str, right_key: str) -> str:
        ast = cls(actions, ctx.term_of(left_key), ctx.term_of(right_key))
        return ctx.register(ast)

    return ctor


def _choice_ctor(ctx: StepContext) -> Callable[[str, str], str]:
    def ctor(left_key: str, right_key: str) -> str:
        ast = Choice(ctx.term_of(left_key), ctx.term_of(right_key))
        return ctx.register(ast)

    return ctor


def _unfold(ctx, t: Const, active: set, error_cls, what: str) -> Term:
    if t.name in active:
        raise error_cls(
            f"recursion through constant {t.name!r} does not terminate "
            f"while computing the {what}"
        )
    return ctx.model.defs[t.name]


def _bad_term(t: Term, lang: str) -> FutsError:  # pragma: no cover - defensive
    return FutsError(f"term form {type(t).__name__} is not part of {lang}")


# ---------------------------------------------------------------------------
# pepa: one rated action relation
# ---------------------------------------------------------------------------


def _pepa_act(ctx: StepContext, term: Term, label: str) -> FinFn:
    zero = ff_zero(NNRAT)
    active: set = set()

    def rec(t: Term) -> FinFn:
        if isinstance(t, Nil):
            return zero
        if isinstance(t, RatedPrefix):
            if t.action != label:
                return zero
            return ff_make(NNRAT, [(ctx.register(t.cont), make_rat(t.rate))])
        if isinstance(t, Choice):
            return ff_add(rec(t.left), rec(t.right))
        if isinstance(t, Coop):
            ctor = _pair_ctor(ctx, Coop, t.actions)
            left = rec(t.left)
            right = rec(t.right)
            if label not in t.actions:
                moved_left = ff_lift_injective(
                    ctor, left, ff_dirac(NNRAT, ctx.register(t.right))
                )
                moved_right = ff_lift_injective(
                    ctor, ff_dirac(NNRAT, ctx.register(t.left)), right
                )
                return ff_add(moved_left, moved_right)
            total_left = ff_oplus(left).payload
            total_right = ff_oplus(right).payload
            if total_left == 0 or total_right == 0:
                return zero
            # the joint rate of a synchronised action is capped by the
            # slower participant: scale the product of the two
            # functions so its total becomes min of the two totals
            factor = make_rat(min(total_left, total_right) / (total_left * total_right))
            return ff_scale(factor, ff_lift_injective(ctor, left, right))
        if isinstance(t, Const):
            body = _unfold(ctx, t, active, UnguardedRecursionError, "action step")
            active.add(t.name)
            result = rec(body)
            active.discard(t.name)
            return result
        raise _bad_term(t, "pepa")

    return rec(term)


# ---------------------------------------------------------------------------
# iml / tpc: interactive action relation (boolean)
# ---------------------------------------------------------------------------


def _interactive_act(ctx: StepContext, term: Term, label: str) -> FinFn:
    zero = ff_zero(BOOL)
    lang = ctx.model.lang
    active: set = set()

    def rec(t: Term) -> FinFn:
        if isinstance(t, (Nil, RatePrefix, TimePrefix)):
            return zero
        if isinstance(t, ActPrefix):
            if t.action != label:
                return zero
            return ff_make(BOOL, [(ctx.register(t.cont), make_bool(True))])
        if isinstance(t, Choice):
            return ff_add(rec(t.left), rec(t.right))
        if isinstance(t, Par):
            ctor = _pair_ctor(ctx, Par, t.actions)
            left = rec(t.left)
            right = rec(t.right)
            if label in t.actions:
                return ff_lift_injective(ctor, left, right)
            moved_left = ff_lift_injective(
                ctor, left, ff_dirac(BOOL, ctx.register(t.right))
            )
            moved_right = ff_lift_injective(
                ctor, ff_dirac(BOOL, ctx.register(t.left)), right
            )
            return ff_add(moved_left, moved_right)
        if isinstance(t, Const):
            body = _unfold(ctx, t, active, UnguardedRecursionError, "action step")
            active.add(t.name)
            result = rec(body)
            active.discard(t.name)
            return result
        raise _bad_term(t, lang)

    return rec(term)


# ---------------------------------------------------------------------------
# iml / mal: exponential-delay relation (rates)
# ---------------------------------------------------------------------------


def _delay_step(ctx: StepContext, term: Term, label: str) -> FinFn:
    zero = ff_zero(NNRAT)
    lang = ctx.model.lang
    active: set = set()

    def rec(t: Term) -> FinFn:
        if isinstance(t, (Nil, ActPrefix, ProbPrefix)):
            return zero
        if isinstance(t, RatePrefix):
            return ff_make(NNRAT, [(ctx.register(t.cont), make_rat(t.rate))])
        if isinstance(t, Choice):
            return ff_add(rec(t.left), rec(t.right))
        if isinstance(t, Par):
            # delays always interleave, independent of the action set
            ctor = _pair_ctor(ctx, Par, t.actions)
            moved_left = ff_lift_injective(
                ctor, rec(t.left), ff_dirac(NNRAT, ctx.register(t.right))
            )
            moved_right = ff_lift_injective(
                ctor, ff_dirac(NNRAT, ctx.register(t.left)), rec(t.right)
            )
            return ff_add(moved_left, moved_right)
        if isinstance(t, Const):
            body = _unfold(ctx, t, active, UnguardedRecursionError, "delay step")
            active.add(t.name)
            result = rec(body)
            active.discard(t.name)
            return result
        raise _bad_term(t, lang)

    return rec(term)


# ---------------------------------------------------------------------------
# tpc: deterministic-time relation (sets of tick amounts)
# ---------------------------------------------------------------------------


def _tick_step(ctx: StepContext, term: Term, label: str) -> FinFn:
    zero = ff_zero(NATSET)
    active: set = set()

    def shift(amount: int, fn: FinFn) -> FinFn:
        pairs = []
        for k, v in fn.entries:
            if v.payload is TOP:  # pragma: no cover - semantics never builds TOP
                raise FutsError("cannot shift the all-naturals sentinel")
            pairs.append((k, make_natset(m + amount for m in v.payload)))
        return ff_make(NATSET, pairs)

    def rec(t: Term) -> FinFn:
        if isinstance(t, (Nil, ActPrefix)):
            return zero
        if isinstance(t, TimePrefix):
            pairs = []
            for spent in range(1, t.delay):
                remaining = TimePrefix(t.delay - spent, t.cont)
                pairs.append((ctx.register(remaining), make_natset({spent})))
            pairs.append((ctx.register(t.cont), make_natset({t.delay})))
            through = shift(t.delay, rec(t.cont))
            return ff_add(ff_make(NATSET, pairs), through)
        if isinstance(t, Choice):
            # both sides must agree on the amount of time passed
            return ff_lift_injective(_choice_ctor(ctx), rec(t.left), rec(t.right))
        if isinstance(t, Par):
            return ff_lift_injective(
                _pair_ctor(ctx, Par, t.actions), rec(t.left), rec(t.right)
            )
        if isinstance(t, Const):
            body = _unfold(ctx, t, active, DelayCycleError, "timed step")
            active.add(t.name)
            result = rec(body)
            active.discard(t.name)
            return result
        raise _bad_term(t, "tpc")

    return rec(term)


def tpc_max_delay(ctx: StepContext, key: str) -> int:
    """The largest amount of time a state can let pass before it must

    act or stop: 0 for inert/action states, delay plus the rest for a
    time prefix, the minimum over branches of a choice or composition.
    """
    active: set = set()

    def rec(t: Term) -> int:
        if isinstance(t, (Nil, ActPrefix)):
            return 0
        if isinstance(t, TimePrefix):
            return t.delay + rec(t.cont)
        if isinstance(t, (Choice, Par)):
            return min(rec(t.left), rec(t.right))
        if isinstance(t, Const):
            body = _unfold(ctx, t, active, DelayCycleError, "maximal delay")
            active.add(t.name)
            result = rec(body)
            active.discard(t.name)
            return result
        raise _bad_term(t, "tpc")

    return rec(ctx.term_of(key))


# ---------------------------------------------------------------------------
# mal: action relation into sets of probability distributions
# ---------------------------------------------------------------------------


def _mal_act(ctx: StepContext, term: Term, label: str) -> FinFn:
    zero = ff_zero(BOOL)
    active: set = set()

    def outer_dirac(inner: FinFn) -> FinFn:
        return ff_make(BOOL, [(inner, make_bool(True))])

    def rec(t: Term) -> FinFn:
        if isinstance(t, (Nil, RatePrefix)):
            return zero
        if isinstance(t, ProbPrefix):
            if t.action != label:
                return zero
            inner = ff_make(
                NNRAT, [(ctx.register(cont), make_rat(p)) for p, cont in t.branches]
            )
            return outer_dirac(inner)
        if isinstance(t, Choice):
            return ff_add(rec(t.left), rec(t.right))
        if isinstance(t, Par):
            inner_ctor = _pair_ctor(ctx, Par, t.actions)

            def inner_par(mu1: FinFn, mu2: FinFn) -> FinFn:
                return ff_lift_injective(inner_ctor, mu1, mu2)

            left = rec(t.left)
            right = rec(t.right)
            if label in t.actions:
                return ff_lift_injective(inner_par, left, right)
            still_right = outer_dirac(ff_dirac(NNRAT, ctx.register(t.right)))
            still_left = outer_dirac(ff_dirac(NNRAT, ctx.register(t.left)))
            return ff_add(
                ff_lift_injective(inner_par, left, still_right),
                ff_lift_injective(inner_par, still_left, right),
            )
        if isinstance(t, Const):
            body = _unfold(ctx, t, active, UnguardedRecursionError, "action step")
            active.add(t.name)
            result = rec(body)
            active.discard(t.name)
            return result
        raise _bad_term(t, "mal")

    return rec(term)


_DISPATCH = {
    ("pepa", ACT): _pepa_act,
    ("iml", ACT): _interactive_act,
    ("iml", DELAY): _delay_step,
    ("tpc", ACT): _interactive_act,
    ("tpc", TICK): _tick_step,
    ("mal", ACT): _mal_act,
    ("mal", DELAY): _delay_step,
}
