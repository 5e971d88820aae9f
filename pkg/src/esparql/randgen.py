"""Seeded random graphs and queries for differential testing.

Everything here is driven by an explicit ``random.Random`` so a seed fully
determines the output.  Collections are sorted before sampling; iteration
order of hash-based containers must never leak into generated cases.
"""

from __future__ import annotations

import random
from typing import Optional

from .belief import AtomicBelief, BeliefQuery, CompoundBelief, all_states_shorthand
from .four import (
    STATES,
    FourOperator,
    FourValue,
    JOIN_OPERATORS,
    MEET_OPERATORS,
    Semiring,
    BOOLEAN,
    COUNTING,
)
from .model import (
    DEFAULT_BASE_IRI,
    DEFAULT_VOCABULARY,
    BeliefVocabulary,
    FourGraph,
    Iri,
    StarTriple,
    TriplePattern,
    Variable,
    term_to_pattern,
)
from .algebra import (
    And,
    Belief,
    Bound,
    Eq,
    Filter,
    FilterFormula,
    Join,
    MapState,
    Not,
    Or,
    Pattern,
    Project,
    Query,
    StateIs,
    Union,
    in_scope,
)

VARS = (Variable("x"), Variable("y"), Variable("z"))

ALL_OPERATORS = tuple(FourOperator)


def iri_pool(count: int = 6, base: str = DEFAULT_BASE_IRI) -> list[Iri]:
    return [Iri(f"{base}n{i}") for i in range(count)]


def _sorted_vars(scope) -> list[Variable]:
    return sorted(scope, key=lambda v: v.name)


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


def _random_ground_term(rng: random.Random, pool: list[Iri], depth: int):
    if depth > 0 and rng.random() < 0.3:
        return _random_ground_triple(rng, pool, depth - 1)
    return rng.choice(pool)


def _random_ground_triple(rng: random.Random, pool: list[Iri], depth: int) -> StarTriple:
    return StarTriple(
        _random_ground_term(rng, pool, depth),
        rng.choice(pool),
        _random_ground_term(rng, pool, depth),
    )


def random_graph(
    rng: random.Random,
    pool: Optional[list[Iri]] = None,
    *,
    max_exceptions: int = 12,
    vocab: BeliefVocabulary = DEFAULT_VOCABULARY,
    allow_false_default: bool = True,
) -> FourGraph:
    """Graph with a small active domain and a healthy share of belief triples.

    Defaults stay in {unknown, false} so belief extraction is always finite.
    """
    pool = pool or iri_pool()
    default = FourValue.UNKNOWN
    if allow_false_default and rng.random() < 0.3:
        default = FourValue.FALSE
    exceptions: dict[StarTriple, FourValue] = {}
    for _ in range(rng.randint(0, max_exceptions)):
        if rng.random() < 0.5:
            # belief statement: holder says something about a quoted triple
            t = StarTriple(
                rng.choice(pool),
                vocab.predicate_for(rng.choice(STATES)),
                _random_ground_triple(rng, pool, 1),
            )
        else:
            t = _random_ground_triple(rng, pool, 1)
        exceptions[t] = rng.choice(STATES)
    return FourGraph(default, exceptions)


def random_k_graph(
    rng: random.Random,
    semiring: Semiring,
    pool: Optional[list[Iri]] = None,
    *,
    max_exceptions: int = 10,
) -> FourGraph:
    """Zero-default graph annotated with values from the given semiring."""
    pool = pool or iri_pool()
    if semiring is COUNTING:
        candidates = [1, 2, 3, 5]
    elif semiring is BOOLEAN:
        candidates = [True]
    else:
        candidates = [v for v in STATES if v != semiring.zero]
    exceptions = {}
    for _ in range(rng.randint(0, max_exceptions)):
        exceptions[_random_ground_triple(rng, pool, 1)] = rng.choice(candidates)
    return FourGraph(semiring.zero, exceptions)


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------


def random_pattern(
    rng: random.Random,
    pool: list[Iri],
    scope,
    *,
    vocab: BeliefVocabulary = DEFAULT_VOCABULARY,
) -> TriplePattern:
    """Triple pattern whose variable set is exactly ``scope`` (at most 3)."""
    want = _sorted_vars(scope)
    if len(want) > 3:
        raise ValueError("a single pattern can place at most 3 variables")
    rng.shuffle(want)
    slots: dict[str, object] = {}
    for slot, v in zip(rng.sample(("s", "p", "o"), k=len(want)), want):
        slots[slot] = v

    def fill(slot: str):
        held = slots.get(slot)
        if held is not None:
            if slot != "p" and rng.random() < 0.25:
                # tuck the variable inside a quoted pattern
                return TriplePattern(held, rng.choice(pool), rng.choice(pool))
            return held
        if slot == "p":
            if rng.random() < 0.3:
                return vocab.predicate_for(rng.choice(STATES))
            return rng.choice(pool)
        return term_to_pattern(_random_ground_term(rng, pool, 1))

    return TriplePattern(fill("s"), fill("p"), fill("o"))


# ---------------------------------------------------------------------------
# Filter formulas
# ---------------------------------------------------------------------------


def random_formula(
    rng: random.Random,
    pool: list[Iri],
    scope,
    *,
    depth: int = 2,
    allow_state: bool = True,
) -> FilterFormula:
    if depth > 0 and rng.random() < 0.4:
        kind = rng.choice(("not", "and", "or"))
        if kind == "not":
            return Not(random_formula(rng, pool, scope, depth=depth - 1, allow_state=allow_state))
        left = random_formula(rng, pool, scope, depth=depth - 1, allow_state=allow_state)
        right = random_formula(rng, pool, scope, depth=depth - 1, allow_state=allow_state)
        return And(left, right) if kind == "and" else Or(left, right)
    atoms = ["bound", "eq-const"]
    if allow_state:
        atoms.append("state")
    in_vars = _sorted_vars(scope)
    if len(in_vars) >= 2:
        atoms.append("eq-var")
    kind = rng.choice(atoms)
    if kind == "state":
        return StateIs(rng.choice(STATES))
    if kind == "bound":
        return Bound(rng.choice(VARS))
    if kind == "eq-var":
        a, b = rng.sample(in_vars, 2)
        return Eq(a, b)
    v = rng.choice(in_vars) if in_vars else rng.choice(VARS)
    return Eq(v, rng.choice(pool))


# ---------------------------------------------------------------------------
# Belief expressions
# ---------------------------------------------------------------------------


# Fallbacks stay non-truth-implying so a nested extraction never sees a
# true/conflicted default (which extract refuses as non-finite).
_FALLBACKS = (FourValue.FALSE, FourValue.UNKNOWN)


def random_belief_expr(rng: random.Random, pool: list[Iri], holder) -> BeliefQuery:
    kind = rng.choice(("atomic", "shorthand", "compound"))
    if kind == "atomic":
        return AtomicBelief(holder, rng.choice(STATES), rng.choice(_FALLBACKS))
    if kind == "shorthand":
        return all_states_shorthand(holder, rng.choice(JOIN_OPERATORS))
    # second holder stays ground (or repeats) so var(E) gains nothing new
    other = holder if rng.random() < 0.3 else rng.choice(pool)
    return CompoundBelief(
        AtomicBelief(holder, rng.choice(STATES), rng.choice(_FALLBACKS)),
        rng.choice(ALL_OPERATORS),
        AtomicBelief(other, rng.choice(STATES), rng.choice(_FALLBACKS)),
    )


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

_NODE_KINDS = ("join", "union", "filter", "project", "map", "belief")


def random_query(
    rng: random.Random,
    pool: Optional[list[Iri]] = None,
    *,
    depth: int = 4,
    scope=None,
    vocab: BeliefVocabulary = DEFAULT_VOCABULARY,
) -> Query:
    """Query over every algebra operator, with in-scope set exactly ``scope``."""
    pool = pool or iri_pool()
    if scope is None:
        scope = frozenset(rng.sample(VARS, rng.randint(1, 3)))
    scope = frozenset(scope)

    def gen(target, budget: int, var_holder_ok: bool) -> Query:
        if budget <= 0 or len(target) > 3 or rng.random() < 0.25:
            if len(target) <= 3:
                return Pattern(random_pattern(rng, pool, target, vocab=vocab))
            # too wide for one pattern: split over a join
            names = _sorted_vars(target)
            mid = len(names) // 2
            return Join(
                rng.choice(MEET_OPERATORS),
                gen(frozenset(names[:mid]), 0, var_holder_ok),
                gen(frozenset(names[mid:]), 0, var_holder_ok),
            )
        kind = rng.choice(_NODE_KINDS)
        if kind == "join":
            left, right = set(), set()
            for v in _sorted_vars(target):
                side = rng.randint(0, 2)
                if side in (0, 2):
                    left.add(v)
                if side in (1, 2):
                    right.add(v)
            return Join(
                rng.choice(MEET_OPERATORS),
                gen(frozenset(left), budget - 1, var_holder_ok),
                gen(frozenset(right), budget - 1, var_holder_ok),
            )
        if kind == "union":
            return Union(
                rng.choice(JOIN_OPERATORS),
                gen(target, budget - 1, var_holder_ok),
                gen(target, budget - 1, var_holder_ok),
            )
        if kind == "filter":
            return Filter(
                rng.choice(ALL_OPERATORS),
                gen(target, budget - 1, var_holder_ok),
                random_formula(rng, pool, target),
            )
        if kind == "project":
            spare = [v for v in VARS if v not in target]
            wider = set(target)
            for v in spare:
                if len(wider) < 3 and rng.random() < 0.5:
                    wider.add(v)
            return Project(
                rng.choice(ALL_OPERATORS),
                target,
                gen(frozenset(wider), budget - 1, var_holder_ok),
            )
        if kind == "map":
            return MapState(
                gen(target, budget - 1, var_holder_ok),
                random_formula(rng, pool, target),
                rng.choice(STATES),
                rng.choice(STATES),
            )
        # belief: the expression may consume one of the target variables;
        # at most one variable holder per ancestor chain, because every
        # nesting level multiplies the evaluation contexts by |universe|
        names = _sorted_vars(target)
        if names and var_holder_ok and rng.random() < 0.5:
            holder = rng.choice(names)
            inner = frozenset(v for v in target if v != holder)
            return Belief(
                random_belief_expr(rng, pool, holder),
                gen(inner, budget - 1, False),
            )
        holder = rng.choice(pool)
        return Belief(
            random_belief_expr(rng, pool, holder),
            gen(target, budget - 1, var_holder_ok),
        )

    q = gen(scope, depth, True)
    assert in_scope(q) == scope
    return q


def random_join_free_query(
    rng: random.Random,
    pool: Optional[list[Iri]] = None,
    *,
    depth: int = 3,
    scope=None,
) -> Query:
    """Patterns combined with the two lattice joins only; always finite."""
    pool = pool or iri_pool()
    if scope is None:
        scope = frozenset(rng.sample(VARS, rng.randint(1, 2)))
    scope = frozenset(scope)
    if depth <= 0 or rng.random() < 0.35:
        return Pattern(random_pattern(rng, pool, scope))
    return Union(
        rng.choice(JOIN_OPERATORS),
        random_join_free_query(rng, pool, depth=depth - 1, scope=scope),
        random_join_free_query(rng, pool, depth=depth - 1, scope=scope),
    )


def random_plain_query(
    rng: random.Random,
    pool: Optional[list[Iri]] = None,
    *,
    depth: int = 4,
    scope=None,
) -> Query:
    """Query in the semiring-generic fragment: no state tests, maps or beliefs."""
    pool = pool or iri_pool()
    if scope is None:
        scope = frozenset(rng.sample(VARS, rng.randint(1, 3)))
    scope = frozenset(scope)

    def gen(target, budget: int) -> Query:
        if budget <= 0 or rng.random() < 0.3:
            return Pattern(random_pattern(rng, pool, target))
        kind = rng.choice(("join", "union", "filter", "project"))
        if kind == "join":
            left, right = set(), set()
            for v in _sorted_vars(target):
                side = rng.randint(0, 2)
                if side in (0, 2):
                    left.add(v)
                if side in (1, 2):
                    right.add(v)
            return Join(
                rng.choice(MEET_OPERATORS),
                gen(frozenset(left), budget - 1),
                gen(frozenset(right), budget - 1),
            )
        if kind == "union":
            return Union(
                rng.choice(JOIN_OPERATORS),
                gen(target, budget - 1),
                gen(target, budget - 1),
            )
        if kind == "filter":
            return Filter(
                rng.choice(MEET_OPERATORS),
                gen(target, budget - 1),
                random_formula(rng, pool, target, allow_state=False),
            )
        spare = [v for v in VARS if v not in target]
        wider = set(target)
        for v in spare:
            if len(wider) < 3 and rng.random() < 0.5:
                wider.add(v)
        return Project(
            rng.choice(ALL_OPERATORS),
            target,
            gen(frozenset(wider), budget - 1),
        )

    return gen(scope, depth)
