"""Slow reference evaluator for differential testing.

Evaluates by brute force over complete mapping tables: every node's result
lists all |universe| ** |vars| rows.  It shares the four-valued operator
tables and the data model types with the engine but re-implements
substitution, belief extraction (as pointwise lookup composition, never
materialized), formula evaluation and aggregation from scratch, so a bug
in the engine's compressed default+exception bookkeeping cannot hide here.
"""

from __future__ import annotations

import itertools
from typing import Callable

from . import belief as belief_mod
from .algebra import (
    And,
    Belief,
    Bound,
    Eq,
    Filter,
    Join,
    MapState,
    Mapping,
    Not,
    Or,
    Pattern,
    Project,
    Query,
    Relation,
    StateIs,
    Union,
    in_scope,
    query_constants,
)
from .errors import ShapeMismatch, UniverseTooLarge
from .four import CONFLICTED, TRUE, UNKNOWN, FourValue, absorbing_of, apply, identity_of, table_of
from .model import (
    BeliefVocabulary,
    DEFAULT_VOCABULARY,
    FourGraph,
    Iri,
    StarTriple,
    Term,
    TriplePattern,
    Variable,
    active_domain,
    term_text,
)

DEFAULT_ORACLE_CAP = 10**6


class DenseRelation:
    """A relation as a complete table: one row per mapping over the universe."""

    __slots__ = ("vars", "universe", "rows")

    def __init__(self, vars: frozenset[Variable], universe: frozenset[Term],
                 rows: dict[Mapping, FourValue]):
        self.vars = frozenset(vars)
        self.universe = frozenset(universe)
        expected = len(self.universe) ** len(self.vars)
        if len(rows) != expected:
            raise ValueError(f"dense table has {len(rows)} rows, expected {expected}")
        self.rows = rows

    def value_at(self, m: Mapping) -> FourValue:
        return self.rows[m]

    def __repr__(self) -> str:
        return f"DenseRelation({len(self.vars)} vars, {len(self.rows)} rows)"


def _subst(p, get: Callable[[Variable], Term | None]) -> Term | None:
    """Substitute; None when a predicate slot receives a quoted triple."""
    if isinstance(p, Variable):
        return get(p)
    if isinstance(p, Iri):
        return p
    subj = _subst(p.subject, get)
    pred = _subst(p.predicate, get)
    obj = _subst(p.object, get)
    if subj is None or obj is None or not isinstance(pred, Iri):
        return None
    return StarTriple(subj, pred, obj)


# three-valued outcomes, deliberately not reusing the engine's enum
_T, _F, _E = "true", "false", "error"


def _formula(f, get: Callable[[Variable], Term | None], state: FourValue) -> str:
    if isinstance(f, Eq):
        left = get(f.left) if isinstance(f.left, Variable) else f.left
        right = get(f.right) if isinstance(f.right, Variable) else f.right
        if left is None or right is None:
            return _E
        return _T if left == right else _F
    if isinstance(f, Bound):
        return _T if get(f.var) is not None else _F
    if isinstance(f, StateIs):
        return _T if state == f.state else _F
    if isinstance(f, Not):
        inner = _formula(f.inner, get, state)
        if inner == _E:
            return _E
        return _F if inner == _T else _T
    if isinstance(f, And):
        a = _formula(f.left, get, state)
        b = _formula(f.right, get, state)
        if a == _F or b == _F:
            return _F
        if a == _E or b == _E:
            return _E
        return _T
    if isinstance(f, Or):
        a = _formula(f.left, get, state)
        b = _formula(f.right, get, state)
        if a == _T or b == _T:
            return _T
        if a == _E or b == _E:
            return _E
        return _F
    raise TypeError(f"not a formula: {f!r}")


Lookup = Callable[[StarTriple], FourValue]


def _belief_value(e: belief_mod.BeliefQuery, t: StarTriple,
                  base: Lookup, vocab: BeliefVocabulary) -> FourValue:
    """Pointwise belief extraction: what does e say the state of t is."""
    if isinstance(e, belief_mod.AtomicBelief):
        probe = StarTriple(e.holder, vocab.predicate_for(e.state), t)
        return e.state if base(probe) in (TRUE, CONFLICTED) else e.fallback
    left = _belief_value(e.left, t, base, vocab)
    right = _belief_value(e.right, t, base, vocab)
    return apply(e.op, left, right)


def _bind_expr(e: belief_mod.BeliefQuery,
               binding: dict[Variable, Term]) -> belief_mod.BeliefQuery | None:
    """Instantiate holder variables; None when one is bound to a quoted triple."""
    if isinstance(e, belief_mod.AtomicBelief):
        if isinstance(e.holder, Variable):
            bound = binding[e.holder]
            if not isinstance(bound, Iri):
                return None
            return belief_mod.AtomicBelief(bound, e.state, e.fallback)
        return e
    left = _bind_expr(e.left, binding)
    right = _bind_expr(e.right, binding)
    if left is None or right is None:
        return None
    return belief_mod.CompoundBelief(left, e.op, right)


def oracle_eval(
    q: Query,
    g: FourGraph,
    vocab: BeliefVocabulary = DEFAULT_VOCABULARY,
    cap: int = DEFAULT_ORACLE_CAP,
) -> DenseRelation:
    """Dense active-domain evaluation of a four-valued query."""
    in_scope(q)
    universe = active_domain(g, query_constants(q))
    uni = sorted(universe, key=term_text)
    size = len(uni)

    def guard(node: Query) -> None:
        if size ** len(in_scope(node)) > cap:
            raise UniverseTooLarge(
                f"{size}**{len(in_scope(node))} rows exceed oracle cap {cap}"
            )
        if isinstance(node, (Join, Union)):
            guard(node.left)
            guard(node.right)
        elif isinstance(node, (Filter, Project, MapState, Belief)):
            guard(node.query)

    guard(q)

    # name-sorted tuples are already in Mapping's canonical layout, and
    # product order makes every table's insertion order deterministic;
    # belief contexts reuse the same lists, so build each one once
    bindings_cache: dict[frozenset, list[Mapping]] = {}

    def all_bindings(vars: frozenset[Variable]) -> list[Mapping]:
        hit = bindings_cache.get(vars)
        if hit is None:
            vs = sorted(vars, key=lambda v: v.name)
            hit = [
                Mapping(tuple(zip(vs, combo)))
                for combo in itertools.product(uni, repeat=len(vs))
            ]
            bindings_cache[vars] = hit
        return hit

    def base_lookup(t: StarTriple) -> FourValue:
        return g.exceptions.get(t, g.default)

    # mappings that put a quoted triple in a predicate slot name no triple at
    # all; such rows take the context's default, probed with a fresh triple
    fresh_text = "urn:x-esparql:absent"
    taken = {t.text for t in universe if isinstance(t, Iri)}
    while fresh_text in taken:
        fresh_text += "x"
    fresh = Iri(fresh_text)
    probe = StarTriple(fresh, fresh, fresh)

    # tables are memoized per (node, belief context); contexts get fresh ids
    tables: dict[tuple[int, int], dict[Mapping, FourValue]] = {}
    context_ids: dict[tuple[int, object], tuple[int, Lookup]] = {}
    next_context = itertools.count(1)
    # substituted triples per (pattern, mapping); shared by all contexts
    subst_cache: dict[tuple[int, Mapping], StarTriple] = {}

    def build(node: Query, lookup: Lookup, ctx: int) -> dict[Mapping, FourValue]:
        key = (id(node), ctx)
        hit = tables.get(key)
        if hit is not None:
            return hit
        table: dict[Mapping, FourValue] = {}
        w = in_scope(node)
        if isinstance(node, Pattern):
            pid = id(node.pattern)
            for m in all_bindings(w):
                t = subst_cache.get((pid, m))
                if t is None:
                    t = _subst(node.pattern, m.get)
                    if t is None:
                        t = probe
                    subst_cache[(pid, m)] = t
                table[m] = lookup(t)
        elif isinstance(node, Join):
            left = build(node.left, lookup, ctx)
            right = build(node.right, lookup, ctx)
            wl, wr = in_scope(node.left), in_scope(node.right)
            tbl = table_of(node.op)
            for m in all_bindings(w):
                table[m] = tbl[(left[m.restrict(wl)], right[m.restrict(wr)])]
        elif isinstance(node, Union):
            left = build(node.left, lookup, ctx)
            right = build(node.right, lookup, ctx)
            tbl = table_of(node.op)
            for m in left:
                table[m] = tbl[(left[m], right[m])]
        elif isinstance(node, Filter):
            child = build(node.query, lookup, ctx)
            ident = identity_of(node.op)
            absorb = absorbing_of(node.op)
            tbl = table_of(node.op)
            for m, v in child.items():
                out = _formula(node.formula, m.get, v)
                table[m] = tbl[(v, ident if out == _T else absorb)]
        elif isinstance(node, MapState):
            child = build(node.query, lookup, ctx)
            for m, v in child.items():
                out = _formula(node.formula, m.get, v)
                table[m] = node.then_state if out == _T else node.else_state
        elif isinstance(node, Project):
            child = build(node.query, lookup, ctx)
            ident = identity_of(node.op)
            tbl = table_of(node.op)
            for m in all_bindings(w):
                table[m] = ident
            for cm, v in child.items():
                kept = cm.restrict(w)
                table[kept] = tbl[(table[kept], v)]
        elif isinstance(node, Belief):
            evars = belief_mod.belief_variables(node.expr)
            w1 = in_scope(node.query)
            for m in all_bindings(w):
                holder_binding = {v: t for v, t in m.bindings if v in evars}
                bound = _bind_expr(node.expr, holder_binding)
                if bound is None:
                    table[m] = UNKNOWN
                    continue
                ctx_key = (ctx, _expr_key(bound))
                if ctx_key not in context_ids:
                    inner_lookup = _compose_lookup(bound, lookup, vocab)
                    context_ids[ctx_key] = (next(next_context), inner_lookup)
                inner_ctx, inner_lookup = context_ids[ctx_key]
                child = build(node.query, inner_lookup, inner_ctx)
                table[m] = child[m.restrict(w1)]
        else:
            raise TypeError(f"not a query: {node!r}")
        tables[key] = table
        return table

    result = build(q, base_lookup, 0)
    return DenseRelation(in_scope(q), universe, result)


def _compose_lookup(e: belief_mod.BeliefQuery, base: Lookup,
                    vocab: BeliefVocabulary) -> Lookup:
    cache: dict[StarTriple, FourValue] = {}

    def lookup(t: StarTriple) -> FourValue:
        v = cache.get(t)
        if v is None:
            v = _belief_value(e, t, base, vocab)
            cache[t] = v
        return v

    return lookup


def _expr_key(e: belief_mod.BeliefQuery):
    if isinstance(e, belief_mod.AtomicBelief):
        return ("atom", e.holder, e.state, e.fallback)
    return ("cmp", e.op, _expr_key(e.left), _expr_key(e.right))


def diff(engine: Relation, reference: DenseRelation
         ) -> list[tuple[Mapping, FourValue, FourValue]]:
    """All rows where the engine and the dense reference disagree.

    Raises ShapeMismatch when the two results are not even comparable.
    """
    if engine.vars != reference.vars:
        raise ShapeMismatch(
            f"variable sets differ: {sorted(v.name for v in engine.vars)} vs "
            f"{sorted(v.name for v in reference.vars)}"
        )
    if engine.universe != reference.universe:
        raise ShapeMismatch("universes differ")
    out = []
    # reference tables are built in canonical order, so plain iteration
    # keeps the first counterexample deterministic
    for m, want in reference.rows.items():
        got = engine.value_at(m)
        if got != want:
            out.append((m, got, want))
    return out
