"""Query algebra and evaluation.

A relation annotates every total mapping (from its variables into terms)
with a state, finitely represented as a default plus exceptions, mirroring
the graph representation.  Two evaluation modes share one recursive
evaluator:

* active-domain: mappings range over the finite set of terms occurring in
  the graph and the query, fixed once at the top level (nested belief
  contexts reuse it);
* open: mappings range over the infinite term universe; results are exact
  or the evaluator refuses with NonFinitelySupported when no finite
  default+exception table exists.

``evaluate`` interprets the full algebra over the four states;
``evaluate_k`` interprets the plain fragment (patterns, join, union,
filter, projection) over an arbitrary commutative semiring, ignoring the
operator slots and using the semiring's add/multiply instead.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator

from . import belief as belief_mod
from .errors import (
    IllFormedQuery,
    NonFinitelySupported,
    NonIriHolder,
    UniverseTooLarge,
)
from .four import (
    FourOperator,
    FourValue,
    JOIN_OPERATORS,
    MEET_OPERATORS,
    Semiring,
    UNKNOWN,
    absorbing_of,
    apply,
    identity_of,
    reduce as four_reduce,
)
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
    match,
    pattern_is_ground,
    pattern_to_term,
    pattern_variables,
    term_text,
)

DEFAULT_CAP = 10**6


# ---------------------------------------------------------------------------
# Mappings and relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mapping:
    """A total assignment of terms to a finite set of variables.

    Stored as a name-sorted tuple so equal assignments hash equally.
    """

    bindings: tuple[tuple[Variable, Term], ...]

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.bindings)
            object.__setattr__(self, "_hash", h)
        return h

    @classmethod
    def of(cls, binding: dict[Variable, Term]) -> "Mapping":
        return cls(tuple(sorted(binding.items(), key=lambda kv: kv[0].name)))

    @property
    def domain(self) -> frozenset[Variable]:
        return frozenset(v for v, _ in self.bindings)

    def get(self, var: Variable) -> Term | None:
        for v, t in self.bindings:
            if v == var:
                return t
        return None

    def as_dict(self) -> dict[Variable, Term]:
        return dict(self.bindings)

    def restrict(self, vars: frozenset[Variable]) -> "Mapping":
        return Mapping(tuple((v, t) for v, t in self.bindings if v in vars))

    def merge(self, other: "Mapping") -> "Mapping | None":
        """Union of compatible mappings, None on any disagreement."""
        combined = dict(self.bindings)
        for v, t in other.bindings:
            seen = combined.get(v)
            if seen is None:
                combined[v] = t
            elif seen != t:
                return None
        return Mapping.of(combined)

    def extend(self, extra: dict[Variable, Term]) -> "Mapping":
        combined = dict(self.bindings)
        combined.update(extra)
        return Mapping.of(combined)

    def sort_key(self) -> tuple[str, ...]:
        return tuple(term_text(t) for _, t in self.bindings)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.name}={term_text(t)}" for v, t in self.bindings)
        return f"{{{inner}}}"


EMPTY_MAPPING = Mapping(())


def mappings_over(vars: Iterable[Variable], universe: Iterable[Term]) -> Iterator[Mapping]:
    """Every total mapping from vars into universe, in deterministic order."""
    vs = sorted(set(vars), key=lambda v: v.name)
    uni = sorted(set(universe), key=term_text)
    for combo in itertools.product(uni, repeat=len(vs)):
        yield Mapping(tuple(zip(vs, combo)))


class Relation:
    """Total annotation of all mappings over ``vars``: default + exceptions.

    ``universe`` is the active-domain term set, or None in open mode.
    Canonical form: no exception carries the default value and every
    exception's domain is exactly ``vars``.
    """

    __slots__ = ("vars", "default", "exceptions", "universe")

    def __init__(self, vars: frozenset[Variable], default,
                 exceptions: dict[Mapping, Any] | None = None,
                 universe: frozenset[Term] | None = None):
        self.vars = frozenset(vars)
        self.default = default
        self.universe = universe
        exc = {}
        if exceptions:
            for m, v in exceptions.items():
                if m.domain != self.vars:
                    raise ValueError(f"exception domain {set(m.domain)} != vars {set(self.vars)}")
                if v != default:
                    exc[m] = v
        self.exceptions = exc

    def value_at(self, m: Mapping):
        return self.exceptions.get(m, self.default)

    def rows(self) -> Iterator[tuple[Mapping, Any]]:
        """Exception rows in deterministic order (does not include the default)."""
        for m in sorted(self.exceptions, key=Mapping.sort_key):
            yield m, self.exceptions[m]

    def all_rows(self) -> Iterator[tuple[Mapping, Any]]:
        """Every mapping over the universe with its value; active-domain only."""
        if self.universe is None:
            raise ValueError("open relation has no finite row set")
        for m in mappings_over(self.vars, self.universe):
            yield m, self.value_at(m)

    def same_function(self, other: "Relation") -> bool:
        """Equality as total functions, tolerant of default choice when every
        mapping happens to be listed as an exception."""
        if self.vars != other.vars or self.universe != other.universe:
            return False
        for m in self.exceptions.keys() | other.exceptions.keys():
            if self.value_at(m) != other.value_at(m):
                return False
        if self.default == other.default:
            return True
        if self.universe is None:
            return False
        total = len(self.universe) ** len(self.vars)
        covered = len(self.exceptions.keys() | other.exceptions.keys())
        return covered >= total

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return (
            self.vars == other.vars
            and self.default == other.default
            and self.exceptions == other.exceptions
            and self.universe == other.universe
        )

    __hash__ = None

    def __repr__(self) -> str:
        rows = ", ".join(f"{m!r}: {v!r}" for m, v in self.rows())
        names = " ".join(sorted(v.name for v in self.vars))
        return f"Relation([{names}] default={self.default!r} {{{rows}}})"


FourRelation = Relation


# ---------------------------------------------------------------------------
# Filter formulas (three-valued: a condition can error out on unbound input)
# ---------------------------------------------------------------------------


class ThreeValued(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    ERROR = "error"


@dataclass(frozen=True)
class Eq:
    left: Iri | Variable
    right: Iri | Variable


@dataclass(frozen=True)
class Bound:
    var: Variable


@dataclass(frozen=True)
class StateIs:
    state: FourValue


@dataclass(frozen=True)
class Not:
    inner: "FilterFormula"


@dataclass(frozen=True)
class And:
    left: "FilterFormula"
    right: "FilterFormula"


@dataclass(frozen=True)
class Or:
    left: "FilterFormula"
    right: "FilterFormula"


FilterFormula = Eq | Bound | StateIs | Not | And | Or


def formula_variables(f: FilterFormula) -> frozenset[Variable]:
    if isinstance(f, Eq):
        out = set()
        for side in (f.left, f.right):
            if isinstance(side, Variable):
                out.add(side)
        return frozenset(out)
    if isinstance(f, Bound):
        return frozenset({f.var})
    if isinstance(f, StateIs):
        return frozenset()
    if isinstance(f, Not):
        return formula_variables(f.inner)
    return formula_variables(f.left) | formula_variables(f.right)


def formula_constants(f: FilterFormula) -> frozenset[Iri]:
    if isinstance(f, Eq):
        return frozenset(s for s in (f.left, f.right) if isinstance(s, Iri))
    if isinstance(f, (Bound, StateIs)):
        return frozenset()
    if isinstance(f, Not):
        return formula_constants(f.inner)
    return formula_constants(f.left) | formula_constants(f.right)


def _has_variable_eq(f: FilterFormula) -> bool:
    if isinstance(f, Eq):
        return isinstance(f.left, Variable) or isinstance(f.right, Variable)
    if isinstance(f, (Bound, StateIs)):
        return False
    if isinstance(f, Not):
        return _has_variable_eq(f.inner)
    return _has_variable_eq(f.left) or _has_variable_eq(f.right)


def _formula_value(f: FilterFormula, get: Callable[[Variable], Any], state) -> ThreeValued:
    """Three-valued formula evaluation.

    Equality errors out when a variable operand is unbound; negation keeps
    errors; conjunction lets a definite false win over an error and
    disjunction a definite true.
    """
    T, F, E = ThreeValued.TRUE, ThreeValued.FALSE, ThreeValued.ERROR
    if isinstance(f, Eq):
        sides = []
        for side in (f.left, f.right):
            val = get(side) if isinstance(side, Variable) else side
            if val is None:
                return E
            sides.append(val)
        return T if sides[0] == sides[1] else F
    if isinstance(f, Bound):
        return T if get(f.var) is not None else F
    if isinstance(f, StateIs):
        return T if state == f.state else F
    if isinstance(f, Not):
        inner = _formula_value(f.inner, get, state)
        return {T: F, F: T, E: E}[inner]
    if isinstance(f, And):
        a = _formula_value(f.left, get, state)
        b = _formula_value(f.right, get, state)
        if F in (a, b):
            return F
        if E in (a, b):
            return E
        return T
    if isinstance(f, Or):
        a = _formula_value(f.left, get, state)
        b = _formula_value(f.right, get, state)
        if T in (a, b):
            return T
        if E in (a, b):
            return E
        return F
    raise TypeError(f"not a filter formula: {f!r}")


def eval_formula(f: FilterFormula, m: Mapping, r: Relation) -> ThreeValued:
    return _formula_value(f, m.get, r.value_at(m))


# ---------------------------------------------------------------------------
# Query AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pattern:
    pattern: TriplePattern


@dataclass(frozen=True)
class Join:
    op: FourOperator
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Union:
    op: FourOperator
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Filter:
    op: FourOperator
    query: "Query"
    formula: FilterFormula


@dataclass(frozen=True)
class Project:
    op: FourOperator
    vars: frozenset[Variable]
    query: "Query"


@dataclass(frozen=True)
class MapState:
    query: "Query"
    formula: FilterFormula
    then_state: FourValue
    else_state: FourValue


@dataclass(frozen=True)
class Belief:
    expr: belief_mod.BeliefQuery
    query: "Query"


Query = Pattern | Join | Union | Filter | Project | MapState | Belief


def in_scope(q: Query) -> frozenset[Variable]:
    """Variables a query binds.  Raises IllFormedQuery on any scoping-rule
    violation (join/union operator family, union scope mismatch, projection
    of an out-of-scope variable, belief variable shadowing)."""
    if isinstance(q, Pattern):
        return pattern_variables(q.pattern)
    if isinstance(q, Join):
        if q.op not in MEET_OPERATORS:
            raise IllFormedQuery(f"join must use a meet operator, got {q.op.value}")
        return in_scope(q.left) | in_scope(q.right)
    if isinstance(q, Union):
        if q.op not in JOIN_OPERATORS:
            raise IllFormedQuery(f"union must use a join operator, got {q.op.value}")
        left, right = in_scope(q.left), in_scope(q.right)
        if left != right:
            ln = sorted(v.name for v in left)
            rn = sorted(v.name for v in right)
            raise IllFormedQuery(f"union branches bind different variables: {ln} vs {rn}")
        return left
    if isinstance(q, Filter):
        return in_scope(q.query)
    if isinstance(q, Project):
        inner = in_scope(q.query)
        if not q.vars <= inner:
            missing = sorted(v.name for v in q.vars - inner)
            raise IllFormedQuery(f"projection of out-of-scope variable(s): {missing}")
        return frozenset(q.vars)
    if isinstance(q, MapState):
        return in_scope(q.query)
    if isinstance(q, Belief):
        inner = in_scope(q.query)
        evars = belief_mod.belief_variables(q.expr)
        shadowed = inner & evars
        if shadowed:
            names = sorted(v.name for v in shadowed)
            raise IllFormedQuery(f"belief variable(s) shadow body scope: {names}")
        return inner | evars
    raise TypeError(f"not a query: {q!r}")


def _pattern_constant_terms(p, acc: set[Term]) -> None:
    if isinstance(p, Iri):
        acc.add(p)
        return
    if isinstance(p, Variable):
        return
    if pattern_is_ground(p):
        acc.add(pattern_to_term(p))
        return
    _pattern_constant_terms(p.subject, acc)
    _pattern_constant_terms(p.predicate, acc)
    _pattern_constant_terms(p.object, acc)


def _belief_holders(e: belief_mod.BeliefQuery, acc: set[Term]) -> None:
    if isinstance(e, belief_mod.AtomicBelief):
        if isinstance(e.holder, Iri):
            acc.add(e.holder)
        return
    _belief_holders(e.left, acc)
    _belief_holders(e.right, acc)


def query_constants(q: Query) -> frozenset[Term]:
    """Ground terms the query mentions; they join the active domain."""
    acc: set[Term] = set()

    def walk(node: Query) -> None:
        if isinstance(node, Pattern):
            _pattern_constant_terms(node.pattern, acc)
        elif isinstance(node, (Join, Union)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Filter):
            acc.update(formula_constants(node.formula))
            walk(node.query)
        elif isinstance(node, Project):
            walk(node.query)
        elif isinstance(node, MapState):
            acc.update(formula_constants(node.formula))
            walk(node.query)
        elif isinstance(node, Belief):
            _belief_holders(node.expr, acc)
            walk(node.query)
        else:
            raise TypeError(f"not a query: {node!r}")

    walk(q)
    return frozenset(acc)


class EvalMode(enum.Enum):
    ACTIVE_DOMAIN = "active-domain"
    OPEN = "open"


# A synthetic "generic" term: distinct from every IRI and quoted triple, and
# from other generics with a different index.  Used to probe how a formula
# behaves on mappings outside the exception table.
@dataclass(frozen=True)
class _Generic:
    index: int


def _generic_outcome(f: FilterFormula, vars: frozenset[Variable], state) -> ThreeValued:
    """Formula outcome on a fully generic mapping: every in-scope variable
    bound to a fresh, pairwise-distinct term unequal to any constant."""
    rep = {v: _Generic(i) for i, v in enumerate(sorted(vars, key=lambda v: v.name))}
    return _formula_value(f, rep.get, state)


def _set_partitions(items: list) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _default_outcome_classes(
    f: FilterFormula, vars: frozenset[Variable], state
) -> Iterator[tuple[Mapping | None, ThreeValued]]:
    """Partition the (infinitely many) generic mappings by formula behaviour.

    Yields (mapping, outcome) for singleton classes that pin every variable
    to a formula constant, and (None, outcome) for infinite classes.  Sound
    because the atoms only compare variables with each other and with the
    formula's constants, and test the (fixed, default) state.
    """
    vs = sorted(vars, key=lambda v: v.name)
    if len(vs) > 10:
        raise NonFinitelySupported(
            f"refusing equality-type analysis over {len(vs)} variables"
        )
    constants = sorted(formula_constants(f), key=lambda i: i.text)
    for partition in _set_partitions(vs):
        blocks = len(partition)
        # each block is either pinned to one constant (injectively) or generic
        for labels in itertools.product([None, *range(len(constants))], repeat=blocks):
            used = [i for i in labels if i is not None]
            if len(used) != len(set(used)):
                continue
            rep: dict[Variable, Any] = {}
            finite = True
            for bi, block in enumerate(partition):
                if labels[bi] is None:
                    value: Any = _Generic(bi)
                    finite = False
                else:
                    value = constants[labels[bi]]
                for v in block:
                    rep[v] = value
            outcome = _formula_value(f, rep.get, state)
            if finite:
                yield Mapping.of(rep), outcome
            else:
                yield None, outcome


# ---------------------------------------------------------------------------
# Shared combinators (four-valued and generic-semiring evaluation)
# ---------------------------------------------------------------------------


def _combine_join(
    r1: Relation,
    r2: Relation,
    op2: Callable[[Any, Any], Any],
    mode: EvalMode,
    universe_list: list[Term] | None,
) -> Relation:
    w1, w2 = r1.vars, r2.vars
    w = w1 | w2
    d = op2(r1.default, r2.default)
    candidates: set[Mapping] = set()
    for m1 in r1.exceptions:
        for m2 in r2.exceptions:
            merged = m1.merge(m2)
            if merged is not None:
                candidates.add(merged)
    for left, right, extra in ((r1, r2, w2 - w1), (r2, r1, w1 - w2)):
        if not extra:
            candidates.update(left.exceptions.keys())
            continue
        if left is r1:
            hot = [m for m, v in left.exceptions.items() if op2(v, right.default) != d]
        else:
            hot = [m for m, v in left.exceptions.items() if op2(right.default, v) != d]
        if not hot:
            continue
        if mode is EvalMode.OPEN:
            raise NonFinitelySupported(
                "join of relations with disjoint variables whose defaults do not absorb"
            )
        extra_sorted = sorted(extra, key=lambda v: v.name)
        for m in hot:
            for combo in itertools.product(universe_list, repeat=len(extra_sorted)):
                candidates.add(m.extend(dict(zip(extra_sorted, combo))))
    exceptions: dict[Mapping, Any] = {}
    for m in candidates:
        v = op2(r1.value_at(m.restrict(w1)), r2.value_at(m.restrict(w2)))
        if v != d:
            exceptions[m] = v
    universe = frozenset(universe_list) if universe_list is not None else None
    return Relation(w, d, exceptions, universe)


def _combine_union(r1: Relation, r2: Relation, op2: Callable[[Any, Any], Any]) -> Relation:
    d = op2(r1.default, r2.default)
    exceptions: dict[Mapping, Any] = {}
    for m in r1.exceptions.keys() | r2.exceptions.keys():
        v = op2(r1.value_at(m), r2.value_at(m))
        if v != d:
            exceptions[m] = v
    return Relation(r1.vars, d, exceptions, r1.universe)


def _transform_by_formula(
    r: Relation,
    f: FilterFormula,
    value_for: Callable[[ThreeValued, Any], Any],
    mode: EvalMode,
    universe_list: list[Term] | None,
) -> Relation:
    """Shared core of filtering and state-mapping.

    value_for(outcome, annotation) gives the transformed annotation of a
    mapping from its formula outcome and current annotation.  Off-support
    behaviour: without variable equalities the outcome is uniform; with
    them, active-domain mode enumerates mappings densely while open mode
    runs the equality-type analysis.
    """
    w = r.vars
    exceptions: dict[Mapping, Any] = {}
    if not _has_variable_eq(f):
        default = value_for(_generic_outcome(f, w, r.default), r.default)
        for m, v in r.exceptions.items():
            nv = value_for(_formula_value(f, m.get, v), v)
            if nv != default:
                exceptions[m] = nv
        return Relation(w, default, exceptions, r.universe)

    if mode is EvalMode.ACTIVE_DOMAIN:
        default = value_for(_generic_outcome(f, w, r.default), r.default)
        for m in mappings_over(w, universe_list):
            v = r.value_at(m)
            nv = value_for(_formula_value(f, m.get, v), v)
            if nv != default:
                exceptions[m] = nv
        return Relation(w, default, exceptions, r.universe)

    # open mode: classify default-state mappings exactly
    default = None
    pinned: dict[Mapping, Any] = {}
    for rep, outcome in _default_outcome_classes(f, w, r.default):
        value = value_for(outcome, r.default)
        if rep is None:
            if default is None:
                default = value
            elif default != value:
                raise NonFinitelySupported(
                    "formula distinguishes infinitely many off-support mappings"
                )
        else:
            pinned[rep] = value
    if default is None:
        # no variables at all: the single empty mapping is its own class
        default = value_for(_generic_outcome(f, w, r.default), r.default)
    for m, v in r.exceptions.items():
        nv = value_for(_formula_value(f, m.get, v), v)
        if nv != default:
            exceptions[m] = nv
    for m, nv in pinned.items():
        if m not in r.exceptions and nv != default:
            exceptions[m] = nv
    return Relation(w, default, exceptions, r.universe)


def _group_exceptions(
    r: Relation, keep: frozenset[Variable]
) -> dict[Mapping, list]:
    groups: dict[Mapping, list] = {}
    for m, v in r.exceptions.items():
        groups.setdefault(m.restrict(keep), []).append(v)
    return groups


def _project_four(
    r: Relation,
    keep: frozenset[Variable],
    op: FourOperator,
    mode: EvalMode,
    universe_list: list[Term] | None,
) -> Relation:
    dropped = r.vars - keep
    if not dropped:
        return Relation(keep, r.default, dict(r.exceptions), r.universe)
    groups = _group_exceptions(r, keep)
    exceptions: dict[Mapping, Any] = {}
    if mode is EvalMode.OPEN:
        # infinitely many default extensions always exist; one copy suffices
        default = r.default
        for m, vals in groups.items():
            acc = apply(op, four_reduce(op, vals), r.default)
            if acc != default:
                exceptions[m] = acc
        return Relation(keep, default, exceptions, None)
    ext_total = len(universe_list) ** len(dropped)
    default = r.default if ext_total >= 1 else identity_of(op)
    for m, vals in groups.items():
        acc = four_reduce(op, vals)
        if len(vals) < ext_total:
            acc = apply(op, acc, r.default)
        if acc != default:
            exceptions[m] = acc
    return Relation(keep, default, exceptions, r.universe)


def _project_semiring(
    r: Relation,
    keep: frozenset[Variable],
    s: Semiring,
    mode: EvalMode,
    universe_list: list[Term] | None,
) -> Relation:
    dropped = r.vars - keep
    if not dropped:
        return Relation(keep, r.default, dict(r.exceptions), r.universe)
    groups = _group_exceptions(r, keep)
    exceptions: dict[Mapping, Any] = {}
    if mode is EvalMode.OPEN:
        if r.default != s.zero:
            raise NonFinitelySupported(
                "generic projection over an infinite domain needs a zero default"
            )
        for m, vals in groups.items():
            acc = s.sum(vals)
            if acc != s.zero:
                exceptions[m] = acc
        return Relation(keep, s.zero, exceptions, None)
    ext_total = len(universe_list) ** len(dropped)
    default = s.sum_repeated(r.default, ext_total)
    for m, vals in groups.items():
        acc = s.add(s.sum(vals), s.sum_repeated(r.default, ext_total - len(vals)))
        if acc != default:
            exceptions[m] = acc
    return Relation(keep, default, exceptions, r.universe)


# ---------------------------------------------------------------------------
# Four-valued evaluation
# ---------------------------------------------------------------------------


def _eval_pattern(p: TriplePattern, g: FourGraph, universe: frozenset[Term] | None) -> Relation:
    vars = pattern_variables(p)
    exceptions: dict[Mapping, Any] = {}
    for t, v in g.exceptions.items():
        binding = match(p, t)
        if binding is not None:
            exceptions[Mapping.of(binding)] = v
    return Relation(vars, g.default, exceptions, universe)


class _FourEngine:
    def __init__(self, graph: FourGraph, vocab: BeliefVocabulary, mode: EvalMode,
                 universe: frozenset[Term] | None, cap: int):
        self.graph = graph
        self.vocab = vocab
        self.mode = mode
        self.universe = universe
        self.universe_list = (
            sorted(universe, key=term_text) if universe is not None else None
        )
        self.cap = cap
        self._extract_cache: dict = {}
        self._eval_cache: dict = {}
        self._fresh_counter = 0

    # -- helpers -----------------------------------------------------------

    def _fresh_holder(self, g: FourGraph) -> Iri:
        taken = {t.text for t in active_domain(g) if isinstance(t, Iri)}
        while True:
            candidate = f"urn:esparql:fresh{self._fresh_counter}"
            self._fresh_counter += 1
            if candidate not in taken:
                return Iri(candidate)

    def _extract(self, g: FourGraph, e: belief_mod.BeliefQuery) -> FourGraph:
        key = (g.key(), e)
        hit = self._extract_cache.get(key)
        if hit is None:
            hit = belief_mod.extract(g, e, self.vocab)
            self._extract_cache[key] = hit
        return hit

    def eval(self, q: Query, g: FourGraph) -> Relation:
        key = (id(q), g.key())
        hit = self._eval_cache.get(key)
        if hit is None:
            hit = self._eval(q, g)
            self._eval_cache[key] = hit
        return hit

    # -- node cases ---------------------------------------------------------

    def _eval(self, q: Query, g: FourGraph) -> Relation:
        if isinstance(q, Pattern):
            return _eval_pattern(q.pattern, g, self.universe)
        if isinstance(q, Join):
            r1 = self.eval(q.left, g)
            r2 = self.eval(q.right, g)
            return _combine_join(
                r1, r2, lambda a, b: apply(q.op, a, b), self.mode, self.universe_list
            )
        if isinstance(q, Union):
            r1 = self.eval(q.left, g)
            r2 = self.eval(q.right, g)
            return _combine_union(r1, r2, lambda a, b: apply(q.op, a, b))
        if isinstance(q, Filter):
            r1 = self.eval(q.query, g)
            ident = identity_of(q.op)
            absorb = absorbing_of(q.op)

            def value_for(outcome: ThreeValued, v):
                c = ident if outcome is ThreeValued.TRUE else absorb
                return apply(q.op, v, c)

            return _transform_by_formula(r1, q.formula, value_for, self.mode, self.universe_list)
        if isinstance(q, MapState):
            r1 = self.eval(q.query, g)

            def value_for(outcome: ThreeValued, v):
                return q.then_state if outcome is ThreeValued.TRUE else q.else_state

            return _transform_by_formula(r1, q.formula, value_for, self.mode, self.universe_list)
        if isinstance(q, Project):
            r1 = self.eval(q.query, g)
            return _project_four(r1, frozenset(q.vars), q.op, self.mode, self.universe_list)
        if isinstance(q, Belief):
            return self._eval_belief(q, g)
        raise TypeError(f"not a query: {q!r}")

    def _eval_belief(self, q: Belief, g: FourGraph) -> Relation:
        evars = belief_mod.belief_variables(q.expr)
        if not evars:
            inner_graph = self._extract(g, q.expr)
            return self.eval(q.query, inner_graph)

        w1 = in_scope(q.query)
        w = w1 | evars
        evars_sorted = sorted(evars, key=lambda v: v.name)

        fresh = self._fresh_holder(g)
        generic_inst = belief_mod.instantiate(q.expr, {v: fresh for v in evars})
        r0 = self.eval(q.query, self._extract(g, generic_inst))

        if self.mode is EvalMode.OPEN:
            return self._eval_belief_open(q, g, r0, evars_sorted, w1, w)
        return self._eval_belief_active(q, g, r0, evars_sorted, w1, w)

    def _belief_candidate_holders(self, g: FourGraph) -> list[Iri]:
        preds = self.vocab.predicates()
        found = {
            t.subject
            for t in g.exceptions
            if t.predicate in preds and isinstance(t.subject, Iri)
            and isinstance(t.object, StarTriple)
        }
        return sorted(found, key=lambda i: i.text)

    def _eval_belief_active(self, q, g, r0, evars_sorted, w1, w) -> Relation:
        default = r0.default
        exceptions: dict[Mapping, Any] = {}

        def add_slice(assignment: Mapping, rel: Relation | None):
            # rel None means the slice is constantly unknown (non-IRI holder)
            if rel is None:
                if UNKNOWN == default:
                    return
                for m1 in mappings_over(w1, self.universe_list):
                    exceptions[assignment.merge(m1)] = UNKNOWN
                return
            if rel.default != default:
                for m1 in mappings_over(w1, self.universe_list):
                    v = rel.value_at(m1)
                    if v != default:
                        exceptions[assignment.merge(m1)] = v
                return
            for m1, v in rel.exceptions.items():
                exceptions[assignment.merge(m1)] = v

        for combo in itertools.product(self.universe_list, repeat=len(evars_sorted)):
            binding = dict(zip(evars_sorted, combo))
            assignment = Mapping.of(binding)
            try:
                inst = belief_mod.instantiate(q.expr, binding)
            except NonIriHolder:
                add_slice(assignment, None)
                continue
            rel = self.eval(q.query, self._extract(g, inst))
            add_slice(assignment, rel)
        return Relation(w, default, exceptions, self.universe)

    def _eval_belief_open(self, q, g, r0, evars_sorted, w1, w) -> Relation:
        # Fresh-IRI holders and quoted-triple holders both form infinite
        # families of slices; a finite table exists only when those slices
        # are constantly unknown.
        if r0.exceptions or r0.default != UNKNOWN:
            raise NonFinitelySupported(
                "belief over a quantified holder is not constantly unknown off-support"
            )
        default = UNKNOWN
        exceptions: dict[Mapping, Any] = {}
        candidates = self._belief_candidate_holders(g)
        for combo in itertools.product(candidates, repeat=len(evars_sorted)):
            binding = dict(zip(evars_sorted, combo))
            assignment = Mapping.of(binding)
            inst = belief_mod.instantiate(q.expr, binding)
            rel = self.eval(q.query, self._extract(g, inst))
            if not w1:
                value = rel.value_at(EMPTY_MAPPING)
                if value != default:
                    exceptions[assignment] = value
                continue
            if rel.default != default:
                raise NonFinitelySupported(
                    "belief slice disagrees with the default on infinitely many mappings"
                )
            for m1, v in rel.exceptions.items():
                exceptions[assignment.merge(m1)] = v
        return Relation(w, default, exceptions, None)


def _scope_guard(q: Query, universe: frozenset[Term], cap: int) -> None:
    """Refuse up front when any sub-result could exceed the enumeration cap."""
    size = len(universe)

    def walk(node: Query) -> None:
        w = len(in_scope(node))
        if size ** w > cap:
            raise UniverseTooLarge(
                f"|universe| ** |vars| = {size}**{w} exceeds cap {cap}"
            )
        if isinstance(node, (Join, Union)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Filter, Project, MapState, Belief)):
            walk(node.query)

    walk(q)


def evaluate(
    q: Query,
    g: FourGraph,
    *,
    vocab: BeliefVocabulary = DEFAULT_VOCABULARY,
    mode: EvalMode = EvalMode.ACTIVE_DOMAIN,
    cap: int = DEFAULT_CAP,
) -> Relation:
    """Evaluate a four-valued query.

    Validates scoping first (IllFormedQuery).  In active-domain mode the
    universe is fixed once from the graph and the query's constant terms;
    open mode may raise NonFinitelySupported.
    """
    in_scope(q)
    if mode is EvalMode.ACTIVE_DOMAIN:
        universe = active_domain(g, query_constants(q))
        _scope_guard(q, universe, cap)
    else:
        universe = None
    engine = _FourEngine(g, vocab, mode, universe, cap)
    return engine.eval(q, g)


# ---------------------------------------------------------------------------
# Generic semiring evaluation (plain-annotated fragment)
# ---------------------------------------------------------------------------


def _check_plain_fragment(q: Query) -> None:
    def check_formula(f: FilterFormula) -> None:
        if isinstance(f, StateIs):
            raise IllFormedQuery("state tests have no meaning over a generic semiring")
        if isinstance(f, Not):
            check_formula(f.inner)
        elif isinstance(f, (And, Or)):
            check_formula(f.left)
            check_formula(f.right)

    if isinstance(q, Pattern):
        return
    if isinstance(q, (Join, Union)):
        _check_plain_fragment(q.left)
        _check_plain_fragment(q.right)
        return
    if isinstance(q, Filter):
        check_formula(q.formula)
        _check_plain_fragment(q.query)
        return
    if isinstance(q, Project):
        _check_plain_fragment(q.query)
        return
    raise IllFormedQuery(
        f"{type(q).__name__} is outside the plain-annotated fragment"
    )


def evaluate_k(
    q: Query,
    g: FourGraph,
    s: Semiring,
    *,
    mode: EvalMode = EvalMode.ACTIVE_DOMAIN,
    cap: int = DEFAULT_CAP,
) -> Relation:
    """Evaluate the plain fragment over an arbitrary commutative semiring.

    Join/union/filter/projection operator slots are ignored; the semiring's
    multiply and add take their place (filters multiply by one or zero, so
    a failed condition annihilates).  Graph annotations must live in the
    semiring's carrier.
    """
    _check_plain_fragment(q)
    in_scope(q)
    if mode is EvalMode.ACTIVE_DOMAIN:
        universe = active_domain(g, query_constants(q))
        _scope_guard(q, universe, cap)
        universe_list = sorted(universe, key=term_text)
    else:
        universe = None
        universe_list = None

    def run(node: Query) -> Relation:
        if isinstance(node, Pattern):
            return _eval_pattern(node.pattern, g, universe)
        if isinstance(node, Join):
            return _combine_join(run(node.left), run(node.right), s.multiply, mode, universe_list)
        if isinstance(node, Union):
            return _combine_union(run(node.left), run(node.right), s.add)
        if isinstance(node, Filter):
            r1 = run(node.query)

            def value_for(outcome: ThreeValued, v):
                return s.multiply(v, s.one if outcome is ThreeValued.TRUE else s.zero)

            return _transform_by_formula(r1, node.formula, value_for, mode, universe_list)
        if isinstance(node, Project):
            return _project_semiring(run(node.query), frozenset(node.vars), s, mode, universe_list)
        raise TypeError(f"not a plain query: {node!r}")

    return run(q)
