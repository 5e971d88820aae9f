"""Concrete syntax: graph files, the user query language, and result output.

Graph files (FourStar format) carry one statement per line, each an RDF-star
triple with an optional ``@state`` annotation.  Queries use a SPARQL-like
surface syntax that desugars into the annotated algebra.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from functools import reduce as _fold
from typing import Optional, Union as TUnion

from .belief import BeliefQuery, CompoundBelief, all_states_shorthand
from .errors import DuplicateTriple, IllFormedQuery, ParseError
from .four import FourOperator, FourValue
from .model import (
    DEFAULT_BASE_IRI,
    FourGraph,
    Iri,
    StarTriple,
    TriplePattern,
    Variable,
    term_text,
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
    Relation,
    StateIs,
    Union,
    in_scope,
)

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_STATE_WORDS = {v.label: v for v in FourValue}

_STATE_KEYWORDS = {v.label.upper(): v for v in FourValue}


def resolve_iri(text: str, base: str) -> Iri:
    """Keep absolute IRIs; resolve bare names against the base."""
    if _SCHEME.match(text):
        return Iri(text)
    return Iri(base + text)


def shorten_iri(text: str, base: str) -> str:
    if base and text.startswith(base) and len(text) > len(base):
        return text[len(base):]
    return text


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # IRI VAR WORD ANNOT PUNCT EOF
    text: str
    line: int
    column: int


_PUNCT_SINGLE = ".{}()!=*"


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(message: str, at_line: int, at_col: int) -> ParseError:
        return ParseError(message, at_line, at_col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c == "<":
            if i + 1 < n and text[i + 1] == "<":
                tokens.append(Token("PUNCT", "<<", start_line, start_col))
                i += 2
                col += 2
                continue
            j = i + 1
            while j < n and text[j] not in ">\n":
                if text[j] in " \t<":
                    raise err("bad character inside IRI", line, col + (j - i))
                j += 1
            if j >= n or text[j] != ">":
                raise err("unterminated IRI", start_line, start_col)
            body = text[i + 1 : j]
            if not body:
                raise err("empty IRI", start_line, start_col)
            tokens.append(Token("IRI", body, start_line, start_col))
            col += j - i + 1
            i = j + 1
            continue
        if c == ">":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token("PUNCT", ">>", start_line, start_col))
                i += 2
                col += 2
                continue
            raise err("unexpected '>'", start_line, start_col)
        if c == "?":
            m = _NAME.match(text, i + 1)
            if not m:
                raise err("expected a variable name after '?'", start_line, start_col)
            tokens.append(Token("VAR", m.group(), start_line, start_col))
            col += m.end() - i
            i = m.end()
            continue
        if c == "@":
            m = _NAME.match(text, i + 1)
            if not m:
                raise err("expected a word after '@'", start_line, start_col)
            tokens.append(Token("ANNOT", m.group(), start_line, start_col))
            col += m.end() - i
            i = m.end()
            continue
        if c in ("&", "|"):
            if i + 1 < n and text[i + 1] == c:
                tokens.append(Token("PUNCT", c + c, start_line, start_col))
                i += 2
                col += 2
                continue
            raise err(f"unexpected {c!r}", start_line, start_col)
        if c in _PUNCT_SINGLE:
            tokens.append(Token("PUNCT", c, start_line, start_col))
            i += 1
            col += 1
            continue
        m = _NAME.match(text, i)
        if m:
            tokens.append(Token("WORD", m.group(), start_line, start_col))
            col += m.end() - i
            i = m.end()
            continue
        raise err(f"unexpected character {c!r}", start_line, start_col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Stream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        found = tok.text if tok.kind != "EOF" else "end of input"
        return ParseError(f"{message}, found {found!r}" if found else message,
                          tok.line, tok.column, expected=message, found=found)

    def expect_punct(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind != "PUNCT" or tok.text != text:
            raise self.error(f"expected {text!r}")
        return self.next()

    def expect_word(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "WORD" or tok.text != word:
            raise self.error(f"expected {word!r}")
        return self.next()

    def at_word(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "WORD" and tok.text == word

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "PUNCT" and tok.text == text


# ---------------------------------------------------------------------------
# Graph files
# ---------------------------------------------------------------------------


def _parse_ground_term(s: _Stream, base: str):
    tok = s.peek()
    if tok.kind == "IRI":
        s.next()
        return resolve_iri(tok.text, base)
    if s.at_punct("<<"):
        s.next()
        subject = _parse_ground_term(s, base)
        pred = s.peek()
        if pred.kind != "IRI":
            raise s.error("expected a predicate IRI")
        s.next()
        obj = _parse_ground_term(s, base)
        s.expect_punct(">>")
        return StarTriple(subject, resolve_iri(pred.text, base), obj)
    raise s.error("expected an IRI or a quoted triple")


def parse_graph(text: str, *, base_iri: str = DEFAULT_BASE_IRI) -> FourGraph:
    """Read a FourStar file into a graph; rejects duplicate triple keys."""
    s = _Stream(_tokenize(text))
    default = FourValue.UNKNOWN
    first = True
    entries: dict[StarTriple, FourValue] = {}
    while not s.peek().kind == "EOF":
        tok = s.peek()
        if tok.kind == "ANNOT" and tok.text == "default":
            if not first:
                raise s.error("'@default' must be the first statement")
            s.next()
            word = s.peek()
            if word.kind != "WORD" or word.text not in _STATE_WORDS:
                raise s.error("expected a state name")
            default = _STATE_WORDS[word.text]
            s.next()
            s.expect_punct(".")
            first = False
            continue
        first = False
        start = s.peek()
        subject = _parse_ground_term(s, base_iri)
        pred = s.peek()
        if pred.kind != "IRI":
            raise s.error("expected a predicate IRI")
        s.next()
        obj = _parse_ground_term(s, base_iri)
        value = FourValue.TRUE
        if s.peek().kind == "ANNOT":
            ann = s.next()
            if ann.text not in _STATE_WORDS:
                raise ParseError(f"unknown state {ann.text!r}", ann.line, ann.column)
            value = _STATE_WORDS[ann.text]
        s.expect_punct(".")
        triple = StarTriple(subject, resolve_iri(pred.text, base_iri), obj)
        if triple in entries:
            raise DuplicateTriple(
                f"triple annotated twice: {term_text(triple)}", start.line, start.column
            )
        entries[triple] = value
    return FourGraph(default, entries)


def render_graph(g: FourGraph) -> str:
    """Canonical writer: sorted absolute statements, '@true' left implicit."""
    lines = [f"@default {g.default.label} ."]
    for t in sorted(g.exceptions, key=term_text):
        v = g.exceptions[t]
        suffix = "" if v == FourValue.TRUE else f" @{v.label}"
        lines.append(f"{_render_term(t.subject)} <{t.predicate.text}> {_render_term(t.object)}{suffix} .")
    return "\n".join(lines) + "\n"


def _render_term(term) -> str:
    if isinstance(term, Iri):
        return f"<{term.text}>"
    return f"<< {_render_term(term.subject)} <{term.predicate.text}> {_render_term(term.object)} >>"


# ---------------------------------------------------------------------------
# User queries
# ---------------------------------------------------------------------------


@dataclass
class TripleItem:
    pattern: TriplePattern


@dataclass
class MapItem:
    cond: FilterFormula
    to_state: FourValue
    else_state: FourValue
    position: tuple[int, int] = (0, 0)


@dataclass
class FilterItem:
    cond: FilterFormula
    position: tuple[int, int] = (0, 0)


@dataclass
class SubSelect:
    query: "UserQuery"


@dataclass
class UnionItem:
    left: list
    right: list
    position: tuple[int, int] = (0, 0)


BodyItem = TUnion[TripleItem, MapItem, FilterItem, SubSelect, UnionItem]


@dataclass
class UserQuery:
    info: bool
    projection: Optional[list[Variable]]  # None means SELECT *
    holders: list
    body: list
    position: tuple[int, int] = (0, 0)


_KEYWORDS = {
    "SELECT", "INFO", "FROM", "BELIEF", "WHERE", "MAP", "IF", "TO", "ELSE",
    "FILTER", "UNION", "STATE", "IS", "BOUND",
    "TRUE", "FALSE", "UNKNOWN", "CONFLICTED", "a",
}


def parse_query(text: str, *, base_iri: str = DEFAULT_BASE_IRI) -> UserQuery:
    s = _Stream(_tokenize(text))
    q = _parse_select(s, base_iri)
    if s.peek().kind != "EOF":
        raise s.error("expected end of input")
    return q


def _parse_select(s: _Stream, base: str) -> UserQuery:
    start = s.expect_word("SELECT")
    info = False
    if s.at_word("INFO"):
        s.next()
        info = True
    projection: Optional[list[Variable]]
    if s.at_punct("*"):
        s.next()
        projection = None
    else:
        projection = []
        while s.peek().kind == "VAR":
            projection.append(Variable(s.next().text))
        if not projection:
            raise s.error("expected '*' or projection variables")
    holders: list = []
    if s.at_word("FROM"):
        s.next()
        s.expect_word("BELIEF")
        while True:
            tok = s.peek()
            if tok.kind == "IRI":
                s.next()
                holders.append(resolve_iri(tok.text, base))
            elif tok.kind == "VAR":
                s.next()
                holders.append(Variable(tok.text))
            elif holders:
                break
            else:
                raise s.error("expected a belief holder")
    s.expect_word("WHERE")
    body = _parse_group(s, base)
    return UserQuery(info, projection, holders, body, (start.line, start.column))


def _parse_group(s: _Stream, base: str) -> list:
    s.expect_punct("{")
    if s.at_word("SELECT"):
        # a group may hold a bare sub-query
        sub = _parse_select(s, base)
        s.expect_punct("}")
        return [SubSelect(sub)]
    items = [_parse_item(s, base)]
    while True:
        if s.at_punct("."):
            s.next()
            if s.at_punct("}"):
                break
            items.append(_parse_item(s, base))
        elif s.at_punct("}"):
            break
        elif isinstance(items[-1], (SubSelect, UnionItem)):
            # separator dot is optional after a braced item
            items.append(_parse_item(s, base))
        else:
            raise s.error("expected '.' or '}'")
    s.expect_punct("}")
    return items


def _parse_item(s: _Stream, base: str):
    if s.at_punct("{"):
        if s.peek(1).kind == "WORD" and s.peek(1).text == "SELECT":
            s.next()
            sub = _parse_select(s, base)
            s.expect_punct("}")
            item: BodyItem = SubSelect(sub)
        else:
            left = _parse_group(s, base)
            union_tok = s.peek()
            s.expect_word("UNION")
            right = _parse_group(s, base)
            item = UnionItem(left, right, (union_tok.line, union_tok.column))
        while s.at_word("UNION"):
            union_tok = s.next()
            right = _parse_group(s, base)
            item = UnionItem([item], right, (union_tok.line, union_tok.column))
        return item
    if s.at_word("MAP"):
        start = s.next()
        s.expect_word("IF")
        s.expect_punct("(")
        cond = _parse_cond(s, base)
        s.expect_punct(")")
        s.expect_word("TO")
        to_state = _parse_state_keyword(s)
        s.expect_word("ELSE")
        else_state = _parse_state_keyword(s)
        return MapItem(cond, to_state, else_state, (start.line, start.column))
    if s.at_word("FILTER"):
        start = s.next()
        s.expect_punct("(")
        cond = _parse_cond(s, base)
        s.expect_punct(")")
        return FilterItem(cond, (start.line, start.column))
    return TripleItem(_parse_triple_pattern(s, base))


def _parse_state_keyword(s: _Stream) -> FourValue:
    tok = s.peek()
    if tok.kind == "WORD" and tok.text in _STATE_KEYWORDS:
        s.next()
        return _STATE_KEYWORDS[tok.text]
    raise s.error("expected TRUE, FALSE, UNKNOWN or CONFLICTED")


def _parse_term_pattern(s: _Stream, base: str):
    tok = s.peek()
    if tok.kind == "IRI":
        s.next()
        return resolve_iri(tok.text, base)
    if tok.kind == "VAR":
        s.next()
        return Variable(tok.text)
    if s.at_punct("<<"):
        s.next()
        subject = _parse_term_pattern(s, base)
        pred = _parse_pred_pattern(s, base)
        obj = _parse_term_pattern(s, base)
        s.expect_punct(">>")
        return TriplePattern(subject, pred, obj)
    raise s.error("expected an IRI, a variable or a quoted pattern")


def _parse_pred_pattern(s: _Stream, base: str):
    tok = s.peek()
    if tok.kind == "IRI":
        s.next()
        return resolve_iri(tok.text, base)
    if tok.kind == "VAR":
        s.next()
        return Variable(tok.text)
    if tok.kind == "WORD" and tok.text == "a":
        s.next()
        return resolve_iri("a", base)
    raise s.error("expected a predicate")


def _parse_triple_pattern(s: _Stream, base: str) -> TriplePattern:
    subject = _parse_term_pattern(s, base)
    pred = _parse_pred_pattern(s, base)
    obj = _parse_term_pattern(s, base)
    return TriplePattern(subject, pred, obj)


def _parse_cond(s: _Stream, base: str) -> FilterFormula:
    left = _parse_cond_and(s, base)
    while s.at_punct("||"):
        s.next()
        left = Or(left, _parse_cond_and(s, base))
    return left


def _parse_cond_and(s: _Stream, base: str) -> FilterFormula:
    left = _parse_cond_unary(s, base)
    while s.at_punct("&&"):
        s.next()
        left = And(left, _parse_cond_unary(s, base))
    return left


def _parse_cond_unary(s: _Stream, base: str) -> FilterFormula:
    if s.at_punct("!"):
        s.next()
        return Not(_parse_cond_unary(s, base))
    if s.at_punct("("):
        s.next()
        inner = _parse_cond(s, base)
        s.expect_punct(")")
        return inner
    if s.at_word("STATE"):
        s.next()
        s.expect_word("IS")
        return StateIs(_parse_state_keyword(s))
    if s.at_word("BOUND"):
        s.next()
        s.expect_punct("(")
        tok = s.peek()
        if tok.kind != "VAR":
            raise s.error("expected a variable")
        s.next()
        s.expect_punct(")")
        return Bound(Variable(tok.text))
    left = _parse_operand(s, base)
    s.expect_punct("=")
    right = _parse_operand(s, base)
    return Eq(left, right)


def _parse_operand(s: _Stream, base: str):
    tok = s.peek()
    if tok.kind == "VAR":
        s.next()
        return Variable(tok.text)
    if tok.kind == "IRI":
        s.next()
        return resolve_iri(tok.text, base)
    raise s.error("expected a variable or an IRI")


# ---------------------------------------------------------------------------
# Desugaring
# ---------------------------------------------------------------------------


def desugar(uq: UserQuery) -> Query:
    """Lower the surface form onto the algebra and validate scopes."""
    q = _desugar_select(uq)
    in_scope(q)  # raises IllFormedQuery on any structural violation
    return q


def _ops_for(info: bool):
    if info:
        return (FourOperator.INFO_MEET, FourOperator.INFO_JOIN,
                FourOperator.INFO_JOIN, FourOperator.INFO_MEET)
    return (FourOperator.TRUTH_MEET, FourOperator.TRUTH_JOIN,
            FourOperator.TRUTH_JOIN, FourOperator.TRUTH_MEET)


def _pos(position: tuple[int, int]) -> str:
    return f"{position[0]}:{position[1]}"


def _desugar_select(uq: UserQuery) -> Query:
    project_op = _ops_for(uq.info)[2]
    body = _desugar_body(uq.body, uq.info, uq.position)
    if uq.holders:
        expr = _holders_expression(uq.holders)
        body = Belief(expr, body)
    scope = in_scope(body)
    if uq.projection is None:
        keep = scope
    else:
        keep = frozenset(uq.projection)
        for v in sorted(keep - scope, key=lambda v: v.name):
            raise IllFormedQuery(
                f"{_pos(uq.position)}: projected variable ?{v.name} is not in scope"
            )
    return Project(project_op, keep, body)


def _holders_expression(holders: list) -> BeliefQuery:
    parts = [all_states_shorthand(h, FourOperator.INFO_JOIN) for h in holders]
    return _fold(lambda a, b: CompoundBelief(a, FourOperator.INFO_JOIN, b), parts)


def _desugar_body(items: list, info: bool, position: tuple[int, int]) -> Query:
    join_op, union_op, _, filter_op = _ops_for(info)
    acc: Optional[Query] = None
    for item in items:
        if isinstance(item, MapItem):
            if acc is None:
                raise IllFormedQuery(
                    f"{_pos(item.position)}: MAP needs a preceding pattern in its group"
                )
            acc = MapState(acc, item.cond, item.to_state, item.else_state)
            continue
        if isinstance(item, FilterItem):
            if acc is None:
                raise IllFormedQuery(
                    f"{_pos(item.position)}: FILTER needs a preceding pattern in its group"
                )
            acc = Filter(filter_op, acc, item.cond)
            continue
        if isinstance(item, TripleItem):
            q: Query = Pattern(item.pattern)
        elif isinstance(item, SubSelect):
            q = _desugar_select(item.query)
        elif isinstance(item, UnionItem):
            q = Union(
                union_op,
                _desugar_body(item.left, info, item.position),
                _desugar_body(item.right, info, item.position),
            )
        else:  # pragma: no cover - parser produces no other items
            raise IllFormedQuery(f"unknown body item {item!r}")
        acc = q if acc is None else Join(join_op, acc, q)
    if acc is None:
        raise IllFormedQuery(f"{_pos(position)}: empty WHERE group")
    return acc


def parse_and_desugar(text: str, *, base_iri: str = DEFAULT_BASE_IRI) -> Query:
    return desugar(parse_query(text, base_iri=base_iri))


# ---------------------------------------------------------------------------
# Result output
# ---------------------------------------------------------------------------


def _value_label(v) -> str:
    if isinstance(v, FourValue):
        return v.label
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _cell_text(term, base: str) -> str:
    if isinstance(term, Iri):
        return shorten_iri(term.text, base)
    return _quoted_cell(term, base)


def _quoted_cell(t: StarTriple, base: str) -> str:
    def part(term):
        if isinstance(term, Iri):
            return f"<{shorten_iri(term.text, base)}>"
        return _quoted_cell(term, base)

    return f"<< {part(t.subject)} <{shorten_iri(t.predicate.text, base)}> {part(t.object)} >>"


def serialize_relation(
    r: Relation,
    format: str = "table",
    *,
    show_default: bool = False,
    base_iri: str = DEFAULT_BASE_IRI,
) -> str:
    """Render a relation's exception rows (plus the wildcard row on request)."""
    names = sorted(v.name for v in r.vars)
    order = [Variable(name) for name in names]
    rows = r.rows()
    if format == "table":
        lines = [" | ".join(names + ["state"])]
        for m, v in rows:
            cells = [_cell_text(m.get(var), base_iri) for var in order]
            lines.append(" | ".join(cells + [_value_label(v)]))
        if show_default:
            lines.append(" | ".join(["*"] * len(order) + [_value_label(r.default)]))
        return "\n".join(lines) + "\n"
    if format == "json-lines":
        lines = []
        for m, v in rows:
            record = {name: term_text(m.get(var)) for name, var in zip(names, order)}
            record["state"] = _value_label(v)
            lines.append(json.dumps(record))
        if show_default:
            record = {name: "*" for name in names}
            record["state"] = _value_label(r.default)
            lines.append(json.dumps(record))
        return "\n".join(lines) + ("\n" if lines else "")
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(names + ["state"])
        for m, v in rows:
            writer.writerow([term_text(m.get(var)) for var in order] + [_value_label(v)])
        if show_default:
            writer.writerow(["*"] * len(order) + [_value_label(r.default)])
        return out.getvalue()
    raise ValueError(f"unknown format {format!r}")
