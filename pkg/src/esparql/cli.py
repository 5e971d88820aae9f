"""Command line front end.

Exit codes: 0 success, 1 differential disagreement, 2 syntax errors,
3 ill-formed queries, 4 results without finite support, 5 resource limits.
"""

from __future__ import annotations

import random
import sys

import click

from .algebra import DEFAULT_CAP, EvalMode, evaluate
from .errors import (
    DuplicateTriple,
    IllFormedQuery,
    NonFinitelySupported,
    NonIriHolder,
    ParseError,
    UnboundBeliefVariable,
    UniverseTooLarge,
)
from .four import FourValue
from .model import (
    DEFAULT_BASE_IRI,
    DEFAULT_VOCAB_NAMESPACE,
    BeliefVocabulary,
    FourGraph,
    term_text,
)
from .oracle import DEFAULT_ORACLE_CAP, diff as diff_relations, oracle_eval
from .parser import desugar, parse_graph, parse_query, serialize_relation
from . import randgen

_SYNTAX_ERRORS = (ParseError, DuplicateTriple)
_FORM_ERRORS = (IllFormedQuery, UnboundBeliefVariable, NonIriHolder)


def _fail(code: int, err: Exception) -> None:
    click.echo(f"error: {err}", err=True)
    sys.exit(code)


def _guarded(action):
    try:
        return action()
    except _SYNTAX_ERRORS as e:
        _fail(2, e)
    except _FORM_ERRORS as e:
        _fail(3, e)
    except NonFinitelySupported as e:
        _fail(4, e)
    except UniverseTooLarge as e:
        _fail(5, e)


def _load_graph(path: str, base_iri: str) -> FourGraph:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_graph(handle.read(), base_iri=base_iri)


def _query_text(query_path, inline) -> str:
    if (query_path is None) == (inline is None):
        raise click.UsageError("provide exactly one of --query and --eval")
    if inline is not None:
        return inline
    with open(query_path, "r", encoding="utf-8") as handle:
        return handle.read()


_mode_option = click.option(
    "--mode",
    type=click.Choice(["active-domain", "open"]),
    default="active-domain",
    show_default=True,
    help="Evaluation mode.",
)
_format_option = click.option(
    "--format", "fmt",
    type=click.Choice(["table", "json-lines", "csv"]),
    default="table",
    show_default=True,
    help="Result serialization.",
)
_base_option = click.option(
    "--base-iri", default=DEFAULT_BASE_IRI, show_default=True,
    help="Base for resolving bare names.",
)
_vocab_option = click.option(
    "--vocab-ns", envvar="ESPARQL_VOCAB_NS", default=DEFAULT_VOCAB_NAMESPACE,
    show_default=True, help="Namespace of the belief predicates.",
)


@click.group()
def main() -> None:
    """Epistemic queries over four-valued RDF-star graphs."""


@main.command("query")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--query", "query_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--eval", "inline", default=None, help="Inline query text.")
@_mode_option
@_format_option
@click.option("--show-default", is_flag=True, help="Append the wildcard row.")
@_base_option
@_vocab_option
@click.option("--cap", type=int, default=DEFAULT_CAP, show_default=True,
              help="Largest allowed enumeration size.")
def cmd_query(graph_path, query_path, inline, mode, fmt, show_default,
              base_iri, vocab_ns, cap) -> None:
    """Evaluate a query over a graph file."""
    text = _query_text(query_path, inline)

    def run():
        g = _load_graph(graph_path, base_iri)
        q = desugar(parse_query(text, base_iri=base_iri))
        vocab = BeliefVocabulary.from_namespace(vocab_ns)
        r = evaluate(q, g, vocab=vocab, mode=EvalMode(mode), cap=cap)
        click.echo(
            serialize_relation(r, fmt, show_default=show_default, base_iri=base_iri),
            nl=False,
        )

    _guarded(run)


@main.command("check")
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--query", "query_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--eval", "inline", default=None, help="Inline query text.")
@_base_option
def cmd_check(graph_path, query_path, inline, base_iri) -> None:
    """Validate a graph file and/or a query without evaluating."""
    if graph_path is None and query_path is None and inline is None:
        raise click.UsageError("nothing to check; provide --graph and/or --query/--eval")

    def run():
        if graph_path is not None:
            g = _load_graph(graph_path, base_iri)
            click.echo(
                f"graph {graph_path}: ok "
                f"({len(g.exceptions)} exceptions, default {g.default.label})"
            )
        if query_path is not None or inline is not None:
            text = inline
            label = "query <inline>"
            if query_path is not None:
                with open(query_path, "r", encoding="utf-8") as handle:
                    text = handle.read()
                label = f"query {query_path}"
            q = desugar(parse_query(text, base_iri=base_iri))
            from .algebra import in_scope

            names = ", ".join(sorted("?" + v.name for v in in_scope(q))) or "(none)"
            click.echo(f"{label}: ok (in scope: {names})")

    _guarded(run)


@main.command("diff")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cases", type=int, default=100, show_default=True)
@click.option("--cap", type=int, default=DEFAULT_ORACLE_CAP, show_default=True)
@_vocab_option
def cmd_diff(seed, cases, cap, vocab_ns) -> None:
    """Run seeded random cases through the engine and the brute-force oracle."""
    vocab = BeliefVocabulary.from_namespace(vocab_ns)
    rng = random.Random(seed)
    checked = 0
    skipped = 0
    for index in range(cases):
        g = randgen.random_graph(rng, vocab=vocab)
        q = randgen.random_query(rng, vocab=vocab)
        try:
            engine = evaluate(q, g, vocab=vocab, mode=EvalMode.ACTIVE_DOMAIN, cap=cap)
            reference = oracle_eval(q, g, vocab=vocab, cap=cap)
        except UniverseTooLarge:
            skipped += 1
            click.echo(f"case {index}: skipped (universe too large)")
            continue
        disagreements = diff_relations(engine, reference)
        if disagreements:
            m, got, want = disagreements[0]
            where = ", ".join(f"?{v.name}={term_text(t)}" for v, t in m.bindings)
            click.echo(f"case {index}: disagreement at {{{where}}}: "
                       f"engine={got.label} oracle={want.label}")
            sys.exit(1)
        checked += 1
    click.echo(f"{checked} cases agree, {skipped} skipped")


@main.command("repl")
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False))
@_mode_option
@_format_option
@click.option("--show-default", is_flag=True)
@_base_option
@_vocab_option
@click.option("--cap", type=int, default=DEFAULT_CAP, show_default=True)
def cmd_repl(graph_path, mode, fmt, show_default, base_iri, vocab_ns, cap) -> None:
    """Interactive session: queries end with a blank line, ':quit' leaves."""
    state = {
        "graph": FourGraph(FourValue.UNKNOWN),
        "mode": EvalMode(mode),
        "format": fmt,
    }
    vocab = BeliefVocabulary.from_namespace(vocab_ns)
    if graph_path is not None:
        state["graph"] = _load_graph(graph_path, base_iri)
        click.echo(f"loaded {graph_path}")
    interactive = sys.stdin.isatty()

    def run_query(text: str) -> None:
        try:
            q = desugar(parse_query(text, base_iri=base_iri))
            r = evaluate(q, state["graph"], vocab=vocab, mode=state["mode"], cap=cap)
        except (
            *_SYNTAX_ERRORS, *_FORM_ERRORS, NonFinitelySupported, UniverseTooLarge
        ) as e:
            click.echo(f"error: {e}")
            return
        click.echo(
            serialize_relation(r, state["format"], show_default=show_default,
                               base_iri=base_iri),
            nl=False,
        )

    def directive(line: str) -> bool:
        parts = line.split(None, 1)
        name = parts[0]
        arg = parts[1].strip() if len(parts) > 1 else None
        if name == ":quit":
            return False
        if name == ":load":
            if not arg:
                click.echo("usage: :load <path>")
                return True
            try:
                state["graph"] = _load_graph(arg, base_iri)
                click.echo(f"loaded {arg}")
            except OSError as e:
                click.echo(f"error: {e}")
            except _SYNTAX_ERRORS as e:
                click.echo(f"error: {e}")
            return True
        if name == ":mode":
            if arg is None:
                click.echo(state["mode"].value)
            elif arg in ("active-domain", "open"):
                state["mode"] = EvalMode(arg)
            else:
                click.echo("modes: active-domain, open")
            return True
        if name == ":format":
            if arg is None:
                click.echo(state["format"])
            elif arg in ("table", "json-lines", "csv"):
                state["format"] = arg
            else:
                click.echo("formats: table, json-lines, csv")
            return True
        click.echo(f"unknown directive {name}")
        return True

    buffer: list[str] = []
    while True:
        try:
            line = input("esparql> " if interactive and not buffer else
                         ("......> " if interactive else ""))
        except EOFError:
            break
        stripped = line.strip()
        if not buffer and stripped.startswith(":"):
            if not directive(stripped):
                return
            continue
        if stripped == "":
            if buffer:
                run_query("\n".join(buffer))
                buffer = []
            continue
        buffer.append(line)
    if buffer:
        run_query("\n".join(buffer))
