"""Shared fixtures: the running-example graph and its named triples."""

import pytest

from esparql import (
    DEFAULT_BASE_IRI,
    DEFAULT_VOCABULARY,
    FourGraph,
    FourValue,
    Iri,
    StarTriple,
)

VOCAB = DEFAULT_VOCABULARY


def data(name: str) -> Iri:
    return Iri(DEFAULT_BASE_IRI + name)


JESUS = data("Jesus")
ZEUS = data("Zeus")
POPE = data("PopeDI")
ARIUS = data("Arius")
CHRISTIANITY = data("Christianity")
RUSSELL = data("Russell")
FULL_DEITY = data("FullDeity")
CHRISTIAN = data("Christian")
A = data("a")

# the two quoted claims everyone argues about
JESUS_DEITY = StarTriple(JESUS, A, FULL_DEITY)
ZEUS_DEITY = StarTriple(ZEUS, A, FULL_DEITY)

# the pope's two stated beliefs (the second only ever appears quoted)
POPE_AFFIRMS = StarTriple(POPE, VOCAB.to_be_true, JESUS_DEITY)
POPE_DENIES = StarTriple(POPE, VOCAB.to_be_false, ZEUS_DEITY)

ASSERTED = (
    POPE_AFFIRMS,
    StarTriple(ARIUS, VOCAB.to_be_false, JESUS_DEITY),
    StarTriple(CHRISTIANITY, VOCAB.to_be_conflicted, JESUS_DEITY),
    StarTriple(RUSSELL, VOCAB.to_be_unknown, JESUS_DEITY),
    StarTriple(RUSSELL, VOCAB.to_be_true, POPE_AFFIRMS),
    StarTriple(RUSSELL, VOCAB.to_be_true, POPE_DENIES),
    StarTriple(POPE, A, CHRISTIAN),
    StarTriple(ARIUS, A, CHRISTIAN),
)


def example_graph() -> FourGraph:
    return FourGraph(FourValue.UNKNOWN, {t: FourValue.TRUE for t in ASSERTED})


@pytest.fixture
def g1() -> FourGraph:
    return example_graph()
