"""eSPARQL: epistemic queries over four-valued annotated RDF-star graphs."""

from .four import (
    FourValue,
    FourOperator,
    STATES,
    MEET_OPERATORS,
    JOIN_OPERATORS,
    leq_truth,
    leq_info,
    apply,
    identity_of,
    absorbing_of,
    reduce,
    Semiring,
    FOUR_TRUTH,
    FOUR_INFO,
    BOOLEAN,
    COUNTING,
    SEMIRINGS,
)
from .model import (
    DEFAULT_BASE_IRI,
    DEFAULT_VOCAB_NAMESPACE,
    DEFAULT_VOCABULARY,
    BeliefVocabulary,
    FourGraph,
    Iri,
    StarTriple,
    TriplePattern,
    Variable,
    active_domain,
    match,
    pattern_variables,
    substitute,
    term_text,
)
from .belief import (
    AtomicBelief,
    CompoundBelief,
    BeliefQuery,
    all_states_shorthand,
    belief_variables,
    extract,
    instantiate,
    is_ground,
)
from .algebra import (
    And,
    Belief,
    Bound,
    DEFAULT_CAP,
    Eq,
    EvalMode,
    Filter,
    FilterFormula,
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
    evaluate,
    evaluate_k,
    in_scope,
    mappings_over,
)
from .parser import (
    UserQuery,
    desugar,
    parse_and_desugar,
    parse_graph,
    parse_query,
    render_graph,
    serialize_relation,
)
from .oracle import DenseRelation, diff, oracle_eval
from .errors import (
    DuplicateTriple,
    EsparqlError,
    IllFormedQuery,
    NonFiniteBeliefExtraction,
    NonFinitelySupported,
    NonIriHolder,
    ParseError,
    ShapeMismatch,
    UnboundBeliefVariable,
    UniverseTooLarge,
)

__version__ = "0.1.0"

__all__ = [
    "FourValue", "FourOperator", "STATES", "MEET_OPERATORS", "JOIN_OPERATORS",
    "leq_truth", "leq_info", "apply", "identity_of", "absorbing_of", "reduce",
    "Semiring", "FOUR_TRUTH", "FOUR_INFO", "BOOLEAN", "COUNTING", "SEMIRINGS",
    "DEFAULT_BASE_IRI", "DEFAULT_VOCAB_NAMESPACE", "DEFAULT_VOCABULARY",
    "BeliefVocabulary", "FourGraph", "Iri", "StarTriple", "TriplePattern",
    "Variable", "active_domain", "match",
    "pattern_variables", "substitute", "term_text",
    "AtomicBelief", "CompoundBelief", "BeliefQuery", "all_states_shorthand",
    "belief_variables", "extract", "instantiate", "is_ground",
    "And", "Belief", "Bound", "DEFAULT_CAP", "Eq", "EvalMode", "Filter",
    "FilterFormula", "Join", "MapState", "Mapping", "Not", "Or", "Pattern",
    "Project", "Query", "Relation", "StateIs", "Union", "evaluate",
    "evaluate_k", "in_scope", "mappings_over",
    "UserQuery", "desugar", "parse_and_desugar", "parse_graph", "parse_query",
    "render_graph", "serialize_relation",
    "DenseRelation", "diff", "oracle_eval",
    "DuplicateTriple", "EsparqlError", "IllFormedQuery",
    "NonFiniteBeliefExtraction", "NonFinitelySupported", "NonIriHolder",
    "ParseError", "ShapeMismatch", "UnboundBeliefVariable", "UniverseTooLarge",
]
