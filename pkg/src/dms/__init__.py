"""Multiplicity schemas for unordered XML: validation and static analysis.

The package models document content as multisets of child labels and
schemas as mappings from labels to disjunctive multiplicity expressions.
It provides streaming validation, schema-level decision procedures
(satisfiability, universality, containment with counterexamples),
twig-query reasoning relative to a schema, a disjunction-free DTD
front-end, and a brute-force oracle for cross-checking all of the above
on bounded universes.
"""

from .analysis import (
    DependencyGraph,
    NotDisjunctionFreeError,
    PruneResult,
    UnfoldingInfiniteError,
    add_subtree,
    characteristic_graphs,
    containment_counterexample,
    dependency_graph,
    fuse_all,
    fuse_forced,
    fuse_siblings,
    implication_counterexample,
    prune,
    query_contained,
    query_implied,
    query_satisfiable,
    simulate,
    unfold,
    witness_tree,
)
from .core import (
    EMPTY_WORD,
    Alphabet,
    DmsError,
    MalformedStreamError,
    Multiplicity,
    TreeEvent,
    TreeNode,
    UnknownNodeError,
    UnknownSymbolError,
    UnorderedTree,
    UnorderedWord,
    canonical_form,
    children_word,
    close_event,
    events_to_tree,
    format_tree,
    iter_nodes,
    open_event,
    parse_tree,
    tree,
    tree_height,
    tree_size,
    tree_to_events,
    trees_isomorphic,
    word_concat,
)
from .dtd import (
    DFDtd,
    DtdUnsatisfiableError,
    RegexSyntaxError,
    commutative_matches,
    dtd_containment_counterexample,
    dtd_dependency_graphs,
    dtd_implication_counterexample,
    dtd_query_contained,
    dtd_query_implied,
    dtd_query_satisfiable,
    dtd_tree_satisfies,
    dtd_unfold,
    dtd_unsatisfiable_labels,
    existential_set,
    format_regex,
    make_dfdtd,
    minnb,
    parse_dfdtd,
    parse_dfregex,
    parse_regex,
    universal_set,
)
from .expressions import (
    CharTriple,
    DisjunctiveExpression,
    ExpressionSyntaxError,
    Factor,
    build_expression,
    compute_triple,
    conflicting_pairs,
    epsilon_expression,
    expression_contains,
    expression_equivalent,
    format_expression,
    is_normal_form,
    normalize,
    parse_expression,
    separating_word,
    triple_membership_tests,
    word_matches,
)
from .graphs import (
    RootedGraph,
    shape_key,
)
from .oracle import (
    DEFAULT_BOUNDS,
    ORACLE_PROBLEMS,
    EnumerationBounds,
    OracleVerdict,
    enumerate_trees,
    enumerate_words,
    naive_word_matches,
    oracle_decide,
    schema_members,
)
from .queries import (
    QueryNode,
    QuerySyntaxError,
    TwigQuery,
    count_embeddings,
    embed_in_graph,
    embed_in_tree,
    enumerate_embeddings,
    format_query,
    parse_query,
    query_nodes,
    query_size,
    tree_as_query,
)
from .schema import (
    Schema,
    SchemaSyntaxError,
    find_containment_counterexample,
    format_schema,
    make_schema,
    minimal_member,
    parse_schema,
    schema_contains,
    schema_satisfiable,
    schema_universal,
    tree_satisfies,
)
from .streaming import (
    SchemaEncoding,
    ValidatorState,
    Verdict,
    encode_schema,
    new_validator,
    validate_stream,
)
from .xmlio import (
    XmlSyntaxError,
    events_from_xml,
    scan_xml,
    tree_to_xml,
)

__all__ = [
    "Alphabet",
    "CharTriple",
    "DEFAULT_BOUNDS",
    "DFDtd",
    "DependencyGraph",
    "DisjunctiveExpression",
    "DmsError",
    "DtdUnsatisfiableError",
    "EMPTY_WORD",
    "EnumerationBounds",
    "ExpressionSyntaxError",
    "Factor",
    "MalformedStreamError",
    "Multiplicity",
    "NotDisjunctionFreeError",
    "ORACLE_PROBLEMS",
    "OracleVerdict",
    "PruneResult",
    "QueryNode",
    "QuerySyntaxError",
    "RegexSyntaxError",
    "RootedGraph",
    "Schema",
    "SchemaEncoding",
    "SchemaSyntaxError",
    "TreeEvent",
    "TreeNode",
    "TwigQuery",
    "UnfoldingInfiniteError",
    "UnknownNodeError",
    "UnknownSymbolError",
    "UnorderedTree",
    "UnorderedWord",
    "ValidatorState",
    "Verdict",
    "XmlSyntaxError",
    "add_subtree",
    "build_expression",
    "canonical_form",
    "characteristic_graphs",
    "children_word",
    "close_event",
    "commutative_matches",
    "compute_triple",
    "conflicting_pairs",
    "containment_counterexample",
    "count_embeddings",
    "dependency_graph",
    "dtd_containment_counterexample",
    "dtd_dependency_graphs",
    "dtd_implication_counterexample",
    "dtd_query_contained",
    "dtd_query_implied",
    "dtd_query_satisfiable",
    "dtd_tree_satisfies",
    "dtd_unfold",
    "dtd_unsatisfiable_labels",
    "embed_in_graph",
    "embed_in_tree",
    "encode_schema",
    "enumerate_embeddings",
    "enumerate_trees",
    "enumerate_words",
    "epsilon_expression",
    "events_from_xml",
    "events_to_tree",
    "existential_set",
    "expression_contains",
    "expression_equivalent",
    "find_containment_counterexample",
    "format_expression",
    "format_query",
    "format_regex",
    "format_schema",
    "format_tree",
    "fuse_all",
    "fuse_forced",
    "fuse_siblings",
    "implication_counterexample",
    "is_normal_form",
    "iter_nodes",
    "make_dfdtd",
    "make_schema",
    "minimal_member",
    "minnb",
    "naive_word_matches",
    "new_validator",
    "normalize",
    "open_event",
    "oracle_decide",
    "parse_dfdtd",
    "parse_dfregex",
    "parse_expression",
    "parse_query",
    "parse_regex",
    "parse_schema",
    "parse_tree",
    "prune",
    "query_contained",
    "query_implied",
    "query_nodes",
    "query_satisfiable",
    "query_size",
    "scan_xml",
    "schema_contains",
    "schema_members",
    "schema_satisfiable",
    "schema_universal",
    "separating_word",
    "shape_key",
    "simulate",
    "tree",
    "tree_as_query",
    "tree_height",
    "tree_satisfies",
    "tree_size",
    "tree_to_events",
    "tree_to_xml",
    "trees_isomorphic",
    "triple_membership_tests",
    "unfold",
    "universal_set",
    "validate_stream",
    "witness_tree",
    "word_concat",
    "word_matches",
]
