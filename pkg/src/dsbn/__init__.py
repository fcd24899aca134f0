"""Belief-function networks: evidence calculus, independence tests, and
structure learning over partially oriented graphs."""

from .errors import (
    CombinationError,
    ConditioningError,
    DegenerateTestError,
    DsbnError,
    EvidenceError,
    GraphError,
    InversionError,
    NetworkError,
    SamplingError,
    ScopeError,
    TestUndefinedError,
)
from .evidence import (
    FunctionView,
    MassAssignment,
    simple_support,
    validate,
)
from .frame import ConfigSet, Domain, Scope, intersection_closure
from .graphs import (
    Dag,
    Pog,
    classify_adjacent_edges,
    d_separated,
    find_active_trail,
    p_descendants,
    pd_separated,
    remove_outgoing,
)
from .independence import (
    AuditRecord,
    CompressionOutcome,
    DsepOracle,
    ExactOracle,
    IndependenceOracle,
    RelationOracle,
    StatOracle,
    TestOutcome,
    chi2_conditional,
    chi2_critical,
    chi2_marginal,
    compressibility_index,
    exact_conditional_test,
    exact_marginal_test,
)
from .learner import (
    ColliderLog,
    Failure,
    LearnResult,
    Skeleton,
    build_skeleton,
    close_orientations,
    detect_failure,
    enumerate_dags,
    learn,
    orient_colliders,
    propagate,
)
from .network import Dataset, DsNetwork, example_network

__version__ = "0.1.0"

__all__ = [
    "AuditRecord",
    "ColliderLog",
    "CombinationError",
    "CompressionOutcome",
    "ConditioningError",
    "ConfigSet",
    "Dag",
    "Dataset",
    "DegenerateTestError",
    "DsbnError",
    "DsepOracle",
    "DsNetwork",
    "Domain",
    "EvidenceError",
    "ExactOracle",
    "Failure",
    "FunctionView",
    "GraphError",
    "IndependenceOracle",
    "InversionError",
    "LearnResult",
    "MassAssignment",
    "NetworkError",
    "Pog",
    "RelationOracle",
    "SamplingError",
    "Scope",
    "ScopeError",
    "Skeleton",
    "StatOracle",
    "TestOutcome",
    "TestUndefinedError",
    "build_skeleton",
    "chi2_conditional",
    "chi2_critical",
    "chi2_marginal",
    "classify_adjacent_edges",
    "close_orientations",
    "compressibility_index",
    "d_separated",
    "detect_failure",
    "enumerate_dags",
    "exact_conditional_test",
    "exact_marginal_test",
    "example_network",
    "find_active_trail",
    "intersection_closure",
    "learn",
    "orient_colliders",
    "p_descendants",
    "pd_separated",
    "propagate",
    "remove_outgoing",
    "simple_support",
    "validate",
]
