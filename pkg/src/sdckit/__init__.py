"""sdckit: statistical disclosure control with empirical teeth.

Syntactic anonymization (k-anonymity and its probabilistic, diversity, and
closeness refinements), differentially private mechanisms with budget
accounting, and an attack harness that measures what each release actually
leaks.
"""

from .accounting import BudgetLedger, CompositionReport, LedgerEntry
from .attacks import (
    AttackReport,
    attribute_inference_attack,
    downcoding_attack,
    intersection_attack,
    link_records,
    linkage_attack,
    membership_inference_attack,
    wilson_interval,
)
from .confmodels import (
    CATEGORICAL_UNIFORM,
    ORDERED_NUMERIC,
    Distribution,
    GroundDistance,
    closeness_to_dp_epsilon,
    emd,
    emd_transport,
    enforce_models,
    l_diversity,
    similarity_alert,
    verify_t_closeness,
)
from .dp import (
    DpCheckResult,
    Predicate,
    Query,
    answer_query,
    dp_microdata_release,
    empirical_dp_check,
    global_sensitivity,
    individual_dp_sensitivity,
    laplace_mechanism,
    laplace_noise,
    laplace_query_mechanism,
    metric_dp_mechanism,
    neighbor_relation,
    perfect_secrecy_mechanism,
    perfect_secrecy_query_mechanism,
    rdp_to_dp,
    zcdp_to_dp,
)
from .errors import (
    DomainViolation,
    EmptyClass,
    GroupTooSmall,
    HierarchyMissing,
    Infeasible,
    InvalidAlpha,
    InvalidDelta,
    InvalidRho,
    InvalidT,
    LevelOutOfRange,
    MalformedCsv,
    Misaligned,
    MissingColumn,
    MissingPartition,
    NoSharedQIs,
    NonNumeric,
    NonPositiveEpsilon,
    NotMinimalMechanism,
    NotNeighbors,
    SdcError,
    SearchSpaceTooLarge,
    SupportMismatch,
    TooFewRows,
    UnboundedDomain,
    UnknownAttribute,
    UnknownValue,
    Unsatisfiable,
)
from .kanon import (
    GeneralizationScheme,
    anonymize_generalization,
    mdav_microaggregate,
    mdav_partition,
    microaggregate_partition,
    minimal_generalization,
    sse,
    verify_k_anonymity,
)
from .microdata import (
    AnonymizedRelease,
    AttributeSchema,
    CategoricalKind,
    GeneralizationHierarchy,
    MicrodataTable,
    NumericKind,
    Provenance,
    canonical_partition,
    generalize_value,
    hierarchy_from_json,
    hierarchy_to_json,
    load_hierarchies,
    load_table,
    make_table,
    read_release,
    schema_from_descriptor,
    schema_to_descriptor,
    serialize_table,
    suppress_identifiers,
    write_release,
)
from .probkanon import (
    AnatomyRelease,
    ProbabilisticKReport,
    anatomize,
    cluster_and_permute,
    verify_probabilistic_k,
)
from .reporting import RunConfig, UtilityReport, run, sweep, utility_report
from .seeds import derive_rng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "AnatomyRelease",
    "AnonymizedRelease",
    "AttackReport",
    "AttributeSchema",
    "BudgetLedger",
    "CATEGORICAL_UNIFORM",
    "CategoricalKind",
    "CompositionReport",
    "Distribution",
    "DomainViolation",
    "DpCheckResult",
    "EmptyClass",
    "GeneralizationHierarchy",
    "GeneralizationScheme",
    "GroundDistance",
    "GroupTooSmall",
    "HierarchyMissing",
    "Infeasible",
    "InvalidAlpha",
    "InvalidDelta",
    "InvalidRho",
    "InvalidT",
    "LedgerEntry",
    "LevelOutOfRange",
    "MalformedCsv",
    "Misaligned",
    "MicrodataTable",
    "MissingColumn",
    "MissingPartition",
    "NoSharedQIs",
    "NonNumeric",
    "NonPositiveEpsilon",
    "NotMinimalMechanism",
    "NotNeighbors",
    "NumericKind",
    "ORDERED_NUMERIC",
    "Predicate",
    "ProbabilisticKReport",
    "Provenance",
    "Query",
    "RunConfig",
    "SdcError",
    "SearchSpaceTooLarge",
    "SupportMismatch",
    "TooFewRows",
    "UnboundedDomain",
    "UnknownAttribute",
    "UnknownValue",
    "Unsatisfiable",
    "UtilityReport",
    "anonymize_generalization",
    "answer_query",
    "attribute_inference_attack",
    "canonical_partition",
    "closeness_to_dp_epsilon",
    "cluster_and_permute",
    "anatomize",
    "derive_rng",
    "derive_seed",
    "downcoding_attack",
    "dp_microdata_release",
    "emd",
    "emd_transport",
    "empirical_dp_check",
    "enforce_models",
    "generalize_value",
    "global_sensitivity",
    "hierarchy_from_json",
    "hierarchy_to_json",
    "individual_dp_sensitivity",
    "intersection_attack",
    "l_diversity",
    "laplace_mechanism",
    "laplace_noise",
    "laplace_query_mechanism",
    "link_records",
    "linkage_attack",
    "load_hierarchies",
    "load_table",
    "make_table",
    "mdav_microaggregate",
    "mdav_partition",
    "membership_inference_attack",
    "metric_dp_mechanism",
    "microaggregate_partition",
    "minimal_generalization",
    "neighbor_relation",
    "perfect_secrecy_mechanism",
    "perfect_secrecy_query_mechanism",
    "rdp_to_dp",
    "read_release",
    "run",
    "schema_from_descriptor",
    "schema_to_descriptor",
    "serialize_table",
    "similarity_alert",
    "sse",
    "suppress_identifiers",
    "sweep",
    "utility_report",
    "verify_k_anonymity",
    "verify_probabilistic_k",
    "verify_t_closeness",
    "wilson_interval",
    "write_release",
    "zcdp_to_dp",
]
