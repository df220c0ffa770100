"""Verification toolkit for population protocols.

Multiset configurations, protocol specifications across six interaction
models, concrete protocol constructions, model-to-model compilers, an
exhaustive finite-population verifier, and a semilinear predicate engine,
all also reachable through the ``popverify`` command.
"""

from .models import (
    EmptyInput,
    InvalidModel,
    ModelKind,
    ProtocolSpec,
    RuleSet,
    compile_rules,
    generalize_kind,
    initial_config,
    output_of,
    specialization_chain,
    validate_model,
)
from .multiset import EMPTY, Multiset, NotIncluded
from .protocols import (
    AlphabetMismatch,
    KindMismatch,
    ModuloParams,
    RangeTooSmall,
    SetUnionProtocol,
    SimpleThresholdParams,
    ThresholdParams,
    as_delayed_observation,
    avg_active_value,
    build_delayed_observation_presence,
    build_delayed_transmission,
    build_modulo,
    build_set_union,
    build_simple_threshold,
    build_threshold_avg,
    detect,
    product,
)
from .semilinear import (
    And,
    Const,
    LinearSet,
    Member,
    Modulo,
    Not,
    Or,
    PredicateExpr,
    PredicateParseError,
    SemilinearSet,
    Threshold,
    brute_equivalent,
    count_k_eval,
    dot,
    evaluate,
    k_rich,
    member,
    member_linear,
    parse_predicate,
    simple_threshold,
)
from .transforms import (
    SimulationCertificate,
    io_add_mirrors,
    io_remove_mirrors,
    token_count,
    two_way_to_queued,
    two_way_to_queued_tokens,
)
from .verifier import (
    BudgetExceeded,
    ReachabilityGraph,
    StabilityOracle,
    Trace,
    UnstableAnalysis,
    Verdict,
    VerificationReport,
    Witness,
    enumerate_configs,
    enumerate_inputs,
    explore,
    fair_run,
    label_stability,
    local_fair_run,
    minimal_unstable,
    sweep,
    verdict,
)

__version__ = "0.1.0"
