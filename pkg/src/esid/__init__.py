"""Numerical bounds and toy codes for stealthy secret identification over wiretap channels."""
__version__ = "0.1.0"

from .analysis import check_degraded, check_more_capable
from .bounds import (
    BoundResult,
    OptimizerConfig,
    StealthConstraint,
    all_bounds,
    est_upper_bound,
    lower_bound_cor1,
    lower_bound_prop1,
    secret_id_rate,
    stealth_polytope_membership,
    upper_bound_thm1,
    zero_capacity_check,
)
from .errors import (
    AlphabetTooLarge,
    AlphaOutOfRange,
    CapExceeded,
    DimensionMismatch,
    EsidError,
    InfeasibleStealth,
    NegativeMass,
    NoAdmissibleGamma,
    OutOfRange,
    SupportViolation,
    ValidationError,
    ZeroMass,
)
from .example import RevDegradedScenario, analytic_report, fig2_sweep, numeric_cross_check
from .idsim import (
    IdCode,
    Lemma1Params,
    build_toy_esid_code,
    evaluate_id_code,
    lemma1_dalpha_bound,
    lemma1_mutinf_bound,
    single_letter_stealth_check,
    stealth_of_code,
)
from .measures import (
    LogBase,
    binary_entropy,
    conditional_kl,
    d_alpha,
    entropy,
    kl,
    mutual_information,
)
from .probability import (
    Alphabet,
    Channel,
    Distribution,
    JointDistribution,
    WiretapChannel,
    bec,
    bsc,
    compose,
    extend,
    make_distribution,
    product,
    push_forward,
)


__all__ = [
    "__version__",
    "BoundResult",
    "OptimizerConfig",
    "StealthConstraint",
    "all_bounds",
    "est_upper_bound",
    "lower_bound_cor1",
    "lower_bound_prop1",
    "secret_id_rate",
    "stealth_polytope_membership",
    "upper_bound_thm1",
    "zero_capacity_check",
    "AlphabetTooLarge",
    "AlphaOutOfRange",
    "CapExceeded",
    "DimensionMismatch",
    "EsidError",
    "InfeasibleStealth",
    "NegativeMass",
    "NoAdmissibleGamma",
    "OutOfRange",
    "SupportViolation",
    "ValidationError",
    "ZeroMass",
    "IdCode",
    "Lemma1Params",
    "build_toy_esid_code",
    "evaluate_id_code",
    "lemma1_dalpha_bound",
    "lemma1_mutinf_bound",
    "single_letter_stealth_check",
    "stealth_of_code",
    "LogBase",
    "binary_entropy",
    "conditional_kl",
    "d_alpha",
    "entropy",
    "kl",
    "mutual_information",
    "Alphabet",
    "Channel",
    "Distribution",
    "JointDistribution",
    "WiretapChannel",
    "bec",
    "bsc",
    "compose",
    "extend",
    "make_distribution",
    "product",
    "push_forward",
    "check_degraded",
    "check_more_capable",
    "RevDegradedScenario",
    "analytic_report",
    "fig2_sweep",
    "numeric_cross_check",
]
