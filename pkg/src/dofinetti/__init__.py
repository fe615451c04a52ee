"""Causal effect estimation for exchangeable, multi-environment data."""

from .core import (
    BIVARIATE_GRAPHS,
    Dag,
    DimensionMismatch,
    ExchangeableDataset,
    InterventionSet,
    JointTable,
    Query,
    ZeroMassContext,
    ZeroMassWarning,
    condition,
    marginalize,
    product,
)
from .discover import (
    CiTestResult,
    InsufficientData,
    ci_test,
    discover_bivariate,
    discover_bivariate_iid_baseline,
)
from .estimate import (
    ConditioningInconsistent,
    InconsistentInterventionPattern,
    answer_query,
    fit_joint,
    iid_truncated_factorization,
    parent_adjustment,
    truncated_factorization,
)
from .harness import METHODS, ExperimentConfig, SweepResult, TrialRecord, run_sweep, run_trial
from .oracle import (
    analytic_block_table,
    analytic_post_interventional,
    marginal_likelihood,
    quadrature_block_table,
)
from .simulate import (
    BetaPrior,
    UrnState,
    UrnTrace,
    polya_joint_log_prob,
    polya_urn_run,
    polya_urn_sample,
    sample_icm_bivariate,
    sample_icm_general,
)

__version__ = "0.1.0"
