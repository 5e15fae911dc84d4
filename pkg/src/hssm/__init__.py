"""Hierarchical species sampling models.

Exact and asymptotic prior laws of cluster counts, a forward franchise
simulator, and a marginal Gibbs sampler for conjugate Gaussian mixtures, for
hierarchies built from Pitman-Yor, Gnedin and mixture-of-finite-mixture
partition families.
"""

from .cluster_counts import (
    BaseMeasure,
    GroupSizes,
    HssmSpec,
    cluster_moment,
    hdp,
    hdpyp,
    hgdp,
    hgp,
    hgpyp,
    hpydp,
    hpyp,
    marginal_cluster_pmf,
    peppf_log,
    spike_slab_adjust,
    spike_slab_distinct_pmf,
    total_cluster_pmf,
)
from .errors import (
    ConfigError,
    NumericalError,
    ParamError,
    SizeError,
    TruncationWarning,
)
from .franchise import CrfState, empirical_cluster_pmf, new_state, seat_next, simulate
from .gibbs import Dataset, GibbsTrace, NigHyper, predictive_density, run_chain
from .logpmf import LogPmf
from .partitions import (
    BlockSizes,
    EppfSpec,
    PartitionState,
    block_count_pmf,
    enumerate_partitions,
    eppf_log,
    gen_stirling_log,
    gnedin_rho,
    pred_weights,
    sample_partition,
    validate,
    vnk_log,
)

__version__ = "0.1.0"

__all__ = [
    "BaseMeasure", "BlockSizes", "ConfigError", "CrfState", "Dataset",
    "EppfSpec", "GibbsTrace", "GroupSizes", "HssmSpec", "LogPmf",
    "NigHyper", "NumericalError", "ParamError", "PartitionState",
    "SizeError", "TruncationWarning", "block_count_pmf", "cluster_moment",
    "empirical_cluster_pmf", "enumerate_partitions", "eppf_log",
    "gen_stirling_log", "gnedin_rho", "hdp", "hdpyp", "hgdp", "hgp",
    "hgpyp", "hpydp", "hpyp", "marginal_cluster_pmf", "new_state",
    "peppf_log", "pred_weights", "predictive_density", "run_chain",
    "sample_partition", "seat_next", "simulate", "spike_slab_adjust",
    "spike_slab_distinct_pmf", "total_cluster_pmf", "validate", "vnk_log",
]
