"""Exact analysis and simulation of Dual Next-Fit online bin covering."""

__version__ = "0.1.0"

from .core import (
    CapExceeded,
    DiscreteDistribution,
    DnfCoverError,
    ItemList,
    PackingConfiguration,
    ValidationError,
    family_fmk,
    family_pp1,
    family_pptwo,
    family_uniform_discrete,
    induced_distribution,
    realizing_list,
    sample_iid,
)
from .dnf import CLOSED, DnfRun, dnf, dnf_run, stopping_time_sample, waste
from .kernels import BACKEND
from .markov import (
    BinLevelChain,
    ChainAnalysis,
    aecr_exact,
    analyze,
    build_chain,
    expected_items_per_bin,
    expected_overshoot,
    period,
    stationary,
)
from .offline import (
    degree,
    enumerate_perfect_configs,
    gamma_rate,
    is_perfect_packing,
    opt_exact,
    perfect_shrink,
)
from .rng import DEFAULT_SEED, RandomSeed

__all__ = [
    "BACKEND",
    "BinLevelChain",
    "CLOSED",
    "CapExceeded",
    "ChainAnalysis",
    "DEFAULT_SEED",
    "DiscreteDistribution",
    "DnfCoverError",
    "DnfRun",
    "ItemList",
    "PackingConfiguration",
    "RandomSeed",
    "ValidationError",
    "aecr_exact",
    "analyze",
    "build_chain",
    "degree",
    "dnf",
    "dnf_run",
    "enumerate_perfect_configs",
    "expected_items_per_bin",
    "expected_overshoot",
    "family_fmk",
    "family_pp1",
    "family_pptwo",
    "family_uniform_discrete",
    "gamma_rate",
    "induced_distribution",
    "is_perfect_packing",
    "opt_exact",
    "perfect_shrink",
    "period",
    "realizing_list",
    "sample_iid",
    "stationary",
    "stopping_time_sample",
    "waste",
]
