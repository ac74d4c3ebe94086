"""Correlated-sample gradient estimators for Bernoulli latent variables."""

from .copulas import (
    Branch,
    CopulaKind,
    CopulaSpec,
    SampleBlock,
    dirichlet_bernoulli_corr,
    gaussian_bernoulli_corr,
    min_pair_corr,
    sample_block,
    sample_dirichlet_copula,
    sample_gaussian_copula,
)
from .estimators import (
    ESTIMATOR_NAMES,
    EstimatorConfig,
    FunctionOracle,
    GradientEstimate,
    arm,
    arms,
    arts,
    disarm,
    loorf,
    parse_estimator,
    pod,
    reinforce,
)
from .msbound import ToyLatentModel, arms_msb_grad, exact_bound, naive_msb_grad, vimco_grad
from .oracle import (
    empirical_correlation,
    estimator_variance,
    exact_estimator_expectation,
    exact_gradient,
)
from .specfn import bivariate_normal_cdf, std_normal_cdf, std_normal_inv_cdf

__all__ = [
    "Branch",
    "CopulaKind",
    "CopulaSpec",
    "SampleBlock",
    "dirichlet_bernoulli_corr",
    "gaussian_bernoulli_corr",
    "min_pair_corr",
    "sample_block",
    "sample_dirichlet_copula",
    "sample_gaussian_copula",
    "ESTIMATOR_NAMES",
    "EstimatorConfig",
    "FunctionOracle",
    "GradientEstimate",
    "arm",
    "arms",
    "arts",
    "disarm",
    "loorf",
    "parse_estimator",
    "pod",
    "reinforce",
    "empirical_correlation",
    "estimator_variance",
    "exact_estimator_expectation",
    "exact_gradient",
    "ToyLatentModel",
    "arms_msb_grad",
    "exact_bound",
    "naive_msb_grad",
    "vimco_grad",
    "bivariate_normal_cdf",
    "std_normal_cdf",
    "std_normal_inv_cdf",
]
