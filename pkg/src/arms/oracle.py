"""Ground truth for the estimators: exact enumeration and Monte Carlo summaries."""

import math
from dataclasses import dataclass

import numpy as np

from .copulas import (
    block_correlation,
    dirichlet_branch_select,
    dirichlet_count_pmf,
    min_pair_corr,
    pair_joint_pmf,
    sample_block,
)
from .estimators import (
    ARMS_KINDS,
    EstimatorConfig,
    all_binary_vectors,
    arms_from_samples,
    bits_to_index,
    arts_from_samples,
    biased_loorf_from_samples,
    disarm_from_samples,
    loorf_from_samples,
    pod_from_samples,
    reinforce_from_samples,
)
from .msbound import (
    _iid_outcomes,
    arms_msb_from_samples,
    naive_from_samples,
    vimco_from_samples,
)
from .specfn import sigmoid

MAX_ENUM_DIM = 20
MAX_OUTCOMES = 10 ** 7


@dataclass
class VarianceReport:
    estimator: str
    per_dim_variance: np.ndarray
    mean: np.ndarray
    replicates: int
    std_error_of_mean: np.ndarray

    @property
    def average_variance(self):
        return float(np.mean(self.per_dim_variance))


def exact_gradient(logits, f):
    """``d/dphi E[f(b)]`` by summing over all ``2**m`` outcomes."""
    logits = np.atleast_1d(np.asarray(logits, dtype=float))
    m = logits.shape[0]
    if m > MAX_ENUM_DIM:
        raise ValueError(f"exact_gradient enumerates 2**m outcomes; m={m} exceeds {MAX_ENUM_DIM}")
    probs = sigmoid(logits)
    vecs = all_binary_vectors(m)
    pmf = np.prod(np.where(vecs == 1, probs, 1.0 - probs), axis=-1)
    fvals = np.asarray(f(vecs), dtype=float)
    return np.sum((pmf * fvals)[:, None] * (vecs - probs), axis=0)


def expectation(logits, f):
    logits = np.atleast_1d(np.asarray(logits, dtype=float))
    probs = sigmoid(logits)
    vecs = all_binary_vectors(logits.shape[0])
    pmf = np.prod(np.where(vecs == 1, probs, 1.0 - probs), axis=-1)
    return float(np.sum(pmf * np.asarray(f(vecs), dtype=float)))


def estimator_variance(config, logits, f, replicates, rng):
    """Per-dimension sample variance of ``replicates`` independent estimates."""
    if replicates < 2:
        raise ValueError("replicates must be >= 2")
    grads = np.asarray(config.estimate(logits, f, rng, size=replicates).grad)
    var = grads.var(axis=0, ddof=1)
    return VarianceReport(
        estimator=config.label,
        per_dim_variance=var,
        mean=grads.mean(axis=0),
        replicates=replicates,
        std_error_of_mean=np.sqrt(var / replicates),
    )


def pooled_pair_correlation(bits):
    """Pooled Bernoulli correlation over all ordered pairs ``i != j`` of each row.

    ``bits`` has shape ``(draws, n)``. Returns ``(rho, std_error)``; the error is
    the delta-method standard error treating rows as iid.
    """
    bits = np.asarray(bits, dtype=float)
    draws, n = bits.shape
    s = bits.sum(axis=1)
    both = (s * s - s) / (n * (n - 1))
    mean = s / n
    t_bar, b_bar = both.mean(), mean.mean()
    denom = b_bar * (1.0 - b_bar)
    if denom <= 0.0:
        return 0.0, 0.0
    rho = (t_bar - b_bar ** 2) / denom
    d_t = 1.0 / denom
    d_b = (-2.0 * b_bar * denom - (t_bar - b_bar ** 2) * (1.0 - 2.0 * b_bar)) / denom ** 2
    cov = np.cov(np.vstack([both, mean]))
    var = d_t * d_t * cov[0, 0] + 2 * d_t * d_b * cov[0, 1] + d_b * d_b * cov[1, 1]
    return float(rho), float(math.sqrt(max(var, 0.0) / draws))


def empirical_correlation(spec, p, draws, rng, return_se=False):
    """Pooled empirical correlation of thresholded copula bits at marginal ``p``."""
    if draws < 10 ** 4:
        raise ValueError("empirical_correlation needs at least 1e4 draws")
    logit = math.log(p) - math.log1p(-p)
    bits = sample_block(spec, np.array([logit]), rng, size=draws).bits[..., 0]
    rho, se = pooled_pair_correlation(bits)
    return (rho, se) if return_se else rho


# -- exact expectations over sampling laws ----------------------------------------


def _all_blocks(n, m):
    nm = n * m
    if 2 ** nm > MAX_OUTCOMES:
        raise ValueError(f"2**(n*m) = {2 ** nm} outcomes exceeds the enumeration budget")
    return all_binary_vectors(nm).reshape(-1, n, m)


def _iid_weights(blocks, probs):
    return np.prod(np.where(blocks == 1, probs, 1.0 - probs), axis=(-2, -1))


def _pair_weights(blocks, probs, rho):
    """Weights for blocks made of independent exchangeable pairs (rows 0-1, 2-3, ...)."""
    weight = np.ones(blocks.shape[0])
    for d, p in enumerate(probs):
        if p in (0.0, 1.0):
            weight *= np.prod(blocks[:, :, d] == int(p), axis=-1)
            continue
        table = pair_joint_pmf(p, rho[d])
        for k in range(0, blocks.shape[1], 2):
            weight *= table[blocks[:, k, d], blocks[:, k + 1, d]]
    return weight


def _dirichlet_weights(blocks, probs):
    n = blocks.shape[1]
    weight = np.ones(blocks.shape[0])
    for d, p in enumerate(probs):
        if p in (0.0, 1.0):
            weight *= np.prod(blocks[:, :, d] == int(p), axis=-1)
            continue
        branch = dirichlet_branch_select(p)
        table = np.array([dirichlet_count_pmf(s, p, n, branch) for s in range(n + 1)])
        weight *= table[blocks[:, :, d].sum(axis=-1)]
    return weight


def sampling_law(config, probs):
    """Enumerate the estimator's sample blocks: returns ``(blocks, weights, rho)``.

    Raises:
        ValueError: for estimators without a closed-form joint pmf (ARM, and the
            Gaussian copula), which must be checked statistically instead.
    """
    name, n, m = config.name, config.n, probs.shape[0]
    if name in ("arm",):
        raise ValueError("ARM depends on a continuous uniform; use a statistical check")
    if name == "arms-n":
        raise ValueError("the Gaussian copula has no closed-form joint pmf; use a statistical check")
    if name == "exact":
        raise ValueError("the exact oracle has nothing to enumerate")
    blocks = _all_blocks(n, m)
    rho = np.zeros(m)
    if name in ("reinforce", "loorf", "pod", "loorf-biased", "arms-i"):
        weights = _iid_weights(blocks, probs)
    elif name in ("disarm", "arms-pair"):
        live = (probs > 0) & (probs < 1)
        rho[live] = min_pair_corr(probs[live])
        weights = _pair_weights(blocks, probs, rho)
    elif name == "arts":
        rho = np.broadcast_to(np.asarray(config.rho, dtype=float), (m,)).copy()
        weights = _pair_weights(blocks, probs, rho)
    elif name == "arms-d":
        rho = block_correlation(config.copula, probs)
        weights = _dirichlet_weights(blocks, probs)
    else:  # pragma: no cover - guarded by EstimatorConfig
        raise ValueError(name)
    return blocks, weights, rho


def estimator_from_samples(config, blocks, fvals, probs, rho):
    name = config.name
    if name == "reinforce":
        return reinforce_from_samples(blocks, fvals, probs)
    if name == "loorf":
        return loorf_from_samples(blocks, fvals, probs)
    if name == "loorf-biased":
        return biased_loorf_from_samples(blocks, fvals, probs)
    if name == "pod":
        return pod_from_samples(blocks[:, 0], blocks[:, 1], fvals[:, 0], fvals[:, 1])
    if name == "arts":
        return arts_from_samples(blocks[:, 0], blocks[:, 1], fvals[:, 0], fvals[:, 1], rho)
    if name == "disarm":
        return disarm_from_samples(blocks, fvals, probs)
    if name in ARMS_KINDS:
        return arms_from_samples(blocks, fvals, probs, rho)
    raise ValueError(f"no sample-level form for {name}")


def exact_estimator_moments(config, logits, f):
    """Exact mean and per-dimension variance of an estimator by full enumeration."""
    logits = np.atleast_1d(np.asarray(logits, dtype=float))
    probs = sigmoid(logits)
    blocks, weights, rho = sampling_law(config, probs)
    fvals = np.asarray(f(blocks), dtype=float)
    grads = estimator_from_samples(config, blocks, fvals, probs, rho)
    mean = weights @ grads
    var = weights @ (grads - mean) ** 2
    return mean, var


def exact_estimator_expectation(config, logits, f):
    return exact_estimator_moments(config, logits, f)[0]


MSB_ESTIMATORS = ("naive", "vimco", "arms-d", "arms-i", "arms-pair")


def exact_msb_expectation(model, n, estimator, chunk=256):
    """Exact expectation of a multi-sample-bound estimator by enumeration.

    ``estimator`` is ``naive``, ``vimco``, or ``arms-<copula>`` for the ARMS
    version with a Dirichlet (``d``), independent (``i``) or antithetic-pair copula.
    """
    if estimator not in MSB_ESTIMATORS:
        raise ValueError(f"cannot enumerate {estimator!r}")
    vecs = all_binary_vectors(model.m)
    log_r_all = model.log_ratio(vecs)
    probs = sigmoid(model.posterior_logits)
    codes, weight = _iid_outcomes(model, n)
    bits = vecs[codes]
    log_r = log_r_all[codes]
    if estimator == "naive":
        return weight @ naive_from_samples(log_r, bits, probs)
    if estimator == "vimco":
        return weight @ vimco_from_samples(log_r, bits, probs)

    config = EstimatorConfig(estimator, n)
    corr_blocks, corr_weight, rho = sampling_law(config, probs)
    if codes.shape[0] * corr_blocks.shape[0] > 4 * MAX_OUTCOMES:
        raise ValueError("joint outcome count exceeds the enumeration budget")
    keep = corr_weight > 0
    corr_blocks, corr_weight = corr_blocks[keep], corr_weight[keep]
    log_r_corr = log_r_all[bits_to_index(corr_blocks)]
    total = np.zeros(model.m)
    for start in range(0, codes.shape[0], chunk):
        sl = slice(start, start + chunk)
        grads = arms_msb_from_samples(
            log_r[sl][:, None, :], log_r_corr[None, :, :], corr_blocks[None], probs, rho,
        )
        total += np.einsum("a,b,abm->m", weight[sl], corr_weight, grads)
    return total
