"""Multi-sample variational bound on a tiny enumerable latent-variable model.

For an observation ``x`` with binary latent ``b`` the bound is

    L_n = E_{b_1..b_n iid q} [ log( (1/n) sum_k r(b_k) ) ],   r(b) = p(b, x) / q(b | x).

The estimators here target the score-function part of ``d L_n / d phi``: the
importance ratios are held fixed and only the sampling distribution ``q_phi`` is
differentiated. That is the quantity every estimator below is unbiased for, and
:func:`exact_bound_gradient` returns it exactly.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .copulas import _as_shape, sample_block
from .estimators import FunctionOracle, all_binary_vectors, bits_to_index
from .specfn import sigmoid

MAX_LATENT_DIM = 6


def _log_bernoulli(bits, logits):
    # log sigmoid(phi) for b=1, log sigmoid(-phi) for b=0, summed over dimensions
    signed = np.where(np.asarray(bits) == 1, logits, -logits)
    return -np.logaddexp(0.0, -signed).sum(axis=-1)


@dataclass(frozen=True)
class ToyLatentModel:
    """Prior logits ``theta``, likelihood table ``p(x | b)`` and posterior logits ``phi``.

    ``likelihood[code]`` is indexed by the big-endian code of ``b``.
    """

    prior_logits: np.ndarray
    likelihood: np.ndarray
    posterior_logits: np.ndarray = field(default=None)

    def __post_init__(self):
        prior = np.atleast_1d(np.asarray(self.prior_logits, dtype=float))
        m = prior.shape[0]
        if m > MAX_LATENT_DIM:
            raise ValueError(f"ToyLatentModel supports m <= {MAX_LATENT_DIM}")
        like = np.asarray(self.likelihood, dtype=float)
        if like.shape != (2 ** m,):
            raise ValueError(f"likelihood table must have 2**m = {2 ** m} entries")
        if np.any(~(like > 0.0)):
            raise ValueError("likelihood values must be strictly positive")
        post = prior if self.posterior_logits is None else np.atleast_1d(np.asarray(self.posterior_logits, dtype=float))
        if post.shape != prior.shape:
            raise ValueError("posterior and prior logits must have the same length")
        object.__setattr__(self, "prior_logits", prior)
        object.__setattr__(self, "likelihood", like)
        object.__setattr__(self, "posterior_logits", post)

    @property
    def m(self):
        return self.prior_logits.shape[0]

    def with_posterior(self, logits):
        return ToyLatentModel(self.prior_logits, self.likelihood, logits)

    def log_joint(self, bits):
        return _log_bernoulli(bits, self.prior_logits) + np.log(self.likelihood[bits_to_index(bits)])

    def log_q(self, bits, logits=None):
        return _log_bernoulli(bits, self.posterior_logits if logits is None else logits)

    def log_ratio(self, bits):
        return self.log_joint(bits) - self.log_q(bits)

    def ratio_oracle(self):
        """Counting oracle for ``log r(b)``; one call per importance-ratio evaluation."""
        return FunctionOracle(self.log_ratio, m=self.m, vectorized=True, name="log_r")

    def log_marginal_likelihood(self):
        return float(logsumexp(self.log_joint(all_binary_vectors(self.m))))

    @classmethod
    def random(cls, m, rng, logit_scale=2.0):
        return cls(
            prior_logits=rng.uniform(-logit_scale, logit_scale, m),
            likelihood=np.exp(rng.normal(0.0, 1.0, 2 ** m)),
            posterior_logits=rng.uniform(-logit_scale, logit_scale, m),
        )

    def to_json(self):
        keys = ["".join(str(int(v)) for v in row) for row in all_binary_vectors(self.m)]
        return json.dumps({
            "prior_logits": self.prior_logits.tolist(),
            "posterior_logits": self.posterior_logits.tolist(),
            "likelihood": dict(zip(keys, self.likelihood.tolist())),
        })

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        prior = np.asarray(data["prior_logits"], dtype=float)
        m = prior.shape[0]
        table = np.empty(2 ** m)
        seen = set()
        for key, value in data["likelihood"].items():
            if len(key) != m or set(key) - {"0", "1"}:
                raise ValueError(f"bad likelihood key {key!r} for m={m}")
            code = int(key, 2)
            seen.add(code)
            table[code] = float(value)
        if len(seen) != 2 ** m:
            raise ValueError("likelihood must list every binary configuration")
        return cls(prior, table, np.asarray(data.get("posterior_logits", prior), dtype=float))


def default_model():
    """Fixed three-dimensional instance used by the benchmark when no model file is given."""
    return ToyLatentModel(
        prior_logits=np.array([0.4, -0.8, 1.2]),
        likelihood=np.array([0.05, 0.9, 0.3, 2.5, 0.15, 1.4, 0.6, 3.0]),
        posterior_logits=np.array([-0.5, 0.3, 0.9]),
    )


@dataclass
class BoundEstimate:
    value: np.ndarray
    grad_phi: np.ndarray
    f_evals: int


def importance_ratio(model, b):
    return np.exp(model.log_ratio(np.asarray(b)))


def log_mean_exp(log_r, axis=-1):
    n = np.shape(log_r)[axis]
    return logsumexp(log_r, axis=axis) - math.log(n)


def multi_sample_bound_value(model, samples):
    """``log((1/n) sum_k r(b_k))`` for samples of shape ``(..., n, m)``."""
    return log_mean_exp(model.log_ratio(np.asarray(samples)))


# -- estimates from given samples; log_r: (..., n), bits: (..., n, m) -------------


def naive_from_samples(log_r, bits, probs):
    value = log_mean_exp(log_r)
    return value[..., None] * np.sum(bits - probs, axis=-2)


def vimco_signals(log_r):
    """Per-sample learning signals with geometric-mean leave-one-out baselines."""
    n = log_r.shape[-1]
    value = log_mean_exp(log_r)
    total = log_r.sum(axis=-1, keepdims=True)
    log_geo = (total - log_r) / (n - 1)
    # row k: log r_j for j != k, with the geometric mean of the others on the diagonal
    swapped = np.broadcast_to(log_r[..., None, :], log_r.shape + (n,)).copy()
    idx = np.arange(n)
    swapped[..., idx, idx] = log_geo
    baseline = log_mean_exp(swapped)
    return value[..., None] - baseline


def vimco_from_samples(log_r, bits, probs):
    return np.sum(vimco_signals(log_r)[..., None] * (bits - probs), axis=-2)


def _leave_one_out_logsumexp(log_r):
    n = log_r.shape[-1]
    expanded = np.broadcast_to(log_r[..., None, :], log_r.shape + (n,)).copy()
    idx = np.arange(n)
    expanded[..., idx, idx] = -np.inf
    return logsumexp(expanded, axis=-1)


def arms_msb_from_samples(log_r_iid, log_r_corr, corr_bits, probs, rho):
    """ARMS inner estimator for each held-out slot ``k``, summed over ``k``.

    ``f_k(b) = log((1/n)(sum_{l != k} r(b_l) + r(b)))`` is evaluated at the
    correlated samples and fed to the ARMS formula with debiasing ``1/(1 - rho)``.
    """
    n = log_r_iid.shape[-1]
    rest = _leave_one_out_logsumexp(log_r_iid)  # (..., k)
    fk = np.logaddexp(rest[..., :, None], log_r_corr[..., None, :]) - math.log(n)  # (..., k, i)
    centred = fk - fk.mean(axis=-1, keepdims=True)
    weight = centred.sum(axis=-2)  # sum over k
    return np.sum(weight[..., None] * (corr_bits - probs), axis=-2) / ((n - 1) * (1.0 - rho))


# -- sampling estimators ----------------------------------------------------------


def _iid_latents(model, n, rng, size):
    probs = sigmoid(model.posterior_logits)
    return (rng.random(_as_shape(size) + (n, model.m)) < probs).astype(np.int8), probs


def naive_msb_grad(model, n, rng, size=None, oracle=None):
    if n < 1:
        raise ValueError("naive_msb_grad requires n >= 1")
    oracle = oracle or model.ratio_oracle()
    bits, probs = _iid_latents(model, n, rng, size)
    log_r = oracle(bits)
    return BoundEstimate(log_mean_exp(log_r), naive_from_samples(log_r, bits, probs), n)


def vimco_grad(model, n, rng, size=None, oracle=None):
    if n < 2:
        raise ValueError("vimco_grad requires n >= 2")
    oracle = oracle or model.ratio_oracle()
    bits, probs = _iid_latents(model, n, rng, size)
    log_r = oracle(bits)
    return BoundEstimate(log_mean_exp(log_r), vimco_from_samples(log_r, bits, probs), n)


def arms_msb_grad(model, n, spec, rng, size=None, oracle=None):
    """ARMS for the ``n``-sample bound: ``n`` iid samples plus one correlated block (``2n`` ratios)."""
    if n < 2:
        raise ValueError("arms_msb_grad requires n >= 2")
    if spec.n != n:
        raise ValueError("copula block size must equal n")
    oracle = oracle or model.ratio_oracle()
    bits, probs = _iid_latents(model, n, rng, size)
    block = sample_block(spec, model.posterior_logits, rng, size)
    log_r_iid = oracle(bits)
    log_r_corr = oracle(block.bits)
    grad = arms_msb_from_samples(log_r_iid, log_r_corr, block.bits, block.probs, block.rho)
    return BoundEstimate(log_mean_exp(log_r_iid), grad, 2 * n)


# -- exact quantities by enumeration ----------------------------------------------


def _iid_outcomes(model, n, logits=None):
    """One sorted code tuple per multiset of ``n`` iid samples, with its total probability.

    Returns codes ``(K, n)`` and weights ``(K,)``. Everything enumerated with
    these outcomes is symmetric in the samples, so grouping the ``(2**m)**n``
    ordered tuples by multiset (multinomial weight) leaves the sums unchanged.
    """
    vecs = all_binary_vectors(model.m)
    log_q = model.log_q(vecs, logits)
    codes = np.array(list(itertools.combinations_with_replacement(range(2 ** model.m), n)), dtype=np.int64)
    counts = np.stack([(codes == c).sum(axis=1) for c in range(2 ** model.m)], axis=1)
    log_multi = math.lgamma(n + 1) - gammaln(counts + 1).sum(axis=1)
    return codes, np.exp(log_multi + log_q[codes].sum(axis=-1))


def exact_bound(model, n, logits=None):
    """Exact ``L_n`` by enumeration; ``logits`` overrides ``phi`` in the sampling law only."""
    vecs = all_binary_vectors(model.m)
    log_r = model.log_ratio(vecs)
    codes, weight = _iid_outcomes(model, n, logits)
    return float(np.sum(weight * log_mean_exp(log_r[codes])))


def exact_bound_gradient(model, n):
    """Score-function gradient of ``L_n`` w.r.t. ``phi`` with the ratios held fixed."""
    vecs = all_binary_vectors(model.m)
    log_r = model.log_ratio(vecs)
    probs = sigmoid(model.posterior_logits)
    codes, weight = _iid_outcomes(model, n)
    scores = np.sum(vecs[codes] - probs, axis=-2)
    return np.sum((weight * log_mean_exp(log_r[codes]))[:, None] * scores, axis=0)
