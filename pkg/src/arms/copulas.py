"""Mutually antithetic copulas and the correlated Bernoulli blocks they induce.

A block holds ``n`` Bernoulli replicates for each of ``m`` dimensions. Within a
dimension the replicates are exchangeable with a common pairwise correlation
``rho``; dimensions are drawn independently of each other.

Dirichlet copula joint density
------------------------------
For ``u = 1 - u_tilde`` (the flipped Dirichlet sample, ``u_i = (1 - d_i)**(n-1)``)
the change of variables ``d_i = 1 - u_i**(1/(n-1))`` has a diagonal Jacobian,
which gives the singular density

    p(u_1, ..., u_n) = (n-1)! / (n-1)**n * prod_i u_i**(1/(n-1) - 1)

supported on the surface ``sum_i u_i**(1/(n-1)) = n - 1``. It is not needed for
sampling; :func:`dirichlet_bernoulli_joint_pmf` gives the exact probabilities of
the thresholded bit patterns instead.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .specfn import bivariate_normal_cdf, sigmoid, std_normal_cdf, std_normal_inv_cdf

RHO_CEILING = 1.0 - 1e-12
_LOG_FLOOR = 1e-300


class CopulaKind(str, enum.Enum):
    INDEPENDENT = "independent"
    ANTITHETIC_PAIR = "antithetic-pair"
    DIRICHLET = "dirichlet"
    GAUSSIAN = "gaussian"


class Branch(enum.Enum):
    """Which Dirichlet copula sample a dimension uses: ``u`` or ``1 - u``."""

    PRIMARY = "primary"
    FLIPPED = "flipped"


@dataclass(frozen=True)
class CopulaSpec:
    kind: CopulaKind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", CopulaKind(self.kind))
        if self.kind is CopulaKind.ANTITHETIC_PAIR and self.n != 2:
            raise ValueError("the antithetic pair copula requires n = 2")
        min_n = 1 if self.kind is CopulaKind.INDEPENDENT else 2
        if self.n < min_n:
            raise ValueError(f"{self.kind.value} copula requires n >= {min_n}, got {self.n}")


@dataclass
class UniformBlock:
    """Copula uniforms of shape ``(..., n, m)`` and the Dirichlet branch used per dimension."""

    values: np.ndarray
    branch: tuple


@dataclass
class SampleBlock:
    """Thresholded bits of shape ``(..., n, m)`` with marginal probabilities and correlations."""

    bits: np.ndarray
    probs: np.ndarray
    rho: np.ndarray

    @property
    def n(self):
        return self.bits.shape[-2]


def _as_shape(size):
    if size is None:
        return ()
    if isinstance(size, (int, np.integer)):
        return (int(size),)
    return tuple(size)


def _positive_uniforms(rng, shape):
    v = rng.random(shape)
    bad = (v < _LOG_FLOOR) | (v >= 1.0)
    while np.any(bad):
        v[bad] = rng.random(int(bad.sum()))
        bad = (v < _LOG_FLOOR) | (v >= 1.0)
    return v


def dirichlet_copula_uniforms(n, rng, shape=()):
    """Primary Dirichlet copula samples of shape ``(*shape, n)``."""
    if n < 2:
        raise ValueError("Dirichlet copula requires n >= 2")
    log_v = np.log(_positive_uniforms(rng, tuple(shape) + (n,)))
    d = log_v / log_v.sum(axis=-1, keepdims=True)
    # 1 - (1 - d)**(n-1), evaluated without cancellation for small d
    return -np.expm1((n - 1) * np.log1p(-d))


def sample_dirichlet_copula(n, rng):
    """One draw of the antithetic Dirichlet copula.

    Returns the pair ``(u, 1 - u)`` of n-vectors, where
    ``u_i = 1 - (1 - d_i)**(n-1)`` and ``d ~ Dir(1, ..., 1)``.
    """
    u = dirichlet_copula_uniforms(n, rng)
    return u, 1.0 - u


def gaussian_copula_uniforms(n, rng, shape=()):
    if n < 2:
        raise ValueError("Gaussian copula requires n >= 2")
    z = rng.standard_normal(tuple(shape) + (n,))
    x = (z - z.mean(axis=-1, keepdims=True)) * math.sqrt(n / (n - 1))
    return std_normal_cdf(x)


def sample_gaussian_copula(n, rng):
    """One draw of the antithetic Gaussian copula.

    The latent normals are the centred iid draw scaled by ``sqrt(n/(n-1))``,
    which has unit variances and every pairwise correlation equal to ``-1/(n-1)``.
    """
    return gaussian_copula_uniforms(n, rng)


def threshold_to_bernoulli(uniforms, p):
    return (np.asarray(uniforms) < p).astype(np.int8)


def dirichlet_branch_select(p):
    return Branch.PRIMARY if p > 0.5 else Branch.FLIPPED


def _check_open_unit(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("Bernoulli correlation requires 0 < p < 1")
    return p


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def dirichlet_bernoulli_corr(p, n, branch):
    """Common pairwise correlation of Dirichlet-copula Bernoulli replicates."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p = _check_open_unit(p)
    if Branch(branch) is Branch.PRIMARY:
        both = np.maximum(0.0, 2.0 * (1.0 - p) ** (1.0 / (n - 1)) - 1.0) ** (n - 1)
        rho = (both - (1.0 - p) ** 2) / (p * (1.0 - p))
    else:
        both = np.maximum(0.0, 2.0 * p ** (1.0 / (n - 1)) - 1.0) ** (n - 1)
        rho = (both - p * p) / (p * (1.0 - p))
    return _scalar_or_array(rho)


def gaussian_bernoulli_corr(p, n):
    """Common pairwise correlation of Gaussian-copula Bernoulli replicates."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p = _check_open_unit(p)
    flat = np.atleast_1d(p)
    if n == 2:
        both = np.maximum(0.0, 2.0 * flat - 1.0)
    else:
        z = std_normal_inv_cdf(flat)
        both = np.array([bivariate_normal_cdf(zi, zi, -1.0 / (n - 1)) for zi in z])
    rho = (both - flat * flat) / (flat * (1.0 - flat))
    return float(rho[0]) if p.ndim == 0 else rho.reshape(p.shape)


def min_pair_corr(p):
    """Lowest attainable correlation of two Bern(p) variables: ``-min(p/(1-p), (1-p)/p)``."""
    p = _check_open_unit(p)
    return _scalar_or_array(-np.minimum(p / (1.0 - p), (1.0 - p) / p))


def block_correlation(spec, probs):
    """Per-dimension pairwise correlation for ``spec`` at marginals ``probs``.

    Degenerate marginals (``p`` exactly 0 or 1) get ``rho = 0``: their samples
    are constant and the score ``b - p`` vanishes, so the value is immaterial.
    """
    probs = np.atleast_1d(np.asarray(probs, dtype=float))
    rho = np.zeros_like(probs)
    live = (probs > 0.0) & (probs < 1.0)
    if not np.any(live) or spec.kind is CopulaKind.INDEPENDENT:
        return rho
    p = probs[live]
    if spec.kind is CopulaKind.ANTITHETIC_PAIR:
        rho[live] = min_pair_corr(p)
    elif spec.kind is CopulaKind.DIRICHLET:
        rho[live] = [dirichlet_bernoulli_corr(pi, spec.n, dirichlet_branch_select(pi)) for pi in p]
    else:
        rho[live] = gaussian_bernoulli_corr(p, spec.n)
    return np.minimum(rho, RHO_CEILING)


def copula_uniforms(spec, probs, rng, size=None):
    """Draw a fresh copula column per dimension; returns values of shape ``(*size, n, m)``."""
    probs = np.atleast_1d(np.asarray(probs, dtype=float))
    m = probs.shape[0]
    shape = _as_shape(size)
    n = spec.n
    branch = ()
    if spec.kind is CopulaKind.INDEPENDENT:
        u = rng.random(shape + (n, m))
    elif spec.kind is CopulaKind.ANTITHETIC_PAIR:
        first = rng.random(shape + (1, m))
        u = np.concatenate([first, 1.0 - first], axis=-2)
    elif spec.kind is CopulaKind.DIRICHLET:
        u = np.swapaxes(dirichlet_copula_uniforms(n, rng, shape + (m,)), -1, -2)
        branch = tuple(dirichlet_branch_select(p) for p in probs)
        flipped = np.array([b is Branch.FLIPPED for b in branch])
        u = np.where(flipped, 1.0 - u, u)
    else:
        u = np.swapaxes(gaussian_copula_uniforms(n, rng, shape + (m,)), -1, -2)
    return UniformBlock(values=u, branch=branch)


def sample_block(spec, logits, rng, size=None):
    """Draw an ``n``-replicate correlated Bernoulli block for the logits.

    With ``size`` given, ``size`` independent blocks are stacked along leading axes.
    """
    probs = sigmoid(np.atleast_1d(np.asarray(logits, dtype=float)))
    u = copula_uniforms(spec, probs, rng, size)
    bits = threshold_to_bernoulli(u.values, probs)
    return SampleBlock(bits=bits, probs=probs, rho=block_correlation(spec, probs))


def pair_joint_pmf(p, rho):
    """Joint table ``[[P00, P01], [P10, P11]]`` of an exchangeable Bern(p) pair."""
    p = float(p)
    p11 = p * p + rho * p * (1.0 - p)
    p10 = p - p11
    p00 = 1.0 - p - p10
    table = np.array([[p00, p10], [p10, p11]])
    if np.any(table < -1e-12):
        raise ValueError(f"no exchangeable Bern({p}) pair has correlation {rho}")
    return np.clip(table, 0.0, 1.0)


def sample_exchangeable_pair(logits, rho, rng, size=None):
    """Draw ``(b, b2)`` per dimension from the exchangeable pair law with correlation ``rho``.

    Returns bits of shape ``(*size, 2, m)``.
    """
    probs = sigmoid(np.atleast_1d(np.asarray(logits, dtype=float)))
    rho = np.broadcast_to(np.asarray(rho, dtype=float), probs.shape)
    shape = _as_shape(size)
    out = np.empty(shape + (2, probs.shape[0]), dtype=np.int8)
    for d, (p, r) in enumerate(zip(probs, rho)):
        t = pair_joint_pmf(p, r)
        # outcome code 0:(0,0) 1:(0,1) 2:(1,0) 3:(1,1)
        cdf = np.cumsum([t[0, 0], t[0, 1], t[1, 0], t[1, 1]])
        code = np.searchsorted(cdf, rng.random(shape) * cdf[-1], side="right")
        code = np.minimum(code, 3)
        out[..., 0, d] = code >> 1
        out[..., 1, d] = code & 1
    return out


def dirichlet_count_pmf(s, p, n, branch):
    """Probability of one specific bit pattern with ``s`` ones under the Dirichlet copula.

    Exchangeability makes the probability depend on the pattern only through
    ``s``. With the flat-Dirichlet survival identity
    ``P(d_i > a for all i in S) = max(0, 1 - |S| a)**(n-1)`` and
    inclusion-exclusion over the complementary coordinates.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < p < 1.0:
        raise ValueError("joint pmf requires 0 < p < 1")
    if Branch(branch) is Branch.FLIPPED:
        # bit = 1  <=>  d_i > a
        a = 1.0 - p ** (1.0 / (n - 1))
        fixed, free = s, n - s
    else:
        # bit = 1  <=>  d_i < q, i.e. the zero bits are the exceedances
        a = -math.expm1(math.log1p(-p) / (n - 1))
        fixed, free = n - s, s
    total = 0.0
    for t in range(free + 1):
        total += (-1) ** t * comb(free, t, exact=True) * max(0.0, 1.0 - (fixed + t) * a) ** (n - 1)
    return max(total, 0.0)


def dirichlet_bernoulli_joint_pmf(pattern, p, n, branch):
    pattern = np.asarray(pattern)
    if pattern.shape != (n,):
        raise ValueError(f"pattern must have length n={n}")
    return dirichlet_count_pmf(int(pattern.sum()), p, n, branch)
