"""Score-function gradient estimators for factorized Bernoulli distributions.

Every estimator targets ``d/dphi E_{b ~ Bern(sigmoid(phi))}[f(b)]`` with the
score ``d/dphi log p(b) = b - sigmoid(phi)``. ``f`` is treated as independent
of ``phi``.

Each sampling estimator accepts ``size``: with ``size=None`` it returns a single
``(m,)`` estimate, otherwise ``size`` independent estimates stacked as
``(size, m)``. The ``*_from_samples`` functions compute the estimate for given
samples and are what the exact enumeration oracle calls.
"""

import threading
from dataclasses import dataclass

import numpy as np

from .copulas import (
    CopulaKind,
    CopulaSpec,
    RHO_CEILING,
    _as_shape,
    sample_block,
    sample_exchangeable_pair,
)
from .specfn import sigmoid

DIVISION_GUARD = 1e-12


def bits_to_index(bits):
    """Big-endian integer code of binary vectors along the last axis (dimension 0 is the MSB)."""
    bits = np.asarray(bits)
    m = bits.shape[-1]
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return (bits.astype(np.int64) * weights).sum(axis=-1)


def all_binary_vectors(m):
    """All ``2**m`` binary vectors of length ``m`` in big-endian order."""
    codes = np.arange(2 ** m, dtype=np.int64)[:, None]
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((codes >> shifts) & 1).astype(np.int8)


class FunctionOracle:
    """Black-box ``f: {0,1}^m -> R`` that counts evaluations.

    ``fn`` receives an integer array of shape ``(..., m)``. If ``vectorized`` is
    false it is applied one vector at a time. Each binary vector evaluated
    increments :attr:`calls` by one; the counter is lock-protected.
    """

    def __init__(self, fn, m=None, vectorized=False, name=None):
        self.fn = fn
        self.m = m
        self.vectorized = vectorized
        self.name = name or getattr(fn, "__name__", "f")
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_table(cls, table, name="table"):
        table = np.asarray(table, dtype=float)
        m = int(round(np.log2(table.shape[0])))
        if 2 ** m != table.shape[0]:
            raise ValueError("table length must be a power of two")
        return cls(lambda bits: table[bits_to_index(bits)], m=m, vectorized=True, name=name)

    def __call__(self, bits):
        bits = np.asarray(bits)
        if self.m is not None and bits.shape[-1] != self.m:
            raise ValueError(f"expected vectors of length {self.m}, got {bits.shape[-1]}")
        count = int(np.prod(bits.shape[:-1], dtype=np.int64))
        with self._lock:
            self.calls += count
        if self.vectorized:
            return np.asarray(self.fn(bits), dtype=float)
        flat = bits.reshape(-1, bits.shape[-1])
        out = np.array([float(self.fn(b)) for b in flat])
        return out.reshape(bits.shape[:-1])

    def table(self):
        """Values on all ``2**m`` inputs (counts as ``2**m`` evaluations)."""
        return self(all_binary_vectors(self.m))


@dataclass
class GradientEstimate:
    grad: np.ndarray
    estimator: str
    n_samples: int
    f_evals: int


def _probs(logits):
    return sigmoid(np.atleast_1d(np.asarray(logits, dtype=float)))


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(1.0 - rho < DIVISION_GUARD):
        raise ZeroDivisionError("debiasing term 1/(1 - rho) is undefined for rho >= 1 - 1e-12")
    return rho


# -- estimates from given samples ------------------------------------------------
# bits: (..., n, m); fvals: (..., n); probs, rho: (m,)


def reinforce_from_samples(bits, fvals, probs):
    return np.mean(fvals[..., None] * (bits - probs), axis=-2)


def loorf_from_samples(bits, fvals, probs):
    n = bits.shape[-2]
    centred = fvals - fvals.mean(axis=-1, keepdims=True)
    return np.sum(centred[..., None] * (bits - probs), axis=-2) / (n - 1)


def loorf_leave_one_out_form(bits, fvals, probs):
    """LOORF with each sample's baseline the mean of the other ``n - 1`` values."""
    n = bits.shape[-2]
    others = (fvals.sum(axis=-1, keepdims=True) - fvals) / (n - 1)
    return np.mean((fvals - others)[..., None] * (bits - probs), axis=-2)


def biased_loorf_from_samples(bits, fvals, probs):
    """Negative control: LOORF normalised by ``n`` instead of ``n - 1``; biased by ``(n-1)/n``."""
    centred = fvals - fvals.mean(axis=-1, keepdims=True)
    return np.mean(centred[..., None] * (bits - probs), axis=-2)


def pod_from_samples(b, b2, f_b, f_b2):
    return 0.5 * (np.asarray(f_b) - np.asarray(f_b2))[..., None] * (b - b2)


def arts_from_samples(b, b2, f_b, f_b2, rho):
    rho = _check_rho(rho)
    return (np.asarray(f_b) - np.asarray(f_b2))[..., None] * (b - b2) / (2.0 * (1.0 - rho))


def disarm_from_samples(bits, fvals, probs):
    """Average of DisARM pair estimates; pairs are rows ``(0, 1), (2, 3), ...`` of ``bits``."""
    b, b2 = bits[..., 0::2, :], bits[..., 1::2, :]
    f_b, f_b2 = fvals[..., 0::2], fvals[..., 1::2]
    weight = np.maximum(probs, 1.0 - probs)
    return np.mean(0.5 * (f_b - f_b2)[..., None] * (b - b2) * weight, axis=-2)


def arms_from_samples(bits, fvals, probs, rho):
    rho = _check_rho(rho)
    return loorf_from_samples(bits, fvals, probs) / (1.0 - rho)


# -- sampling estimators ----------------------------------------------------------


def _iid_bits(probs, n, rng, size):
    return (rng.random(_as_shape(size) + (n, probs.shape[0])) < probs).astype(np.int8)


def _finish(grad, name, n, f_evals):
    return GradientEstimate(grad=grad, estimator=name, n_samples=n, f_evals=f_evals)


def reinforce(logits, f, n, rng, size=None):
    if n < 1:
        raise ValueError("reinforce requires n >= 1")
    probs = _probs(logits)
    bits = _iid_bits(probs, n, rng, size)
    return _finish(reinforce_from_samples(bits, f(bits), probs), "reinforce", n, n)


def loorf(logits, f, n, rng, size=None):
    if n < 2:
        raise ValueError("loorf requires n >= 2")
    probs = _probs(logits)
    bits = _iid_bits(probs, n, rng, size)
    return _finish(loorf_from_samples(bits, f(bits), probs), "loorf", n, n)


def pod(b, b2, f, logits=None):
    """Product-of-differences estimate for one given pair of sample vectors."""
    b = np.asarray(b)
    b2 = np.asarray(b2)
    return _finish(pod_from_samples(b, b2, f(b), f(b2)), "pod", 2, 2)


def arts(b, b2, rho, f, logits=None):
    """Debiased PoD for a pair drawn from an exchangeable law with correlation ``rho``."""
    b = np.asarray(b)
    b2 = np.asarray(b2)
    return _finish(arts_from_samples(b, b2, f(b), f(b2), rho), "arts", 2, 2)


def _check_even(n, name):
    if n < 2 or n % 2:
        raise ValueError(f"{name} requires an even n >= 2, got {n}")


def arm(logits, f, n, rng, size=None):
    """ARM with ``n/2`` independent antithetic pairs, one shared uniform vector per pair."""
    _check_even(n, "arm")
    probs = _probs(logits)
    u = rng.random(_as_shape(size) + (n // 2, probs.shape[0]))
    first = (u < probs).astype(np.int8)
    second = (u > 1.0 - probs).astype(np.int8)
    diff = f(first) - f(second)
    grad = np.mean(diff[..., None] * (0.5 - u), axis=-2)
    return _finish(grad, "arm", n, n)


def disarm(logits, f, n, rng, size=None):
    _check_even(n, "disarm")
    probs = _probs(logits)
    u = rng.random(_as_shape(size) + (n // 2, probs.shape[0]))
    bits = np.empty(u.shape[:-2] + (n, probs.shape[0]), dtype=np.int8)
    bits[..., 0::2, :] = u < probs
    bits[..., 1::2, :] = (1.0 - u) < probs
    return _finish(disarm_from_samples(bits, f(bits), probs), "disarm", n, n)


def arms(logits, f, spec, rng, size=None):
    """Multivariate ARMS on one copula block: ``n`` evaluations regardless of ``m``."""
    if spec.n < 2:
        raise ValueError("arms requires n >= 2")
    block = sample_block(spec, logits, rng, size)
    grad = arms_from_samples(block.bits, f(block.bits), block.probs, block.rho)
    return _finish(grad, f"arms-{spec.kind.value}", spec.n, spec.n)


# -- named configurations ---------------------------------------------------------

ARMS_KINDS = {
    "arms-d": CopulaKind.DIRICHLET,
    "arms-n": CopulaKind.GAUSSIAN,
    "arms-i": CopulaKind.INDEPENDENT,
    "arms-pair": CopulaKind.ANTITHETIC_PAIR,
}
ESTIMATOR_NAMES = (
    "reinforce", "loorf", "pod", "arts", "arm", "disarm",
    *ARMS_KINDS, "exact", "loorf-biased",
)


@dataclass(frozen=True)
class EstimatorConfig:
    """A named estimator with its sample count.

    ``rho`` is only used by ``arts``, which draws its pair from the exchangeable
    law with that correlation. ``loorf-biased`` is a deliberately biased negative
    control; ``exact`` returns the enumerated gradient (zero variance).
    """

    name: str
    n: int
    rho: float | None = None

    def __post_init__(self):
        if self.name not in ESTIMATOR_NAMES:
            raise ValueError(f"unknown estimator {self.name!r}; choose from {', '.join(ESTIMATOR_NAMES)}")
        if self.name in ("pod", "arts") and self.n != 2:
            raise ValueError(f"{self.name} uses exactly two samples")
        if self.name == "arts" and self.rho is None:
            raise ValueError("arts needs a correlation rho")
        if self.name in ("arm", "disarm"):
            _check_even(self.n, self.name)
        if self.name in ARMS_KINDS:
            CopulaSpec(ARMS_KINDS[self.name], self.n)
        elif self.name != "reinforce" and self.n < 2:
            raise ValueError(f"{self.name} requires n >= 2")

    @property
    def label(self):
        return f"{self.name}(n={self.n})"

    @property
    def copula(self):
        if self.name in ARMS_KINDS:
            return CopulaSpec(ARMS_KINDS[self.name], self.n)
        return None

    def estimate(self, logits, f, rng, size=None):
        name = self.name
        if name == "reinforce":
            return reinforce(logits, f, self.n, rng, size)
        if name == "loorf":
            return loorf(logits, f, self.n, rng, size)
        if name == "arm":
            return arm(logits, f, self.n, rng, size)
        if name == "disarm":
            return disarm(logits, f, self.n, rng, size)
        if name in ARMS_KINDS:
            return arms(logits, f, self.copula, rng, size)
        probs = _probs(logits)
        if name == "pod":
            bits = _iid_bits(probs, 2, rng, size)
            fv = f(bits)
            return _finish(pod_from_samples(bits[..., 0, :], bits[..., 1, :], fv[..., 0], fv[..., 1]), name, 2, 2)
        if name == "arts":
            bits = sample_exchangeable_pair(logits, self.rho, rng, size)
            fv = f(bits)
            grad = arts_from_samples(bits[..., 0, :], bits[..., 1, :], fv[..., 0], fv[..., 1],
                                     np.minimum(self.rho, RHO_CEILING))
            return _finish(grad, name, 2, 2)
        if name == "loorf-biased":
            bits = _iid_bits(probs, self.n, rng, size)
            return _finish(biased_loorf_from_samples(bits, f(bits), probs), name, self.n, self.n)
        # exact
        from .oracle import exact_gradient

        grad = exact_gradient(logits, f)
        shape = _as_shape(size)
        return _finish(np.broadcast_to(grad, shape + grad.shape).copy(), name, self.n, 2 ** grad.shape[0])


def parse_estimator(name, n, rho=None):
    return EstimatorConfig(name=name.strip().lower(), n=int(n), rho=rho)
