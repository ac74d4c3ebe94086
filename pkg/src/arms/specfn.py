"""Normal-distribution special functions used by the copula samplers.

All functions accept scalars or numpy arrays (except :func:`bivariate_normal_cdf`,
which is scalar) and saturate instead of raising for extreme arguments.
"""

import math

import numpy as np
from scipy import special

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

# Acklam's rational approximation of the normal quantile (relative error ~1.2e-9).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425

# Gauss-Legendre rules of 6, 12 and 20 points on [-1, 1] (Genz's choice by |rho|).
_GL = {k: np.polynomial.legendre.leggauss(k) for k in (6, 12, 20)}


def std_normal_cdf(x):
    """Standard normal CDF, accurate to ~1e-16 absolute."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / SQRT2)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(TWO_PI)


def _polyval(coeffs, x):
    out = np.zeros_like(x) + coeffs[0]
    for c in coeffs[1:]:
        out = out * x + c
    return out


def std_normal_inv_cdf(p):
    """Standard normal quantile.

    Rational approximation followed by one Halley refinement step on the CDF,
    which brings the round-trip error well below 1e-12 over ``(1e-300, 1)``.

    Raises:
        ValueError: if any ``p`` lies outside the open interval (0, 1).
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise ValueError("std_normal_inv_cdf requires 0 < p < 1")
    p_flat = np.atleast_1d(p_arr)
    x = np.empty_like(p_flat)

    lo = p_flat < _P_LOW
    hi = p_flat > 1.0 - _P_LOW
    mid = ~(lo | hi)

    q = p_flat[mid] - 0.5
    r = q * q
    x[mid] = q * _polyval(_A, r) / (_polyval(_B, r) * r + 1.0)

    q = np.sqrt(-2.0 * np.log(p_flat[lo]))
    x[lo] = _polyval(_C, q) / (_polyval(_D, q) * q + 1.0)

    q = np.sqrt(-2.0 * np.log1p(-p_flat[hi]))
    x[hi] = -_polyval(_C, q) / (_polyval(_D, q) * q + 1.0)

    # Halley step on Phi(x) - p; upper half uses the complementary tail for accuracy.
    resid = np.where(p_flat > 0.5,
                     (1.0 - p_flat) - std_normal_cdf(-x),
                     std_normal_cdf(x) - p_flat)
    u = resid * math.sqrt(TWO_PI) * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)

    if p_arr.ndim == 0:
        return float(x[0])
    return x.reshape(p_arr.shape)


def bivariate_normal_cdf(h, k, rho):
    """P(X < h, Y < k) for a standard bivariate normal with correlation ``rho``.

    Genz's (2004) Gauss-Legendre scheme over the correlation-integral
    representation, with the Drezner-Wesolowsky expansion for |rho| >= 0.925.
    Absolute error is below 1e-14 in double precision for all finite h, k.

    Raises:
        ValueError: if ``|rho| > 1``. The endpoints ``rho = +-1`` are rejected
            as well since the integrand is singular there; callers reduce those
            cases to ``min``/``max`` of the marginals.
    """
    h = float(h)
    k = float(k)
    rho = float(rho)
    if not abs(rho) <= 1.0 - 1e-12:
        raise ValueError(f"bivariate_normal_cdf requires |rho| < 1, got {rho!r}")
    if h == -math.inf or k == -math.inf:
        return 0.0
    if h == math.inf:
        return float(std_normal_cdf(k))
    if k == math.inf:
        return float(std_normal_cdf(h))

    if abs(rho) < 0.3:
        nodes, weights = _GL[6]
    elif abs(rho) < 0.75:
        nodes, weights = _GL[12]
    else:
        nodes, weights = _GL[20]

    # Genz computes the upper orthant P(X > dh, Y > dk); lower orthant = upper at (-h, -k).
    dh, dk = -h, -k
    hk = dh * dk

    if abs(rho) < 0.925:
        hs = (dh * dh + dk * dk) / 2.0
        asr = math.asin(rho)
        sn = np.sin(asr * (nodes + 1.0) / 2.0)
        total = np.sum(weights * np.exp((sn * hk - hs) / (1.0 - sn * sn)))
        bvn = total * asr / (2.0 * TWO_PI) + float(std_normal_cdf(-dh) * std_normal_cdf(-dk))
        return min(1.0, max(0.0, bvn))

    if rho < 0:
        dk = -dk
        hk = -hk
    one_minus = (1.0 - rho) * (1.0 + rho)
    a = math.sqrt(one_minus)
    bs = (dh - dk) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    bvn = a * math.exp(-(bs / one_minus + hk) / 2.0) * (
        1.0 - c * (bs - one_minus) * (1.0 - d * bs / 5.0) / 3.0 + c * d * one_minus * one_minus / 5.0
    )
    if hk > -160.0:
        b = math.sqrt(bs)
        bvn -= (math.exp(-hk / 2.0) * math.sqrt(TWO_PI) * float(std_normal_cdf(-b / a))
                * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0))
    half_a = a / 2.0
    xs = (half_a * (nodes + 1.0)) ** 2
    rs = np.sqrt(1.0 - xs)
    terms = np.exp(-(bs / xs + hk) / 2.0) * (
        np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs))
    )
    bvn += half_a * np.sum(weights * terms)
    bvn = -bvn / TWO_PI

    if rho > 0:
        bvn += float(std_normal_cdf(-max(dh, dk)))
    else:
        bvn = -bvn
        if dk > dh:
            if dh < 0:
                bvn += float(std_normal_cdf(dk) - std_normal_cdf(dh))
            else:
                bvn += float(std_normal_cdf(-dh) - std_normal_cdf(-dk))
    return min(1.0, max(0.0, bvn))


def beta_cdf_one_param(x, n, flipped=False):
    """CDF of a flat-Dirichlet marginal ``d_i ~ Beta(1, n-1)`` or of ``1 - d_i``.

    Returns ``1 - (1-x)**(n-1)`` when not flipped and ``x**(n-1)`` when flipped.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("beta_cdf_one_param requires 0 <= x <= 1")
    if flipped:
        out = x_arr ** (n - 1)
    else:
        out = 1.0 - (1.0 - x_arr) ** (n - 1)
    return float(out) if np.ndim(out) == 0 else out


def sigmoid(x):
    return special.expit(x)
