"""Numerical diagnostics for effective dimension and risk-rate schedules.

The effective data dimensionality of a kernel with eigenvalues ``mu_l`` is
``gamma(lambda) = sum_l 1 / (1 + lambda / mu_l)``. For the two parametric
eigendecays the infinite series is summed up to a truncation ``T`` and the
remainder is bracketed:

* polynomial ``mu_l = C l^(-a)``, ``a = 2s/d > 1``: the summand is
  decreasing, so ``int_{T+1}^inf <= tail <= int_T^inf`` of the same
  function; the upper integral is the reported tail bound and the value
  uses the midpoint of the two integrals.
* Gaussian-type ``mu_l = pi^d exp(-alpha l^2)``: ``tail <= sum mu_l/lambda``
  and ``l^2 >= (T+1)^2 + 2(T+1)k`` for ``l = T+1+k`` give the geometric
  majorant ``pi^d exp(-alpha (T+1)^2) / (lambda (1 - exp(-2 alpha (T+1))))``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import expit

from . import linalg
from .errors import LambdaNonPositive, TailNotConvergent, TooLarge, ValidationError

MAX_TRUNCATION = 10**7
TAIL_RTOL = 1e-8
_CHUNK = 1 << 20
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Polynomial:
    """``mu_l = C * l**(-2s/d)``."""

    s: float
    d: int
    C: float = 1.0

    def __post_init__(self):
        if not (self.s > 0 and self.d >= 1 and self.C > 0):
            raise ValidationError("polynomial decay needs s > 0, d >= 1, C > 0")

    @property
    def exponent(self):
        return 2.0 * self.s / self.d

    def eigenvalues(self, ell):
        return self.C * np.asarray(ell, dtype=np.float64) ** (-self.exponent)


@dataclass(frozen=True)
class GaussianType:
    """``mu_l = pi_tilde**d * exp(-alpha * l**2)``."""

    pi_tilde: float
    alpha: float
    d: int

    def __post_init__(self):
        if not (self.pi_tilde > 0 and self.alpha > 0 and self.d >= 1):
            raise ValidationError("gaussian-type decay needs pi_tilde > 0, alpha > 0, d >= 1")

    @property
    def log_scale(self):
        return self.d * math.log(self.pi_tilde)

    def eigenvalues(self, ell):
        ell = np.asarray(ell, dtype=np.float64)
        return np.exp(self.log_scale - self.alpha * ell * ell)


@dataclass(frozen=True)
class FiniteSpectrum:
    """An explicit finite eigenvalue list (all later eigenvalues are zero)."""

    values: tuple

    def eigenvalues(self, ell):
        vals = np.asarray(self.values, dtype=np.float64)
        ell = np.asarray(ell, dtype=np.intp)
        out = np.zeros(ell.shape)
        inside = ell <= vals.size
        out[inside] = vals[ell[inside] - 1]
        return out


@dataclass(frozen=True)
class EffectiveDimReport:
    lam: float
    gamma_single: float
    gamma_sum: float
    truncation: int
    tail_bound: float
    partial_sum: float
    n_components: int = 1


def n_components(D, d):
    """``C(D, d)`` as an exact integer; refuses values beyond int64."""
    m = math.comb(int(D), int(d))
    if m > INT64_MAX:
        raise TooLarge(f"C({D}, {d}) exceeds 2^63 - 1")
    return m


def _poly_terms(model, lam, lo, hi):
    ell = np.arange(lo, hi + 1, dtype=np.float64)
    return 1.0 / (1.0 + (lam / model.C) * ell**model.exponent)


def _poly_tail_integral(model, lam, start):
    a = model.exponent
    b = lam / model.C
    # substitute u = start * w to keep quad on a well-scaled interval
    val, _ = integrate.quad(lambda w: start / (1.0 + b * (start * w) ** a), 1.0, np.inf,
                            epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def _gaussian_terms(model, lam, lo, hi):
    ell = np.arange(lo, hi + 1, dtype=np.float64)
    return expit(model.log_scale - math.log(lam) - model.alpha * ell * ell)


def _gaussian_tail_bound(model, lam, T):
    t1 = T + 1.0
    log_num = model.log_scale - model.alpha * t1 * t1 - math.log(lam)
    return math.exp(log_num) / -math.expm1(-2.0 * model.alpha * t1)


def gamma_single(model, lam, D=None):
    """Effective dimensionality of one component kernel at regularization ``lam``.

    ``gamma_sum`` multiplies by the number of order-``d`` components
    ``C(D, d)`` when ``D`` is given.
    """
    lam = float(lam)
    if not lam > 0:
        raise LambdaNonPositive(f"lambda must be positive, got {lam}")
    if isinstance(model, FiniteSpectrum):
        mu = np.asarray(model.values, dtype=np.float64)
        total = float(np.sum(mu / (mu + lam), where=mu > 0, initial=0.0))
        return EffectiveDimReport(lam, total, total, mu.size, 0.0, total)
    if isinstance(model, Polynomial):
        if model.exponent <= 1.0:
            raise TailNotConvergent(f"series diverges: need 2s/d > 1, got {model.exponent:g}")
        terms, tail = _poly_terms, lambda T: _poly_tail_integral(model, lam, T)
    elif isinstance(model, GaussianType):
        terms, tail = _gaussian_terms, lambda T: _gaussian_tail_bound(model, lam, T)
    else:
        raise ValidationError(f"unknown eigendecay model {model!r}")

    partial = 0.0
    T = 0
    step = 1024
    while True:
        hi = min(T + step, MAX_TRUNCATION)
        for lo in range(T + 1, hi + 1, _CHUNK):
            partial += float(np.sum(terms(model, lam, lo, min(lo + _CHUNK - 1, hi))))
        T = hi
        bound = tail(T)
        if bound <= TAIL_RTOL * partial or T >= MAX_TRUNCATION:
            break
        step *= 2
    if isinstance(model, Polynomial):
        value = partial + 0.5 * (bound + tail(T + 1))
    else:
        value = partial + 0.5 * bound
    m = 1 if D is None else n_components(D, model.d)
    return EffectiveDimReport(lam, value, m * value, T, bound, partial, m)


def rate_lambda(model, n):
    """Regularization schedule: ``n^(-2s/(2s+d))`` for polynomial decay, ``1/n`` for Gaussian-type."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    if isinstance(model, Polynomial):
        return float(n) ** (-2.0 * model.s / (2.0 * model.s + model.d))
    if isinstance(model, GaussianType):
        return 1.0 / float(n)
    raise ValidationError(f"no rate schedule for {model!r}")


@dataclass
class RateBand:
    ns: list
    lambdas: list
    gammas: list
    ratios: list

    @property
    def band(self):
        return max(self.ratios) / min(self.ratios)


def rate_band_check(model, n_grid):
    """``gamma(rate_lambda(n))`` normalized by its predicted growth, over ``n_grid``.

    Polynomial decay is divided by ``n^(d/(2s+d))``; Gaussian-type decay by
    ``pi_tilde^d`` (its remaining growth is only logarithmic in ``n``).
    """
    ns = [int(n) for n in n_grid]
    if not ns:
        raise ValidationError("n_grid is empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValidationError("n_grid must be increasing")
    lams, gammas, ratios = [], [], []
    for n in ns:
        lam = rate_lambda(model, n)
        g = gamma_single(model, lam).gamma_single
        if isinstance(model, Polynomial):
            scale = float(n) ** (model.d / (2.0 * model.s + model.d))
        else:
            scale = math.exp(model.log_scale)
        lams.append(lam)
        gammas.append(g)
        ratios.append(g / scale)
    return RateBand(ns, lams, gammas, ratios)


def theorem1_dominant_bound(lam, M_d, fnorm_sq, sigma_sq, gamma_sum, n):
    """``M_d * (20 lam |f|^2 + 12 sigma^2 gamma / n)``: the excess-risk bound without low-order terms."""
    if min(lam, M_d, fnorm_sq, sigma_sq, gamma_sum) < 0:
        raise ValidationError("bound inputs must be nonnegative")
    if n < 1:
        raise ValidationError("n must be >= 1")
    return M_d * (20.0 * lam * fnorm_sq + 12.0 * sigma_sq * gamma_sum / n)


def empirical_effective_dim(K, lam, n=None):
    """``sum_k 1/(1 + lam/mu_k)`` over the eigenvalues of ``K/n`` (negatives clipped to 0)."""
    K = linalg.check_symmetric(K)
    n = K.shape[0] if n is None else n
    if not lam > 0:
        raise LambdaNonPositive(f"lambda must be positive, got {lam}")
    mu = np.clip(linalg.eigen_sym(K)[0] / n, 0.0, None)
    return float(np.sum(mu / (mu + lam)))
