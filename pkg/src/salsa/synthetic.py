"""Synthetic regression problems.

* ``bumps``: log of a three-component Gaussian mixture with bandwidth
  ``h_d = 0.01 sqrt(d)``, optionally summed over every size-``d`` subset
  of ``D`` coordinates (an additive function of order ``d``).
* ``spam-setting2``: a 50-dimensional additive model with four main
  effects and four pairwise (product) effects, for support recovery.

Every row is drawn from its own counter-based Philox substream keyed by
the seed, so a dataset is a pure function of ``(parameters, seed)`` and
rows can be generated in any order.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, NonFinite, TooLarge, ValidationError

RNG_ID = "numpy.Philox4x64-10;key=SeedSequence(seed).generate_state(2,uint64);counter=[0,row,0,0];v1"
COMPOSE_LIMIT = 10**6
SPAM_DIM = 50


@dataclass(frozen=True, eq=False)
class BumpFunctionSpec:
    d: int
    centers: np.ndarray  # (3, d)
    alpha1: float = 1.0 / 3.0
    alpha2: float = 1.0 / 3.0

    def __post_init__(self):
        v = np.array(self.centers, dtype=np.float64)
        if v.shape != (3, self.d):
            raise DimensionMismatch(f"centers must have shape (3, {self.d}), got {v.shape}")
        if not (0 <= self.alpha1 <= 1 and 0 <= self.alpha2 <= 1 and self.alpha1 + self.alpha2 <= 1 + 1e-15):
            raise ValidationError("mixture weights need alpha1, alpha2 in [0, 1] with alpha1 + alpha2 <= 1")
        v.setflags(write=False)
        object.__setattr__(self, "centers", v)

    @property
    def h(self):
        return 0.01 * math.sqrt(self.d)

    @property
    def weights(self):
        return np.array([self.alpha1, self.alpha2, max(0.0, 1.0 - self.alpha1 - self.alpha2)])

    @classmethod
    def default(cls, d, seed=0):
        """Equal weights, centers uniform on [-0.5, 0.5]^d from ``seed``."""
        centers = np.random.default_rng(seed).uniform(-0.5, 0.5, size=(3, d))
        return cls(d, centers)

    def describe(self):
        return {"d": self.d, "alpha1": self.alpha1, "alpha2": self.alpha2,
                "centers": self.centers.tolist(), "h_d": self.h}


def eval_bump_function(spec, x):
    """``log sum_k w_k h^-d exp(-|x - v_k|^2 / (2 h^2))`` for points on the last axis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (spec.d,):
        raise DimensionMismatch(f"points must have last axis {spec.d}, got shape {x.shape}")
    diff = x[..., None, :] - spec.centers
    expo = -np.sum(diff * diff, axis=-1) / (2.0 * spec.h**2)
    out = -spec.d * math.log(spec.h) + logsumexp(expo, axis=-1, b=spec.weights)
    if not np.all(np.isfinite(out)):
        raise NonFinite("bump function evaluation overflowed")
    return out


class AdditiveFunction:
    """Sum of a ``d``-variate component over all size-``d`` coordinate subsets of ``D``."""

    def __init__(self, component, D, d=None):
        if isinstance(component, BumpFunctionSpec):
            spec = component
            d = spec.d
            component = lambda z: eval_bump_function(spec, z)  # noqa: E731
        if d is None:
            raise ValidationError("d is required for a callable component")
        if not 1 <= d <= D:
            raise ValidationError(f"component order {d} must lie in 1..{D}")
        if math.comb(D, d) > COMPOSE_LIMIT:
            raise TooLarge(f"C({D}, {d}) = {math.comb(D, d)} terms exceeds {COMPOSE_LIMIT}")
        self.component = component
        self.D = D
        self.d = d
        self.subsets = list(itertools.combinations(range(D), d))

    def __call__(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.D:
            raise DimensionMismatch(f"expected {self.D} coordinates, got shape {X.shape}")
        total = np.zeros(X.shape[:-1])
        for S in self.subsets:
            total = total + self.component(X[..., list(S)])
        return total


def additive_compose(component, D, d=None):
    return AdditiveFunction(component, D, d)


@dataclass
class SyntheticDataset:
    X: np.ndarray
    Y: np.ndarray
    descriptor: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def n(self):
        return self.X.shape[0]

    def metadata(self):
        return {"generator": self.descriptor, "seed": self.seed, "rng": RNG_ID,
                "n": int(self.n), "D": int(self.X.shape[1])}


def _row_rng(key, row):
    return np.random.Generator(np.random.Philox(key=key, counter=[0, row, 0, 0]))


def sample_inputs(D, n, seed, with_noise=True):
    """Uniform [-1, 1]^D inputs and standard-normal draws, one substream per row."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    X = np.empty((n, D))
    z = np.empty(n)
    for i in range(n):
        g = _row_rng(key, i)
        X[i] = g.uniform(-1.0, 1.0, D)
        z[i] = g.standard_normal() if with_noise else 0.0
    return X, z


def sample_dataset(f, D, n, noise_sd=0.0, seed=0, descriptor=None):
    """Inputs uniform on [-1, 1]^D; ``Y = f(X) + N(0, noise_sd^2)``."""
    if noise_sd < 0:
        raise ValidationError("noise_sd must be nonnegative")
    X, z = sample_inputs(D, n, seed)
    Y = np.asarray(f(X), dtype=np.float64) + noise_sd * z
    desc = dict(descriptor or {})
    desc.setdefault("noise_sd", noise_sd)
    return SyntheticDataset(X, Y, desc, seed)


def bumps_dataset(D, d, n, noise_sd=0.0, seed=0, centers_seed=0):
    """The log-of-bumps function of order ``d`` summed over all C(D, d) subsets."""
    spec = BumpFunctionSpec.default(d, centers_seed)
    desc = {"name": "bumps-additive" if d < D else "bumps-full", "D": D, "bump": spec.describe(),
            "centers_seed": centers_seed}
    return sample_dataset(additive_compose(spec, D), D, n, noise_sd, seed, desc)


def f1(x):
    return -2.0 * np.sin(2.0 * x)


def f2(x):
    return x * x - 1.0 / 3.0


def f3(x):
    return x - 0.5


def f4(x):
    return np.exp(-x) + math.exp(-1.0) - 1.0


SPAM_TRUE_GROUPS = ((0,), (1,), (2,), (3,), (4, 5), (6, 7), (8, 9), (10, 11))


def spam_function(X):
    X = np.asarray(X, dtype=np.float64)
    return (f1(X[:, 0]) + f2(X[:, 1]) + f3(X[:, 2]) + f4(X[:, 3])
            + f1(X[:, 4] * X[:, 5]) + f2(X[:, 6] * X[:, 7])
            + f3(X[:, 8] * X[:, 9]) + f4(X[:, 10] * X[:, 11]))


def spam_selection_sample(n, seed=0):
    """50-dimensional sparse additive model with unit Gaussian noise.

    Returns the dataset and the eight true groups (0-based coordinates):
    four main effects and four pairwise product effects.
    """
    X, z = sample_inputs(SPAM_DIM, n, seed)
    Y = spam_function(X) + z
    desc = {"name": "spam-setting2", "D": SPAM_DIM, "noise_sd": 1.0}
    return SyntheticDataset(X, Y, desc, seed), list(SPAM_TRUE_GROUPS)
