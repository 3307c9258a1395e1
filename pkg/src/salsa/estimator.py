"""Order-d additive kernel ridge regression with ESP kernels.

The fitted function is ``f(x) = sum_i alpha_i k_d(x, X_i)`` where
``alpha = (K + lambda n I)^{-1} y`` on normalized data. Inputs and targets
are standardized internally; bandwidths follow ``h_i = c sigma_i n^{-1/5}``
computed on the normalized training inputs (so ``sigma_i = 1``).
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .data import NormalizationStats, fmt_real, normalization_stats
from .errors import DegenerateColumn, DimensionMismatch, Empty, NonFinite, TooFewRows, ValidationError
from .kernels import (EspKernelSpec, KernelVariant, component_subset, kernel_cross_matrix, kernel_matrix,
                      subset_kernel_matrix)

FORMAT_VERSION = 1
DEFAULT_C = 20.0
REFINEMENT_STEPS = 3


def compute_bandwidths(X, c=DEFAULT_C):
    """Per-column bandwidths ``c * sd_i * n**(-1/5)`` (population sd)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    n = X.shape[0]
    if n < 2:
        raise TooFewRows("bandwidths need at least 2 rows")
    if not c > 0:
        raise ValidationError(f"bandwidth multiplier c must be positive, got {c}")
    sd = X.std(axis=0)
    bad = np.flatnonzero(sd <= 1e-12 * np.maximum(1.0, np.abs(X.mean(axis=0))))
    if bad.size:
        raise DegenerateColumn(bad.tolist())
    return c * sd * n ** (-0.2)


@dataclass(frozen=True)
class SalsaConfig:
    order: int
    lam: float
    c: float = DEFAULT_C
    variant: KernelVariant = KernelVariant.EXACT_ORDER
    jitter_schedule: tuple = linalg.DEFAULT_JITTER_SCHEDULE
    n_jobs: int = 1

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValidationError(f"order d must be a positive integer, got {self.order}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValidationError(f"c must be positive, got {self.c}")
        object.__setattr__(self, "variant", KernelVariant.parse(self.variant))


@dataclass(frozen=True, eq=False)
class FittedSalsa:
    alpha: np.ndarray
    X_train: np.ndarray
    spec: EspKernelSpec
    lam: float
    normalization: NormalizationStats
    c: float = DEFAULT_C
    jitter: float = 0.0
    train_mse: float = math.nan
    residual_norm: float = math.nan
    n_jobs: int = field(default=1, compare=False)

    @property
    def n(self):
        return self.X_train.shape[0]

    @property
    def D(self):
        return self.X_train.shape[1]

    def predict(self, X_new):
        return predict(self, X_new)

    def to_document(self):
        return model_to_document(self)


def _prepare(X, Y, order):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    if X.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"X shape {X.shape} does not match {Y.shape[0]} targets")
    if X.shape[0] < 2:
        raise TooFewRows("fit needs at least 2 rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NonFinite("training data has non-finite values")
    if order > X.shape[1]:
        raise ValidationError(f"order d={order} exceeds the input dimension D={X.shape[1]}")
    return X, Y


def _solve_dual(K, yn, lam, jitter_schedule):
    n = K.shape[0]
    A = K + (lam * n) * np.eye(n)
    factor = linalg.cholesky_factor(A, jitter_schedule)
    alpha = linalg.solve_spd(factor, yn)
    r = yn - A @ alpha
    rnorm = np.linalg.norm(r)
    # refinement against the unjittered system
    for _ in range(REFINEMENT_STEPS):
        if rnorm <= 1e-14 * (1 + np.linalg.norm(yn)):
            break
        cand = alpha + linalg.solve_spd(factor, r)
        r_c = yn - A @ cand
        if np.linalg.norm(r_c) >= rnorm:
            break
        alpha, r, rnorm = cand, r_c, np.linalg.norm(r_c)
    return alpha, factor.jitter, float(rnorm)


def fit_lambda_path(X, Y, order, lambdas, c=DEFAULT_C, variant=KernelVariant.EXACT_ORDER,
                    jitter_schedule=linalg.DEFAULT_JITTER_SCHEDULE, n_jobs=1):
    """Fit one model per regularization value, sharing the kernel matrix."""
    X, Y = _prepare(X, Y, order)
    stats = normalization_stats(X, Y)
    Xn = stats.transform_X(X)
    yn = stats.transform_y(Y)
    spec = EspKernelSpec(order, compute_bandwidths(Xn, c), 1.0, variant)
    K = kernel_matrix(Xn, spec, n_jobs=n_jobs)
    Xn.setflags(write=False)
    models = []
    for lam in lambdas:
        lam = float(lam)
        if not (math.isfinite(lam) and lam > 0):
            raise ValidationError(f"lambda must be positive, got {lam}")
        alpha, jitter, rnorm = _solve_dual(K, yn, lam, jitter_schedule)
        pred = stats.inverse_y(K @ alpha)
        alpha.setflags(write=False)
        models.append(FittedSalsa(alpha, Xn, spec, lam, stats, float(c), jitter,
                                  mse(pred, Y), rnorm, n_jobs))
    return models


def fit(X, Y, config):
    """Fit SALSA with a fixed order and regularization (see :class:`SalsaConfig`)."""
    return fit_lambda_path(X, Y, config.order, [config.lam], config.c, config.variant,
                           config.jitter_schedule, config.n_jobs)[0]


def _normalized_inputs(model, X_new):
    X_new = np.asarray(X_new, dtype=np.float64)
    if X_new.ndim == 1 and X_new.size == 0:
        X_new = X_new.reshape(0, model.D)
    if X_new.ndim != 2 or X_new.shape[1] != model.D:
        raise DimensionMismatch(f"model expects {model.D} feature columns, got shape {X_new.shape}")
    return model.normalization.transform_X(X_new)


def predict(model, X_new):
    Z = _normalized_inputs(model, X_new)
    Kc = kernel_cross_matrix(Z, model.X_train, model.spec, n_jobs=model.n_jobs)
    return model.normalization.inverse_y(Kc @ model.alpha)


def predict_path(models, X_new):
    """Predictions (m x len(models)) for models that share training inputs and kernel."""
    first = models[0]
    Z = _normalized_inputs(first, X_new)
    Kc = kernel_cross_matrix(Z, first.X_train, first.spec, n_jobs=first.n_jobs)
    return first.normalization.inverse_y(Kc @ np.column_stack([m.alpha for m in models]))


def evaluate_component(model, subset, X_new):
    """One additive component ``sum_i alpha_i k_S(x, X_i)`` in normalized target units."""
    Z = _normalized_inputs(model, X_new)
    component_subset(subset, model.spec)
    Ks = subset_kernel_matrix(Z, model.X_train, subset, model.spec.bandwidths)
    return model.spec.sigma_y * (Ks @ model.alpha)


def mse(pred, truth):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    truth = np.asarray(truth, dtype=np.float64).reshape(-1)
    if pred.shape != truth.shape:
        raise DimensionMismatch(f"{pred.size} predictions vs {truth.size} targets")
    if pred.size == 0:
        raise Empty("mse of empty vectors")
    diff = pred - truth
    return float(np.mean(diff * diff))


# -- persistence -----------------------------------------------------------

def _dump(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_dump(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    if isinstance(obj, (float, np.floating)):
        return fmt_real(obj)
    if isinstance(obj, (bool, str, type(None))):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    raise TypeError(f"cannot serialize {type(obj)}")


def model_to_document(model):
    """Versioned JSON text for a fitted model; reals written with 17 digits."""
    st = model.normalization
    doc = {
        "format_version": FORMAT_VERSION,
        "d": model.spec.order,
        "lambda": model.lam,
        "c": model.c,
        "variant": model.spec.variant.value,
        "bandwidths": [float(v) for v in model.spec.bandwidths],
        "sigma_y": model.spec.sigma_y,
        "normalization": {
            "means": [float(v) for v in st.means],
            "sds": [float(v) for v in st.sds],
            "y_mean": st.y_mean,
            "y_sd": st.y_sd,
        },
        "alpha": [float(v) for v in model.alpha],
        "X_train": {"rows": model.n, "cols": model.D,
                    "data": [float(v) for v in model.X_train.reshape(-1)]},
        "jitter": model.jitter,
        "train_mse": model.train_mse,
    }
    return _dump(doc) + "\n"


def model_from_document(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model document is not valid JSON: {exc}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"unsupported model format_version {version!r}")
    try:
        xt = doc["X_train"]
        X = np.array(xt["data"], dtype=np.float64).reshape(xt["rows"], xt["cols"])
        st = doc["normalization"]
        stats = NormalizationStats(np.array(st["means"], dtype=np.float64), np.array(st["sds"], dtype=np.float64),
                                   float(st["y_mean"]), float(st["y_sd"]))
        spec = EspKernelSpec(doc["d"], doc["bandwidths"], doc["sigma_y"], doc["variant"])
        alpha = np.array(doc["alpha"], dtype=np.float64)
        lam, c, jitter = float(doc["lambda"]), float(doc["c"]), float(doc["jitter"])
        train_mse = float(doc.get("train_mse", math.nan))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed model document: {exc}") from None
    if alpha.shape != (X.shape[0],):
        raise ValidationError("alpha length does not match the stored training rows")
    for a in (X, alpha):
        a.setflags(write=False)
    return FittedSalsa(alpha, X, spec, lam, stats, c, jitter, train_mse)


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_document(model))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_document(fh.read())
