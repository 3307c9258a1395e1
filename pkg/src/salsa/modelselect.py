"""Cross-validation over the ridge penalty and incremental search over the order d."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGrid, TooFewRows, ValidationError
from .estimator import DEFAULT_C, fit_lambda_path, mse, predict_path
from .kernels import KernelVariant

DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class LambdaGrid:
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise EmptyGrid("lambda grid is empty")
        if any(not (math.isfinite(v) and v > 0) for v in vals):
            raise ValidationError("lambda grid values must be positive and finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("lambda grid must be strictly increasing (no duplicates)")
        object.__setattr__(self, "values", vals)

    @classmethod
    def logspace(cls, lo=1e-6, hi=1e1, num=13):
        return cls(tuple(np.logspace(math.log10(lo), math.log10(hi), num)))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def kfold_indices(n, folds, seed):
    """Validation index blocks: contiguous blocks of a seeded permutation."""
    if folds < 2:
        raise ValidationError(f"folds must be >= 2, got {folds}")
    if n < folds:
        raise TooFewRows(f"{n} rows cannot be split into {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(block) for block in np.array_split(perm, folds)]


@dataclass
class KFoldResult:
    order: int
    lambdas: tuple
    fold_mse: np.ndarray  # (folds, len(lambdas))
    folds: int
    seed: int

    @property
    def mean_mse(self):
        return self.fold_mse.mean(axis=0)

    @property
    def std_err(self):
        k = self.fold_mse.shape[0]
        return self.fold_mse.std(axis=0, ddof=1) / math.sqrt(k)

    @property
    def best_index(self):
        # argmin returns the first minimum, i.e. the smallest lambda on ties
        return int(np.argmin(self.mean_mse))

    @property
    def best_lambda(self):
        return self.lambdas[self.best_index]

    @property
    def best_mse(self):
        return float(self.mean_mse[self.best_index])


def kfold_cv(X, Y, d, grid=None, folds=DEFAULT_FOLDS, seed=0, c=DEFAULT_C,
             variant=KernelVariant.EXACT_ORDER, n_jobs=1):
    """K-fold CV error of the order-``d`` model for every lambda in ``grid``.

    Normalization and bandwidths are recomputed on each fold's training
    part, so the validation rows never influence the fitted model.
    """
    grid = LambdaGrid.logspace() if grid is None else grid
    if not isinstance(grid, LambdaGrid):
        grid = LambdaGrid(tuple(grid))
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    n = X.shape[0]
    blocks = kfold_indices(n, folds, seed)
    out = np.empty((folds, len(grid)))
    for f, val in enumerate(blocks):
        train = np.setdiff1d(np.arange(n), val, assume_unique=True)
        models = fit_lambda_path(X[train], Y[train], d, grid.values, c=c, variant=variant, n_jobs=n_jobs)
        preds = predict_path(models, X[val])
        for j in range(len(grid)):
            out[f, j] = mse(preds[:, j], Y[val])
    return KFoldResult(d, grid.values, out, folds, seed)


def incremental_order_search(score, d_max, patience=1):
    """Evaluate ``score(d)`` for d = 1, 2, ... and stop once the error turns up.

    The search stops as soon as the current ``d`` is ``patience`` steps
    past the best ``d`` seen so far (ties keep the smaller ``d``), or at
    ``d_max``. Returns ``(best_d, {d: score})``.
    """
    if d_max < 1:
        raise ValidationError(f"d_max must be >= 1, got {d_max}")
    if patience < 1:
        raise ValidationError(f"patience must be >= 1, got {patience}")
    trace = {}
    best = None
    for d in range(1, d_max + 1):
        trace[d] = float(score(d))
        if best is None or trace[d] < trace[best]:
            best = d
        if d - best >= patience:
            break
    return best, trace


@dataclass
class CvReport:
    """Per-(d, lambda) CV table plus the chosen pair."""

    results: dict = field(default_factory=dict)  # d -> KFoldResult
    chosen_d: int = 0
    chosen_lambda: float = math.nan
    folds: int = DEFAULT_FOLDS
    seed: int = 0

    @property
    def trace(self):
        return {d: r.best_mse for d, r in self.results.items()}

    def rows(self):
        for d, r in sorted(self.results.items()):
            for lam, m, se in zip(r.lambdas, r.mean_mse, r.std_err):
                yield d, lam, float(m), float(se)


def search_order(X, Y, grid=None, folds=DEFAULT_FOLDS, d_max=None, seed=0, patience=1,
                 c=DEFAULT_C, variant=KernelVariant.EXACT_ORDER, n_jobs=1):
    """Choose ``(d, lambda)`` by cross-validation with an increasing-order search."""
    X = np.asarray(X, dtype=np.float64)
    D = X.shape[1]
    d_max = D if d_max is None else int(d_max)
    if d_max > D:
        raise ValidationError(f"d_max={d_max} exceeds the input dimension D={D}")
    report = CvReport(folds=folds, seed=seed)

    def score(d):
        report.results[d] = kfold_cv(X, Y, d, grid, folds, seed, c, variant, n_jobs)
        return report.results[d].best_mse

    best, _ = incremental_order_search(score, d_max, patience)
    report.chosen_d = best
    report.chosen_lambda = report.results[best].best_lambda
    return report
