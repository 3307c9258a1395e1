"""Additive kernels built from elementary symmetric polynomials (ESPs).

For one-dimensional similarities ``s_i = k_i(x_i, x'_i)`` the order-``d``
additive kernel is ``sum over |S| = d of prod_{i in S} s_i``, i.e. the
``d``-th elementary symmetric polynomial ``e_d(s)``. It is evaluated with
the Girard-Newton recurrence from the power sums ``p_m = sum_i s_i**m``::

    e_0 = 1,    e_m = (1/m) * sum_{i=1..m} (-1)**(i-1) * e_{m-i} * p_i

at ``O(D d + d**2)`` cost per pair instead of ``C(D, d)`` products.
All routines are vectorised over leading axes so a whole kernel matrix is
one pass of the recurrence over ``n x m`` arrays.
"""

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BadSubset, DimensionMismatch, NonFinite, OrderExceedsDimension, TooLarge, ValidationError

MIN_BANDWIDTH = 1e-12
BRUTE_FORCE_LIMIT = 10**7


class KernelVariant(str, enum.Enum):
    EXACT_ORDER = "exact"
    ALL_ORDERS = "upto"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"exact": cls.EXACT_ORDER, "exactorder": cls.EXACT_ORDER,
                   "upto": cls.ALL_ORDERS, "allordersupto": cls.ALL_ORDERS, "all": cls.ALL_ORDERS}
        key = str(value).lower().replace("-", "").replace("_", "")
        if key not in aliases:
            raise ValidationError(f"unknown kernel variant {value!r} (use 'exact' or 'upto')")
        return aliases[key]


@dataclass(frozen=True, eq=False)
class EspKernelSpec:
    """Order ``d`` ESP kernel over Gaussian base kernels.

    ``sigma_y`` multiplies the summed ESP value once, so the kernel scale
    does not depend on ``d``.
    """

    order: int
    bandwidths: np.ndarray
    sigma_y: float = 1.0
    variant: KernelVariant = KernelVariant.EXACT_ORDER

    def __post_init__(self):
        h = np.array(self.bandwidths, dtype=np.float64).reshape(-1)
        if h.size == 0:
            raise ValidationError("at least one bandwidth is required")
        if not np.all(np.isfinite(h)):
            raise NonFinite("bandwidths must be finite")
        if np.any(h < MIN_BANDWIDTH):
            raise ValidationError(f"bandwidths must be >= {MIN_BANDWIDTH:g}, got min {h.min():g}")
        h.setflags(write=False)
        object.__setattr__(self, "bandwidths", h)
        d = int(self.order)
        if d != self.order or not 1 <= d <= h.size:
            raise OrderExceedsDimension(f"order must be an integer in 1..{h.size}, got {self.order}")
        object.__setattr__(self, "order", d)
        if not (math.isfinite(self.sigma_y) and self.sigma_y > 0):
            raise ValidationError(f"sigma_y must be positive, got {self.sigma_y}")
        object.__setattr__(self, "sigma_y", float(self.sigma_y))
        object.__setattr__(self, "variant", KernelVariant.parse(self.variant))

    @property
    def dim(self):
        return self.bandwidths.size

    def n_terms(self):
        """Number of product terms the kernel sums over."""
        D, d = self.dim, self.order
        if self.variant is KernelVariant.EXACT_ORDER:
            return math.comb(D, d)
        return sum(math.comb(D, m) for m in range(1, d + 1))


def _check_vector(x, D, name):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (D,):
        raise DimensionMismatch(f"{name} must have shape ({D},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"{name} has non-finite entries")
    return x


def base_kernel_values(x, x2, spec):
    """Per-coordinate Gaussian similarities ``exp(-(x_i - x2_i)**2 / (2 h_i**2))``."""
    x = _check_vector(x, spec.dim, "x")
    x2 = _check_vector(x2, spec.dim, "x2")
    diff = x - x2
    return np.exp(-(diff * diff) / (2.0 * spec.bandwidths**2))


def power_sums(s, d):
    """Power sums ``p_1..p_d`` of ``s`` over its last axis; result shape ``s.shape[:-1] + (d,)``."""
    s = np.asarray(s, dtype=np.float64)
    out = np.empty(s.shape[:-1] + (d,))
    pw = np.ones_like(s)
    for m in range(d):
        pw = pw * s
        out[..., m] = pw.sum(axis=-1)
    return out


def _esp_leading(p):
    # recurrence with the order axis first, so every step works on contiguous arrays
    d = p.shape[0]
    e = np.empty((d + 1,) + p.shape[1:])
    e[0] = 1.0
    for m in range(1, d + 1):
        acc = e[m - 1] * p[0]
        for i in range(2, m + 1):
            if i % 2:
                acc += e[m - i] * p[i - 1]
            else:
                acc -= e[m - i] * p[i - 1]
        e[m] = acc / m
    return e


def esp_from_power_sums(p):
    """Girard-Newton recurrence: ``e_0..e_d`` from ``p_1..p_d`` (last axis)."""
    p = np.asarray(p, dtype=np.float64)
    return np.moveaxis(_esp_leading(np.moveaxis(p, -1, 0)), 0, -1)


def girard_newton_esp(s, d):
    """Elementary symmetric polynomials ``e_0..e_d`` of the entries of ``s``.

    ``s`` may be batched; the variables run along the last axis and the
    result has shape ``s.shape[:-1] + (d + 1,)``.

    >>> girard_newton_esp([1.0, 2.0, 3.0], 2)
    array([ 1.,  6., 11.])
    """
    s = np.asarray(s, dtype=np.float64)
    d = int(d)
    if s.ndim == 0:
        raise DimensionMismatch("s must have at least one axis")
    if d < 0 or d > s.shape[-1]:
        raise OrderExceedsDimension(f"order {d} is outside 0..{s.shape[-1]}")
    return esp_from_power_sums(power_sums(s, d))


def brute_force_esp(s, d):
    """``e_d(s)`` by explicit enumeration of all size-``d`` subsets (test oracle)."""
    s = [float(v) for v in np.asarray(s, dtype=np.float64).reshape(-1)]
    d = int(d)
    if d < 0 or d > len(s):
        raise OrderExceedsDimension(f"order {d} is outside 0..{len(s)}")
    if math.comb(len(s), d) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"C({len(s)}, {d}) subsets exceeds the enumeration limit")
    return math.fsum(math.prod(c) for c in itertools.combinations(s, d))


def _combine_orders(e, spec):
    # e has the order axis first
    if spec.variant is KernelVariant.EXACT_ORDER:
        val = e[spec.order]
    else:
        val = e[1:].sum(axis=0)
    return spec.sigma_y * val


def esp_kernel(x, x2, spec):
    """Kernel value for a single pair of points."""
    s = base_kernel_values(x, x2, spec)
    return float(_combine_orders(_esp_leading(power_sums(s, spec.order)), spec))


def _cross_block(A, B, spec):
    # power sums accumulated one coordinate at a time: memory stays at d*m*n
    d = spec.order
    p = np.zeros((d, A.shape[0], B.shape[0]))
    inv = 1.0 / (2.0 * spec.bandwidths**2)
    for k in range(spec.dim):
        diff = A[:, k, None] - B[None, :, k]
        s = np.exp(-(diff * diff) * inv[k])
        p[0] += s
        pw = s
        for m in range(1, d):
            pw = pw * s
            p[m] += pw
    return _combine_orders(_esp_leading(p), spec)


def _as_design(X, D, name):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, D)
    if X.ndim != 2 or X.shape[1] != D:
        raise DimensionMismatch(f"{name} must have shape (n, {D}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFinite(f"{name} has non-finite entries")
    return X


def kernel_cross_matrix(X_new, X_train, spec, n_jobs=1, block_rows=256):
    """Kernel values between rows of ``X_new`` (m x D) and ``X_train`` (n x D).

    Rows are processed in independent blocks, optionally on ``n_jobs``
    threads. Each entry is computed by the same arithmetic whatever the
    blocking, so the result is bitwise reproducible.
    """
    X_new = _as_design(X_new, spec.dim, "X_new")
    X_train = _as_design(X_train, spec.dim, "X_train")
    m, n = X_new.shape[0], X_train.shape[0]
    out = np.empty((m, n))
    if m == 0 or n == 0:
        return out
    starts = range(0, m, block_rows)

    def work(a):
        out[a:a + block_rows] = _cross_block(X_new[a:a + block_rows], X_train, spec)

    if n_jobs > 1 and m > block_rows:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(work, starts))
    else:
        for a in starts:
            work(a)
    return out


def kernel_matrix(X, spec, n_jobs=1):
    """Gram matrix of the ESP kernel; symmetric with a constant diagonal."""
    X = _as_design(X, spec.dim, "X")
    if X.shape[0] < 1:
        raise DimensionMismatch("kernel_matrix needs at least one row")
    return kernel_cross_matrix(X, X, spec, n_jobs=n_jobs)


def _check_subset(subset, D, sizes):
    idx = tuple(int(i) for i in subset)
    if len(set(idx)) != len(idx) or any(i < 0 or i >= D for i in idx):
        raise BadSubset(f"subset {idx} must hold distinct indices in 0..{D - 1}")
    if len(idx) not in sizes:
        raise BadSubset(f"subset {idx} has size {len(idx)}, expected one of {sorted(sizes)}")
    return idx


def _subset_sizes(spec):
    if spec.variant is KernelVariant.EXACT_ORDER:
        return {spec.order}
    return set(range(1, spec.order + 1))


def component_subset(subset, spec):
    """Validate ``subset`` as a component of ``spec``'s kernel; returns it as a tuple."""
    return _check_subset(subset, spec.dim, _subset_sizes(spec))


def subset_kernel_eval(x, x2, subset, spec):
    """Product of base-kernel values over ``subset`` (no ``sigma_y`` factor)."""
    idx = component_subset(subset, spec)
    s = base_kernel_values(x, x2, spec)
    return float(np.prod(s[list(idx)]))


def subset_kernel_matrix(X_new, X_train, subset, bandwidths):
    """Product Gaussian kernel over the coordinates in ``subset``.

    Used for the per-component evaluation of a fitted model and for the
    group kernels of the sparse additive solvers.
    """
    h = np.asarray(bandwidths, dtype=np.float64)
    X_new = _as_design(X_new, h.size, "X_new")
    X_train = _as_design(X_train, h.size, "X_train")
    idx = _check_subset(subset, h.size, set(range(1, h.size + 1)))
    sq = np.zeros((X_new.shape[0], X_train.shape[0]))
    for k in idx:
        diff = X_new[:, k, None] - X_train[None, :, k]
        sq += (diff * diff) / (2.0 * h[k] ** 2)
    return np.exp(-sq)
