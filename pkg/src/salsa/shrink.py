"""Group-sparse additive kernel regression ("shrunk" SALSA).

Each candidate component ``j`` has a kernel matrix ``K_j`` and dual block
``alpha_j``. The solvers minimize ``F = G + Psi`` with

    G(alpha)   = 1/2 |y - sum_j K_j alpha_j|^2 + lambda1/2 sum_j alpha_j' K_j alpha_j
    Psi(alpha) = lambda2 sum_j |alpha_j|_2

so ``grad_j G = K_j (lambda1 alpha_j - r)`` with residual ``r`` and the
diagonal Hessian block is ``K_j K_j + lambda1 K_j``.

Solvers: subgradient, proximal gradient (optionally accelerated with
function-value restart), block coordinate gradient descent with a scaled
identity block Hessian, and exact block coordinate descent through a
one-dimensional secular equation in the eigenbasis of each block Hessian.
"""

import enum
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatch, MaxIterations, SecularNoRoot, ValidationError
from .estimator import DEFAULT_C, compute_bandwidths
from .kernels import subset_kernel_matrix


class Solver(str, enum.Enum):
    SUBGRADIENT = "subgradient"
    PROXGRAD = "proxgrad"
    ACCEL_PROXGRAD = "accel-proxgrad"
    BCGD = "bcgd"
    EXACT_BCD = "exact-bcd"

    @classmethod
    def parse(cls, value):
        try:
            return cls(value)
        except ValueError:
            raise ValidationError(f"unknown solver {value!r}; choose from {[s.value for s in cls]}") from None


@dataclass(frozen=True)
class ShrinkConfig:
    lambda1: float = 0.0
    lambda2: float = 0.0
    solver: Solver = Solver.PROXGRAD
    max_iter: int = 1000
    tol: float = 1e-8
    beta: float = 0.5
    step0: float | None = None  # None: 1 / (power-iteration estimate of the Lipschitz constant)

    def __post_init__(self):
        object.__setattr__(self, "solver", Solver.parse(self.solver))
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValidationError("lambda1 and lambda2 must be nonnegative")
        if not 0 < self.beta < 1:
            raise ValidationError("backtracking factor beta must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.step0 is not None and not self.step0 > 0:
            raise ValidationError("step0 must be positive")


@dataclass
class SolverTrace:
    objective: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)
    alpha: np.ndarray | None = None
    reason: str = ""
    step: float = math.nan
    best: list = field(default_factory=list)  # running best (subgradient)

    @property
    def final_objective(self):
        return min(self.objective) if self.best else self.objective[-1]

    @property
    def iterations(self):
        return len(self.objective) - 1


def _psd_repair(K):
    K = 0.5 * (K + K.T)
    scale = max(float(np.mean(np.diag(K))), 1e-300)
    try:
        np.linalg.cholesky(K + 1e-10 * scale * np.eye(K.shape[0]))
        return K
    except np.linalg.LinAlgError:
        w, V = linalg.eigen_sym(K)
        return (V * np.clip(w, 0.0, None)) @ V.T


class GroupKernelDesign:
    """Stack of per-group kernel matrices ``(M, n, n)`` with targets ``y``."""

    def __init__(self, kernels, y, groups=None, repair=True, copy=True):
        K = np.array(kernels, dtype=np.float64) if copy else np.asarray(kernels, dtype=np.float64)
        if K.ndim == 2:
            K = K[None]
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if K.ndim != 3 or K.shape[1] != K.shape[2] or K.shape[1] != y.size:
            raise DimensionMismatch(f"kernels must be (M, n, n) with n = {y.size}, got {K.shape}")
        for j in range(K.shape[0]):
            linalg.check_symmetric(K[j], name=f"kernel {j}")
            if repair:
                K[j] = _psd_repair(K[j])
        self.K = K
        self.y = y
        self.groups = [tuple(g) for g in groups] if groups is not None else [(j,) for j in range(K.shape[0])]
        if len(self.groups) != K.shape[0]:
            raise DimensionMismatch("one group descriptor per kernel matrix is required")
        self._eig = None

    @property
    def M(self):
        return self.K.shape[0]

    @property
    def n(self):
        return self.K.shape[1]

    def zeros(self):
        return np.zeros((self.M, self.n))

    def fitted(self, alpha):
        return np.einsum("jab,jb->a", self.K, alpha)

    def block_products(self, V):
        """``K_j v_j`` for every block, shape (M, n)."""
        return np.einsum("jab,jb->ja", self.K, V)

    def eig(self):
        if self._eig is None:
            pairs = [linalg.eigen_sym(k) for k in self.K]
            self._eig = [(np.clip(w, 0.0, None), V) for w, V in pairs]
        return self._eig

    def kill_threshold(self):
        """``max_j |K_j' y|``: for larger lambda2 the all-zero solution is optimal."""
        return float(np.max(np.linalg.norm(self.K @ self.y, axis=1)))

    def lipschitz(self, lambda1=0.0, iters=100, seed=0):
        """Power-iteration estimate of the largest eigenvalue of the Hessian of G."""
        v = np.random.default_rng(seed).standard_normal((self.M, self.n))
        v /= np.linalg.norm(v)
        est = 0.0
        for _ in range(iters):
            Kv = self.block_products(v)
            w = self.block_products(np.broadcast_to(Kv.sum(axis=0), v.shape)) + lambda1 * Kv
            est_new = float(np.linalg.norm(w))
            if est_new == 0.0:
                return 1.0
            v = w / est_new
            if abs(est_new - est) <= 1e-6 * est_new:
                est = est_new
                break
            est = est_new
        return est


def _check_alpha(alpha, design):
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (design.M, design.n):
        raise DimensionMismatch(f"alpha must have shape ({design.M}, {design.n}), got {alpha.shape}")
    return alpha


def smooth_objective(alpha, design, lambda1):
    alpha = _check_alpha(alpha, design)
    Ka = design.block_products(alpha)
    r = design.y - Ka.sum(axis=0)
    return 0.5 * float(r @ r) + 0.5 * lambda1 * float(np.sum(alpha * Ka))


def smooth_gradient(alpha, design, lambda1):
    alpha = _check_alpha(alpha, design)
    r = design.y - design.fitted(alpha)
    return design.block_products(lambda1 * alpha - r[None, :])


def shrink_objective(alpha, design, lambda1, lambda2):
    alpha = _check_alpha(alpha, design)
    return smooth_objective(alpha, design, lambda1) + lambda2 * float(np.sum(np.linalg.norm(alpha, axis=1)))


def group_prox(v, threshold):
    """Group soft-threshold: the prox of ``threshold * |.|_2``."""
    v = np.asarray(v, dtype=np.float64)
    if threshold < 0:
        raise ValidationError("threshold must be nonnegative")
    norm = float(np.linalg.norm(v))
    if norm <= threshold:
        return np.zeros_like(v)
    return (1.0 - threshold / norm) * v


def prox_blocks(V, threshold):
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > threshold, 1.0 - threshold / norms, 0.0)
    return scale * V


def prox_residual(alpha, design, lambda1, lambda2, step):
    """``|alpha - prox(alpha - step grad G)|``, zero exactly at a minimizer."""
    g = smooth_gradient(alpha, design, lambda1)
    return float(np.linalg.norm(alpha - prox_blocks(alpha - step * g, step * lambda2)))


def _penalty(alpha, lambda2):
    return lambda2 * float(np.sum(np.linalg.norm(alpha, axis=1)))


def _initial_step(design, config):
    if config.step0 is not None:
        return config.step0
    return 1.0 / max(design.lipschitz(config.lambda1), 1e-300)


def _start(design, alpha0):
    return design.zeros() if alpha0 is None else _check_alpha(alpha0, design).copy()


def _prox_step(z, Gz, gz, design, config, t):
    """Backtracking prox-gradient step from ``z``; returns (x, G(x), t)."""
    while True:
        x = prox_blocks(z - t * gz, t * config.lambda2)
        diff = x - z
        Gx = smooth_objective(x, design, config.lambda1)
        if Gx <= Gz + float(np.sum(gz * diff)) + float(np.sum(diff * diff)) / (2.0 * t) + 1e-12 * abs(Gz):
            return x, Gx, t
        t *= config.beta
        if t < 1e-300:
            return z, Gz, t


def prox_grad(design, config, alpha0=None):
    """Proximal gradient with backtracking; FISTA with restart for ``accel-proxgrad``."""
    accel = config.solver is Solver.ACCEL_PROXGRAD
    if config.solver not in (Solver.PROXGRAD, Solver.ACCEL_PROXGRAD):
        raise ValidationError(f"prox_grad cannot run solver {config.solver.value}")
    t0 = time.perf_counter()
    lam1, lam2 = config.lambda1, config.lambda2
    x = _start(design, alpha0)
    Gx = smooth_objective(x, design, lam1)
    Fx = Gx + _penalty(x, lam2)
    trace = SolverTrace([Fx], [0.0])
    t = _initial_step(design, config)
    z, theta = x, 1.0
    reason = "max_iterations"
    for _ in range(config.max_iter):
        Gz = Gx if z is x else smooth_objective(z, design, lam1)
        x_new, G_new, t = _prox_step(z, Gz, smooth_gradient(z, design, lam1), design, config, t)
        F_new = G_new + _penalty(x_new, lam2)
        if accel and F_new > Fx:
            # function-value restart: plain step from the current iterate
            z, theta = x, 1.0
            x_new, G_new, t = _prox_step(x, Gx, smooth_gradient(x, design, lam1), design, config, t)
            F_new = G_new + _penalty(x_new, lam2)
        if F_new > Fx:
            x_new, G_new, F_new = x, Gx, Fx
        moved = float(np.linalg.norm(x_new - x))
        from_z = float(np.linalg.norm(x_new - z))
        if accel:
            theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            z = x_new + ((theta - 1.0) / theta_new) * (x_new - x)
            theta = theta_new
        else:
            z = x_new
        x, Gx, Fx = x_new, G_new, F_new
        trace.objective.append(Fx)
        trace.elapsed.append(time.perf_counter() - t0)
        scale = config.tol * (1.0 + float(np.linalg.norm(x)))
        if moved <= scale and from_z <= scale:
            reason = "converged"
            break
    trace.alpha, trace.reason, trace.step = x, reason, t
    return trace


def block_hessian_diag_max(design, lambda1):
    """``h_j = max diag(K_j K_j + lambda1 K_j)`` for every block."""
    sq = np.einsum("jab,jab->ja", design.K, design.K)
    diag = np.einsum("jaa->ja", design.K)
    return np.max(sq + lambda1 * diag, axis=1)


class _BlockState:
    """Residual and per-block penalty pieces, updated one block at a time."""

    def __init__(self, design, alpha, lambda1, lambda2):
        self.design, self.lambda1, self.lambda2 = design, lambda1, lambda2
        self.alpha = alpha
        self.Ka = design.block_products(alpha)
        self.r = design.y - self.Ka.sum(axis=0)
        self.quad = np.sum(alpha * self.Ka, axis=1)
        self.norms = np.linalg.norm(alpha, axis=1)

    def objective(self):
        return (0.5 * float(self.r @ self.r) + 0.5 * self.lambda1 * float(self.quad.sum())
                + self.lambda2 * float(self.norms.sum()))

    def trial(self, j, new_block, new_Kblock):
        r = self.r + self.Ka[j] - new_Kblock
        quad = float(new_block @ new_Kblock)
        norm = float(np.linalg.norm(new_block))
        F = (0.5 * float(r @ r) + 0.5 * self.lambda1 * (float(self.quad.sum()) - self.quad[j] + quad)
             + self.lambda2 * (float(self.norms.sum()) - self.norms[j] + norm))
        return F, (r, quad, norm)

    def commit(self, j, new_block, new_Kblock, parts):
        self.r, self.quad[j], self.norms[j] = parts
        self.alpha[j] = new_block
        self.Ka[j] = new_Kblock


def bcgd(design, config, alpha0=None, sigma=0.1):
    """Cyclic block coordinate gradient descent with ``H_j = h_j I``."""
    if config.solver is not Solver.BCGD:
        raise ValidationError(f"bcgd cannot run solver {config.solver.value}")
    t0 = time.perf_counter()
    lam1, lam2 = config.lambda1, config.lambda2
    st = _BlockState(design, _start(design, alpha0), lam1, lam2)
    h = np.maximum(block_hessian_diag_max(design, lam1), 1e-300)
    F = st.objective()
    trace = SolverTrace([F], [0.0])
    reason = "max_iterations"
    for _ in range(config.max_iter):
        F_start = F
        max_move = 0.0
        for j in range(design.M):
            a = st.alpha[j]
            g = design.K[j] @ (lam1 * a - st.r)
            d = group_prox(a - g / h[j], lam2 / h[j]) - a
            if not np.any(d):
                continue
            Kd = design.K[j] @ d
            delta = float(g @ d) + lam2 * (float(np.linalg.norm(a + d)) - st.norms[j])
            t = 1.0
            while t > 1e-12:
                cand, Kcand = a + t * d, st.Ka[j] + t * Kd
                F_new, parts = st.trial(j, cand, Kcand)
                if F_new <= F + sigma * t * delta:
                    st.commit(j, cand, Kcand, parts)
                    F = F_new
                    max_move = max(max_move, t * float(np.linalg.norm(d)))
                    break
                t *= config.beta
        F = st.objective()
        trace.objective.append(F)
        trace.elapsed.append(time.perf_counter() - t0)
        if F_start - F <= config.tol * (1.0 + abs(F)) and max_move <= config.tol * (1.0 + float(np.linalg.norm(st.alpha))):
            reason = "converged"
            break
    trace.alpha, trace.reason = st.alpha, reason
    return trace


def secular_root(c, a, lambda2, tol=1e-14, max_iter=200):
    """Solve ``|c / (t a + lambda2)| = 1`` for ``t > 0`` (``a >= 0``).

    Newton's method on ``1/|w(t)| - 1``, safeguarded by bisection inside a
    bracket. Raises :class:`SecularNoRoot` when the norm never drops to 1.
    """
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)

    def psi(t):
        w = c / (t * a + lambda2)
        nw = float(np.linalg.norm(w))
        dn = -float(np.sum(w * w * a / (t * a + lambda2))) / nw
        return 1.0 / nw - 1.0, -dn / (nw * nw)

    lo, hi = 0.0, 1.0
    val, _ = psi(lo)
    if val >= 0:
        raise SecularNoRoot("|c| <= lambda2: the block is zero")
    for _ in range(2000):
        if psi(hi)[0] >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise SecularNoRoot("no finite root: the block objective is unbounded")
    t = lo
    for _ in range(max_iter):
        val, der = psi(t)
        if abs(val) <= tol:
            return t
        if val < 0:
            lo = t
        else:
            hi = t
        t_new = t - val / der if der > 0 else 0.5 * (lo + hi)
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * hi:
            return t_new
        t = t_new
    return t


def exact_block_solution(b, w, V, lambda1_eigs, lambda2):
    """Minimize ``1/2 x'Ax + b'x + lambda2 |x|`` with ``A = V diag(lambda1_eigs) V'``.

    With ``V=None``, ``b`` is already in eigen-coordinates (``V'b``) and
    the minimizer is returned in those coordinates.
    """
    if float(np.linalg.norm(b)) <= lambda2:
        return np.zeros_like(b)
    c = b if V is None else V.T @ b
    a = lambda1_eigs
    if lambda2 == 0.0:
        keep = a > 1e-12 * max(float(a.max()), 1e-300)
        coef = np.zeros_like(c)
        coef[keep] = -c[keep] / a[keep]
    else:
        try:
            t = secular_root(c, a, lambda2)
        except SecularNoRoot:
            return np.zeros_like(b)
        coef = -t * c / (t * a + lambda2)
    return coef if V is None else V @ coef


def exact_bcd(design, config, alpha0=None, rank_rtol=1e-13):
    """Cyclic exact block minimization via the one-dimensional secular equation.

    Each block lives in the eigenbasis of its kernel, truncated to
    eigenvalues above ``rank_rtol`` times the largest. Directions outside
    that span cannot lower the fit and only add penalty, so the optimum has
    no component there; the truncation makes a block update O(n r_j)
    instead of O(n^2).
    """
    if config.solver is not Solver.EXACT_BCD:
        raise ValidationError(f"exact_bcd cannot run solver {config.solver.value}")
    t0 = time.perf_counter()
    lam1, lam2 = config.lambda1, config.lambda2
    basis = []
    for mu, V in design.eig():
        keep = mu > rank_rtol * max(float(mu.max(initial=0.0)), 1e-300)
        basis.append((mu[keep], V[:, keep]))
    start = _start(design, alpha0)
    beta = [V.T @ start[j] for j, (_, V) in enumerate(basis)]
    r = design.y - sum(V @ (mu * b) for (mu, V), b in zip(basis, beta))
    quad = np.array([float(np.sum(mu * b * b)) for (mu, _), b in zip(basis, beta)])
    norms = np.array([float(np.linalg.norm(b)) for b in beta])

    def objective():
        return 0.5 * float(r @ r) + 0.5 * lam1 * float(quad.sum()) + lam2 * float(norms.sum())

    F = objective()
    trace = SolverTrace([F], [0.0])
    reason = "max_iterations"
    for _ in range(config.max_iter):
        F_start = F
        for j, (mu, V) in enumerate(basis):
            if mu.size == 0:
                continue
            old = beta[j]
            c = -mu * (V.T @ r + mu * old)
            new = exact_block_solution(c, mu, None, mu * mu + lam1 * mu, lam2)
            delta = mu * (new - old)
            if not np.any(delta) and np.array_equal(new, old):
                continue
            r_new = r - V @ delta
            q_new = float(np.sum(mu * new * new))
            n_new = float(np.linalg.norm(new))
            F_new = (0.5 * float(r_new @ r_new) + 0.5 * lam1 * (float(quad.sum()) - quad[j] + q_new)
                     + lam2 * (float(norms.sum()) - norms[j] + n_new))
            if F_new <= F:
                r, beta[j], quad[j], norms[j], F = r_new, new, q_new, n_new, F_new
        # recompute from scratch once per sweep to stop drift in the running residual
        r = design.y - sum(V @ (mu * b) for (mu, V), b in zip(basis, beta))
        F = objective()
        trace.objective.append(F)
        trace.elapsed.append(time.perf_counter() - t0)
        if F_start - F <= config.tol * (1.0 + abs(F)):
            reason = "converged"
            break
    trace.alpha = np.stack([V @ b for (_, V), b in zip(basis, beta)])
    trace.reason = reason
    return trace


def subgradient_solve(design, config, alpha0=None):
    """Subgradient method with steps ``t0 / sqrt(k)``; keeps the best iterate."""
    if config.solver is not Solver.SUBGRADIENT:
        raise ValidationError(f"subgradient_solve cannot run solver {config.solver.value}")
    t0 = time.perf_counter()
    lam1, lam2 = config.lambda1, config.lambda2
    x = _start(design, alpha0)
    F = shrink_objective(x, design, lam1, lam2)
    best_x, best_F = x.copy(), F
    trace = SolverTrace([F], [0.0], best=[F])
    step0 = _initial_step(design, config)
    reason = "max_iterations"
    for k in range(1, config.max_iter + 1):
        g = smooth_gradient(x, design, lam1)
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        g += lam2 * np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)
        if not np.any(g):
            reason = "converged"
            break
        x = x - (step0 / math.sqrt(k)) * g
        F = shrink_objective(x, design, lam1, lam2)
        if F < best_F:
            best_x, best_F = x.copy(), F
        trace.objective.append(F)
        trace.best.append(best_F)
        trace.elapsed.append(time.perf_counter() - t0)
    trace.alpha, trace.reason, trace.step = best_x, reason, step0
    return trace


def solve(design, config, alpha0=None, strict=False):
    """Dispatch on ``config.solver``; ``strict`` turns an iteration cap into :class:`MaxIterations`."""
    runner = {
        Solver.SUBGRADIENT: subgradient_solve,
        Solver.PROXGRAD: prox_grad,
        Solver.ACCEL_PROXGRAD: prox_grad,
        Solver.BCGD: bcgd,
        Solver.EXACT_BCD: exact_bcd,
    }[config.solver]
    trace = runner(design, config, alpha0)
    if strict and trace.reason == "max_iterations" and config.solver is not Solver.SUBGRADIENT:
        raise MaxIterations(f"{config.solver.value} hit max_iter={config.max_iter}")
    return trace


def selected_groups(alpha, tau=0.0):
    """Indices of blocks whose l2 norm exceeds ``tau``."""
    if tau < 0:
        raise ValidationError("tau must be nonnegative")
    return [int(j) for j in np.flatnonzero(np.linalg.norm(np.asarray(alpha), axis=1) > tau)]


@dataclass
class PathResult:
    lambdas: list
    norms: np.ndarray  # (len(lambdas), M)
    objectives: list
    reasons: list
    groups: list

    def selected(self, k, tau=0.0):
        return [int(j) for j in np.flatnonzero(self.norms[k] > tau)]


def lambda_path(design, config, lambda2_grid, strict=False, stop=None):
    """Solve along a decreasing ``lambda2`` grid with warm starts.

    ``stop(k, alpha)`` may end the path early after grid point ``k``; the
    result then covers only the points solved so far.
    """
    grid = [float(v) for v in lambda2_grid]
    if not grid:
        raise ValidationError("lambda2 grid is empty")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("lambda2 grid must be strictly decreasing")
    alpha = design.zeros()
    norms, objs, reasons = [], [], []
    for lam2 in grid:
        cfg = ShrinkConfig(config.lambda1, lam2, config.solver, config.max_iter, config.tol,
                           config.beta, config.step0)
        tr = solve(design, cfg, alpha, strict=strict)
        alpha = tr.alpha
        norms.append(np.linalg.norm(alpha, axis=1))
        objs.append(tr.final_objective)
        reasons.append(tr.reason)
        if stop is not None and stop(len(norms) - 1, alpha):
            break
    return PathResult(grid[:len(norms)], np.array(norms), objs, reasons, list(design.groups))


def geometric_grid(hi, num=20, ratio=1e-2):
    """Decreasing geometric grid from ``hi`` down to ``ratio * hi``."""
    return list(np.geomspace(hi, hi * ratio, num))


def candidate_groups(D, pairs="all", decoys=0, pair_pool=None, seed=0):
    """Singletons plus pairs.

    ``pairs="all"`` adds every pair; ``pairs="restricted"`` adds all pairs
    among the first ``pair_pool`` coordinates plus ``decoys`` pairs drawn
    at random (seeded) from the remaining ones.
    """
    singles = [(i,) for i in range(D)]
    every = list(itertools.combinations(range(D), 2))
    if pairs == "all":
        return singles + every
    if pairs == "none":
        return singles
    if pairs != "restricted":
        raise ValidationError(f"unknown pair scheme {pairs!r}")
    pool = D if pair_pool is None else pair_pool
    inner = [p for p in every if p[1] < pool]
    outer = [p for p in every if p[1] >= pool]
    rng = np.random.default_rng(seed)
    pick = sorted(rng.choice(len(outer), size=min(decoys, len(outer)), replace=False).tolist())
    return singles + inner + [outer[i] for i in pick]


def build_group_design(X, y, groups, c=DEFAULT_C, center=True, center_kernels=False, scale="none"):
    """Product-Gaussian kernel per group, bandwidths ``c sd_i n^(-1/5)`` per coordinate.

    ``center`` subtracts the mean of ``y``. ``center_kernels`` replaces each
    ``K_j`` by ``H K_j H`` with ``H = I - 11'/n``, removing the constant
    function from every group. ``scale="frobenius"`` rescales each kernel
    to ``|K_j|_F = n`` so that pure-noise groups have comparable scores
    ``|K_j' r|`` regardless of their dimension.
    """
    if scale not in ("none", "frobenius"):
        raise ValidationError(f"unknown kernel scaling {scale!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = X.shape[0]
    h = compute_bandwidths(X, c)
    K = np.empty((len(groups), n, n))
    for j, g in enumerate(groups):
        Kj = subset_kernel_matrix(X, X, g, h)
        if center_kernels:
            Kj -= Kj.mean(axis=0, keepdims=True)
            Kj -= Kj.mean(axis=1, keepdims=True)
        if scale == "frobenius":
            Kj *= n / max(float(np.linalg.norm(Kj)), 1e-300)
        K[j] = Kj
    yc = y - y.mean() if center else y
    return GroupKernelDesign(K, yc, groups, copy=False)


def support_metrics(selected, groups, truth, universe=None):
    """True/false positive rates of ``selected`` group indices against true groups.

    ``universe`` is the total number of candidate groups when ``groups`` is a
    restricted subset of them; groups left out of the design count as true
    negatives. By default the negatives are those present in ``groups``.
    """
    truth = {tuple(g) for g in truth}
    chosen = {tuple(groups[j]) for j in selected}
    if universe is None:
        negatives = len(groups) - len(truth & set(map(tuple, groups)))
    else:
        if universe < len(groups):
            raise ValidationError(f"universe {universe} is smaller than the design ({len(groups)} groups)")
        negatives = universe - len(truth)
    tp = len(chosen & truth)
    fp = len(chosen - truth)
    tpr = tp / len(truth) if truth else math.nan
    fpr = fp / negatives if negatives else 0.0
    return tpr, fpr, tp, fp
