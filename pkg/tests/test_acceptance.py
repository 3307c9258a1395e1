"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also collected in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from salsa import estimator as es
from salsa import kernels as kn
from salsa import modelselect as ms
from salsa import shrink as sh
from salsa import synthetic as sy
from salsa import theory as th
from salsa.cli import girard_newton_times, kernel_assembly_times


def _noisy(ds, rel, seed):
    """Add Gaussian noise with sd ``rel * sd(Y)``."""
    sd = ds.Y.std()
    return ds.Y + rel * sd * np.random.default_rng(seed).standard_normal(ds.n)


# 1 -------------------------------------------------------------------------

def test_c01_esp_oracle_equivalence(accept):
    rng = np.random.default_rng(2024)
    t = time.perf_counter()
    worst_abs = 0.0  # |gn - bf| / (1 + |bf|)
    worst_rel = 0.0  # |gn - bf| / |bf|
    n_bad = n_cmp = 0
    for _ in range(1000):
        D = int(rng.integers(2, 13))
        s = rng.uniform(0.0, 1.0, D)
        gn = kn.girard_newton_esp(s, D)
        for d in range(D + 1):
            bf = kn.brute_force_esp(s, d)
            err = abs(gn[d] - bf)
            worst_abs = max(worst_abs, err / (1.0 + abs(bf)))
            if bf != 0:
                worst_rel = max(worst_rel, err / abs(bf))
                n_cmp += 1
                n_bad += err > 1e-10 * abs(bf)
    elapsed = time.perf_counter() - t
    # gated on the per-entry relative error; the mixed measure is reported
    # because the failures sit at d >= D-1 where e_d is tiny and the
    # alternating-sign recurrence cancels
    ok = worst_rel <= 1e-10 and elapsed <= 5.0
    accept(1, "ESP oracle equivalence (1000 instances, D=2..12, every d)", ok,
           f"max relative = {worst_rel:.2e} ({n_bad}/{n_cmp} entries > 1e-10), "
           f"max |gn-bf|/(1+|bf|) = {worst_abs:.2e}, {elapsed:.2f} s")


# 2 -------------------------------------------------------------------------

def test_c02_recurrence_spot_check(accept):
    s = np.array([1.0, 2.0, 3.0])
    e = kn.girard_newton_esp(s, 3)
    p = kn.power_sums(s, 3)
    newton = (e[1] * p[0] - e[0] * p[1]) / 2.0
    ok = (e.tolist() == [1.0, 6.0, 11.0, 6.0] and p.tolist() == [6.0, 14.0, 36.0] and newton == e[2])
    accept(2, "Recurrence spot check s=(1,2,3)", ok, f"e={e.tolist()} p={p.tolist()} (e1p1-e0p2)/2={newton}")


# 3 -------------------------------------------------------------------------

def test_c03_krr_correctness(accept):
    # (D, d, interpolating): the residual is checked on every fit; the
    # interpolation MSE only where the kernel's span can hold a generic
    # target (an additive d=1 kernel cannot fit x0*x1)
    configs = [(4, 2, True), (5, 2, True), (6, 3, True), (8, 3, True), (4, 4, True), (10, 3, True),
               (8, 2, True), (2, 1, False), (6, 1, False), (3, 2, False)]
    rng = np.random.default_rng(7)
    worst_res, worst_mse, fits, n_bad, failing = 0.0, 0.0, 0, 0, set()
    for D, d, interpolating in configs:
        for rep in range(3):
            n = 30
            X = rng.uniform(-1, 1, (n, D))
            Y = np.sin(X.sum(axis=1)) + X[:, 0] * X[:, 1] + 0.1 * rng.standard_normal(n)
            for lam in (1e-10, 1e-4, 1e-1):
                m = es.fit(X, Y, es.SalsaConfig(d, lam))
                K = kn.kernel_matrix(m.X_train, m.spec)
                yn = m.normalization.transform_y(Y)
                res = np.linalg.norm(K @ m.alpha + lam * n * m.alpha - yn) / (1.0 + np.linalg.norm(yn))
                worst_res = max(worst_res, res)
                fits += 1
                n_bad += res > 1e-8
                if res > 1e-8:
                    failing.add((D, d))
                if lam == 1e-10 and interpolating:
                    worst_mse = max(worst_mse, es.mse(m.predict(X), Y))
    ok = worst_res <= 1e-8 and worst_mse <= 1e-4
    accept(3, "KRR residual and interpolation (n=30, lambda=1e-10)", ok,
           f"{fits} fits: max relative residual {worst_res:.2e} ({n_bad} fits > 1e-8, (D,d) in {sorted(failing)}); "
           f"max train MSE at lambda=1e-10 {worst_mse:.2e} over kernels that can interpolate")


# 4 -------------------------------------------------------------------------

@pytest.mark.slow
def test_c04_known_order_advantage(accept):
    t = time.perf_counter()
    grid = ms.LambdaGrid.logspace()
    wins = good = 0
    chosen = []
    for seed in range(10):
        tr = sy.bumps_dataset(8, 3, 400, 0.0, seed=seed)
        Y = _noisy(tr, 0.1, 100 + seed)
        te = sy.bumps_dataset(8, 3, 2000, 0.0, seed=1000 + seed)
        errs = {}
        for d in (3, 8):
            lam = ms.kfold_cv(tr.X, Y, d, grid, 5, seed).best_lambda
            errs[d] = es.mse(es.fit(tr.X, Y, es.SalsaConfig(d, lam)).predict(te.X), te.Y)
        wins += errs[3] < errs[8]
        rep = ms.search_order(tr.X, Y, grid, 5, 8, seed)
        chosen.append(rep.chosen_d)
        good += rep.chosen_d in (2, 3, 4)
    elapsed = time.perf_counter() - t
    ok = wins >= 8 and good >= 8 and elapsed <= 300
    accept(4, "Known-order advantage (D=8, d=3, n=400, 10 seeds)", ok,
           f"d=3 beats d=8 in {wins}/10, CV d in {{2,3,4}} in {good}/10 (chosen {chosen}), {elapsed:.0f} s")


# 5 -------------------------------------------------------------------------

@pytest.mark.slow
def test_c05_bias_variance_crossover(accept):
    t = time.perf_counter()
    grid = ms.LambdaGrid.logspace()
    means = {}
    for n in (100, 1600):
        picks = []
        for seed in range(5):
            tr = sy.bumps_dataset(10, 10, n, 0.0, seed=seed)
            Y = _noisy(tr, 0.1, 100 + seed)
            picks.append(ms.search_order(tr.X, Y, grid, 5, 10, seed).chosen_d)
        means[n] = (float(np.mean(picks)), picks)
    elapsed = time.perf_counter() - t
    ok = means[100][0] <= means[1600][0] and elapsed <= 600
    accept(5, "Bias-variance crossover (D=10 non-additive, n=100 vs 1600)", ok,
           f"mean chosen d: n=100 -> {means[100][0]:.1f} {means[100][1]}, "
           f"n=1600 -> {means[1600][0]:.1f} {means[1600][1]}, {elapsed:.0f} s")


# 6 -------------------------------------------------------------------------

def test_c06_rate_band(accept):
    t = time.perf_counter()
    ns = [10**k for k in range(2, 7)]
    poly = th.rate_band_check(th.Polynomial(2, 2), ns)
    gauss = th.rate_band_check(th.GaussianType(math.sqrt(2 * math.pi), 1.0, 2), ns)
    growth = gauss.ratios[-1] / gauss.ratios[0]
    elapsed = time.perf_counter() - t
    ok = poly.band <= 3 and growth <= 2 and elapsed <= 10
    accept(6, "Rate band (polynomial s=2,d=2; gaussian-type)", ok,
           f"polynomial max/min {poly.band:.3f}, gaussian growth 1e2->1e6 {growth:.3f}, {elapsed:.2f} s")


# 7 -------------------------------------------------------------------------

def test_c07_effective_dimension_closed_form(accept):
    g = th.gamma_single(th.Polynomial(1, 1), 1.0).gamma_single
    closed = (math.pi / math.tanh(math.pi) - 1.0) / 2.0
    ok = abs(g - 1.076674) <= 1e-5 and abs(g - closed) <= 1e-5
    accept(7, "Effective dimension mu_l = l^-2, lambda=1", ok, f"gamma={g:.12f}, closed form {closed:.12f}")


# 8 -------------------------------------------------------------------------

def _random_design(rng, n, D, M=None, c=1.0):
    X = rng.uniform(-1, 1, (n, D))
    y = rng.standard_normal(n)
    groups = sh.candidate_groups(D, "all")
    if M is not None:
        groups = groups[:M]
    return sh.build_group_design(X, y, groups, c=c)


def test_c08_solver_suite(accept):
    rng = np.random.default_rng(11)
    monotone = True
    worst_gap = 0.0
    for _ in range(20):
        des = _random_design(rng, 20, 3, M=5)
        lam2 = float(rng.uniform(0.02, 0.5)) * des.kill_threshold()
        lam1 = float(rng.choice([0.0, 0.1]))
        finals = []
        for solver in ("proxgrad", "accel-proxgrad", "bcgd", "exact-bcd"):
            tr = sh.solve(des, sh.ShrinkConfig(lam1, lam2, solver, max_iter=20000, tol=1e-12))
            obj = np.asarray(tr.objective)
            monotone &= bool(np.all(np.diff(obj) <= 1e-12 * (1.0 + np.abs(obj[:-1]))))
            finals.append(tr.final_objective)
        worst_gap = max(worst_gap, (max(finals) - min(finals)) / abs(min(finals)))

    worst_grad = 0.0
    for _ in range(10):
        des = _random_design(rng, int(rng.integers(5, 16)), 2, M=int(rng.integers(1, 4)))
        lam1 = float(rng.uniform(0, 1))
        a = rng.standard_normal((des.M, des.n))
        g = sh.smooth_gradient(a, des, lam1)
        fd = np.zeros_like(a)
        for j in range(des.M):
            for i in range(des.n):
                e = np.zeros_like(a)
                e[j, i] = 1e-5
                fd[j, i] = (sh.smooth_objective(a + e, des, lam1) - sh.smooth_objective(a - e, des, lam1)) / 2e-5
        worst_grad = max(worst_grad, np.linalg.norm(g - fd) / np.linalg.norm(fd))

    zero_ok = True
    for _ in range(5):
        des = _random_design(rng, 15, 3, M=6)
        lam2 = 1.01 * des.kill_threshold()
        for solver in ("subgradient", "proxgrad", "accel-proxgrad", "bcgd", "exact-bcd"):
            tr = sh.solve(des, sh.ShrinkConfig(0.1, lam2, solver, max_iter=200))
            zero_ok &= not np.any(tr.alpha)

    ok = monotone and worst_gap <= 1e-4 and worst_grad <= 1e-5 and zero_ok
    accept(8, "Solver suite (monotone, agreement, gradient, kill threshold)", ok,
           f"monotone={monotone}, max relative objective gap {worst_gap:.1e}, "
           f"max gradient error {worst_grad:.1e}, zero above threshold={zero_ok}")


# 9 -------------------------------------------------------------------------

SETTING2_C = 2.0
SETTING2_POINTS = 30
SETTING2_RATIO = 1e-3


FULL_GROUPS = 50 + 50 * 49 // 2


def _setting2_path(seed, until=None):
    """Path rates per point: (TPR, FPR over all 1275 groups, FPR over design negatives).

    Stops at the first TPR = 1 point, or at point ``until`` when given.
    """
    ds, truth = sy.spam_selection_sample(600, seed)
    groups = sh.candidate_groups(sy.SPAM_DIM, "restricted", decoys=54, pair_pool=12, seed=seed)
    des = sh.build_group_design(ds.X, ds.Y, groups, c=SETTING2_C, center_kernels=True, scale="frobenius")
    grid = sh.geometric_grid(1.0001 * des.kill_threshold(), SETTING2_POINTS, SETTING2_RATIO)
    rates = []

    def stop(k, alpha):
        sel = sh.selected_groups(alpha)
        tpr, fpr = sh.support_metrics(sel, groups, truth, universe=FULL_GROUPS)[:2]
        rates.append((tpr, fpr, sh.support_metrics(sel, groups, truth)[1]))
        return k == until if until is not None else tpr == 1.0

    sh.lambda_path(des, sh.ShrinkConfig(0.0, 0.0, "exact-bcd", max_iter=3000, tol=1e-9), grid, stop=stop)
    return rates, len(groups)


@pytest.mark.slow
def test_c09_setting2_support_recovery(accept):
    t = time.perf_counter()
    paths = [_setting2_path(seed)[0] for seed in range(3)]
    M = len(sh.candidate_groups(sy.SPAM_DIM, "restricted", decoys=54, pair_pool=12, seed=0))
    reached = [p[-1][0] == 1.0 for p in paths]
    if all(reached):
        # seeds that reached TPR = 1 early are rerun up to the last seed's
        # point so every average uses real values, not carried-forward ones
        last = max(len(p) for p in paths) - 1
        paths = [p if len(p) == last + 1 else _setting2_path(seed, until=last)[0]
                 for seed, p in enumerate(paths)]
    length = min(len(p) for p in paths)
    tpr, fpr, fpr_design = (np.mean([[r[i] for r in p[:length]] for p in paths], axis=0) for i in range(3))
    hit = [k for k in range(length) if tpr[k] == 1.0 and fpr[k] <= 0.10]
    within = [k for k in range(length) if fpr[k] <= 0.10]
    best = max(within, key=lambda k: tpr[k]) if within else None
    elapsed = time.perf_counter() - t
    ok = bool(hit) and elapsed <= 1800
    detail = (f"restricted design: {M} groups = 50 singletons + 66 pairs in first 12 coords + 54 decoys; "
              f"TPR = 1 reached per seed: {reached}; ")
    if best is not None:
        detail += (f"best seed-mean TPR with FPR <= 10% is {tpr[best]:.3f} "
                   f"(FPR {fpr[best]:.3f} over 1267 negatives, {fpr_design[best]:.3f} over design negatives); ")
    if hit:
        detail += f"hit at path point {hit[0]}; "
    accept(9, "Setting-2 support recovery (n=600, 3 seeds)", ok, detail + f"{elapsed:.0f} s")


# 10 ------------------------------------------------------------------------

def test_c10_complexity_scaling(accept):
    km = kernel_assembly_times(200, [16, 32, 64], 4, repeats=5)
    gn = girard_newton_times(64, [4, 8, 16], calls=2000, repeats=5)
    kr = [b / a for a, b in zip(km, km[1:])]
    gr = [b / a for a, b in zip(gn, gn[1:])]
    ok = max(kr) <= 3 and max(gr) <= 5
    accept(10, "Complexity scaling (kernel matrix per D doubling, Girard-Newton per d doubling)", ok,
           f"kernel ratios {[round(r, 2) for r in kr]}, Girard-Newton ratios {[round(r, 2) for r in gr]}")


# 11 ------------------------------------------------------------------------

def test_c11_persistence_round_trip(accept, tmp_path):
    ok = True
    rng = np.random.default_rng(3)
    for D, d, variant in [(5, 2, "exact"), (7, 3, "upto"), (3, 3, "exact")]:
        X = rng.uniform(-1, 1, (40, D))
        Y = np.cos(X @ rng.standard_normal(D)) + 0.05 * rng.standard_normal(40)
        model = es.fit(X, Y, es.SalsaConfig(d, 1e-3, variant=variant))
        X_new = rng.uniform(-1.5, 1.5, (25, D))
        before = model.predict(X_new)
        path = tmp_path / f"m{D}{d}.json"
        es.save_model(model, path)
        after = es.load_model(path).predict(X_new)
        ok &= before.tobytes() == after.tobytes()
    accept(11, "Persistence round trip is bitwise", ok, "3 models, predictions compared via tobytes()")
