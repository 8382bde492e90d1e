"""Acceptance criteria 1-9, one test each.

Every test records a ``PASS``/``FAIL``/``SKIP`` line which the terminal
summary prints after the run. Criterion 7 needs the external 96-row PVA
file: set ``SHAPAUDIT_PVA_CSV`` or place it at ``data/pva.csv``.
"""

import math
import os
import time
from decimal import Decimal
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from shapaudit.dataset import describe_target, load_csv
from shapaudit.explain import explain_model, kernel_shap, shapley_exact, tree_shap
from shapaudit.models import (
    DecisionTreeRegressor,
    ElasticNet,
    GradientBoostingRegressor,
    HistGradientBoostingRegressor,
    KernelSVR,
    KNNRegressor,
    Lasso,
    LGBMStyleRegressor,
    MLPRegressor,
    RandomForestRegressor,
    Tree,
    TreeEnsemble,
    XGBStyleRegressor,
)
from shapaudit.models.neural import _Layout, loss_and_gradient
from shapaudit.models.zoo import default_zoo, fit
from shapaudit.pipeline.audit import run_audit
from shapaudit.pipeline.config import PipelineConfig
from shapaudit.reliability import (
    average_ranks,
    build_rank_matrix,
    pairwise_agreement,
    rank_features,
    rank_stats,
    spearman,
    top_k_agreement,
)
from shapaudit.synth import SynthSpec

REPO = Path(__file__).resolve().parents[1]
SYNTH = SynthSpec(n=96, weights=(5.0, 0.5, 0.25, 0.1), noise_std=0.1, seed=7)
TREE_MAKERS = (
    lambda s: GradientBoostingRegressor(n_estimators=10, max_depth=3),
    lambda s: HistGradientBoostingRegressor(n_estimators=10, max_depth=3),
    lambda s: RandomForestRegressor(n_estimators=8, max_depth=4, random_state=s),
    lambda s: XGBStyleRegressor(n_estimators=8, max_depth=3),
    lambda s: LGBMStyleRegressor(n_estimators=8, num_leaves=6, min_child_samples=3),
    lambda s: DecisionTreeRegressor(max_depth=4),
)


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def skip(number, detail):
    line = f"[SKIP] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    pytest.skip(line)


def random_regression(rng, n, d):
    X = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    y = X @ w + X[:, 0] * X[:, -1] + np.abs(X[:, d // 2]) + 0.3 * rng.normal(size=n)
    return X, y


def swap_features(tree, j, l):
    feature = tree.feature.copy()
    a, b = feature == j, feature == l
    feature[a], feature[b] = l, j
    return Tree(feature, tree.threshold, tree.left, tree.right, tree.value)


# --- 1 ------------------------------------------------------------------------


@pytest.mark.filterwarnings("ignore::shapaudit.exceptions.ConvergenceWarning")
def test_criterion_1_engine_oracle_equivalence():
    start = time.perf_counter()
    worst_kernel = worst_tree = 0.0
    n_cases = 0
    for case in range(60):
        rng = np.random.default_rng(1000 + case)
        d = int(rng.integers(2, 7))
        m = int(rng.choice([1, 5, 20]))
        X, y = random_regression(rng, 60, d)
        if case % 2 == 0:
            model = TREE_MAKERS[case // 2 % len(TREE_MAKERS)](case).fit(X, y)
        else:
            hidden = (int(rng.integers(4, 17)), int(rng.integers(2, 9)))
            model = MLPRegressor(hidden_layer_sizes=hidden, max_iter=int(rng.integers(1, 20)), random_state=case).fit(X, y)
        Xq = rng.normal(size=(int(rng.integers(1, 6)), d))
        bg = rng.normal(size=(m, d))
        exact, base = shapley_exact(model, Xq, bg)
        phi_k, base_k = kernel_shap(model, Xq, bg, budget="full")
        worst_kernel = max(worst_kernel, np.abs(phi_k - exact).max(), abs(base_k - base))
        if case % 2 == 0:
            phi_t, base_t = tree_shap(model, Xq, bg)
            worst_tree = max(worst_tree, np.abs(phi_t - exact).max(), abs(base_t - base))
        n_cases += 1
    elapsed = time.perf_counter() - start
    ok = n_cases >= 50 and worst_kernel <= 1e-6 and worst_tree <= 1e-9 and elapsed < 30
    record(
        1,
        ok,
        f"{n_cases} cases, kernel(full) vs exact {worst_kernel:.2e} (<= 1e-6), "
        f"tree vs exact {worst_tree:.2e} (<= 1e-9), {elapsed:.1f} s (< 30 s)",
    )


# --- 2 ------------------------------------------------------------------------


def _efficiency_case(rng, case):
    d = int(rng.integers(2, 7))
    X, y = random_regression(rng, 50, d)
    bg, Xq = X[rng.choice(50, size=int(rng.integers(1, 21)), replace=False)], rng.normal(size=(4, d))
    gaps = []
    if case % 2:
        model = TREE_MAKERS[case % len(TREE_MAKERS)](case).fit(X, y)
        phi, base = tree_shap(model, Xq, bg)
        gaps.append(np.abs(base + phi.sum(1) - model.predict(Xq)).max())
    else:
        model = KNNRegressor(n_neighbors=int(rng.integers(1, 6))).fit(X, y)
    phi, base = shapley_exact(model, Xq, bg)
    gaps.append(np.abs(base + phi.sum(1) - model.predict(Xq)).max())
    return max(gaps)


def _dummy_case(rng, case):
    d = int(rng.integers(2, 7))
    j = int(rng.integers(d))
    X, y = random_regression(rng, 50, d)
    Xq, bg = rng.normal(size=(4, d)), rng.normal(size=(6, d))
    worst = 0.0
    if case % 2:
        X[:, j] = 0.3  # never split on, so the fitted ensemble ignores feature j
        model = TREE_MAKERS[case % len(TREE_MAKERS)](case).fit(X, y)
        worst = max(worst, np.abs(tree_shap(model, Xq, bg)[0][:, j]).max())
    else:
        knn = KNNRegressor(n_neighbors=3).fit(np.delete(X, j, axis=1), y)
        model = lambda Z: knn.predict(np.delete(Z, j, axis=1))
    return max(worst, np.abs(shapley_exact(model, Xq, bg)[0][:, j]).max())


def _symmetry_case(rng, case):
    d = int(rng.integers(2, 7))
    j, l = (int(v) for v in rng.choice(d, size=2, replace=False))
    X, y = random_regression(rng, 50, d)
    base = GradientBoostingRegressor(n_estimators=8).fit(X, y).ensemble_
    mirrored = TreeEnsemble(tuple(swap_features(t, j, l) for t in base.trees), base.weights, base.base_score)
    sym = base + mirrored
    x = rng.normal(size=(1, d))
    x[0, l] = x[0, j]
    bg = rng.normal(size=(5, d))
    bg_swapped = bg.copy()
    bg_swapped[:, [j, l]] = bg[:, [l, j]]
    bg = np.vstack([bg, bg_swapped])
    phi_e = shapley_exact(sym, x, bg)[0][0]
    phi_t = tree_shap(sym, x, bg)[0][0]
    return max(abs(phi_e[j] - phi_e[l]), abs(phi_t[j] - phi_t[l]))


def _linearity_case(rng, case):
    d = int(rng.integers(2, 7))
    X, y = random_regression(rng, 50, d)
    f = DecisionTreeRegressor(max_depth=int(rng.integers(1, 6))).fit(X, y).ensemble_
    g = TREE_MAKERS[case % len(TREE_MAKERS)](case).fit(X, rng.permutation(y)).ensemble_
    Xq, bg = rng.normal(size=(4, d)), rng.normal(size=(int(rng.choice([1, 5, 20])), d))
    out = 0.0
    for engine in (tree_shap, shapley_exact):
        lhs = engine(f + g, Xq, bg)[0]
        rhs = engine(f, Xq, bg)[0] + engine(g, Xq, bg)[0]
        out = max(out, np.abs(lhs - rhs).max())
    return out


def test_criterion_2_shapley_axioms():
    results = {}
    for k, (name, fn) in enumerate(
        (("efficiency", _efficiency_case), ("dummy", _dummy_case), ("symmetry", _symmetry_case), ("linearity", _linearity_case))
    ):
        results[name] = max(fn(np.random.default_rng(2000 + 100 * k + case), case) for case in range(25))
    ok = (
        results["efficiency"] <= 1e-10
        and results["dummy"] == 0.0
        and results["symmetry"] <= 1e-8
        and results["linearity"] <= 1e-8
    )
    record(
        2,
        ok,
        "100 cases; efficiency {efficiency:.1e} (<= 1e-10), dummy {dummy:.1e} (== 0), "
        "symmetry {symmetry:.1e} (<= 1e-8), linearity {linearity:.1e} (<= 1e-8)".format(**results),
    )


# --- 3 ------------------------------------------------------------------------


def test_criterion_3_analytic_linear_shap(synth_ds):
    ds = synth_ds
    worst, rank_ok, names = 0.0, True, []
    for spec in default_zoo():
        if spec.family != "linear":
            continue
        names.append(spec.name)
        model = fit(spec, ds.X, ds.y, master_seed=0)
        attr, gi = explain_model(model, ds)
        w = model.estimator.coef_
        analytic = w * (ds.X - ds.X.mean(axis=0))
        worst = max(worst, np.abs(attr.phi - analytic).max())
        scaled = np.abs(w) * np.abs(ds.X - ds.X.mean(axis=0)).mean(axis=0)
        rank_ok &= np.array_equal(rank_features(gi), average_ranks(scaled))
        rank_ok &= np.array_equal(rank_features(gi), average_ranks(np.abs(w)))
    ok = len(names) >= 4 and worst <= 1e-8 and rank_ok
    record(3, ok, f"{len(names)} linear models, max |phi - w(x - mean bg)| {worst:.1e} (<= 1e-8), rankings match |w|: {rank_ok}")


# --- 4 ------------------------------------------------------------------------


@pytest.mark.filterwarnings("ignore:.*undefined Spearman")
def test_criterion_4_reliability_conservation():
    rng = np.random.default_rng(4)
    sum_ok = pigeon_ok = top1_ok = True
    worst_sum = 0.0
    for case in range(500):
        M, d = int(rng.integers(2, 25)), int(rng.integers(2, 9))
        if case % 2:
            phis = rng.integers(0, 4, size=(M, d)).astype(float)  # heavy ties
        else:
            phis = rng.random(size=(M, d))
        if case % 5 == 0:
            phis[:, int(rng.integers(d))] = 10.0  # shared argmax
        names = tuple(f"f{j}" for j in range(d))
        rm = build_rank_matrix([(f"m{i}", _Importance(phis[i], names)) for i in range(M)])
        target = d * (d + 1) / 2
        sum_ok &= bool(np.all(rm.ranks.sum(axis=1) == target))
        means = [s.mean_rank for s in rank_stats(rm)]
        worst_sum = max(worst_sum, abs(math.fsum(means) - target))
        ks = tuple(range(1, d + 1))
        ag = pairwise_agreement(rm, ks=ks)
        for k in ks:
            bound = max(0.0, (2 * k - d) / k)
            pair_min = min(top_k_agreement(rm.ranks[a], rm.ranks[b], k) for a, b in combinations(range(M), 2))
            pigeon_ok &= pair_min >= bound - 1e-15 and ag.topk[k][0] >= bound - 1e-15
        if case % 5 == 0:
            top1_ok &= ag.topk[1] == (1.0, 0.0)
    table = sum(Decimal(v) for v in ("1.000", "2.905", "3.000", "3.095"))
    sum_ok &= worst_sum <= 1e-12 and table == Decimal("10.000")
    record(
        4,
        sum_ok and pigeon_ok and top1_ok,
        f"500 rank matrices; row sums exact and |sum mean ranks - d(d+1)/2| {worst_sum:.1e}; "
        f"reference table sums to {table}; pigeonhole bound holds: {pigeon_ok}; shared argmax gives top-1 = 1: {top1_ok}",
    )


class _Importance:
    def __init__(self, phi_bar, feature_names):
        self.phi_bar = phi_bar
        self.feature_names = feature_names


# --- 5 ------------------------------------------------------------------------


def test_criterion_5_spearman():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        a = rng.permutation(n) + 1.0
        b = rng.permutation(n) + 1.0
        classical = 1.0 - 6.0 * np.sum((a - b) ** 2) / (n * (n * n - 1))
        worst = max(worst, abs(spearman(a, b) - classical))
    ends = all(
        spearman(r, r) == 1.0 and spearman(r, r[::-1]) == -1.0
        for r in (np.arange(1.0, n + 1) for n in range(2, 40))
    )
    record(5, worst <= 1e-12 and ends, f"1000 permutations, max deviation from classical formula {worst:.1e} (<= 1e-12); identity/reversal exact: {ends}")


# --- 6 and 8 ------------------------------------------------------------------


@pytest.fixture(scope="module")
def synth_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth_run")
    config = PipelineConfig(synth=SYNTH, seed=0)
    start = time.perf_counter()
    report = run_audit(config, n_jobs=1, out_dir=out)
    return report, out, time.perf_counter() - start


def test_criterion_6_synthetic_ground_truth(synth_run):
    report, _, elapsed = synth_run
    rm = report.rank_matrix
    x0 = report.features[0]
    ok = (
        rm.n_models == 21
        and bool(np.all(rm.column("x0") == 1.0))
        and x0.std_rank == 0.0
        and x0.label == "robust"
        and report.agreement.mean_spearman >= 0.7
        and elapsed < 300
    )
    record(
        6,
        ok,
        f"{rm.n_models} models, x0 rank 1 in all: {bool(np.all(rm.column('x0') == 1.0))}, sigma {x0.std_rank:.3f} ({x0.label}), "
        f"mean Spearman {report.agreement.mean_spearman:.3f} (>= 0.7), {elapsed:.0f} s (< 300 s)",
    )


def _strip_timestamp(text):
    return "\n".join(ln for ln in text.splitlines() if '"timestamp"' not in ln)


def _outputs(out):
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file():
            text = p.read_text(encoding="utf-8")
            files[str(p.relative_to(out))] = _strip_timestamp(text) if p.name in ("report.json", "report.md") else text
    return files


def test_criterion_8_determinism(synth_run, tmp_path):
    first, out1, _ = synth_run
    config = first.config
    run_audit(config, n_jobs=1, out_dir=tmp_path / "serial")
    run_audit(config, n_jobs=4, out_dir=tmp_path / "threads")
    a, b, c = _outputs(out1), _outputs(tmp_path / "serial"), _outputs(tmp_path / "threads")
    repeat_ok = a == b
    thread_ok = a == c
    json_ok = a["report.json"] == b["report.json"] == c["report.json"]
    record(8, repeat_ok and thread_ok and json_ok, f"{len(a)} output files; repeat run identical: {repeat_ok}; 4 threads identical: {thread_ok}")


# --- 7 ------------------------------------------------------------------------


def _pva_path():
    env = os.environ.get("SHAPAUDIT_PVA_CSV")
    for candidate in (env, REPO / "data" / "pva.csv"):
        if candidate and Path(candidate).is_file():
            return Path(candidate)
    return None


def test_criterion_7_pva_reproduction(tmp_path):
    path = _pva_path()
    if path is None:
        skip(7, "PVA dataset not found (set SHAPAUDIT_PVA_CSV or add data/pva.csv)")
    raw = load_csv(path, "diameter")
    config = PipelineConfig(data_path=str(path), target="diameter", seed=0)
    report = run_audit(config, n_jobs=1, out_dir=tmp_path)
    stats = {f.feature: f for f in report.features}
    conc = stats["concentration"]
    others = {k: v.std_rank for k, v in stats.items() if k != "concentration"}
    tree_r2 = [o.cv.mean_r2 for o in report.survivors if o.spec.family == "tree" and o.spec.estimator != "decision_tree"]
    mean, sd1, _, _ = describe_target(raw)
    sd0 = float(np.std(raw.y))
    checks = {
        "a": conc.mean_rank == 1.0 and conc.std_rank == 0.0,
        "b": min(others, key=others.get) == "distance" and sorted(others.values())[0] < sorted(others.values())[1],
        "c": report.agreement.topk[1][0] == 1.0,
        "d": abs(report.agreement.mean_spearman - 0.584) <= 0.25,
        "e": max(tree_r2) >= 0.80,
        "f": abs(mean - 259) <= 1 and (abs(sd1 - 34.5) <= 1 or abs(sd0 - 34.5) <= 1),
    }
    detail = (
        f"(a) concentration {conc.mean_rank:.3f}/{conc.std_rank:.3f}; (b) sigma {others}; "
        f"(c) top-1 {report.agreement.topk[1][0]:.3f}; (d) Spearman {report.agreement.mean_spearman:.3f}; "
        f"(e) best tree-ensemble R2 {max(tree_r2):.3f}; (f) target {mean:.1f} +/- {sd1:.1f}; "
        f"failed: {[k for k, v in checks.items() if not v]}"
    )
    record(7, all(checks.values()), detail)


# --- 9 ------------------------------------------------------------------------


def test_criterion_9_training_properties():
    boost_ok = lasso_ok = grad_ok = svr_ok = True
    worst_grad = 0.0
    for seed in range(5):
        rng = np.random.default_rng(9000 + seed)
        X, y = random_regression(rng, int(rng.integers(20, 80)), int(rng.integers(1, 6)))
        for make in (
            lambda: GradientBoostingRegressor(n_estimators=30),
            lambda: HistGradientBoostingRegressor(n_estimators=30),
            lambda: XGBStyleRegressor(n_estimators=30, reg_lambda=float(rng.uniform(0, 5)), gamma=float(rng.uniform(0, 1))),
            lambda: LGBMStyleRegressor(n_estimators=30, min_child_samples=int(rng.integers(1, 10))),
        ):
            loss = make().fit(X, y).train_loss_
            boost_ok &= bool(np.all(np.diff(loss) <= 1e-12 * loss[0]))
        for est in (Lasso(alpha=float(rng.uniform(0.001, 0.5))), ElasticNet(alpha=float(rng.uniform(0.001, 0.5)), l1_ratio=0.5)):
            hist = est.fit(X, y).objective_history_
            lasso_ok &= bool(np.all(np.diff(hist) <= 1e-12 * hist[0]))
        Xs, ys = rng.normal(size=(5, 3)), rng.normal(size=5)
        layout = _Layout([3, int(rng.integers(2, 8)), int(rng.integers(2, 6)), 1])
        flat = rng.normal(size=layout.size)
        _, grad = loss_and_gradient(layout, flat, Xs, ys, 1e-2)
        h = 1e-6
        numeric = np.array(
            [
                (loss_and_gradient(layout, flat + h * e, Xs, ys, 1e-2)[0] - loss_and_gradient(layout, flat - h * e, Xs, ys, 1e-2)[0]) / (2 * h)
                for e in np.eye(layout.size)
            ]
        )
        rel = np.abs(grad - numeric) / np.maximum(1e-8, np.abs(grad) + np.abs(numeric))
        worst_grad = max(worst_grad, rel.max())
        for kernel in ("rbf", "poly"):
            C = float(rng.uniform(0.05, 5.0))
            svr = KernelSVR(kernel=kernel, C=C).fit(X, y)
            svr_ok &= bool(np.all(np.abs(svr.dual_coef_) <= C))
    grad_ok = worst_grad < 1e-4
    record(
        9,
        boost_ok and lasso_ok and grad_ok and svr_ok,
        f"boosting loss nonincreasing: {boost_ok}; coordinate-descent objective nonincreasing: {lasso_ok}; "
        f"MLP gradient max rel error {worst_grad:.1e} (< 1e-4); SVR duals within [-C, C]: {svr_ok}",
    )
