"""End-to-end audit: load, standardize, cross-validate, refit, attribute, compare ranks."""

import csv
import datetime as _dt
import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dataset import REFERENCE_FEATURES, describe_target, load_csv, standardize, validate_against_design
from ..evaluation import cross_validate
from ..exceptions import AuditError, ConfigError, ConvergenceWarning, NumericError
from ..explain import explain_model
from ..models.zoo import fit
from ..reliability import build_rank_matrix, family_agreement, pairwise_agreement, rank_stats
from ..synth import make_synthetic
from .svg import RANK_COLORS, render_histogram, render_r2_bars, render_rank_heatmap

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class ModelOutcome:
    spec: object
    cv: object = None
    model: object = None
    attribution: object = None
    importance: object = None
    error: str = None


@dataclass
class AuditReport:
    """Everything one audit produced; :meth:`to_dict` is the ``report.json`` payload."""

    config: object
    dataset: object
    raw_target: np.ndarray
    raw_summary: tuple
    design_check: object
    outcomes: list
    rank_matrix: object
    features: list
    agreement: object
    families: dict
    warnings: list = field(default_factory=list)
    timestamp: str = ""

    @property
    def survivors(self):
        return [o for o in self.outcomes if o.error is None]

    def model_block(self, o):
        block = {
            "name": o.spec.name,
            "family": o.spec.family,
            "estimator": o.spec.estimator,
            "variant": o.spec.variant,
            "hyperparameters": {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(o.spec.hyperparameters.items())},
        }
        if o.error is not None:
            block["excluded"] = o.error
            return block
        rank_row = self.rank_matrix.ranks[self.rank_matrix.model_names.index(o.spec.name)]
        block.update(
            {
                "cv": {
                    "mean_r2": _num(o.cv.mean_r2),
                    "std_r2": _num(o.cv.std_r2),
                    "per_fold_r2": [_num(v) for v in o.cv.per_fold_r2],
                    "per_fold_rmse": [_num(v) for v in o.cv.per_fold_rmse],
                    "per_fold_mae": [_num(v) for v in o.cv.per_fold_mae],
                },
                "shap_engine": o.attribution.engine,
                "baseline": _num(o.attribution.baseline),
                "phi_bar": [_num(v) for v in o.importance.phi_bar],
                "rank_row": [_num(v) for v in rank_row],
                "converged": bool(o.model.converged and o.cv.converged),
            }
        )
        return block

    def to_dict(self):
        cfg = self.config
        mean, sd, lo, hi = self.raw_summary
        ag = self.agreement
        return {
            "schema_version": SCHEMA_VERSION,
            "meta": {
                "seed": cfg.seed,
                "config_hash": cfg.digest(),
                "timestamp": self.timestamp,
                "settings": {
                    "standardization": "global z-score (ddof=1) fitted on the full dataset before modelling",
                    "cv_shuffle": cfg.shuffle,
                    "rank_std": "population (ddof=0)" if cfg.std_ddof == 0 else f"ddof={cfg.std_ddof}",
                    "rank_ties": "average of tied positions",
                    "topk_tie_break": "lower feature index first",
                    "topk_definition": "pairwise overlap |A & B| / k, mean and population std over model pairs",
                    "shap_estimand": "interventional (marginal) Shapley values",
                    "shap_foreground": "all rows of the standardized dataset",
                    "shap_background": cfg.background,
                    "shap_background_size": int(self._background_size()),
                    "kernel_budget": cfg.kernel_budget if cfg.kernel_budget is not None else "full for d <= 12",
                    "rank_colormap": list(RANK_COLORS),
                },
            },
            "config": cfg.to_dict(),
            "dataset": {
                "n": self.dataset.n_samples,
                "d": self.dataset.n_features,
                "feature_names": list(self.dataset.feature_names),
                "target": self.dataset.target_name,
                "target_mean": _num(mean),
                "target_std": _num(sd),
                "target_min": _num(lo),
                "target_max": _num(hi),
                "design_off_levels": self.design_check.off_design if self.design_check else None,
            },
            "models": [self.model_block(o) for o in self.outcomes],
            "rank_matrix": {
                "models": list(self.rank_matrix.model_names),
                "features": list(self.rank_matrix.feature_names),
                "ranks": [[_num(v) for v in row] for row in self.rank_matrix.ranks],
            },
            "features": [
                {"feature": f.feature, "mean_rank": _num(f.mean_rank), "std_rank": _num(f.std_rank), "label": f.label}
                for f in self.features
            ],
            "agreement": {
                "mean_spearman": _num(ag.mean_spearman),
                "pairwise_spearman": [[_num(v) for v in row] for row in ag.pairwise_spearman],
                "topk": {str(k): {"mean": _num(m), "std": _num(s)} for k, (m, s) in ag.topk.items()},
                "modal_topk": {str(k): _num(v) for k, v in ag.modal_topk.items()},
                "undefined_pairs": ag.n_undefined_pairs,
                "family_mean_spearman": {f"{a}|{b}": _num(v) for (a, b), v in self.families.items()},
            },
            "warnings": list(self.warnings),
        }

    def _background_size(self):
        if self.config.background == "full":
            return self.dataset.n_samples
        return min(self.dataset.n_samples, int(self.config.background[7:]))

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _num(v):
    """Round-trippable float, or ``None`` for nan/inf (JSON has no nan)."""
    v = float(v)
    return v if math.isfinite(v) else None


def load_dataset(config):
    if config.synth is not None:
        return make_synthetic(config.synth)
    return load_csv(config.resolved_data_path, config.target)


def background_rows(config, X):
    if config.background == "full":
        return X
    m = min(X.shape[0], int(config.background[7:]))
    idx = np.sort(np.random.default_rng(config.seed).choice(X.shape[0], size=m, replace=False))
    return X[idx]


def _run_one(spec, ds, config, background):
    outcome = ModelOutcome(spec=spec)
    try:
        outcome.cv = cross_validate(spec, ds, k=config.k, seed=config.seed, shuffle=config.shuffle)
        outcome.model = fit(spec, ds.X, ds.y, config.seed)
        outcome.attribution, outcome.importance = explain_model(
            outcome.model,
            ds,
            engine=config.engine,
            background=background,
            kernel_budget=config.kernel_budget,
            seed=config.seed,
        )
        gap = np.max(np.abs(outcome.attribution.efficiency_gap(outcome.model)))
        scale = 1.0 + np.max(np.abs(ds.y))
        if not np.all(np.isfinite(outcome.importance.phi_bar)) or not gap <= 1e-6 * scale:
            raise NumericError(f"attributions failed the efficiency check (gap {gap:.3g})")
    except ConfigError:
        raise
    except (AuditError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        outcome.error = f"{type(exc).__name__}: {exc}"
    return outcome


def run_audit(config, n_jobs=None, write=True, out_dir=None):
    """Run the full audit; writes all outputs under ``out_dir`` unless ``write=False``."""
    n_jobs = config.n_jobs if n_jobs is None else n_jobs
    raw = load_dataset(config)
    raw_summary = describe_target(raw)
    design_check = None
    if raw.feature_names == REFERENCE_FEATURES:
        design_check = validate_against_design(raw)
    ds, _ = standardize(raw)
    specs = config.specs()
    background = background_rows(config, ds.X)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                outcomes = list(pool.map(lambda s: _run_one(s, ds, config, background), specs))
        else:
            outcomes = [_run_one(s, ds, config, background) for s in specs]

    notes = []
    if design_check is not None and not design_check.passed:
        notes.append(f"values outside the design levels: {design_check.off_design}")
    for o in outcomes:
        if o.error is not None:
            notes.append(f"model {o.spec.name} excluded: {o.error}")
        elif not (o.model.converged and o.cv.converged):
            notes.append(f"model {o.spec.name} hit its iteration cap in at least one fit")
    survivors = [o for o in outcomes if o.error is None]
    if len(survivors) < 2:
        raise NumericError(f"only {len(survivors)} model(s) survived; the audit needs at least 2")

    rm = build_rank_matrix([(o.spec.name, o.importance) for o in survivors])
    features = rank_stats(rm, thresholds=config.thresholds, ddof=config.std_ddof)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        agreement = pairwise_agreement(rm, ks=config.top_k)
    notes.extend(str(w.message) for w in caught)
    for name, k in agreement.boundary_ties:
        notes.append(f"model {name} has tied importances at the top-{k} boundary")
    families = family_agreement(agreement, [o.spec.family for o in survivors])

    report = AuditReport(
        config=config,
        dataset=ds,
        raw_target=raw.y,
        raw_summary=raw_summary,
        design_check=design_check,
        outcomes=outcomes,
        rank_matrix=rm,
        features=features,
        agreement=agreement,
        families=families,
        warnings=notes,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )
    if write:
        write_outputs(report, Path(out_dir) if out_dir is not None else Path(config.output_dir))
    return report


def write_attribution_csv(attr, feature_names, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(feature_names) + ["baseline"])
        for row in attr.phi:
            writer.writerow([repr(float(v)) for v in row] + [repr(float(attr.baseline))])
    return path


def render_markdown(report):
    d = report.to_dict()
    ds = d["dataset"]
    lines = [
        "# Feature-importance reliability audit",
        "",
        f"Dataset: n = {ds['n']}, d = {ds['d']}, target `{ds['target']}` "
        f"(mean = {ds['target_mean']:.4g}, SD = {ds['target_std']:.4g}, "
        f"range {ds['target_min']:.4g} to {ds['target_max']:.4g}).",
        f"Seed {d['meta']['seed']}, config hash `{d['meta']['config_hash'][:12]}`.",
        "",
        "## Cross-validated performance",
        "",
        "| Model | Family | Mean R² | Std R² | SHAP engine |",
        "|---|---|---|---|---|",
    ]
    for m in d["models"]:
        if "excluded" in m:
            lines.append(f"| {m['name']} | {m['family']} | excluded | | |")
            continue
        mean = m["cv"]["mean_r2"]
        std = m["cv"]["std_r2"]
        fmt = lambda v: "n/a" if v is None else f"{v:.3f}"
        lines.append(f"| {m['name']} | {m['family']} | {fmt(mean)} | {fmt(std)} | {m['shap_engine']} |")
    lines += [
        "",
        "## Rank-based reliability statistics",
        "",
        "| Feature | Mean Rank | Std. Dev. | Label |",
        "|---|---|---|---|",
    ]
    for f in sorted(report.features, key=lambda f: (f.mean_rank, f.feature)):
        lines.append(f"| {f.feature} | {f.mean_rank:.3f} | {f.std_rank:.3f} | {f.label} |")
    ag = d["agreement"]
    lines += [
        "",
        "## Agreement",
        "",
        f"Mean pairwise Spearman correlation: {ag['mean_spearman']:.3f}",
        "",
        "| k | Top-k agreement (mean ± std over pairs) | Modal-set share |",
        "|---|---|---|",
    ]
    for k, v in ag["topk"].items():
        lines.append(f"| {k} | {v['mean']:.3f} ± {v['std']:.3f} | {ag['modal_topk'][k]:.3f} |")
    if ag["family_mean_spearman"]:
        lines += ["", "| Family pair | Mean Spearman |", "|---|---|"]
        for key, v in ag["family_mean_spearman"].items():
            lines.append(f"| {key.replace('|', ' / ')} | {v:.3f} |")
    if d["warnings"]:
        lines += ["", "## Warnings", ""] + [f"- {w}" for w in d["warnings"]]
    return "\n".join(lines) + "\n"


def write_outputs(report, out_dir):
    out_dir = Path(out_dir)
    (out_dir / "attributions").mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "report.md").write_text(render_markdown(report), encoding="utf-8")
    (out_dir / "rank_matrix.svg").write_text(render_rank_heatmap(report.rank_matrix), encoding="utf-8")
    bars = [(o.spec.name, o.spec.family, o.cv.mean_r2, o.cv.std_r2) for o in report.survivors]
    (out_dir / "r2_bars.svg").write_text(render_r2_bars(bars), encoding="utf-8")
    (out_dir / "target_hist.svg").write_text(
        render_histogram(report.raw_target, label=report.dataset.target_name), encoding="utf-8"
    )
    rm = report.rank_matrix
    with (out_dir / "rank_matrix.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model"] + list(rm.feature_names))
        for name, row in zip(rm.model_names, rm.ranks):
            writer.writerow([name] + [repr(float(v)) for v in row])
    with (out_dir / "pairwise_spearman.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model"] + list(rm.model_names))
        for name, row in zip(rm.model_names, report.agreement.pairwise_spearman):
            writer.writerow([name] + [repr(float(v)) for v in row])
    for o in report.survivors:
        write_attribution_csv(o.attribution, report.dataset.feature_names, out_dir / "attributions" / f"{o.spec.name}.csv")
    logger.info("wrote audit outputs to %s", out_dir)
    return out_dir
