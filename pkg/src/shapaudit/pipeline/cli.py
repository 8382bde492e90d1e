"""``audit`` command line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..dataset import standardize, write_csv
from ..exceptions import AuditError, ConfigError
from ..explain import explain_model
from ..models.zoo import default_zoo, fit
from ..synth import SynthSpec, make_synthetic
from .audit import load_dataset, run_audit, write_attribution_csv
from .config import EXAMPLE_CONFIG, load_config

logger = logging.getLogger("shapaudit")


def _float_list(text):
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_run(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    out = Path(args.out) if args.out else Path(config.output_dir)
    if not out.is_absolute() and not args.out:
        out = Path(config.base_dir) / out
    report = run_audit(config, n_jobs=args.jobs, out_dir=out)
    for f in sorted(report.features, key=lambda f: f.mean_rank):
        print(f"{f.feature:<28} mean rank {f.mean_rank:.3f}  sd {f.std_rank:.3f}  {f.label}")
    print(f"mean pairwise Spearman {report.agreement.mean_spearman:.3f}")
    print(f"outputs written to {out}")
    return 0


def zoo_listing():
    lines = []
    for spec in default_zoo():
        params = json.dumps(spec.hyperparameters, sort_keys=True, default=list)
        flag = "variant" if spec.variant else "named"
        lines.append(f"{spec.name:<24} {spec.family:<9} {flag:<8} {params}")
    return "\n".join(lines)


def cmd_zoo_list(args):
    print(zoo_listing())
    return 0


def cmd_explain(args):
    config = load_config(args.config)
    specs = {s.name: s for s in config.specs()}
    if args.model not in specs:
        raise ConfigError(f"unknown model {args.model!r}; run `audit zoo list`")
    ds, _ = standardize(load_dataset(config))
    model = fit(specs[args.model], ds.X, ds.y, config.seed)
    attr, _ = explain_model(model, ds, engine=config.engine, kernel_budget=config.kernel_budget, seed=config.seed)
    if args.out:
        write_attribution_csv(attr, ds.feature_names, args.out)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(list(ds.feature_names) + ["baseline"])
        for row in attr.phi:
            writer.writerow([repr(float(v)) for v in row] + [repr(float(attr.baseline))])
    return 0


def cmd_synth(args):
    spec = SynthSpec(n=args.n, weights=tuple(args.weights), noise_std=args.noise, seed=args.seed)
    write_csv(make_synthetic(spec), args.out)
    return 0


def cmd_init(args):
    path = Path(args.out)
    if path.exists() and not args.force:
        raise ConfigError(f"{path} exists; pass --force to overwrite")
    path.write_text(EXAMPLE_CONFIG, encoding="utf-8")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="audit", description="Cross-model SHAP feature-importance reliability audit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full audit")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--jobs", type=int, help="worker threads (overrides n_jobs in the config)")
    run.set_defaults(func=cmd_run)

    zoo = sub.add_parser("zoo", help="model zoo commands")
    zoo_sub = zoo.add_subparsers(dest="zoo_command", required=True)
    zoo_sub.add_parser("list", help="list the default zoo").set_defaults(func=cmd_zoo_list)

    ex = sub.add_parser("explain", help="per-sample attributions of one model as CSV")
    ex.add_argument("--config", required=True)
    ex.add_argument("--model", required=True)
    ex.add_argument("--out", help="output CSV (default: stdout)")
    ex.set_defaults(func=cmd_explain)

    syn = sub.add_parser("synth", help="write a synthetic dataset CSV")
    syn.add_argument("--n", type=int, default=96)
    syn.add_argument("--weights", type=_float_list, required=True)
    syn.add_argument("--noise", type=float, default=0.0)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=cmd_synth)

    init = sub.add_parser("init", help="write an example config file")
    init.add_argument("--out", default="audit.yaml")
    init.add_argument("--force", action="store_true")
    init.set_defaults(func=cmd_init)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
