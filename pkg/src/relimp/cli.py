"""Command line interface: ``relimp <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import BACKEND, __version__
from . import econometrics as econ
from . import importance as imp
from .dataset import load_csv, standardize
from .gbm import GBMConfig, GBMModel, fit_gbm, r_squared
from .pdp import partial_dependence, write_curve_csv, write_panel_svg
from .pipeline import (PermutationConfig, PipelineConfig, RunManifest, emit_report,
                       run_pipeline)


def _add_data(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--response", default="FCPI", help="response column (default: FCPI)")
    p.add_argument("--standardize", action="store_true",
                   help="rescale predictors to mean 0, sample sd 1 first")


def _add_gbm(p):
    d = GBMConfig()
    p.add_argument("--trees", type=int, default=d.n_trees)
    p.add_argument("--learn-rate", type=float, default=d.learn_rate)
    p.add_argument("--subsample", type=float, default=d.subsample_fraction)
    p.add_argument("--max-leaves", type=int, default=d.max_leaves)
    p.add_argument("--min-leaf", type=int, default=d.min_obs_leaf)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--trace-stride", type=int, default=d.mse_trace_stride)


def _add_perm(p):
    p.add_argument("--metric", choices=imp.METRICS, default="mse")
    p.add_argument("--shuffles", type=int, default=10)
    p.add_argument("--perm-seed", type=int, default=None,
                   help="permutation seed (default: same as --seed)")


def _gbm_config(a) -> GBMConfig:
    return GBMConfig(a.trees, a.learn_rate, a.subsample, a.max_leaves, a.min_leaf, a.seed,
                     a.trace_stride)


def _load(a):
    d = load_csv(a.input, a.response)
    return standardize(d) if a.standardize else d


def _model(a, data):
    if getattr(a, "model", None):
        return GBMModel.load(a.model)
    return fit_gbm(data, _gbm_config(a))


def _out(a) -> Path:
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_load_check(a):
    d = load_csv(a.input, a.response)
    print(f"{a.input}: {d.n_rows} rows, response {d.response_name!r}, "
          f"{len(d.predictor_names)} predictors")
    if d.row_labels:
        print(f"periods {d.row_labels[0]} .. {d.row_labels[-1]}")
    print(f"{'column':<14}{'mean':>10}{'sd':>10}{'min':>10}{'max':>10}{'missing':>9}")
    for name in d.column_names:
        s = d.stats(name)
        print(f"{name:<14}{s.mean:>10.3f}{s.std_dev:>10.3f}{s.min:>10.3f}{s.max:>10.3f}{s.missing_count:>9d}")


def cmd_regress(a):
    s = econ.ols_fit(_load(a))
    print(f"OLS: n = {s.n_used}, R^2 = {s.r_squared:.4f}, dropped rows {s.dropped_rows}")
    print(f"{'feature':<14}{'coef':>10}{'se':>10}{'t':>9}{'p':>9}{'beta':>9}{'r':>9}")
    for f in s.features:
        print(f"{f:<14}{s.coefficients[f]:>10.4f}{s.std_errors[f]:>10.4f}{s.t_stats[f]:>9.3f}"
              f"{s.p_values[f]:>9.4f}{s.beta_weights[f]:>9.4f}{s.zero_order_r[f]:>9.4f}")
    print("significant at alpha={}: {}".format(a.alpha, ", ".join(econ.significant_features(s, a.alpha)) or "none"))
    if a.out:
        (_out(a) / "regression.json").write_text(json.dumps(s.to_dict(), indent=2) + "\n")


def cmd_dominance(a):
    r = econ.dominance_analysis(_load(a))
    print(f"general dominance over {r.n_submodels} submodels (full R^2 = {r.full_r_squared:.4f})")
    for f, v in sorted(r.general_dominance.items(), key=lambda kv: -kv[1]):
        print(f"  {f:<14}{v:>10.4f}")
    if a.out:
        (_out(a) / "dominance.json").write_text(json.dumps(r.to_dict(), indent=2) + "\n")


def cmd_relweights(a):
    r = econ.relative_weights(_load(a))
    print(f"relative weights (sum = R^2 = {r.full_r_squared:.4f})")
    for f, v in sorted(r.epsilons.items(), key=lambda kv: -kv[1]):
        print(f"  {f:<14}{v:>10.4f}")
    if a.out:
        (_out(a) / "relative_weights.json").write_text(json.dumps(r.to_dict(), indent=2) + "\n")


def cmd_fit(a):
    data = _load(a)
    m = fit_gbm(data, _gbm_config(a))
    print(f"fitted {m.n_trees} trees ({BACKEND} backend): R^2 = {r_squared(m, data):.4f}, "
          f"MSE {m.mse_trace[0][1]:.5g} -> {m.mse_trace[-1][1]:.5g}")
    out = _out(a)
    m.save(out / "model.json")
    with open(out / "mse_trace.csv", "w") as fh:
        fh.write("iteration,mse\n")
        for i, v in m.mse_trace:
            fh.write(f"{i},{v!r}\n")


def cmd_importance(a):
    data = _load(a)
    m = _model(a, data)
    data = data.select(m.feature_names)
    seed = a.seed if a.perm_seed is None else a.perm_seed
    reports = []
    try:
        reports += [imp.selection_frequency(m), imp.split_importance(m)]
    except imp.NoSplitsInModel:
        print("no splits in model; frequency and split importance unavailable")
    reports.append(imp.permutation_importance(m, data, a.metric, a.shuffles, seed))
    for r in reports:
        print(f"[{r.method}]")
        for row in r.ranked():
            print(f"  {row['rank']:>2} {row['feature']:<14}{row['scaled']:>8.2f}")
    out = _out(a)
    imp.write_json(reports, out / "importance.json")
    imp.write_csv(reports, out / "importance.csv")


def cmd_pdp(a):
    data = _load(a)
    m = _model(a, data)
    data = data.select(m.feature_names)
    feats = a.feature or m.feature_names
    out = _out(a)
    curves = []
    for f in feats:
        c = partial_dependence(m, data, f, a.pdp_grid)
        curves.append(c)
        write_curve_csv(c, out / f"pdp_{f}.csv")
        print(f"{f}: {len(c.grid)} grid points, range {c.values.min():.4f} .. {c.values.max():.4f}")
    if a.svg:
        write_panel_svg(curves, out / "pdp_panel.svg")


def cmd_run(a):
    cfg = PipelineConfig(
        input_path=a.input, response_name=a.response, output_dir=a.out, alpha=a.alpha,
        skip_step1=a.skip_step1, gbm=_gbm_config(a),
        permutation=PermutationConfig(a.metric, a.shuffles, a.seed if a.perm_seed is None else a.perm_seed),
        pdp_grid_size=a.pdp_grid, standardize=a.standardize, pdp_svg=a.svg,
    )
    manifest = run_pipeline(cfg)
    sys.stdout.write(emit_report(manifest))


def cmd_report(a):
    sys.stdout.write(emit_report(RunManifest.load(a.out)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relimp", description=__doc__)
    ap.add_argument("--version", action="version", version=f"relimp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load-check", help="validate a CSV and print column statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--response", default="FCPI")
    p.set_defaults(func=cmd_load_check)

    p = sub.add_parser("regress", help="OLS with p-values, beta weights, correlations")
    _add_data(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_regress)

    for name, func, helptext in (("dominance", cmd_dominance, "general dominance analysis"),
                                 ("relweights", cmd_relweights, "relative weights analysis")):
        p = sub.add_parser(name, help=helptext)
        _add_data(p)
        p.add_argument("--out", default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("fit", help="fit the boosted model; writes model.json and mse_trace.csv")
    _add_data(p)
    _add_gbm(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("importance", help="frequency, split and permutation importance")
    _add_data(p)
    _add_gbm(p)
    _add_perm(p)
    p.add_argument("--model", help="model.json from `fit` (default: fit afresh)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("pdp", help="centered partial dependence curves")
    _add_data(p)
    _add_gbm(p)
    p.add_argument("--model", help="model.json from `fit` (default: fit afresh)")
    p.add_argument("--feature", action="append", help="feature to plot (repeatable; default all)")
    p.add_argument("--pdp-grid", type=int, default=100)
    p.add_argument("--svg", action="store_true", help="also write pdp_panel.svg")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pdp)

    p = sub.add_parser("run", help="full three-step pipeline")
    _add_data(p)
    _add_gbm(p)
    _add_perm(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--skip-step1", action="store_true",
                   help="keep every predictor (variables chosen a priori)")
    p.add_argument("--pdp-grid", type=int, default=100)
    p.add_argument("--svg", action="store_true", help="also write pdp_panel.svg")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="print the report of a finished run")
    p.add_argument("--out", required=True, help="output directory of a `run`")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as e:
        print(f"relimp: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
