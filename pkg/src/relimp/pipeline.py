"""End-to-end three-step run: significance screen, boosted model, importance scores.

``run_pipeline`` writes every artifact into ``output_dir`` together with a
``manifest.json`` that records the configuration, the input fingerprint and
the files produced. ``emit_report`` rebuilds the text summary from those
files alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from . import econometrics as econ
from . import importance as imp
from .dataset import load_csv, standardize
from .gbm import GBMConfig, fit_gbm, flatline_iteration, r_squared
from .pdp import partial_dependence, write_curve_csv, write_panel_svg

WALL_CLOCK_KEY = "wall_clock_seconds"


class NoSignificantFeatures(ValueError):
    pass


@dataclass(frozen=True)
class PermutationConfig:
    metric: str = "mse"
    n_shuffles: int = 10
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str
    response_name: str = "FCPI"
    output_dir: str = "out"
    alpha: float = 0.05
    skip_step1: bool = False
    gbm: GBMConfig = field(default_factory=GBMConfig)
    permutation: PermutationConfig = field(default_factory=PermutationConfig)
    pdp_grid_size: int = 100
    standardize: bool = False
    pdp_svg: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.pdp_grid_size < 2:
            raise ValueError("pdp_grid_size must be >= 2")


@dataclass
class RunManifest:
    config: dict
    tool_version: str
    dataset_sha256: str
    output_dir: str
    steps: list = field(default_factory=list)
    files: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        del d["output_dir"]
        return d

    @classmethod
    def load(cls, path) -> "RunManifest":
        path = Path(path)
        if path.is_dir():
            path = path / "manifest.json"
        d = json.loads(path.read_text())
        d["output_dir"] = str(path.parent)
        return cls(**d)


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=True) + "\n")


def _config_echo(cfg: PipelineConfig) -> dict:
    d = asdict(cfg)
    d["input_path"] = str(cfg.input_path)
    # where the files land does not affect their content
    del d["output_dir"]
    return d


def _write_baselines(path, features, summary, useful, dom, rw, reports) -> None:
    by_method = {r.method: r for r in reports}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "coefficient", "p_value", "beta_weight", "zero_order_r",
                    "beta_times_r", "usefulness", "general_dominance", "relative_weight",
                    "frequency_scaled", "split_scaled", "permutation_scaled"])
        for f in features:
            row = [f]
            if summary is not None:
                row += [summary.coefficients[f], summary.p_values[f], summary.beta_weights[f],
                        summary.zero_order_r[f], summary.beta_weights[f] * summary.zero_order_r[f]]
            else:
                row += [""] * 5
            row.append(useful.get(f, "") if useful else "")
            row.append(dom.general_dominance[f] if dom else "")
            row.append(rw.epsilons[f] if rw else "")
            for m in imp.METHODS:
                row.append(by_method[m].scaled[f] if m in by_method else "")
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def run_pipeline(config: PipelineConfig) -> RunManifest:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw = Path(config.input_path).read_bytes()
    manifest = RunManifest(_config_echo(config), __version__,
                           hashlib.sha256(raw).hexdigest(), str(out))

    def step(name, t0, files, **info):
        manifest.steps.append({"name": name, "outputs": files, **info,
                               WALL_CLOCK_KEY: round(time.perf_counter() - t0, 6)})
        manifest.files.extend(files)

    t0 = time.perf_counter()
    data = load_csv(config.input_path, config.response_name)
    if config.standardize:
        data = standardize(data)
    step("load", t0, [], n_rows=data.n_rows, predictors=data.predictor_names)

    # Step 1: significance screen on the full predictor set
    t0 = time.perf_counter()
    summary, step1_error = None, None
    try:
        summary = econ.ols_fit(data)
    except (econ.RankDeficient, econ.InsufficientRows, ValueError) as e:
        if not config.skip_step1:
            raise
        step1_error = str(e)
    if config.skip_step1:
        survivors = list(data.predictor_names)
    else:
        survivors = econ.significant_features(summary, config.alpha)
        if not survivors:
            raise NoSignificantFeatures(f"no predictor has p < {config.alpha}")
    files = []
    if summary is not None:
        _dump(summary.to_dict(), out / "regression.json")
        files.append("regression.json")
    step("step1_screen", t0, files, skipped=config.skip_step1, survivors=survivors,
         error=step1_error)

    sub = data.select(survivors)

    # econometric baselines on the surviving predictors
    t0 = time.perf_counter()
    useful, dom, rw, files, base_error = {}, None, None, [], None
    try:
        useful = {f: econ.usefulness(sub, f) for f in survivors}
        dom = econ.dominance_analysis(sub)
        rw = econ.relative_weights(sub)
        _dump(dom.to_dict(), out / "dominance.json")
        _dump(rw.to_dict(), out / "relative_weights.json")
        files += ["dominance.json", "relative_weights.json"]
    except (econ.RankDeficient, econ.InsufficientRows, econ.TooManyPredictors) as e:
        base_error = str(e)
    step("baselines", t0, files, error=base_error)

    # Step 2: exploratory boosted model
    t0 = time.perf_counter()
    model = fit_gbm(sub, config.gbm)
    model.save(out / "model.json")
    with open(out / "mse_trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "mse"])
        for i, v in model.mse_trace:
            w.writerow([i, repr(v)])
    r2 = r_squared(model, sub)
    fit_stats = {
        "r_squared": r2,
        "final_mse": model.mse_trace[-1][1],
        "initial_mse": model.mse_trace[0][1],
        "flatline_iteration": flatline_iteration(model.mse_trace),
        "n_trees": model.n_trees,
    }
    _dump(fit_stats, out / "fit_stats.json")
    step("step2_fit", t0, ["model.json", "mse_trace.csv", "fit_stats.json"], **fit_stats)

    # Step 3: importance and partial dependence
    t0 = time.perf_counter()
    reports, notice = [], None
    try:
        reports.append(imp.selection_frequency(model))
        reports.append(imp.split_importance(model))
    except imp.NoSplitsInModel as e:
        notice = str(e)
    pc = config.permutation
    reports.append(imp.permutation_importance(model, sub, pc.metric, pc.n_shuffles, pc.seed))
    imp.write_json(reports, out / "importance.json")
    imp.write_csv(reports, out / "importance.csv")
    files = ["importance.json", "importance.csv"]
    curves = []
    for f in survivors:
        c = partial_dependence(model, sub, f, config.pdp_grid_size)
        curves.append(c)
        write_curve_csv(c, out / f"pdp_{f}.csv")
        files.append(f"pdp_{f}.csv")
    if config.pdp_svg:
        write_panel_svg(curves, out / "pdp_panel.svg")
        files.append("pdp_panel.svg")
    _write_baselines(out / "baselines.csv", survivors, summary, useful, dom, rw, reports)
    files.append("baselines.csv")
    step("step3_importance", t0, files, notice=notice)

    manifest.files.append("report.txt")
    (out / "report.txt").write_text(emit_report(manifest))
    manifest.files.append("manifest.json")
    _dump(manifest.to_dict(), out / "manifest.json")
    return manifest


def _fmt(v, width=10, prec=4):
    if v is None or v == "":
        return " " * (width - 1) + "-"
    return f"{v:>{width}.{prec}f}"


def emit_report(manifest: RunManifest) -> str:
    """Plain-text summary of a finished run, read back from its artifact files."""
    out = Path(manifest.output_dir)
    steps = {s["name"]: s for s in manifest.steps}
    cfg = manifest.config
    lines = [
        "Relative importance report",
        "==========================",
        f"input: {cfg['input_path']}  (sha256 {manifest.dataset_sha256[:16]})",
        f"response: {cfg['response_name']}",
        "",
        "Step 1: significance screen",
        "---------------------------",
    ]
    reg = json.loads((out / "regression.json").read_text()) if (out / "regression.json").exists() else None
    if cfg["skip_step1"]:
        lines.append("skipped (variables supplied a priori)")
    else:
        lines.append(f"alpha = {cfg['alpha']}; surviving: {', '.join(steps['step1_screen']['survivors'])}")
    if reg is not None:
        lines.append(f"OLS R^2 = {reg['r_squared']:.4f}  (n = {reg['n_used']}, "
                     f"dropped rows {reg['dropped_rows']})")
        lines.append(f"{'feature':<12}{'coef':>10}{'p':>10}{'beta':>10}{'r':>10}")
        for row in reg["features"]:
            lines.append(f"{row['feature']:<12}{_fmt(row['coefficient'])}{_fmt(row['p_value'])}"
                         f"{_fmt(row['beta_weight'])}{_fmt(row['zero_order_r'])}")
    elif steps["step1_screen"].get("error"):
        lines.append(f"OLS not available: {steps['step1_screen']['error']}")

    fit = steps["step2_fit"]
    lines += [
        "",
        "Step 2: exploratory boosted model",
        "---------------------------------",
        f"trees = {fit['n_trees']}, learn rate = {cfg['gbm']['learn_rate']}, "
        f"subsample = {cfg['gbm']['subsample_fraction']}, max leaves = {cfg['gbm']['max_leaves']}, "
        f"min leaf = {cfg['gbm']['min_obs_leaf']}, seed = {cfg['gbm']['seed']}",
        f"training R^2 = {fit['r_squared']:.4f}",
        f"MSE: initial {fit['initial_mse']:.6g}, final {fit['final_mse']:.6g}",
        f"flatline iteration (MSE within 5% of final): {fit['flatline_iteration']}",
        "",
        "Step 3: relative importance (scaled 0-100)",
        "------------------------------------------",
    ]
    docs = json.loads((out / "importance.json").read_text())
    by_method = {d["method"]: {r["feature"]: r for r in d["scores"]} for d in docs}
    if "split" not in by_method:
        lines.append(f"no splits: {steps['step3_importance'].get('notice')}")
    methods = [m for m in imp.METHODS if m in by_method]
    order = [r["feature"] for r in next(d for d in docs if d["method"] == methods[0])["scores"]]
    if "split" in by_method:
        order = [r["feature"] for r in next(d for d in docs if d["method"] == "split")["scores"]]
    header = f"{'feature':<12}" + "".join(f"{m:>14}{'rank':>6}" for m in methods)
    lines.append(header)
    for f in order:
        cells = "".join(f"{by_method[m][f]['scaled']:>14.2f}{by_method[m][f]['rank']:>6d}" for m in methods)
        lines.append(f"{f:<12}{cells}")

    if (out / "dominance.json").exists():
        dom = json.loads((out / "dominance.json").read_text())
        rw = json.loads((out / "relative_weights.json").read_text())
        lines += [
            "",
            "Econometric baselines (R^2 shares)",
            "----------------------------------",
            f"{'feature':<12}{'dominance':>12}{'rel.weight':>12}",
        ]
        for f in order:
            lines.append(f"{f:<12}{dom['general_dominance'][f]:>12.4f}{rw['epsilons'][f]:>12.4f}")
        lines.append(f"{'total':<12}{sum(dom['general_dominance'].values()):>12.4f}"
                     f"{sum(rw['epsilons'].values()):>12.4f}")
    return "\n".join(lines) + "\n"


def strip_wall_clock(obj):
    """Copy of a manifest dict without timing fields, for reproducibility diffs."""
    if isinstance(obj, dict):
        return {k: strip_wall_clock(v) for k, v in obj.items() if k != WALL_CLOCK_KEY}
    if isinstance(obj, list):
        return [strip_wall_clock(v) for v in obj]
    return obj


def default_fixture() -> Optional[Path]:
    p = Path(__file__).resolve().parents[2] / "data" / "food_inflation_fy92_fy16.csv"
    return p if p.exists() else None
