"""Command-line pipeline: synth -> extract -> select -> eval, plus trend."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import (
    DEFAULT_AGE,
    DEFAULT_CLASS_SPECS,
    DEFAULT_WINDOW_SECONDS,
    ClassSpec,
    ExerciseState,
    Window,
    segment_windows,
    synthesize_dataset,
    synthesize_feature_dataset,
)
from .errors import HRVError, ParseError
from .experiment import CASES, ClassifierConfig, run_experiment, table_csv
from .features import ExtractionConfig, extract_dataset
from .frequency import rr_spectrum
from .io import (
    dataset_from_json,
    dataset_to_json,
    dump_json,
    read_features_csv,
    read_hr_csv,
    read_rr_csv,
    trend_to_json,
    write_curve_csv,
    write_features_csv,
    write_normality_csv,
    write_rr_csv,
    write_spectrum_csv,
)
from .selection import SUPPORTED_ALPHAS, rank_features
from .trend import REFERENCE_QUARTIC, TrendModel, eval_trend, fit_trend

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


@dataclass
class PipelineConfig:
    """Every knob of a pipeline run; persisted as JSON next to the outputs."""

    window_seconds: float = DEFAULT_WINDOW_SECONDS
    include_partial: bool = False
    subject_age: int = DEFAULT_AGE
    cases: list[int] = field(default_factory=lambda: [3, 4])
    top_k: int = 3
    alpha: float = 0.05
    normality_gate: str = "report"
    cv_folds: int = 5
    seed: int = 0
    degree: int = 4
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"dataset"}
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k in known}
        if "classifier" in kw:
            kw["classifier"] = ClassifierConfig(**kw["classifier"])
        if "cases" in kw:
            kw["cases"] = [int(c) for c in kw["cases"]]
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ParseError(f"{path}: bad config: {exc}") from None

    def save(self, path) -> None:
        dump_json(self.to_dict(), path)


# flag name -> PipelineConfig attribute (or classifier.<attr>)
_CONFIG_FLAGS = {
    "window_seconds": "window_seconds",
    "include_partial": "include_partial",
    "age": "subject_age",
    "case": "cases",
    "top_k": "top_k",
    "alpha": "alpha",
    "normality_gate": "normality_gate",
    "folds": "cv_folds",
    "seed": "seed",
    "degree": "degree",
    "nn_hidden": "classifier.nn_hidden",
    "nn_epochs": "classifier.nn_epochs",
    "nn_lr": "classifier.nn_lr",
    "svm_lambda": "classifier.svm_lambda",
    "svm_epochs": "classifier.svm_epochs",
    "svm_lr": "classifier.svm_lr",
    "dt_max_depth": "classifier.dt_max_depth",
    "dt_min_leaf": "classifier.dt_min_leaf",
}


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, then ``--config``, then explicit flags."""
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    d = cfg.to_dict()
    for flag, attr in _CONFIG_FLAGS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if attr.startswith("classifier."):
            d["classifier"][attr.split(".", 1)[1]] = value
        else:
            d[attr] = value
    return PipelineConfig.from_dict(d)


def _load_features(path):
    if str(path).endswith(".json"):
        records = json.loads(Path(path).read_text())
        if isinstance(records, dict):
            records = records.get("dataset", [])
        return dataset_from_json(records)
    return read_features_csv(path)


# --------------------------------------------------------------------------
# subcommands


def cmd_extract(args, cfg: PipelineConfig) -> int:
    label = ExerciseState.parse(args.label) if args.label is not None else None
    windows: list[Window] = []
    for gid, code, series in read_rr_csv(args.input, cfg.subject_age):
        state = ExerciseState(code) if code >= 0 else label
        cut = segment_windows(series, cfg.window_seconds, state, cfg.include_partial)
        for k, w in enumerate(cut):
            if gid is None:
                wid = f"w{int(w.window_id):03d}"
            else:
                wid = gid if len(cut) == 1 else f"{gid}:{k}"
            windows.append(Window(w.series, w.label, w.window_seconds, w.partial, wid))

    dataset = extract_dataset(windows, ExtractionConfig(), include_partial=cfg.include_partial)
    out = Path(args.output)
    if out.suffix == ".json":
        dump_json(dataset_to_json(dataset), out)
    else:
        write_features_csv(dataset, out)
    if args.spectrum_dir:
        sdir = Path(args.spectrum_dir)
        sdir.mkdir(parents=True, exist_ok=True)
        for w in windows:
            try:
                spec = rr_spectrum(w.series)
            except HRVError:
                continue
            write_spectrum_csv(spec, sdir / f"{w.window_id.replace('/', '_')}.csv")
    print(f"{len(dataset)} windows -> {out}")
    return EXIT_OK


def cmd_select(args, cfg: PipelineConfig) -> int:
    dataset = _load_features(args.input)
    result = rank_features(dataset, cfg.top_k, cfg.alpha, cfg.normality_gate)
    report = result.report()
    report["classes"] = [ExerciseState(c).name for c in report["classes"]]
    report["pairs"] = [[ExerciseState(a).name, ExerciseState(b).name] for a, b in report["pairs"]]
    report["config"] = {"top_k": cfg.top_k, "alpha": cfg.alpha, "normality_gate": cfg.normality_gate}
    dump_json(report, args.output)
    if args.normality_csv:
        write_normality_csv(result, args.normality_csv)
    print("selected: " + ", ".join(result.weights.selected))
    return EXIT_OK


def cmd_eval(args, cfg: PipelineConfig) -> int:
    dataset = _load_features(args.input)
    selected = None
    if args.weights:
        selected = json.loads(Path(args.weights).read_text())["selected"]
    reports = [
        run_experiment(
            dataset,
            case,
            cfg.cv_folds,
            cfg.seed,
            cfg.classifier,
            cfg.top_k,
            selected if case == 4 else None,
            cfg.normality_gate,
        )
        for case in cfg.cases
    ]
    dump_json({"config": cfg.to_dict(), "reports": [r.to_dict() for r in reports]}, args.output)
    table = table_csv(reports)
    if args.table:
        Path(args.table).write_text(table)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_trend(args, cfg: PipelineConfig) -> int:
    if args.input is None:
        model = TrendModel.from_coefficients(REFERENCE_QUARTIC)
        grid = np.linspace(0.0, 9000.0, 181)
    else:
        pts = read_hr_csv(args.input)
        model = fit_trend(pts, cfg.degree)
        grid = np.linspace(model.t_min, model.t_max, 181)
    dump_json(trend_to_json(model), args.output)
    if args.curve:
        write_curve_csv(grid, eval_trend(model, grid), args.curve)
    print(f"degree {model.degree}, rms {model.residual_rms:.4g} BPM")
    return EXIT_OK


def _load_specs(path) -> dict:
    raw = json.loads(Path(path).read_text())
    specs = {}
    for name, params in raw.items():
        try:
            specs[ExerciseState.parse(name)] = ClassSpec(**params)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: class {name!r}: {exc}") from None
    return specs


def cmd_synth(args, cfg: PipelineConfig) -> int:
    specs = _load_specs(args.spec) if args.spec else DEFAULT_CLASS_SPECS
    if args.feature_space:
        counts = [specs[s].count for s in sorted(specs, key=int)]
        dataset, informative = synthesize_feature_dataset(counts, seed=cfg.seed)
        labels = np.array([int(sorted(specs, key=int)[i]) for i in dataset.y])
        dataset = type(dataset)(dataset.X, labels, dataset.feature_names, tuple(f"f{i:03d}" for i in range(len(labels))))
        write_features_csv(dataset, args.output)
        print(f"{len(dataset)} rows, informative: {', '.join(informative)} -> {args.output}")
        return EXIT_OK
    windows = synthesize_dataset(specs, cfg.seed, cfg.window_seconds, cfg.subject_age)
    write_rr_csv(windows, args.output)
    print(f"{len(windows)} windows -> {args.output}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="PipelineConfig JSON; explicit flags override it")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--age", type=int, help=f"subject age in years (default {DEFAULT_AGE})")
    p.add_argument("--save-config", help="write the resolved PipelineConfig JSON here")


def build_parser() -> argparse.ArgumentParser:
    clf = ClassifierConfig()
    parser = argparse.ArgumentParser(
        prog="hrvfatigue",
        description="HRV feature extraction, overlap-based feature selection and "
        "exercise-state classification. Exit codes: 0 ok, 1 data error, 2 usage error.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="RR CSV -> feature CSV (or .json)")
    p.add_argument("input", help="CSV with rr_ms and optional t_ms, window_id, label columns")
    p.add_argument("-o", "--output", default="features.csv", help="default features.csv")
    p.add_argument("--window-seconds", type=float,
                   help=f"window length (default {DEFAULT_WINDOW_SECONDS:g})")
    p.add_argument("--label", help="exercise state for rows without a label column")
    p.add_argument("--include-partial", action="store_true", default=None,
                   help="keep windows whose RR sum is outside 0.9-1.1 x window (default off)")
    p.add_argument("--spectrum-dir", help="dump freq_hz,psd_ms2_per_hz per window here")
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("select", help="feature CSV -> weights JSON")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="weights.json", help="default weights.json")
    p.add_argument("--top-k", type=int, help="features to keep (default 3)")
    p.add_argument("--alpha", type=float, choices=SUPPORTED_ALPHAS,
                   help="normality test level (default 0.05)")
    p.add_argument("--normality-gate", choices=("report", "exclude", "off"),
                   help="report: test and record only; exclude: drop features failing "
                   "in any class; off: skip tests (default report)")
    p.add_argument("--normality-csv", help="write per-class chi-square results here")
    _add_common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", help="cross-validated accuracy per case -> report JSON + CSV table")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="report.json", help="default report.json")
    p.add_argument("--table", help="write the case x classifier accuracy CSV here")
    p.add_argument("--case", type=int, action="append", choices=sorted(CASES),
                   help="0 time, 1 time+nonlinear, 2 freq+nonlinear, 3 all, "
                   "4 selected; repeatable (default 3 and 4)")
    p.add_argument("--weights", help="weights JSON fixing the case-4 subset "
                   "(default: re-select inside each training fold)")
    p.add_argument("--folds", type=int, help="stratified CV folds (default 5)")
    p.add_argument("--top-k", type=int, help="case-4 subset size (default 3)")
    p.add_argument("--normality-gate", choices=("report", "exclude", "off"),
                   help="as for select (default report)")
    p.add_argument("--nn-hidden", type=int, help=f"default {clf.nn_hidden}")
    p.add_argument("--nn-epochs", type=int, help=f"default {clf.nn_epochs}")
    p.add_argument("--nn-lr", type=float, help=f"default {clf.nn_lr}")
    p.add_argument("--svm-lambda", type=float, help=f"default {clf.svm_lambda}")
    p.add_argument("--svm-epochs", type=int, help=f"default {clf.svm_epochs}")
    p.add_argument("--svm-lr", type=float, help=f"default {clf.svm_lr}")
    p.add_argument("--dt-max-depth", type=int, help=f"default {clf.dt_max_depth}")
    p.add_argument("--dt-min-leaf", type=int, help=f"default {clf.dt_min_leaf}")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trend", help="t_s,hr_bpm CSV -> polynomial trend JSON")
    p.add_argument("input", nargs="?", help="omit to emit the built-in reference quartic")
    p.add_argument("-o", "--output", default="trend.json", help="default trend.json")
    p.add_argument("--degree", type=int, help="polynomial degree (default 4)")
    p.add_argument("--curve", help="write t_s,hr_bpm samples of the fitted curve here")
    _add_common(p)
    p.set_defaults(func=cmd_trend)

    p = sub.add_parser("synth", help="synthetic labelled RR windows (42/40/12/42/12 by default)")
    p.add_argument("spec", nargs="?", help="JSON {state: ClassSpec fields}; default built-in")
    p.add_argument("-o", "--output", default="rr.csv", help="default rr.csv")
    p.add_argument("--window-seconds", type=float,
                   help=f"window length (default {DEFAULT_WINDOW_SECONDS:g})")
    p.add_argument("--feature-space", action="store_true",
                   help="emit a Gaussian feature CSV with 3 informative columns instead of RR")
    _add_common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        cfg = resolve_config(args)
        bad = [c for c in cfg.cases if c not in CASES]
        if bad:
            parser.error(f"unknown case id(s) {bad}; choose from {sorted(CASES)}")
        if args.save_config:
            cfg.save(args.save_config)
        return args.func(args, cfg)
    except (ValueError, OSError, KeyError) as exc:
        print(f"hrvfatigue {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
