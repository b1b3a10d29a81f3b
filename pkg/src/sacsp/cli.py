"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 training failure,
4 evaluation failure, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .algorithms import ALGORITHMS
from .classify import SacspModel, accuracy, fit_model
from .config import RunConfig, load_config
from .data import EpochSet
from .errors import ConfigError, FormatError, SacspError
from .evaluation import EvalReport, SplitPlan, run_kfold, run_transfer, transfer_subsets, _digest
from .io import load_model, read_epochs, save_model, write_epochs
from .preprocess import PreprocessConfig, bandpass_epochs
from .spectral import bin_frequencies
from .synth import generate

EXIT_OK, EXIT_CONFIG, EXIT_TRAIN, EXIT_EVAL, EXIT_IO = 0, 2, 3, 4, 5


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _config(path) -> RunConfig:
    try:
        return load_config(path)
    except ConfigError as exc:
        raise CliFailure(EXIT_CONFIG, str(exc)) from exc
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read config: {exc}") from exc


def _read(path) -> EpochSet:
    try:
        return read_epochs(path)
    except (OSError, FormatError) as exc:
        raise CliFailure(EXIT_IO, str(exc)) from exc


def _preprocess_fp(cfg: RunConfig) -> dict | None:
    if not cfg.apply_preprocess:
        return None
    p = cfg.preprocess
    return {"band": list(p.band), "filter_order": p.filter_order, "car": p.car}


def _apply(epochs: EpochSet, fp: dict | None) -> EpochSet:
    if fp is None:
        return epochs
    cfg = PreprocessConfig(band=tuple(fp["band"]), filter_order=fp["filter_order"], car=fp["car"])
    return bandpass_epochs(epochs, cfg)


def _with_seed(cfg: RunConfig, seed: int | None) -> RunConfig:
    if seed is None:
        return cfg
    synth = dataclasses.replace(cfg.synth, spec=dataclasses.replace(cfg.synth.spec, seed=seed).validate())
    return dataclasses.replace(cfg, synth=synth, sacsp=dataclasses.replace(cfg.sacsp, seed=seed),
                               eval=dataclasses.replace(cfg.eval, seed=seed))


def cmd_synth(args) -> int:
    cfg = _with_seed(_config(args.config), args.seed)
    spec = cfg.synth.spec
    calib, _ = generate(spec)
    online, _ = generate(spec.online(cfg.synth.n_online_per_class))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_epochs(out / "calib.epd", calib)
        write_epochs(out / "online.epd", online)
    except (OSError, FormatError) as exc:
        raise CliFailure(EXIT_IO, str(exc)) from exc
    print(f"wrote {len(calib)} calibration and {len(online)} online epochs "
          f"({spec.n_channels} ch, {spec.n_samples} samples @ {spec.fs:g} Hz) to {out}")
    for i, s in enumerate(spec.sources):
        drift = ""
        if s.online_class1_amp is not None or s.online_class2_amp is not None:
            drift = f" -> online {s.online_class1_amp}/{s.online_class2_amp}"
        print(f"  source {i}: {s.center_hz:g} Hz +/- {s.bandwidth_hz / 2:g} Hz, "
              f"amp class1/class2 {s.class1_amp}/{s.class2_amp}{drift}")
    return EXIT_OK


def train_model(epochs: EpochSet, algo: str, cfg: RunConfig) -> SacspModel:
    fp = _preprocess_fp(cfg)
    try:
        model = fit_model(_apply(epochs, fp), algo, cfg.sacsp)
    except SacspError as exc:
        raise CliFailure(EXIT_TRAIN, f"{type(exc).__name__}: {exc}") from exc
    model.fingerprint["preprocess"] = fp
    return model


def cmd_train(args) -> int:
    cfg = _with_seed(_config(args.config), args.seed)
    epochs = _read(args.epochs)
    model = train_model(epochs, args.algo, cfg)
    try:
        save_model(args.out, model)
    except OSError as exc:
        raise CliFailure(EXIT_IO, str(exc)) from exc
    print(f"{args.algo}: {len(model.bank.pairs)} filters, LDA shrinkage {model.lda.shrinkage_used:.3f}")
    for j, p in enumerate(model.bank.pairs):
        print(f"  filter {j}: class {p.class_id} objective {p.objective:.6g} iterations {p.iterations} "
              f"peak {p.spectral.peak_frequency():.1f} Hz")
    return EXIT_OK


def _eval_with_model(model: SacspModel, calib: EpochSet, online: EpochSet, plan: SplitPlan) -> EvalReport:
    """Score a fixed model on each repeat's balanced online subset."""
    fp = model.fingerprint.get("preprocess")
    online = _apply(online, fp)
    subsets = transfer_subsets(calib, online, plan)
    accs = [accuracy(model, online.subset(oi)) for _, oi in subsets]
    return EvalReport(accs, model.bank.algo, "transfer", [_digest(ci, oi) for ci, oi in subsets])


def cmd_eval(args) -> int:
    cfg = _with_seed(_config(args.config), args.seed)
    try:
        plan = SplitPlan(args.protocol or cfg.eval.protocol, cfg.eval.k,
                         args.repeats if args.repeats is not None else cfg.eval.n_repeats, cfg.eval.seed)
    except SacspError as exc:
        raise CliFailure(EXIT_EVAL, str(exc)) from exc
    calib, online = _read(args.calib), _read(args.online)
    try:
        if args.model:
            try:
                model = load_model(args.model)
            except (OSError, FormatError) as exc:
                raise CliFailure(EXIT_IO, str(exc)) from exc
            if plan.protocol != "transfer":
                raise CliFailure(EXIT_EVAL, "a saved model can only be evaluated with --protocol transfer")
            report = _eval_with_model(model, calib, online, plan)
        else:
            fp = _preprocess_fp(cfg)
            if plan.protocol == "transfer":
                report = run_transfer(_apply(calib, fp), _apply(online, fp), args.algo, cfg.sacsp, plan)
            else:
                report = run_kfold(_apply(calib, fp), args.algo, cfg.sacsp, plan)
    except CliFailure:
        raise
    except SacspError as exc:
        raise CliFailure(EXIT_EVAL, f"{type(exc).__name__}: {exc}") from exc
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        doc = report.to_dict() | {"seed": plan.seed, "k": plan.k if plan.protocol == "kfold" else None}
        (out / "report.json").write_text(json.dumps(doc, indent=1))
        with open(out / "report.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["repeat", "algo", "protocol", "accuracy", "subset_digest"])
            for r, (acc, dig) in enumerate(zip(report.per_repeat_accuracy, report.subset_digests)):
                w.writerow([r, report.algo, report.protocol, repr(float(acc)), dig])
    except OSError as exc:
        raise CliFailure(EXIT_IO, str(exc)) from exc
    print(report.summary())
    return EXIT_OK


def _svg_plot(freqs: np.ndarray, curves: np.ndarray, labels: list[str], fs: float) -> str:
    """Line plot of ``curves`` (one per row) against ``freqs`` on a 0..fs/2 axis."""
    width, height, left, right, top, bottom = 640, 360, 60, 20, 20, 45
    pw, ph = width - left - right, height - top - bottom
    ymax = max(float(curves.max()), 1e-12) * 1.05
    x = lambda f: left + pw * f / (fs / 2)
    y = lambda v: top + ph * (1 - v / ymax)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for tick in np.linspace(0, fs / 2, 6):
        out.append(f'<text x="{x(tick):.2f}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{tick:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 8}" font-size="12" text-anchor="middle">frequency (Hz)</text>')
    out.append(f'<text x="14" y="{top + ph / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {top + ph / 2})">weight</text>')
    for i, (curve, label) in enumerate(zip(curves, labels)):
        pts = " ".join(f"{x(f):.3f},{y(v):.3f}" for f, v in zip(freqs, curve))
        out.append(f'<polyline fill="none" stroke="{colors[i % len(colors)]}" stroke-width="1.5" '
                   f'points="{pts}"><title>{label}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_model(model: SacspModel, out_dir) -> None:
    bank = model.bank
    half = bank.t // 2 + 1
    freqs = bin_frequencies(bank.t, bank.fs)[:half]
    labels = [f"filter{j}_class{p.class_id}" for j, p in enumerate(bank.pairs)]
    curves = np.stack([p.spectral.weights / np.linalg.norm(p.spectral.weights) for p in bank.pairs])[:, :half]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "spectral_filters.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency_hz", *labels])
        for k in range(half):
            w.writerow([repr(float(freqs[k])), *(repr(float(v)) for v in curves[:, k])])
    with open(out / "spatial_patterns.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel_index", *(f"pattern{j}_class{p.class_id}" for j, p in enumerate(bank.pairs))])
        for ch, row in enumerate(bank.patterns):
            w.writerow([ch, *(repr(float(v)) for v in row)])
    (out / "spectral_filters.svg").write_text(_svg_plot(freqs, curves, labels, bank.fs))


def cmd_export(args) -> int:
    try:
        model = load_model(args.model)
        export_model(model, args.out)
    except (OSError, FormatError) as exc:
        raise CliFailure(EXIT_IO, str(exc)) from exc
    print(f"wrote spectral_filters.csv, spatial_patterns.csv and spectral_filters.svg to {args.out}")
    return EXIT_OK


def cmd_preprocess(args) -> int:
    cfg = _config(args.config)
    epochs = _read(args.epochs)
    try:
        done = bandpass_epochs(epochs, cfg.preprocess)
    except SacspError as exc:
        raise CliFailure(EXIT_CONFIG, f"{type(exc).__name__}: {exc}") from exc
    try:
        write_epochs(args.out, done)
    except (OSError, FormatError) as exc:
        raise CliFailure(EXIT_IO, str(exc)) from exc
    print(f"bandpassed {len(done)} epochs to {cfg.preprocess.band[0]:g}-{cfg.preprocess.band[1]:g} Hz")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sacsp", description="Spatio-spectral filter learning for two-class epochs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate calibration and online epoch files")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="re-reference and bandpass an epoch file")
    p.add_argument("epochs")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train filters and classifier")
    p.add_argument("epochs")
    p.add_argument("--algo", choices=ALGORITHMS, default="sacsp")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate on calibration and online epoch files")
    p.add_argument("calib")
    p.add_argument("online")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--config")
    p.add_argument("--protocol", choices=("transfer", "kfold"))
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="write spectral filters and spatial patterns as CSV and SVG")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
