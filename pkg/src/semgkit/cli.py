"""Command-line entry point.

Subcommands: synth-session, theory-cmrr, bench-cmrr, decode, train,
evaluate. Exit codes: 0 success, 1 usage error, 2 completed with flagged
points or a failed threshold, 3 data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from semgkit import afe, cmrr, ingest, pipeline
from semgkit.protocol import FIVE_GESTURES, GestureLabel, ProtocolSpec
from semgkit.synth import ActivationTemplate, InterferenceModel, generate_session

#: Default seed for every generator subcommand, for reproducible artifacts.
DEFAULT_SEED = 12345

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FLAGGED = 2
EXIT_DATA = 3

_GESTURE_ALIASES = {
    "thumb": GestureLabel.THUMB,
    "index": GestureLabel.INDEX,
    "middle": GestureLabel.MIDDLE,
    "ring": GestureLabel.RING,
    "hand": GestureLabel.HAND_CLOSURE,
    "hand-closure": GestureLabel.HAND_CLOSURE,
    "handclosure": GestureLabel.HAND_CLOSURE,
}


class _Parser(argparse.ArgumentParser):
    """argparse with the documented usage exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _out_path(given: str | None, default_name: str) -> Path:
    if given:
        return Path(given)
    base = os.environ.get("SEMGKIT_OUT_DIR", ".")
    return Path(base) / default_name


def _parse_gestures(text: str) -> tuple[GestureLabel, ...]:
    out = []
    for tok in text.split(","):
        key = tok.strip().lower()
        if key not in _GESTURE_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown gesture {tok!r} (choose from "
                f"{', '.join(sorted(set(_GESTURE_ALIASES)))})")
        out.append(_GESTURE_ALIASES[key])
    return tuple(out)


def _model_from_args(args) -> tuple[afe.FrontEndModel, afe.AmplifierFloor]:
    values: dict[str, float] = {}
    if getattr(args, "model", None):
        with open(args.model, "r", encoding="utf-8") as f:
            values.update(afe.parse_config_text(f.read()))
    for item in getattr(args, "set", None) or []:
        values.update(afe.parse_config_text(item))
    return afe.build_from_config(values)


def _grid_from_args(args) -> tuple[float, ...]:
    return cmrr.default_grid(args.freq_min, args.freq_max, args.points)


def _add_grid_flags(p):
    p.add_argument("--freq-min", type=float, default=10.0,
                   help="sweep start (Hz), default 10")
    p.add_argument("--freq-max", type=float, default=500.0,
                   help="sweep end (Hz), default 500")
    p.add_argument("--points", type=int, default=25,
                   help="log-spaced grid points, default 25")


def _add_model_flags(p):
    p.add_argument("--model", metavar="FILE",
                   help="model parameter file (key = value, SI units)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one model parameter (repeatable); unknown "
                        "keys are rejected by name")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_synth_session(args) -> int:
    gestures = args.gestures or FIVE_GESTURES
    protocol = ProtocolSpec(sample_rate=args.sample_rate, channels=args.channels,
                            hold_s=args.hold, rest_s=args.rest,
                            reps_per_gesture=args.reps, gestures=gestures)
    noise = InterferenceModel.quiet() if args.no_noise else \
        InterferenceModel().with_noise_scale(args.noise_scale)
    template = ActivationTemplate.default(protocol.channels)
    rec = generate_session(protocol, template, noise, seed=args.seed,
                           subject_id=args.subject)
    out = _out_path(args.out, f"session_{args.subject}_{args.seed}.semg")
    out.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_recording(rec, out)
    hist = rec.label_histogram()
    print(f"wrote {out}")
    print(f"duration: {rec.duration_s:.1f} s, {rec.channels} channels at "
          f"{rec.sample_rate:g} Hz, seed {args.seed}")
    print("labels: " + ", ".join(
        f"{g.display_name}={n}" for g, n in hist.items() if n))
    return EXIT_OK


def _cmd_theory_cmrr(args) -> int:
    model, floor = _model_from_args(args)
    freqs = np.array(sorted(_grid_from_args(args)))
    if args.component == "model":
        vals = np.atleast_1d(afe.theoretical_cmrr(model, freqs))
    elif args.component == "filter":
        vals = np.atleast_1d(afe.theoretical_cmrr(model.matched_gains(), freqs))
    elif args.component == "gain":
        vals = np.atleast_1d(afe.theoretical_cmrr(model.matched_filter(), freqs))
    elif args.component == "amplifier":
        vals = np.atleast_1d(floor.cmrr_db(freqs))
    else:  # composite
        parts = np.vstack([
            np.atleast_1d(afe.theoretical_cmrr(model.matched_gains(), freqs)),
            np.atleast_1d(afe.theoretical_cmrr(model.matched_filter(), freqs)),
            np.atleast_1d(floor.cmrr_db(freqs)),
        ])
        vals = np.atleast_1d(afe.composite_cmrr(parts))
    lines = ["freq_hz,cmrr_db"]
    lines += [f"{f:.4f},{v:.4f}" for f, v in zip(freqs, vals)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_bench_cmrr(args) -> int:
    model, floor = _model_from_args(args)
    cfg = cmrr.BenchConfig(freq_list=_grid_from_args(args), fs=args.fs,
                           tone_amplitude=args.amplitude,
                           tone_duration_s=args.duration)
    if args.no_amplifier:
        dut = cmrr.FrontEndAdapter(model)
        measured = cmrr.sweep(dut, cfg)
        report = cmrr.compare_to_theory(measured, model, None)
    else:
        dut = cmrr.AmplifiedAdapter(model, floor)
        measured = cmrr.sweep(dut, cfg)
        report = cmrr.compare_to_theory(measured, model, floor)
    outdir = _out_path(args.out, "bench-cmrr")
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "sweep.csv").write_text(measured.to_csv())
    (outdir / "report.txt").write_text(report.render_text())
    if args.plot:
        _write_sweep_plot(outdir / "sweep.svg", measured, report)
    print(f"wrote {outdir}/sweep.csv and report.txt")
    print(f"mean measured CMRR over {len(report.rows)} grid points: "
          f"{report.mean_measured_db:.2f} dB")
    if measured.has_errors():
        bad = [p.freq for p in measured.points if p.status is cmrr.PointStatus.ERROR]
        print(f"flagged points at {bad} Hz", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def _write_sweep_plot(path: Path, measured: cmrr.CmrrCurve,
                      report: cmrr.ComparisonReport) -> None:
    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "semgkit"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ok = [p for p in measured.valid_points()]
    ax.semilogx([p.freq for p in ok], [p.cmrr_db for p in ok],
                "ko-", ms=4, label="measured")
    freqs = [r.freq for r in report.rows]
    for name in report.rows[0].components_db:
        ax.semilogx(freqs, [r.components_db[name] for r in report.rows],
                    "--", label=name)
    ax.semilogx(freqs, [r.composite_db for r in report.rows], "-",
                lw=1, label="composite")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("CMRR (dB)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def _cmd_decode(args) -> int:
    with open(args.infile, "rb") as f:
        raw = f.read()
    dec = ingest.StreamDecoder()
    counts, _ = dec.feed(raw)
    stats = dec.close()
    if len(counts) == 0:
        print("no valid frames in input", file=sys.stderr)
        return EXIT_DATA
    conv = ingest.ConversionSpec(vref=args.vref, gain=args.gain)
    protocol = ProtocolSpec(sample_rate=args.sample_rate, channels=4)
    rec = ingest.recording_from_counts(counts, conv, protocol, stats,
                                       subject_id=args.subject)
    out = _out_path(args.out, Path(args.infile).stem + ".semg")
    out.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_recording(rec, out)
    print(f"wrote {out}")
    print(f"frames ok={stats.frames_ok} corrupt={stats.frames_corrupt} "
          f"dropped={stats.frames_dropped} resyncs={stats.resyncs}")
    if stats.frames_corrupt or stats.frames_dropped:
        return EXIT_FLAGGED
    return EXIT_OK


def _settings_from_args(args) -> pipeline.PipelineSettings:
    return pipeline.PipelineSettings(window_s=args.window,
                                     zero_phase=not args.causal)


def _cmd_train(args) -> int:
    settings = _settings_from_args(args)
    maps: list = []
    labels: list = []
    fs = None
    for path in args.data:
        rec = ingest.read_recording(path)
        fs = rec.sample_rate
        m, lab = pipeline.session_maps(rec, settings)
        maps += m
        labels += lab
    model = pipeline.train(maps, labels, sample_rate=fs,
                           window_s=settings.window_s)
    out = _out_path(args.out, "classifier.semgmodel")
    out.parent.mkdir(parents=True, exist_ok=True)
    pipeline.save_model(model, out)
    print(f"wrote {out}")
    print(f"trained on {len(maps)} maps, rejection threshold "
          f"{model.reject_threshold:.4f}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    settings = _settings_from_args(args)
    split = pipeline.SplitSpec(seed=args.split_seed)
    if args.snr_sweep:
        scales = [float(s) for s in args.snr_sweep.split(",")]
        seeds = [DEFAULT_SEED + i for i in range(args.sweep_seeds)]
        means = pipeline.noise_sweep_accuracies(scales, seeds, split=split,
                                                settings=settings)
        print("noise_scale,mean_accuracy_pct")
        for scale, acc in zip(scales, means):
            print(f"{scale:g},{acc:.2f}")
        return EXIT_OK
    if not args.data:
        print("evaluate: either --data or --snr-sweep is required",
              file=sys.stderr)
        return EXIT_USAGE
    recordings = [ingest.read_recording(p) for p in args.data]
    report = pipeline.evaluate(recordings, split=split, settings=settings)
    text = report.render_text()
    print(text, end="")
    overall = report.overall_accuracy()
    verdict = "PASS" if overall >= args.threshold else "FAIL"
    print(f"threshold {args.threshold:.1f}%: {verdict}")
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(text)
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        Path(args.csv).write_text(report.to_csv())
    return EXIT_OK if verdict == "PASS" else EXIT_FLAGGED


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semgkit",
                     description="Desk-scale surface EMG toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-session", parents=[],
                       help="generate a labeled synthetic recording")
    p.add_argument("--out", metavar="FILE", help="output recording path")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"generator seed, default {DEFAULT_SEED}")
    p.add_argument("--subject", default="A", help="subject id for the header")
    p.add_argument("--reps", type=int, default=20,
                   help="repetitions per gesture, default 20")
    p.add_argument("--gestures", type=_parse_gestures, default=None,
                   help="comma list (thumb,index,middle,ring,hand); default all")
    p.add_argument("--sample-rate", type=float, default=250.0,
                   help="sampling rate (Hz), default 250")
    p.add_argument("--channels", type=int, default=4,
                   help="sensor channels, default 4")
    p.add_argument("--hold", type=float, default=5.0,
                   help="gesture hold time (s), default 5")
    p.add_argument("--rest", type=float, default=5.0,
                   help="rest time between holds (s), default 5")
    p.add_argument("--noise-scale", type=float, default=1.0,
                   help="white-noise density multiplier, default 1")
    p.add_argument("--no-noise", action="store_true",
                   help="disable all interference")
    p.set_defaults(func=_cmd_synth_session)

    p = sub.add_parser("theory-cmrr", help="emit analytic CMRR curve as CSV")
    _add_model_flags(p)
    _add_grid_flags(p)
    p.add_argument("--component",
                   choices=["model", "composite", "filter", "gain", "amplifier"],
                   default="model", help="which curve to emit, default model")
    p.add_argument("--out", metavar="FILE", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_theory_cmrr)

    p = sub.add_parser("bench-cmrr",
                       help="run the measurement sweep and compare to theory")
    _add_model_flags(p)
    _add_grid_flags(p)
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--fs", type=float, default=2000.0,
                   help="bench sampling rate (Hz), default 2000")
    p.add_argument("--duration", type=float, default=10.0,
                   help="tone duration per mode (s), default 10")
    p.add_argument("--amplitude", type=float, default=1.0,
                   help="tone amplitude (V), default 1")
    p.add_argument("--no-amplifier", action="store_true",
                   help="bench the bare front-end without the amplifier floor")
    p.add_argument("--plot", action="store_true", help="also write sweep.svg")
    p.set_defaults(func=_cmd_bench_cmrr)

    p = sub.add_parser("decode", help="decode a raw wire stream to a recording")
    p.add_argument("--in", dest="infile", required=True, metavar="FILE",
                   help="raw byte stream")
    p.add_argument("--out", metavar="FILE", help="output recording path")
    p.add_argument("--vref", type=float, default=4.5,
                   help="ADC reference (V), default 4.5")
    p.add_argument("--gain", type=float, default=24.0,
                   help="amplifier gain, default 24")
    p.add_argument("--sample-rate", type=float, default=250.0,
                   help="sampling rate (Hz), default 250")
    p.add_argument("--subject", default="", help="subject id for the header")
    p.set_defaults(func=_cmd_decode)

    for name in ("train", "evaluate"):
        p = sub.add_parser(name, help=f"{name} the gesture classifier")
        p.add_argument("--data", nargs="+", metavar="FILE",
                       required=(name == "train"),
                       help="recording files (one per subject)")
        p.add_argument("--window", type=float, default=3.0,
                       help="classification window length (s), default 3")
        p.add_argument("--causal", action="store_true",
                       help="causal filtering instead of zero-phase")
        if name == "train":
            p.add_argument("--out", metavar="FILE", help="model output path")
            p.set_defaults(func=_cmd_train)
        else:
            p.add_argument("--split-seed", type=int, default=DEFAULT_SEED,
                           help=f"train/test split seed, default {DEFAULT_SEED}")
            p.add_argument("--threshold", type=float, default=85.0,
                           help="pass/fail accuracy threshold (%%), default 85")
            p.add_argument("--report", metavar="FILE", help="write text report")
            p.add_argument("--csv", metavar="FILE", help="write CSV report")
            p.add_argument("--snr-sweep", metavar="SCALES",
                           help="comma list of noise scales; evaluate synthetic "
                                "sessions per scale instead of --data")
            p.add_argument("--sweep-seeds", type=int, default=5,
                           help="seeds per noise scale, default 5")
            p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except afe.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ingest.RecordingFormatError, ingest.FrameError,
            pipeline.MissingGestureError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
