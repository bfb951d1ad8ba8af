"""Command-line front end for the pulse-extraction pipeline.

Subcommands: preprocess | sgt | hr | eval | sweep | synth | clips. Every
flag can also be supplied through a JSON config file (--config); explicit
flags override file values. Exit codes: 0 success, 2 argument or format
error, 3 data or alignment error, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import csvio, report
from .clips import ClipExportConfig, export_clips
from .errors import ArgumentError, DataError, FormatError, PipelineError
from .evaluate import (HrConfig, align, bland_altman, metrics_report, roi_sweep,
                       window_average_reference)
from .frames import (CfaLayout, RawBayerFrame, Roi, crop_roi, demosaic_bilinear,
                     downsample, gray_world_balance, load_frame_stack,
                     load_sequence, save_frame_stack)
from .hr import AmplitudeFilterParams, HrSeries, amplitude_filter, estimate_hr
from .rppg import ChromParams, Method, generate_sgt
from .synth import SynthConfig, SynthTruth, generate, save_synth, save_synth_bayer, truth_hr
from .traces import spatial_average

PROG = "rppg"


def _workers() -> int:
    raw = os.environ.get("RPPG_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ArgumentError(f"RPPG_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _parse_pair(value, name: str) -> tuple[float, float]:
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).split(",")
    if len(parts) != 2:
        raise ArgumentError(f"{name} must be 'LO,HI', got {value!r}")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ArgumentError(f"{name} components must be numbers, got {value!r}") from None
    return lo, hi


def _parse_triple(value, name: str) -> tuple[float, float, float]:
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).split(",")
    if len(parts) != 3:
        raise ArgumentError(f"{name} must be 'R,G,B', got {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ArgumentError(f"{name} components must be numbers, got {value!r}") from None


def _parse_int_list(value, name: str) -> tuple[int, ...]:
    if isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = str(value).split(",")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ArgumentError(f"{name} must be comma-separated integers, got {value!r}") from None


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ArgumentError(f"--{name.replace('_', '-')} is required")


def cmd_preprocess(args: argparse.Namespace) -> int:
    _require(args, "input", "output")
    workers = _workers()
    stack, meta = load_frame_stack(args.input)
    if meta["color"] == "bayer":
        layout = CfaLayout.parse(args.cfa if args.cfa else meta["cfa"])
        rgb = _pmap(lambda f: demosaic_bilinear(RawBayerFrame(f, layout)),
                    list(stack), workers)
    elif meta["color"] == "rgb":
        rgb = list(stack)
    else:
        raise FormatError(f"cannot preprocess color {meta['color']!r} input")
    if args.downsample > 1:
        rgb = _pmap(lambda f: downsample(f, args.downsample), rgb, workers)
    if args.white_balance == "grayworld":
        rgb = _pmap(gray_world_balance, rgb, workers)
    if args.roi:
        roi = Roi.parse(args.roi)
        roi.require_fits(*rgb[0].shape[:2])
        rgb = [crop_roi(f, roi) for f in rgb]
    save_frame_stack(args.output, np.stack(rgb), float(meta["fps"]), "rgb",
                     source_id=meta.get("source_id"))
    print(f"wrote {len(rgb)} rgb frames to {args.output}")
    return 0


def cmd_sgt(args: argparse.Namespace) -> int:
    _require(args, "input", "output", "roi")
    seq = load_sequence(args.input)
    roi = Roi.parse(args.roi)
    roi.require_fits(*seq.frame_shape)
    band = _parse_pair(args.band, "--band")
    params = ChromParams(window_s=args.window, overlap=args.overlap,
                         filter_order=args.filter_order)
    labels = generate_sgt(seq, roi, args.method, band=band, params=params)
    csvio.write_sgt(args.output, labels, fps=seq.fps, source_id=seq.source_id)
    if args.trace_out:
        csvio.write_trace_csv(args.trace_out, spatial_average(seq, roi))
    if labels.pulse.degenerate_windows:
        print(f"warning: {len(labels.pulse.degenerate_windows)} degenerate windows",
              file=sys.stderr)
    print(f"wrote {len(labels.pulse)} labels to {args.output}")
    return 0


def cmd_hr(args: argparse.Namespace) -> int:
    _require(args, "input", "output")
    pulse = csvio.read_pulse_csv(args.input)
    if args.band_bpm is not None:
        band_bpm = _parse_pair(args.band_bpm, "--band-bpm")
    else:
        band_bpm = None
        try:
            sidecar = csvio.read_sgt_sidecar(args.input)
            lo, hi = sidecar["band_hz"]
            band_bpm = (float(lo) * 60.0, float(hi) * 60.0)
        except FormatError:
            pass
        if band_bpm is None:
            band_bpm = (90.0, 240.0)
    series = estimate_hr(pulse, args.window, args.stride, band_bpm)
    if not args.no_filter:
        params = AmplitudeFilterParams(context_s=args.context, z_max=args.z_max,
                                       min_snr_db=args.min_snr_db)
        series = amplitude_filter(series, pulse, params)
        if series.all_invalid:
            print("warning: every window failed the amplitude filter",
                  file=sys.stderr)
    csvio.write_hr_csv(args.output, series)
    print(f"wrote {len(series)} windows to {args.output}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    _require(args, "pred", "ref", "output_dir")
    pred = csvio.read_hr_csv(args.pred, window_s=args.window)
    ref_t, ref_bpm = csvio.read_ref_hr_csv(args.ref)
    if args.ref_window > 0:
        grid = HrSeries(pred.t_s, pred.bpm, pred.valid, args.ref_window,
                        pred.stride_s, band_bpm=pred.band_bpm)
        ref_series = window_average_reference(ref_t, ref_bpm, grid)
    else:
        order = np.argsort(ref_t)
        stride = float(np.diff(ref_t[order]).mean()) if len(ref_t) > 1 else 1.0
        ref_series = HrSeries(ref_t[order], ref_bpm[order],
                              np.ones(len(ref_t), dtype=bool),
                              args.window, stride)
    pairs = align(pred, ref_series, tol_s=args.tol)
    rep = metrics_report(pairs, allow_constant=args.allow_constant)
    ba = bland_altman(pairs)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    csvio.write_report_json(outdir / "report.json", rep, ba)
    csvio.write_ba_pairs_csv(outdir / "ba_pairs.csv", ba)
    csvio.write_corr_pairs_csv(outdir / "corr_pairs.csv", pairs)
    if not args.no_figures:
        report.render_bland_altman(outdir / "ba_plot.png", ba)
        if rep.pearson_r is not None:
            report.render_correlation(outdir / "corr_plot.png", pairs)
        report.render_hr_overlay(outdir / "hr_overlay.png", pred,
                                 ref_series.t_s[ref_series.valid],
                                 ref_series.bpm[ref_series.valid])
    r_text = "null" if rep.pearson_r is None else f"{rep.pearson_r:.4f}"
    print(f"mae={rep.mae:.4f} rmse={rep.rmse:.4f} pearson_r={r_text} n={rep.n}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    _require(args, "input", "roi", "output_dir")
    seq = load_sequence(args.input)
    base = Roi.parse(args.roi)
    base.require_fits(*seq.frame_shape)
    increments = _parse_int_list(args.increments, "--increments")
    band_bpm = _parse_pair(args.band_bpm, "--band-bpm")
    config = HrConfig(window_s=args.window, stride_s=args.stride, band_bpm=band_bpm)
    params = ChromParams(window_s=args.chrom_window, overlap=args.overlap,
                         filter_order=args.filter_order)
    result = roi_sweep(seq, base, increments, args.method, config, params,
                       workers=_workers())
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    csvio.write_sweep_histogram_csv(outdir / "sweep_hist.csv", result)
    if not args.no_figures:
        report.render_sweep_histogram(outdir / "sweep_hist.png", result)
    changes = result.relative_changes_bpm
    within = float(np.mean(np.abs(changes) <= 5.0)) if len(changes) else 1.0
    print(f"pooled {len(changes)} window diffs; {within:.1%} within +/-5 bpm")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    _require(args, "output")
    bpm = _parse_pair(args.bpm, "--bpm") if "," in str(args.bpm) else float(args.bpm)
    config = SynthConfig(
        width=args.width, height=args.height, fps=args.fps,
        duration_s=args.duration,
        skin_region=Roi.parse(args.skin_roi) if args.skin_roi else None,
        base_rgb=_parse_triple(args.base_rgb, "--base-rgb"),
        pulse_bpm=bpm,
        pulse_amp_rgb=_parse_triple(args.amp_rgb, "--amp-rgb"),
        noise_sigma=args.noise,
        flicker=_parse_pair(args.flicker, "--flicker") if args.flicker else None,
        jitter_px=args.jitter,
        seed=args.seed,
    )
    seq, truth = generate(config)
    truth = SynthTruth(truth.pulse,
                       truth_hr(config, args.truth_window, args.truth_stride))
    if args.mosaic:
        save_synth_bayer(args.output, seq, truth, CfaLayout.parse(args.mosaic))
    else:
        save_synth(args.output, seq, truth)
    kind = f"bayer ({args.mosaic})" if args.mosaic else "rgb"
    print(f"wrote {len(seq)} {kind} frames to {args.output}")
    return 0


def cmd_clips(args: argparse.Namespace) -> int:
    _require(args, "input", "labels", "output")
    seq = load_sequence(args.input)
    pulse = csvio.read_pulse_csv(args.labels)
    roi = None
    try:
        sidecar = csvio.read_sgt_sidecar(args.labels)
        r = sidecar["roi"]
        roi = Roi(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"]))
    except FormatError:
        pass
    config = ClipExportConfig(clip_len=args.frames, stride=args.clip_stride,
                              size=args.size, mode=args.resize,
                              split_ratio=args.split, seed=args.seed)
    names = export_clips(seq, pulse, args.output, config, roi=roi)
    if not names:
        print(f"warning: {len(seq)} frames is fewer than one {config.clip_len}-frame "
              f"clip; nothing exported", file=sys.stderr)
        return 0
    print(f"wrote {len(names)} clips to {args.output}")
    return 0


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog=PROG, description="Remote-photoplethysmography pipeline tools")
    subs = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parsers = {}

    def sub(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = subs.add_parser(name, help=help_text, formatter_class=fmt)
        p.add_argument("--config", default=None,
                       help="JSON file of flag values; explicit flags override")
        p.set_defaults(func=func)
        parsers[name] = p
        return p

    p = sub("preprocess", cmd_preprocess,
            "demosaic, downsample and white-balance a frame directory")
    p.add_argument("--input", default=None, help="input frame directory")
    p.add_argument("--output", default=None, help="output frame directory")
    p.add_argument("--cfa", default=None,
                   help="override CFA layout (rggb|bggr|grbg|gbrg)")
    p.add_argument("--downsample", type=int, default=3,
                   help="downsample factor (1 = none)")
    p.add_argument("--white-balance", choices=("grayworld", "none"),
                   default="grayworld", help="white-balance mode")
    p.add_argument("--roi", default=None, help="crop to 'x,y,w,h' after balancing")

    p = sub("sgt", cmd_sgt, "generate surrogate labels from a frame directory")
    p.add_argument("--input", default=None, help="rgb frame directory")
    p.add_argument("--output", default=None, help="label CSV path")
    p.add_argument("--roi", default=None, help="analysis region 'x,y,w,h'")
    p.add_argument("--method", choices=("chrom", "pos"), default="chrom",
                   help="projection method")
    p.add_argument("--band", default="1.3,4.0",
                   help="band-pass edges in Hz, 'LO,HI' (78-240 bpm)")
    p.add_argument("--window", type=float, default=1.6,
                   help="projection window length in seconds")
    p.add_argument("--overlap", type=float, default=0.5,
                   help="projection window overlap fraction")
    p.add_argument("--filter-order", type=int, default=4,
                   help="Butterworth prototype order")
    p.add_argument("--trace-out", default=None,
                   help="also write the spatial-average RGB trace CSV here")

    p = sub("hr", cmd_hr, "estimate heart rate from a pulse CSV")
    p.add_argument("--input", default=None, help="pulse CSV (labels or predictions)")
    p.add_argument("--output", default=None, help="HR CSV path")
    p.add_argument("--window", type=float, default=10.0,
                   help="analysis window in seconds")
    p.add_argument("--stride", type=float, default=1.0,
                   help="window stride in seconds")
    p.add_argument("--band-bpm", default=None,
                   help="peak-search band 'LO,HI' in bpm (default: the label "
                        "sidecar band when present, else 90,240)")
    p.add_argument("--no-filter", action="store_true",
                   help="skip the amplitude filter")
    p.add_argument("--context", type=float, default=30.0,
                   help="amplitude-filter rolling context in seconds")
    p.add_argument("--z-max", type=float, default=3.0,
                   help="robust z-score threshold")
    p.add_argument("--min-snr-db", type=float, default=2.0,
                   help="minimum spectral peak SNR in dB")

    p = sub("eval", cmd_eval, "compare predicted HR against a reference")
    p.add_argument("--pred", default=None, help="predicted HR CSV")
    p.add_argument("--ref", default=None, help="reference HR CSV (t_s,bpm)")
    p.add_argument("--output-dir", default=None, help="report directory")
    p.add_argument("--tol", type=float, default=0.5,
                   help="alignment tolerance in seconds")
    p.add_argument("--window", type=float, default=10.0,
                   help="window length the predictions were computed with")
    p.add_argument("--ref-window", type=float, default=0.0,
                   help="average reference samples over this many seconds on "
                        "the prediction grid (0 = use reference as-is)")
    p.add_argument("--allow-constant", action="store_true",
                   help="report null Pearson r for constant series instead of failing")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")

    p = sub("sweep", cmd_sweep, "HR sensitivity to ROI growth")
    p.add_argument("--input", default=None, help="rgb frame directory")
    p.add_argument("--roi", default=None, help="base region 'x,y,w,h'")
    p.add_argument("--output-dir", default=None, help="output directory")
    p.add_argument("--increments", default="10,20,30,40",
                   help="pixel increments, comma separated")
    p.add_argument("--method", choices=("chrom", "pos"), default="chrom",
                   help="projection method")
    p.add_argument("--window", type=float, default=10.0,
                   help="HR window in seconds")
    p.add_argument("--stride", type=float, default=1.0,
                   help="HR stride in seconds")
    p.add_argument("--band-bpm", default="90,240",
                   help="peak-search band 'LO,HI' in bpm")
    p.add_argument("--chrom-window", type=float, default=1.6,
                   help="projection window length in seconds")
    p.add_argument("--overlap", type=float, default=0.5,
                   help="projection window overlap fraction")
    p.add_argument("--filter-order", type=int, default=4,
                   help="Butterworth prototype order")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")

    p = sub("synth", cmd_synth, "generate a synthetic pulsatile sequence")
    p.add_argument("--output", default=None, help="output directory")
    p.add_argument("--width", type=int, default=64, help="frame width")
    p.add_argument("--height", type=int, default=64, help="frame height")
    p.add_argument("--fps", type=float, default=25.0, help="frame rate")
    p.add_argument("--duration", type=float, default=60.0, help="seconds")
    p.add_argument("--skin-roi", default=None,
                   help="skin region 'x,y,w,h' (default: centered half frame)")
    p.add_argument("--base-rgb", default="150,100,80", help="skin base levels")
    p.add_argument("--bpm", default="120",
                   help="pulse rate; 'START,END' makes a linear chirp")
    p.add_argument("--amp-rgb", default="0.8,1.5,0.6",
                   help="per-channel modulation amplitudes")
    p.add_argument("--noise", type=float, default=0.0,
                   help="additive Gaussian sigma in levels")
    p.add_argument("--flicker", default=None,
                   help="illumination flicker 'FREQ_HZ,REL_AMP'")
    p.add_argument("--jitter", type=int, default=0,
                   help="max skin-region translation in pixels")
    p.add_argument("--seed", type=int, default=42, help="noise seed")
    p.add_argument("--mosaic", default=None,
                   help="emit a Bayer mosaic with this CFA instead of rgb")
    p.add_argument("--truth-window", type=float, default=10.0,
                   help="truth HR window in seconds")
    p.add_argument("--truth-stride", type=float, default=1.0,
                   help="truth HR stride in seconds")

    p = sub("clips", cmd_clips, "export fixed-length training clips")
    p.add_argument("--input", default=None, help="rgb frame directory")
    p.add_argument("--labels", default=None, help="label CSV (with sidecar)")
    p.add_argument("--output", default=None, help="clip output directory")
    p.add_argument("--frames", type=int, default=148, help="frames per clip")
    p.add_argument("--clip-stride", type=int, default=148,
                   help="frame stride between clips")
    p.add_argument("--size", type=int, default=128, help="output frame size")
    p.add_argument("--resize", choices=("bilinear", "nearest"),
                   default="bilinear", help="resampling mode")
    p.add_argument("--split", type=float, default=0.6,
                   help="train fraction for split.json")
    p.add_argument("--seed", type=int, default=42, help="split shuffle seed")

    return parser, parsers


def entrypoint(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, parsers = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            path = Path(args.config)
            if not path.is_file():
                raise ArgumentError(f"config file not found: {path}")
            try:
                overrides = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid JSON ({exc})") from None
            if not isinstance(overrides, dict):
                raise FormatError(f"{path}: config must be a JSON object")
            sub = parsers[args.command]
            known = {a.dest for a in sub._actions}
            unknown = set(overrides) - known
            if unknown:
                raise ArgumentError(
                    f"unknown config keys: {', '.join(sorted(unknown))}")
            sub.set_defaults(**overrides)
            args = parser.parse_args(argv)
        return args.func(args)
    except (ArgumentError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort guard for exit code 1
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(entrypoint())
