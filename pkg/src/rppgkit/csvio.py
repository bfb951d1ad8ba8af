"""Delimited-file and JSON serialization for traces, pulses, HR series and
reports.

Floats are written with repr() so that a read-back parses to the identical
IEEE-754 double; round-trips are bit-exact.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError
from .evaluate import BlandAltmanStats, MetricsReport, Pairs, RoiSweepResult
from .hr import DEFAULT_BAND_BPM, HrSeries
from .pnm import atomic_write_text
from .rppg import PulseSignal, SgtLabels
from .traces import RgbTrace


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def _read_csv(path, expected_header: list[str]) -> list[list[str]]:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"missing CSV file {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path} is empty") from None
        if header != expected_header:
            raise FormatError(
                f"{path} header {header!r} does not match expected {expected_header!r}")
        rows = [row for row in reader if row]
    for row in rows:
        if len(row) != len(expected_header):
            raise FormatError(f"{path} row {row!r} has {len(row)} fields, "
                              f"expected {len(expected_header)}")
    return rows


TRACE_HEADER = ["frame_index", "time_s", "r", "g", "b"]
PULSE_HEADER = ["frame_index", "time_s", "ppg"]
HR_HEADER = ["t_s", "bpm", "valid"]
REF_HR_HEADER = ["t_s", "bpm"]


def write_trace_csv(path, trace: RgbTrace) -> None:
    times = trace.times
    rows = ((i, _fmt(times[i]), _fmt(trace.r[i]), _fmt(trace.g[i]), _fmt(trace.b[i]))
            for i in range(len(trace)))
    _write_csv(path, TRACE_HEADER, rows)


def read_trace_csv(path) -> RgbTrace:
    rows = _read_csv(path, TRACE_HEADER)
    if not rows:
        raise FormatError(f"{path} holds no samples")
    try:
        times = np.array([float(r[1]) for r in rows])
        r = np.array([float(x[2]) for x in rows])
        g = np.array([float(x[3]) for x in rows])
        b = np.array([float(x[4]) for x in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric field ({exc})") from None
    fps, t0 = _infer_clock(times, path)
    return RgbTrace(r=r, g=g, b=b, fps=fps, t0=t0)


def _infer_clock(times: np.ndarray, path) -> tuple[float, float]:
    """Recover (fps, t0) from a uniformly sampled time column."""
    if len(times) < 2:
        return 1.0, float(times[0]) if len(times) else 0.0
    steps = np.diff(times)
    mean_step = float(steps.mean())
    if mean_step <= 0 or not np.allclose(steps, mean_step, rtol=1e-6, atol=1e-9):
        raise DataError(f"{path}: time column is not uniformly sampled")
    fps = 1.0 / mean_step
    nearest = round(fps)
    # sampling rates are integer in practice; snap when within float noise
    if nearest > 0 and abs(fps - nearest) < 1e-6 * nearest:
        fps = float(nearest)
    return fps, float(times[0])


def write_pulse_csv(path, pulse: PulseSignal) -> None:
    times = pulse.times
    rows = ((i, _fmt(times[i]), _fmt(pulse.samples[i])) for i in range(len(pulse)))
    _write_csv(path, PULSE_HEADER, rows)


def read_pulse_csv(path) -> PulseSignal:
    rows = _read_csv(path, PULSE_HEADER)
    if not rows:
        raise FormatError(f"{path} holds no samples")
    try:
        times = np.array([float(r[1]) for r in rows])
        ppg = np.array([float(r[2]) for r in rows])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric field ({exc})") from None
    fps, t0 = _infer_clock(times, path)
    return PulseSignal(ppg, fps=fps, t0=t0)


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_sgt(csv_path, labels: SgtLabels, fps: float, source_id: str) -> None:
    write_pulse_csv(csv_path, labels.pulse)
    meta = {
        "method": labels.method.value,
        "band_hz": [labels.band[0], labels.band[1]],
        "roi": labels.source_roi.to_dict(),
        "fps": fps,
        "source_id": source_id,
    }
    atomic_write_text(sidecar_path(csv_path), json.dumps(meta, indent=2) + "\n")


def read_sgt_sidecar(csv_path) -> dict:
    path = sidecar_path(csv_path)
    if not path.is_file():
        raise FormatError(f"missing sidecar {path}")
    try:
        meta = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    for key in ("method", "band_hz", "roi", "fps", "source_id"):
        if key not in meta:
            raise FormatError(f"{path}: missing field {key!r}")
    return meta


def write_hr_csv(path, hr: HrSeries) -> None:
    rows = ((_fmt(hr.t_s[i]), _fmt(hr.bpm[i]), int(hr.valid[i]))
            for i in range(len(hr)))
    _write_csv(path, HR_HEADER, rows)


def read_hr_csv(path, window_s: float = 10.0, stride_s: float | None = None,
                band_bpm: tuple[float, float] = DEFAULT_BAND_BPM) -> HrSeries:
    rows = _read_csv(path, HR_HEADER)
    if not rows:
        raise FormatError(f"{path} holds no windows")
    try:
        t_s = np.array([float(r[0]) for r in rows])
        bpm = np.array([float(r[1]) for r in rows])
        valid = np.array([int(r[2]) for r in rows], dtype=bool)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric field ({exc})") from None
    if stride_s is None:
        stride_s = float(np.diff(t_s).mean()) if len(t_s) > 1 else 1.0
    return HrSeries(t_s, bpm, valid, window_s, stride_s, band_bpm=band_bpm)


def read_ref_hr_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Reference HR samples (pulse-oximeter surrogate): bare t_s,bpm columns.
    Files using the full HR contract are accepted too; invalid rows are
    dropped."""
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"missing CSV file {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == HR_HEADER:
            rows = [row for row in reader if row]
            t = np.array([float(r[0]) for r in rows if int(r[2])])
            bpm = np.array([float(r[1]) for r in rows if int(r[2])])
        elif header == REF_HR_HEADER:
            rows = [row for row in reader if row]
            t = np.array([float(r[0]) for r in rows])
            bpm = np.array([float(r[1]) for r in rows])
        else:
            raise FormatError(f"{path} header {header!r} is neither "
                              f"{REF_HR_HEADER!r} nor {HR_HEADER!r}")
    if len(t) == 0:
        raise DataError(f"{path} holds no usable reference samples")
    return t, bpm


def write_report_json(path, report: MetricsReport, ba: BlandAltmanStats) -> None:
    payload = {
        "mae": report.mae,
        "rmse": report.rmse,
        "pearson_r": report.pearson_r,
        "n": report.n,
        "bland_altman": {
            "bias": ba.bias,
            "sd": ba.sd,
            "loa": [ba.loa_low, ba.loa_high],
        },
    }
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def write_ba_pairs_csv(path, ba: BlandAltmanStats) -> None:
    _write_csv(path, ["mean", "diff"],
               ((_fmt(m), _fmt(d)) for m, d in ba.pairs))


def write_corr_pairs_csv(path, pairs: Pairs) -> None:
    _write_csv(path, ["ref", "pred"],
               ((_fmt(r), _fmt(p)) for r, p in zip(pairs.ref, pairs.pred)))


def write_sweep_histogram_csv(path, sweep: RoiSweepResult) -> None:
    rows = ((_fmt(sweep.bin_edges[i]), _fmt(sweep.bin_edges[i + 1]),
             int(sweep.histogram[i])) for i in range(len(sweep.histogram)))
    _write_csv(path, ["bin_lo", "bin_hi", "count"], rows)
