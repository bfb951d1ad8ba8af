"""Remote-photoplethysmography toolkit: preprocessing, CHROM/POS pulse
extraction, surrogate label generation, spectral heart-rate estimation,
outlier filtering, agreement metrics and a synthetic verification oracle."""

from .clips import (ClipExportConfig, export_clips, read_split, resize_frame,
                    write_split)
from .csvio import (read_hr_csv, read_pulse_csv, read_ref_hr_csv,
                    read_sgt_sidecar, read_trace_csv, write_ba_pairs_csv,
                    write_corr_pairs_csv, write_hr_csv, write_pulse_csv,
                    write_report_json, write_sgt, write_sweep_histogram_csv,
                    write_trace_csv)
from .dsp import (FilterSpec, Spectrum, butterworth_bandpass, filter_forward,
                  filter_zero_phase, hann_window, magnitude_spectrum)
from .errors import ArgumentError, DataError, FormatError, PipelineError
from .evaluate import (BlandAltmanStats, HrConfig, MetricsReport, Pairs,
                       RoiSweepResult, align, bland_altman, mae, metrics_report,
                       pearson, rmse, roi_sweep, window_average_reference)
from .frames import (CfaLayout, FrameSequence, RawBayerFrame, Roi, crop_roi,
                     demosaic_bilinear, downsample, gray_world_balance,
                     load_bayer_frames, load_sequence, save_sequence)
from .hr import AmplitudeFilterParams, HrSeries, amplitude_filter, estimate_hr
from .rppg import (ChromParams, Method, PulseSignal, SgtLabels, chrom,
                   generate_sgt, pos)
from .synth import (SynthConfig, SynthTruth, generate, remosaic, save_synth,
                    save_synth_bayer, truth_hr)
from .traces import NormalizedTrace, RgbTrace, spatial_average, temporal_normalize

__version__ = "0.1.0"

__all__ = [
    "AmplitudeFilterParams", "ArgumentError", "BlandAltmanStats", "CfaLayout",
    "ChromParams", "ClipExportConfig", "DataError", "FilterSpec", "FormatError",
    "FrameSequence", "HrConfig", "HrSeries", "Method", "MetricsReport",
    "NormalizedTrace", "Pairs", "PipelineError", "PulseSignal", "RawBayerFrame",
    "RgbTrace", "Roi", "RoiSweepResult", "SgtLabels", "Spectrum", "SynthConfig",
    "SynthTruth", "align", "amplitude_filter", "bland_altman",
    "butterworth_bandpass", "chrom", "crop_roi", "demosaic_bilinear",
    "downsample", "estimate_hr", "export_clips", "filter_forward",
    "filter_zero_phase", "generate", "generate_sgt", "gray_world_balance",
    "hann_window", "load_bayer_frames", "load_sequence", "mae",
    "magnitude_spectrum", "metrics_report", "pearson", "pos", "read_hr_csv",
    "read_pulse_csv", "read_ref_hr_csv", "read_sgt_sidecar", "read_split",
    "read_trace_csv", "remosaic", "resize_frame", "rmse", "roi_sweep",
    "save_sequence", "save_synth", "save_synth_bayer", "spatial_average",
    "temporal_normalize", "truth_hr", "window_average_reference",
    "write_ba_pairs_csv", "write_corr_pairs_csv", "write_hr_csv",
    "write_pulse_csv", "write_report_json", "write_sgt", "write_split",
    "write_sweep_histogram_csv", "write_trace_csv",
    "__version__",
]
