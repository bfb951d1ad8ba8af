"""Inference: load a checkpoint and write per-clip predicted pulse CSVs in
the producer's label format."""

from __future__ import annotations

from pathlib import Path

import torch

from .data import list_clips, load_clip, normalize_batch, write_pulse_csv
from .model import build_model
from .train import load_checkpoint


def load_model(ckpt_path) -> torch.nn.Module:
    state = load_checkpoint(ckpt_path)
    model = build_model(state["channels"], tuple(state["widths"]))
    model.load_state_dict(state["model"])
    model.eval()
    return model


def predict(ckpt_path, clips_dir, out_dir, names=None) -> list[str]:
    """Returns the prediction CSV paths, one per clip, named after the clip.

    Each clip is standardized on its own (a batch of one) before the forward
    pass, matching the training-time batch normalization.
    """
    model = load_model(ckpt_path)
    clips_dir = Path(clips_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if names is None:
        names = list_clips(clips_dir)
    written = []
    for name in names:
        clip = load_clip(clips_dir / name)
        x = normalize_batch(clip.tensor.unsqueeze(0))
        with torch.no_grad():
            pulse = model(x)[0].numpy().astype(float)
        path = out_dir / f"{name}.csv"
        write_pulse_csv(path, clip.frame_index, clip.time_s, pulse)
        written.append(str(path))
    return written
