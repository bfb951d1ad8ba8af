"""Training loop: Adam on negative Pearson loss with best-val checkpointing
and patience-based early stopping."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .data import (atomic_write_text, batch_tensors, load_clips, load_split,
                   normalize_batch)
from .errors import DataError
from .loss import neg_pearson_loss
from .model import DEFAULT_WIDTHS, build_model

BEST_CHECKPOINT = "checkpoint.pt"
LAST_CHECKPOINT = "last.pt"
HISTORY_FILE = "history.csv"


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 80
    lr: float = 1e-3
    batch: int = 2
    seed: int = 42
    patience: int = 10
    min_delta: float = 1e-3
    widths: tuple[int, ...] = DEFAULT_WIDTHS

    def __post_init__(self):
        if self.max_epochs < 1 or self.batch < 1 or self.patience < 1:
            raise DataError("max_epochs, batch and patience must be positive")
        if self.lr <= 0 or self.min_delta < 0:
            raise DataError("lr must be positive and min_delta non-negative")


def _save_checkpoint(path, model, optimizer, epoch, best_val, bad_epochs,
                     history, config: TrainConfig):
    payload = {
        "model": model.state_dict(),
        "optimizer": optimizer.state_dict(),
        "channels": model.channels,
        "widths": list(model.widths),
        "epoch": epoch,
        "best_val": best_val,
        "bad_epochs": bad_epochs,
        "history": history,
        "seed": config.seed,
    }
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    os.close(fd)
    try:
        torch.save(payload, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing checkpoint {path}")
    return torch.load(path, map_location="cpu", weights_only=True)


def _write_history(out_dir, history):
    lines = ["epoch,train_loss,val_loss"]
    lines += [f"{e},{tr!r},{va!r}" for e, tr, va in history]
    atomic_write_text(Path(out_dir) / HISTORY_FILE, "\n".join(lines) + "\n")


def _epoch_pass(model, clips, config, optimizer=None) -> float:
    """One pass over clips; trains when an optimizer is given. Returns the
    clip-weighted mean loss."""
    training = optimizer is not None
    model.train(training)
    total = 0.0
    for start in range(0, len(clips), config.batch):
        batch = clips[start : start + config.batch]
        x, y = batch_tensors(batch)
        x = normalize_batch(x)
        if training:
            optimizer.zero_grad()
            loss = neg_pearson_loss(model(x), y)
            loss.backward()
            optimizer.step()
        else:
            with torch.no_grad():
                loss = neg_pearson_loss(model(x), y)
        total += float(loss.detach()) * len(batch)
    return total / len(clips)


def train(clips_dir, out_dir, config: TrainConfig = TrainConfig(),
          resume: bool = False, log=print) -> dict:
    """Train on the split's train clips, early-stop on val loss, and leave
    checkpoint.pt (best val), last.pt (resumable) and history.csv in out_dir.

    Epoch shuffling is keyed on (seed, epoch) so a resumed run replays the
    exact batch order a continuous run would have used.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    split = load_split(clips_dir)
    if not split["train"] or not split["val"]:
        raise DataError("split must provide both train and val clips")
    train_clips = load_clips(clips_dir, split["train"])
    val_clips = load_clips(clips_dir, split["val"])
    if train_clips[0].channels != val_clips[0].channels:
        raise DataError("train and val clips disagree on channel count")

    torch.manual_seed(config.seed)
    model = build_model(train_clips[0].channels, config.widths)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)

    start_epoch = 0
    best_val = float("inf")
    bad_epochs = 0
    history: list = []
    if resume:
        state = load_checkpoint(out_dir / LAST_CHECKPOINT)
        model.load_state_dict(state["model"])
        optimizer.load_state_dict(state["optimizer"])
        start_epoch = state["epoch"]
        best_val = state["best_val"]
        bad_epochs = state["bad_epochs"]
        history = [tuple(row) for row in state["history"]]

    for epoch in range(start_epoch, config.max_epochs):
        order = np.random.default_rng([config.seed, epoch]).permutation(
            len(train_clips))
        shuffled = [train_clips[i] for i in order]
        train_loss = _epoch_pass(model, shuffled, config, optimizer)
        val_loss = _epoch_pass(model, val_clips, config)
        history.append((epoch + 1, train_loss, val_loss))
        _write_history(out_dir, history)

        if val_loss < best_val - config.min_delta:
            bad_epochs = 0
        else:
            bad_epochs += 1
        if val_loss < best_val:
            best_val = val_loss
            _save_checkpoint(out_dir / BEST_CHECKPOINT, model, optimizer,
                             epoch + 1, best_val, bad_epochs, history, config)
        _save_checkpoint(out_dir / LAST_CHECKPOINT, model, optimizer,
                         epoch + 1, best_val, bad_epochs, history, config)
        log(f"epoch {epoch + 1} train {train_loss:.4f} val {val_loss:.4f}")
        if bad_epochs >= config.patience:
            log(f"stopping: no {config.min_delta} val improvement in "
                f"{config.patience} epochs")
            break

    return {"best_val": best_val, "epochs_run": len(history),
            "history": history,
            "checkpoint": str(out_dir / BEST_CHECKPOINT)}
