"""Negative Pearson loss for waveform supervision."""

from __future__ import annotations

import torch

from .errors import DataError

# Constant series have zero variance; clamping the denominator (rather than
# adding the epsilon) keeps non-degenerate losses exactly 1 - r while still
# bounding the division.
EPS = 1e-8


def neg_pearson_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """1 - Pearson r per series, averaged over the batch. Range [0, 2];
    invariant to positive affine transforms of either argument."""
    pred = torch.as_tensor(pred)
    target = torch.as_tensor(target)
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch {tuple(pred.shape)} vs "
                        f"{tuple(target.shape)}")
    if pred.dim() == 1:
        pred = pred.unsqueeze(0)
        target = target.unsqueeze(0)
    if pred.dim() != 2:
        raise DataError(f"expected 1-D or 2-D series, got {pred.dim()}-D")
    if pred.shape[-1] < 2:
        raise DataError("series must hold at least 2 samples")
    pd = pred - pred.mean(dim=-1, keepdim=True)
    td = target - target.mean(dim=-1, keepdim=True)
    num = (pd * td).sum(dim=-1)
    den = torch.sqrt((pd * pd).sum(dim=-1) * (td * td).sum(dim=-1)).clamp(min=EPS)
    return (1.0 - num / den).mean()
