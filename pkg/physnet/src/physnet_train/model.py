"""Toy-scale spatio-temporal pulse regressor.

Four Conv3d-BatchNorm-ReLU blocks, each halving the spatial extent while
preserving the temporal axis, then spatial global pooling and a temporal
convolution head emitting one value per input frame. The supervision
mechanism, not architecture scale, is what this component exercises.
"""

from __future__ import annotations

import torch
from torch import nn

DEFAULT_WIDTHS = (8, 16, 32, 32)


class ToyPhysNet(nn.Module):
    def __init__(self, channels: int = 3,
                 widths: tuple[int, ...] = DEFAULT_WIDTHS):
        super().__init__()
        blocks = []
        c_in = channels
        for c_out in widths:
            blocks += [
                nn.Conv3d(c_in, c_out, kernel_size=3, padding=1),
                nn.BatchNorm3d(c_out),
                nn.ReLU(inplace=True),
                # spatial stride-2 pooling only; ceil mode keeps 1-pixel
                # maps legal so small inputs degrade instead of failing
                nn.MaxPool3d(kernel_size=(1, 2, 2), stride=(1, 2, 2),
                             ceil_mode=True),
            ]
            c_in = c_out
        self.encoder = nn.Sequential(*blocks)
        self.head = nn.Conv1d(c_in, 1, kernel_size=3, padding=1)
        self.channels = channels
        self.widths = tuple(widths)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, C, T, H, W) -> (B, T)"""
        feat = self.encoder(x)
        pooled = feat.mean(dim=(3, 4))
        return self.head(pooled).squeeze(1)


def build_model(channels: int, widths: tuple[int, ...] = DEFAULT_WIDTHS) -> ToyPhysNet:
    return ToyPhysNet(channels=channels, widths=widths)
