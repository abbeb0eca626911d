"""Residual enhancement network: stacked 3x3 convolutions with PReLU.

Reflect padding everywhere; it is part of the weight-file contract with
the inference side.  Batch normalization is train-time only and gets
folded into the convolutions at export.
"""

import torch
import torch.nn as nn


class ResidualNet(nn.Module):
    def __init__(self, depth: int = 8, width: int = 64, bn_enabled: bool = True):
        super().__init__()
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.depth = depth
        self.width = width
        self.bn_enabled = bn_enabled

        blocks = []
        if depth == 1:
            blocks.append(self._conv(3, 3))
        else:
            blocks.append(self._conv(3, width))
            blocks.append(nn.PReLU(width))
            for _ in range(depth - 2):
                blocks.append(self._conv(width, width))
                if bn_enabled:
                    blocks.append(nn.BatchNorm2d(width))
                blocks.append(nn.PReLU(width))
            blocks.append(self._conv(width, 3))
        self.body = nn.Sequential(*blocks)

    @staticmethod
    def _conv(in_ch, out_ch):
        return nn.Conv2d(in_ch, out_ch, 3, padding=1, padding_mode="reflect")

    def forward(self, x):
        return self.body(x)
