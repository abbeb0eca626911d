"""Training loop: Adam on the weighted restoration + color objective.

Two target modes: "residual" learns ground-truth minus initial virtual
(the default), "direct" learns the ground truth straight from the dark
input, which serves as the purely data-driven baseline.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import torch

from .config import TrainConfig
from .losses import total_loss
from .model import ResidualNet


class NonFiniteLossError(RuntimeError):
    pass


def train(dataset, cfg: TrainConfig, target: str = "residual"):
    """Returns (model, log); log rows are (iteration, loss, l_r, l_c)."""
    if target not in ("residual", "direct"):
        raise ValueError(f"target must be 'residual' or 'direct', got {target!r}")
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    torch.manual_seed(cfg.seed)
    model = ResidualNet(cfg.depth, cfg.width, cfg.bn_enabled)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    zi_offset = target == "residual"
    log = []
    for it in range(cfg.iterations):
        z1, zi, zti = (torch.from_numpy(a) for a in dataset.sample_batch(cfg.batch_size))
        pred = model(z1 / 255.0)
        loss, l_r, l_c = total_loss(
            pred, z1, zi, zti,
            nu=cfg.nu,
            color_weight=cfg.color_weight,
            weight_on=cfg.weight_on,
            zi_offset=zi_offset,
        )
        if not torch.isfinite(loss):
            raise NonFiniteLossError(
                f"non-finite loss at iteration {it}: "
                f"loss={loss.item()} l_r={l_r.item()} l_c={l_c.item()}"
            )
        opt.zero_grad()
        loss.backward()
        opt.step()
        log.append((it, loss.item(), l_r.item(), l_c.item()))
    return model, log


def write_curve_csv(log, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "loss", "L_r", "L_c"])
        writer.writerows(log)


def final_loss(log, window: int = 10) -> float:
    """Mean total loss over the last `window` iterations."""
    tail = [row[1] for row in log[-window:]]
    return float(np.mean(tail))


def loss_variability(log, window: int = 100) -> float:
    """Coefficient of variation of the loss over the trailing window.

    Relative spread keeps the comparison fair between objectives whose
    absolute scales differ (weighted vs unweighted restoration).
    """
    tail = np.array([row[1] for row in log[-window:]], dtype=np.float64)
    return float(tail.std() / max(tail.mean(), 1e-12))
