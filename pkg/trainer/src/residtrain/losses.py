"""Training losses, computed in 8-bit code units (0-255).

The network reads and writes [0, 1]-normalized images; the bridge to
code units lives here because the noise threshold nu and its weighting
branch are code-valued.  Restoration is a weighted squared error against
the residual target, and the color term is the angle between the RGB
vectors of the ground truth and the enhanced prediction, which squared
error alone cannot constrain.
"""

import torch

ACOS_CLIP = 1e-7
ZERO_NORM = 1e-8


def noise_weight(ref_codes: torch.Tensor, nu: float) -> torch.Tensor:
    """Down-weight positions whose reference code sits below nu.

    1 at or above the threshold, 1/(nu - code) below it, so likely-noise
    pixels contribute less to the restoration error.
    """
    return torch.where(
        ref_codes >= nu, torch.ones_like(ref_codes), 1.0 / (nu - ref_codes)
    )


def restoration_loss(
    pred_residual: torch.Tensor,
    z1: torch.Tensor,
    zi: torch.Tensor,
    zti: torch.Tensor,
    nu: float = 6.0,
    weight_on: str = "zi",
    zi_offset: bool = True,
) -> torch.Tensor:
    """Weighted squared restoration error, summed per sample, batch-meaned.

    pred_residual is in network units ([0,1] scale); z1/zi/zti are code
    units.  With zi_offset=False the prediction is scored directly
    against the ground truth (the direct-mapping baseline).
    """
    if pred_residual.shape != zti.shape:
        raise ValueError(
            f"shape mismatch: pred {tuple(pred_residual.shape)} vs "
            f"target {tuple(zti.shape)}"
        )
    ref = zi if weight_on == "zi" else z1
    w = noise_weight(ref, nu)
    offset = zi if zi_offset else torch.zeros_like(zi)
    err = zti - offset - 255.0 * pred_residual
    per_sample = (w * err * err).sum(dim=(1, 2, 3))
    return per_sample.mean()


def color_loss(
    pred_residual: torch.Tensor,
    zi: torch.Tensor,
    zti: torch.Tensor,
    zi_offset: bool = True,
) -> torch.Tensor:
    """Angle between ground-truth and enhanced RGB vectors, per pixel.

    arccos input is clipped away from +-1 to keep gradients finite;
    pixels where either vector has (near) zero norm contribute nothing.
    """
    if pred_residual.shape != zti.shape:
        raise ValueError(
            f"shape mismatch: pred {tuple(pred_residual.shape)} vs "
            f"target {tuple(zti.shape)}"
        )
    offset = zi if zi_offset else torch.zeros_like(zi)
    enhanced = offset + 255.0 * pred_residual
    dot = (zti * enhanced).sum(dim=1)
    n1 = zti.norm(dim=1)
    n2 = enhanced.norm(dim=1)
    valid = (n1 > ZERO_NORM) & (n2 > ZERO_NORM)
    cos = dot / (n1 * n2).clamp_min(ZERO_NORM**2)
    angle = torch.acos(cos.clamp(-1.0 + ACOS_CLIP, 1.0 - ACOS_CLIP))
    angle = torch.where(valid, angle, torch.zeros_like(angle))
    return angle.sum(dim=(1, 2)).mean()


def total_loss(
    pred_residual: torch.Tensor,
    z1: torch.Tensor,
    zi: torch.Tensor,
    zti: torch.Tensor,
    nu: float = 6.0,
    color_weight: float = 2.0,
    weight_on: str = "zi",
    zi_offset: bool = True,
):
    """Restoration plus weighted color term; returns (total, l_r, l_c)."""
    l_r = restoration_loss(pred_residual, z1, zi, zti, nu, weight_on, zi_offset)
    l_c = color_loss(pred_residual, zi, zti, zi_offset)
    return l_r + color_weight * l_c, l_r, l_c
