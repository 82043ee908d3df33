"""Reconstruction quality metrics and training-style diagnostic losses.

Image metrics follow the usual accelerated-MRI evaluation conventions:
everything is computed on magnitude images, SSIM uses a 7x7 uniform window
with k1 = 0.01, k2 = 0.03, and the data range is the ground-truth peak.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

SSIM_WIN = 7
SSIM_K1 = 0.01
SSIM_K2 = 0.03

DEFAULT_ALPHA = 0.01  # weight of the probability loss in the total loss


class UndefinedMetricError(ValueError):
    """Raised when a metric is undefined for the given ground truth."""


@dataclass(frozen=True)
class MetricSet:
    psnr: float
    ssim: float
    nmse: float
    l_rec: float
    l_prob: float
    l_total: float


def _check_pair(x, gt):
    x = np.asarray(x)
    gt = np.asarray(gt)
    if x.shape != gt.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {gt.shape}")
    return x, gt


def _as_magnitude(arr):
    # complex data is compared on magnitudes; real data is taken as an
    # already-magnitude image
    return np.abs(arr) if np.iscomplexobj(arr) else np.asarray(arr, dtype=float)


def psnr(x: np.ndarray, gt: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB on magnitude images; peak is the
    ground-truth maximum magnitude. Returns inf for an exact match (rendered
    as the sentinel "exact" in CSV output)."""
    x, gt = _check_pair(x, gt)
    a, b = _as_magnitude(x), _as_magnitude(gt)
    peak = np.abs(b).max()
    if peak == 0:
        raise UndefinedMetricError("psnr undefined for all-zero ground truth")
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(peak**2 / mse))


def ssim(x: np.ndarray, gt: np.ndarray) -> float:
    """Mean local SSIM on magnitude images, 7x7 uniform window."""
    x, gt = _check_pair(x, gt)
    a, b = _as_magnitude(x), _as_magnitude(gt)
    if min(a.shape) < SSIM_WIN:
        raise ValueError(f"image {a.shape} smaller than {SSIM_WIN}x{SSIM_WIN} window")

    data_range = np.abs(b).max()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    npix = SSIM_WIN * SSIM_WIN
    cov_norm = npix / (npix - 1)

    ux = uniform_filter(a, SSIM_WIN)
    uy = uniform_filter(b, SSIM_WIN)
    uxx = uniform_filter(a * a, SSIM_WIN)
    uyy = uniform_filter(b * b, SSIM_WIN)
    uxy = uniform_filter(a * b, SSIM_WIN)
    vx = cov_norm * (uxx - ux * ux)
    vy = cov_norm * (uyy - uy * uy)
    vxy = cov_norm * (uxy - ux * uy)

    num = (2 * ux * uy + c1) * (2 * vxy + c2)
    den = (ux**2 + uy**2 + c1) * (vx + vy + c2)
    smap = num / den

    pad = (SSIM_WIN - 1) // 2
    return float(smap[pad:-pad, pad:-pad].mean())


def nmse(x: np.ndarray, gt: np.ndarray) -> float:
    """||x - gt||^2 / ||gt||^2 on complex images."""
    x, gt = _check_pair(x, gt)
    energy = np.sum(np.abs(gt) ** 2)
    if energy == 0:
        raise UndefinedMetricError("nmse undefined for all-zero ground truth")
    return float(np.sum(np.abs(x - gt) ** 2) / energy)


def rec_loss(x: np.ndarray, gt: np.ndarray) -> float:
    """Mean absolute difference of magnitude images."""
    x, gt = _check_pair(x, gt)
    return float(np.mean(np.abs(_as_magnitude(x) - _as_magnitude(gt))))


def prob_loss(trace) -> float:
    """Sum over iterations of || m_t * (p_t - (1 - e_hat_t)) ||_1, the
    regression mismatch between predicted confidence and its target."""
    total = 0.0
    for mask, probs, e_hat in trace:
        mask = np.asarray(mask)
        probs = np.asarray(probs, dtype=float)
        e_hat = np.asarray(e_hat, dtype=float)
        if not (mask.shape == probs.shape == e_hat.shape):
            raise ValueError(
                f"trace width mismatch {mask.shape}/{probs.shape}/{e_hat.shape}"
            )
        total += float(np.abs(mask * (probs - (1.0 - e_hat))).sum())
    return total


def total_loss(l_rec: float, l_prob: float, alpha: float = DEFAULT_ALPHA) -> float:
    """l_rec + alpha * l_prob."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return float(l_rec + alpha * l_prob)
