"""Pluggable k-space denoisers with severity-conditioned strength.

Each variant maps per-coil k-space to the image domain, denoises there, and
maps back. The severity context modulates the regularizer weight through a
scalar gain: lower mean confidence on the sampled columns means stronger
smoothing.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .fourier import fft2c, ifft2c
from .sampling import SeverityContext

DENOISER_IDS = ("identity", "tv", "dct-soft", "oracle")


@dataclass(frozen=True)
class DenoiserParams:
    strength: float = 0.05
    inner_iterations: int = 50
    modulation_gain: float = 0.0

    def __post_init__(self):
        if self.strength <= 0:
            raise ValueError(f"strength must be > 0, got {self.strength}")
        if self.inner_iterations < 1:
            raise ValueError(f"inner_iterations must be >= 1, got {self.inner_iterations}")
        if self.modulation_gain < 0:
            raise ValueError(f"modulation_gain must be >= 0, got {self.modulation_gain}")


def effective_strength(params: DenoiserParams, ctx: SeverityContext | None) -> float:
    """lambda * (1 + gain * (1 - mean confidence over the sampled columns))."""
    if ctx is None or params.modulation_gain == 0.0:
        return params.strength
    mean_conf = ctx.mean_support_confidence()
    return params.strength * (1.0 + params.modulation_gain * (1.0 - mean_conf))


def _divergence(px: np.ndarray, py: np.ndarray) -> np.ndarray:
    # backward-difference divergence, the negative adjoint of _gradient
    div_p = np.zeros_like(px)
    div_p[:, :-1] += px[:, :-1]
    div_p[:, 1:] -= px[:, :-1]
    div_p[:-1, :] += py[:-1, :]
    div_p[1:, :] -= py[:-1, :]
    return div_p


def _gradient(u: np.ndarray):
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return gx, gy


def _tv_denoise_real(img: np.ndarray, lam: float, iters: int) -> np.ndarray:
    # Chambolle dual projected gradient for 0.5*||u - f||^2 + lam*TV(u),
    # isotropic TV, step 1/8 = 1/L^2 of the forward-difference gradient.
    px = np.zeros_like(img)
    py = np.zeros_like(img)
    tau = 0.125
    for _ in range(iters):
        gx, gy = _gradient(_divergence(px, py) - img / lam)
        denom = 1.0 + tau * np.sqrt(gx**2 + gy**2)
        px = (px + tau * gx) / denom
        py = (py + tau * gy) / denom
    return img - lam * _divergence(px, py)


def tv_objective(u: np.ndarray, img: np.ndarray, lam: float) -> float:
    """0.5*||u - f||^2 + lam * isotropic TV(u) for a real channel."""
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    tv = np.sqrt(gx**2 + gy**2).sum()
    return float(0.5 * ((u - img) ** 2).sum() + lam * tv)


def tv_denoise(img: np.ndarray, lam: float, iters: int) -> np.ndarray:
    """Approximate TV proximal step on a complex image; real and imaginary
    channels are smoothed independently."""
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    img = np.asarray(img)
    if lam == 0:
        return img.astype(complex)
    re = _tv_denoise_real(np.ascontiguousarray(img.real, dtype=float), lam, iters)
    im = _tv_denoise_real(np.ascontiguousarray(img.imag, dtype=float), lam, iters)
    return re + 1j * im


def soft_threshold_denoise(img: np.ndarray, lam: float) -> np.ndarray:
    """Soft-threshold the magnitudes of the orthonormal 2D DCT coefficients
    by lam; coefficient phases are preserved."""
    img = np.asarray(img, dtype=complex)
    coef = scipy.fft.dctn(img, norm="ortho")
    mag = np.abs(coef)
    shrink = np.maximum(mag - lam, 0.0)
    scale = np.divide(shrink, mag, out=np.zeros_like(mag), where=mag > 0)
    return scipy.fft.idctn(coef * scale, norm="ortho")


def oracle_denoise(z_in: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Testing upper bound: return the ground-truth k-space."""
    if gt is None:
        raise ValueError("oracle denoiser requires ground-truth k-space")
    if np.shape(z_in) != np.shape(gt):
        raise ValueError(f"shape mismatch {np.shape(z_in)} vs {np.shape(gt)}")
    return np.array(gt, dtype=complex, copy=True)


def _denoise_image(img, method, lam, iters):
    if method == "tv":
        return tv_denoise(img, lam, iters)
    if method == "dct-soft":
        return soft_threshold_denoise(img, lam)
    raise ValueError(f"unknown denoiser {method!r}")


def denoise(
    z_in: np.ndarray,
    ctx: SeverityContext | None,
    params: DenoiserParams,
    method: str,
    gt: np.ndarray | None = None,
) -> np.ndarray:
    """Denoise k-space per coil through the image domain.

    method is one of "identity" | "tv" | "dct-soft" | "oracle".
    """
    if method == "oracle":
        return oracle_denoise(z_in, gt)
    z_in = np.asarray(z_in, dtype=complex)
    if method == "identity":
        return z_in.copy()

    lam = effective_strength(params, ctx)
    single = z_in.ndim == 2
    stack = z_in[None] if single else z_in
    out = np.empty_like(stack)
    for c in range(stack.shape[0]):
        img = ifft2c(stack[c])
        out[c] = fft2c(_denoise_image(img, method, lam, params.inner_iterations))
    return out[0] if single else out
