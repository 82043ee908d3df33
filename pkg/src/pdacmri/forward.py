"""Simulated MRI acquisition: single- and multi-coil forward operators,
synthetic coil sensitivities, the Shepp-Logan phantom, and k-space noise."""

from dataclasses import dataclass

import numpy as np

from .fourier import fft2c, ifft2c

SENS_NORM_TOL = 1e-10

# Standard 10-ellipse Shepp-Logan table: additive intensity, semi-axes a/b,
# center (x0, y0), rotation in degrees, on the [-1, 1]^2 square.
SHEPP_LOGAN_ELLIPSES = [
    (1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
]


@dataclass(frozen=True)
class NoiseModel:
    """Complex circular Gaussian k-space noise, per real/imag component."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def _mask_cols(ksp: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if ksp.shape[-1] != mask.shape[0]:
        raise ValueError(f"mask width {mask.shape[0]} != k-space width {ksp.shape[-1]}")
    return ksp * mask.astype(ksp.real.dtype)


def _draw_noise(rng, shape, sigma):
    return sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def forward_single(x: np.ndarray, mask: np.ndarray, noise: NoiseModel) -> np.ndarray:
    """y = D F x + eps, zero-filled: unsampled columns are exactly zero and
    noise touches sampled entries only."""
    y = fft2c(x)
    if noise.sigma > 0:
        rng = np.random.default_rng(noise.seed)
        y = y + _draw_noise(rng, y.shape, noise.sigma)
    return _mask_cols(y, mask)


def validate_sensitivities(sens: np.ndarray) -> np.ndarray:
    """Require sum_c conj(S_c) S_c = 1 at every pixel."""
    sens = np.asarray(sens)
    if sens.ndim != 3:
        raise ValueError(f"sensitivities must be (C, H, W), got {sens.shape}")
    ssq = (np.conj(sens) * sens).sum(axis=0).real
    err = np.abs(ssq - 1.0).max()
    if err > SENS_NORM_TOL:
        raise ValueError(f"sensitivities not normalized: max |S^H S - 1| = {err:.3e}")
    return sens


def forward_multi(
    x: np.ndarray, sens: np.ndarray, mask: np.ndarray, noise: NoiseModel
) -> np.ndarray:
    """Per-coil acquisition y_c = D F (S_c * x) + eps_c, zero-filled off-mask."""
    sens = validate_sensitivities(sens)
    rng = np.random.default_rng(noise.seed) if noise.sigma > 0 else None
    coils = []
    for c in range(sens.shape[0]):
        y = fft2c(sens[c] * x)
        if rng is not None:
            y = y + _draw_noise(rng, y.shape, noise.sigma)
        coils.append(_mask_cols(y, mask))
    return np.stack(coils)


def coil_combine(ksp: np.ndarray, sens: np.ndarray) -> np.ndarray:
    """Adjoint of the fully sampled multi-coil encode:
    x = sum_c conj(S_c) * ifft2c(z_c)."""
    ksp = np.asarray(ksp)
    if ksp.ndim != 3 or ksp.shape[0] != sens.shape[0]:
        raise ValueError(f"k-space {ksp.shape} does not match sensitivities {sens.shape}")
    out = np.zeros(ksp.shape[1:], dtype=complex)
    for c in range(ksp.shape[0]):
        out += np.conj(sens[c]) * ifft2c(ksp[c])
    return out


def synth_sensitivities(coils: int, height: int, width: int) -> np.ndarray:
    """Smooth complex Gaussian-bump coil profiles at equiangular positions,
    normalized pixelwise so sum_c conj(S_c) S_c = 1."""
    if coils < 1:
        raise ValueError(f"coils must be >= 1, got {coils}")
    ys = np.linspace(-1.0, 1.0, height)
    xs = np.linspace(-1.0, 1.0, width)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")

    bump_width = 1.2
    radius = 0.6
    maps = np.empty((coils, height, width), dtype=complex)
    for c in range(coils):
        angle = 2.0 * np.pi * c / coils
        cx, cy = radius * np.cos(angle), radius * np.sin(angle)
        mag = np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * bump_width**2))
        # gentle per-coil phase ramp keeps the maps genuinely complex but smooth
        phase = angle + 0.3 * (np.cos(angle) * xx + np.sin(angle) * yy)
        maps[c] = mag * np.exp(1j * phase)

    root_ssq = np.sqrt((np.abs(maps) ** 2).sum(axis=0))
    return maps / root_ssq


def shepp_logan(height: int, width: int) -> np.ndarray:
    """Shepp-Logan ellipse phantom on [-1, 1]^2, clamped to [0, 1], returned
    as a complex image with zero imaginary part."""
    if height < 8 or width < 8:
        raise ValueError(f"phantom needs H, W >= 8, got {height}x{width}")
    xs = (np.arange(width) - (width - 1) / 2.0) / ((width - 1) / 2.0)
    ys = -(np.arange(height) - (height - 1) / 2.0) / ((height - 1) / 2.0)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")

    img = np.zeros((height, width))
    for value, a, b, x0, y0, theta_deg in SHEPP_LOGAN_ELLIPSES:
        theta = np.radians(theta_deg)
        xr = (xx - x0) * np.cos(theta) + (yy - y0) * np.sin(theta)
        yr = (yy - y0) * np.cos(theta) - (xx - x0) * np.sin(theta)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return np.clip(img, 0.0, 1.0).astype(complex)
