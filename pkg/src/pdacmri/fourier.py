"""Centered orthonormal 2D Fourier transforms.

The DC component sits at index (H//2, W//2) and both directions carry a
1/sqrt(N) scaling, so the transforms are unitary (Parseval holds exactly)
and k-space penalty weights need no grid-size correction.
"""

import numpy as np


def fft2c(img: np.ndarray) -> np.ndarray:
    """Centered orthonormal 2D FFT of a single-coil complex image."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"fft2c expects a 2D image, got shape {img.shape}")
    if img.size == 0:
        raise ValueError(f"fft2c: zero-sized grid {img.shape}")
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(img), norm="ortho"))


def ifft2c(ksp: np.ndarray) -> np.ndarray:
    """Inverse of fft2c. Multi-coil callers invoke this once per coil."""
    ksp = np.asarray(ksp)
    if ksp.ndim != 2:
        raise ValueError(
            f"ifft2c expects single-coil (2D) k-space, got shape {ksp.shape}"
        )
    if ksp.size == 0:
        raise ValueError(f"ifft2c: zero-sized grid {ksp.shape}")
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(ksp), norm="ortho"))
