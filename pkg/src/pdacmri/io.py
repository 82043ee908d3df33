"""Bit-exact file formats: KSP1 complex grids, ASCII masks, 16-bit PGM
images, and key=value config files.

KSP1 layout: 4-byte magic "KSP1", then coils/height/width as 32-bit
little-endian unsigned integers, then coils*height*width (real, imag)
pairs of 64-bit little-endian floats in row-major order. Single-coil
files round-trip to 2D arrays, multi-coil to (C, H, W).
"""

import struct
from pathlib import Path

import numpy as np

KSP_MAGIC = b"KSP1"


class FormatError(ValueError):
    """A file does not match its declared format."""


def write_ksp(path, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=complex)
    if data.ndim == 2:
        data = data[None]
    if data.ndim != 3:
        raise FormatError(f"KSP1 stores 2D or (C, H, W) arrays, got shape {data.shape}")
    coils, height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(KSP_MAGIC)
        fh.write(struct.pack("<III", coils, height, width))
        fh.write(np.ascontiguousarray(data, dtype="<c16").tobytes())


def read_ksp(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != KSP_MAGIC:
        raise FormatError(f"{path}: not a KSP1 file")
    coils, height, width = struct.unpack("<III", raw[4:16])
    n = coils * height * width
    if len(raw) != 16 + 16 * n:
        raise FormatError(f"{path}: payload size mismatch for {coils}x{height}x{width}")
    data = np.frombuffer(raw[16:], dtype="<c16").reshape(coils, height, width)
    data = data.astype(complex)
    return data[0] if coils == 1 else data


def write_mask(path, mask: np.ndarray) -> None:
    mask = np.asarray(mask)
    line = "".join("1" if v else "0" for v in mask)
    Path(path).write_text(line + "\n")


def read_mask(path) -> np.ndarray:
    text = Path(path).read_text()
    line = text.rstrip("\n")
    if "\n" in line or not line or set(line) - {"0", "1"}:
        raise FormatError(f"{path}: mask must be a single line of 0/1 characters")
    return np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")


def write_pgm(path, image: np.ndarray, peak: float | None = None) -> None:
    """16-bit binary P5 of the magnitude image, linearly scaled so `peak`
    (default: the image's own maximum) maps to 65535."""
    mag = np.abs(np.asarray(image))
    if mag.ndim != 2:
        raise FormatError(f"PGM output needs a 2D image, got shape {mag.shape}")
    if peak is None or peak <= 0:
        peak = float(mag.max())
    scale = 65535.0 / peak if peak > 0 else 0.0
    samples = np.clip(np.round(mag * scale), 0, 65535).astype(">u2")
    height, width = mag.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n65535\n".encode())
        fh.write(samples.tobytes())


def write_config(path, items: dict) -> None:
    lines = [f"{key} = {value}" for key, value in items.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_config_text(text: str) -> dict:
    """key = value lines; '#' starts a comment; blank lines ignored."""
    items = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()
    return items


def read_config(path) -> dict:
    return parse_config_text(Path(path).read_text())
