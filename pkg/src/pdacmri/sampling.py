"""Cartesian column masks, budget schedules, and confidence prediction.

A mask is a 1D uint8 vector over k-space columns (1 = sampled). Severe
subsampling is represented only through the cumulative nested masks
m_0 <= m_1 <= ... <= m_T produced by `next_mask` under a budget schedule;
individual factor masks are never materialized.
"""

from dataclasses import dataclass

import numpy as np

HEURISTIC_EPS = 1e-12


class ScheduleError(ValueError):
    """A budget schedule violates monotonicity or endpoint constraints."""


class MaskConfigError(ValueError):
    """Mask synthesis parameters are inconsistent."""


@dataclass(frozen=True)
class SeverityContext:
    """Degradation-severity summary handed to the denoiser each iteration."""

    iteration: int
    masked_confidence: np.ndarray
    budget_fraction: float

    def mean_support_confidence(self) -> float:
        """Mean confidence over the sampled columns only."""
        width = self.masked_confidence.shape[0]
        n_support = self.budget_fraction * width
        return float(self.masked_confidence.sum() / n_support)


def mask_budget(mask: np.ndarray) -> int:
    return int(np.count_nonzero(mask))


def make_acquisition_mask(
    width: int, acceleration: int, center_fraction: float, seed: int
) -> np.ndarray:
    """Synthesize the acquisition mask: full center block plus equispaced
    off-center columns with a seed-determined offset.

    Budget is round(width / acceleration); the round(center_fraction * width)
    columns nearest the center column are always sampled.
    """
    if not (width >= acceleration >= 1):
        raise MaskConfigError(f"need width >= acceleration >= 1, got {width}, {acceleration}")
    if not (0.0 < center_fraction < 1.0):
        raise MaskConfigError(f"center_fraction must be in (0, 1), got {center_fraction}")

    budget = int(round(width / acceleration))
    n_center = int(round(center_fraction * width))
    if budget < n_center:
        raise MaskConfigError(
            f"budget {budget} smaller than center block {n_center} "
            f"(acceleration {acceleration}, center_fraction {center_fraction})"
        )

    cols = np.zeros(width, dtype=np.uint8)
    # Center block around column width//2, extra column to the right when even.
    start = width // 2 - (n_center - 1) // 2
    cols[start : start + n_center] = 1

    n_off = budget - n_center
    if n_off > 0:
        candidates = np.flatnonzero(cols == 0)
        step = len(candidates) / n_off
        rng = np.random.default_rng(seed)
        offset = rng.uniform(0.0, step)
        picks = (offset + step * np.arange(n_off)).astype(int)
        cols[candidates[picks]] = 1

    assert mask_budget(cols) == budget
    return cols


def validate_schedule(budgets, width: int, m0_budget: int):
    """Check b_0 = m0_budget, strict monotonicity, and b_T = width.

    Consecutive equal budgets are tolerated only at full width, so the
    degenerate no-undersampling case (b_0 = width) remains expressible.
    """
    budgets = list(int(b) for b in budgets)
    if not budgets:
        raise ScheduleError("empty schedule")
    if budgets[0] != m0_budget:
        raise ScheduleError(f"schedule index 0: b_0 = {budgets[0]} != mask budget {m0_budget}")
    for i in range(1, len(budgets)):
        if budgets[i] <= budgets[i - 1] and not (budgets[i] == budgets[i - 1] == width):
            raise ScheduleError(
                f"schedule index {i}: {budgets[i]} not greater than {budgets[i - 1]}"
            )
    last = len(budgets) - 1
    if budgets[last] != width:
        raise ScheduleError(f"schedule index {last}: b_T = {budgets[last]} != width {width}")
    return budgets


def _halving_increments(gap: int, steps: int) -> list:
    # Halve the remaining gap at each step, reserving one column for every
    # later step so strict monotonicity survives rounding.
    incs = []
    remaining = gap
    for t in range(1, steps + 1):
        left_after = steps - t
        if t == steps:
            inc = remaining
        else:
            inc = min(-(-remaining // 2), remaining - left_after)
        incs.append(inc)
        remaining -= inc
    return incs


def make_schedule(width: int, m0_budget: int, steps: int, shape: str):
    """Budget schedule from m0_budget to width in `steps` increments.

    coarse-to-fine halves the remaining gap each step (large increments
    first); uniform uses equal increments with the rounding residual on the
    last step; fine-to-coarse reverses the coarse-to-fine increments.
    """
    if steps < 1:
        raise ScheduleError(f"steps must be >= 1, got {steps}")
    if m0_budget >= width:
        raise ScheduleError(f"m0_budget {m0_budget} must be < width {width}")
    gap = width - m0_budget
    if gap < steps:
        raise ScheduleError(f"{steps} steps cannot strictly increase over gap {gap}")

    if shape == "coarse-to-fine":
        incs = _halving_increments(gap, steps)
    elif shape == "fine-to-coarse":
        incs = _halving_increments(gap, steps)[::-1]
    elif shape == "uniform":
        inc = gap // steps
        incs = [inc] * (steps - 1) + [gap - inc * (steps - 1)]
    else:
        raise ScheduleError(f"unknown schedule shape {shape!r}")

    budgets = [m0_budget]
    for inc in incs:
        budgets.append(budgets[-1] + inc)
    return validate_schedule(budgets, width, m0_budget)


def next_mask(m_prev: np.ndarray, probs: np.ndarray, b_next: int) -> np.ndarray:
    """Grow m_prev to budget b_next by the largest-confidence unsampled columns.

    Ties are broken toward the smaller column index, which makes the update a
    pure function of its inputs.
    """
    m_prev = np.asarray(m_prev)
    probs = np.asarray(probs, dtype=float)
    width = m_prev.shape[0]
    if probs.shape[0] != width:
        raise ValueError(f"confidence width {probs.shape[0]} != mask width {width}")
    if b_next > width:
        raise ScheduleError(f"budget {b_next} exceeds width {width}")
    b_prev = mask_budget(m_prev)
    if b_next < b_prev:
        raise ScheduleError(f"budget {b_next} below current budget {b_prev}")

    n_add = b_next - b_prev
    out = m_prev.astype(np.uint8).copy()
    if n_add > 0:
        scores = probs * (1 - out)
        # stable sort on descending score keeps the smaller index first on ties
        order = np.argsort(-scores, kind="stable")
        candidates = order[out[order] == 0]
        out[candidates[:n_add]] = 1
    return out


def _column_sums(ksp: np.ndarray) -> np.ndarray:
    """Complex per-column sums; multi-coil input sums over coils and rows."""
    ksp = np.asarray(ksp)
    return ksp.sum(axis=tuple(range(ksp.ndim - 1)))


def _squash(magnitude: np.ndarray) -> np.ndarray:
    # maps |e| in [0, inf) onto [0, 1)
    return 2.0 / (1.0 + np.exp(-magnitude)) - 1.0


def squashed_column_error(z_tilde: np.ndarray, y_gt: np.ndarray) -> np.ndarray:
    """Squashed normalized column error of a reconstruction against ground
    truth k-space; columns whose ground-truth complex sum is zero are pinned
    to the worst value 1."""
    if np.shape(z_tilde) != np.shape(y_gt):
        raise ValueError(f"shape mismatch {np.shape(z_tilde)} vs {np.shape(y_gt)}")
    num = _column_sums(z_tilde) - _column_sums(y_gt)
    den = _column_sums(y_gt)
    guard = den == 0
    mag = np.empty(num.shape, dtype=float)
    np.divide(np.abs(num), np.abs(den), out=mag, where=~guard)
    squashed = _squash(mag)
    squashed[guard] = 1.0
    return squashed


def zero_sum_columns(y_gt: np.ndarray) -> int:
    """Number of columns hitting the division guard in the error formula."""
    return int(np.count_nonzero(_column_sums(y_gt) == 0))


def oracle_confidence(z_tilde: np.ndarray, y_gt: np.ndarray) -> np.ndarray:
    """Per-column confidence 1 - (2*sigmoid(|e|) - 1) from the normalized
    reconstruction error e against ground truth; guarded columns get 0."""
    return 1.0 - squashed_column_error(z_tilde, y_gt)


def heuristic_confidence(z_pre: np.ndarray, z_post: np.ndarray) -> np.ndarray:
    """Ground-truth-free confidence from the relative per-column disagreement
    between pre- and post-denoising k-space, squashed like the oracle."""
    z_pre = np.asarray(z_pre)
    z_post = np.asarray(z_post)
    if z_pre.shape != z_post.shape:
        raise ValueError(f"shape mismatch {z_pre.shape} vs {z_post.shape}")
    axes = tuple(range(z_pre.ndim - 1))
    diff = np.sqrt((np.abs(z_post - z_pre) ** 2).sum(axis=axes))
    ref = np.sqrt((np.abs(z_pre) ** 2).sum(axis=axes))
    r = diff / (ref + HEURISTIC_EPS)
    return 1.0 - _squash(r)


def severity_context(mask: np.ndarray, probs: np.ndarray, iteration: int) -> SeverityContext:
    """Bundle the masked confidence and budget fraction for conditioning."""
    mask = np.asarray(mask)
    probs = np.asarray(probs, dtype=float)
    if mask.shape != probs.shape:
        raise ValueError(f"width mismatch {mask.shape} vs {probs.shape}")
    return SeverityContext(
        iteration=iteration,
        masked_confidence=mask * probs,
        budget_fraction=mask_budget(mask) / mask.shape[0],
    )
