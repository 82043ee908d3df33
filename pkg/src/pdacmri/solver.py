"""Progressive divide-and-conquer reconstruction and the HQS baseline.

The progressive solver walks a nested mask sequence: each iteration blends
the previous intermediate measurement with the encoded anchor image (data
consistency), denoises in the image domain, predicts per-column confidence,
grows the mask to the next budget, and projects the denoised k-space onto
the new mask. The final mask is full, so the last projection is the
identity and the output image is the adjoint reconstruction of z_T.

The HQS baseline solves the same problem against the original acquisition
mask in every iteration with the same pluggable denoiser.
"""

from dataclasses import dataclass, field

import numpy as np

from .denoisers import DENOISER_IDS, DenoiserParams, denoise
from .forward import coil_combine, validate_sensitivities
from .fourier import fft2c, ifft2c
from .metrics import MetricSet, nmse, prob_loss, psnr, rec_loss, ssim, total_loss
from .sampling import (
    heuristic_confidence,
    mask_budget,
    next_mask,
    oracle_confidence,
    severity_context,
    squashed_column_error,
    validate_schedule,
    zero_sum_columns,
)

PREDICTOR_IDS = ("oracle", "heuristic", "random")


class ConfigurationError(ValueError):
    """Solver configuration is inconsistent with its inputs."""


@dataclass
class PdacConfig:
    """Iteration count, penalty weights, schedule, and plug-in selections.

    mu may be a scalar (replicated to T+1 weights) or a length T+1 sequence;
    strength likewise broadcasts to the T per-iteration denoiser weights.
    refresh_anchor re-derives the consistency anchor image from z_t after
    every iteration; with it off the anchor stays at the initial adjoint
    reconstruction of y.
    """

    iterations: int
    schedule: list
    mu: object = 1.0
    denoiser: str = "tv"
    strength: object = 0.04
    inner_iterations: int = 60
    modulation_gain: float = 1.0
    predictor: str = "oracle"
    alpha: float = 0.01
    seed: int = 0
    refresh_anchor: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        self.schedule = [int(b) for b in self.schedule]
        if len(self.schedule) != self.iterations + 1:
            raise ConfigurationError(
                f"schedule needs {self.iterations + 1} budgets, got {len(self.schedule)}"
            )
        self.mu = _broadcast(self.mu, self.iterations + 1, "mu")
        if any(m <= 0 for m in self.mu):
            raise ConfigurationError(f"mu must be positive, got {self.mu}")
        self.strength = _broadcast(self.strength, self.iterations, "strength")
        if any(s <= 0 for s in self.strength):
            raise ConfigurationError(f"strength must be positive, got {self.strength}")
        if self.denoiser not in DENOISER_IDS:
            raise ConfigurationError(f"unknown denoiser {self.denoiser!r}")
        if self.predictor not in PREDICTOR_IDS:
            raise ConfigurationError(f"unknown predictor {self.predictor!r}")
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")

    def denoiser_params(self, t: int) -> DenoiserParams:
        return DenoiserParams(
            strength=self.strength[t - 1],
            inner_iterations=self.inner_iterations,
            modulation_gain=self.modulation_gain,
        )


def _broadcast(value, n, name):
    if np.isscalar(value):
        return [float(value)] * n
    out = [float(v) for v in value]
    if len(out) != n:
        raise ConfigurationError(f"{name} needs {n} values, got {len(out)}")
    return out


@dataclass(frozen=True)
class IterateState:
    """Solver state after one iteration: intermediate measurement, image
    estimate, current mask, and its confidence vector."""

    z: np.ndarray
    x: np.ndarray
    mask: np.ndarray
    confidence: np.ndarray


@dataclass(frozen=True)
class IterationTrace:
    budget: int
    mask: np.ndarray
    mean_masked_confidence: float
    psnr: float | None
    guarded_columns: int


@dataclass
class ReconReport:
    final_image: np.ndarray
    per_iteration: list = field(default_factory=list)
    metrics: MetricSet | None = None


def degrade(ksp: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero the k-space columns off the mask support (idempotent)."""
    ksp = np.asarray(ksp)
    if ksp.shape[-1] != mask.shape[0]:
        raise ValueError(f"mask width {mask.shape[0]} != k-space width {ksp.shape[-1]}")
    return ksp * mask.astype(float)


def data_consistency(
    z_prev: np.ndarray,
    m_prev: np.ndarray,
    ax: np.ndarray,
    mu_prev: float,
    mu_t: float,
) -> np.ndarray:
    """Entrywise minimizer of
    mu_prev*||z_prev - D_prev z||^2 + mu_t*||z - ax||^2:
    z = (mu_prev*d*z_prev + mu_t*ax) / (mu_prev*d + mu_t), d the previous
    column indicator. Applied identically per coil."""
    if mu_prev <= 0 or mu_t <= 0:
        raise ConfigurationError(f"penalty weights must be positive, got {mu_prev}, {mu_t}")
    d = np.asarray(m_prev).astype(float)
    return (mu_prev * d * z_prev + mu_t * ax) / (mu_prev * d + mu_t)


def encode(x: np.ndarray, sens: np.ndarray | None = None) -> np.ndarray:
    """Fully sampled forward encode: fft2c(x), or per-coil fft2c(S_c * x)."""
    if sens is None:
        return fft2c(x)
    return np.stack([fft2c(sens[c] * x) for c in range(sens.shape[0])])


def _adjoint(z, sens):
    if sens is None:
        return ifft2c(z)
    return coil_combine(z, sens)


def zero_filled(y: np.ndarray, sens: np.ndarray | None = None) -> np.ndarray:
    """Adjoint reconstruction of the measured k-space."""
    return _adjoint(np.asarray(y, dtype=complex), sens)


def _check_inputs(y, m0, cfg, sens, gt):
    y = np.asarray(y, dtype=complex)
    if y.ndim == 3:
        if sens is None:
            raise ConfigurationError("multi-coil k-space requires sensitivities")
        validate_sensitivities(sens)
        if sens.shape != y.shape:
            raise ConfigurationError(f"sensitivities {sens.shape} do not match y {y.shape}")
    elif y.ndim == 2:
        sens = None
    else:
        raise ConfigurationError(f"y must be 2D or 3D, got shape {y.shape}")
    if mask_budget(m0) != cfg.schedule[0]:
        raise ConfigurationError(
            f"mask budget {mask_budget(m0)} != schedule b_0 {cfg.schedule[0]}"
        )
    validate_schedule(cfg.schedule, y.shape[-1], cfg.schedule[0])
    if np.any(y[..., np.asarray(m0) == 0] != 0):
        raise ConfigurationError("measured k-space is not zero-filled off the mask")
    needs_gt = cfg.predictor == "oracle" or cfg.denoiser == "oracle"
    if needs_gt and gt is None:
        raise ConfigurationError(
            f"predictor {cfg.predictor!r} / denoiser {cfg.denoiser!r} requires ground truth"
        )
    if gt is not None and np.shape(gt) != y.shape:
        raise ConfigurationError(f"ground truth {np.shape(gt)} does not match y {y.shape}")
    return y, sens


def _predict(cfg, z_dc, z_tilde, gt, rng, width):
    if cfg.predictor == "oracle":
        return oracle_confidence(z_tilde, gt)
    if cfg.predictor == "heuristic":
        return heuristic_confidence(z_dc, z_tilde)
    return rng.uniform(size=width)


def _final_metrics(x_hat, gt, sens, loss_trace, alpha):
    x_gt = _adjoint(gt, sens)
    l_rec = rec_loss(x_hat, x_gt)
    l_prob = prob_loss(loss_trace)
    return MetricSet(
        psnr=psnr(x_hat, x_gt),
        ssim=ssim(x_hat, x_gt),
        nmse=nmse(x_hat, x_gt),
        l_rec=l_rec,
        l_prob=l_prob,
        l_total=total_loss(l_rec, l_prob, alpha),
    )


def pdac_reconstruct(
    y: np.ndarray,
    m0: np.ndarray,
    cfg: PdacConfig,
    sens: np.ndarray | None = None,
    gt: np.ndarray | None = None,
    state_callback=None,
) -> ReconReport:
    """Progressive divide-and-conquer reconstruction.

    y is the zero-filled measurement (2D single-coil or (C, H, W) stacked),
    m0 the acquisition mask matching cfg.schedule[0]. gt is the fully
    sampled k-space of the same shape; it is required by the oracle
    predictor and oracle denoiser and enables metric reporting. The
    consistency anchor for iteration t is the previous mask's projection of
    the encoded anchor image, so the measured data itself anchors the chain
    when the anchor stays frozen.
    """
    m0 = np.asarray(m0, dtype=np.uint8)
    y, sens = _check_inputs(y, m0, cfg, sens, gt)
    rng = np.random.default_rng(cfg.seed)
    width = y.shape[-1]
    x_gt_img = _adjoint(gt, sens) if gt is not None else None

    z = y.copy()
    anchor = _adjoint(z, sens)
    m_prev = m0
    p_prev = np.ones(width)
    guarded = zero_sum_columns(gt) if cfg.predictor == "oracle" else 0
    trace = []
    loss_trace = []

    for t in range(1, cfg.iterations + 1):
        ax = degrade(encode(anchor, sens), m_prev)
        z_dc = data_consistency(z, m_prev, ax, cfg.mu[t - 1], cfg.mu[t])
        ctx = severity_context(m_prev, p_prev, t)
        z_tilde = denoise(z_dc, ctx, cfg.denoiser_params(t), cfg.denoiser, gt)
        probs = _predict(cfg, z_dc, z_tilde, gt, rng, width)
        m_t = next_mask(m_prev, probs, cfg.schedule[t])
        z = degrade(z_tilde, m_t)
        if cfg.refresh_anchor:
            anchor = _adjoint(z, sens)

        if gt is not None:
            loss_trace.append((m_t, probs, squashed_column_error(z_tilde, gt)))
        b_t = mask_budget(m_t)
        trace.append(
            IterationTrace(
                budget=b_t,
                mask=m_t.copy(),
                mean_masked_confidence=float((m_t * probs).sum() / b_t),
                psnr=psnr(_adjoint(z, sens), x_gt_img) if gt is not None else None,
                guarded_columns=guarded,
            )
        )
        if state_callback is not None:
            state_callback(
                IterateState(z=z.copy(), x=_adjoint(z, sens), mask=m_t.copy(), confidence=probs)
            )
        m_prev, p_prev = m_t, probs

    x_hat = _adjoint(z, sens)
    report = ReconReport(final_image=x_hat, per_iteration=trace)
    if gt is not None:
        report.metrics = _final_metrics(x_hat, gt, sens, loss_trace, cfg.alpha)
    return report


def hqs_data_consistency(
    x_prev: np.ndarray,
    y: np.ndarray,
    m0: np.ndarray,
    mu: float,
    sens: np.ndarray | None = None,
) -> np.ndarray:
    """Closed-form k-space blend toward the measured samples:
    z = (d*y + mu*encode(x_prev)) / (d + mu), d the acquisition indicator."""
    if mu <= 0:
        raise ConfigurationError(f"penalty weight must be positive, got {mu}")
    d = np.asarray(m0).astype(float)
    return (d * y + mu * encode(x_prev, sens)) / (d + mu)


def hqs_reconstruct(
    y: np.ndarray,
    m0: np.ndarray,
    cfg: PdacConfig,
    sens: np.ndarray | None = None,
    gt: np.ndarray | None = None,
) -> ReconReport:
    """Conventional half-quadratic-splitting baseline: every iteration does
    data consistency against the original acquisition mask, then denoises.
    The final image is the adjoint of the last denoised estimate."""
    m0 = np.asarray(m0, dtype=np.uint8)
    y, sens = _check_inputs(y, m0, cfg, sens, gt)
    width = y.shape[-1]
    x_gt_img = _adjoint(gt, sens) if gt is not None else None
    b0 = mask_budget(m0)

    x = _adjoint(y, sens)
    trace = []
    for t in range(1, cfg.iterations + 1):
        z_dc = hqs_data_consistency(x, y, m0, cfg.mu[t], sens)
        ctx = severity_context(m0, np.ones(width), t)
        z_tilde = denoise(z_dc, ctx, cfg.denoiser_params(t), cfg.denoiser, gt)
        x = _adjoint(z_tilde, sens)
        trace.append(
            IterationTrace(
                budget=b0,
                mask=m0.copy(),
                mean_masked_confidence=1.0,
                psnr=psnr(x, x_gt_img) if gt is not None else None,
                guarded_columns=0,
            )
        )

    report = ReconReport(final_image=x, per_iteration=trace)
    if gt is not None:
        report.metrics = _final_metrics(x, gt, sens, [], cfg.alpha)
    return report
