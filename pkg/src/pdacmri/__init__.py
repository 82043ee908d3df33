"""Compressed-sensing MRI reconstruction on simulated Cartesian
acquisitions: a progressive divide-and-conquer solver that grows a nested
column-mask sequence across iterations, an HQS baseline, pluggable
denoisers, and full metric reporting."""

from .denoisers import DenoiserParams, denoise, oracle_denoise, soft_threshold_denoise, tv_denoise
from .forward import (
    NoiseModel,
    coil_combine,
    forward_multi,
    forward_single,
    shepp_logan,
    synth_sensitivities,
)
from .fourier import fft2c, ifft2c
from .metrics import MetricSet, nmse, prob_loss, psnr, rec_loss, ssim, total_loss
from .sampling import (
    SeverityContext,
    heuristic_confidence,
    make_acquisition_mask,
    make_schedule,
    mask_budget,
    next_mask,
    oracle_confidence,
    severity_context,
    validate_schedule,
)
from .solver import (
    IterateState,
    PdacConfig,
    ReconReport,
    data_consistency,
    degrade,
    encode,
    hqs_data_consistency,
    hqs_reconstruct,
    pdac_reconstruct,
    zero_filled,
)

__all__ = [
    "DenoiserParams",
    "IterateState",
    "MetricSet",
    "NoiseModel",
    "PdacConfig",
    "ReconReport",
    "SeverityContext",
    "coil_combine",
    "data_consistency",
    "degrade",
    "denoise",
    "encode",
    "fft2c",
    "forward_multi",
    "forward_single",
    "heuristic_confidence",
    "hqs_data_consistency",
    "hqs_reconstruct",
    "ifft2c",
    "make_acquisition_mask",
    "make_schedule",
    "mask_budget",
    "next_mask",
    "nmse",
    "oracle_confidence",
    "oracle_denoise",
    "pdac_reconstruct",
    "prob_loss",
    "psnr",
    "rec_loss",
    "severity_context",
    "shepp_logan",
    "soft_threshold_denoise",
    "ssim",
    "synth_sensitivities",
    "total_loss",
    "tv_denoise",
    "validate_schedule",
    "zero_filled",
]

__version__ = "0.1.0"
