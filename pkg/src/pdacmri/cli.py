"""Command-line surface: simulate, reconstruct, evaluate, ablate.

Configuration comes from built-in defaults, then an optional key=value
config file, then command-line flags (a flag overrides the file value).
Unknown config keys are rejected, and every value is validated with the
offending key named before anything runs.
"""

import argparse
import csv
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .forward import NoiseModel, forward_multi, forward_single, shepp_logan, synth_sensitivities
from .io import read_config, read_ksp, read_mask, write_ksp, write_mask, write_pgm
from .metrics import MetricSet, nmse, psnr, rec_loss, ssim, total_loss
from .sampling import make_acquisition_mask, make_schedule, mask_budget, validate_schedule
from .solver import PdacConfig, encode, hqs_reconstruct, pdac_reconstruct, zero_filled

GROUND_TRUTH_FILE = "ground_truth.ksp"
KSPACE_FILE = "kspace.ksp"
MASK_FILE = "mask.txt"
SENS_FILE = "sensitivities.ksp"
RECON_PGM = "recon.pgm"
TRACE_CSV = "trace.csv"
METRICS_CSV = "metrics.csv"
ABLATION_CSV = "ablation.csv"

MODES = ("simulate", "reconstruct", "evaluate", "ablate")
SOLVERS = ("pdac", "hqs", "zero-filled")
SCHEDULE_SHAPES = ("coarse-to-fine", "uniform", "fine-to-coarse")

METRICS_FIELDS = [
    "solver", "denoiser", "predictor", "schedule", "seed",
    "psnr_db", "ssim", "nmse", "l_rec", "l_prob", "l_total",
]
TRACE_FIELDS = ["iteration", "budget", "mean_masked_confidence", "guarded_columns", "psnr_db"]
ABLATION_FIELDS = ["schedule", "predictor", "psnr_db", "ssim", "nmse"]


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass
class RunConfig:
    mode: str = "simulate"
    height: int = 128
    width: int = 128
    coils: int = 1
    acceleration: int = 8
    center_fraction: float = 0.04
    sigma: float = 0.0
    solver: str = "pdac"
    schedule: str = "coarse-to-fine"
    iterations: int = 8
    mu: str = "1.0"
    denoiser: str = "tv"
    strength: str = "0.04"
    inner_iterations: int = 60
    modulation_gain: float = 1.0
    predictor: str = "oracle"
    alpha: float = 0.01
    refresh_anchor: bool = False
    seed: int = 0
    in_dir: str = "."
    out_dir: str = "."
    recon: str = ""
    gt: str = ""


_PARSERS = {int: int, float: float, str: str}


def _parse_bool(key, value):
    lowered = str(value).strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def config_from_items(items: dict) -> RunConfig:
    """Build a validated RunConfig from string key/value pairs."""
    known = {f.name: f for f in fields(RunConfig)}
    cfg = RunConfig()
    for key, value in items.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        ftype = known[key].type
        try:
            if ftype is bool:
                setattr(cfg, key, _parse_bool(key, value))
            elif ftype is int:
                setattr(cfg, key, int(str(value).strip()))
            elif ftype is float:
                setattr(cfg, key, float(str(value).strip()))
            else:
                setattr(cfg, key, str(value).strip())
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    _validate(cfg)
    return cfg


def _parse_weights(key, text, n_expected):
    try:
        values = [float(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc
    if not values:
        raise ConfigError(f"{key}: no values given")
    if len(values) == 1:
        return values[0]
    if len(values) != n_expected:
        raise ConfigError(f"{key}: expected 1 or {n_expected} values, got {len(values)}")
    return values


def _validate(cfg: RunConfig) -> None:
    checks = [
        ("mode", cfg.mode in MODES, f"must be one of {MODES}"),
        ("height", cfg.height >= 8, "must be >= 8"),
        ("width", cfg.width >= 8, "must be >= 8"),
        ("coils", cfg.coils >= 1, "must be >= 1"),
        ("acceleration", cfg.acceleration >= 1, "must be >= 1"),
        ("center_fraction", 0.0 < cfg.center_fraction < 1.0, "must be in (0, 1)"),
        ("sigma", cfg.sigma >= 0.0, "must be >= 0"),
        ("solver", cfg.solver in SOLVERS, f"must be one of {SOLVERS}"),
        ("iterations", cfg.iterations >= 1, "must be >= 1"),
        ("inner_iterations", cfg.inner_iterations >= 1, "must be >= 1"),
        ("modulation_gain", cfg.modulation_gain >= 0.0, "must be >= 0"),
        ("alpha", cfg.alpha >= 0.0, "must be >= 0"),
        ("denoiser", cfg.denoiser in ("identity", "tv", "dct-soft", "oracle"), "unknown id"),
        ("predictor", cfg.predictor in ("oracle", "heuristic", "random"), "unknown id"),
    ]
    for key, ok, message in checks:
        if not ok:
            raise ConfigError(f"{key}: {message} (got {getattr(cfg, key)!r})")
    if cfg.schedule not in SCHEDULE_SHAPES:
        try:
            budgets = [int(v) for v in cfg.schedule.split(",")]
        except ValueError as exc:
            raise ConfigError(
                f"schedule: expected one of {SCHEDULE_SHAPES} or comma-separated budgets"
            ) from exc
        if len(budgets) < 2:
            raise ConfigError("schedule: explicit budgets need at least b_0 and b_T")
    _parse_weights("mu", cfg.mu, cfg.iterations + 1)
    _parse_weights("strength", cfg.strength, cfg.iterations)


def _resolve_schedule(cfg: RunConfig, width, m0_budget):
    if cfg.schedule in SCHEDULE_SHAPES:
        return make_schedule(width, m0_budget, cfg.iterations, cfg.schedule)
    budgets = [int(v) for v in cfg.schedule.split(",")]
    if len(budgets) != cfg.iterations + 1:
        raise ConfigError(
            f"schedule: {cfg.iterations + 1} budgets needed for iterations={cfg.iterations}, "
            f"got {len(budgets)}"
        )
    return validate_schedule(budgets, width, m0_budget)


def solver_config(cfg: RunConfig, schedule, predictor: str | None = None) -> PdacConfig:
    return PdacConfig(
        iterations=cfg.iterations,
        schedule=schedule,
        mu=_parse_weights("mu", cfg.mu, cfg.iterations + 1),
        denoiser=cfg.denoiser,
        strength=_parse_weights("strength", cfg.strength, cfg.iterations),
        inner_iterations=cfg.inner_iterations,
        modulation_gain=cfg.modulation_gain,
        predictor=predictor or cfg.predictor,
        alpha=cfg.alpha,
        seed=cfg.seed,
        refresh_anchor=cfg.refresh_anchor,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "exact"
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def cmd_simulate(cfg: RunConfig) -> dict:
    """Write ground truth, sensitivities (multi-coil only), acquisition mask,
    and measured k-space to out_dir; deterministic per seed."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    image = shepp_logan(cfg.height, cfg.width)
    mask = make_acquisition_mask(cfg.width, cfg.acceleration, cfg.center_fraction, cfg.seed)
    noise = NoiseModel(sigma=cfg.sigma, seed=cfg.seed)

    paths = {
        "ground_truth": out / GROUND_TRUTH_FILE,
        "mask": out / MASK_FILE,
        "kspace": out / KSPACE_FILE,
    }
    write_ksp(paths["ground_truth"], image)
    write_mask(paths["mask"], mask)
    if cfg.coils > 1:
        sens = synth_sensitivities(cfg.coils, cfg.height, cfg.width)
        paths["sensitivities"] = out / SENS_FILE
        write_ksp(paths["sensitivities"], sens)
        write_ksp(paths["kspace"], forward_multi(image, sens, mask, noise))
    else:
        write_ksp(paths["kspace"], forward_single(image, mask, noise))
    return paths


def _load_instance(cfg: RunConfig):
    indir = Path(cfg.in_dir)
    for name in (KSPACE_FILE, MASK_FILE):
        if not (indir / name).exists():
            raise ConfigError(f"in_dir: missing {name} under {indir}")
    y = read_ksp(indir / KSPACE_FILE)
    mask = read_mask(indir / MASK_FILE)
    sens = read_ksp(indir / SENS_FILE) if (indir / SENS_FILE).exists() else None
    gt_image = None
    if (indir / GROUND_TRUTH_FILE).exists():
        gt_image = read_ksp(indir / GROUND_TRUTH_FILE)
    return y, mask, sens, gt_image


def _encode_gt(gt_image, sens):
    return encode(gt_image, sens) if gt_image is not None else None


def _run_solver(solver, y, mask, pcfg, sens, gt_ksp):
    if solver == "pdac":
        return pdac_reconstruct(y, mask, pcfg, sens, gt_ksp)
    if solver == "hqs":
        return hqs_reconstruct(y, mask, pcfg, sens, gt_ksp)
    raise ConfigError(f"solver: cannot iterate with {solver!r}")


def cmd_reconstruct(cfg: RunConfig) -> dict:
    """Run the selected solver on a simulated instance and write the
    magnitude image, per-iteration trace, and metrics row."""
    y, mask, sens, gt_image = _load_instance(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gt_ksp = _encode_gt(gt_image, sens)

    if cfg.solver == "zero-filled":
        image = zero_filled(y, sens)
        trace_rows = []
        metrics = None
        if gt_image is not None:
            l_rec = rec_loss(image, gt_image)
            metrics = MetricSet(
                psnr=psnr(image, gt_image),
                ssim=ssim(image, gt_image),
                nmse=nmse(image, gt_image),
                l_rec=l_rec,
                l_prob=0.0,
                l_total=total_loss(l_rec, 0.0, cfg.alpha),
            )
        schedule_label = "-"
    else:
        schedule = _resolve_schedule(cfg, y.shape[-1], mask_budget(mask))
        pcfg = solver_config(cfg, schedule)
        report = _run_solver(cfg.solver, y, mask, pcfg, sens, gt_ksp)
        image = report.final_image
        metrics = report.metrics
        trace_rows = [
            (t + 1, it.budget, it.mean_masked_confidence, it.guarded_columns, it.psnr)
            for t, it in enumerate(report.per_iteration)
        ]
        schedule_label = cfg.schedule

    peak = float(np.abs(gt_image).max()) if gt_image is not None else None
    write_pgm(out / RECON_PGM, image, peak=peak)
    _write_csv(out / TRACE_CSV, TRACE_FIELDS, trace_rows)

    if metrics is not None:
        row = (cfg.solver, cfg.denoiser, cfg.predictor, schedule_label, cfg.seed,
               metrics.psnr, metrics.ssim, metrics.nmse,
               metrics.l_rec, metrics.l_prob, metrics.l_total)
    else:
        row = (cfg.solver, cfg.denoiser, cfg.predictor, schedule_label, cfg.seed,
               None, None, None, None, None, None)
    _write_csv(out / METRICS_CSV, METRICS_FIELDS, [row])
    return {"image": out / RECON_PGM, "trace": out / TRACE_CSV, "metrics": out / METRICS_CSV}


def cmd_evaluate(cfg: RunConfig) -> dict:
    """Compare a reconstructed complex image against ground truth."""
    if not cfg.recon or not cfg.gt:
        raise ConfigError("recon: evaluate mode needs --recon and --gt paths")
    recon = read_ksp(cfg.recon)
    gt_image = read_ksp(cfg.gt)
    if recon.ndim != 2 or gt_image.ndim != 2:
        raise ConfigError("recon: evaluate compares single-coil complex images")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    l_rec = rec_loss(recon, gt_image)
    row = ("evaluate", "-", "-", "-", cfg.seed,
           psnr(recon, gt_image), ssim(recon, gt_image), nmse(recon, gt_image),
           l_rec, 0.0, total_loss(l_rec, 0.0, cfg.alpha))
    _write_csv(out / METRICS_CSV, METRICS_FIELDS, [row])
    return {"metrics": out / METRICS_CSV}


def cmd_ablate(cfg: RunConfig) -> dict:
    """Schedule x predictor grid on one simulated instance; one CSV row per
    cell with PSNR/SSIM/NMSE."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    image = shepp_logan(cfg.height, cfg.width)
    mask = make_acquisition_mask(cfg.width, cfg.acceleration, cfg.center_fraction, cfg.seed)
    noise = NoiseModel(sigma=cfg.sigma, seed=cfg.seed)
    if cfg.coils > 1:
        sens = synth_sensitivities(cfg.coils, cfg.height, cfg.width)
        y = forward_multi(image, sens, mask, noise)
    else:
        sens = None
        y = forward_single(image, mask, noise)
    gt_ksp = _encode_gt(image, sens)

    rows = []
    for shape in SCHEDULE_SHAPES:
        schedule = make_schedule(cfg.width, mask_budget(mask), cfg.iterations, shape)
        for predictor in ("oracle", "heuristic", "random"):
            pcfg = solver_config(cfg, schedule, predictor)
            report = pdac_reconstruct(y, mask, pcfg, sens, gt_ksp)
            m = report.metrics
            rows.append((shape, predictor, m.psnr, m.ssim, m.nmse))
    _write_csv(out / ABLATION_CSV, ABLATION_FIELDS, rows)
    return {"ablation": out / ABLATION_CSV}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdacmri",
        description="Simulated compressed-sensing MRI reconstruction "
        "(progressive divide-and-conquer, HQS, zero-filled).",
    )
    parser.add_argument("mode", nargs="?", choices=MODES, help="run mode")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--in", dest="in_dir", help="input directory (reconstruct)")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--mode", dest="mode_flag", choices=MODES, help=argparse.SUPPRESS)
    for key, flag in [
        ("height", "--height"), ("width", "--width"), ("coils", "--coils"),
        ("acceleration", "--acceleration"), ("center_fraction", "--center-fraction"),
        ("sigma", "--sigma"), ("solver", "--solver"), ("schedule", "--schedule"),
        ("iterations", "--iterations"), ("mu", "--mu"), ("denoiser", "--denoiser"),
        ("strength", "--strength"), ("inner_iterations", "--inner-iterations"),
        ("modulation_gain", "--modulation-gain"), ("predictor", "--predictor"),
        ("alpha", "--alpha"), ("refresh_anchor", "--refresh-anchor"),
        ("recon", "--recon"), ("gt", "--gt"),
    ]:
        parser.add_argument(flag, dest=key, help=f"config key {key}")
    return parser


def _collect_items(args) -> dict:
    items = {}
    if args.config:
        items.update(read_config(args.config))
    for key in [f.name for f in fields(RunConfig)]:
        value = getattr(args, key, None)
        if value is not None:
            items[key] = value
    if args.mode_flag is not None:
        items["mode"] = args.mode_flag
    if args.mode is not None:
        items["mode"] = args.mode
    return items


COMMANDS = {
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_items(_collect_items(args))
        COMMANDS[cfg.mode](cfg)
    except Exception as exc:  # single-line diagnostic, nonzero exit
        print(f"pdacmri: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
