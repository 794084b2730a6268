from __future__ import annotations

import functools
import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click

from luminark.errors import LuminarkError, UnachievableFprError

SEED = click.IntRange(0, 2**64 - 1)
UNIT_INTERVAL = click.FloatRange(0.0, 1.0, min_open=True, max_open=True)
NONNEGATIVE = click.FloatRange(min=0.0)


def _echo_json(payload: Any) -> None:
    from luminark.utils.fileio import dumps_json

    click.echo(dumps_json(payload))


def _fail(error: str, message: str, **details: Any) -> None:
    """Print a JSON diagnostic and exit 1 (operational failure)."""
    _echo_json({"error": error, "message": message, **details})
    click.get_current_context().exit(1)


def _operational(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Turn library errors raised while working on files into exit code 1."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except LuminarkError as e:
            details = {"N": e.n, "target_fpr": e.target_fpr} if isinstance(e, UnachievableFprError) else {}
            _fail(type(e).__name__, str(e), **details)
        except OSError as e:
            _fail("IOError", str(e))

    return wrapper


def _setting(key: str, value: Any) -> Any:
    """Explicit flag value, else the configured/default setting."""
    if value is not None:
        return value
    from luminark.config import get_setting

    return get_setting(key)


def _load_image(path: str, patch_size: int, resize_to_grid: bool):
    from luminark.core.image import load_png, resize_to_grid as fit_grid

    image = load_png(path)
    return fit_grid(image, patch_size) if resize_to_grid else image


def _load_keyed_image(image_path: str, key_path: str, resize_to_grid: bool):
    from luminark.core.keys import load_key

    key = load_key(key_path)
    image = _load_image(image_path, key.layout.patch_size, resize_to_grid)
    key.layout.check_shape(image.height, image.width)
    return key, image


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
@click.option("--quiet", "-q", is_flag=True, help="Only log warnings and errors")
@click.pass_context
def cli(ctx, verbose: bool, quiet: bool):
    """Luminark: certified patch-luminance watermarks for generated images."""
    from luminark.utils.logging_config import setup_cli_logging

    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["quiet"] = quiet

    setup_cli_logging(verbose=verbose, quiet=quiet)


@cli.command("keygen")
@click.option("--seed", type=SEED, required=True, help="Seed of the key stream")
@click.option("--height", type=click.IntRange(min=1), default=512, show_default=True)
@click.option("--width", type=click.IntRange(min=1), default=512, show_default=True)
@click.option("--patch-size", type=click.IntRange(min=1), default=None, help="Patch size k (config: patch_size)")
@click.option(
    "--weights",
    type=click.Choice(["luminance", "R", "G", "B", "average", "random"]),
    default="luminance",
    show_default=True,
    help="Channel weights used for patch luminance",
)
@click.option("--tau-low", type=UNIT_INTERVAL, default=0.4, show_default=True)
@click.option("--tau-high", type=UNIT_INTERVAL, default=0.6, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Key file to write")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@_operational
def keygen_cmd(
    seed: int,
    height: int,
    width: int,
    patch_size: int | None,
    weights: str,
    tau_low: float,
    tau_high: float,
    out_path: str,
    as_json: bool,
):
    """Generate a secret key file. Its contents are never printed."""
    from luminark.core.keys import ChannelWeights, PatchLayout, generate_key, save_key
    from luminark.harness.reports import REPORT_SCHEMA_VERSION

    if tau_low >= tau_high:
        raise click.BadParameter(f"must be greater than --tau-low ({tau_low})", param_hint="--tau-high")
    patch_size = int(_setting("patch_size", patch_size))
    if height % patch_size or width % patch_size:
        raise click.BadParameter(f"{patch_size} does not divide {width}x{height}", param_hint="--patch-size")
    layout = PatchLayout(height, width, patch_size)
    key = generate_key(seed, layout, ChannelWeights.preset(weights, seed=seed), tau_low, tau_high)
    save_key(key, out_path)
    summary = {
        "key_file": out_path,
        "schema_version": REPORT_SCHEMA_VERSION,
        "N": key.num_patches,
        "height": layout.height,
        "width": layout.width,
        "patch_size": layout.patch_size,
        "weights": weights,
    }
    if as_json:
        _echo_json(summary)
        return
    grid = f"{layout.rows}x{layout.cols}"
    click.echo(f"Wrote key with {click.style(str(key.num_patches), fg='cyan')} patches ({grid} grid) to {out_path}")


@cli.command("calibrate")
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Number of patches N")
@click.option("--fpr", type=UNIT_INTERVAL, default=None, help="Target false-positive rate (config: fpr)")
@click.option(
    "--flip",
    type=click.Choice(["none", "union", "plain"]),
    default="none",
    show_default=True,
    help="Per-branch calibration for flip-OR detection",
)
@click.option("--ladder", is_flag=True, help="Print the full p-value ladder as CSV instead")
@_operational
def calibrate_cmd(n: int, fpr: float | None, flip: str, ladder: bool):
    """Smallest match count whose exact binomial tail meets the target fpr."""
    from luminark.certify import calibrate_for_flip, calibrate_threshold, p_value_ladder
    from luminark.harness.reports import rows_to_csv

    if ladder:
        rows = [{"k": k, "p_k": p} for k, p in p_value_ladder(n)]
        click.echo(rows_to_csv(rows, ("k", "p_k")), nl=False)
        return
    target = float(_setting("fpr", fpr))
    if flip == "none":
        threshold = calibrate_threshold(n, target)
        _echo_json(threshold.to_dict())
    else:
        threshold = calibrate_for_flip(n, target, flip)
        _echo_json({**threshold.to_dict(), "combined_fpr": target, "flip_calibration": flip})


@cli.command("inject")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--mode", type=click.Choice(["gd", "project"]), default="gd", show_default=True)
@click.option("--margin", type=NONNEGATIVE, default=None, help="Luminance margin (config: margin)")
@click.option("--step-size", type=click.FloatRange(min=0.0, min_open=True), default=None)
@click.option("--max-iter", type=click.IntRange(min=0), default=200, show_default=True)
@click.option("--target-match-rate", type=click.FloatRange(0.0, 1.0, min_open=True), default=1.0, show_default=True)
@click.option("--sidecar", type=click.Path(dir_okay=False), default=None, help="Result JSON (default: OUT.json)")
@click.option("--resize-to-grid", is_flag=True, help="Resize the input to the nearest patch-divisible size first")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@_operational
def inject_cmd(
    in_path: str,
    key_path: str,
    out_path: str,
    mode: str,
    margin: float | None,
    step_size: float | None,
    max_iter: int,
    target_match_rate: float,
    sidecar: str | None,
    resize_to_grid: bool,
    as_json: bool,
):
    """Embed the key into an existing image and write the watermarked PNG."""
    from luminark.core.image import save_png
    from luminark.core.patterns import match_rate, satisfied_fraction
    from luminark.harness.metrics import psnr
    from luminark.injector import InjectionConfig, inject_hard_projection, inject_posthoc_gd
    from luminark.utils.fileio import write_json

    key, image = _load_keyed_image(in_path, key_path, resize_to_grid)
    margin = float(_setting("margin", margin))
    if mode == "gd":
        cfg = InjectionConfig(
            step_size=step_size,
            max_iterations=max_iter,
            margin=margin,
            target_match_rate=target_match_rate,
        )
        result = inject_posthoc_gd(image, key, cfg)
        out_image = result.image
        payload = {"mode": mode, **result.to_dict()}
        success = result.success
    else:
        projection = inject_hard_projection(image, key, margin=margin)
        out_image = projection.image
        fraction = satisfied_fraction(out_image, key, margin)
        success = fraction >= target_match_rate
        payload = {
            "mode": mode,
            "final_match_rate": match_rate(out_image, key),
            "psnr_db": psnr(image, out_image),
            "satisfied_fraction": fraction,
            "projected": len(projection.projected),
            "clamp_bound": projection.clamp_bound,
            "margin": margin,
            "success": success,
        }

    save_png(out_image, out_path)
    payload["saved_match_rate"] = match_rate(out_image.quantized(), key)
    payload["out"] = out_path
    sidecar_path = sidecar or str(Path(out_path).with_suffix(".json"))
    write_json(sidecar_path, payload)

    if not success:
        _fail("InjectionNotConverged", "Injection stopped before reaching the target match rate", **payload)
    if as_json:
        _echo_json(payload)
        return
    rate = click.style(f"{payload['final_match_rate']:.4f}", fg="green")
    click.echo(f"Wrote {out_path} (match rate {rate}, PSNR {payload['psnr_db']:.2f} dB); details in {sidecar_path}")


@cli.command("detect")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--fpr", type=UNIT_INTERVAL, default=None, help="Target false-positive rate (config: fpr)")
@click.option("--flip-or", is_flag=True, help="Also test the horizontally mirrored image")
@click.option(
    "--flip-calibration",
    type=click.Choice(["union", "plain"]),
    default="union",
    show_default=True,
    help="union: each branch at fpr/2; plain: each branch at fpr",
)
@click.option("--resize-to-grid", is_flag=True, help="Resize the input to the nearest patch-divisible size first")
@_operational
def detect_cmd(
    in_path: str, key_path: str, fpr: float | None, flip_or: bool, flip_calibration: str, resize_to_grid: bool
):
    """Test an image for the watermark and print the DetectionReport as JSON."""
    from luminark.certify import calibrate_for_flip, calibrate_threshold, detect, detect_with_flip

    key, image = _load_keyed_image(in_path, key_path, resize_to_grid)
    target = float(_setting("fpr", fpr))
    if flip_or:
        report = detect_with_flip(image, key, calibrate_for_flip(key.num_patches, target, flip_calibration))
    else:
        report = detect(image, key, calibrate_threshold(key.num_patches, target))
    _echo_json(report.to_dict())


def _resize_templates(prior, shape: tuple[int, int, int]):
    import cv2
    import numpy as np

    from luminark.diffusion.prior import MixturePrior

    h, w, _ = shape
    resized = [cv2.resize(np.asarray(t), (w, h), interpolation=cv2.INTER_AREA) for t in prior.templates]
    return MixturePrior.from_templates(resized, weights=prior.weights, template_std=prior.template_std)


def _build_prior(
    shape: tuple[int, int, int],
    templates: str | None,
    count: int,
    template_seed: int,
    template_std: float,
    latent: bool,
):
    from luminark.diffusion.prior import MixturePrior
    from luminark.diffusion.templates import build_toy_latent_prior, build_toy_prior
    from luminark.errors import LayoutError

    if templates is None:
        if latent:
            return build_toy_latent_prior(count, shape, seed=template_seed, template_std=template_std)
        return build_toy_prior(count, shape[0], shape[1], seed=template_seed, template_std=template_std)
    prior = MixturePrior.from_directory(templates, template_std=template_std)
    if latent:
        return _resize_templates(prior, shape)
    if prior.shape != shape:
        raise LayoutError(f"Templates are {prior.shape[1]}x{prior.shape[0]}, expected {shape[1]}x{shape[0]}")
    return prior


@cli.command("sample")
@click.option("--guided", is_flag=True, help="Watermark guidance during sampling")
@click.option("--hard-stepwise", is_flag=True, help="Project onto the constraints after every step")
@click.option(
    "--latent-factor", type=click.IntRange(min=1), default=None, help="Guided sampling in an f-times smaller latent"
)
@click.option("--interpolation", type=click.Choice(["nearest", "bilinear"]), default="nearest", show_default=True)
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=SEED, default=0, show_default=True)
@click.option("--scale", type=NONNEGATIVE, default=None, help="Guidance scale s (default: derived from the key)")
@click.option("--margin", type=NONNEGATIVE, default=None, help="Penalty margin (config: margin)")
@click.option("--fpr", type=UNIT_INTERVAL, default=None, help="Acceptance fpr for retries (config: fpr)")
@click.option("--max-retries", type=click.IntRange(min=1), default=None, help="Retry cap (config: max_retries)")
@click.option("--percentage", type=click.FloatRange(0.0, 1.0, min_open=True), default=1.0, show_default=True)
@click.option("--steps", type=click.IntRange(min=2), default=32, show_default=True)
@click.option("--height", type=click.IntRange(min=1), default=64, show_default=True, help="Used without --key")
@click.option("--width", type=click.IntRange(min=1), default=64, show_default=True, help="Used without --key")
@click.option(
    "--templates", type=click.Path(exists=True, file_okay=False), default=None, help="Directory of PNG templates"
)
@click.option("--template-count", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--template-seed", type=SEED, default=0, show_default=True)
@click.option("--template-std", type=NONNEGATIVE, default=0.05, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option(
    "--trace", "trace_path", type=click.Path(dir_okay=False), default=None, help="Write the sampling trace JSON"
)
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@_operational
def sample_cmd(
    guided: bool,
    hard_stepwise: bool,
    latent_factor: int | None,
    interpolation: str,
    key_path: str | None,
    seed: int,
    scale: float | None,
    margin: float | None,
    fpr: float | None,
    max_retries: int | None,
    percentage: float,
    steps: int,
    height: int,
    width: int,
    templates: str | None,
    template_count: int,
    template_seed: int,
    template_std: float,
    out_path: str,
    trace_path: str | None,
    as_json: bool,
):
    """Sample an image from the mixture prior, optionally watermarked."""
    from luminark.certify import calibrate_threshold
    from luminark.core.image import save_png
    from luminark.core.keys import load_key
    from luminark.core.patterns import match_rate
    from luminark.diffusion.decoder import LinearDecoder
    from luminark.diffusion.sampler import sample_guided, sample_guided_latent, sample_hard_stepwise, sample_unguided
    from luminark.diffusion.schedule import build_schedule
    from luminark.utils.fileio import write_json

    if hard_stepwise and (guided or latent_factor is not None):
        raise click.UsageError("--hard-stepwise cannot be combined with --guided or --latent-factor")
    keyed = guided or hard_stepwise or latent_factor is not None
    if keyed and key_path is None:
        raise click.UsageError("--key is required for watermarked sampling")

    key = load_key(key_path) if key_path else None
    if key is not None:
        height, width = key.layout.height, key.layout.width
    if latent_factor is not None and (height % latent_factor or width % latent_factor):
        raise click.BadParameter(f"{latent_factor} does not divide {width}x{height}", param_hint="--latent-factor")
    schedule = build_schedule(steps)
    margin = float(_setting("margin", margin))

    if not keyed:
        prior = _build_prior((height, width, 3), templates, template_count, template_seed, template_std, False)
        image = sample_unguided(seed, schedule, prior)
        payload: dict[str, Any] = {"sampler": "unguided", "seed": seed, "schedule": schedule.to_dict()}
        success = True
    elif hard_stepwise:
        assert key is not None
        prior = _build_prior((height, width, 3), templates, template_count, template_seed, template_std, False)
        image = sample_hard_stepwise(seed, schedule, prior, key, margin=margin, percentage=percentage)
        payload = {
            "sampler": "hard_stepwise",
            "seed": seed,
            "margin": margin,
            "percentage": percentage,
            "match_rate": match_rate(image, key),
            "schedule": schedule.to_dict(),
        }
        success = True
    else:
        assert key is not None
        threshold = calibrate_threshold(key.num_patches, float(_setting("fpr", fpr)))
        if latent_factor is not None:
            decoder = LinearDecoder.upsampling(key.layout, latent_factor, interpolation)
            prior = _build_prior(decoder.latent_shape, templates, template_count, template_seed, template_std, True)
            trace = sample_guided_latent(
                seed,
                schedule,
                prior,
                decoder,
                key,
                scale,
                threshold,
                margin=margin,
                max_retries=max_retries,
            )
        else:
            prior = _build_prior((height, width, 3), templates, template_count, template_seed, template_std, False)
            trace = sample_guided(seed, schedule, prior, key, scale, threshold, margin=margin, max_retries=max_retries)
        image = trace.image
        payload = trace.to_dict()
        success = trace.success

    save_png(image, out_path)
    if key is not None:
        payload["saved_match_rate"] = match_rate(image.quantized(), key)
    payload["out"] = out_path
    if trace_path:
        write_json(trace_path, payload)

    if not success:
        _fail("RetryCapExhausted", "No attempt reached the calibrated match threshold", **payload)
    if as_json:
        _echo_json(payload)
        return
    detail = f", match rate {payload['match_rate']:.4f}" if "match_rate" in payload else ""
    retries = f", {payload['retries']} attempt(s)" if "retries" in payload else ""
    click.echo(f"Wrote {click.style(payload['sampler'], fg='cyan')} sample to {out_path}{detail}{retries}")


def _parse_params(params: tuple[str, ...]) -> dict[str, Any]:
    parsed: dict[str, Any] = {}
    for item in params:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            raise click.BadParameter(f"expected NAME=VALUE, got {item!r}", param_hint="--param")
        try:
            parsed[name] = json.loads(raw)
        except json.JSONDecodeError:
            parsed[name] = raw
    return parsed


@cli.command("attack")
@click.option(
    "--kind",
    type=click.Choice(
        [
            "scaling",
            "cropping",
            "jpeg",
            "median_filter",
            "gaussian_blur",
            "color_jitter",
            "color_quantization",
            "gaussian_noise",
            "unsharp_mask",
            "horizontal_flip",
            "all",
        ]
    ),
    required=True,
)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True, help="Output PNG, or a directory for --kind all")
@click.option("--seed", type=SEED, default=0, show_default=True, help="Seed for stochastic attacks")
@click.option("--param", "params", multiple=True, help="Attack parameter override NAME=VALUE (single kind only)")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@_operational
def attack_cmd(kind: str, in_path: str, out_path: str, seed: int, params: tuple[str, ...], as_json: bool):
    """Apply one attack, or every attack kind with --kind all."""
    from luminark.attacks.base import AttackKind, AttackSpec
    from luminark.attacks.battery import apply_attack, attack_battery, derive_attack_seed
    from luminark.core.image import load_png, save_png
    from luminark.harness.reports import MANIFEST_NAME, REPORT_SCHEMA_VERSION
    from luminark.utils.fileio import write_json

    image = load_png(in_path)
    if kind == "all":
        if params:
            raise click.UsageError("--param applies to a single --kind only")
        kinds = list(AttackKind)
        out_dir = Path(out_path)
        files: dict[str, str] = {}
        for name, attacked in attack_battery(image, seed, kinds).items():
            save_png(attacked, out_dir / f"{name}.png")
            files[name] = f"{name}.png"
        payload = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "input": Path(in_path).name,
            "seed": seed,
            "files": files,
            "seeds": {k.value: derive_attack_seed(seed, k) for k in kinds},
        }
        write_json(out_dir / MANIFEST_NAME, payload)
    else:
        spec = AttackSpec(kind=kind, parameters=_parse_params(params), rng_seed=derive_attack_seed(seed, kind))
        try:
            attacked = apply_attack(image, spec)
        except TypeError as e:
            raise click.BadParameter(str(e), param_hint="--param") from e
        save_png(attacked, out_path)
        payload = {"kind": kind, "seed": seed, "parameters": spec.parameters, "out": out_path}

    if as_json:
        _echo_json(payload)
        return
    written = len(payload["files"]) if "files" in payload else 1
    click.echo(f"Wrote {written} attacked image(s) to {out_path}")


@cli.command("eval")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True, help="Report directory")
@click.option("--study", "studies", multiple=True, type=click.Choice(["fpr", "robustness", "ablation"]))
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes (config: workers)")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@_operational
def eval_cmd(config_path: str | None, out_dir: str, studies: tuple[str, ...], workers: int | None, as_json: bool):
    """Run the FPR, robustness and ablation studies and write their reports."""
    from dataclasses import replace

    from luminark.harness.config import ExperimentConfig, load_experiment_config
    from luminark.managers.evaluation_manager import EvaluationManager

    cfg = load_experiment_config(config_path) if config_path else ExperimentConfig()
    if studies:
        cfg = replace(cfg, studies=list(studies))
    result = EvaluationManager(cfg, workers=workers).run_all(out_dir)
    if as_json:
        _echo_json(result)
        return
    for study, summary in result["summary"].items():
        click.echo(f"\n{click.style(study, fg='cyan', bold=True)}")
        for name, value in summary.items():
            click.echo(f"  {name}: {value}")
    click.echo(f"\nReports written to {click.style(result['out_dir'], fg='yellow')}")


@cli.command("inspect")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--margin", type=NONNEGATIVE, default=0.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="CSV file (default: stdout)")
@click.option("--resize-to-grid", is_flag=True, help="Resize the input to the nearest patch-divisible size first")
@_operational
def inspect_cmd(in_path: str, key_path: str, margin: float, out_path: str | None, resize_to_grid: bool):
    """Per-patch luminance, threshold, sign, violation and slack as CSV."""
    from luminark.harness.reports import rows_to_csv
    from luminark.penalty import violation_terms
    from luminark.utils.fileio import atomic_write_text

    key, image = _load_keyed_image(in_path, key_path, resize_to_grid)
    vt = violation_terms(image, key, margin)
    violated = vt.violated
    slack = vt.slack
    rows = [
        {
            "index": i,
            "luminance": float(vt.luminance[i]),
            "tau": float(vt.tau[i]),
            "c": int(vt.c[i]),
            "violated": int(violated[i]),
            "slack": float(slack[i]),
        }
        for i in range(key.num_patches)
    ]
    text = rows_to_csv(rows, ("index", "luminance", "tau", "c", "violated", "slack"))
    if out_path:
        atomic_write_text(out_path, text)
    else:
        click.echo(text, nl=False)


@cli.command("visualize")
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--cell", type=click.IntRange(min=8), default=24, show_default=True, help="Cell size in pixels")
@click.option("--margin", type=NONNEGATIVE, default=0.0, show_default=True)
@_operational
def visualize_cmd(key_path: str, in_path: str | None, out_path: str, cell: int, margin: float):
    """Render the key as a patch grid (gray = tau, glyph = sign, color = constraint status)."""
    from luminark.core.keys import load_key
    from luminark.visualize import save_key_grid

    if in_path:
        key, image = _load_keyed_image(in_path, key_path, False)
    else:
        key, image = load_key(key_path), None
    save_key_grid(key, out_path, image=image, cell=cell, margin=margin)
    click.echo(f"Wrote {out_path}")


@cli.group("attacks")
def attacks_group():
    """Attack discovery and metadata commands"""
    pass


@attacks_group.command("list")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
def attacks_list(as_json: bool):
    """List registered attacks with their default parameters."""
    from luminark.managers.attack_registry import get_default_registry

    registry = get_default_registry()
    infos = {name: registry.get_attack_info(name) for name in registry.get_attack_names()}
    if as_json:
        _echo_json(infos)
        return
    if not infos:
        click.echo("No attacks discovered")
        return
    for name, info in infos.items():
        info = info or {}
        tag = click.style("stochastic", fg="yellow") if info.get("stochastic") else "deterministic"
        click.echo(f"{click.style(name, fg='cyan')} [{tag}]\n  {info.get('description', '')}")
        params = info.get("parameters") or {}
        if params:
            click.echo("  " + ", ".join(f"{k}={v}" for k, v in params.items()))


@cli.group("config")
def config_group():
    """Manage persistent configuration (XDG config)."""
    pass


@config_group.command("set")
@click.argument("key", type=str)
@click.argument("value", type=str)
@click.option("--yes", is_flag=True, help="Do not ask for confirmation")
def config_set(key: str, value: str, yes: bool):
    """Set a config key. Supported keys: workers, fpr, margin, patch_size, max_retries, guidance_rate"""
    from luminark.config import _config_file_path, get_allowed_keys, set_config_value

    allowed = get_allowed_keys()
    if key not in allowed:
        raise click.BadParameter(f"unsupported config key {key!r} (choose from {', '.join(allowed)})", param_hint="KEY")

    if not yes:
        click.echo(f"About to set {key} in {_config_file_path()} to {value}")
        if not click.confirm("Proceed?"):
            click.echo("Aborted.")
            return

    if set_config_value(key, value):
        click.echo(f"Set {key} = {value}")
    else:
        _fail("ConfigError", f"Failed to set {key} (validation or IO error)")


@config_group.command("get")
@click.argument("key", type=str)
@click.option("--defaults", is_flag=True, help="Show environment/config/code defaults for the key")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
def config_get(key: str, defaults: bool, as_json: bool):
    from luminark.config import get_effective_value, load_config

    eff = get_effective_value(key)
    if eff is None:
        raise click.BadParameter(f"unsupported config key {key!r}", param_hint="KEY")
    if as_json:
        _echo_json({"key": key, **eff})
        return
    if defaults:
        click.echo(f"env: {eff.get('env')}")
        click.echo(f"config: {eff.get('config')}")
        click.echo(f"code_default: {eff.get('code_default')}")
        click.echo(f"effective: {eff.get('effective')}")
        return

    cfg = load_config() or {}
    click.echo(cfg.get(key, ""))


def main():
    cli()


if __name__ == "__main__":
    main()
