"""Command line front end: run presets, inspect them, check dataset files."""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np
import yaml

from .dataio import DatasetFormatError, load_logistic_dataset
from .presets import (
    CensoredRunError,
    preset_summaries,
    resolve_preset,
    run_preset,
)

_FLAG_KEYS = ("seed", "replicates", "lag", "t_max", "workers", "keep_trajectories")


class ConfigError(click.ClickException):
    pass


def parse_config(config_path, preset_arg, flag_overrides, assignments):
    """Merge a config file with command-line overrides; flags win.

    The file is YAML: a ``preset`` key plus flat parameter keys, optionally
    grouped under a ``params`` section. ``assignments`` are ``key=value``
    strings whose values parse as YAML scalars.
    """
    file_params: dict = {}
    preset = preset_arg
    if config_path is not None:
        try:
            loaded = yaml.safe_load(Path(config_path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{config_path}: invalid YAML ({exc})")
        if not isinstance(loaded, dict):
            raise ConfigError(f"{config_path}: top level must be a mapping")
        nested = loaded.pop("params", {})
        if not isinstance(nested, dict):
            raise ConfigError(f"{config_path}: 'params' must be a mapping")
        file_params.update(loaded)
        for key, value in nested.items():
            if key in file_params:
                raise ConfigError(f"{config_path}: key {key!r} given twice")
            file_params[key] = value
        file_preset = file_params.pop("preset", None)
        if preset is None:
            preset = file_preset
        elif file_preset is not None and file_preset != preset:
            click.echo(
                f"note: command line preset {preset!r} overrides config file "
                f"preset {file_preset!r}",
                err=True,
            )
    if preset is None:
        raise ConfigError("no preset given (positional argument or 'preset:' in the config)")

    overrides = dict(file_params)
    for key, value in flag_overrides.items():
        if value is not None:
            overrides[key] = value
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            overrides[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError:
            raise ConfigError(f"--set {item!r}: value is not a YAML scalar")
    return preset, overrides


@click.group()
def main():
    """Simulation-estimable convergence bounds for coupled MCMC chains."""


@main.command("run")
@click.argument("preset", required=False, type=str)
@click.option("--config", "config_path", type=click.Path(exists=True), help="YAML config file.")
@click.option("--seed", type=int, default=None, help="Master seed.")
@click.option("--replicates", type=int, default=None, help="Independent coupled runs.")
@click.option("--lag", type=int, default=None, help="Lag between the chains.")
@click.option("--t-max", "t_max", type=int, default=None, help="Step cap per replicate.")
@click.option("--workers", type=int, default=None, help="Parallel workers (default 1).")
@click.option("--out-dir", default="lagcoupling-out", show_default=True)
@click.option(
    "--keep-trajectories/--no-keep-trajectories",
    "keep_trajectories",
    default=None,
    help="Store chain paths (needed for Wasserstein curves).",
)
@click.option(
    "--allow-censored",
    is_flag=True,
    help="Emit flagged output instead of failing when replicates hit t_max.",
)
@click.option(
    "--set",
    "assignments",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override any preset parameter (repeatable).",
)
def run_command(
    preset,
    config_path,
    seed,
    replicates,
    lag,
    t_max,
    workers,
    out_dir,
    keep_trajectories,
    allow_censored,
    assignments,
):
    """Run PRESET and write meetings.csv, bounds.csv, summary.json."""
    flags = dict(
        seed=seed,
        replicates=replicates,
        lag=lag,
        t_max=t_max,
        workers=workers,
        keep_trajectories=keep_trajectories,
    )
    name, overrides = parse_config(config_path, preset, flags, assignments)
    try:
        resolved = resolve_preset(name, overrides)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc.args[0] if exc.args else exc))
    try:
        summary = run_preset(resolved, out_dir, allow_censored=allow_censored)
    except CensoredRunError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {Path(out_dir) / 'meetings.csv'}")
    click.echo(f"wrote {Path(out_dir) / 'bounds.csv'}")
    click.echo(f"wrote {Path(out_dir) / 'summary.json'}")
    for exp_name, info in summary["experiments"].items():
        line = f"{exp_name}: {info['replicates']} replicates, mean tau {info['tau_mean']:.1f}"
        if info.get("censored"):
            line += f" ({info['censored']} censored)"
        for eps, k in info.get("t_mix", {}).items():
            line += f", t_mix({eps})={k}"
        click.echo(line)


@main.command("list-presets")
def list_presets_command():
    """Show available presets and their desk-scale defaults."""
    for name, summary in preset_summaries():
        click.echo(f"{name}")
        click.echo(f"    {summary}")


@main.command("dataset-check")
@click.argument("path", type=click.Path(exists=True))
@click.option("--intercept", is_flag=True, help="Prepend a constant-1 column.")
@click.option("--standardize", is_flag=True, help="Rescale covariates to mean 0, variance 1.")
def dataset_check_command(path, intercept, standardize):
    """Validate a logistic dataset file and print its shape."""
    try:
        dataset = load_logistic_dataset(path, intercept=intercept, standardize=standardize)
    except DatasetFormatError as exc:
        raise click.ClickException(str(exc))
    n_pos = int(np.sum(dataset.responses == 1))
    click.echo(f"rows: {dataset.n}")
    click.echo(f"covariates: {dataset.dim}" + (" (includes intercept)" if intercept else ""))
    click.echo(f"responses: {n_pos} positive / {dataset.n - n_pos} negative")
    means = dataset.covariates.mean(axis=0)
    sds = dataset.covariates.std(axis=0)
    click.echo(f"covariate means in [{means.min():.3g}, {means.max():.3g}]")
    click.echo(f"covariate sds in [{sds.min():.3g}, {sds.max():.3g}]")


if __name__ == "__main__":
    main()
