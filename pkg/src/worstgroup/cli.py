"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure in every trial.
"""

from __future__ import annotations

import sys
from contextlib import contextmanager

import click

from .config import apply_overrides, load_config
from .errors import ConfigError, DataError, NumericalFailureError
from .harness import find_true_worst, run_experiment
from .oracle import build_schema, global_metric, load_dataset, supported_subgroups

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


@contextmanager
def _exit_on_error():
    try:
        yield
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    except NumericalFailureError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


@click.group()
def main():
    """Find the data subgroup on which a monitored ML system performs worst.

    Strategies: bo (surrogate-guided search), rs (random search), es
    (exhaustive search in enumeration order).  All runs are metered by the
    labeling budget and fully determined by the configured seeds.
    """


_config_option = click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(),
    help="Experiment TOML file.",
)


@main.command()
@_config_option
@click.option("--trials", type=int, default=None, help="Override search.trials.")
@click.option("--budget", type=int, default=None, help="Override search.budget.")
@click.option("--seed", type=int, default=None, help="Override search.base_seed.")
@click.option(
    "--strategy",
    "strategies",
    multiple=True,
    help="Override strategies; repeatable (e.g. --strategy bo --strategy rs).",
)
def run(config_path, trials, budget, seed, strategies):
    """Run the configured strategies over repeated seeded trials."""
    with _exit_on_error():
        config = load_config(config_path)
        config = apply_overrides(
            config,
            trials=trials,
            budget=budget,
            seed=seed,
            strategies=tuple(strategies) or None,
        )
        result = run_experiment(config)
    click.echo(f"trace:   {result.trace_path}")
    click.echo(f"summary: {result.summary_path}")
    for name, section in result.summary["strategies"].items():
        if section["mean"]:
            click.echo(
                f"{name}: final mean best-so-far "
                f"{section['mean'][-1]:.6g} over "
                f"{result.summary['trials'] - len(section['failed_trials'])} trials"
            )
        if section["failed_trials"]:
            click.echo(
                f"{name}: failed trials {section['failed_trials']}", err=True
            )
    tw = result.summary["true_worst"]
    if tw is not None:
        click.echo(
            f"true worst: {tw['subgroup_label']} (raw {tw['raw_value']:.6g})"
        )


@main.command("true-worst")
@_config_option
def true_worst(config_path):
    """Exhaustively compute the true worst subgroup of each dataset file."""
    with _exit_on_error():
        config = load_config(config_path)
        paths = []
        for t in range(config.trials):
            p = config.path_for_trial(t)
            if p not in paths:
                paths.append(p)
        schema = build_schema(config.dataset_spec, paths)
        for path in paths:
            dataset = load_dataset(path, config.dataset_spec, schema)
            subgroup, raw = find_true_worst(
                dataset, config.metric, config.support_threshold
            )
            click.echo(
                f"{path}: {schema.label(subgroup)} "
                f"raw={raw!r} support={dataset.support(subgroup)}"
            )


@main.command("validate-config")
@click.argument("config_path", type=click.Path())
def validate_config(config_path):
    """Check a config file and the datasets it references."""
    with _exit_on_error():
        config = load_config(config_path)
        paths = []
        for t in range(config.trials):
            p = config.path_for_trial(t)
            if p not in paths:
                paths.append(p)
        schema = build_schema(config.dataset_spec, paths)
        click.echo(
            "schema: "
            + ", ".join(
                f"{a.name}({a.cardinality})" for a in schema.attributes
            )
        )
        click.echo(f"lattice size: {schema.lattice_size}")
        for path in paths:
            dataset = load_dataset(path, config.dataset_spec, schema)
            pool = supported_subgroups(
                dataset, config.metric, config.support_threshold
            )
            click.echo(
                f"{path}: rows={dataset.n_rows} dropped={dataset.dropped_rows} "
                f"supported_subgroups={len(pool)} "
                f"global_{config.metric.kind}={global_metric(dataset, config.metric):.6g}"
            )
    click.echo("config OK")


if __name__ == "__main__":
    main()
