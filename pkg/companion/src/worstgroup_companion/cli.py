"""Companion command line: fetch, synth, prepare, train-predict, plot."""

from __future__ import annotations

from pathlib import Path

import click

from .config import read_shared_config
from .fetch import SOURCES, fetch_dataset
from .plot import plot_convergence
from .prepare import READERS, prepare_dataset
from .synth import GENERATORS
from .train import MODELS, run_trials


@click.group()
def main():
    """Prepare datasets, train reference models, and plot harness results.

    A typical round trip: fetch (or synth) raw data, prepare it into a
    canonical CSV using the same config the harness reads, train-predict to
    emit per-resplit predictions CSVs, point the harness at them, then plot
    the summary it writes.
    """


@main.command()
@click.argument("dataset", type=click.Choice(sorted(SOURCES)))
@click.option(
    "--cache",
    type=click.Path(path_type=Path),
    default=Path("raw-data"),
    show_default=True,
    help="Directory for downloaded raw files.",
)
def fetch(dataset, cache):
    """Download a public raw dataset into the cache (skips existing files)."""
    for path in fetch_dataset(dataset, cache):
        click.echo(f"ready: {path}")


@main.command()
@click.argument("dataset", type=click.Choice(sorted(GENERATORS)))
@click.option("--rows", type=int, default=12000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--out", type=click.Path(path_type=Path), required=True, help="Raw CSV to write."
)
def synth(dataset, rows, seed, out):
    """Generate a synthetic raw dataset for offline runs."""
    frame = GENERATORS[dataset](rows, seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False)
    click.echo(f"wrote {len(frame)} rows to {out}")


@main.command()
@click.argument("raw_paths", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(sorted(READERS)),
    required=True,
    help="Raw file layout: UCI adult, UCI bike hourly, or generic header CSV.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Shared experiment TOML; its binning tables are applied here.",
)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def prepare(raw_paths, fmt, config_path, out):
    """Convert raw files into one canonical CSV for training and the harness."""
    shared = read_shared_config(config_path)
    report = prepare_dataset(fmt, list(raw_paths), shared, out)
    click.echo(
        f"wrote {report.rows_out} rows to {out} "
        f"(dropped {report.dropped} of {report.rows_in} malformed/missing)"
    )


@main.command("train-predict")
@click.option("--data", type=click.Path(path_type=Path), required=True, help="Canonical CSV.")
@click.option("--model", type=click.Choice(sorted(MODELS)), required=True)
@click.option("--train-size", type=int, default=1000, show_default=True)
@click.option("--trials", type=int, default=20, show_default=True)
@click.option("--base-seed", type=int, default=0, show_default=True)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    required=True,
    help="Shared experiment TOML (truth/prediction column names).",
)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.option("--prefix", default="predictions", show_default=True)
def train_predict(data, model, train_size, trials, base_seed, config_path, out_dir, prefix):
    """Train one model per resplit and emit per-trial predictions CSVs."""
    shared = read_shared_config(config_path)
    paths = run_trials(
        data, model, train_size, trials, base_seed, shared, out_dir, prefix
    )
    for path in paths:
        click.echo(f"wrote {path}")


@main.command()
@click.option(
    "--summary", type=click.Path(path_type=Path), required=True, help="summary.json from the harness."
)
@click.option(
    "--trace",
    type=click.Path(path_type=Path),
    default=None,
    help="Optional trace.csv; adds faint per-trial curves.",
)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.option("--stem", default="convergence", show_default=True)
@click.option("--title", default=None)
def plot(summary, trace, out_dir, stem, title):
    """Render convergence figures (PNG and SVG) from a harness summary."""
    written = plot_convergence(
        summary, out_dir, stem=stem, title=title, trace_path=trace
    )
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
