import click

from cli.common import (
    emit, enumeration_options, handle_errors, instance_options, output_options, read_instance,
    sample_option, seed_option,
)
from schemas.run_schema import Command, OutputFormat
from services.tour import can_enumerate, enumerate_histogram, histogram, sample_lengths


@click.command("histogram")
@instance_options
@click.option("--bins", type=click.IntRange(min=2), default=50, show_default=True)
@click.option("--range", "hist_range", type=(float, float), default=None,
              help="Histogram range LO HI; defaults to the observed [min, max].")
@click.option("--sampled", is_flag=True, default=False, help="Sample even when enumeration is possible.")
@sample_option
@seed_option
@enumeration_options
@output_options(OutputFormat.CSV)
@handle_errors
def histogram_command(tsplib_path, instance_path, bins, hist_range, sampled, sample_size, seed, workers, max_n,
                      allow_long, output_format, out_path):
    """Density histogram of tour lengths (all tours when n allows, else a sample)."""
    instance = read_instance(tsplib_path, instance_path)
    seeds = {}
    if not sampled and can_enumerate(instance.n, allow_long, max_n):
        result = enumerate_histogram(instance, bins, hist_range, workers=workers, allow_long=allow_long, cap=max_n)
    else:
        lengths = sample_lengths(instance, sample_size, seed)
        if hist_range is None:
            lo, hi = float(lengths.min()), float(lengths.max())
            hist_range = (lo, hi) if hi > lo else (lo - 0.5, lo + 0.5)
        result = histogram(lengths, bins, hist_range)
        seeds = {"seed": seed}
    emit(Command.HISTOGRAM, result, output_format, out_path, seeds=seeds, instance=instance,
         csv_text=result.to_csv)
