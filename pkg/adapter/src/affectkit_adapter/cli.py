"""Adapter command line: export vectors, optionally fine-tune."""

from __future__ import annotations

import sys

import click

from .export import DEFAULT_MODEL, AdapterConfig, AdapterError, export_embeddings
from .finetune import FinetuneConfig, joint_finetune
from .io import FormatError


@click.group()
def cli():
    """Transformer sentence-vector exporter for the affectkit pipeline."""


@cli.command("export")
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--model", default=DEFAULT_MODEL, show_default=True,
              help="Model id or local model directory.")
@click.option("--pooling", type=click.Choice(["cls", "mean"]), default="cls", show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--device", default="cpu", show_default=True)
def export_command(corpus, out, model, pooling, batch_size, device):
    """Export one sentence vector per corpus event."""
    config = AdapterConfig(model=model, pooling=pooling, batch_size=batch_size, device=device)
    count = export_embeddings(corpus, out, config)
    click.echo(f"exported {count} vectors -> {out}")


@cli.command("finetune")
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--predictions-out", type=click.Path(dir_okay=False), required=True)
@click.option("--model", default=DEFAULT_MODEL, show_default=True)
@click.option("--lr", type=float, default=2e-5, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--max-steps", type=int, default=500, show_default=True)
@click.option("--eval-interval", type=int, default=25, show_default=True)
@click.option("--patience", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--device", default="cpu", show_default=True)
def finetune_command(corpus, predictions_out, model, lr, batch_size, max_steps,
                     eval_interval, patience, seed, device):
    """Jointly fine-tune encoder+head and export per-event predictions."""
    config = FinetuneConfig(
        adapter=AdapterConfig(model=model, batch_size=batch_size, device=device),
        learning_rate=lr, batch_size=batch_size, max_steps=max_steps,
        eval_interval=eval_interval, patience=patience, seed=seed,
    )
    result = joint_finetune(corpus, predictions_out, config)
    click.echo(
        f"ran {result.steps_run} steps, best test loss "
        f"{result.best_test_loss if result.steps_run else float('nan'):.4f}; "
        f"predictions -> {result.predictions_path}"
    )


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="affectkit-adapter", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (AdapterError, FormatError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
