"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data/configuration error.  Default
lexicon and coefficient paths resolve from flags, then AFFECTKIT_* env
vars, then a JSON config file, then the packaged demo data.
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import clustering, corpus, expand, head, metrics
from .epa import SentimentLexicon, read_lexicon_csv, write_lexicon_csv
from .equations import CoefficientSet, read_coefficients_tsv
from .errors import AffectkitError, ConfigurationError, DependencyError
from .head import TrainingConfig, TrainingExample
from .metrics import EpaRecord
from .service import load_resources, packaged_data
from .simulation import PartySpec, ScriptEvent, run_script

ENV_PREFIX = "AFFECTKIT"


def _config_file() -> dict:
    path = os.environ.get(f"{ENV_PREFIX}_CONFIG")
    if not path:
        for candidate in ("affectkit.json", os.path.expanduser("~/.affectkit.json")):
            if os.path.exists(candidate):
                path = candidate
                break
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"bad config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return data


def _resolve(flag_value, key: str, default=None):
    """Precedence: CLI flag, then AFFECTKIT_<KEY>, then config file, then default."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(f"{ENV_PREFIX}_{key.upper()}")
    if env:
        return env
    value = _config_file().get(key)
    if value is not None:
        return value
    return default


def _load_lexicon(path) -> SentimentLexicon:
    resolved = _resolve(path, "lexicon", packaged_data("demo_lexicon.csv"))
    return read_lexicon_csv(resolved)


def _load_coefficients(path) -> CoefficientSet:
    resolved = _resolve(path, "coefficients", None)
    if resolved is None:
        return read_coefficients_tsv(packaged_data("synthetic_coefficients.tsv"))
    if str(resolved) == "identity":
        return CoefficientSet.identity()
    return read_coefficients_tsv(resolved)


@click.group()
def cli():
    """Affect control theory engine and lexicon-expansion toolkit."""


# ---------------------------------------------------------------------------
# dict


@cli.group("dict")
def dict_group():
    """Lexicon import, validation, and comparison."""


@dict_group.command("import")
@click.argument("src", type=click.Path(exists=True, dir_okay=False))
@click.argument("dst", type=click.Path(dir_okay=False))
def dict_import(src, dst):
    """Validate SRC and write it back in canonical sorted form to DST."""
    lexicon = read_lexicon_csv(src)
    write_lexicon_csv(lexicon, dst)
    counts = lexicon.counts()
    click.echo(
        f"imported {len(lexicon)} entries "
        f"({counts['identity']} identities, {counts['behavior']} behaviors, "
        f"{counts['modifier']} modifiers) -> {dst}"
    )


@dict_group.command("validate")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def dict_validate(path):
    """Check a lexicon CSV and print summary counts."""
    lexicon = read_lexicon_csv(path)
    counts = lexicon.counts()
    click.echo(f"{path}: OK")
    for category in ("identity", "behavior", "modifier"):
        click.echo(f"  {category:>9}: {counts[category]}")
    click.echo(f"  {'total':>9}: {len(lexicon)}")


@dict_group.command("compare")
@click.argument("lex_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("lex_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV instead of a text table.")
def dict_compare(lex_a, lex_b, as_csv):
    """Compare two lexicons over their shared (term, category) keys."""
    report = metrics.compare_lexicons(read_lexicon_csv(lex_a), read_lexicon_csv(lex_b))
    if as_csv:
        click.echo(metrics.comparison_to_csv(report), nl=False)
    else:
        title = f"{Path(lex_a).name} vs {Path(lex_b).name}"
        click.echo(metrics.render_comparison(report, title=title), nl=False)


# ---------------------------------------------------------------------------
# corpus


@cli.group("corpus")
def corpus_group():
    """Synthetic MABMO corpus generation."""


@corpus_group.command("generate")
@click.option("--n", "n_events", type=int, required=True, help="Total events across splits.")
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--lexicon", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--coeffs", type=click.Path(), default=None)
@click.option("--k", "k_clusters", type=int, default=clustering.DEFAULT_CLUSTERS, show_default=True)
@click.option("--fractions", default="0.8,0.08,0.12", show_default=True,
              help="train,test,validation fractions.")
@click.option("--budget", type=int, default=corpus.DEFAULT_ENUMERATION_BUDGET, show_default=True,
              help="Exhaustive enumeration budget before sampling fallback.")
@click.option("--clusters-out", type=click.Path(dir_okay=False), default=None,
              help="Write the cluster report CSV here.")
@click.option("--elbow-out", type=click.Path(dir_okay=False), default=None,
              help="Write elbow diagnostics (k,inertia) per category here.")
@click.option("--k-max", type=int, default=8, show_default=True)
def corpus_generate(n_events, seed, out, lexicon, coeffs, k_clusters, fractions,
                    budget, clusters_out, elbow_out, k_max):
    """Cluster, split, code, and sample a seeded MABMO corpus to JSONL."""
    lexicon = _load_lexicon(lexicon)
    coefficient_set = _load_coefficients(coeffs)
    try:
        train_f, test_f, val_f = (float(v) for v in fractions.split(","))
    except ValueError:
        raise ConfigurationError(f"bad --fractions {fractions!r}; want three numbers") from None
    spec = corpus.SplitSpec(train=train_f, test=test_f, validation=val_f, seed=seed)

    started = time.perf_counter()
    build = corpus.generate_corpus(
        lexicon, coefficient_set, n_events=n_events, seed=seed,
        k_clusters=k_clusters, split_spec=spec, budget=budget,
    )
    corpus.write_corpus_jsonl(build.records, out)
    elapsed = time.perf_counter() - started

    if clusters_out:
        corpus.write_cluster_report(build.clusters, clusters_out)
    if elbow_out:
        # One k,inertia file per category: <stem>_<category><suffix>.
        base = Path(elbow_out)
        for category in ("identity", "behavior", "modifier"):
            points = np.array([e.epa.as_array() for e in lexicon.entries(category)])
            diag = clustering.elbow_diagnostic(points, k_max=k_max, seed=seed)
            target = base.with_name(f"{base.stem}_{category}{base.suffix}")
            corpus.write_elbow_csv(diag.k_values, diag.inertias, target)
            click.echo(
                f"elbow[{category}]: suggested k = {diag.suggested_k} -> {target}"
            )

    for name, histogram in build.histograms.items():
        click.echo(
            f"{name}: {sum(1 for r in build.records if r.split == name)} events, "
            f"{histogram.distinct} distinct codes over {histogram.total} combinations"
            f"{'' if histogram.exhaustive else ' (sampled)'}"
        )
    click.echo(f"wrote {len(build.records)} events -> {out} ({elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# head


@cli.group("head")
def head_group():
    """Train and evaluate the embedding-to-sentiment regression head."""


def _examples_for_split(records, vectors, split):
    examples = []
    missing = []
    for record in records:
        if record.split != split:
            continue
        if record.id not in vectors:
            missing.append(record.id)
            continue
        examples.append(
            TrainingExample(record.id, vectors[record.id], np.array(record.targets))
        )
    if missing:
        raise DependencyError(
            f"{len(missing)} {split} events have no embedding (first: {missing[:5]})"
        )
    return examples


@head_group.command("train")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--hidden", type=int, default=head.DEFAULT_HIDDEN_DIM, show_default=True)
@click.option("--lr", type=float, default=2e-5, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--weight-decay", type=float, default=0.01, show_default=True)
@click.option("--max-steps", type=int, default=2000, show_default=True)
@click.option("--eval-interval", type=int, default=50, show_default=True)
@click.option("--patience", type=int, default=5, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--history-out", type=click.Path(dir_okay=False), default=None)
def head_train(corpus_path, embeddings, out, hidden, lr, batch_size, weight_decay,
               max_steps, eval_interval, patience, seed, history_out):
    """Train on the corpus train split, early-stopping on the test split."""
    records = corpus.read_corpus_jsonl(corpus_path)
    dim, vectors = head.read_embeddings_jsonl(embeddings)
    train_set = _examples_for_split(records, vectors, "train")
    test_set = _examples_for_split(records, vectors, "test")
    model = head.HeadModel.initialize(input_dim=dim, hidden_dim=hidden, seed=seed)
    config = TrainingConfig(
        learning_rate=lr, batch_size=batch_size, weight_decay=weight_decay,
        max_steps=max_steps, eval_interval=eval_interval, patience=patience, seed=seed,
    )
    trained, history = head.train(model, train_set, test_set, config)
    head.save_model(trained, out)
    if history_out:
        import csv as _csv

        with open(history_out, "w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["step", "test_loss"])
            for step, value in zip(history.eval_steps, history.eval_losses):
                writer.writerow([step, repr(value)])
    click.echo(
        f"trained on {len(train_set)} events, best test loss "
        f"{history.best_eval_loss:.6f} at step {history.best_step}"
        f"{' (early stop)' if history.stopped_early else ''}; model -> {out}"
    )


SLOT_CATEGORIES = ("modifier", "identity", "behavior", "modifier", "identity")


@head_group.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--split", default="validation", show_default=True)
@click.option("--predictions-out", type=click.Path(dir_okay=False), default=None,
              help="Write per-event 15-dim predictions as JSONL.")
@click.option("--csv", "as_csv", is_flag=True)
def head_eval(model_path, corpus_path, embeddings, split, predictions_out, as_csv):
    """Per-slot-category MAE/RMSE/correlation of predictions on one split."""
    model = head.load_model(model_path)
    records = [r for r in corpus.read_corpus_jsonl(corpus_path) if r.split == split]
    if not records:
        raise ConfigurationError(f"corpus has no {split!r} events")
    _, vectors = head.read_embeddings_jsonl(embeddings)
    examples = _examples_for_split(records, vectors, split)
    x = np.array([e.embedding for e in examples])
    predictions = head.forward(model, x)

    if predictions_out:
        head.write_embeddings_jsonl(
            predictions_out, head.OUTPUT_DIM,
            [(e.id, predictions[i]) for i, e in enumerate(examples)],
        )

    predicted_records, target_records = [], []
    for record, row in zip(records, predictions):
        for slot in range(5):
            record_id = f"{record.id}:{slot}"
            category = SLOT_CATEGORIES[slot]
            predicted_records.append(
                EpaRecord(record_id, category, tuple(row[3 * slot : 3 * slot + 3]))
            )
            target_records.append(
                EpaRecord(record_id, category, record.targets[3 * slot : 3 * slot + 3])
            )
    report = metrics.model_eval(predicted_records, target_records)
    if as_csv:
        click.echo(metrics.comparison_to_csv(report), nl=False)
    else:
        click.echo(metrics.render_comparison(report, title=f"{split} split"), nl=False)


@head_group.command("gradcheck")
@click.option("--seed", type=int, required=True)
@click.option("--dim", type=int, default=12, show_default=True)
@click.option("--hidden", type=int, default=8, show_default=True)
@click.option("--trials", type=int, default=20, show_default=True)
def head_gradcheck(seed, dim, hidden, trials):
    """Finite-difference check of the analytic gradients."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    total_excluded = 0
    for trial in range(trials):
        model = head.HeadModel.initialize(input_dim=dim, hidden_dim=hidden, seed=seed + trial)
        x = rng.uniform(-2, 2, dim)
        y = rng.uniform(-3, 3, head.OUTPUT_DIM)
        error, excluded = head.gradient_check(model, x, y)
        worst = max(worst, error)
        total_excluded += len(excluded)
    click.echo(
        f"max relative error {worst:.3e} over {trials} trials "
        f"({total_excluded} kink coordinates excluded)"
    )
    if worst >= 1e-4:
        raise ConfigurationError("gradient check failed: max relative error >= 1e-4")


# ---------------------------------------------------------------------------
# expand


@cli.command("expand")
@click.option("--term", required=True)
@click.option("--category", type=click.Choice(["identity", "behavior", "modifier"]), required=True)
@click.option("--n", "n_events", type=int, default=expand.DEFAULT_EVENTS_PER_CONCEPT, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--lexicon", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--coeffs", type=click.Path(), default=None)
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--events-out", type=click.Path(dir_okay=False), default=None,
              help="Write the pinned events as corpus JSONL (for the embedding exporter).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Append the estimate to an expanded-lexicon CSV.")
@click.option("--clamp", is_flag=True, help="Clip the point estimate into the lexicon range.")
@click.option("--k", "k_clusters", type=int, default=clustering.DEFAULT_CLUSTERS, show_default=True)
@click.option("--object-slot", is_flag=True, help="Estimate identities from the object slot.")
def expand_command(term, category, n_events, seed, lexicon, coeffs, model_path,
                   embeddings, events_out, out, clamp, k_clusters, object_slot):
    """Estimate one concept from pinned events.

    Without --embeddings this only writes the pinned events (use --events-out),
    so an embedding exporter can vectorize them; rerun with --embeddings to
    finish the estimate.
    """
    lex = _load_lexicon(lexicon)
    coefficient_set = _load_coefficients(coeffs)
    clusters = clustering.cluster_lexicon(lex, k=k_clusters, seed=seed)
    sampler = corpus.MabmoSampler(lex, clusters, coefficient_set, seed=seed)

    if events_out:
        events = sampler.sample_pinned(term, category, n_events, seed=seed)
        records = [corpus.record_from_event(e, i, "estimate") for i, e in enumerate(events)]
        corpus.write_corpus_jsonl(records, events_out)
        click.echo(f"wrote {len(records)} pinned events -> {events_out}")

    if embeddings is None:
        if not events_out:
            raise DependencyError(
                "no --embeddings given; pass --events-out to export events for embedding"
            )
        return

    if model_path is None:
        raise DependencyError("--model is required to estimate")
    model = head.load_model(model_path)
    dim, vectors = head.read_embeddings_jsonl(embeddings)
    provider = expand.PrecomputedEmbeddings(dim, vectors)
    distribution = expand.pin_and_estimate(
        term, category, sampler, model, provider,
        n_events=n_events, seed=seed, object_slot=object_slot,
    )
    click.echo(f"{term} ({category}), {distribution.n_events} events, model {distribution.model_id}")
    click.echo(f"{'':<20} {'E':>8} {'P':>8} {'A':>8}")
    for label, e, p, a in distribution.summary_rows():
        click.echo(f"{label:<20} {e:>8.3f} {p:>8.3f} {a:>8.3f}")
    if out:
        expand.write_expanded_csv([distribution], out, clamp=clamp)
        click.echo(f"estimate -> {out}")


# ---------------------------------------------------------------------------
# simulate


@cli.group("simulate")
def simulate_group():
    """Sequential event simulation."""


def _read_script(path) -> tuple[PartySpec, PartySpec, list[ScriptEvent]]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        actor = PartySpec(raw["actor"]["identity"], raw["actor"].get("modifier"))
        obj = PartySpec(raw["object"]["identity"], raw["object"].get("modifier"))
        events = [ScriptEvent(e["side"], e["behavior"]) for e in raw["events"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad script file {path}: {exc}") from None
    return actor, obj, events


@simulate_group.command("run")
@click.option("--script", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--lexicon", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--coeffs", type=click.Path(), default=None)
@click.option("--json", "as_json", is_flag=True, help="Emit the exact trajectory as JSON.")
def simulate_run(script, lexicon, coeffs, as_json):
    """Run a scripted interaction and print per-step transients and deflection."""
    lex = _load_lexicon(lexicon)
    coefficient_set = _load_coefficients(coeffs)
    actor, obj, events = _read_script(script)
    state = run_script(actor, obj, events, lex, coefficient_set)

    if as_json:
        payload = {
            "actor": {"identity": actor.identity, "modifier": actor.modifier},
            "object": {"identity": obj.identity, "modifier": obj.modifier},
            "fundamentals": {
                "actor": [state.actor_fundamental.e, state.actor_fundamental.p, state.actor_fundamental.a],
                "object": [state.object_fundamental.e, state.object_fundamental.p, state.object_fundamental.a],
            },
            "steps": [
                {
                    "index": step.index,
                    "side": step.side,
                    "behavior": step.behavior_term,
                    "behavior_epa": [step.behavior_epa.e, step.behavior_epa.p, step.behavior_epa.a],
                    "behavior_transient": [
                        step.behavior_transient.e, step.behavior_transient.p, step.behavior_transient.a,
                    ],
                    "actor_transient": [
                        step.actor_transient.e, step.actor_transient.p, step.actor_transient.a,
                    ],
                    "object_transient": [
                        step.object_transient.e, step.object_transient.p, step.object_transient.a,
                    ],
                    "deflection": step.deflection,
                }
                for step in state.history
            ],
        }
        click.echo(json.dumps(payload, separators=(",", ":")))
        return

    def fmt(vector):
        return f"({vector.e:+.3f}, {vector.p:+.3f}, {vector.a:+.3f})"

    click.echo(f"actor   {actor.identity}{' + ' + actor.modifier if actor.modifier else ''}: "
               f"fundamentals {fmt(state.actor_fundamental)}")
    click.echo(f"object  {obj.identity}{' + ' + obj.modifier if obj.modifier else ''}: "
               f"fundamentals {fmt(state.object_fundamental)}")
    click.echo(f"{'step':<5}{'side':<8}{'behavior':<14}{'actor transient':<26}"
               f"{'object transient':<26}{'deflection':>10}")
    for step in state.history:
        click.echo(
            f"{step.index:<5}{step.side:<8}{step.behavior_term:<14}"
            f"{fmt(step.actor_transient):<26}{fmt(step.object_transient):<26}"
            f"{step.deflection:>10.4f}"
        )


# ---------------------------------------------------------------------------
# serve


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
@click.option("--lexicon", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--coeffs", type=click.Path(exists=True, dir_okay=False), multiple=True,
              help="Extra coefficient TSVs (repeatable); named by file stem.")
@click.option("--default-coeffs", default=None,
              help="Coefficient set new sessions use (default: synthetic).")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--state-dir", type=click.Path(file_okay=False), default=None)
def serve_command(host, port, lexicon, coeffs, default_coeffs, model_path, embeddings, state_dir):
    """Start the HTTP/JSON service."""
    from .service import serve

    resources = load_resources(
        lexicon_path=_resolve(lexicon, "lexicon"),
        coefficient_paths={Path(p).stem: p for p in coeffs},
        default_coefficients=default_coeffs,
        model_path=model_path,
        embeddings_path=embeddings,
    )
    serve(resources, host=host, port=port, state_dir=state_dir)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="affectkit", standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except AffectkitError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
