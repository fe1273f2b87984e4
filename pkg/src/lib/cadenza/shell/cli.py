"""
cadenza - Command-line surface.

Stages communicate through files: MIDI, token text, checkpoints and
JSON-line logs. Every command that writes an output also writes the
resolved run configuration as `<output>.config.yaml`. Library errors are
reported on stderr with exit status 1.
"""

import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import click

from ..composer.generate import DecodeMode, vary
from ..composer.train import load_composer, prepare_sequences, train_composer
from ..core.errors import CadenzaError, ConfigurationError, CorpusError
from ..core.note_event import Score
from ..core.run_log import RunEventType, RunLog
from ..corpus.files import load_corpus, scan_directory, write_manifest
from ..corpus.segment import segment
from ..corpus.split import split
from ..corpus.synth import NEUTRAL, STYLE_A, STYLE_B, synth_corpus
from ..io.midi_file import load_midi, write_midi
from ..io.token_text import format_tokens, format_vocabulary, read_tokens
from ..metrics.expression import histogram_divergence, pooled_histograms
from ..metrics.report import FidelityRow, format_fidelity_table, format_similarity_table
from ..metrics.similarity import corpus_similarity
from ..numerics.checkpoint import Checkpoint
from ..numerics.rng import derive_seed
from ..performer.infill import FillMode, perform_score
from ..performer.train import load_performer, prepare_examples, train_performer
from ..tokenizer.bench import bench_variants, benchmark, format_bench_table
from ..tokenizer.pertok import PerTok
from .run_config import RunConfig, load_run_config

logger = logging.getLogger(__name__)

STYLES = {"A": STYLE_A, "B": STYLE_B, "neutral": NEUTRAL}


def setup_logging(verbose: bool = False) -> None:
    """INFO (DEBUG with -v) records on stderr; stdout carries command output."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def write_atomic(path: Union[str, Path], data: Union[str, bytes]) -> Path:
    """Write through a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(handle, "wb") as stream:
            stream.write(data.encode("utf-8") if isinstance(data, str) else data)
        os.replace(temp_name, path)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise
    return path


class CadenzaGroup(click.Group):
    """Click group that turns library errors into exit status 1."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except CadenzaError as exc:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {exc}", err=True)
            ctx.exit(1)


def _run_config(ctx: click.Context) -> RunConfig:
    return ctx.obj["config"]


def echo_config(ctx: click.Context, output: Union[str, Path], **arguments: Any) -> Path:
    """Write `<output>.config.yaml` with the resolved config and the invocation."""
    command = {"name": ctx.info_name,
               "arguments": {key: str(value) if isinstance(value, Path) else value
                             for key, value in arguments.items()}}
    resolved = _run_config(ctx).replace(command=command)
    return write_atomic(f"{output}.config.yaml", resolved.to_yaml())


def load_segments(corpus_dir: Path, bars: int) -> List[Score]:
    """Every MIDI file under a directory, cut into windows of `bars` bars."""
    scores = load_corpus(scan_directory(corpus_dir))
    segments = [window for score in scores.values() for window in segment(score, bars)]
    if not segments:
        raise CorpusError(f"no notes found in MIDI files under {corpus_dir}")
    logger.info("Loaded %d segments from %d files", len(segments), len(scores))
    return segments


def load_scores(path: Path) -> Dict[str, Score]:
    """A single MIDI file, or every MIDI file of a directory keyed by relative path."""
    if path.is_dir():
        return {str(p.relative_to(path)): s for p, s in load_corpus(scan_directory(path)).items()}
    return {path.name: load_midi(path)}


def emit_records(records: Sequence[Dict[str, Any]], event_type: RunEventType,
                 records_path: Optional[Path]) -> None:
    """Write JSON-line records to a file, or to stdout after the table."""
    run_log = RunLog(records_path)
    for record in records:
        run_log.log(event_type, **record)
    if records_path is None:
        for event in run_log.events:
            click.echo(event.to_json())


@click.group(cls=CadenzaGroup)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="YAML run configuration (schema_version 1)")
@click.option("--seed", type=int, default=None, help="Run seed; overrides the config file")
@click.option("--verbose", "-v", is_flag=True, help="Enable debug logging")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[Path], seed: Optional[int], verbose: bool) -> None:
    """Cadenza: PerTok tokenization, composition and performance models."""
    setup_logging(verbose)
    config = load_run_config(config_path)
    if seed is not None:
        config = config.replace(seed=seed)
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@cli.command()
@click.argument("midi_in", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("tokens_out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--no-performance", is_flag=True, help="Drop Velocity/MicroShift tokens")
@click.pass_context
def tokenize(ctx: click.Context, midi_in: Path, tokens_out: Path, no_performance: bool) -> None:
    """Encode a MIDI file as token text."""
    tokenizer = PerTok(_run_config(ctx).tokenizer)
    tokens = tokenizer.encode(load_midi(midi_in))
    if no_performance:
        tokens = tokenizer.strip_performance(tokens)
    write_atomic(tokens_out, format_tokens(tokens))
    echo_config(ctx, tokens_out, midi_in=midi_in, no_performance=no_performance)
    logger.info("Wrote %d tokens to %s", len(tokens), tokens_out)


@cli.command()
@click.argument("tokens_in", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("midi_out", type=click.Path(dir_okay=False, path_type=Path))
@click.pass_context
def detokenize(ctx: click.Context, tokens_in: Path, midi_out: Path) -> None:
    """Decode token text to a MIDI file."""
    score = PerTok(_run_config(ctx).tokenizer).decode(read_tokens(tokens_in))
    write_atomic(midi_out, write_midi(score))
    echo_config(ctx, midi_out, tokens_in=tokens_in)


@cli.command()
@click.argument("vocab_out", type=click.Path(dir_okay=False, path_type=Path), required=False)
@click.pass_context
def vocab(ctx: click.Context, vocab_out: Optional[Path]) -> None:
    """Export the vocabulary as `id<TAB>Kind_value` lines (stdout without a path)."""
    text = format_vocabulary(PerTok(_run_config(ctx).tokenizer).vocabulary)
    if vocab_out is None:
        click.echo(text, nl=False)
        return
    write_atomic(vocab_out, text)
    echo_config(ctx, vocab_out)


@cli.command()
@click.argument("corpus_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--bars", type=int, default=4, show_default=True, help="Segment length in bars")
@click.option("--records", type=click.Path(dir_okay=False, path_type=Path), help="JSON-lines output")
@click.pass_context
def bench(ctx: click.Context, corpus_dir: Path, bars: int, records: Optional[Path]) -> None:
    """Vocabulary size and mean sequence length of the PerTok variants."""
    corpus = load_segments(corpus_dir, bars)
    rows = benchmark(corpus, bench_variants(_run_config(ctx).tokenizer))
    click.echo(format_bench_table(rows), nl=False)
    emit_records([row.to_dict() for row in rows], RunEventType.BENCH_ROW, records)
    if records is not None:
        echo_config(ctx, records, corpus_dir=corpus_dir, bars=bars)


def _train_options(func):
    func = click.option("--progress", is_flag=True, help="Show a progress bar")(func)
    func = click.option("--resume", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                        help="Continue from a checkpoint")(func)
    func = click.option("--steps", type=int, default=None, help="Override training.steps")(func)
    func = click.option("--bars", type=int, default=4, show_default=True, help="Segment length in bars")(func)
    func = click.argument("checkpoint_out", type=click.Path(dir_okay=False, path_type=Path))(func)
    return click.argument("corpus_dir", type=click.Path(file_okay=False, path_type=Path))(func)


@cli.command("train-composer")
@_train_options
@click.pass_context
def train_composer_command(ctx: click.Context, corpus_dir: Path, checkpoint_out: Path, bars: int,
                           steps: Optional[int], resume: Optional[Path], progress: bool) -> None:
    """Train the composer VAE on score tokens of a MIDI corpus."""
    ctx.obj["config"] = _run_config(ctx).with_section("training", steps=steps)
    config = _run_config(ctx)
    tokenizer = PerTok(config.tokenizer)
    sequences = prepare_sequences(load_segments(corpus_dir, bars), tokenizer, config.composer.max_seq_len)
    checkpoint = train_composer(
        sequences, config.composer, config.training, tokenizer, config.seed,
        run_log=RunLog(f"{checkpoint_out}.log.jsonl", append=resume is not None),
        checkpoint_dir=checkpoint_out.parent,
        resume=Checkpoint.load(resume) if resume else None, progress=progress)
    checkpoint.save(checkpoint_out)
    echo_config(ctx, checkpoint_out, corpus_dir=corpus_dir, bars=bars, resume=resume)
    click.echo(str(checkpoint_out))


@cli.command("train-performer")
@_train_options
@click.pass_context
def train_performer_command(ctx: click.Context, corpus_dir: Path, checkpoint_out: Path, bars: int,
                            steps: Optional[int], resume: Optional[Path], progress: bool) -> None:
    """Train the performer on an expressive MIDI corpus."""
    ctx.obj["config"] = _run_config(ctx).with_section("training", steps=steps)
    config = _run_config(ctx)
    tokenizer = PerTok(config.tokenizer)
    sequences = prepare_examples(load_segments(corpus_dir, bars), tokenizer, config.performer.max_seq_len)
    checkpoint = train_performer(
        sequences, config.performer, config.training, tokenizer, config.seed,
        run_log=RunLog(f"{checkpoint_out}.log.jsonl", append=resume is not None),
        checkpoint_dir=checkpoint_out.parent,
        resume=Checkpoint.load(resume) if resume else None, progress=progress)
    checkpoint.save(checkpoint_out)
    echo_config(ctx, checkpoint_out, corpus_dir=corpus_dir, bars=bars, resume=resume)
    click.echo(str(checkpoint_out))


@cli.command("vary")
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("midi_out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--input", "midi_in", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Score to vary")
@click.option("--unconditional", is_flag=True, help="Draw the latent from N(0, I) instead")
@click.option("--mode", type=click.Choice([m.value for m in DecodeMode]), default="greedy", show_default=True)
@click.option("--temperature", type=float, default=1.0, show_default=True)
@click.option("--top-p", type=float, default=0.9, show_default=True)
@click.pass_context
def vary_command(ctx: click.Context, checkpoint: Path, midi_out: Path, midi_in: Optional[Path],
                 unconditional: bool, mode: str, temperature: float, top_p: float) -> None:
    """Generate a variation of a score (or an unconditional score) with a composer."""
    if midi_in is None and not unconditional:
        raise click.UsageError("give --input or --unconditional")
    model, tokenizer = load_composer(Checkpoint.load(checkpoint))
    score = load_midi(midi_in) if midi_in is not None else None
    result = vary(model, tokenizer, score, DecodeMode(mode), _run_config(ctx).seed,
                  unconditional, temperature, top_p)
    write_atomic(midi_out, write_midi(result))
    echo_config(ctx, midi_out, checkpoint=checkpoint, midi_in=midi_in, unconditional=unconditional,
                mode=mode, temperature=temperature, top_p=top_p)


@cli.command()
@click.argument("midi_in", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("midi_out", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--mode", type=click.Choice([m.value for m in FillMode]), default="greedy", show_default=True)
@click.option("--temperature", type=float, default=1.0, show_default=True)
@click.pass_context
def perform(ctx: click.Context, midi_in: Path, checkpoint: Path, midi_out: Path,
            mode: str, temperature: float) -> None:
    """Add velocity and microtiming to a score with a performer."""
    model, tokenizer = load_performer(Checkpoint.load(checkpoint))
    result = perform_score(load_midi(midi_in), model, tokenizer, FillMode(mode),
                           temperature, _run_config(ctx).seed)
    write_atomic(midi_out, write_midi(result))
    echo_config(ctx, midi_out, midi_in=midi_in, checkpoint=checkpoint, mode=mode, temperature=temperature)


def _paired(generated: Dict[str, Score], reference: Dict[str, Score]) -> Tuple[List[Score], List[Score]]:
    if len(generated) == 1 and len(reference) == 1:
        return list(generated.values()), list(reference.values())
    missing = sorted(set(generated) - set(reference))
    if missing:
        raise CorpusError(f"no reference for {', '.join(missing)}")
    names = sorted(generated)
    return [generated[n] for n in names], [reference[n] for n in names]


@cli.command()
@click.argument("generated", type=click.Path(exists=True, path_type=Path))
@click.argument("reference", type=click.Path(exists=True, path_type=Path))
@click.option("--kind", type=click.Choice(["similarity", "fidelity"]), default="similarity", show_default=True)
@click.option("--records", type=click.Path(dir_okay=False, path_type=Path), help="JSON-lines output")
@click.pass_context
def metrics(ctx: click.Context, generated: Path, reference: Path, kind: str, records: Optional[Path]) -> None:
    """
    Compare generated MIDI with references.

    similarity pairs files by relative path and reports per-file and pooled
    attribute similarity; fidelity compares pooled velocity/microtiming
    histograms.
    """
    gen_scores = load_scores(generated)
    ref_scores = load_scores(reference)
    if not gen_scores or not ref_scores:
        raise CorpusError("no MIDI files to compare")
    if kind == "similarity":
        reports = {generated.name: corpus_similarity(*_paired(gen_scores, ref_scores))}
        click.echo(format_similarity_table(reports), nl=False)
        emit_records([{"model": name, **report.to_dict()} for name, report in reports.items()],
                     RunEventType.SIMILARITY, records)
        if records is not None:
            echo_config(ctx, records, generated=generated, reference=reference, kind=kind)
        return
    predicted = pooled_histograms(gen_scores.values())
    target = pooled_histograms(ref_scores.values())
    row = FidelityRow(generated.name, "Reference",
                      histogram_divergence(predicted.velocity, target.velocity),
                      histogram_divergence(predicted.microtiming, target.microtiming))
    click.echo(format_fidelity_table([row]), nl=False)
    emit_records([row.to_dict()], RunEventType.FIDELITY, records)
    if records is not None:
        echo_config(ctx, records, generated=generated, reference=reference, kind=kind)


@cli.command("synth-corpus")
@click.argument("out_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--style", type=click.Choice(sorted(STYLES)), default="A", show_default=True)
@click.option("--count", type=int, default=100, show_default=True)
@click.option("--train-ratio", type=float, default=0.9, show_default=True)
@click.pass_context
def synth_corpus_command(ctx: click.Context, out_dir: Path, style: str, count: int, train_ratio: float) -> None:
    """Write a synthetic style corpus as MIDI files plus a split manifest."""
    if count < 1:
        raise ConfigurationError("--count must be positive")
    seed = _run_config(ctx).seed
    spec = STYLES[style].replace(seed=derive_seed(seed, "style", style) % 2**32)
    names = []
    for index, score in enumerate(synth_corpus(spec, count)):
        name = f"{style}-{index:05d}.mid"
        write_atomic(out_dir / name, write_midi(score))
        names.append(name)
    train, test = split(names, train_ratio, seed)
    manifest = out_dir / "manifest.tsv"
    entries = sorted([(n, "train") for n in train] + [(n, "test") for n in test])
    write_manifest(manifest, entries)
    echo_config(ctx, manifest, out_dir=out_dir, style=style, count=count, train_ratio=train_ratio)
    logger.info("Wrote %d %s scores to %s", count, style, out_dir)


def main() -> None:
    cli(obj={})
