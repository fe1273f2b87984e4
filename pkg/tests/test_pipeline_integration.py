"""
Pipeline integration tests: MIDI files through tokenization, training,
generation, performance and metrics, via the library and the CLI.
"""

import json

import pytest
import yaml
from click.testing import CliRunner

from cadenza.composer import prepare_sequences, train_composer
from cadenza.core.run_log import RunLog
from cadenza.corpus import STYLE_A, segment, synth_corpus
from cadenza.io.midi_file import load_midi, parse_midi, save_midi, write_midi
from cadenza.metrics import corpus_similarity
from cadenza.numerics.checkpoint import Checkpoint
from cadenza.shell.cli import cli
from cadenza.tokenizer import PerTok, TokenizerConfig

from factories import make_score, score_config, short_training, tiny_composer

pytestmark = pytest.mark.integration

TINY_RUN = {
    "schema_version": 1,
    "seed": 3,
    "tokenizer": {"grids": [120], "max_timeshift_ticks": 480, "pitch_min": 60, "pitch_max": 63,
                  "velocity_buckets": 4, "microshift_buckets": 3, "max_microshift_ticks": 30},
    "composer": {"layers": 1, "heads": 2, "hidden_d": 8, "latent_dz": 4, "max_seq_len": 32, "ff_mult": 2,
                 "dropout": 0.0, "beta_warmup_steps": 0, "beta_ramp_steps": 0, "beta_cycle_steps": 0},
    "performer": {"layers": 1, "heads": 2, "hidden_d": 8, "max_seq_len": 48, "ff_mult": 2, "dropout": 0.0},
    "training": {"steps": 3, "batch_size": 2, "lr": 0.001, "log_every": 1},
}


def bar_melody(pitches, velocity=90):
    """One bar, four 16ths at the start of each beat."""
    notes = [(p, i * 480, 120, velocity) for i, p in enumerate(pitches)]
    return make_score(notes, length=1920)


@pytest.fixture
def corpus_dir(tmp_path):
    folder = tmp_path / "corpus"
    for index, pitches in enumerate([(60, 61, 62, 63), (63, 62, 61, 60), (60, 62, 60, 62)]):
        save_midi(bar_melody(pitches, velocity=70 + 10 * index), folder / f"m{index}.mid")
    return folder


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY_RUN))
    return path


class TestSynthCorpusRoundTrip:
    """Tokenizer fidelity on the synthetic style corpus."""

    def test_encode_decode(self):
        tokenizer = PerTok(TokenizerConfig())
        for score in synth_corpus(STYLE_A, 5):
            for window in segment(score):
                decoded = tokenizer.decode(tokenizer.encode(window))
                assert decoded.pitches() == window.pitches()
                for before, after in zip(window.notes, decoded.notes):
                    assert abs(before.onset_ticks - after.onset_ticks) <= 1
                    assert abs(before.velocity - after.velocity) <= 2

    def test_midi_round_trip(self):
        for score in synth_corpus(STYLE_A, 3):
            assert parse_midi(write_midi(score)) == score

    def test_self_similarity(self):
        corpus = synth_corpus(STYLE_A, 4)
        report = corpus_similarity(corpus, corpus)
        assert all(value == 100.0 for value in report.per_file.values())
        assert all(value == 100.0 for value in report.pooled.values())


class TestCommandLinePipeline:
    """Train, generate and perform through the CLI."""

    def test_composer_flow(self, tmp_path, corpus_dir, run_config):
        runner = CliRunner()
        checkpoint = tmp_path / "models" / "composer.ckpt"
        result = runner.invoke(cli, ["--config", str(run_config), "train-composer", str(corpus_dir),
                                     str(checkpoint), "--bars", "1"])
        assert result.exit_code == 0, result.output
        assert Checkpoint.load(checkpoint).step == 3

        curves = [json.loads(line) for line in (tmp_path / "models" / "composer.ckpt.log.jsonl").read_text().splitlines()]
        steps = [r for r in curves if r["event"] == "train_step"]
        assert [r["step"] for r in steps] == [1, 2, 3]
        assert {"recon", "kl", "beta", "loss"} <= set(steps[0])

        variation = tmp_path / "variation.mid"
        result = runner.invoke(cli, ["--config", str(run_config), "vary", str(checkpoint), str(variation),
                                     "--input", str(corpus_dir / "m0.mid")])
        assert result.exit_code == 0, result.output
        assert load_midi(variation).is_valid()

        prior = tmp_path / "prior.mid"
        result = runner.invoke(cli, ["--config", str(run_config), "vary", str(checkpoint), str(prior),
                                     "--unconditional", "--mode", "sample", "--top-p", "0.5"])
        assert result.exit_code == 0, result.output
        assert yaml.safe_load((tmp_path / "prior.mid.config.yaml").read_text())["command"]["name"] == "vary"

    def test_composer_resume(self, tmp_path, corpus_dir, run_config):
        runner = CliRunner()
        straight = tmp_path / "straight.ckpt"
        first = tmp_path / "first.ckpt"
        resumed = tmp_path / "resumed.ckpt"
        base = ["--config", str(run_config), "train-composer", str(corpus_dir)]
        assert runner.invoke(cli, base + [str(straight), "--bars", "1", "--steps", "4"]).exit_code == 0
        assert runner.invoke(cli, base + [str(first), "--bars", "1", "--steps", "2"]).exit_code == 0
        result = runner.invoke(cli, base + [str(resumed), "--bars", "1", "--steps", "4", "--resume", str(first)])
        assert result.exit_code == 0, result.output

        a, b = Checkpoint.load(straight), Checkpoint.load(resumed)
        assert a.step == b.step == 4
        assert a.tensors.keys() == b.tensors.keys()
        for name in a.tensors:
            assert (a.tensors[name] == b.tensors[name]).all(), name

    def test_performer_flow(self, tmp_path, corpus_dir, run_config):
        runner = CliRunner()
        checkpoint = tmp_path / "performer.ckpt"
        result = runner.invoke(cli, ["--config", str(run_config), "train-performer", str(corpus_dir),
                                     str(checkpoint), "--bars", "1"])
        assert result.exit_code == 0, result.output

        score = save_midi(bar_melody((61, 60, 63, 62)), tmp_path / "score.mid")
        performed = tmp_path / "performed.mid"
        result = runner.invoke(cli, ["--config", str(run_config), "perform", str(score), str(checkpoint),
                                     str(performed)])
        assert result.exit_code == 0, result.output
        rendition = load_midi(performed)
        assert rendition.pitches() == [61, 60, 63, 62]
        assert {n.velocity for n in rendition.notes} <= {16, 47, 79, 111}

        result = runner.invoke(cli, ["metrics", "--kind", "fidelity", str(performed), str(corpus_dir)])
        assert result.exit_code == 0, result.output
        assert "Microtiming" in result.output

    def test_wrong_checkpoint_kind(self, tmp_path, corpus_dir, run_config):
        runner = CliRunner()
        checkpoint = tmp_path / "composer.ckpt"
        runner.invoke(cli, ["--config", str(run_config), "train-composer", str(corpus_dir),
                            str(checkpoint), "--bars", "1"])
        result = runner.invoke(cli, ["perform", str(corpus_dir / "m0.mid"), str(checkpoint),
                                     str(tmp_path / "out.mid")])
        assert result.exit_code == 1
        assert "performer" in result.output


class TestRunLogStreaming:
    """Curves are readable while a run is in progress."""

    def test_records_streamed(self, tmp_path):
        tokenizer = PerTok(score_config())
        sequences = prepare_sequences([bar_melody((60, 61, 62, 63))], tokenizer, 32)
        path = tmp_path / "run.jsonl"
        seen = []
        run_log = RunLog(path)
        run_log.add_callback(lambda event: seen.append(len(path.read_text().splitlines())))
        train_composer(sequences, tiny_composer(), short_training(), tokenizer, run_log=run_log)
        assert seen == [1, 2, 3]
