"""
Unit tests for the composer VAE.

Tests cover:
- Free-bits KL and the KL weight schedule
- Encoder pooling, reparameterization and in-attention decoding
- Loss terms and gradients
- Grammar-constrained generation
- Training determinism, resume and checkpoint loading
- Ablation presets
"""

import math

import pytest
import torch

from cadenza.composer import (
    ABLATION_PRESETS,
    Composer,
    ComposerConfig,
    DecodeMode,
    beta_schedule,
    build_composer,
    composer_loss,
    encode_score_latent,
    generate,
    kl_free_bits,
    kl_per_dim,
    load_composer,
    prepare_sequences,
    preset_config,
    reconstruction_accuracy,
    reconstruction_nll,
    sample_prior,
    top_p_filter,
    train_composer,
    vary,
)
from cadenza.core.errors import CheckpointError, ConfigurationError, CorpusError, SequenceLengthError
from cadenza.core.note_event import Score
from cadenza.core.run_log import RunEventType, RunLog
from cadenza.core.token import TokenKind
from cadenza.numerics import Checkpoint, module_gradient_check

from factories import melody, score_config, short_training, tiny_composer

IDS = torch.tensor([[1, 4, 12, 8, 6, 13, 2]])


def double_model(seed: int = 0, **changes) -> Composer:
    torch.manual_seed(seed)
    return Composer(tiny_composer(vocab_size=16, **changes)).double().eval()


def two_melodies():
    return [melody(), melody(pitches=(63, 62, 61, 60, 60, 61))]


@pytest.mark.unit
class TestKL:
    """Test KL terms."""

    def test_prior_matches_posterior(self):
        assert float(kl_free_bits(torch.zeros(16), torch.zeros(16), 0.0)) == 0.0

    def test_free_bits_floor(self):
        assert float(kl_free_bits(torch.zeros(128), torch.zeros(128), 0.15)) == pytest.approx(19.2, rel=1e-6)

    def test_unit_mean_shift(self):
        assert torch.allclose(kl_per_dim(torch.ones(3), torch.zeros(3)), torch.full((3,), 0.5))

    def test_batch_average(self):
        mu = torch.tensor([[1.0, 0.0], [0.0, 0.0]])
        assert float(kl_free_bits(mu, torch.zeros(2, 2), 0.0)) == pytest.approx(0.25)


@pytest.mark.unit
class TestBetaSchedule:
    """Test the cyclical KL weight."""

    def test_warmup_is_zero(self):
        assert beta_schedule(0, 1.0) == 0.0
        assert beta_schedule(24999, 1.0) == 0.0

    def test_cycle_peak_after_ramp(self):
        assert beta_schedule(55000, 0.3) == pytest.approx(0.3)

    def test_cycle_trough(self):
        for step in (30000, 50000, 90000):
            assert beta_schedule(step, 1.0) == pytest.approx(0.0)

    def test_ramp_midpoint(self):
        # envelope 0.5, cycle phase 0.75 -> 0.5
        assert beta_schedule(37500, 1.0) == pytest.approx(0.25)

    def test_without_cycle(self):
        assert beta_schedule(10, 0.8, warmup_steps=0, ramp_steps=0, cycle_steps=0) == 0.8

    def test_config_schedule(self):
        config = tiny_composer(beta_max=1.0, beta_warmup_steps=2, beta_ramp_steps=2, beta_cycle_steps=0)
        assert [config.beta_at(s) for s in range(5)] == [0.0, 0.0, 0.0, 0.5, 1.0]


@pytest.mark.unit
class TestComposerConfig:
    """Test composer configuration checks."""

    def test_heads_must_divide_width(self):
        with pytest.raises(ConfigurationError):
            ComposerConfig(hidden_d=10, heads=4)

    def test_latent_not_wider_than_hidden(self):
        with pytest.raises(ConfigurationError):
            ComposerConfig(hidden_d=16, heads=2, latent_dz=32)

    def test_with_vocabulary(self):
        config = tiny_composer().with_vocabulary(16)
        assert config.vocab_size == 16
        assert config.with_vocabulary(16) == config
        with pytest.raises(ConfigurationError):
            config.with_vocabulary(20)

    def test_model_needs_vocabulary(self):
        with pytest.raises(ConfigurationError):
            Composer(tiny_composer())


@pytest.mark.unit
class TestEncoder:
    """Test pooling and reparameterization."""

    def test_single_token(self):
        h = double_model().encode_latent(torch.tensor([1]))
        assert h.shape == (1, 8)
        assert torch.isfinite(h).all()

    def test_later_tokens_reach_position_zero(self):
        model = double_model()
        other = IDS.clone()
        other[0, 5] = 14
        assert not torch.allclose(model.encode_latent(IDS), model.encode_latent(other), atol=1e-6)

    def test_position_sensitive(self):
        model = double_model()
        swapped = IDS.clone()
        swapped[0, 1], swapped[0, 4] = IDS[0, 4], IDS[0, 1]
        assert not torch.allclose(model.encode_latent(IDS), model.encode_latent(swapped), atol=1e-6)

    def test_too_long(self):
        with pytest.raises(SequenceLengthError):
            double_model().encode_latent(torch.ones(1, 33, dtype=torch.long))

    def test_zero_noise_gives_mean(self):
        model = double_model()
        latent = model.reparameterize(model.encode_latent(IDS))
        assert torch.equal(latent.z, latent.mu)
        assert torch.equal(latent.eps, torch.zeros_like(latent.mu))

    def test_reparameterization_formula(self):
        model = double_model()
        h = model.encode_latent(IDS)
        eps = torch.randn(1, 4, dtype=torch.float64)
        latent = model.reparameterize(h, eps)
        assert torch.allclose(latent.z, latent.mu + torch.exp(0.5 * latent.logvar) * eps)

    def test_sample_moments(self):
        model = double_model()
        h = torch.randn(1, 8, dtype=torch.float64).expand(10000, 8)
        eps = torch.randn(10000, 4, generator=torch.Generator().manual_seed(0), dtype=torch.float64)
        latent = model.reparameterize(h, eps)
        sigma = torch.exp(0.5 * latent.logvar[0])
        assert torch.all((latent.z.mean(dim=0) - latent.mu[0]).abs() < 5 * sigma / 100)
        assert torch.allclose(latent.z.std(dim=0), sigma, rtol=0.05)


@pytest.mark.unit
class TestDecoder:
    """Test in-attention decoding."""

    def test_shape(self):
        logits = double_model().decode_forward(IDS, torch.zeros(4, dtype=torch.float64))
        assert logits.shape == (1, 7, 16)

    def test_latent_reaches_every_position(self):
        model = double_model()
        z = torch.randn(1, 4, dtype=torch.float64)
        change = (model.decode_forward(IDS, z + 1e-3) - model.decode_forward(IDS, z)).abs().amax(dim=-1)
        assert torch.all(change > 0)

    def test_zero_latent_ignores_expansion(self):
        model = double_model()
        z = torch.zeros(1, 4, dtype=torch.float64)
        before = model.decode_forward(IDS, z)
        with torch.no_grad():
            model.w_pre.weight.normal_()
        assert torch.equal(model.decode_forward(IDS, z), before)

    def test_causal(self):
        model = double_model()
        z = torch.randn(1, 4, dtype=torch.float64)
        changed = IDS.clone()
        changed[0, 4:] = 5
        assert torch.allclose(model.decode_forward(IDS, z)[:, :4], model.decode_forward(changed, z)[:, :4],
                              atol=1e-12)

    def test_latent_width_mismatch(self):
        with pytest.raises(ConfigurationError):
            double_model().decode_forward(IDS, torch.zeros(1, 5, dtype=torch.float64))


@pytest.mark.unit
class TestComposerLoss:
    """Test loss terms."""

    def test_beta_zero_is_reconstruction(self):
        model = double_model()
        latent = model.reparameterize(model.encode_latent(IDS))
        loss = composer_loss(model, IDS, latent, 0.0, 0.25)
        assert torch.equal(loss.total, loss.recon)

    def test_total_adds_weighted_kl(self):
        model = double_model()
        latent = model.reparameterize(model.encode_latent(IDS))
        loss = composer_loss(model, IDS, latent, 0.5, 0.1)
        assert float(loss.total) == pytest.approx(float(loss.recon) + 0.5 * float(loss.kl))
        assert float(loss.kl) >= 0.4 - 1e-12

    def test_uniform_logits(self):
        targets = torch.tensor([[3, 7, 9, 15, 4]])
        assert float(reconstruction_nll(torch.zeros(1, 5, 16), targets)) == pytest.approx(math.log(16), rel=1e-6)

    def test_padding_targets_ignored(self):
        logits = torch.randn(1, 4, 16)
        targets = torch.tensor([[3, 7, 0, 0]])
        assert float(reconstruction_nll(logits, targets)) == pytest.approx(
            float(reconstruction_nll(logits[:, :2], targets[:, :2])))

    def test_gradient_matches_finite_differences(self):
        model = double_model(seed=4)
        ids = torch.tensor([[1, 4, 2]])
        eps = torch.randn(1, 4, generator=torch.Generator().manual_seed(1), dtype=torch.float64)

        def loss_fn(m):
            latent = m.reparameterize(m.encode_latent(ids), eps)
            return composer_loss(m, ids, latent, 0.5, 0.0).total

        assert module_gradient_check(model, loss_fn)


@pytest.mark.unit
class TestGeneration:
    """Test grammar-constrained decoding."""

    def test_top_p(self):
        logits = torch.tensor([2.0, 1.0, 0.0, -1.0])
        assert torch.isfinite(top_p_filter(logits, 0.5)).tolist() == [True, False, False, False]
        assert torch.isfinite(top_p_filter(logits, 0.8)).tolist() == [True, True, False, False]
        assert torch.equal(top_p_filter(logits, 1.0), logits)

    def test_greedy_is_deterministic_and_canonical(self, score_tokenizer):
        model = build_composer(tiny_composer(), score_tokenizer, 0).eval()
        z = sample_prior(4, 3)
        first = generate(model, z, score_tokenizer)
        assert first == generate(model, z, score_tokenizer)
        assert first[0].kind == TokenKind.BOS and first[-1].kind == TokenKind.EOS
        assert score_tokenizer.is_canonical(first)
        assert len(first) <= 32
        assert not any(t.kind.is_performance for t in first)

    def test_zero_temperature_matches_greedy(self, score_tokenizer):
        model = build_composer(tiny_composer(), score_tokenizer, 1).eval()
        z = sample_prior(4, 0)
        assert generate(model, z, score_tokenizer, DecodeMode.SAMPLE, temperature=0.0) == \
            generate(model, z, score_tokenizer, DecodeMode.GREEDY)

    def test_sampling_is_seeded(self, score_tokenizer):
        model = build_composer(tiny_composer(), score_tokenizer, 2).eval()
        z = sample_prior(4, 1)
        runs = [generate(model, z, score_tokenizer, DecodeMode.SAMPLE, seed=9, top_p=0.95) for _ in range(2)]
        assert runs[0] == runs[1]
        assert score_tokenizer.is_canonical(runs[0])

    def test_length_limit(self, score_tokenizer):
        model = build_composer(tiny_composer(), score_tokenizer, 0).eval()
        tokens = generate(model, sample_prior(4, 5), score_tokenizer, max_len=4)
        assert len(tokens) <= 4
        assert tokens[-1].kind == TokenKind.EOS

    def test_prior_draws(self):
        assert torch.equal(sample_prior(4, 7), sample_prior(4, 7))
        assert sample_prior(4, 7).dtype == torch.float32
        assert not torch.equal(sample_prior(4, 7), sample_prior(4, 8))

    def test_vary(self, score_tokenizer):
        model = build_composer(tiny_composer(), score_tokenizer, 0).eval()
        assert encode_score_latent(model, score_tokenizer, melody()).shape == (4,)
        variation = vary(model, score_tokenizer, melody())
        assert isinstance(variation, Score)
        assert variation == vary(model, score_tokenizer, melody())
        assert vary(model, score_tokenizer, unconditional=True, seed=2) == \
            vary(model, score_tokenizer, unconditional=True, seed=2)


@pytest.mark.unit
class TestComposerTraining:
    """Test composer training runs."""

    def test_prepare_sequences_skips_long_items(self, score_tokenizer):
        assert prepare_sequences([melody()], score_tokenizer, 20) == [score_tokenizer.encode_ids(melody())]
        assert prepare_sequences([melody()], score_tokenizer, 10) == []

    def test_prepare_sequences_strips_performance(self, performance_tokenizer):
        (ids,) = prepare_sequences([melody()], performance_tokenizer, 64)
        kinds = {performance_tokenizer.vocabulary.kind_of_id(i) for i in ids}
        assert TokenKind.VELOCITY not in kinds and TokenKind.MICRO_SHIFT not in kinds

    def test_same_seed_same_checkpoint(self, score_tokenizer):
        sequences = prepare_sequences(two_melodies(), score_tokenizer, 32)
        first = train_composer(sequences, tiny_composer(), short_training(), score_tokenizer, seed=5)
        second = train_composer(sequences, tiny_composer(), short_training(), score_tokenizer, seed=5)
        assert first.to_bytes() == second.to_bytes()
        assert first.step == 3

    def test_resume(self, score_tokenizer):
        sequences = prepare_sequences(two_melodies(), score_tokenizer, 32)
        halfway = train_composer(sequences, tiny_composer(), short_training(steps=2), score_tokenizer, seed=1)
        resumed = train_composer(sequences, tiny_composer(), short_training(), score_tokenizer, seed=1,
                                 resume=Checkpoint.from_bytes(halfway.to_bytes()))
        straight = train_composer(sequences, tiny_composer(), short_training(), score_tokenizer, seed=1)
        assert resumed.to_bytes() == straight.to_bytes()

    def test_curves_are_logged(self, score_tokenizer):
        run_log = RunLog()
        sequences = prepare_sequences(two_melodies(), score_tokenizer, 32)
        train_composer(sequences, tiny_composer(beta_max=1.0), short_training(), score_tokenizer, run_log=run_log)
        records = run_log.events_of(RunEventType.TRAIN_STEP)
        assert [r["step"] for r in records] == [1, 2, 3]
        assert {"recon", "kl", "beta", "loss"} <= set(records[0].fields)

    def test_empty_corpus(self, score_tokenizer):
        with pytest.raises(CorpusError):
            train_composer([], tiny_composer(), short_training(), score_tokenizer)

    def test_load_round_trip(self, score_tokenizer):
        sequences = prepare_sequences(two_melodies(), score_tokenizer, 32)
        checkpoint = Checkpoint.from_bytes(
            train_composer(sequences, tiny_composer(), short_training(), score_tokenizer).to_bytes())
        model, tokenizer = load_composer(checkpoint)
        assert tokenizer.config == score_config()
        assert model.config.vocab_size == 16
        assert not model.training
        accuracy = reconstruction_accuracy(model, sequences)
        assert 0.0 <= accuracy <= 1.0

    def test_load_rejects_other_kinds(self):
        with pytest.raises(CheckpointError):
            load_composer(Checkpoint({"kind": "performer"}))

    def test_load_rejects_incomplete_header(self):
        with pytest.raises(CheckpointError, match="lacks"):
            load_composer(Checkpoint({"kind": "composer"}))

    def test_load_rejects_vocabulary_mismatch(self):
        header = {"kind": "composer", "tokenizer": score_config().to_dict(),
                  "composer": tiny_composer(vocab_size=20).to_dict()}
        with pytest.raises(CheckpointError, match="vocab_size"):
            load_composer(Checkpoint(header))


@pytest.mark.unit
class TestPresets:
    """Test KL ablation presets."""

    def test_names(self):
        assert list(ABLATION_PRESETS) == ["no-kl", "balanced-kl", "full-kl"]

    def test_preset_values(self):
        config = preset_config("full-kl", tiny_composer())
        assert config.beta_max == 1.0
        assert config.free_bit_lambda == 0.15
        assert config.layers == 1

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError, match="Unknown preset"):
            preset_config("huge-kl", tiny_composer())
