"""
Unit tests for the PerTok tokenizer.

Tests cover:
- Vocabulary construction and id layout
- Multi-grid quantization
- Encoding and decoding
- Grammar violations
- Performance stripping and masking
- Canonical form and round-trip properties
- Benchmark accounting
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cadenza.core.errors import ConfigurationError, CorpusError, DecodeError, EncodeError
from cadenza.core.note_event import NoteEvent, Score
from cadenza.core.token import BOS, EOS, MASK, Token, TokenKind
from cadenza.tokenizer import (
    PerTok,
    PerformanceSlots,
    TokenGrammar,
    TokenizerConfig,
    bench_variants,
    benchmark,
    build_vocabulary,
    decompose_timeshift,
    format_bench_table,
    quantize_onset,
)
from cadenza.tokenizer.vocabulary import microshift_values, velocity_bucket_bounds

from factories import make_score, melody, performance_config, score_config


def tok(kind: TokenKind, value=None) -> Token:
    return Token(kind, value)


def meets_canonical_form(tokens, tokenizer: PerTok, strict_pitches: bool = True) -> bool:
    """
    Greedy TimeShift runs, ascending pitches within a position (strictly by
    default), and every decoded onset non-negative and quantizing back to
    its own position.
    """
    timeshifts = tokenizer.vocabulary.values[TokenKind.TIME_SHIFT]
    position, run, last_pitch = 0, [], None
    for index, token in enumerate(tokens):
        if token.kind == TokenKind.TIME_SHIFT:
            run.append(token.value)
        elif token.kind == TokenKind.PITCH:
            if run:
                if run != decompose_timeshift(sum(run), timeshifts):
                    return False
                position += sum(run)
                run, last_pitch = [], None
            if last_pitch is not None and (token.value < last_pitch or strict_pitches and token.value == last_pitch):
                return False
            last_pitch = token.value
            shift = next((t.value for t in tokens[index + 1:index + 4] if t.kind == TokenKind.MICRO_SHIFT), 0)
            if position + shift < 0 or tokenizer.quantize(position + shift)[0] != position:
                return False
    return True


@pytest.mark.unit
class TestVocabulary:
    """Test vocabulary construction."""

    def test_default_counts(self, default_tokenizer):
        counts = default_tokenizer.vocabulary.counts()
        assert counts[TokenKind.PITCH] == 128
        assert counts[TokenKind.TIME_SHIFT] == 26
        assert counts[TokenKind.VELOCITY] == 32
        assert counts[TokenKind.MICRO_SHIFT] == 31
        assert counts[TokenKind.DURATION] == 24
        assert len(default_tokenizer.vocabulary) == 4 + 128 + 26 + 32 + 31 + 24

    def test_single_grid_timeshifts(self):
        vocabulary = build_vocabulary(TokenizerConfig(grids=(120,), max_timeshift_ticks=1920))
        assert vocabulary.values[TokenKind.TIME_SHIFT] == tuple(range(120, 1921, 120))

    def test_colliding_multiples_are_merged(self):
        values = build_vocabulary(TokenizerConfig()).values[TokenKind.TIME_SHIFT]
        assert len(values) == len(set(values))
        assert 480 in values and 40 in values

    def test_size_identity(self):
        config = performance_config()
        vocabulary = build_vocabulary(config)
        counts = vocabulary.counts()
        expected = (4 + (config.pitch_max - config.pitch_min + 1) + counts[TokenKind.TIME_SHIFT]
                    + config.velocity_buckets + config.microshift_buckets + counts[TokenKind.DURATION])
        assert len(vocabulary) == expected == 23

    def test_duration_toggle_changes_size_by_duration_count(self):
        full = build_vocabulary(TokenizerConfig())
        bare = build_vocabulary(TokenizerConfig(use_duration=False))
        assert len(full) - len(bare) == full.counts()[TokenKind.DURATION]

    def test_ids_are_dense_and_grouped(self, performance_tokenizer):
        vocabulary = performance_tokenizer.vocabulary
        assert vocabulary.pad_id == 0
        assert vocabulary.mask_id == 3
        assert [t.kind for t in vocabulary.tokens[:4]] == [TokenKind.PAD, TokenKind.BOS, TokenKind.EOS, TokenKind.MASK]
        order = [TokenKind.PITCH, TokenKind.TIME_SHIFT, TokenKind.VELOCITY, TokenKind.MICRO_SHIFT, TokenKind.DURATION]
        stops = [vocabulary.kind_ids(kind) for kind in order]
        assert stops[0].start == 4
        for previous, current in zip(stops, stops[1:]):
            assert previous.stop == current.start
        assert stops[-1].stop == len(vocabulary)
        for index, token in enumerate(vocabulary.tokens):
            assert vocabulary.id(token) == index

    def test_velocity_buckets(self):
        assert velocity_bucket_bounds(4) == ((1, 31), (32, 63), (64, 94), (95, 127))
        assert build_vocabulary(performance_config()).values[TokenKind.VELOCITY] == (16, 47, 79, 111)

    def test_microshift_values_include_zero(self):
        assert microshift_values(TokenizerConfig()) == tuple(range(-30, 31, 2))
        assert microshift_values(performance_config()) == (-30, 0, 30)

    def test_size_independent_of_resolution(self):
        base = TokenizerConfig()
        doubled = TokenizerConfig(ticks_per_quarter=960, grids=(240, 320), max_microshift_ticks=60)
        assert len(build_vocabulary(doubled)) == len(build_vocabulary(base))

    def test_unknown_id(self, score_tokenizer):
        with pytest.raises(DecodeError):
            score_tokenizer.vocabulary.token(16)

    @pytest.mark.parametrize("changes", [
        {"grids": ()}, {"grids": (120, 120)}, {"microshift_buckets": 4},
        {"max_microshift_ticks": 60}, {"pitch_min": 70, "pitch_max": 60},
    ])
    def test_invalid_configs(self, changes):
        with pytest.raises(ConfigurationError):
            TokenizerConfig(**changes)


@pytest.mark.unit
class TestQuantize:
    """Test multi-grid quantization."""

    def test_on_grid(self):
        assert quantize_onset(480, TokenizerConfig()) == (480, 0)

    def test_closest_grid_wins(self):
        assert quantize_onset(165, TokenizerConfig()) == (160, 5)

    def test_residual_above_grid(self):
        assert quantize_onset(255, TokenizerConfig()) == (240, 15)

    def test_tie_prefers_finer_grid(self):
        # 140 is 20 from both 120 (16th grid) and 160 (triplet grid)
        assert quantize_onset(140, TokenizerConfig()) == (120, 20)

    def test_residual_bounded(self):
        config = TokenizerConfig()
        for onset in range(0, 2000, 7):
            _, residual = quantize_onset(onset, config)
            assert abs(residual) <= config.min_grid // 2

    def test_decompose_greedy(self):
        values = build_vocabulary(score_config()).values[TokenKind.TIME_SHIFT]
        assert decompose_timeshift(600, values) == [480, 120]
        assert decompose_timeshift(0, values) == []
        with pytest.raises(ValueError):
            decompose_timeshift(100, values)


@pytest.mark.unit
class TestEncode:
    """Test encoding."""

    def test_single_note_all_features(self, default_tokenizer):
        tokens = default_tokenizer.encode(make_score([(60, 0, 480, 100)]))
        assert [t.kind for t in tokens] == [TokenKind.BOS, TokenKind.PITCH, TokenKind.VELOCITY,
                                            TokenKind.MICRO_SHIFT, TokenKind.DURATION, TokenKind.EOS]
        assert tokens[3] == tok(TokenKind.MICRO_SHIFT, 0)
        assert tokens[4] == tok(TokenKind.DURATION, 480)

    def test_melody(self, score_tokenizer):
        tokens = score_tokenizer.encode(melody())
        assert [str(t) for t in tokens] == [
            "BOS", "Pitch_60", "Duration_120", "TimeShift_120", "Pitch_62", "Duration_120",
            "TimeShift_120", "Pitch_63", "Duration_120", "TimeShift_120", "Pitch_61", "Duration_120", "EOS"]

    def test_long_gap_repeats_timeshift(self, score_tokenizer):
        tokens = score_tokenizer.encode(make_score([(60, 0, 120, 90), (61, 600, 120, 90)]))
        shifts = [t.value for t in tokens if t.kind == TokenKind.TIME_SHIFT]
        assert shifts == [480, 120]

    def test_chord_sorted_by_pitch(self, score_tokenizer):
        tokens = score_tokenizer.encode(make_score([(63, 0, 240, 90), (60, 5, 240, 90)]))
        assert [t.value for t in tokens if t.kind == TokenKind.PITCH] == [60, 63]
        assert not any(t.kind == TokenKind.TIME_SHIFT for t in tokens)

    def test_performance_tokens(self, performance_tokenizer):
        tokens = performance_tokenizer.encode(make_score([(60, 140, 240, 100)]))
        assert [str(t) for t in tokens] == [
            "BOS", "TimeShift_120", "Pitch_60", "Velocity_111", "MicroShift_30", "Duration_240", "EOS"]

    def test_microshift_fifteen(self, default_tokenizer):
        tokens = default_tokenizer.encode(make_score([(60, 255, 120, 90)]))
        # 14 and 16 are equally close; ties go toward zero
        assert tok(TokenKind.MICRO_SHIFT, 14) in tokens
        fine = PerTok(TokenizerConfig(microshift_buckets=61))
        assert tok(TokenKind.MICRO_SHIFT, 15) in fine.encode(make_score([(60, 255, 120, 90)]))

    def test_duration_toggle_removes_one_token_per_note(self):
        score = make_score([(60, 0, 120, 90), (64, 0, 240, 80), (67, 500, 120, 70)])
        full = PerTok(TokenizerConfig()).encode(score)
        bare = PerTok(TokenizerConfig(use_duration=False)).encode(score)
        assert len(full) - len(bare) == len(score)

    def test_pitch_out_of_range(self, score_tokenizer):
        with pytest.raises(EncodeError) as info:
            score_tokenizer.encode(make_score([(60, 0, 120, 90), (72, 120, 120, 90)]))
        assert info.value.note_index == 1

    def test_resolution_mismatch(self, default_tokenizer):
        with pytest.raises(EncodeError):
            default_tokenizer.encode(make_score([(60, 0, 96, 90)], tpq=96))


@pytest.mark.unit
class TestDecode:
    """Test decoding and grammar checks."""

    def test_empty_sequence(self, default_tokenizer):
        score = default_tokenizer.decode([BOS, EOS])
        assert len(score) == 0
        assert score.ticks_per_quarter == 480

    def test_performance_values_applied(self, performance_tokenizer):
        tokens = [BOS, tok(TokenKind.TIME_SHIFT, 120), tok(TokenKind.PITCH, 60), tok(TokenKind.VELOCITY, 47),
                  tok(TokenKind.MICRO_SHIFT, -30), tok(TokenKind.DURATION, 240), EOS]
        assert performance_tokenizer.decode(tokens).notes == (NoteEvent(60, 90, 240, 47),)

    def test_missing_performance_uses_defaults(self, performance_tokenizer):
        tokens = [BOS, tok(TokenKind.PITCH, 61), tok(TokenKind.DURATION, 120), EOS]
        note = performance_tokenizer.decode(tokens).notes[0]
        assert note.velocity == performance_tokenizer.config.default_velocity
        assert note.onset_ticks == 0

    def test_trailing_padding(self, score_tokenizer):
        tokens = score_tokenizer.encode(melody()) + [Token(TokenKind.PAD)] * 3
        assert score_tokenizer.decode(tokens) == melody()

    @pytest.mark.parametrize("tokens,index", [
        ([tok(TokenKind.PITCH, 60), EOS], 0),
        ([BOS, tok(TokenKind.DURATION, 120), EOS], 1),
        ([BOS, tok(TokenKind.PITCH, 60), tok(TokenKind.DURATION, 120), tok(TokenKind.VELOCITY, 111), EOS], 3),
        ([BOS, tok(TokenKind.PITCH, 60), tok(TokenKind.MICRO_SHIFT, 0), tok(TokenKind.VELOCITY, 111), EOS], 3),
        ([BOS, tok(TokenKind.TIME_SHIFT, 120), EOS], 2),
        ([BOS, EOS, BOS], 2),
        ([BOS, MASK, EOS], 1),
    ])
    def test_grammar_errors(self, performance_tokenizer, tokens, index):
        with pytest.raises(DecodeError) as info:
            performance_tokenizer.decode(tokens)
        assert info.value.token_index == index

    def test_missing_eos(self, score_tokenizer):
        with pytest.raises(DecodeError) as info:
            score_tokenizer.decode([BOS, tok(TokenKind.PITCH, 60), tok(TokenKind.DURATION, 120)])
        assert info.value.token_index == 3

    def test_token_outside_vocabulary(self, score_tokenizer):
        with pytest.raises(DecodeError) as info:
            score_tokenizer.decode([BOS, tok(TokenKind.PITCH, 90), tok(TokenKind.DURATION, 120), EOS])
        assert info.value.token_index == 1

    def test_decode_ids(self, score_tokenizer):
        ids = score_tokenizer.encode_ids(melody())
        assert ids[0] == 1 and ids[-1] == 2
        assert score_tokenizer.decode_ids(ids) == melody()


@pytest.mark.unit
class TestGrammar:
    """Test the token grammar state machine."""

    def test_required_slots(self):
        grammar = TokenGrammar(performance_config(), PerformanceSlots.REQUIRED)
        grammar.advance(TokenKind.BOS)
        grammar.advance(TokenKind.PITCH)
        assert grammar.allowed() == {TokenKind.VELOCITY}
        grammar.advance(TokenKind.VELOCITY)
        assert grammar.allowed() == {TokenKind.MICRO_SHIFT}

    def test_optional_slots(self):
        grammar = TokenGrammar(performance_config(), PerformanceSlots.OPTIONAL)
        grammar.advance(TokenKind.BOS)
        grammar.advance(TokenKind.PITCH)
        assert grammar.allowed() == {TokenKind.VELOCITY, TokenKind.MICRO_SHIFT, TokenKind.DURATION}

    def test_absent_slots(self):
        grammar = TokenGrammar(performance_config(), PerformanceSlots.ABSENT)
        grammar.advance(TokenKind.BOS)
        grammar.advance(TokenKind.PITCH)
        assert grammar.allowed() == {TokenKind.DURATION}

    def test_validate(self, score_tokenizer):
        grammar = TokenGrammar(score_config(), PerformanceSlots.ABSENT)
        grammar.validate(score_tokenizer.encode(melody()))
        assert grammar.complete


@pytest.mark.unit
class TestPerformanceViews:
    """Test stripping and masking performance tokens."""

    def test_strip_removes_two_tokens_per_note(self, default_tokenizer):
        score = make_score([(60, 0, 120, 90), (64, 3, 240, 80), (67, 500, 120, 70)])
        tokens = default_tokenizer.encode(score)
        stripped = default_tokenizer.strip_performance(tokens)
        assert len(tokens) - len(stripped) == 2 * len(score)
        assert not any(t.kind.is_performance for t in stripped)

    def test_strip_matches_score_only_encoding(self, performance_tokenizer, score_tokenizer):
        score = make_score([(60, 7, 120, 30), (62, 121, 240, 120), (63, 480, 120, 64)])
        assert performance_tokenizer.strip_performance(performance_tokenizer.encode(score)) == \
            score_tokenizer.encode(score)

    def test_strip_without_performance_is_identity(self, score_tokenizer):
        tokens = score_tokenizer.encode(melody())
        assert score_tokenizer.strip_performance(tokens) == tokens

    def test_mask(self, performance_tokenizer):
        tokens = performance_tokenizer.encode(melody())
        masked, targets = performance_tokenizer.mask_performance(tokens)
        assert len(masked) == len(tokens)
        assert len(targets) == 2 * len(melody())
        assert sum(1 for t in masked if t == MASK) == len(targets)
        for position, token in enumerate(tokens):
            if token.kind.is_performance:
                assert masked[position] == MASK
            else:
                assert masked[position] == token
        vocabulary = performance_tokenizer.vocabulary
        assert all(vocabulary.token(original) == tokens[position] for position, original in targets)

    def test_mask_without_performance(self, score_tokenizer):
        masked, targets = score_tokenizer.mask_performance(score_tokenizer.encode(melody()))
        assert targets == []
        assert MASK not in masked


@pytest.mark.unit
class TestCanonical:
    """Test canonical form."""

    def test_encoding_is_canonical(self, default_tokenizer):
        tokens = default_tokenizer.encode(make_score([(60, 13, 300, 90), (67, 170, 100, 30)]))
        assert default_tokenizer.is_canonical(tokens)
        assert default_tokenizer.canonicalize(tokens) == tokens

    def test_split_timeshifts_are_merged(self, score_tokenizer):
        tokens = [BOS, tok(TokenKind.TIME_SHIFT, 120), tok(TokenKind.TIME_SHIFT, 120),
                  tok(TokenKind.PITCH, 60), tok(TokenKind.DURATION, 120), EOS]
        assert not score_tokenizer.is_canonical(tokens)
        canonical = score_tokenizer.canonicalize(tokens)
        assert canonical == [BOS, tok(TokenKind.TIME_SHIFT, 240), tok(TokenKind.PITCH, 60),
                             tok(TokenKind.DURATION, 120), EOS]
        assert score_tokenizer.canonicalize(canonical) == canonical

    def test_score_only_stays_score_only(self, performance_tokenizer):
        tokens = [BOS, tok(TokenKind.PITCH, 60), tok(TokenKind.DURATION, 120), EOS]
        assert performance_tokenizer.canonicalize(tokens) == tokens

    def test_invalid_sequence_is_not_canonical(self, score_tokenizer):
        assert not score_tokenizer.is_canonical([tok(TokenKind.PITCH, 60)])

    def test_microshift_crossing_to_another_grid_is_not_canonical(self, default_tokenizer):
        velocity = default_tokenizer.vocabulary.velocity_token(90)
        crossing = [BOS, tok(TokenKind.TIME_SHIFT, 160), tok(TokenKind.PITCH, 60), velocity,
                    tok(TokenKind.MICRO_SHIFT, -30), tok(TokenKind.DURATION, 120), EOS]
        assert default_tokenizer.quantize(130) == (120, 10)
        assert not default_tokenizer.is_canonical(crossing)
        canonical = default_tokenizer.canonicalize(crossing)
        assert canonical == [BOS, tok(TokenKind.TIME_SHIFT, 120), tok(TokenKind.PITCH, 60), velocity,
                             tok(TokenKind.MICRO_SHIFT, 10), tok(TokenKind.DURATION, 120), EOS]
        assert default_tokenizer.decode(canonical) == default_tokenizer.decode(crossing)
        assert meets_canonical_form(canonical, default_tokenizer)

    def test_microshift_staying_on_its_grid_is_canonical(self, default_tokenizer):
        velocity = default_tokenizer.vocabulary.velocity_token(90)
        staying = [BOS, tok(TokenKind.TIME_SHIFT, 160), tok(TokenKind.PITCH, 60), velocity,
                   tok(TokenKind.MICRO_SHIFT, -18), tok(TokenKind.DURATION, 120), EOS]
        assert meets_canonical_form(staying, default_tokenizer)
        assert default_tokenizer.is_canonical(staying)


GRID_POINTS = st.tuples(st.integers(0, 40), st.sampled_from((120, 160))).map(lambda kg: kg[0] * kg[1])
NOTE = st.tuples(
    GRID_POINTS,
    st.integers(21, 108),
    st.integers(-15, 15),
    st.integers(1, 16).map(lambda k: 120 * k),
    st.integers(1, 127),
)


@st.composite
def representable_scores(draw):
    raw = draw(st.lists(NOTE, min_size=0, max_size=24, unique_by=lambda n: (n[0], n[1])))
    notes = [NoteEvent(pitch, max(grid + residual, 0), duration, velocity)
             for grid, pitch, residual, duration, velocity in raw]
    return Score.from_notes(480, notes)


DEFAULT_VALUES = PerTok().vocabulary.values


@st.composite
def grammar_sequences(draw):
    """Grammar-valid sequences of the default vocabulary, TimeShift runs drawn freely."""
    grid_deltas = st.sampled_from((0, 120, 160, 240, 320, 40, 80)).map(
        lambda delta: decompose_timeshift(delta, DEFAULT_VALUES[TokenKind.TIME_SHIFT]))
    free_runs = st.lists(st.sampled_from(DEFAULT_VALUES[TokenKind.TIME_SHIFT]), max_size=3)
    tokens = [BOS]
    for _ in range(draw(st.integers(0, 12))):
        tokens.extend(tok(TokenKind.TIME_SHIFT, shift) for shift in draw(st.one_of(grid_deltas, free_runs)))
        tokens.append(tok(TokenKind.PITCH, draw(st.integers(21, 108))))
        for kind in (TokenKind.VELOCITY, TokenKind.MICRO_SHIFT, TokenKind.DURATION):
            tokens.append(tok(kind, draw(st.sampled_from(DEFAULT_VALUES[kind]))))
    tokens.append(EOS)
    return tokens


@pytest.mark.unit
@pytest.mark.slow
class TestRoundTrip:
    """Property tests over scores near the quantization grids and over grammar-valid sequences."""

    @settings(max_examples=1000, deadline=None)
    @given(representable_scores())
    def test_decode_encode_error_bounds(self, score):
        tokenizer = PerTok()
        decoded = tokenizer.decode(tokenizer.encode(score))
        assert len(decoded) == len(score)

        def key(note):
            return tokenizer.quantize(note.onset_ticks)[0], note.pitch

        originals = {key(n): n for n in score.notes}
        for note in decoded.notes:
            original = originals[key(note)]
            assert abs(note.onset_ticks - original.onset_ticks) <= 1
            assert abs(note.velocity - original.velocity) <= 2
            assert note.duration_ticks == original.duration_ticks

    @settings(max_examples=1000, deadline=None)
    @given(representable_scores())
    def test_canonical_idempotence(self, score):
        tokenizer = PerTok()
        tokens = tokenizer.encode(score)
        assert tokenizer.encode(tokenizer.decode(tokens)) == tokens

    @settings(max_examples=1000, deadline=None)
    @given(grammar_sequences())
    def test_canonicalize_reaches_a_fixed_point(self, tokens):
        tokenizer = PerTok()
        canonical = tokenizer.canonicalize(tokens)
        assert tokenizer.canonicalize(canonical) == canonical
        assert meets_canonical_form(canonical, tokenizer, strict_pitches=False)
        assert sorted(tokenizer.decode(canonical).pitches()) == sorted(tokenizer.decode(tokens).pitches())

    @settings(max_examples=1000, deadline=None)
    @given(grammar_sequences())
    def test_sequences_in_canonical_form_round_trip(self, tokens):
        tokenizer = PerTok()
        if meets_canonical_form(tokens, tokenizer):
            assert tokenizer.encode(tokenizer.decode(tokens)) == tokens
            assert tokenizer.is_canonical(tokens)

    @settings(max_examples=200, deadline=None)
    @given(representable_scores())
    def test_duration_identity(self, score):
        full = PerTok(TokenizerConfig()).encode(score)
        bare = PerTok(TokenizerConfig(use_duration=False)).encode(score)
        assert len(full) - len(bare) == len(score)


class TestBench:
    """Test tokenizer benchmark accounting."""

    def test_variants(self):
        variants = bench_variants(TokenizerConfig())
        assert list(variants) == ["PerTok", "PerTok-p", "PerTok no-duration"]
        assert variants["PerTok-p"].microshift_buckets == 61
        assert not variants["PerTok"].use_microshift

    def test_no_duration_identity(self):
        corpus = [melody(), make_score([(60, 0, 120, 90), (64, 7, 240, 80), (67, 500, 120, 70)])]
        rows = {row.name: row for row in benchmark(corpus, bench_variants(TokenizerConfig()))}
        assert rows["PerTok no-duration"].mean_length == pytest.approx(
            rows["PerTok"].mean_length - rows["PerTok"].mean_notes, abs=1e-9)
        assert rows["PerTok-p"].vocab_size > rows["PerTok"].vocab_size
        assert rows["PerTok"].mean_notes == pytest.approx(3.5)

    def test_table(self):
        rows = benchmark([melody()], bench_variants(TokenizerConfig()))
        table = format_bench_table(rows)
        assert table.splitlines()[0].startswith("Tokenizer")
        assert "PerTok-p" in table

    def test_empty_corpus(self):
        with pytest.raises(CorpusError):
            benchmark([], bench_variants(TokenizerConfig()))
