"""Corpus assembly and weighted text sampling."""

import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtwsynth.corpus import (
    ALLOWED_CHARS,
    PUNCTUATION,
    Corpus,
    CorpusConfig,
    CorpusEntry,
    SampleLayout,
    build_corpus,
    sample_text,
)
from rtwsynth.errors import EmptyCorpus, MalformedUtf8

PHONE_RE = re.compile(r"^\+7 \(\d{3}\) \d{3}-\d{2}-\d{2}$")


class TestBuildCorpus:
    def test_blocklist_removed_casefold(self, corpus_dir):
        c = build_corpus(
            corpus_dir / "words.txt",
            corpus_dir / "blocklist.txt",
            corpus_dir / "surnames.txt",
        )
        tokens = {e.token.casefold() for e in c.entries}
        # blocklist carries one lowercase and one capitalized entry; both
        # words.txt spellings must be gone.
        assert "злодей" not in tokens
        assert "дурак" not in tokens
        assert c.blocklist_applied

    def test_without_blocklist_words_survive(self, corpus_dir):
        c = build_corpus(corpus_dir / "words.txt", None, None)
        tokens = {e.token for e in c.entries}
        assert "злодей" in tokens
        assert not c.blocklist_applied

    def test_malformed_utf8_reports_line(self, corpus_dir):
        with pytest.raises(MalformedUtf8) as exc:
            build_corpus(corpus_dir / "bad_utf8.txt", None, None)
        assert exc.value.line_number == 3

    def test_kinds_present(self, corpus_dir):
        cfg = CorpusConfig(english_words=corpus_dir / "english.txt")
        c = build_corpus(
            corpus_dir / "words.txt",
            corpus_dir / "blocklist.txt",
            corpus_dir / "surnames.txt",
            cfg,
        )
        kinds = {e.kind for e in c.entries}
        assert kinds == {"russian", "surname", "english", "number-template", "phone-template"}

    def test_templates_can_be_disabled(self, corpus_dir):
        cfg = CorpusConfig(number_weight=0.0, phone_weight=0.0)
        c = build_corpus(corpus_dir / "words.txt", None, None, cfg)
        kinds = {e.kind for e in c.entries}
        assert "number-template" not in kinds
        assert "phone-template" not in kinds

    def test_all_tokens_within_alphabet(self, corpus_dir):
        cfg = CorpusConfig(english_words=corpus_dir / "english.txt")
        c = build_corpus(corpus_dir / "words.txt", None, corpus_dir / "surnames.txt", cfg)
        for e in c.entries:
            if e.kind.endswith("-template"):
                continue  # placeholders expand to digits at sample time
            assert all(ch in ALLOWED_CHARS for ch in e.token), e.token

    def test_empty_corpus_raises(self, tmp_path):
        empty = tmp_path / "none.txt"
        empty.write_text("", encoding="utf-8")
        cfg = CorpusConfig(number_weight=0.0, phone_weight=0.0)
        with pytest.raises(EmptyCorpus):
            build_corpus(empty, None, None, cfg)

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError):
            Corpus(entries=(CorpusEntry("да", "russian", 0.0),), blocklist_applied=False)


class TestSampleText:
    def make_corpus(self, **cfg_kwargs):
        cfg = CorpusConfig(**cfg_kwargs)
        entries = [CorpusEntry(w, "russian", 1.0) for w in ("дом", "лес", "река")]
        if cfg.number_weight > 0:
            entries.append(CorpusEntry("<number>", "number-template", cfg.number_weight))
        if cfg.phone_weight > 0:
            entries.append(CorpusEntry("<phone>", "phone-template", cfg.phone_weight))
        return Corpus(entries=tuple(entries), blocklist_applied=False), cfg

    def test_deterministic_under_seed(self):
        corpus, cfg = self.make_corpus()
        layout = SampleLayout()
        s1 = sample_text(corpus, np.random.default_rng(42), layout, cfg)
        s2 = sample_text(corpus, np.random.default_rng(42), layout, cfg)
        assert s1 == s2

    def test_line_and_word_counts_within_layout(self):
        corpus, cfg = self.make_corpus(phone_weight=0.0)
        layout = SampleLayout(max_lines=3, words_per_line_range=(1, 4), punctuation_prob=0.0)
        rng = np.random.default_rng(0)
        for _ in range(200):
            s = sample_text(corpus, rng, layout, cfg)
            assert 1 <= len(s.lines) <= 3
            for line in s.lines:
                assert 1 <= len(line) <= 4

    def test_phone_template_expands_to_three_tokens(self):
        corpus = Corpus(
            entries=(CorpusEntry("<phone>", "phone-template", 1.0),),
            blocklist_applied=False,
        )
        layout = SampleLayout(max_lines=1, words_per_line_range=(1, 1), punctuation_prob=0.0)
        s = sample_text(corpus, np.random.default_rng(1), layout)
        assert len(s.lines) == 1
        assert len(s.lines[0]) == 3
        assert PHONE_RE.match(s.flattened)

    def test_number_template_length_range(self):
        corpus = Corpus(
            entries=(CorpusEntry("<number>", "number-template", 1.0),),
            blocklist_applied=False,
        )
        cfg = CorpusConfig(number_length_range=(2, 4))
        layout = SampleLayout(max_lines=1, words_per_line_range=(1, 1), punctuation_prob=0.0)
        rng = np.random.default_rng(3)
        seen = set()
        for _ in range(300):
            s = sample_text(corpus, rng, layout, cfg)
            tok = s.lines[0][0]
            assert tok.text.isdigit()
            assert 2 <= len(tok.text) <= 4
            seen.add(len(tok.text))
        assert seen == {2, 3, 4}

    def test_punctuation_attached_to_final_expanded_token(self):
        corpus = Corpus(
            entries=(CorpusEntry("дом", "russian", 1.0),),
            blocklist_applied=False,
        )
        layout = SampleLayout(max_lines=1, words_per_line_range=(1, 1), punctuation_prob=1.0)
        s = sample_text(corpus, np.random.default_rng(5), layout)
        tok = s.lines[0][0]
        assert tok.text.startswith("дом")
        assert tok.text[-1] in PUNCTUATION
        assert len(tok.text) == 4

    def test_flattened_uses_spaces_and_newlines(self):
        corpus, cfg = self.make_corpus(number_weight=0.0, phone_weight=0.0)
        layout = SampleLayout(max_lines=2, words_per_line_range=(2, 2), punctuation_prob=0.0)
        s = sample_text(corpus, np.random.default_rng(8), layout, cfg)
        flat = s.flattened
        assert flat.count("\n") == len(s.lines) - 1
        for line, text in zip(s.lines, flat.split("\n")):
            assert text == " ".join(t.text for t in line)

    def test_weights_shift_draw_frequencies(self):
        entries = (
            CorpusEntry("дом", "russian", 9.0),
            CorpusEntry("лес", "russian", 1.0),
        )
        corpus = Corpus(entries=entries, blocklist_applied=False)
        layout = SampleLayout(max_lines=1, words_per_line_range=(1, 1), punctuation_prob=0.0)
        rng = np.random.default_rng(17)
        hits = sum(
            1
            for _ in range(5000)
            if sample_text(corpus, rng, layout).lines[0][0].text == "дом"
        )
        assert abs(hits / 5000 - 0.9) < 0.02

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_samples_respect_alphabet_property(self, seed):
        corpus, cfg = self.make_corpus()
        layout = SampleLayout(punctuation_prob=0.3)
        s = sample_text(corpus, np.random.default_rng(seed), layout, cfg)
        for ch in s.flattened:
            assert ch == "\n" or ch in ALLOWED_CHARS
