"""Sampling corpus: frequent Russian words (blocklist-filtered), optional
Latin words, surnames, and digit/phone templates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpus, MalformedUtf8

# Engine-wide alphabet. Cyrillic block А..я plus Ёё, Basic Latin letters,
# digits, space and the annotation punctuation; +() appear only through the
# phone template.
CYRILLIC = {chr(c) for c in range(0x0410, 0x0450)} | {"Ё", "ё"}
LATIN = {chr(c) for c in range(ord("A"), ord("Z") + 1)} | {
    chr(c) for c in range(ord("a"), ord("z") + 1)
}
DIGITS = set("0123456789")
PUNCTUATION = ".,?!:;-"
PHONE_CHARS = set("+()")
ALLOWED_CHARS = CYRILLIC | LATIN | DIGITS | set(PUNCTUATION) | {" "} | PHONE_CHARS

NUMBER_TEMPLATE = "<number>"
PHONE_TEMPLATE = "<phone>"

KINDS = ("russian", "english", "surname", "number-template", "phone-template")


@dataclass(frozen=True)
class CorpusEntry:
    token: str
    kind: str
    weight: float


@dataclass(frozen=True)
class Corpus:
    entries: tuple[CorpusEntry, ...]
    blocklist_applied: bool

    def __post_init__(self):
        if not self.entries:
            raise EmptyCorpus("corpus has no entries")
        if any(e.weight <= 0 for e in self.entries):
            raise ValueError("corpus weights must be positive")


@dataclass(frozen=True)
class CorpusConfig:
    english_words: object | None = None  # optional path to Latin word list
    number_weight: float = 1.0  # 0 disables the template
    phone_weight: float = 1.0
    surname_weight: float = 1.0  # per surname entry
    word_weight: float = 1.0  # per dictionary word
    number_length_range: tuple[int, int] = (1, 6)


def _read_tokens(path) -> list[str]:
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens = []
    for i, line in enumerate(raw.split(b"\n"), start=1):
        try:
            text = line.decode("utf-8").strip()
        except UnicodeDecodeError:
            raise MalformedUtf8(path, i) from None
        if text:
            tokens.append(text)
    return tokens


def _clean(tokens: list[str]) -> list[str]:
    return [t for t in tokens if all(ch in ALLOWED_CHARS for ch in t) and " " not in t]


def build_corpus(words, blocklist, surnames, cfg: CorpusConfig | None = None) -> Corpus:
    """Assemble the corpus from newline-delimited UTF-8 token files.

    Blocklisted tokens are removed case-insensitively (Unicode casefold);
    tokens containing characters outside the engine alphabet are dropped.
    """
    cfg = cfg or CorpusConfig()
    blocked = {t.casefold() for t in _read_tokens(blocklist)} if blocklist else set()

    entries: list[CorpusEntry] = []

    def add(tokens: list[str], kind: str, weight: float):
        for t in _clean(tokens):
            if t.casefold() in blocked:
                continue
            entries.append(CorpusEntry(t, kind, weight))

    add(_read_tokens(words), "russian", cfg.word_weight)
    if surnames:
        add(_read_tokens(surnames), "surname", cfg.surname_weight)
    if cfg.english_words:
        add(_read_tokens(cfg.english_words), "english", cfg.word_weight)
    if cfg.number_weight > 0:
        entries.append(CorpusEntry(NUMBER_TEMPLATE, "number-template", cfg.number_weight))
    if cfg.phone_weight > 0:
        entries.append(CorpusEntry(PHONE_TEMPLATE, "phone-template", cfg.phone_weight))
    if not entries:
        raise EmptyCorpus("no tokens survived filtering and no templates enabled")
    return Corpus(entries=tuple(entries), blocklist_applied=bool(blocklist))


@dataclass(frozen=True)
class Token:
    text: str
    kind: str


@dataclass(frozen=True)
class TextSample:
    lines: tuple[tuple[Token, ...], ...]

    @property
    def flattened(self) -> str:
        return "\n".join(" ".join(t.text for t in line) for line in self.lines)


@dataclass(frozen=True)
class SampleLayout:
    max_lines: int = 3
    words_per_line_range: tuple[int, int] = (1, 4)
    punctuation_prob: float = 0.15


def _expand(entry: CorpusEntry, cfg: CorpusConfig, rng: np.random.Generator) -> list[Token]:
    if entry.kind == "number-template":
        lo, hi = cfg.number_length_range
        n = int(rng.integers(lo, hi + 1))
        digits = "".join(str(int(d)) for d in rng.integers(0, 10, size=n))
        return [Token(digits, entry.kind)]
    if entry.kind == "phone-template":
        d = [str(int(x)) for x in rng.integers(0, 10, size=10)]
        # one draw, three space-separated word tokens: +7 (DDD) DDD-DD-DD
        return [
            Token("+7", entry.kind),
            Token("({}{}{})".format(*d[:3]), entry.kind),
            Token("{}{}{}-{}{}-{}{}".format(*d[3:]), entry.kind),
        ]
    return [Token(entry.token, entry.kind)]


def sample_text(
    corpus: Corpus,
    rng: np.random.Generator,
    layout: SampleLayout,
    cfg: CorpusConfig | None = None,
) -> TextSample:
    """Draw a multi-line sample, weights-proportional, templates expanded."""
    cfg = cfg or CorpusConfig()
    weights = np.array([e.weight for e in corpus.entries], dtype=np.float64)
    cum = np.cumsum(weights)
    n_lines = int(rng.integers(1, layout.max_lines + 1))
    lo, hi = layout.words_per_line_range
    lines = []
    for _ in range(n_lines):
        n_draws = int(rng.integers(lo, hi + 1))
        toks = []
        for _ in range(n_draws):
            u = rng.random() * cum[-1]
            entry = corpus.entries[int(np.searchsorted(cum, u, side="right"))]
            expanded = _expand(entry, cfg, rng)
            if layout.punctuation_prob > 0 and rng.random() < layout.punctuation_prob:
                mark = PUNCTUATION[int(rng.integers(0, len(PUNCTUATION)))]
                expanded[-1] = Token(expanded[-1].text + mark, expanded[-1].kind)
            toks.extend(expanded)
        lines.append(tuple(toks))
    return TextSample(lines=tuple(lines))
