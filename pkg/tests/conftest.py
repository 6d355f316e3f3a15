import dataclasses
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fonts_dir() -> Path:
    return FIXTURES / "fonts"


@pytest.fixture(scope="session")
def fontset(fonts_dir):
    from rtwsynth.textrender import load_fonts

    return load_fonts(fonts_dir)


@pytest.fixture(scope="session")
def dejavu(fontset):
    return next(f for f in fontset.fonts if "DejaVu" in f.family)


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def small_corpus(corpus_dir):
    from rtwsynth.corpus import build_corpus

    return build_corpus(
        corpus_dir / "words.txt",
        corpus_dir / "blocklist.txt",
        corpus_dir / "surnames.txt",
    )


@pytest.fixture(scope="session")
def e2e_config():
    """Pipeline config wired to the checked-in 10-image fixture set."""
    from rtwsynth.config import PathsConfig, PipelineConfig, RenderConfig

    return PipelineConfig(
        paths=PathsConfig(
            images_dir=str(FIXTURES / "e2e" / "images"),
            maps_dir=str(FIXTURES / "e2e" / "maps"),
            fonts_dir=str(FIXTURES / "fonts"),
            words_file=str(FIXTURES / "corpus" / "words.txt"),
            blocklist_file=str(FIXTURES / "corpus" / "blocklist.txt"),
            surnames_file=str(FIXTURES / "corpus" / "surnames.txt"),
            english_file=str(FIXTURES / "corpus" / "english.txt"),
            boxes_dir=str(FIXTURES / "e2e" / "boxes"),
        ),
        render=dataclasses.replace(RenderConfig(), size_range=(12, 20)),
    )
