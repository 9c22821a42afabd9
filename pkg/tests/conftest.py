from pathlib import Path
from typing import Callable

import pytest

from preguard.lang import Program, parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def load_corpus() -> Callable[[str], Program]:
    """
    Parse a corpus file by stem
    """
    def load(stem: str) -> Program:
        return parse_program((CORPUS / f"{stem}.mpl").read_text())
    return load


@pytest.fixture
def divrem(load_corpus) -> Program:
    return load_corpus("divrem")
