from __future__ import annotations

import functools
from pathlib import Path

import pytest

from dictelab.parser import parse_context, parse_program
from dictelab.source_typer import Limits, typecheck_program

CORPUS = Path(__file__).parent / "corpus"

POSITIVE = ["P1", "P2", "P3", "P4"]
NEGATIVE = ["N1", "N2"]


def corpus_text(name: str) -> str:
    suffix = ".tgt" if name.startswith("D") else ".src"
    return (CORPUS / f"{name}{suffix}").read_text()


@functools.lru_cache(maxsize=None)
def corpus_program(name: str):
    return parse_program(corpus_text(name))


@functools.lru_cache(maxsize=None)
def corpus_result(name: str):
    return typecheck_program(corpus_program(name), Limits())


def corpus_contexts():
    return [parse_context(p.read_text())
            for p in sorted((CORPUS / "contexts").glob("*.ctx"))]


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS
