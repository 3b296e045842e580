"""Deterministic synthetic document corpus for end-to-end pipeline checks."""

from __future__ import annotations

import datetime as dt
from importlib import resources

import numpy as np

from .core import ModelParams
from .dynamics import GenSeed, generate_features
from .io import DocumentRecord, read_documents
from .network import build_network, calibrate_theta

__all__ = ["synthetic_corpus", "bundled_corpus_path", "load_bundled_corpus"]

_CONSONANTS = "bcdfghklmnprstvz"
_VOWELS = "aeiou"
_FILLER = [
    "This paper presents the results of a study.",
    "We show that it is possible.",
    "The approach is also evaluated in the field.",
]


def _word(k: int) -> str:
    # bijective syllable spelling, at least two syllables
    syl = []
    k += 16 * 5
    while k:
        k, r = divmod(k, len(_CONSONANTS) * len(_VOWELS))
        syl.append(_CONSONANTS[r // len(_VOWELS)] + _VOWELS[r % len(_VOWELS)])
    return "".join(syl)


def _gram(k: int) -> str:
    return f"{_word(2 * k)} {_word(2 * k + 1)}"


def synthetic_corpus(
    n_docs: int = 200,
    seed: int = 2014,
    params: ModelParams = ModelParams(alpha=6.0, beta=0.8, delta=0.1, p=0.3),
    k_steep: float = 1.0,
    ell: float = 250.0,
) -> list[DocumentRecord]:
    """Documents whose 2-grams follow the feature dynamics.

    Each feature becomes a two-word sentence of nonce words, mixed with
    filler sentences made only of stopword pairs. Authors are attached so
    that every simulated link ``(i, j)`` makes document ``i`` share the lead
    author of ``j``. Some dates repeat and the records are returned in a
    shuffled order.
    """
    gs = GenSeed(seed, 0)
    F = generate_features(n_docs, params, gs)
    sig = calibrate_theta(F, k_steep, min(ell, n_docs * (n_docs - 1) / 4))
    g = build_network(F, sig, params.p, gs)
    rng = gs.rng(2)
    lead = [f"{_word(5000 + i).title()}, {_word(9000 + i)[0].upper()}." for i in range(n_docs)]
    coauthors: list[list[str]] = [[lead[i]] for i in range(n_docs)]
    for i, j in zip(g.src, g.dst):
        name = lead[j]
        # same person, harmonised ordering
        if rng.random() < 0.5:
            last, first = name.split(", ")
            name = f"{first} {last}"
        coauthors[i].append(name)
    docs = []
    start = dt.date(2010, 1, 4)
    for i in range(n_docs):
        grams = [_gram(int(k)) for k in F.rows[i]]
        rng.shuffle(grams)
        n_title = min(len(grams), 2)
        title = ". ".join(g_.title() for g_ in grams[:n_title])
        sentences = [f"{g_}." for g_ in grams[n_title:]]
        sentences.insert(int(rng.integers(0, len(sentences) + 1)), _FILLER[i % len(_FILLER)])
        docs.append(
            DocumentRecord(
                id=f"syn-{i + 1:04d}",
                entry_date=start + dt.timedelta(days=2 * (i - 1) if i % 10 == 9 else 2 * i),
                title=title,
                abstract=" ".join(sentences),
                authors=tuple(coauthors[i]),
            )
        )
    # every 10th document shares its predecessor's date; after shuffling,
    # input order decides the tie
    order = rng.permutation(n_docs)
    return [docs[k] for k in order]


def bundled_corpus_path():
    return resources.files("featnet").joinpath("data", "synthetic_corpus.jsonl")


def load_bundled_corpus() -> list[DocumentRecord]:
    with resources.as_file(bundled_corpus_path()) as path:
        return read_documents(path)
