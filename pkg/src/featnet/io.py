"""Document ingestion and plain-text file formats.

Feature matrix format::

    <n> <L_n>
    <i> <N_i> <k1> <k2> ...      # one line per node, 1-based sorted features

Graph format (tab separated, 1-based; phase 1 = first phase, 2 = second,
0 = unknown/observed)::

    # nodes <n>
    <i>\t<j>\t<phase>

Report format: ``key = value`` lines (values JSON-encoded), the last line
being ``json = {...}`` with the whole report as one object.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import EstimationReport, FeatureMatrix, LabeledGraph, Phase

__all__ = [
    "FormatError",
    "DEFAULT_STOPWORDS",
    "DocumentRecord",
    "normalize_stopwords",
    "split_sentences",
    "clean_sentence",
    "extract_2grams",
    "chronological_order",
    "build_feature_matrix",
    "normalize_author",
    "build_coauthorship_graph",
    "read_documents",
    "read_stopwords",
    "write_feature_matrix",
    "read_feature_matrix",
    "write_graph",
    "read_graph",
    "format_report",
    "write_report",
    "read_report",
]


class FormatError(ValueError):
    """Malformed input file; carries the location of the problem."""

    def __init__(self, message: str, path=None, line: int | None = None, column: int | None = None):
        self.path, self.line, self.column = path, line, column
        where = ":".join(str(x) for x in (path, line, column) if x is not None)
        super().__init__(f"{where}: {message}" if where else message)


DEFAULT_STOPWORDS = frozenset({
    "the", "a", "of", "and", "to", "is", "for", "in", "an", "with", "by", "from",
    "on", "or", "that", "at", "be", "which", "are", "as", "one", "may", "it",
    "and/or", "if", "via", "can", "when", "we", "his", "her", "their", "this",
    "our", "into", "has", "have", "only", "also", "do", "does", "presents",
    "paper", "doesn't", "not",
})

# anything that is not a word character, whitespace, '/' or '.'
_PUNCT = re.compile(r"[^\w\s/.]|_")
_SPACES = re.compile(r"\s+")
_SENTENCE_END = re.compile(r"[.!?]+(?:\s+|$)")


@dataclass(frozen=True)
class DocumentRecord:
    id: str
    entry_date: dt.date
    title: str = ""
    abstract: str = ""
    authors: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        date = self.entry_date
        if isinstance(date, str):
            try:
                date = dt.date.fromisoformat(date.strip()[:10])
            except ValueError as exc:
                raise ValueError(f"document {self.id!r}: unparseable entry_date {self.entry_date!r}") from exc
        elif isinstance(date, dt.datetime):
            date = date.date()
        object.__setattr__(self, "entry_date", date)
        authors = self.authors
        if isinstance(authors, str):
            authors = [a for a in authors.split(";")]
        object.__setattr__(self, "authors", tuple(a.strip() for a in authors if a and a.strip()))


def _clean_word(w: str) -> str:
    return _SPACES.sub(" ", _PUNCT.sub("", w.lower())).strip()


def normalize_stopwords(words: Iterable[str]) -> frozenset[str]:
    """Pass stopwords through the same cleaning as text, so "doesn't" matches "doesnt"."""
    out = set()
    for w in words:
        c = _clean_word(w)
        if c:
            out.add(c)
    return frozenset(out)


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!' or '?' followed by whitespace or end of text."""
    return [s for s in _SENTENCE_END.split(text) if s.strip()]


def clean_sentence(sentence: str) -> list[str]:
    """Lowercase, drop punctuation other than '/' and '.', and tokenise on whitespace."""
    return _SPACES.sub(" ", _PUNCT.sub("", sentence.lower())).split()


def extract_2grams(doc, stopwords: Iterable[str] | None = None) -> list[str]:
    """Distinct word pairs of a document in order of first occurrence.

    ``doc`` is a :class:`DocumentRecord` (title and abstract are scanned
    separately) or a plain string. Pairs never cross a sentence boundary and
    any pair containing a stopword is dropped.
    """
    stop = normalize_stopwords(DEFAULT_STOPWORDS if stopwords is None else stopwords)
    texts = [doc.title, doc.abstract] if isinstance(doc, DocumentRecord) else [doc]
    seen: dict[str, None] = {}
    for text in texts:
        if not text:
            continue
        for sentence in split_sentences(text):
            tokens = clean_sentence(sentence)
            for a, b in zip(tokens, tokens[1:]):
                if a in stop or b in stop:
                    continue
                seen.setdefault(f"{a} {b}", None)
    return list(seen)


def chronological_order(docs: Sequence[DocumentRecord]) -> list[int]:
    """Indices of ``docs`` sorted by entry date; ties keep input order."""
    return sorted(range(len(docs)), key=lambda i: docs[i].entry_date)


def build_feature_matrix(
    docs: Sequence[DocumentRecord],
    stopwords: Iterable[str] | None = None,
    features: Sequence[Sequence[str]] | None = None,
) -> tuple[FeatureMatrix, list[str], list[str]]:
    """Feature matrix over documents in chronological order.

    Features are numbered by first appearance, which makes the result
    left-ordered. Returns ``(F, vocabulary, doc_ids)`` where
    ``vocabulary[k]`` names column ``k`` (0-based) and ``doc_ids`` gives the
    node order. ``features`` may supply pre-extracted token sets aligned
    with ``docs``.
    """
    order = chronological_order(docs)
    vocab: dict[str, int] = {}
    rows = []
    new_counts = []
    for idx in order:
        items = features[idx] if features is not None else extract_2grams(docs[idx], stopwords)
        before = len(vocab)
        cols = []
        for item in items:
            k = vocab.get(item)
            if k is None:
                k = vocab[item] = len(vocab)
            cols.append(k)
        rows.append(np.unique(np.asarray(cols, dtype=np.int64)))
        new_counts.append(len(vocab) - before)
    F = FeatureMatrix(tuple(rows), np.asarray(new_counts, dtype=np.int64))
    return F, list(vocab), [docs[i].id for i in order]


def normalize_author(name: str) -> str:
    """Harmonise an author string without disambiguating it.

    ``"Last, First"`` becomes ``"first last"``; punctuation other than
    '.', '-' and apostrophes is removed, case and whitespace are folded.
    Initials are kept as written, so "J. J. Anaya" and "Jose Javier Anaya"
    stay distinct.
    """
    name = name.strip()
    if name.count(",") == 1:
        last, first = (part.strip() for part in name.split(","))
        name = f"{first} {last}"
    name = re.sub(r"[^\w\s.'-]|_", " ", name)
    name = re.sub(r"\.(?=\S)", ". ", name)
    return _SPACES.sub(" ", name).strip().casefold()


def build_coauthorship_graph(docs: Sequence[DocumentRecord]) -> LabeledGraph:
    """Link two documents when they share a normalised author name.

    Nodes follow :func:`chronological_order`; edges carry ``Phase.UNKNOWN``.
    """
    order = chronological_order(docs)
    papers_by_author: dict[str, list[int]] = {}
    for node, idx in enumerate(order):
        for author in {normalize_author(a) for a in docs[idx].authors}:
            if author:
                papers_by_author.setdefault(author, []).append(node)
    pairs = set()
    for papers in papers_by_author.values():
        for a in range(len(papers)):
            for b in range(a):
                pairs.add((papers[a], papers[b]))
    if not pairs:
        return LabeledGraph.empty(len(docs))
    arr = np.array(sorted(pairs), dtype=np.int64)
    return LabeledGraph(len(docs), arr[:, 0], arr[:, 1], np.zeros(len(arr), dtype=np.int8))


def _record_from_mapping(row: dict, where) -> DocumentRecord:
    try:
        authors = row.get("authors", ())
        if isinstance(authors, str):
            authors = authors.split(";")
        return DocumentRecord(
            id=str(row["id"]),
            entry_date=row["entry_date"],
            title=row.get("title") or "",
            abstract=row.get("abstract") or "",
            authors=tuple(authors or ()),
        )
    except KeyError as exc:
        raise FormatError(f"missing field {exc.args[0]!r}", *where) from None
    except ValueError as exc:
        raise FormatError(str(exc), *where) from None


def read_documents(path) -> list[DocumentRecord]:
    """Read documents from JSON Lines (``.jsonl``) or CSV/TSV.

    Fields: ``id``, ``entry_date`` (ISO-8601), ``title``, ``abstract``,
    ``authors`` (a JSON list, or ``;``-separated in CSV/TSV).
    """
    path = Path(path)
    docs = []
    if path.suffix.lower() in (".csv", ".tsv"):
        delim = "\t" if path.suffix.lower() == ".tsv" else ","
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh, delimiter=delim)
            for row in reader:
                docs.append(_record_from_mapping(row, (path, reader.line_num)))
    else:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"invalid JSON: {exc.msg}", path, lineno, exc.colno) from None
                if not isinstance(row, dict):
                    raise FormatError("expected a JSON object", path, lineno, 1)
                docs.append(_record_from_mapping(row, (path, lineno)))
    ids = [d.id for d in docs]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise FormatError(f"duplicate document id {dup!r}", path)
    return docs


def write_documents(path, docs: Iterable[DocumentRecord]):
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            rec = {
                "id": d.id,
                "entry_date": d.entry_date.isoformat(),
                "title": d.title,
                "abstract": d.abstract,
                "authors": list(d.authors),
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip() and not w.lstrip().startswith("#"))


def write_feature_matrix(F: FeatureMatrix, path):
    with open(path, "w") as fh:
        fh.write(f"{F.n_nodes} {F.n_features}\n")
        for i, (row, n_new) in enumerate(zip(F.rows, F.new_counts), start=1):
            fh.write(" ".join(map(str, [i, int(n_new), *(row + 1).tolist()])) + "\n")


def _ints(tokens, path, lineno, line):
    out = []
    col = 1
    for tok in tokens:
        col = line.index(tok, col - 1) + 1
        try:
            out.append(int(tok))
        except ValueError:
            raise FormatError(f"expected an integer, got {tok!r}", path, lineno, col) from None
        col += len(tok)
    return out


def read_feature_matrix(path) -> FeatureMatrix:
    with open(path) as fh:
        lines = fh.read().splitlines()
    content = [(no, ln) for no, ln in enumerate(lines, start=1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not content:
        raise FormatError("empty feature matrix file", path, 1, 1)
    no, head = content[0]
    hdr = _ints(head.split(), path, no, head)
    if len(hdr) != 2:
        raise FormatError("header must be '<n> <L_n>'", path, no, 1)
    n, L = hdr
    body = content[1:]
    if len(body) != n:
        raise FormatError(f"header declares {n} nodes but {len(body)} rows follow", path, no, 1)
    rows, new_counts = [], []
    for expect, (no, line) in enumerate(body, start=1):
        vals = _ints(line.split(), path, no, line)
        if len(vals) < 2:
            raise FormatError("row must start with '<i> <N_i>'", path, no, 1)
        if vals[0] != expect:
            raise FormatError(f"expected node {expect}, got {vals[0]}", path, no, 1)
        feats = np.asarray(vals[2:], dtype=np.int64)
        if len(feats) and (feats.min() < 1 or feats.max() > L):
            raise FormatError(f"feature index outside 1..{L}", path, no)
        rows.append(feats - 1)
        new_counts.append(vals[1])
    try:
        F = FeatureMatrix(tuple(rows), np.asarray(new_counts, dtype=np.int64))
    except ValueError as exc:
        raise FormatError(str(exc), path) from None
    if F.n_features != L:
        raise FormatError(f"header declares L_n={L} but the rows introduce {F.n_features}", path, content[0][0])
    return F


def write_graph(g: LabeledGraph, path):
    with open(path, "w") as fh:
        fh.write(f"# nodes {g.n}\n")
        for a, b, t in zip(g.src + 1, g.dst + 1, g.phase):
            fh.write(f"{a}\t{b}\t{t}\n")


def read_graph(path, n: int | None = None) -> LabeledGraph:
    """Read an edge list; the node count comes from ``# nodes`` or the largest index.

    A missing phase column means ``Phase.UNKNOWN``.
    """
    edges = []
    declared = None
    with open(path) as fh:
        for no, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                m = re.match(r"#\s*nodes\s+(\d+)", s)
                if m:
                    declared = int(m.group(1))
                continue
            vals = _ints(s.split(), path, no, line)
            if len(vals) not in (2, 3):
                raise FormatError("edge line must be 'i j [phase]'", path, no, 1)
            if vals[0] < 1 or vals[1] < 1:
                raise FormatError("node indices are 1-based", path, no, 1)
            if len(vals) == 3 and vals[2] not in (0, 1, 2):
                raise FormatError(f"phase must be 0, 1 or 2, got {vals[2]}", path, no)
            edges.append((no, vals))
    top = max((max(v[0], v[1]) for _, v in edges), default=0)
    n = n if n is not None else declared if declared is not None else top
    if top > n:
        raise FormatError(f"edge endpoint {top} exceeds node count {n}", path)
    seen = set()
    src, dst, ph = [], [], []
    for no, v in edges:
        a, b = max(v[0], v[1]), min(v[0], v[1])
        if a == b:
            raise FormatError("self-loop", path, no, 1)
        if (a, b) in seen:
            raise FormatError(f"duplicate edge ({a}, {b})", path, no, 1)
        seen.add((a, b))
        src.append(a - 1)
        dst.append(b - 1)
        ph.append(v[2] if len(v) == 3 else Phase.UNKNOWN)
    return LabeledGraph(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), np.array(ph, dtype=np.int8))


def format_report(report: EstimationReport) -> str:
    d = report.to_dict()
    lines = [f"{k} = {json.dumps(v)}" for k, v in d.items() if k != "diagnostics"]
    lines += [f"diagnostics.{k} = {json.dumps(v)}" for k, v in sorted(d["diagnostics"].items())]
    lines.append("json = " + json.dumps(d, sort_keys=True))
    return "\n".join(lines) + "\n"


def write_report(report: EstimationReport, path):
    Path(path).write_text(format_report(report))


def read_report(path) -> EstimationReport:
    text = Path(path).read_text()
    for no, line in enumerate(text.splitlines(), start=1):
        if line.startswith("json ="):
            try:
                return EstimationReport.from_dict(json.loads(line.split("=", 1)[1]))
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", path, no, exc.colno + 7) from None
            except (TypeError, ValueError) as exc:
                raise FormatError(str(exc), path, no) from None
    raise FormatError("no 'json = {...}' line found", path)
