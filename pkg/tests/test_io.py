import datetime as dt
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from featnet import EstimationReport, FeatureMatrix, LabeledGraph, ModelParams, SigmoidParams
from featnet.dynamics import GenSeed, generate_features
from featnet.io import (
    DEFAULT_STOPWORDS,
    DocumentRecord,
    FormatError,
    build_coauthorship_graph,
    build_feature_matrix,
    extract_2grams,
    normalize_author,
    read_documents,
    read_feature_matrix,
    read_graph,
    read_report,
    write_documents,
    write_feature_matrix,
    write_graph,
    write_report,
)
from featnet.network import build_network


def doc(i, date, text="", title="", authors=()):
    return DocumentRecord(id=f"d{i}", entry_date=date, title=title, abstract=text, authors=authors)


def test_2gram_examples():
    assert extract_2grams("Lane departure warning.") == ["lane departure", "departure warning"]
    assert extract_2grams("This paper presents X.") == []
    assert extract_2grams("Word.") == []
    # sentence boundaries are never crossed
    assert extract_2grams("Lane keeping. Driver assistance") == ["lane keeping", "driver assistance"]


def test_2grams_title_and_abstract_separate():
    d = doc(1, "2012-01-01", text="Assistance systems.", title="Driver")
    assert extract_2grams(d) == ["assistance systems"]


def test_2grams_stopword_normalisation():
    assert "doesn't" in DEFAULT_STOPWORDS
    assert extract_2grams("It doesn't matter much.") == ["matter much"]
    assert extract_2grams("Radar sensor", stopwords=["radar"]) == []


words = st.text(alphabet="abcdefghij", min_size=1, max_size=6).filter(lambda w: w not in {"a", "be", "i", "if", "it"})


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(words, st.sampled_from([" ", " ", ", ", ". ", "! "])), min_size=1, max_size=15))
def test_2grams_case_insensitive_and_idempotent(parts):
    text = "".join(w + sep for w, sep in parts)
    grams = extract_2grams(text)
    assert extract_2grams(text.upper()) == grams
    assert len(set(grams)) == len(grams)
    for g in grams:
        assert extract_2grams(g) == [g]


def test_single_document_all_new():
    F, vocab, ids = build_feature_matrix([doc(1, "2010-05-01", "Lane departure warning system.")])
    assert F.shape == (1, 3)
    assert list(F.new_counts) == [3]
    assert vocab == ["lane departure", "departure warning", "warning system"]


def test_three_documents_left_ordered_and_chronological():
    docs = [
        doc("c", "2011-03-01", "Driver assistance systems."),
        doc("a", "2009-01-01", "Lane departure warning."),
        doc("b", "2010-01-01", "Departure warning for driver assistance."),
    ]
    F, vocab, ids = build_feature_matrix(docs)
    assert ids == ["da", "db", "dc"]
    assert list(F.cum_counts) == [2, 3, 4]
    assert F.similarity_matrix()[2, 1] == 1


def test_identical_dates_are_stable():
    docs = [doc(i, "2011-01-01", f"Topic{i} word{i}.") for i in range(5)]
    F1, v1, ids1 = build_feature_matrix(docs)
    F2, v2, ids2 = build_feature_matrix(list(docs))
    assert ids1 == [f"d{i}" for i in range(5)]
    assert F1 == F2 and v1 == v2


def test_coauthorship():
    docs = [
        doc(1, "2010-01-01", authors=("Anaya, J. J.", "Smith, A.")),
        doc(2, "2011-01-01", authors=("j. j. anaya",)),
        doc(3, "2012-01-01", authors=("Jose Javier Anaya",)),
        doc(4, "2013-01-01", authors="B. Jones; A. Smith"),
    ]
    g = build_coauthorship_graph(docs)
    assert g.edges() == [(2, 1, 0), (4, 1, 0)]
    assert not g.has_phase_labels
    assert normalize_author("Anaya, J.J.") == "j. j. anaya"


def test_document_validation():
    with pytest.raises(ValueError):
        DocumentRecord("x", "not-a-date")
    assert DocumentRecord("x", dt.datetime(2011, 2, 3, 4, 5)).entry_date == dt.date(2011, 2, 3)


def test_documents_round_trip(tmp_path):
    docs = [doc(1, "2010-01-01", "Some text.", "A title", ("X, Y", "Z")), doc(2, "2010-01-02")]
    write_documents(tmp_path / "d.jsonl", docs)
    assert read_documents(tmp_path / "d.jsonl") == docs
    (tmp_path / "d.csv").write_text("id,entry_date,title,abstract,authors\n1,2010-01-01,T,Lane keeping.,A B;C D\n")
    (rec,) = read_documents(tmp_path / "d.csv")
    assert rec.authors == ("A B", "C D")


def test_documents_errors(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "1", "entry_date": "2010-01-01"}\n{oops\n')
    with pytest.raises(FormatError) as exc:
        read_documents(bad)
    assert exc.value.line == 2
    dup = tmp_path / "dup.jsonl"
    dup.write_text('{"id": "1", "entry_date": "2010-01-01"}\n{"id": "1", "entry_date": "2010-01-02"}\n')
    with pytest.raises(FormatError, match="duplicate"):
        read_documents(dup)
    missing = tmp_path / "m.jsonl"
    missing.write_text('{"id": "1"}\n')
    with pytest.raises(FormatError, match="entry_date"):
        read_documents(missing)


def test_feature_matrix_round_trip(tmp_path, example_matrix):
    path = tmp_path / "F.txt"
    write_feature_matrix(example_matrix, path)
    assert path.read_text().splitlines()[:2] == ["3 8", "1 3 1 2 3"]
    assert read_feature_matrix(path) == example_matrix


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 40))
def test_generated_round_trips(tmp_path_factory, seed, n):
    d = tmp_path_factory.mktemp("rt")
    F = generate_features(n, ModelParams(3.0, 0.5, 0.3), GenSeed(seed))
    write_feature_matrix(F, d / "F.txt")
    assert read_feature_matrix(d / "F.txt") == F
    g = build_network(F, SigmoidParams(1.0, 1.0), 0.5, GenSeed(seed))
    write_graph(g, d / "g.tsv")
    assert read_graph(d / "g.tsv") == g


def test_feature_matrix_errors(tmp_path):
    empty = tmp_path / "e.txt"
    empty.write_text("")
    with pytest.raises(FormatError, match="empty"):
        read_feature_matrix(empty)
    bad = tmp_path / "b.txt"
    bad.write_text("2 3\n1 2 1 2\n2 1 1 x\n")
    with pytest.raises(FormatError) as exc:
        read_feature_matrix(bad)
    assert exc.value.line == 3
    not_left = tmp_path / "l.txt"
    not_left.write_text("2 3\n1 1 1\n2 1 3\n")
    with pytest.raises((FormatError, ValueError)):
        read_feature_matrix(not_left)


def test_graph_round_trip_keeps_phases(tmp_path):
    g = LabeledGraph.from_edges(5, [(2, 1, 1), (3, 1, 1), (3, 2, 2), (5, 4, 1)])
    write_graph(g, tmp_path / "g.tsv")
    assert read_graph(tmp_path / "g.tsv") == g
    (tmp_path / "h.tsv").write_text("2\t1\n3\t2\n")
    h = read_graph(tmp_path / "h.tsv", n=4)
    assert h.n == 4 and not h.has_phase_labels
    (tmp_path / "x.tsv").write_text("# nodes 3\n2\t2\t1\n")
    with pytest.raises((FormatError, ValueError)):
        read_graph(tmp_path / "x.tsv")


def test_report_round_trip(tmp_path):
    r = EstimationReport(alpha_hat=5.5, beta_hat=0.75, delta_hat=0.01, p_hat=None, k_hat=1.2, theta_hat=9.0,
                         diagnostics={"beta_r2": 0.99})
    write_report(r, tmp_path / "r.txt")
    text = (tmp_path / "r.txt").read_text()
    assert "alpha_hat = 5.5" in text
    assert json.loads(text.splitlines()[-1].split("=", 1)[1])["beta_hat"] == 0.75
    assert read_report(tmp_path / "r.txt") == r
