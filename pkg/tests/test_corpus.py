from featnet.corpus import load_bundled_corpus, synthetic_corpus
from featnet.estimators import TwoGramFeaturizer


def test_bundled_corpus_is_regenerable():
    assert synthetic_corpus() == load_bundled_corpus()


def test_bundled_corpus_shape():
    docs = load_bundled_corpus()
    assert len(docs) == 200
    t = TwoGramFeaturizer()
    F = t.fit_transform(docs)
    assert F.n_nodes == 200
    # filler sentences contribute nothing once stopwords are removed
    assert all(" " in w for w in t.get_feature_names_out())
    assert t.coauthorship_graph(docs).n_edges > 0
