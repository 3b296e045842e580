import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from featnet import LabeledGraph, ModelParams, SigmoidParams, phi
from featnet.dynamics import GenSeed, generate_features
from featnet.metrics import (
    clustering_coefficient,
    component_summary,
    degree_ccdf,
    reachable_pairs,
    shared_feature_distributions,
    triplet_counts,
)
from featnet.network import build_network


def graph(n, edges):
    return LabeledGraph.from_edges(n, [(a, b, 1) for a, b in edges])


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(zip(g.src.tolist(), g.dst.tolist()))
    return G


def naive_sets_clustering(g):
    E = {frozenset(e) for e in zip(g.src.tolist(), g.dst.tolist())}
    closed = open_ = 0
    for trio in itertools.combinations(range(g.n), 3):
        k = sum(frozenset(p) in E for p in itertools.combinations(trio, 2))
        closed += k == 3
        open_ += k == 2
    return closed / (closed + open_) if closed + open_ else 0.0


edge_lists = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.sets(st.tuples(st.integers(1, n), st.integers(1, n)).filter(lambda e: e[0] != e[1]).map(lambda e: (max(e), min(e))), max_size=30),
    )
)


def test_clustering_examples():
    assert clustering_coefficient(graph(3, [(2, 1), (3, 1), (3, 2)])) == 1.0
    assert clustering_coefficient(graph(3, [(2, 1), (3, 2)])) == 0.0
    assert clustering_coefficient(LabeledGraph.empty(5)) == 0.0
    assert triplet_counts(graph(3, [(2, 1), (3, 1), (3, 2)])) == (1, 3)
    with pytest.raises(ValueError):
        clustering_coefficient(graph(3, [(2, 1)]), convention="nope")


def test_conventions_differ_on_bowtie():
    # two triangles sharing node 3: 2 closed sets, 4 open sets; 10 paths
    g = graph(5, [(2, 1), (3, 1), (3, 2), (4, 3), (5, 3), (5, 4)])
    assert clustering_coefficient(g) == pytest.approx(2 / 6)
    assert clustering_coefficient(g, "transitivity") == pytest.approx(6 / 10)


@settings(max_examples=60, deadline=None)
@given(data=edge_lists, perm_seed=st.integers(0, 1000))
def test_clustering_against_oracles(data, perm_seed):
    n, edges = data
    g = graph(n, sorted(edges))
    c = clustering_coefficient(g)
    assert 0.0 <= c <= 1.0
    assert c == pytest.approx(naive_sets_clustering(g))
    assert clustering_coefficient(g, "transitivity") == pytest.approx(nx.transitivity(to_nx(g)))
    perm = np.random.default_rng(perm_seed).permutation(n) + 1
    relabelled = graph(n, [(perm[a - 1], perm[b - 1]) for a, b in edges])
    assert clustering_coefficient(relabelled) == pytest.approx(c)


def test_reachable_examples():
    K5 = graph(5, list(itertools.combinations(range(1, 6), 2)))
    assert reachable_pairs(K5, 20) == (1.0, 1)
    path = graph(4, [(2, 1), (3, 2), (4, 3)])
    assert reachable_pairs(path, 1) == (pytest.approx(3 / 6), 1)
    assert reachable_pairs(path, 2) == (pytest.approx(5 / 6), 2)
    assert reachable_pairs(LabeledGraph.empty(4), 3) == (0.0, 0)
    with pytest.raises(ValueError):
        reachable_pairs(path, 0)


@settings(max_examples=40, deadline=None)
@given(data=edge_lists)
def test_reachable_against_networkx(data):
    n, edges = data
    g = graph(n, sorted(edges))
    lengths = dict(nx.all_pairs_shortest_path_length(to_nx(g)))
    prev = 0.0
    for h in range(1, n + 1):
        frac, h_star = reachable_pairs(g, h, chunk=3)
        d = [lengths[a][b] for a in range(n) for b in range(a + 1, n) if b in lengths[a] and lengths[a][b] <= h]
        assert frac == pytest.approx(len(d) / (n * (n - 1) / 2))
        assert h_star == (max(d) if d else 0)
        assert frac >= prev
        prev = frac
    # beyond every diameter: all connected pairs
    connected = sum(len(c) * (len(c) - 1) // 2 for c in nx.connected_components(to_nx(g)))
    assert reachable_pairs(g, n)[0] == pytest.approx(connected / (n * (n - 1) / 2))


def test_ccdf_examples():
    assert degree_ccdf(LabeledGraph.empty(4)) == [(0, 1.0)]
    star = graph(4, [(2, 1), (3, 1), (4, 1)])
    cc = dict(degree_ccdf(star))
    assert cc[0] == 1.0 and cc[1] == 1.0 and cc[3] == 0.25
    cycle = graph(5, [(2, 1), (3, 2), (4, 3), (5, 4), (5, 1)])
    assert degree_ccdf(cycle) == [(0, 1.0), (1, 1.0), (2, 1.0)]


@settings(max_examples=40, deadline=None)
@given(data=edge_lists)
def test_ccdf_and_components_properties(data):
    n, edges = data
    g = graph(n, sorted(edges))
    cc = degree_ccdf(g)
    assert cc[0] == (0, 1.0)
    vals = [f for _, f in cc]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    s = component_summary(g)
    G = to_nx(g)
    comps = sorted(nx.connected_components(G), key=len, reverse=True)
    assert s.n_components == len(comps)
    assert s.largest_size == len(comps[0])
    assert s.n_isolated == sum(1 for v in G if G.degree(v) == 0)
    # sizes of components sum to n, edges sum to |E| (checked through networkx)
    assert sum(len(c) for c in comps) == n
    assert sum(G.subgraph(c).number_of_edges() for c in comps) == g.n_edges
    big = [c for c in comps if len(c) == s.largest_size]
    assert s.largest_edges in {G.subgraph(c).number_of_edges() for c in big}
    assert s.largest_diameter in {nx.diameter(G.subgraph(c)) for c in big}
    assert component_summary(g) == s


def test_component_examples():
    assert component_summary(graph(2, [(2, 1)])).as_tuple() == (1, 2, 1, 1, 0)
    assert component_summary(LabeledGraph.empty(6)).as_tuple() == (6, 1, 0, 0, 6)


def test_shared_feature_curves_definitional(example_matrix):
    # S = 2 for all three pairs
    g = graph(3, [(2, 1)])
    c = shared_feature_distributions(example_matrix, g)
    assert list(c.linked) == [0, 0, 1]
    assert list(c.unlinked) == [0, 0, 2]
    assert c.link_fraction[2] == pytest.approx(1 / 3)
    assert np.isnan(c.link_fraction[0])
    assert c.linked.sum() + c.unlinked.sum() == 3
    assert c.rows()[2] == (2, 1, 2, 1.0, 1.0, pytest.approx(1 / 3))
    with pytest.raises(ValueError):
        shared_feature_distributions(example_matrix, LabeledGraph.empty(4))


def test_link_fraction_tracks_phi():
    F = generate_features(300, ModelParams(6.0, 0.6, 0.1), GenSeed(11))
    sp = SigmoidParams(1.0, 6.0)
    S = F.similarity_matrix()
    linked = unlinked = 0
    for r in range(100):
        c = shared_feature_distributions(F, build_network(F, sp, 0.0, GenSeed(11, r), similarity=S), S)
        linked = linked + c.linked
        unlinked = unlinked + c.unlinked
    tot = linked + unlinked
    x = np.flatnonzero(tot >= 100)
    frac = linked[x] / tot[x]
    expected = phi(x.astype(float), sp)
    se = np.sqrt(expected * (1 - expected) / tot[x]) + 1e-12
    assert (np.abs(frac - expected) < 5 * se + 1e-9).all()
