import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from featnet import LabeledGraph, ModelParams, Phase, SigmoidParams, phi
from featnet.dynamics import GenSeed, generate_features
from featnet.network import (
    build_network,
    calibrate_theta,
    expected_first_phase_links,
    second_phase_link_probability,
    similarity_histogram,
)


def naive_network(F, sp, p, seed):
    """Pair-by-pair reference using neighbour sets and the same random stream."""
    rng = GenSeed(seed).rng(GenSeed.NETWORK)
    S = F.similarity_matrix()
    nbrs = [set() for _ in range(F.n_nodes)]
    edges = {}
    for i in range(1, F.n_nodes):
        u = rng.random(i)
        first = [j for j in range(i) if u[j] < phi(float(S[i, j]), sp)]
        # neighbour sets as they were before step i
        before = [set(nb) for nb in nbrs[:i]]
        for j in first:
            edges[(i, j)] = Phase.FIRST
        cand = [j for j in range(i) if j not in first and len(before[j] & set(first)) > 0]
        if p > 0 and first and cand:
            v = rng.random(len(cand))
            for x, j in zip(v, cand):
                c = len(before[j] & set(first))
                if x < 1 - (1 - p) ** c:
                    edges[(i, j)] = Phase.SECOND
        for (a, b) in edges:
            if a == i:
                nbrs[a].add(b)
                nbrs[b].add(a)
    return edges


def graph_dict(g):
    return {(int(a), int(b)): int(t) for a, b, t in zip(g.src, g.dst, g.phase)}


def test_second_phase_probability_examples():
    assert second_phase_link_probability(0, 0.7) == 0
    assert second_phase_link_probability(1, 0.3) == pytest.approx(0.3)
    assert second_phase_link_probability(2, 0.5) == pytest.approx(0.75)
    assert second_phase_link_probability(3, 1.0) == 1.0
    assert second_phase_link_probability(0, 1.0) == 0.0
    with pytest.raises(ValueError):
        second_phase_link_probability(1, 1.2)
    with pytest.raises(ValueError):
        second_phase_link_probability(-1, 0.2)


@pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
def test_matches_naive_reference(p):
    F = generate_features(60, ModelParams(4.0, 0.6, 0.2), GenSeed(2))
    sp = SigmoidParams(1.5, 3.0)
    g = build_network(F, sp, p, GenSeed(2))
    assert graph_dict(g) == {k: int(v) for k, v in naive_network(F, sp, p, 2).items()}


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.floats(0, 1), K=st.floats(0.1, 5), theta=st.floats(0, 6))
def test_structural_invariants(seed, p, K, theta):
    F = generate_features(40, ModelParams(3.0, 0.5, 0.3), GenSeed(seed))
    sp = SigmoidParams(K, theta)
    g = build_network(F, sp, p, GenSeed(seed))
    assert g.has_phase_labels
    assert (g.src > g.dst).all()
    first = g.first_phase()
    # A' subset of A; dropping second-phase edges gives exactly A'
    assert set(graph_dict(first)) <= set(graph_dict(g))
    mask = g.phase == Phase.FIRST
    assert first == LabeledGraph(g.n, g.src[mask], g.dst[mask], g.phase[mask])
    if p == 0:
        assert (g.phase == Phase.FIRST).all()
        assert g == build_network(F, sp, 0.0, GenSeed(seed))
    # every second-phase edge had a common neighbour via i's first-phase picks
    A = set(graph_dict(g))
    for i, j, t in zip(g.src, g.dst, g.phase):
        if t == Phase.SECOND:
            first_i = {b for (a, b) in graph_dict(first) if a == i}
            nb_j = {b for (a, b) in A if a == j and a < i} | {a for (a, b) in A if b == j and a < i}
            assert first_i & nb_j


def test_p_one_links_every_candidate():
    F = generate_features(50, ModelParams(4.0, 0.5, 0.2), GenSeed(8))
    g = build_network(F, SigmoidParams(1.0, 3.0), 1.0, GenSeed(8))
    adj = {i: set() for i in range(50)}
    for i, j, t in zip(g.src, g.dst, g.phase):
        adj[int(i)].add(int(j)), adj[int(j)].add(int(i))
    for i in range(1, 50):
        first_i = {int(j) for a, j, t in zip(g.src, g.dst, g.phase) if a == i and t == Phase.FIRST}
        for j in range(i):
            before = {m for m in adj[j] if m < i}
            if j not in first_i and before & first_i:
                assert j in adj[i]


def test_first_node_has_no_links_at_arrival():
    F = generate_features(5, ModelParams(3.0, 0.5, 0.2), GenSeed(1))
    g = build_network(F, SigmoidParams(1.0, 0.0), 0.5, GenSeed(1))
    # every edge (i, j) has i > j, so node 1 never appears as the new endpoint
    assert (g.src >= 1).all()


def test_first_phase_mean_matches_expectation():
    F = generate_features(60, ModelParams(4.0, 0.6, 0.2), GenSeed(4))
    sp = SigmoidParams(1.0, 4.0)
    S = F.similarity_matrix()
    lo = np.tril_indices(60, k=-1)
    probs = phi(S[lo].astype(float), sp)
    exact = probs.sum()
    hist = similarity_histogram(F)
    assert expected_first_phase_links(hist, sp) == pytest.approx(exact)
    R = 400
    counts = [build_network(F, sp, 0.0, GenSeed(100, r), similarity=S).n_edges for r in range(R)]
    se = np.sqrt((probs * (1 - probs)).sum() / R)
    assert abs(np.mean(counts) - exact) < 4 * se


def test_calibrate_theta_hits_ell():
    F = generate_features(150, ModelParams(5.0, 0.5, 0.1), GenSeed(6))
    hist = similarity_histogram(F)
    for K in (0.5, 1.0, 10.0):
        sp = calibrate_theta(F, K, 300.0)
        assert sp.k_steep == K
        assert expected_first_phase_links(hist, sp) == pytest.approx(300.0, rel=1e-8)
    with pytest.raises(ValueError):
        calibrate_theta(F, 1.0, float(hist.sum()))
    with pytest.raises(ValueError):
        calibrate_theta(F, 1.0, 0.0)


def test_similarity_histogram_counts_pairs(example_matrix):
    hist = similarity_histogram(example_matrix)
    assert list(hist) == [0, 0, 3]
