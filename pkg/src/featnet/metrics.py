"""Graph and feature statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components, shortest_path

from .core import FeatureMatrix, LabeledGraph

__all__ = [
    "triplet_counts",
    "clustering_coefficient",
    "reachable_pairs",
    "degree_ccdf",
    "ComponentSummary",
    "component_summary",
    "SharedFeatureCurves",
    "shared_feature_distributions",
    "bfs_distances",
]


def triplet_counts(g: LabeledGraph) -> tuple[int, int]:
    """``(triangles, paths)``: node triples spanning 3 edges, and length-2 paths."""
    A = g.adjacency()
    deg = np.asarray(A.sum(axis=1)).ravel().astype(np.int64)
    paths = int((deg * (deg - 1)).sum() // 2)
    # sum of (A^2 * A) = trace(A^3) = 6 * triangles
    triangles = int(round(float((A @ A).multiply(A).sum()))) // 6
    return triangles, paths


def clustering_coefficient(g: LabeledGraph, convention: str = "sets") -> float:
    """Global clustering coefficient.

    With ``convention="sets"`` a connected triplet is a set of three nodes
    joined by two (open) or three (closed) edges, each set counted once:
    ``triangles / (open sets + triangles)``. ``"transitivity"`` gives the
    usual ``3 * triangles / paths of length 2``. Returns 0 without any
    connected triplet.
    """
    if convention not in ("sets", "transitivity"):
        raise ValueError(f"unknown convention {convention!r}")
    triangles, paths = triplet_counts(g)
    if paths == 0:
        return 0.0
    if convention == "sets":
        # every triangle contains 3 length-2 paths
        return triangles / (paths - 2 * triangles)
    return 3 * triangles / paths


def bfs_distances(g: LabeledGraph, sources=None) -> np.ndarray:
    """Hop distances from ``sources`` (0-based, default all nodes); ``inf`` if unreachable."""
    return shortest_path(g.adjacency(), method="D", unweighted=True, directed=False, indices=sources)


def reachable_pairs(g: LabeledGraph, h: int, chunk: int = 512) -> tuple[float, int]:
    """Fraction of unordered node pairs within ``h`` hops, and the largest such distance.

    The denominator is ``n choose 2`` including isolated nodes.
    """
    if h < 1:
        raise ValueError(f"h must be >= 1, got {h}")
    n = g.n
    total = n * (n - 1) // 2
    if total == 0:
        return 0.0, 0
    within = 0
    h_star = 0
    for start in range(0, n, chunk):
        src = np.arange(start, min(n, start + chunk))
        D = bfs_distances(g, src)
        # count each pair once: target index above source
        upper = np.arange(n)[None, :] > src[:, None]
        ok = upper & (D <= h)
        within += int(ok.sum())
        if ok.any():
            h_star = max(h_star, int(D[ok].max()))
    return within / total, h_star


def degree_ccdf(g: LabeledGraph) -> list[tuple[int, float]]:
    """``(d, fraction of nodes with degree >= d)`` for ``d = 0..max degree``."""
    if g.n == 0:
        return [(0, 1.0)]
    deg = g.degrees()
    counts = np.bincount(deg)
    at_least = counts[::-1].cumsum()[::-1] / g.n
    return [(int(d), float(f)) for d, f in enumerate(at_least)]


@dataclass(frozen=True)
class ComponentSummary:
    n_components: int
    largest_size: int
    largest_edges: int
    largest_diameter: int
    n_isolated: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.n_components, self.largest_size, self.largest_edges, self.largest_diameter, self.n_isolated)


def component_summary(g: LabeledGraph) -> ComponentSummary:
    if g.n == 0:
        return ComponentSummary(0, 0, 0, 0, 0)
    n_comp, labels = connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(labels, minlength=n_comp)
    big = int(np.argmax(sizes))
    members = np.flatnonzero(labels == big)
    edges_in = int(np.count_nonzero(labels[g.src] == big))
    if len(members) > 1:
        A = g.adjacency()[members][:, members]
        D = shortest_path(A, method="D", unweighted=True, directed=False)
        diameter = int(D.max())
    else:
        diameter = 0
    isolated = int(np.count_nonzero(g.degrees() == 0))
    return ComponentSummary(int(n_comp), int(sizes[big]), edges_in, diameter, isolated)


@dataclass(frozen=True)
class SharedFeatureCurves:
    """Per-``x`` counts of node pairs sharing exactly ``x`` features.

    ``linked[x]`` and ``unlinked[x]`` are raw pair counts; the fraction
    properties normalise them.
    """

    linked: np.ndarray
    unlinked: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return np.arange(len(self.linked))

    @property
    def linked_distribution(self) -> np.ndarray:
        tot = self.linked.sum()
        return self.linked / tot if tot else np.zeros(len(self.linked))

    @property
    def unlinked_distribution(self) -> np.ndarray:
        tot = self.unlinked.sum()
        return self.unlinked / tot if tot else np.zeros(len(self.unlinked))

    @property
    def link_fraction(self) -> np.ndarray:
        """Share of pairs with ``x`` common features that are linked (NaN where no pairs)."""
        tot = self.linked + self.unlinked
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.linked / np.maximum(tot, 1), np.nan)

    def rows(self):
        """Table rows ``(x, linked, unlinked, p_linked, p_unlinked, link_fraction)``."""
        ld, ud, lf = self.linked_distribution, self.unlinked_distribution, self.link_fraction
        return [
            (int(x), int(self.linked[x]), int(self.unlinked[x]), float(ld[x]), float(ud[x]), float(lf[x]))
            for x in self.x
        ]


def shared_feature_distributions(F: FeatureMatrix, g: LabeledGraph, S: np.ndarray | None = None) -> SharedFeatureCurves:
    if F.n_nodes != g.n:
        raise ValueError(f"feature matrix has {F.n_nodes} nodes but graph has {g.n}")
    if S is None:
        S = F.similarity_matrix()
    n = g.n
    lo_i, lo_j = np.tril_indices(n, k=-1)
    pair_s = S[lo_i, lo_j]
    size = int(pair_s.max()) + 1 if len(pair_s) else 1
    all_pairs = np.bincount(pair_s, minlength=size)
    linked = np.bincount(S[g.src, g.dst], minlength=size)
    return SharedFeatureCurves(linked.astype(np.int64), (all_pairs - linked).astype(np.int64))
