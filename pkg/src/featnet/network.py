"""Two-phase construction of the node-node graph from a feature matrix."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .core import FeatureMatrix, LabeledGraph, Phase, SigmoidParams, phi
from .dynamics import GenSeed

__all__ = [
    "build_network",
    "second_phase_link_probability",
    "similarity_histogram",
    "expected_first_phase_links",
    "calibrate_theta",
]


def second_phase_link_probability(c, p: float):
    """Chance that at least one of ``c`` common neighbours closes the triangle."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    c = np.asarray(c)
    if (c < 0).any():
        raise ValueError("common-neighbour count must be non-negative")
    out = -np.expm1(c * np.log1p(-p)) if p < 1 else (c > 0).astype(float)
    return float(out) if np.ndim(out) == 0 else out


def build_network(
    F: FeatureMatrix,
    sp_params: SigmoidParams,
    p: float,
    seed: GenSeed | int,
    similarity: np.ndarray | None = None,
) -> LabeledGraph:
    """Attach nodes in arrival order.

    At step ``i`` every earlier node ``j`` is linked with probability
    ``phi(S_ij)`` (first phase). Each earlier node left unlinked is then
    linked with probability ``1 - (1 - p)**C_ij`` where ``C_ij`` counts
    neighbours of ``j`` (edges from steps before ``i``) that ``i`` picked in
    its first phase.

    Draws per step: ``i - 1`` uniforms for the first phase in ascending
    ``j``, then one uniform per second-phase candidate with ``C_ij > 0`` in
    ascending ``j``. One uniform per candidate is equivalent in law to the
    per-neighbour Bernoulli(p) trials.

    ``similarity`` may pass a precomputed ``F.similarity_matrix()``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not isinstance(seed, GenSeed):
        seed = GenSeed(int(seed))
    rng = seed.rng(GenSeed.NETWORK)
    n = F.n_nodes
    S = F.similarity_matrix() if similarity is None else similarity
    adj = np.zeros((n, n), dtype=bool)
    src, dst, tag = [], [], []
    for i in range(1, n):
        first = np.flatnonzero(rng.random(i) < phi(S[i, :i], sp_params))
        if len(first):
            adj[i, first] = adj[first, i] = True
            src.append(np.full(len(first), i))
            dst.append(first)
            tag.append(np.full(len(first), Phase.FIRST, dtype=np.int8))
        if p > 0 and len(first):
            # adj[:i, :i] still holds only edges from earlier steps
            common = adj[:i][:, first].sum(axis=1)
            common[first] = 0
            cand = np.flatnonzero(common)
            if len(cand):
                prob = second_phase_link_probability(common[cand], p)
                second = cand[rng.random(len(cand)) < prob]
                adj[i, second] = adj[second, i] = True
                src.append(np.full(len(second), i))
                dst.append(second)
                tag.append(np.full(len(second), Phase.SECOND, dtype=np.int8))
    if not src:
        return LabeledGraph.empty(n)
    return LabeledGraph(n, np.concatenate(src), np.concatenate(dst), np.concatenate(tag))


def similarity_histogram(F: FeatureMatrix, S: np.ndarray | None = None) -> np.ndarray:
    """``hist[s]`` = number of node pairs ``j < i`` sharing exactly ``s`` features."""
    if S is None:
        S = F.similarity_matrix()
    lower = S[np.tril_indices(F.n_nodes, k=-1)]
    return np.bincount(lower, minlength=1).astype(np.int64)


def expected_first_phase_links(hist: np.ndarray, sp_params: SigmoidParams) -> float:
    """Sum of ``phi(S_ij)`` over all pairs, from a similarity histogram."""
    s = np.arange(len(hist))
    return float(np.dot(hist, phi(s, sp_params)))


def calibrate_theta(
    F: FeatureMatrix | None,
    k_steep: float,
    ell: float,
    hist: np.ndarray | None = None,
    xtol: float = 1e-10,
) -> SigmoidParams:
    """Threshold at which the expected first-phase link count equals ``ell``.

    The expected count is strictly decreasing in ``theta`` and spans
    ``(0, n_pairs)``, so a bracketing root search always succeeds for
    ``0 < ell < n_pairs``.
    """
    if hist is None:
        if F is None:
            raise ValueError("either F or hist is required")
        hist = similarity_histogram(F)
    n_pairs = int(hist.sum())
    if not 0 < ell < n_pairs:
        raise ValueError(f"ell must lie strictly between 0 and the number of pairs {n_pairs}, got {ell}")

    def resid(theta):
        return expected_first_phase_links(hist, SigmoidParams(k_steep, theta)) - ell

    top = len(hist) - 1
    lo, hi = -1.0, top + 1.0
    step = max(1.0, 10.0 / k_steep)
    while resid(lo) < 0:
        lo -= step
        step *= 2
    step = max(1.0, 10.0 / k_steep)
    while resid(hi) > 0:
        hi += step
        step *= 2
    theta = brentq(resid, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return SigmoidParams(k_steep, theta)
