"""Stochastic growth of the node-feature bipartite matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMatrix, ModelParams

__all__ = ["GenSeed", "lambda_i", "generate_features", "uniformity_measure"]


@dataclass(frozen=True)
class GenSeed:
    """Root seed plus a realization counter.

    Each ``(seed, stream_id, purpose)`` triple maps to an independent
    ``numpy`` generator through :class:`numpy.random.SeedSequence`, so the
    output of realization ``r`` does not depend on how many others ran
    before it or in which worker.
    """

    seed: int
    stream_id: int = 0

    # purposes
    FEATURES = 0
    NETWORK = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be non-negative, got {self.stream_id}")

    def rng(self, purpose: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, purpose))
        return np.random.Generator(np.random.PCG64(ss))


def lambda_i(alpha: float, beta: float, i: int) -> float:
    """Poisson rate of new features brought by node ``i``."""
    if i < 1:
        raise ValueError(f"node index must be >= 1, got {i}")
    return alpha / i ** (1.0 - beta)


def generate_features(n: int, params: ModelParams, seed: GenSeed | int) -> FeatureMatrix:
    """Grow a feature matrix with ``n`` nodes.

    Node 1 brings ``Poi(alpha)`` features. Every later node ``i`` first adopts
    each existing feature independently with probability
    ``delta/2 + (1 - delta) * count_k / i`` (``count_k`` = holders among the
    first ``i - 1`` nodes), then appends ``Poi(alpha / i**(1 - beta))`` new ones.

    Random draws per step: one uniform per existing feature in column order,
    then the Poisson draw.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not isinstance(seed, GenSeed):
        seed = GenSeed(int(seed))
    rng = seed.rng(GenSeed.FEATURES)
    alpha, delta = params.alpha, params.delta

    # grows by doubling; holds per-feature holder counts
    counts = np.zeros(64, dtype=np.int64)
    L = int(rng.poisson(alpha))
    counts = _ensure(counts, L)
    counts[:L] = 1
    rows = [np.arange(L, dtype=np.int64)]
    new_counts = [L]
    for i in range(2, n + 1):
        if L:
            prob = delta / 2.0 + (1.0 - delta) * counts[:L] / i
            adopted = np.flatnonzero(rng.random(L) < prob)
        else:
            adopted = np.zeros(0, dtype=np.int64)
        n_new = int(rng.poisson(lambda_i(alpha, params.beta, i)))
        counts = _ensure(counts, L + n_new)
        counts[adopted] += 1
        counts[L : L + n_new] = 1
        rows.append(np.concatenate([adopted, np.arange(L, L + n_new, dtype=np.int64)]))
        new_counts.append(n_new)
        L += n_new
    return FeatureMatrix(tuple(rows), np.asarray(new_counts, dtype=np.int64))


def _ensure(buf: np.ndarray, size: int) -> np.ndarray:
    if size <= len(buf):
        return buf
    grown = np.zeros(max(size, 2 * len(buf)), dtype=buf.dtype)
    grown[: len(buf)] = buf
    return grown


def uniformity_measure(F: FeatureMatrix) -> float:
    """Difference in mean adoption fraction between older and newer features.

    A feature introduced by node ``i_k`` could have been held by nodes
    ``i_k..n``; its adoption fraction is holders over that count (the
    introducer counts as a holder). The result is the mean fraction over the
    first ``floor(L_n / 2)`` features minus the mean over the rest.
    """
    L = F.n_features
    if L < 2:
        raise ValueError(f"uniformity needs at least 2 features, got {L}")
    eligible = F.n_nodes - F.introducers()
    frac = F.adoption_counts() / eligible
    half = L // 2
    return float(frac[:half].mean() - frac[half:].mean())
