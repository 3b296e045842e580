"""Domain types for the growing feature-structure network model.

Public node and feature indices are 1-based; arrays stored on the objects
are 0-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "FeatureMatrix",
    "ModelParams",
    "SigmoidParams",
    "LabeledGraph",
    "EstimationReport",
    "Phase",
    "similarity",
    "inclusion_probability",
    "phi",
]

# exp() overflows just above 709; clamp well inside that
_EXP_CLAMP = 700.0


class Phase(enum.IntEnum):
    """Provenance tag for an edge."""

    UNKNOWN = 0
    FIRST = 1
    SECOND = 2


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Left-ordered binary node-by-feature matrix stored as sparse rows.

    ``rows[i]`` holds the sorted 0-based feature columns of node ``i + 1``.
    ``new_counts[i]`` is the number of features introduced by that node,
    which by left-ordering are exactly the columns
    ``cum_counts[i-1] .. cum_counts[i] - 1``.
    """

    rows: tuple[np.ndarray, ...]
    new_counts: np.ndarray

    def __post_init__(self):
        rows = tuple(_freeze(np.asarray(r, dtype=np.int64)) for r in self.rows)
        new_counts = np.asarray(self.new_counts, dtype=np.int64)
        if new_counts.ndim != 1 or len(new_counts) != len(rows):
            raise ValueError(
                f"new_counts has length {len(new_counts)} but there are {len(rows)} rows"
            )
        if (new_counts < 0).any():
            raise ValueError("new feature counts must be non-negative")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "new_counts", _freeze(new_counts))
        object.__setattr__(self, "cum_counts", _freeze(np.cumsum(new_counts)))
        self._check_left_ordering()

    cum_counts: np.ndarray = field(init=False, repr=False)

    def _check_left_ordering(self):
        prev = 0
        for i, (row, cum) in enumerate(zip(self.rows, self.cum_counts)):
            node = i + 1
            if row.ndim != 1:
                raise ValueError(f"row of node {node} is not one-dimensional")
            if len(row) > 1 and (np.diff(row) <= 0).any():
                raise ValueError(f"row of node {node} is not strictly increasing")
            if len(row) and row[0] < 0:
                raise ValueError(f"row of node {node} has a negative feature index")
            if len(row) and row[-1] >= cum:
                raise ValueError(
                    f"node {node} references feature {row[-1] + 1} introduced after it "
                    f"(L_{node} = {cum})"
                )
            n_new = cum - prev
            # new block must be fully present: the last n_new entries are prev..cum-1
            if n_new and (len(row) < n_new or row[len(row) - n_new] != prev):
                raise ValueError(
                    f"node {node} does not hold its own new features {prev + 1}..{cum}"
                )
            prev = cum

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], one_based: bool = True) -> "FeatureMatrix":
        """Build from per-node feature index collections, inferring ``N_i``.

        The input must already be left-ordered; new features of node ``i``
        are the indices above every index used by nodes ``< i``.
        """
        offset = 1 if one_based else 0
        arrays = []
        new_counts = []
        seen = 0
        for row in rows:
            arr = np.unique(np.fromiter((int(k) - offset for k in row), dtype=np.int64))
            top = int(arr[-1]) + 1 if len(arr) else 0
            new_counts.append(max(0, top - seen))
            seen = max(seen, top)
            arrays.append(arr)
        return cls(tuple(arrays), np.asarray(new_counts, dtype=np.int64))

    @classmethod
    def from_dense(cls, dense) -> "FeatureMatrix":
        dense = np.asarray(dense).astype(bool)
        if dense.ndim != 2:
            raise ValueError("dense feature matrix must be two-dimensional")
        return cls.from_rows((np.flatnonzero(r) for r in dense), one_based=False)

    @property
    def n_nodes(self) -> int:
        return len(self.rows)

    @property
    def n_features(self) -> int:
        """``L_n``, the number of distinct features observed so far."""
        return int(self.cum_counts[-1]) if len(self.cum_counts) else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_nodes, self.n_features

    def row(self, i: int) -> np.ndarray:
        """1-based feature indices of node ``i`` (1-based)."""
        self._check_node(i)
        return self.rows[i - 1] + 1

    def _check_node(self, i: int):
        if not 1 <= i <= self.n_nodes:
            raise IndexError(f"node {i} outside 1..{self.n_nodes}")

    def row_sizes(self) -> np.ndarray:
        return np.fromiter((len(r) for r in self.rows), dtype=np.int64, count=self.n_nodes)

    def to_sparse(self) -> sp.csr_matrix:
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.row_sizes())
        indices = np.concatenate(self.rows) if self.rows else np.zeros(0, dtype=np.int64)
        data = np.ones(len(indices), dtype=np.int32)
        return sp.csr_matrix((data, indices, indptr), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray().astype(bool)

    def similarity_matrix(self) -> np.ndarray:
        """All pairwise counts of shared features as a dense ``n x n`` array."""
        X = self.to_sparse()
        return np.asarray((X @ X.T).toarray(), dtype=np.int64)

    def adoption_counts(self) -> np.ndarray:
        """Number of nodes holding each feature (length ``L_n``)."""
        if not self.n_features:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(np.concatenate(self.rows), minlength=self.n_features)

    def introducers(self) -> np.ndarray:
        """0-based index of the node that introduced each feature."""
        return np.repeat(np.arange(self.n_nodes), self.new_counts)

    def __eq__(self, other):
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and np.array_equal(self.new_counts, other.new_counts)
            and all(np.array_equal(a, b) for a, b in zip(self.rows, other.rows))
        )

    def __repr__(self):
        return f"FeatureMatrix(n_nodes={self.n_nodes}, n_features={self.n_features})"


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    delta: float
    p: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha}")
        for name in ("beta", "delta", "p"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class SigmoidParams:
    """Steepness ``k_steep`` and threshold ``theta`` of the link sigmoid."""

    k_steep: float
    theta: float

    def __post_init__(self):
        if not (self.k_steep > 0 and math.isfinite(self.k_steep)):
            raise ValueError(f"k_steep must be positive and finite, got {self.k_steep}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph whose edges carry a :class:`Phase` tag.

    Edges are stored once, oriented ``src > dst`` (0-based), i.e. each edge
    is attributed to the later of its two endpoints.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        src = np.asarray(self.src, dtype=np.int64).ravel()
        dst = np.asarray(self.dst, dtype=np.int64).ravel()
        phase = np.asarray(self.phase, dtype=np.int8).ravel()
        if not (len(src) == len(dst) == len(phase)):
            raise ValueError("src, dst and phase must have equal length")
        if self.n < 0:
            raise ValueError("node count must be non-negative")
        if (src == dst).any():
            raise ValueError("self-loops are not allowed")
        hi, lo = np.maximum(src, dst), np.minimum(src, dst)
        if len(src) and (lo.min() < 0 or hi.max() >= self.n):
            raise ValueError(f"edge endpoint outside 1..{self.n}")
        if not np.isin(phase, [p.value for p in Phase]).all():
            raise ValueError("unknown phase tag")
        order = np.lexsort((lo, hi))
        hi, lo, phase = hi[order], lo[order], phase[order]
        if len(hi) > 1 and ((np.diff(hi) == 0) & (np.diff(lo) == 0)).any():
            raise ValueError("duplicate edge")
        object.__setattr__(self, "src", _freeze(hi))
        object.__setattr__(self, "dst", _freeze(lo))
        object.__setattr__(self, "phase", _freeze(phase))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], one_based: bool = True) -> "LabeledGraph":
        """Build from ``(i, j)`` or ``(i, j, phase)`` tuples."""
        offset = 1 if one_based else 0
        src, dst, phase = [], [], []
        for e in edges:
            src.append(int(e[0]) - offset)
            dst.append(int(e[1]) - offset)
            phase.append(int(e[2]) if len(e) > 2 else Phase.UNKNOWN)
        return cls(n, np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), np.array(phase, dtype=np.int8))

    @classmethod
    def empty(cls, n: int) -> "LabeledGraph":
        z = np.zeros(0, dtype=np.int64)
        return cls(n, z, z, z.astype(np.int8))

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def has_phase_labels(self) -> bool:
        return bool(self.n_edges == 0 or (self.phase != Phase.UNKNOWN).all())

    def edges(self, one_based: bool = True) -> list[tuple[int, int, int]]:
        off = 1 if one_based else 0
        return [(int(a) + off, int(b) + off, int(c)) for a, b, c in zip(self.src, self.dst, self.phase)]

    def adjacency(self, phases: Iterable[int] | None = None) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency, optionally restricted to some phases."""
        mask = np.ones(self.n_edges, dtype=bool) if phases is None else np.isin(self.phase, list(phases))
        s, d = self.src[mask], self.dst[mask]
        data = np.ones(2 * len(s), dtype=np.int32)
        A = sp.coo_matrix(
            (data, (np.concatenate([s, d]), np.concatenate([d, s]))), shape=(self.n, self.n)
        )
        return A.tocsr()

    def first_phase(self) -> "LabeledGraph":
        """The subgraph of first-phase edges (A')."""
        mask = self.phase == Phase.FIRST
        return LabeledGraph(self.n, self.src[mask], self.dst[mask], self.phase[mask])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n) + np.bincount(self.dst, minlength=self.n)

    def neighbors(self, i: int, before: int | None = None) -> np.ndarray:
        """1-based neighbours of node ``i``; ``before`` keeps only nodes ``< before``."""
        if not 1 <= i <= self.n:
            raise IndexError(f"node {i} outside 1..{self.n}")
        k = i - 1
        nb = np.concatenate([self.dst[self.src == k], self.src[self.dst == k]]) + 1
        if before is not None:
            nb = nb[nb < before]
        return np.sort(nb)

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.phase, other.phase)
        )

    def __repr__(self):
        return f"LabeledGraph(n={self.n}, n_edges={self.n_edges})"


@dataclass
class EstimationReport:
    alpha_hat: float | None = None
    beta_hat: float | None = None
    delta_hat: float | None = None
    p_hat: float | None = None
    k_hat: float | None = None
    theta_hat: float | None = None
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha_hat is not None and not self.alpha_hat > 0:
            raise ValueError(f"alpha_hat must be positive, got {self.alpha_hat}")
        for name in ("beta_hat", "delta_hat", "p_hat"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.k_hat is not None and not self.k_hat > 0:
            raise ValueError(f"k_hat must be positive, got {self.k_hat}")

    def to_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "delta_hat": self.delta_hat,
            "p_hat": self.p_hat,
            "k_hat": self.k_hat,
            "theta_hat": self.theta_hat,
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimationReport":
        known = {k: d.get(k) for k in ("alpha_hat", "beta_hat", "delta_hat", "p_hat", "k_hat", "theta_hat")}
        return cls(**known, diagnostics={str(k): float(v) for k, v in (d.get("diagnostics") or {}).items()})


def _contains(sorted_row: np.ndarray, x: int) -> bool:
    pos = np.searchsorted(sorted_row, x)
    return bool(pos < len(sorted_row) and sorted_row[pos] == x)


def similarity(F: FeatureMatrix, i: int, j: int) -> int:
    """Number of features shared by nodes ``i`` and ``j`` (1-based)."""
    F._check_node(i)
    F._check_node(j)
    return int(len(np.intersect1d(F.rows[i - 1], F.rows[j - 1], assume_unique=True)))


def inclusion_probability(F: FeatureMatrix, i: int, k: int, delta: float) -> float:
    """Probability that node ``i`` adopts the old feature ``k`` (both 1-based).

    Mixes a fair coin (weight ``delta``) with the fraction of the first
    ``i - 1`` nodes already holding ``k`` scaled by ``1 / i``.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if not 2 <= i <= F.n_nodes:
        raise IndexError(f"node {i} outside 2..{F.n_nodes}")
    available = int(F.cum_counts[i - 2])
    if not 1 <= k <= available:
        raise ValueError(f"feature {k} has not been introduced before node {i} (L_{i - 1} = {available})")
    held = sum(_contains(r, k - 1) for r in F.rows[: i - 1])
    return delta / 2.0 + (1.0 - delta) * held / i


def phi(s, sp_params: SigmoidParams):
    """Sigmoid link probability ``1 / (1 + exp(K (theta - s)))``.

    Accepts scalars or arrays; the exponent is clamped so large ``K`` saturates
    to 0/1 instead of overflowing.
    """
    z = np.clip(sp_params.k_steep * (sp_params.theta - np.asarray(s, dtype=float)), -_EXP_CLAMP, _EXP_CLAMP)
    out = 1.0 / (1.0 + np.exp(z))
    return float(out) if out.ndim == 0 else out
