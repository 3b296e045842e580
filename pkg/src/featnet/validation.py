"""Input validation helpers shared by the estimator classes and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .core import FeatureMatrix, LabeledGraph


def check_feature_matrix(X) -> FeatureMatrix:
    """Coerce ``X`` to a :class:`FeatureMatrix`.

    Accepts a FeatureMatrix, a dense 0/1 array, a scipy sparse matrix or a
    sequence of 1-based feature index collections. Raises ``ValueError`` if
    the result is not left-ordered.
    """
    if isinstance(X, FeatureMatrix):
        return X
    if sp.issparse(X):
        X = sp.csr_matrix(X)
        rows = [X.indices[X.indptr[i]:X.indptr[i + 1]] for i in range(X.shape[0])]
        return FeatureMatrix.from_rows(rows, one_based=False)
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D node-by-feature array, got shape {X.shape}")
        if not np.isin(X, (0, 1)).all():
            raise ValueError("feature matrix entries must be 0 or 1")
        return FeatureMatrix.from_dense(X)
    try:
        rows = list(X)
    except TypeError:
        raise TypeError(f"cannot interpret {type(X).__name__} as a feature matrix") from None
    return FeatureMatrix.from_rows(rows, one_based=True)


def check_graph(g, n_nodes: int | None = None, require_phases: bool = False) -> LabeledGraph:
    if not isinstance(g, LabeledGraph):
        if sp.issparse(g) or isinstance(g, np.ndarray):
            A = sp.coo_matrix(sp.tril(sp.csr_matrix(g), k=-1))
            g = LabeledGraph(A.shape[0], A.row, A.col, np.zeros(A.nnz, dtype=np.int8))
        else:
            raise TypeError(f"cannot interpret {type(g).__name__} as a graph")
    if n_nodes is not None and g.n != n_nodes:
        raise ValueError(f"graph has {g.n} nodes but the feature matrix has {n_nodes}")
    if require_phases and not g.has_phase_labels:
        raise ValueError("graph edges carry no phase labels; first-phase links are required")
    return g


def check_unit_interval(value, name: str, open_interval: bool = False) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    if not ok:
        bounds = "(0, 1)" if open_interval else "[0, 1]"
        raise ValueError(f"{name} must lie in {bounds}, got {value}")
    return value


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    if not (value > 0 and np.isfinite(value)):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return float(value)


def check_random_seed(seed) -> int:
    if seed is None:
        return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
    if isinstance(seed, (np.integer, int)) and not isinstance(seed, bool) and 0 <= int(seed) < 2**64:
        return int(seed)
    raise ValueError(f"seed must be None or an integer in [0, 2**64), got {seed!r}")
