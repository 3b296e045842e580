"""Parameter estimation from an observed feature matrix and graph."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import FeatureMatrix, LabeledGraph, ModelParams, Phase, SigmoidParams
from .network import expected_first_phase_links, similarity_histogram

__all__ = [
    "BETA_ZERO_THRESHOLD",
    "estimate_beta",
    "estimate_alpha",
    "DeltaStatistics",
    "delta_statistics",
    "delta_loglikelihood",
    "estimate_delta",
    "observed_link_fraction",
    "fit_k_theta",
    "PStatistics",
    "p_statistics",
    "p_loglikelihood",
    "estimate_p",
    "MSEReport",
    "mse_harness",
]

# below this slope the logarithmic growth branch is used for alpha
BETA_ZERO_THRESHOLD = 0.05


def _ols_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope with intercept, and R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("degenerate regression: all abscissae are equal")
    yc = y - y.mean()
    slope = float(xc @ yc) / sxx
    syy = float(yc @ yc)
    r2 = 1.0 if syy == 0 else (slope * slope * sxx) / syy
    return slope, r2


def _cum_counts(F) -> np.ndarray:
    if isinstance(F, FeatureMatrix):
        return F.cum_counts
    L = np.asarray(F, dtype=float)
    if L.ndim != 1:
        raise ValueError("cumulative feature counts must be one-dimensional")
    if len(L) > 1 and (np.diff(L) < 0).any():
        raise ValueError("cumulative feature counts must be non-decreasing")
    return L


def estimate_beta(F, return_r2: bool = False):
    """Slope of ``ln L_i`` against ``ln i`` over ``i >= 2`` with ``L_i > 0``, clamped to [0, 1].

    ``F`` is a :class:`FeatureMatrix` or the sequence ``L_1..L_n`` itself.
    """
    L = _cum_counts(F)
    i = np.arange(1, len(L) + 1)
    mask = (i >= 2) & (L > 0)
    if mask.sum() < 3:
        raise ValueError(f"need at least 3 nodes with L_i > 0 beyond the first, got {int(mask.sum())}")
    slope, r2 = _ols_slope(np.log(i[mask]), np.log(L[mask]))
    beta = min(1.0, max(0.0, slope))
    return (beta, r2) if return_r2 else beta


def estimate_alpha(F, beta_hat: float, return_slope: bool = False):
    """Rescaled slope of ``L_i`` against ``i**beta_hat`` (or ``ln i`` when ``beta_hat`` is ~0).

    The regression uses every node ``i = 1..n`` and an intercept.
    """
    if not 0.0 <= beta_hat <= 1.0:
        raise ValueError(f"beta_hat must lie in [0, 1], got {beta_hat}")
    L = _cum_counts(F)
    i = np.arange(1, len(L) + 1, dtype=float)
    if beta_hat < BETA_ZERO_THRESHOLD:
        gamma, _ = _ols_slope(np.log(i), L)
        alpha = gamma
    else:
        gamma, _ = _ols_slope(i**beta_hat, L)
        alpha = beta_hat * gamma
    if not alpha > 0:
        raise ValueError(f"non-positive alpha estimate {alpha}; L_i does not grow")
    return (alpha, gamma) if return_slope else alpha


@dataclass(frozen=True)
class DeltaStatistics:
    """Sufficient statistics of the adoption log-likelihood.

    For every distinct preferential share ``x = holders / i`` seen at some
    step, ``adopted[x]`` / ``skipped[x]`` count the (node, old feature)
    pairs where the feature was / was not taken.
    """

    share: np.ndarray
    adopted: np.ndarray
    skipped: np.ndarray

    @property
    def n_terms(self) -> int:
        return int(self.adopted.sum() + self.skipped.sum())


def delta_statistics(F: FeatureMatrix) -> DeltaStatistics:
    n = F.n_nodes
    counts = np.zeros(F.n_features, dtype=np.int64)
    # pairs (i, holders) -> occurrences, accumulated as flat keys i * n + holders
    adopted_keys = []
    all_keys = []
    cum = F.cum_counts
    for idx in range(n):
        i = idx + 1
        row = F.rows[idx]
        if i >= 2:
            L_prev = int(cum[idx - 1])
            if L_prev:
                held_all = np.bincount(counts[:L_prev], minlength=i)
                old = row[row < L_prev]
                held_adopted = np.bincount(counts[old], minlength=i)
                all_keys.append((i, held_all))
                adopted_keys.append((i, held_adopted))
        counts[row] += 1
    shares, adopted, total = [], [], []
    for (i, h_all), (_, h_ad) in zip(all_keys, adopted_keys):
        nz = np.flatnonzero(h_all)
        shares.append(nz / i)
        adopted.append(h_ad[nz])
        total.append(h_all[nz])
    if not shares:
        z = np.zeros(0)
        return DeltaStatistics(z, z.astype(np.int64), z.astype(np.int64))
    share = np.concatenate(shares)
    adopted = np.concatenate(adopted)
    total = np.concatenate(total)
    uniq, inv = np.unique(share, return_inverse=True)
    a = np.bincount(inv, weights=adopted, minlength=len(uniq)).astype(np.int64)
    t = np.bincount(inv, weights=total, minlength=len(uniq)).astype(np.int64)
    return DeltaStatistics(uniq, a, t - a)


def _as_stats(data) -> DeltaStatistics:
    return data if isinstance(data, DeltaStatistics) else delta_statistics(data)


def _xlogy(w: np.ndarray, p: np.ndarray) -> float:
    # 0 * log(0) = 0; a positive weight on a zero probability gives -inf
    with np.errstate(divide="ignore"):
        logs = np.log(p)
    mask = w > 0
    return float(np.sum(w[mask] * logs[mask]))


def delta_loglikelihood(F, delta: float) -> float:
    """Log-likelihood of the old-feature adoption pattern at ``delta``.

    ``F`` is a :class:`FeatureMatrix` or precomputed :class:`DeltaStatistics`.
    Returns ``-inf`` if an observed event has probability zero.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    st = _as_stats(F)
    P = delta / 2.0 + (1.0 - delta) * st.share
    return _xlogy(st.adopted, P) + _xlogy(st.skipped, 1.0 - P)


def _delta_score(st: DeltaStatistics, delta: float) -> float:
    P = delta / 2.0 + (1.0 - delta) * st.share
    dP = 0.5 - st.share
    return float(np.sum(st.adopted * dP / P) - np.sum(st.skipped * dP / (1.0 - P)))


def estimate_delta(F, tol: float = 1e-10) -> float:
    """Maximum-likelihood ``delta`` on [0, 1].

    The log-likelihood is concave, so the maximiser is the root of its
    derivative or a boundary point.
    """
    st = _as_stats(F)
    if st.n_terms == 0:
        raise ValueError("no old-feature observations: every L_{i-1} is zero")
    # shares lie strictly inside (0, 1), so the score is finite on [0, 1]
    s0, s1 = _delta_score(st, 0.0), _delta_score(st, 1.0)
    if s0 <= 0:
        return 0.0
    if s1 >= 0:
        return 1.0
    return float(brentq(lambda d: _delta_score(st, d), 0.0, 1.0, xtol=tol))


def observed_link_fraction(F: FeatureMatrix, g: LabeledGraph, s_star: int, S: np.ndarray | None = None) -> float:
    """Share of node pairs with exactly ``s_star`` common features linked in the first phase."""
    if S is None:
        S = F.similarity_matrix()
    first = g.first_phase() if g.has_phase_labels else g
    lo_i, lo_j = np.tril_indices(F.n_nodes, k=-1)
    total = int(np.count_nonzero(S[lo_i, lo_j] == s_star))
    if total == 0:
        raise ValueError(f"no node pair shares exactly {s_star} features")
    linked = int(np.count_nonzero(S[first.src, first.dst] == s_star))
    return linked / total


def fit_k_theta(
    F: FeatureMatrix | None,
    a_prime_links: float,
    s_star: float,
    f_star: float,
    hist: np.ndarray | None = None,
    k_bounds: tuple[float, float] = (1e-4, 1e3),
    n_grid: int = 400,
    return_diagnostics: bool = False,
):
    """Select the sigmoid so that ``phi(s_star) = f_star`` and the expected
    first-phase link count equals ``a_prime_links``.

    This is a moment-matching selection, not a likelihood fit. Fixing
    ``c = K (theta - s_star) = ln(1/f_star - 1)`` leaves a 1-D equation in
    ``K``; its sign changes are located on a log-spaced grid over
    ``k_bounds`` and the smallest root is refined with Brent's method.
    """
    if not 0.0 < f_star < 1.0:
        raise ValueError(f"f_star must lie strictly in (0, 1), got {f_star}")
    if hist is None:
        if F is None:
            raise ValueError("either F or hist is required")
        hist = similarity_histogram(F)
    ell = float(a_prime_links)
    c = math.log(1.0 / f_star - 1.0)
    s = np.arange(len(hist), dtype=float)
    weights = hist.astype(float)

    def resid(K):
        z = np.clip(c + K * (s_star - s), -700.0, 700.0)
        return float(weights @ (1.0 / (1.0 + np.exp(z)))) - ell

    lo, hi = k_bounds
    ks = np.geomspace(lo, hi, n_grid)
    vals = np.array([resid(k) for k in ks])
    roots = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)
    if len(roots) == 0:
        raise ValueError(
            f"ell={ell} is not attainable for K in [{lo}, {hi}] "
            f"(expected links range {vals.min() + ell:.3f}..{vals.max() + ell:.3f})"
        )
    a = int(roots[0])
    if vals[a] == 0:
        K = float(ks[a])
    else:
        K = float(brentq(resid, ks[a], ks[a + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500))
    sig = SigmoidParams(K, s_star + c / K)
    if not return_diagnostics:
        return sig
    diag = {
        "c": c,
        "residual": expected_first_phase_links(hist, sig) - ell,
        "n_sign_changes": float(len(roots)),
    }
    return sig, diag


@dataclass(frozen=True)
class PStatistics:
    """Second-phase candidates grouped by common-neighbour count ``c >= 1``."""

    common: np.ndarray
    linked: np.ndarray
    unlinked: np.ndarray


def p_statistics(g: LabeledGraph) -> PStatistics:
    """Replay the graph step by step and tabulate second-phase outcomes.

    At step ``i`` a candidate is any ``j < i`` not linked to ``i`` in the
    first phase; its count ``C_ij`` is the number of ``i``'s first-phase
    neighbours adjacent to ``j`` through edges created before step ``i``.
    """
    if not g.has_phase_labels:
        raise ValueError("graph edges carry no phase labels; first-phase links (A') are required to estimate p")
    n = g.n
    adj = np.zeros((n, n), dtype=bool)
    order = np.argsort(g.src, kind="stable")
    src, dst, ph = g.src[order], g.dst[order], g.phase[order]
    bounds = np.searchsorted(src, np.arange(n + 1))
    linked_c, all_c = [], []
    for i in range(1, n):
        a, b = bounds[i], bounds[i + 1]
        d, t = dst[a:b], ph[a:b]
        first = d[t == Phase.FIRST]
        second = d[t == Phase.SECOND]
        if len(first):
            common = adj[:i][:, first].sum(axis=1)
            common[first] = 0
            if len(second) and (common[second] == 0).any():
                bad = int(second[common[second] == 0][0])
                raise ValueError(
                    f"second-phase edge ({i + 1}, {bad + 1}) has no common first-phase neighbour"
                )
            all_c.append(common[common > 0])
            linked_c.append(common[second])
        elif len(second):
            raise ValueError(f"node {i + 1} has second-phase edges but no first-phase ones")
        adj[i, d] = adj[d, i] = True
    if not all_c:
        z = np.zeros(0, dtype=np.int64)
        return PStatistics(z, z, z)
    all_c = np.concatenate(all_c)
    linked_c = np.concatenate(linked_c) if linked_c else np.zeros(0, dtype=np.int64)
    size = int(all_c.max()) + 1 if len(all_c) else 1
    tot = np.bincount(all_c, minlength=size)
    lk = np.bincount(linked_c, minlength=size)
    c = np.flatnonzero(tot)
    return PStatistics(c.astype(np.int64), lk[c].astype(np.int64), (tot - lk)[c].astype(np.int64))


def _as_pstats(data) -> PStatistics:
    return data if isinstance(data, PStatistics) else p_statistics(data)


def p_loglikelihood(g, p: float) -> float:
    """Log-likelihood of second-phase outcomes under independent per-neighbour closure."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    st = _as_pstats(g)
    if p == 1.0:
        return 0.0 if st.unlinked.sum() == 0 else -math.inf
    log_q = math.log1p(-p)
    with np.errstate(divide="ignore"):
        hit = np.log(-np.expm1(st.common * log_q))
    ll = float(np.sum(st.unlinked * st.common) * log_q)
    mask = st.linked > 0
    return ll + float(np.sum(st.linked[mask] * hit[mask]))


def _p_score(st: PStatistics, p: float) -> float:
    q = 1.0 - p
    c = st.common.astype(float)
    qc = q**c
    return float(np.sum(st.linked * c * q ** (c - 1) / (1.0 - qc)) - np.sum(st.unlinked * c) / q)


def estimate_p(g, tol: float = 1e-10) -> float:
    """Maximum-likelihood triadic-closure probability from a phase-labelled graph."""
    st = _as_pstats(g)
    if len(st.common) == 0:
        raise ValueError("no second-phase candidate has a common neighbour; p is not identifiable")
    if st.linked.sum() == 0:
        return 0.0
    if st.unlinked.sum() == 0:
        return 1.0
    # concave; score -> +inf at 0+ and -inf at 1-
    lo, hi = 1e-15, 1.0 - 1e-15
    if _p_score(st, hi) > 0:
        return 1.0
    return float(brentq(lambda p: _p_score(st, p), lo, hi, xtol=tol))


@dataclass(frozen=True)
class MSEReport:
    n_realizations: int
    mse_alpha: float
    mse_beta: float
    mse_delta: float
    estimates: np.ndarray  # (R, 3): alpha_hat, beta_hat, delta_hat

    def means(self) -> tuple[float, float, float]:
        return tuple(float(v) for v in self.estimates.mean(axis=0))


def _estimate_realization(args):
    from .dynamics import GenSeed, generate_features

    params, n, seed, r = args
    F = generate_features(n, params, GenSeed(seed, r))
    beta = estimate_beta(F)
    return estimate_alpha(F, beta), beta, estimate_delta(F)


def mse_harness(
    true_params: ModelParams,
    n: int,
    realizations: int,
    seed: int = 0,
    n_jobs: int = 1,
) -> MSEReport:
    """Mean squared error of the alpha, beta, delta estimators over simulated matrices.

    Realization ``r`` uses ``GenSeed(seed, r)``, so results do not depend on
    ``n_jobs``.
    """
    if realizations < 1:
        raise ValueError(f"realizations must be >= 1, got {realizations}")
    from .experiments import map_jobs

    rows = map_jobs(_estimate_realization, [(true_params, n, seed, r) for r in range(realizations)], n_jobs)
    est = np.asarray(rows, dtype=float)
    truth = np.array([true_params.alpha, true_params.beta, true_params.delta])
    mse = ((est - truth) ** 2).mean(axis=0)
    return MSEReport(realizations, float(mse[0]), float(mse[1]), float(mse[2]), est)
