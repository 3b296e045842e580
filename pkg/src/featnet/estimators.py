"""scikit-learn style wrappers around the estimation and ingestion code."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import EstimationReport, FeatureMatrix, LabeledGraph, ModelParams, SigmoidParams
from .dynamics import GenSeed, generate_features
from .estimation import (
    delta_loglikelihood,
    delta_statistics,
    estimate_alpha,
    estimate_beta,
    estimate_delta,
    estimate_p,
    fit_k_theta,
    observed_link_fraction,
    p_statistics,
)
from .io import DocumentRecord, build_coauthorship_graph, build_feature_matrix, normalize_stopwords, DEFAULT_STOPWORDS
from .network import build_network, similarity_histogram
from .validation import check_feature_matrix, check_graph, check_random_seed, check_unit_interval

__all__ = ["GrowingFeatureModel", "TwoGramFeaturizer"]


class GrowingFeatureModel(BaseEstimator):
    """Fit the growing feature-structure model to an observed feature matrix.

    ``fit(X)`` estimates ``alpha_``, ``beta_`` and ``delta_`` from the
    matrix. Passing ``graph`` additionally selects the sigmoid
    (``k_steep_``, ``theta_``) and, when first- and second-phase links are
    told apart, the triadic-closure probability ``p_``. For an untagged
    graph every edge is treated as first-phase (the ``p = 0`` benchmark)
    and ``p_`` stays ``None``.

    Parameters
    ----------
    s_star : int
        Similarity at which the observed link fraction is matched.
    f_star : float, optional
        Link fraction at ``s_star``; measured on the graph when omitted.
    ell : float, optional
        Number of first-phase links; counted on the graph when omitted.
    """

    def __init__(self, s_star=10, f_star=None, ell=None):
        self.s_star = s_star
        self.f_star = f_star
        self.ell = ell

    def fit(self, X, graph=None):
        F = check_feature_matrix(X)
        beta, r2 = estimate_beta(F, return_r2=True)
        alpha, gamma = estimate_alpha(F, beta, return_slope=True)
        stats = delta_statistics(F)
        delta = estimate_delta(stats)
        self.n_nodes_in_ = F.n_nodes
        self.n_features_in_ = F.n_features
        self.beta_, self.alpha_, self.delta_ = beta, alpha, delta
        diagnostics = {
            "beta_r2": r2,
            "gamma": gamma,
            "delta_loglik": delta_loglikelihood(stats, delta),
        }
        self.k_steep_ = self.theta_ = self.p_ = None
        if graph is not None:
            g = check_graph(graph, F.n_nodes)
            labelled = g.has_phase_labels and g.n_edges > 0
            first = g.first_phase() if labelled else g
            S = F.similarity_matrix()
            ell = first.n_edges if self.ell is None else self.ell
            f_star = self.f_star
            if f_star is None:
                f_star = observed_link_fraction(F, first, self.s_star, S)
            sig, diag = fit_k_theta(
                F, ell, self.s_star, check_unit_interval(f_star, "f_star", open_interval=True),
                hist=similarity_histogram(F, S), return_diagnostics=True,
            )
            self.k_steep_, self.theta_ = sig.k_steep, sig.theta
            diagnostics.update({"ell": float(ell), "f_star": float(f_star), "k_theta_residual": diag["residual"]})
            if labelled:
                pst = p_statistics(g)
                if len(pst.common):
                    self.p_ = estimate_p(pst)
                else:
                    warnings.warn("no second-phase candidates with common neighbours; p not estimated")
        self.report_ = EstimationReport(
            alpha_hat=self.alpha_, beta_hat=self.beta_, delta_hat=self.delta_,
            p_hat=self.p_, k_hat=self.k_steep_, theta_hat=self.theta_,
            diagnostics=diagnostics,
        )
        return self

    def score(self, X, y=None):
        """Mean adoption log-likelihood per (node, old feature) pair at ``delta_``."""
        check_is_fitted(self, "delta_")
        stats = delta_statistics(check_feature_matrix(X))
        return delta_loglikelihood(stats, self.delta_) / max(stats.n_terms, 1)

    @property
    def params_(self) -> ModelParams:
        check_is_fitted(self, "delta_")
        return ModelParams(self.alpha_, self.beta_, self.delta_, self.p_ or 0.0)

    def sample(self, n=None, seed=None, stream_id=0, features=None):
        """Simulate from the fitted parameters.

        Returns a new feature matrix of ``n`` nodes (default: as many as
        were fitted), or, once the sigmoid has been fitted, a
        ``(FeatureMatrix, LabeledGraph)`` pair. ``features`` reuses a given
        matrix instead of simulating one.
        """
        check_is_fitted(self, "delta_")
        gs = GenSeed(check_random_seed(seed), stream_id)
        F = check_feature_matrix(features) if features is not None else generate_features(
            n or self.n_nodes_in_, self.params_, gs
        )
        if self.k_steep_ is None:
            return F
        g = build_network(F, SigmoidParams(self.k_steep_, self.theta_), self.p_ or 0.0, gs)
        return F, g


class TwoGramFeaturizer(TransformerMixin, BaseEstimator):
    """Turn dated documents into a left-ordered 2-gram feature matrix.

    ``fit`` records the vocabulary (``vocabulary_``, column order) and the
    chronological node order (``doc_ids_``); ``transform`` returns the
    :class:`FeatureMatrix`.
    """

    def __init__(self, stopwords=None):
        self.stopwords = stopwords

    def _stop(self):
        return normalize_stopwords(DEFAULT_STOPWORDS if self.stopwords is None else self.stopwords)

    def _check_docs(self, docs):
        docs = list(docs)
        bad = [type(d).__name__ for d in docs if not isinstance(d, DocumentRecord)]
        if bad:
            raise TypeError(f"expected DocumentRecord items, got {bad[0]}")
        return docs

    def fit(self, docs, y=None):
        self.fit_transform(docs)
        return self

    def fit_transform(self, docs, y=None):
        docs = self._check_docs(docs)
        F, vocab, ids = build_feature_matrix(docs, self._stop())
        self.vocabulary_ = {w: k for k, w in enumerate(vocab)}
        self.doc_ids_ = ids
        return F

    def transform(self, docs) -> FeatureMatrix:
        check_is_fitted(self, "vocabulary_")
        F, _, _ = build_feature_matrix(self._check_docs(docs), self._stop())
        return F

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.array(list(self.vocabulary_), dtype=object)

    def coauthorship_graph(self, docs) -> LabeledGraph:
        return build_coauthorship_graph(self._check_docs(docs))
