"""Growing feature-structure network model: simulation, estimation and metrics."""

__version__ = "0.1.0"

from .core import (
    EstimationReport,
    FeatureMatrix,
    LabeledGraph,
    ModelParams,
    Phase,
    SigmoidParams,
    inclusion_probability,
    phi,
    similarity,
)
from .dynamics import GenSeed, generate_features, lambda_i, uniformity_measure
from .estimation import (
    delta_loglikelihood,
    estimate_alpha,
    estimate_beta,
    estimate_delta,
    estimate_p,
    fit_k_theta,
    mse_harness,
)
from .estimators import GrowingFeatureModel, TwoGramFeaturizer
from .metrics import (
    clustering_coefficient,
    component_summary,
    degree_ccdf,
    reachable_pairs,
    shared_feature_distributions,
)
from .network import build_network, calibrate_theta, second_phase_link_probability
