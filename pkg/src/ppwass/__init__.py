"""Wasserstein distances between point-process laws under the augmented D1 metric."""
from .bounds import RateParams
from .counting_measure import CountingMeasure, d1, d1_cdf_area, d1_sorted_1d
from .experiments import ExperimentConfig, fit_rate, run_campbell, run_concentration, run_convergence
from .ground_space import AUG, GroundSpace
from .pp_wasserstein import EmpiricalLaw, wp_equal, wp_general, wp_two_sample
from .rng import RngStream
from .samplers import Deterministic, HawkesExp, HomogeneousPoisson, InhomogeneousPoisson

__version__ = "0.1.0"

__all__ = [
    "AUG",
    "CountingMeasure",
    "Deterministic",
    "EmpiricalLaw",
    "ExperimentConfig",
    "GroundSpace",
    "HawkesExp",
    "HomogeneousPoisson",
    "InhomogeneousPoisson",
    "RateParams",
    "RngStream",
    "d1",
    "d1_cdf_area",
    "d1_sorted_1d",
    "fit_rate",
    "run_campbell",
    "run_concentration",
    "run_convergence",
    "wp_equal",
    "wp_general",
    "wp_two_sample",
]
