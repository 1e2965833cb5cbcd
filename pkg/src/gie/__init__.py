"""Gravity-induced entanglement of two optomechanical mirrors under
continuous measurement and Kalman filtering."""

__version__ = "0.1.0"

from .covariance import (CovMat2, CovMat4, beam_splitter, combine, log_negativity, purity,
                         squeezing_diagnostics)
from .metrology import (covariance_moment_matrix, en_smallcoupling, negativity_gradient,
                        snr_budget, steady_budget, variance_en)
from .params import DerivedParams, ExperimentParams, PhysicalConstants, derive, from_config
from .riccati import IntegratorConfig, build_system, evolve, evolve_pair, initial_covariance
from .steady import (analytic_negativity, entanglement_criterion, steady_covariance,
                     steady_report, t_entangle)
from .sweep import SweepSpec, run_sweep

__all__ = [
    "CovMat2", "CovMat4", "beam_splitter", "combine", "log_negativity", "purity",
    "squeezing_diagnostics", "covariance_moment_matrix", "en_smallcoupling",
    "negativity_gradient", "snr_budget", "steady_budget", "variance_en", "DerivedParams",
    "ExperimentParams", "PhysicalConstants", "derive", "from_config", "IntegratorConfig",
    "build_system", "evolve", "evolve_pair", "initial_covariance", "analytic_negativity",
    "entanglement_criterion", "steady_covariance", "steady_report", "t_entangle",
    "SweepSpec", "run_sweep",
]
