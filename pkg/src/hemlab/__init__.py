"""Holomorphic-embedding power flow with Pade-approximant diagnostics."""

from .numerics import (ComplexMatrix, LUFactors, NoConvergence, Polynomial,
                       PrecisionContext, SingularMatrix, lu_factor, lu_solve,
                       poly_eval, poly_roots)
from .series import (PowerSeries, SeriesSet, conjugate_reflect, convolve,
                     evaluate as series_evaluate, reciprocal, roc_estimate,
                     series_to_csv)
from .network import (AdmittanceDecomposition, Branch, Bus, NetworkModel,
                      ParseError, ValidationError, build_admittance,
                      injected_power, load_network)
from .embedding import (EmbeddingKind, GermNotConverged, RecursionSystem,
                        SingularRecursionMatrix, build_recursion,
                        extend_series, reference_state, residual_check)
from .pade import (PadeApproximant, PoleHit, SingularDenominatorSystem,
                   SpuriousPair, compute_pade, converged, detect_spurious,
                   evaluate as pade_evaluate, guard_digit_estimate,
                   pole_zeros)
from .diagnostics import (CFCurve, DiagnosticsReport, MismatchReport,
                          bcc_estimate, cf_curve, cf_estimate, line_capacity,
                          mismatch, root_plot_data, snbp_estimate,
                          sweep_profile)
from .cli import SolveConfig, SolveReport, solve

__version__ = "0.1.0"

__all__ = [
    "AdmittanceDecomposition", "Branch", "Bus", "CFCurve", "ComplexMatrix",
    "DiagnosticsReport", "EmbeddingKind", "GermNotConverged", "LUFactors",
    "MismatchReport", "NetworkModel", "NoConvergence", "PadeApproximant",
    "ParseError", "PoleHit", "Polynomial", "PowerSeries", "PrecisionContext",
    "RecursionSystem", "SeriesSet", "SingularDenominatorSystem",
    "SingularMatrix", "SingularRecursionMatrix", "SolveConfig", "SolveReport",
    "SpuriousPair", "ValidationError", "bcc_estimate", "build_admittance",
    "build_recursion", "cf_curve", "cf_estimate", "compute_pade", "converged",
    "conjugate_reflect", "convolve", "detect_spurious", "extend_series",
    "guard_digit_estimate", "injected_power", "line_capacity", "load_network",
    "lu_factor", "lu_solve", "mismatch", "pade_evaluate", "pole_zeros",
    "poly_eval", "poly_roots", "reciprocal", "reference_state",
    "residual_check", "roc_estimate", "root_plot_data", "series_evaluate",
    "series_to_csv", "snbp_estimate", "solve", "sweep_profile",
]
