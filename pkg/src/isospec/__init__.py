"""Supersingular isogeny graphs, their joint Hecke spectra, and classical
simulation of quantum curve-sampling algorithms."""

__version__ = "0.1.0"

from .arith import (CurveCode, FieldCtx, Fp2Elem, field, find_seed_j,
                    is_supersingular_fp, make_field, twist_codes)
from .graphs import (IsogenyGraph, SymmetricOperator, automorphism_weight,
                     build_family, build_graph, cache_roundtrip, phi_neighbors,
                     symmetrize)
from .modpoly import ModularPolynomial, load_modular_polynomial
from .spectra import (JointEigenbasis, fourth_moment_stat, joint_diagonalize,
                      separation_report, supnorm_report, tag_window)
from .walksim import (QPEConfig, VertexState, deviation_check, initial_state,
                      oracle_distribution, pipeline_cost, qpe_cost, qpe_round,
                      run_sampler)
from .action import (AbelianGroupSpec, QuadraticRefinement, RegularActionTable,
                     comp_index, fourier_state, kappa_hat_flatness, make_kappa,
                     oriented_sampling)

__all__ = [
    "__version__",
    "CurveCode", "FieldCtx", "Fp2Elem", "field", "find_seed_j",
    "is_supersingular_fp", "make_field", "twist_codes",
    "IsogenyGraph", "SymmetricOperator", "automorphism_weight", "build_family",
    "build_graph", "cache_roundtrip", "phi_neighbors", "symmetrize",
    "ModularPolynomial", "load_modular_polynomial",
    "JointEigenbasis", "fourth_moment_stat", "joint_diagonalize",
    "separation_report", "supnorm_report", "tag_window",
    "QPEConfig", "VertexState", "deviation_check", "initial_state",
    "oracle_distribution", "pipeline_cost", "qpe_cost", "qpe_round",
    "run_sampler",
    "AbelianGroupSpec", "QuadraticRefinement", "RegularActionTable",
    "comp_index", "fourier_state", "kappa_hat_flatness", "make_kappa",
    "oriented_sampling",
]
