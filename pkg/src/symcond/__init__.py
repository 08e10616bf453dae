"""Condition numbers of CPD, Waring and Tucker-compressed Waring decompositions of symmetric tensors."""
from .condition import (
    CompressedWd,
    ConditionReport,
    FastPathUnavailable,
    Method,
    SvdFailure,
    compress_psrd,
    compress_waring,
    condition_from_terracini,
    condition_psrd_fast,
    condition_segre,
    condition_segre_veronese,
    condition_veronese,
    condition_waring_fast,
    embed_waring,
    q_wd_condition,
    sigma_min,
    singular_values,
)
from .experiments import ExperimentConfig, RatioRecord, max_rank_bound, random_waring, ratio_experiment, speed_benchmark
from .rank2 import Rank2ClosedForm, gramian_orthocomplement, orthocomplement_terracini, rank2_block_split, rank2_condition
from .tensor_core import TangentBasis, helmert_matrix, mode_insert, outer_power, sphere_tangent_basis
from .terracini import (
    Manifold,
    PsrdDecomposition,
    PsrdTerm,
    SymmetricTerm,
    TerraciniMatrix,
    WaringDecomposition,
    terracini_segre,
    terracini_segre_veronese,
    terracini_veronese,
)
from .verify import verify_suite

__version__ = "0.1.0"
