"""Nonnegative ranks and typical nonnegative ranks of small dense tensors."""
from .bounds import (
    RankInterval,
    canonical_decomposition,
    flattening_rank_lower_bound,
    fooling_set,
    fooling_set_lower_bound,
    nnrank_interval,
)
from .census import Distribution, ExperimentConfig, ExperimentReport, run_census, sample_tensor
from .core import (
    Decomposition,
    DenseTensor,
    NegativeEntryError,
    Rank1Term,
    Shape,
    ShapeError,
    eval_cp,
    flatten,
    frobenius_distance,
    matrix_rank,
    outer,
    read_tensor_json,
    write_tensor_json,
)
from .generic import (
    JacobianReport,
    expected_generic_rank,
    generic_rank,
    jacobian,
    jacobian_generic_rank,
)
from .ntf import NtfConfig, NtfResult, ntf_fit
from .witness import (
    MaxRankCertificate,
    OutsideBall,
    RankOutOfRange,
    RetriesExhausted,
    TypicalityCertificate,
    WitnessBall,
    certificate_from_json,
    certificate_to_json,
    certify_max_rank,
    index_set,
    typical_rank_witness,
    verify_typicality_certificate,
    witness_tensor,
)

__version__ = "0.1.0"
