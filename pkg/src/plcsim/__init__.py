"""Private linear computation over linearly coded distributed storage."""

from ._kernels import BACKEND
from .codes import (
    InterferencePair,
    LinearCode,
    RateMatrix,
    coord_set,
    find_rate_matrix,
    information_sets,
    interference_pair,
    validate_rate_matrix,
)
from .field import GF, FMatrix, Fp, field_new, mat_rank, row_basis, solve
from .storage import (
    CodeArray,
    DatabaseShard,
    FunctionSpec,
    MessageArray,
    encode_dss,
    random_messages,
    shard,
    virtual_symbol,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "InterferencePair",
    "LinearCode",
    "RateMatrix",
    "coord_set",
    "find_rate_matrix",
    "information_sets",
    "interference_pair",
    "validate_rate_matrix",
    "GF",
    "FMatrix",
    "Fp",
    "field_new",
    "mat_rank",
    "row_basis",
    "solve",
    "CodeArray",
    "DatabaseShard",
    "FunctionSpec",
    "MessageArray",
    "encode_dss",
    "random_messages",
    "shard",
    "virtual_symbol",
]
