"""Low-rank tensor approximation under orthogonality constraints.

Maximizes sum_k |<T, v_k1 (x) ... (x) v_kd>|^2 over rank-r families whose
terms are pairwise orthogonal (ON), strongly orthogonal (SON), completely
orthogonal (CON), or orthogonal on a mode subset (PCON), and converts
maximizers into best approximations. Small shapes come with a certified
grid oracle; a library of reference counterexamples is bundled.
"""

from .exceptions import (
    BudgetError,
    FieldError,
    InfeasibleError,
    ShapeError,
    SymorthoError,
    UnsupportedShapeError,
)
from .orthogonality import (
    Notion,
    PairCertificate,
    cross_orthogonality_check,
    decomposition_check,
    pair_check,
)
from .tensor import (
    Decomposition,
    DenseTensor,
    RankOneTerm,
    assemble,
    contract_mode,
    frobenius_norm,
    inner,
    is_symmetric,
    outer,
    random_symmetric,
    random_tensor,
    random_unit,
    symmetrize,
    tensor_from_json,
    tensor_to_json,
)
from .solvers import (
    ApproxProblem,
    ApproxResult,
    SolverConfig,
    rank_one_hopm,
    solve,
    solve_con,
    solve_cross,
    solve_on,
    solve_pcon,
    solve_son,
)
from .oracle import OracleReport, grid_oracle
from .deflation import DeflationResult, DeflationTrace, deflate, deflation_gap
from .norms import ChainReport, NormEntry, NormReport, a_norm, chain_check, spectral_norm
from .cases import (
    CASE_IDS,
    AgreementSuite,
    CaseReport,
    NamedCase,
    StructureVerdict,
    block_embed,
    build_case,
    check_symmetric_structure,
    verify_all,
    verify_case,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementSuite",
    "ApproxProblem",
    "ApproxResult",
    "BudgetError",
    "CASE_IDS",
    "CaseReport",
    "ChainReport",
    "Decomposition",
    "DeflationResult",
    "DeflationTrace",
    "DenseTensor",
    "FieldError",
    "InfeasibleError",
    "NamedCase",
    "NormEntry",
    "NormReport",
    "Notion",
    "OracleReport",
    "PairCertificate",
    "RankOneTerm",
    "ShapeError",
    "SolverConfig",
    "StructureVerdict",
    "SymorthoError",
    "UnsupportedShapeError",
    "a_norm",
    "assemble",
    "block_embed",
    "build_case",
    "chain_check",
    "check_symmetric_structure",
    "contract_mode",
    "cross_orthogonality_check",
    "decomposition_check",
    "deflate",
    "deflation_gap",
    "frobenius_norm",
    "grid_oracle",
    "inner",
    "is_symmetric",
    "outer",
    "pair_check",
    "rank_one_hopm",
    "random_symmetric",
    "random_tensor",
    "random_unit",
    "solve",
    "solve_con",
    "solve_cross",
    "solve_on",
    "solve_pcon",
    "solve_son",
    "spectral_norm",
    "symmetrize",
    "tensor_from_json",
    "tensor_to_json",
    "verify_all",
    "verify_case",
]
