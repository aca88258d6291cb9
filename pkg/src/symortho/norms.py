"""Approximation norms induced by the orthogonality classes.

||T||_{A_r} = max |<T, Y>| over unit-norm Y in class A_r, which by the
rank-r maximization identity equals the square root of the solver
objective. The r=1 case is the spectral norm for every class. Values
coming from multi-start ascent are lower bounds; they are tagged
oracle-certified only when the angle-grid oracle covers the shape and
brackets the value, and multi-start otherwise. The nuclear norm is
declared but not computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import BudgetError, UnsupportedShapeError
from .oracle import grid_oracle
from .orthogonality import Notion
from .solvers import ApproxProblem, SolverConfig, rank_one_hopm, solve
from .tensor import DenseTensor, RankOneTerm, frobenius_norm, is_symmetric

CERTIFIED = "oracle-certified"
MULTISTART = "multi-start"
_CHAIN_SLACK = 1e-6


@dataclass
class NormEntry:
    notion: Notion
    rank: int
    value: float
    decomposition: object
    status: str
    bracket: tuple | None = None  # (lo, hi) on the squared value when certified

    def to_dict(self) -> dict:
        return {
            "notion": str(self.notion),
            "rank": self.rank,
            "value": self.value,
            "status": self.status,
            "bracket": list(self.bracket) if self.bracket else None,
        }


def spectral_norm(t: DenseTensor, config: SolverConfig | None = None):
    """Largest |<T, x_1 x ... x x_d>| over unit vectors, with its maximizer.

    Symmetric input additionally runs the symmetric power iteration (the
    two maxima agree for symmetric tensors, but the symmetric iterate is
    the better-conditioned path to the optimizer).
    """
    config = config or SolverConfig()
    best = rank_one_hopm(t, symmetric=False, config=config)
    if t.is_cubical and is_symmetric(t):
        sym = rank_one_hopm(t, symmetric=True, config=config)
        if sym.objective > best.objective:
            best = sym
    term = best.decomposition.terms[0]
    return float(abs(term.sigma)), term


def a_norm(
    t: DenseTensor,
    notion: Notion,
    r: int,
    config: SolverConfig | None = None,
    certify: bool = True,
    certification_tol: float = 1e-6,
) -> NormEntry:
    """||T||_{A_r} for the given class, as a NormEntry."""
    config = config or SolverConfig()
    problem = ApproxProblem(t, notion, r, config=config)
    result = solve(problem)
    value = float(np.sqrt(max(result.objective, 0.0)))
    status = MULTISTART
    bracket = None
    if certify:
        try:
            report = grid_oracle(problem, certification_tol)
        except (UnsupportedShapeError, BudgetError):
            report = None
        if report is not None:
            bracket = (report.lo, report.hi)
            if report.lo - certification_tol <= result.objective <= report.hi + certification_tol:
                status = CERTIFIED
                value = float(np.sqrt(max(result.objective, report.lo, 0.0)))
    return NormEntry(
        notion=notion,
        rank=r,
        value=value,
        decomposition=result.decomposition,
        status=status,
        bracket=bracket,
    )


@dataclass
class NormReport:
    frobenius: float
    spectral: float
    spectral_term: RankOneTerm
    entries: list = field(default_factory=list)
    nuclear: None = None  # declared for completeness, not computed

    def value(self, tag: str, r: int) -> float:
        for e in self.entries:
            if e.notion.tag == tag and e.rank == r:
                return e.value
        raise KeyError((tag, r))

    def to_dict(self) -> dict:
        return {
            "frobenius": self.frobenius,
            "spectral": self.spectral,
            "nuclear": None,
            "entries": [e.to_dict() for e in self.entries],
        }


@dataclass
class ChainReport:
    report: NormReport
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def chain_check(
    t: DenseTensor,
    r_max: int,
    config: SolverConfig | None = None,
    certify: bool = True,
) -> ChainReport:
    """Verify spectral = A_1 <= ... <= A_r <= ||T|| and CON <= SON <= ON.

    Multi-start values are lower bounds, so violations are reported with a
    one-sided slack rather than raised. Ranks infeasible for a class (CON
    beyond the smallest mode dimension) are skipped.
    """
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    config = config or SolverConfig()
    spectral, term = spectral_norm(t, config)
    fro = frobenius_norm(t)
    report = NormReport(frobenius=fro, spectral=spectral, spectral_term=term)
    violations = []
    values: dict = {}
    for notion in (Notion.con(), Notion.son(), Notion.on()):
        # CON is infeasible past the smallest mode dim; SON/ON pattern
        # enumeration is exhaustive only up to rank 3
        cap = min(t.dims) if notion.tag == "CON" else 3
        for r in range(1, min(r_max, cap) + 1):
            entry = a_norm(t, notion, r, config=config, certify=certify)
            report.entries.append(entry)
            values[(notion.tag, r)] = entry.value
            if entry.value > fro + _CHAIN_SLACK:
                violations.append(f"{notion.tag}_{r} value {entry.value:.9f} exceeds ||T|| {fro:.9f}")
        v1 = values.get((notion.tag, 1))
        if v1 is not None and abs(v1 - spectral) > _CHAIN_SLACK:
            violations.append(f"{notion.tag}_1 value {v1:.9f} differs from spectral {spectral:.9f}")
    for (tag, r), v in values.items():
        prev = values.get((tag, r - 1))
        if prev is not None and v < prev - _CHAIN_SLACK:
            violations.append(f"{tag}_{r} value {v:.9f} below {tag}_{r - 1} value {prev:.9f}")
    for r in range(1, r_max + 1):
        con, son, on = (values.get((tag, r)) for tag in ("CON", "SON", "ON"))
        if con is not None and son is not None and con > son + _CHAIN_SLACK:
            violations.append(f"CON_{r} {con:.9f} exceeds SON_{r} {son:.9f}")
        if son is not None and on is not None and son > on + _CHAIN_SLACK:
            violations.append(f"SON_{r} {son:.9f} exceeds ON_{r} {on:.9f}")
    return ChainReport(report=report, violations=violations)
