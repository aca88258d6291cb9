"""Greedy successive rank-one deflation, plain and orthogonality-constrained.

Plain mode repeatedly subtracts the best rank-one approximation of the
running residual. Constrained mode forces each new factor to be orthogonal
to all factors already used in its mode: the rank-one step runs inside the
orthogonal-complement subspace of every mode and the maximizer is lifted
back, so the constraint holds by construction and the accumulated terms
always form a completely orthogonal decomposition.

Coefficients follow sigma_i = <residual_i, Y_i>. When the terms are
mutually orthogonal this coincides with <T, Y_i>; for plain deflation the
two can differ and the residual convention is the one that keeps the
residual norm monotone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleError, UnsupportedShapeError
from .orthogonality import Notion
from .solvers import ApproxProblem, ApproxResult, SolverConfig, rank_one_hopm, solve
from .tensor import (
    Decomposition,
    DenseTensor,
    RankOneTerm,
    assemble,
    frobenius_norm,
    inner,
    is_symmetric,
    symmetrize,
)

# a genuine step has sigma >= spectral(R) which is a sizable fraction of
# ||R|| at desk shapes, while factor accuracy at flat optima bottoms out
# near 1e-5, so 1e-4 relative separates "mathematically zero" reliably
_ZERO_REL = 1e-4


@dataclass(frozen=True)
class DeflationStep:
    """One subtraction: coefficient, the norm left afterwards, flags."""

    sigma: float
    residual_norm: float
    constrained: bool
    zero: bool = False


@dataclass(frozen=True)
class DeflationTrace:
    steps: tuple
    constrained: bool
    stopped_early: bool
    reason: str = ""

    @property
    def residual_norms(self) -> tuple:
        return tuple(s.residual_norm for s in self.steps)

    def to_dict(self) -> dict:
        return {
            "constrained": self.constrained,
            "stopped_early": self.stopped_early,
            "reason": self.reason,
            "steps": [
                {
                    "sigma": s.sigma,
                    "residual_norm": s.residual_norm,
                    "constrained": s.constrained,
                    "zero": s.zero,
                }
                for s in self.steps
            ],
        }


@dataclass
class DeflationResult:
    decomposition: Decomposition
    trace: DeflationTrace
    objective: float
    residual: float
    info: dict


def _complement(V: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of V."""
    n, k = V.shape
    if k == 0:
        return np.eye(n)
    q, _ = np.linalg.qr(V, mode="complete")
    return q[:, k:]


def _reduce(T: np.ndarray, mats) -> np.ndarray:
    out = T
    for j, Q in enumerate(mats):
        out = np.moveaxis(np.tensordot(Q.T, np.moveaxis(out, j, 0), axes=1), 0, j)
    return out


def _pad_factors(constrained: bool, prior, dims):
    """Unit factors for a zero term; orthogonal to prior ones when required."""
    if not constrained:
        return tuple(np.eye(n)[:, 0] for n in dims)
    return tuple(_complement(P)[:, 0] for P in prior)


def deflate(
    t: DenseTensor,
    r: int,
    constrained: bool = False,
    config: SolverConfig | None = None,
    symmetric: bool | None = None,
) -> DeflationResult:
    """Greedy r-step rank-one deflation of t.

    Each step maximizes |<residual, y_1 x ... x y_d>| over unit factors
    (restricted to the complement of prior factors per mode when
    constrained) and subtracts sigma times the maximizer. A zero step stops
    the recursion; the decomposition is padded with zero terms and the
    trace is flagged. Symmetric input uses the symmetric power iteration
    per step, so every term is symmetric too.
    """
    config = config or SolverConfig()
    if r < 1:
        raise ValueError("r must be >= 1")
    if symmetric is None:
        symmetric = t.is_cubical and is_symmetric(t)
    if constrained and r > min(t.dims):
        raise InfeasibleError(
            f"{r} constrained steps need {r} orthogonal directions in dim {min(t.dims)}"
        )
    tnorm = frobenius_norm(t)
    resid = np.array(t.data, dtype=float)
    prior = [np.zeros((n, 0)) for n in t.dims]
    steps = []
    terms = []
    stopped = False
    reason = ""
    for i in range(r):
        if constrained:
            comps = [_complement(P) for P in prior]
            if any(c.shape[1] == 0 for c in comps):
                stopped, reason = True, "complement exhausted"
                break
            sub_t = DenseTensor.from_array(_reduce(resid, comps))
            if symmetric:
                sub_t = symmetrize(sub_t)
            step_res = rank_one_hopm(sub_t, symmetric=symmetric, config=config)
            inner_term = step_res.decomposition.terms[0]
            factors = tuple(
                c @ np.asarray(f, dtype=float) for c, f in zip(comps, inner_term.factors)
            )
        else:
            step_res = rank_one_hopm(
                DenseTensor.from_array(resid), symmetric=symmetric, config=config
            )
            inner_term = step_res.decomposition.terms[0]
            factors = tuple(np.asarray(f, dtype=float) for f in inner_term.factors)
        sigma = float(np.real(inner_term.sigma))
        if abs(sigma) <= _ZERO_REL * float(np.linalg.norm(resid)):
            stopped, reason = True, "zero step"
            steps.append(
                DeflationStep(0.0, float(np.linalg.norm(resid)), constrained, zero=True)
            )
            terms.append(RankOneTerm(0.0, _pad_factors(constrained, prior, t.dims)))
            break
        term = RankOneTerm(sigma, factors)
        resid = resid - term.to_tensor().data
        steps.append(DeflationStep(sigma, float(np.linalg.norm(resid)), constrained))
        terms.append(term)
        prior = [np.concatenate([P, f[:, None]], axis=1) for P, f in zip(prior, factors)]
    while len(terms) < r:
        terms.append(RankOneTerm(0.0, _pad_factors(constrained, prior, t.dims)))
    notion = Notion.con() if constrained else None
    dec = Decomposition(tuple(terms), notion=notion, dims=t.dims).canonical()
    trace = DeflationTrace(tuple(steps), constrained, stopped, reason)
    objective = float(sum(s.sigma**2 for s in steps))
    return DeflationResult(
        decomposition=dec,
        trace=trace,
        objective=objective,
        residual=float(np.linalg.norm(resid)),
        info={"symmetric": symmetric, "seed": config.seed, "tensor_norm": tnorm},
    )


@dataclass
class GapReport:
    greedy_objective: float
    direct_objective: float
    gap: float
    greedy_normalized: float
    direct_normalized: float
    greedy: DeflationResult
    direct: ApproxResult


def _normalized_alignment(t: DenseTensor, dec: Decomposition) -> float:
    approx = assemble(dec)
    nrm = frobenius_norm(approx)
    if nrm == 0.0:
        return 0.0
    return float(abs(inner(t, approx)) / nrm)


def deflation_gap(
    t: DenseTensor, r: int, notion: Notion, config: SolverConfig | None = None
) -> GapReport:
    """Greedy constrained deflation vs the direct rank-r solve.

    The direct solve searches the whole feasible set, so its objective
    dominates the greedy one; the report also carries the normalized
    alignment |<T, A/||A||>| of both approximations A.
    """
    if notion.tag != "CON":
        raise UnsupportedShapeError(
            "deflation is defined for the completely orthogonal class only"
        )
    config = config or SolverConfig()
    greedy = deflate(t, r, constrained=True, config=config)
    direct = solve(ApproxProblem(t, notion, r, config=config))
    return GapReport(
        greedy_objective=greedy.objective,
        direct_objective=direct.objective,
        gap=direct.objective - greedy.objective,
        greedy_normalized=_normalized_alignment(t, greedy.decomposition),
        direct_normalized=_normalized_alignment(t, direct.decomposition),
        greedy=greedy,
        direct=direct,
    )
