"""Orthogonality notions for rank-one terms: predicates and certificates.

Four notions are supported. ON: the Frobenius inner product of the two
terms vanishes (the product of per-mode factor inner products is zero).
SON: ON, and in every mode the factors are either orthogonal or parallel
up to phase. CON: factors orthogonal in every mode. PCON(P): factors
orthogonal in the modes listed in P. P with one element is plain
semiorthogonality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError
from .tensor import Decomposition, RankOneTerm

#: default predicate tolerance, slightly looser than the construction
#: tolerance so ascent output passes its own certificate
DEFAULT_TOL = 1e-10

ON, SON, CON, PCON = "ON", "SON", "CON", "PCON"
_TAGS = (ON, SON, CON, PCON)


@dataclass(frozen=True)
class Notion:
    tag: str
    modes: frozenset[int] | None = None  # 1-based, required iff tag == PCON

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown notion tag {self.tag!r}")
        if self.tag == PCON:
            if not self.modes:
                raise ValueError("PCON requires a nonempty mode set P")
            object.__setattr__(self, "modes", frozenset(int(j) for j in self.modes))
            if any(j < 1 for j in self.modes):
                raise ShapeError("PCON modes are 1-based and must be >= 1")
        elif self.modes is not None:
            raise ValueError(f"{self.tag} does not take a mode set")

    @classmethod
    def on(cls) -> "Notion":
        return cls(ON)

    @classmethod
    def son(cls) -> "Notion":
        return cls(SON)

    @classmethod
    def con(cls) -> "Notion":
        return cls(CON)

    @classmethod
    def pcon(cls, modes) -> "Notion":
        return cls(PCON, frozenset(modes))

    def __str__(self) -> str:
        if self.tag == PCON:
            return f"PCON{{{','.join(str(j) for j in sorted(self.modes))}}}"
        return self.tag


@dataclass(frozen=True)
class PairCertificate:
    """Per-mode inner products and the verdicts they imply."""

    mode_inners: tuple
    verdicts: dict
    tol: float

    def ok(self, notion: Notion) -> bool:
        key = str(notion) if notion.tag == PCON else notion.tag
        return self.verdicts[key]

    def to_dict(self) -> dict:
        inners = []
        for s in self.mode_inners:
            inners.append([s.real, s.imag] if isinstance(s, complex) else s)
        return {"mode_inners": inners, "verdicts": dict(self.verdicts), "tol": self.tol}


def _unit_or_raise(v: np.ndarray) -> None:
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise ValueError("pair_check requires unit factor vectors")


def pair_check(x: RankOneTerm, y: RankOneTerm, notion: Notion, tol: float = DEFAULT_TOL) -> PairCertificate:
    """Certificate for one pair of rank-one terms under every notion at once.

    The verdict for PCON is recorded under the requested mode set; ON, SON
    and CON verdicts are always included so the implication chain can be
    audited from a single certificate.
    """
    if x.dims != y.dims:
        raise ShapeError(f"term dims differ: {x.dims} vs {y.dims}")
    d = x.order
    if notion.tag == PCON and max(notion.modes) > d:
        raise ShapeError(f"PCON modes {sorted(notion.modes)} exceed order {d}")
    inners = []
    for vx, vy in zip(x.factors, y.factors):
        _unit_or_raise(vx)
        _unit_or_raise(vy)
        s = np.vdot(vy, vx)  # conjugate-linear in the second argument
        inners.append(complex(s) if np.iscomplexobj(np.asarray(s)) else float(s.real))
    mags = np.array([abs(s) for s in inners])
    on_ok = bool(np.prod(mags) <= tol)
    son_ok = on_ok and bool(np.all((mags <= tol) | (np.abs(1.0 - mags) <= tol)))
    con_ok = bool(np.all(mags <= tol))
    verdicts = {ON: on_ok, SON: son_ok, CON: con_ok}
    if notion.tag == PCON:
        idx = [j - 1 for j in sorted(notion.modes)]
        verdicts[str(notion)] = bool(np.all(mags[idx] <= tol))
    return PairCertificate(tuple(inners), verdicts, tol)


@dataclass(frozen=True)
class DecompositionCertificate:
    ok: bool
    notion: Notion
    tol: float
    pairs: tuple  # ((k, k'), PairCertificate) for all k < k'

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "notion": str(self.notion),
            "tol": self.tol,
            "pairs": [{"terms": list(kk), **cert.to_dict()} for kk, cert in self.pairs],
        }


def decomposition_check(decomp: Decomposition, notion: Notion, tol: float = DEFAULT_TOL) -> DecompositionCertificate:
    """Check all r(r-1)/2 term pairs; the overall verdict is the conjunction."""
    if decomp.rank < 1:
        raise ValueError("decomposition_check requires at least one term")
    pairs = []
    ok = True
    for k in range(decomp.rank):
        for kk in range(k + 1, decomp.rank):
            cert = pair_check(decomp.terms[k], decomp.terms[kk], notion, tol)
            ok = ok and cert.ok(notion)
            pairs.append(((k, kk), cert))
    return DecompositionCertificate(ok, notion, tol, tuple(pairs))


def cross_orthogonality_check(decomp: Decomposition, tol: float = DEFAULT_TOL) -> bool:
    """True iff <v_kj, v_k'j'> = 0 for all k != k' and all mode pairs (j, j')."""
    if decomp.rank < 1:
        raise ValueError("cross_orthogonality_check requires at least one term")
    dims = decomp.dims
    if len(set(dims)) > 1:
        raise ShapeError(f"cross orthogonality needs equal mode dims, got {dims}")
    stacks = [np.stack(term.factors) for term in decomp.terms]  # each d x n
    for k in range(decomp.rank):
        for kk in range(k + 1, decomp.rank):
            gram = stacks[k] @ stacks[kk].conj().T
            if np.max(np.abs(gram)) > tol:
                return False
    return True
