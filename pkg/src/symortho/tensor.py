"""Dense tensors, contractions, symmetry utilities, and rank-one decompositions.

Conventions: tensors are dense row-major numpy arrays over the reals or
complexes; mode indices are 1-based throughout the public API; factor
vectors are plain 1-D arrays.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .exceptions import FieldError, ShapeError

REAL = "real"
COMPLEX = "complex"

_DTYPES = {REAL: np.float64, COMPLEX: np.complex128}

#: absolute tolerance for "first nonzero entry" during canonicalization
_CANON_TOL = 1e-12


def _as_field(data: np.ndarray) -> str:
    return COMPLEX if np.iscomplexobj(data) else REAL


@dataclass(frozen=True)
class DenseTensor:
    """Order-d tensor with explicit field tag.

    ``data`` is stored C-contiguous (row-major, last index fastest), so the
    flat serialization order is ``data.ravel()``.
    """

    data: np.ndarray
    field: str = REAL

    def __post_init__(self):
        if self.field not in _DTYPES:
            raise FieldError(f"unknown field tag {self.field!r}")
        arr = np.ascontiguousarray(self.data, dtype=_DTYPES[self.field])
        if arr.ndim < 1:
            raise ShapeError("tensors must have order d >= 1")
        if any(n < 1 for n in arr.shape):
            raise ShapeError(f"dims must be positive, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, array) -> "DenseTensor":
        arr = np.asarray(array)
        return cls(arr, _as_field(arr))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def is_cubical(self) -> bool:
        return len(set(self.dims)) == 1

    def __eq__(self, other) -> bool:  # value equality, exact
        return (
            isinstance(other, DenseTensor)
            and self.field == other.field
            and self.dims == other.dims
            and bool(np.array_equal(self.data, other.data))
        )


def _check_same_shape(t: DenseTensor, s: DenseTensor) -> None:
    if t.dims != s.dims:
        raise ShapeError(f"dimension mismatch: {t.dims} vs {s.dims}")
    if t.field != s.field:
        raise FieldError(f"field mismatch: {t.field} vs {s.field}")


def inner(t: DenseTensor, s: DenseTensor):
    """Frobenius inner product, conjugate-linear in the second argument."""
    _check_same_shape(t, s)
    value = np.vdot(s.data, t.data)  # vdot conjugates its first argument
    return complex(value) if t.field == COMPLEX else float(value.real)


def frobenius_norm(t: DenseTensor) -> float:
    return float(np.linalg.norm(t.data.ravel()))


def contract_mode(t: DenseTensor, j: int, v: np.ndarray):
    """Contract mode j (1-based) with vector v, dropping that mode.

    The contraction is linear in ``v`` (no conjugation). Contracting an
    order-1 tensor returns a plain scalar.
    """
    if not 1 <= j <= t.order:
        raise ShapeError(f"mode index {j} out of range for order {t.order}")
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != t.dims[j - 1]:
        raise ShapeError(f"vector length {v.shape} does not match mode {j} of dims {t.dims}")
    data = np.tensordot(t.data, v, axes=([j - 1], [0]))
    if data.ndim == 0:
        return data.item()
    return DenseTensor.from_array(data)


def contract_all_but_one(t: DenseTensor, j: int, vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Contract every mode except mode j (1-based) with the given vectors.

    ``vectors`` has one entry per mode; entry j-1 is ignored. Returns the
    resulting length-n_j vector as a raw array.
    """
    data = t.data
    # contract from the highest mode down so remaining axis numbers are stable
    for axis in range(t.order - 1, -1, -1):
        if axis == j - 1:
            continue
        data = np.tensordot(data, np.asarray(vectors[axis]), axes=([axis], [0]))
    return data


def outer(vectors: Sequence[np.ndarray]) -> DenseTensor:
    """Rank-one tensor from a list of factor vectors."""
    vecs = [np.asarray(v) for v in vectors]
    if not vecs:
        raise ShapeError("outer requires at least one vector")
    return DenseTensor.from_array(reduce(np.multiply.outer, vecs))


def is_symmetric(t: DenseTensor, tol: float = 1e-12) -> bool:
    """True if every permuted entry matches within ``tol``.

    Checks all d! permutations for d <= 4 and the adjacent-transposition
    generators otherwise (invariance under generators is equivalent).
    """
    if not t.is_cubical:
        raise ShapeError(f"symmetry is defined for cubical tensors, got dims {t.dims}")
    d = t.order
    if d == 1:
        return True
    if d <= 4:
        perms: Iterable[tuple[int, ...]] = itertools.permutations(range(d))
    else:
        perms = [tuple(range(i)) + (i + 1, i) + tuple(range(i + 2, d)) for i in range(d - 1)]
    return all(np.allclose(t.data, t.data.transpose(p), rtol=0.0, atol=tol) for p in perms)


def symmetrize(t: DenseTensor) -> DenseTensor:
    """Average over all index permutations (the projection onto symmetric tensors)."""
    if not t.is_cubical:
        raise ShapeError(f"cannot symmetrize non-cubical dims {t.dims}")
    d = t.order
    acc = np.zeros_like(t.data)
    for p in itertools.permutations(range(d)):
        acc += t.data.transpose(p)
    return DenseTensor(acc / math.factorial(d), t.field)


def _leading_phase(v: np.ndarray):
    """Phase (sign over the reals) of the first nonzero entry of ``v``."""
    for x in v:
        if abs(x) > _CANON_TOL:
            return x / abs(x)
    return 1.0


@dataclass(frozen=True)
class RankOneTerm:
    """One summand sigma * v_1 (x) ... (x) v_d with unit factor vectors."""

    sigma: complex | float
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(np.asarray(v) for v in self.factors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.factors)

    @property
    def order(self) -> int:
        return len(self.factors)

    def canonical(self) -> "RankOneTerm":
        """Make the first nonzero entry of each factor positive real.

        The removed phases are absorbed into sigma, so the assembled tensor
        is unchanged.
        """
        sigma = self.sigma
        new_factors = []
        for v in self.factors:
            phase = _leading_phase(v)
            new_factors.append(v / phase)
            sigma = sigma * phase
        if not np.iscomplexobj(np.asarray(sigma)) or abs(complex(sigma).imag) < _CANON_TOL:
            sigma = float(np.real(sigma))
        return RankOneTerm(sigma, tuple(new_factors))

    def to_tensor(self) -> DenseTensor:
        t = outer(self.factors)
        data = self.sigma * t.data
        return DenseTensor.from_array(data)


@dataclass(frozen=True)
class Decomposition:
    """Ordered list of rank-one terms, optionally tagged with a notion."""

    terms: tuple[RankOneTerm, ...]
    notion: object = None  # orthogonality.Notion; kept loose to avoid a cycle
    dims: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        shapes = {t.dims for t in self.terms}
        if len(shapes) > 1:
            raise ShapeError(f"terms have inconsistent dims: {sorted(shapes)}")
        if self.terms:
            term_dims = self.terms[0].dims
            if self.dims is not None and tuple(self.dims) != term_dims:
                raise ShapeError(f"declared dims {self.dims} do not match terms {term_dims}")
            object.__setattr__(self, "dims", term_dims)
        elif self.dims is not None:
            object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def rank(self) -> int:
        return len(self.terms)

    def canonical(self) -> "Decomposition":
        return replace(self, terms=tuple(t.canonical() for t in self.terms))

    def sigmas(self) -> np.ndarray:
        return np.array([t.sigma for t in self.terms])


def assemble(decomp: Decomposition) -> DenseTensor:
    """Sum of sigma_k times the outer product of each term's factors."""
    if not decomp.terms:
        if decomp.dims is None:
            raise ShapeError("cannot assemble an empty decomposition without dims")
        return DenseTensor.from_array(np.zeros(decomp.dims))
    acc = decomp.terms[0].to_tensor().data.copy()
    for term in decomp.terms[1:]:
        acc = acc + term.to_tensor().data
    return DenseTensor.from_array(acc)


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def tensor_to_json(t: DenseTensor) -> str:
    """Serialize per the wire contract (flat row-major, full precision)."""
    flat = t.data.ravel()
    if t.field == COMPLEX:
        data = [[float(x.real), float(x.imag)] for x in flat]
    else:
        data = [float(x) for x in flat]
    return json.dumps({"field": t.field, "dims": list(t.dims), "data": data})


def tensor_from_json(text: str) -> DenseTensor:
    """Parse the tensor wire format, with field-level diagnostics on error."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeError(f"malformed tensor JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ShapeError("malformed tensor JSON: top level must be an object")
    for key in ("field", "dims", "data"):
        if key not in obj:
            raise ShapeError(f"malformed tensor JSON: missing field {key!r}")
    tag = obj["field"]
    if tag not in _DTYPES:
        raise FieldError(f"malformed tensor JSON: field must be 'real' or 'complex', got {tag!r}")
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(n, int) and n >= 1 for n in dims):
        raise ShapeError(f"malformed tensor JSON: dims must be a nonempty list of positive ints, got {dims!r}")
    data = obj["data"]
    expected = math.prod(dims)
    if not isinstance(data, list) or len(data) != expected:
        raise ShapeError(
            f"malformed tensor JSON: data length {len(data) if isinstance(data, list) else '??'}"
            f" does not match prod(dims) = {expected}"
        )
    if tag == COMPLEX:
        try:
            flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
        except (TypeError, ValueError) as exc:
            raise ShapeError("malformed tensor JSON: complex data entries must be [re, im] pairs") from exc
    else:
        try:
            flat = np.array([float(x) for x in data], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ShapeError("malformed tensor JSON: real data entries must be numbers") from exc
    return DenseTensor(flat.reshape(dims), tag)


# ---------------------------------------------------------------------------
# Random generators (used by tests, suites, and the CLI)
# ---------------------------------------------------------------------------

def random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_tensor(dims: Sequence[int], rng: np.random.Generator, normalize: bool = True) -> DenseTensor:
    data = rng.standard_normal(tuple(dims))
    if normalize:
        data /= np.linalg.norm(data.ravel())
    return DenseTensor.from_array(data)


def random_symmetric(n: int, d: int, rng: np.random.Generator, normalize: bool = True) -> DenseTensor:
    t = symmetrize(random_tensor([n] * d, rng, normalize=False))
    if normalize:
        nrm = frobenius_norm(t)
        if nrm > 0:
            t = DenseTensor(t.data / nrm, t.field)
    return t
