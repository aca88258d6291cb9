"""Certified global brackets for angle-parametrized constraint classes.

Small shapes admit an exact chart: at n=2 every frame variable is a
rotation by one angle (the orthogonal complement is the quarter turn), and
the shared n=3 frame is a product of three rotations. On those charts the
objective is a trigonometric polynomial, so a branch-and-bound search with
a derivative-based box bound yields a rigorous enclosure [lo, hi] of the
global optimum: lo is the value at an evaluated feasible point, hi comes
from the bound. Unsupported shapes raise instead of being approximated.

The box bound is the minimum of two second-order Taylor enclosures built
from exact per-term derivatives. Let g_k be the inner product of T against
term k and A[k,i] the number of factors of term k that depend on angle i.
Every chart atom has derivatives of norm at most one in each order, so
differentiating a product q times multiplies the count bound by
(A[k,i] + q - 1); in particular |d3 g_k| <= A[k,i](A[k,l]+1)(A[k,q]+2)||T||
globally, which caps the Lagrange remainder.

Bound one encloses each |g_k| on the box (center value, gradient, exact
Hessian, cubic remainder), caps at ||T||, and sums the squares. It is
tight far from optima. Bound two expands f = sum g_k^2 itself, with
grad f and hess f assembled exactly from the per-term data, and encloses
the quadratic model over the box both coordinate-wise and through a
trust-region dual: for any mu >= max(lmax(hess f), 0),

    max_{|delta| <= R} grad.delta + delta'H delta/2
        <= g'(mu I - H)^{-1} g / 2 + mu R^2 / 2.

The dual step matters when the maximizer set is positive-dimensional
(plateaus do happen: a coordinate flat of optima is a curve or surface,
not a point). There the per-term route has a floor, sum_k |g_k||dg_k|
ignores the cancellation that makes grad f vanish, while the dual bound
cancels the gradient against the negative curvature exactly to second
order and leaves only the cubic remainder.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .ascent import (
    COL,
    FrameLayout,
    batched_contract,
    frame_ascent,
    frame_objective,
    random_frames,
    slot_vector,
)
from .exceptions import BudgetError, FieldError, UnsupportedShapeError
from .patterns import on_layout, on_patterns, son_layout, son_patterns
from .solvers import ApproxProblem, _con_layout, _pcon_layout
from .tensor import REAL, frobenius_norm, is_symmetric

MAX_ANGLES = 4
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OracleReport:
    lo: float
    hi: float
    best_params: tuple
    resolution: float  # initial grid step (radians)
    depth: int
    evaluations: int
    shape: str

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "best_params": [float(a) for a in self.best_params],
            "resolution": self.resolution,
            "depth": self.depth,
            "evaluations": self.evaluations,
            "shape": self.shape,
        }


@dataclass(frozen=True)
class AngleShape:
    layout: FrameLayout
    kinds: tuple      # per variable: ("rot", g) | ("const",) | ("euler", r)
    var_angles: tuple  # per variable: global angle indices it consumes
    boxes: tuple       # per angle: (lo, hi)
    label: str = ""

    @property
    def n_angles(self) -> int:
        return len(self.boxes)


def _column_swap_symmetric(layout: FrameLayout) -> bool:
    """Whether swapping the two columns of every frame permutes the terms.

    True for pure two-column layouts where term k reads column k of each of
    its variables; then theta -> theta + pi/2 applied to every angle maps
    term 1 to term 2 and back, leaving the objective sum unchanged.
    """
    if layout.rank != 2:
        return False
    for k, row in enumerate(layout.slot_map):
        for spec in row:
            if spec[0] != COL or spec[2] != k:
                return False
    return all(g == 2 for _, g in layout.var_shapes)


def compile_rotation_chart(layout: FrameLayout, label: str = "") -> AngleShape:
    """Angle chart for a layout whose variables live in dimension two.

    When the layout has the column-swap symmetry the first angle only needs
    a quarter period: the simultaneous shift of all angles by pi/2 swaps
    the two terms, so every orbit has a representative with the first
    angle in [0, pi/2).
    """
    kinds, var_angles, boxes = [], [], []
    for n, g in layout.var_shapes:
        if n == 2 and g in (1, 2):
            kinds.append(("rot", g))
            var_angles.append((len(boxes),))
            boxes.append((0.0, np.pi))
        elif (n, g) == (1, 1):
            kinds.append(("const",))
            var_angles.append(())
        else:
            raise UnsupportedShapeError(f"no angle chart for a variable of shape {(n, g)}")
    if boxes and _column_swap_symmetric(layout):
        boxes[0] = (0.0, 0.5 * np.pi)
    return AngleShape(layout, tuple(kinds), tuple(var_angles), tuple(boxes), label)


def compile_euler_chart(layout: FrameLayout, label: str = "") -> AngleShape:
    """Chart for a single shared 3-dimensional frame via z-y-z rotations.

    The last angle only needs [0, pi): appending Rz(pi) flips the signs of
    the first two columns, and when every term reads a single column in all
    of its modes a column sign flip rescales that term by +-1, which the
    squared objective ignores. The chart therefore still covers every
    orthonormal column set.
    """
    if len(layout.var_shapes) != 1 or layout.var_shapes[0][0] != 3:
        raise UnsupportedShapeError("euler chart expects one shared 3-dimensional frame")
    for row in layout.slot_map:
        cols = {spec[2] for spec in row}
        if any(spec[0] != COL for spec in row) or len(cols) != 1:
            raise UnsupportedShapeError("euler chart expects one column per term")
    r = layout.var_shapes[0][1]
    boxes = ((0.0, _TWO_PI), (0.0, np.pi), (0.0, np.pi))
    return AngleShape(layout, (("euler", r),), ((0, 1, 2),), boxes, label)


def _rot_stack(theta: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty((theta.shape[0], 2, 2))
    out[:, 0, 0] = c
    out[:, 0, 1] = -s
    out[:, 1, 0] = s
    out[:, 1, 1] = c
    return out


def _drot_stack(theta: np.ndarray) -> np.ndarray:
    return _rot_stack(theta + 0.5 * np.pi)


def _ddrot_stack(theta: np.ndarray) -> np.ndarray:
    return _rot_stack(theta + np.pi)


def _rz(theta):
    K = theta.shape[0]
    out = np.zeros((K, 3, 3))
    c, s = np.cos(theta), np.sin(theta)
    out[:, 0, 0] = c
    out[:, 0, 1] = -s
    out[:, 1, 0] = s
    out[:, 1, 1] = c
    out[:, 2, 2] = 1.0
    return out


def _drz(theta):
    K = theta.shape[0]
    out = np.zeros((K, 3, 3))
    c, s = np.cos(theta), np.sin(theta)
    out[:, 0, 0] = -s
    out[:, 0, 1] = -c
    out[:, 1, 0] = c
    out[:, 1, 1] = -s
    return out


def _ddrz(theta):
    K = theta.shape[0]
    out = np.zeros((K, 3, 3))
    c, s = np.cos(theta), np.sin(theta)
    out[:, 0, 0] = -c
    out[:, 0, 1] = s
    out[:, 1, 0] = -s
    out[:, 1, 1] = -c
    return out


def _ry(theta):
    K = theta.shape[0]
    out = np.zeros((K, 3, 3))
    c, s = np.cos(theta), np.sin(theta)
    out[:, 0, 0] = c
    out[:, 0, 2] = s
    out[:, 1, 1] = 1.0
    out[:, 2, 0] = -s
    out[:, 2, 2] = c
    return out


def _dry(theta):
    K = theta.shape[0]
    out = np.zeros((K, 3, 3))
    c, s = np.cos(theta), np.sin(theta)
    out[:, 0, 0] = -s
    out[:, 0, 2] = c
    out[:, 2, 0] = -c
    out[:, 2, 2] = -s
    return out


def _ddry(theta):
    K = theta.shape[0]
    out = np.zeros((K, 3, 3))
    c, s = np.cos(theta), np.sin(theta)
    out[:, 0, 0] = -c
    out[:, 0, 2] = -s
    out[:, 2, 0] = s
    out[:, 2, 2] = -c
    return out


def _build_variables(shape: AngleShape, angles: np.ndarray):
    """Frame variables plus first and second angle derivatives, batched.

    derivs[(vi, i)] and dderivs[(vi, i, l)] (with i <= l) hold the exact
    chart derivatives; every entry is a product of rotation factors, so all
    of them have columns of norm at most one.
    """
    K = angles.shape[0]
    variables, derivs, dderivs = [], {}, {}
    for vi, (kind, ids) in enumerate(zip(shape.kinds, shape.var_angles)):
        if kind[0] == "rot":
            g = kind[1]
            th = angles[:, ids[0]]
            variables.append(_rot_stack(th)[:, :, :g])
            derivs[(vi, ids[0])] = _drot_stack(th)[:, :, :g]
            dderivs[(vi, ids[0], ids[0])] = _ddrot_stack(th)[:, :, :g]
        elif kind[0] == "const":
            variables.append(np.ones((K, 1, 1)))
        else:
            r = kind[1]
            a, b, c = (angles[:, i] for i in ids)
            Za, Yb, Zc = _rz(a), _ry(b), _rz(c)
            dZa, dYb, dZc = _drz(a), _dry(b), _drz(c)
            ia, ib, ic = ids
            variables.append((Za @ Yb @ Zc)[:, :, :r])
            derivs[(vi, ia)] = (dZa @ Yb @ Zc)[:, :, :r]
            derivs[(vi, ib)] = (Za @ dYb @ Zc)[:, :, :r]
            derivs[(vi, ic)] = (Za @ Yb @ dZc)[:, :, :r]
            dderivs[(vi, ia, ia)] = (_ddrz(a) @ Yb @ Zc)[:, :, :r]
            dderivs[(vi, ia, ib)] = (dZa @ dYb @ Zc)[:, :, :r]
            dderivs[(vi, ia, ic)] = (dZa @ Yb @ dZc)[:, :, :r]
            dderivs[(vi, ib, ib)] = (Za @ _ddry(b) @ Zc)[:, :, :r]
            dderivs[(vi, ib, ic)] = (Za @ dYb @ dZc)[:, :, :r]
            dderivs[(vi, ic, ic)] = (Za @ Yb @ _ddrz(c))[:, :, :r]
    return variables, derivs, dderivs


def _contract_pair(T: np.ndarray, vecs, s: int, sp: int) -> np.ndarray:
    """Contract every mode except s < sp; returns shape (B, n_s, n_sp)."""
    d = T.ndim
    data = np.moveaxis(T, (s, sp), (0, 1))
    batched = False
    rest = [a for a in range(d) if a not in (s, sp)]
    for a in reversed(rest):
        v = np.asarray(vecs[a])
        if batched:
            data = np.einsum("b...i,bi->b...", data, v)
        else:
            data = np.einsum("...i,bi->b...", data, v)
            batched = True
    if not batched:  # order-2 tensor: both open modes survive
        B = np.asarray(vecs[s]).shape[0]
        data = np.broadcast_to(data[None], (B,) + data.shape).copy()
    return data


def _slot_derivs(shape: AngleShape, variables, derivs, dderivs, spec):
    """First and second angle derivatives of one slot vector."""
    if spec[0] == COL:
        _, vi, ci = spec
        ids = shape.var_angles[vi]
        first = {ai: derivs[(vi, ai)][:, :, ci] for ai in ids}
        second = {}
        for p, ai in enumerate(ids):
            for al in ids[p:]:
                second[(ai, al)] = dderivs[(vi, ai, al)][:, :, ci]
        return first, second
    _, vi, c0, c1, wi = spec
    X = variables[vi][:, :, c0:c1]
    y = variables[wi][:, :, 0]
    ids_x = shape.var_angles[vi]
    ids_y = shape.var_angles[wi]
    first, second = {}, {}
    for ai in ids_x:
        first[ai] = np.einsum("bnc,bc->bn", derivs[(vi, ai)][:, :, c0:c1], y)
    for ai in ids_y:
        first[ai] = np.einsum("bnc,bc->bn", X, derivs[(wi, ai)][:, :, 0])
    for p, ai in enumerate(ids_x):
        for al in ids_x[p:]:
            second[(ai, al)] = np.einsum("bnc,bc->bn", dderivs[(vi, ai, al)][:, :, c0:c1], y)
    for ai in ids_x:
        for al in ids_y:
            key = (min(ai, al), max(ai, al))
            second[key] = np.einsum(
                "bnc,bc->bn", derivs[(vi, ai)][:, :, c0:c1], derivs[(wi, al)][:, :, 0]
            )
    for p, ai in enumerate(ids_y):
        for al in ids_y[p:]:
            second[(ai, al)] = np.einsum("bnc,bc->bn", X, dderivs[(wi, ai, al)][:, :, 0])
    return first, second


def _evaluate_terms(T: np.ndarray, shape: AngleShape, angles: np.ndarray):
    """Per-term inner products with exact angle gradients and Hessians.

    d2g sums the two kinds of second-order contributions: one derivative
    order landing twice on a single slot, and first derivatives landing on
    two distinct slots (via the pair-open contraction of T).
    """
    variables, derivs, dderivs = _build_variables(shape, angles)
    layout = shape.layout
    K = angles.shape[0]
    m = shape.n_angles
    g = np.empty((K, layout.rank))
    dg = np.zeros((K, layout.rank, m))
    d2g = np.zeros((K, layout.rank, m, m))
    for k, row in enumerate(layout.slot_map):
        vecs = [slot_vector(variables, spec) for spec in row]
        g[:, k] = batched_contract(T, vecs)
        slot_d = [_slot_derivs(shape, variables, derivs, dderivs, spec) for spec in row]
        for s in range(len(row)):
            first, second = slot_d[s]
            if not first:
                continue
            w = batched_contract(T, vecs, skip=s)
            for ai, dv in first.items():
                dg[:, k, ai] += np.sum(w * dv, axis=1)
            for (ai, al), ddv in second.items():
                val = np.sum(w * ddv, axis=1)
                d2g[:, k, ai, al] += val
                if ai != al:
                    d2g[:, k, al, ai] += val
        for s in range(len(row)):
            if not slot_d[s][0]:
                continue
            for sp in range(s + 1, len(row)):
                if not slot_d[sp][0]:
                    continue
                W = _contract_pair(T, vecs, s, sp)
                for ai, dvs in slot_d[s][0].items():
                    u = np.einsum("bnm,bn->bm", W, dvs)
                    for al, dvp in slot_d[sp][0].items():
                        val = np.sum(u * dvp, axis=1)
                        d2g[:, k, ai, al] += val
                        d2g[:, k, al, ai] += val
    return g, dg, d2g


def _remainder_coeffs(shape: AngleShape):
    """Count tensors bounding third derivatives of the chart objective.

    An atom is one (slot, variable) use; it depends on the angles of its
    variable, and every chart atom has unit-bounded derivatives of all
    orders. A derivative either hits a fresh atom or re-hits an already
    differentiated one, so three derivatives taken in the order (a, b, c)
    produce at most A_a (A_b + O_ab) (A_c + O_ac + O_bc) summands, with O
    the same-variable overlap indicator; minimizing over the six orders
    tightens charts whose angles live in separate variables. Returns the
    per-angle atom counts A[k,i] and the pair and triple count tensors with
    N2[k,i,l] >= |d2 g_k| / ||T|| and N3[k,i,l,q] >= |d3 g_k| / ||T||.
    """
    layout = shape.layout
    m = shape.n_angles
    r = layout.rank
    A = np.zeros((r, m))
    O = np.zeros((r, m, m))
    for k, row in enumerate(layout.slot_map):
        for spec in row:
            vars_used = (spec[1],) if spec[0] == COL else (spec[1], spec[4])
            for vi in vars_used:
                ids = shape.var_angles[vi]
                for ai in ids:
                    A[k, ai] += 1.0
                    for al in ids:
                        O[k, ai, al] = 1.0
    N2 = np.empty((r, m, m))
    for i in range(m):
        for l in range(m):
            N2[:, i, l] = np.minimum(
                A[:, i] * (A[:, l] + O[:, i, l]), A[:, l] * (A[:, i] + O[:, i, l])
            )
    N3 = np.empty((r, m, m, m))
    for i in range(m):
        for l in range(m):
            for q in range(m):
                best = np.full(r, np.inf)
                for a, b, c in permutations((i, l, q)):
                    cnt = A[:, a] * (A[:, b] + O[:, a, b]) * (A[:, c] + O[:, a, c] + O[:, b, c])
                    best = np.minimum(best, cnt)
                N3[:, i, l, q] = best
    return A, N2, N3




def _extract_angles(shape: AngleShape, variables, start: int) -> np.ndarray:
    out = np.zeros(shape.n_angles)
    for vi, (kind, ids) in enumerate(zip(shape.kinds, shape.var_angles)):
        X = variables[vi][start]
        if kind[0] == "rot":
            out[ids[0]] = np.arctan2(X[1, 0], X[0, 0]) % np.pi
        elif kind[0] == "euler":
            r = kind[1]
            Q = np.array(X)
            if r < 3:
                full = np.linalg.qr(np.hstack([Q, np.eye(3)]))[0][:, :3]
                full[:, :r] = Q
                if r == 2:
                    full[:, 2] = np.cross(Q[:, 0], Q[:, 1])
            else:
                full = Q
            if np.linalg.det(full) < 0:
                full = full.copy()
                full[:, 2] *= -1.0
            beta = float(np.arccos(np.clip(full[2, 2], -1.0, 1.0)))
            if np.sin(beta) > 1e-12:
                alpha = float(np.arctan2(full[1, 2], full[0, 2]))
                gamma = float(np.arctan2(full[2, 1], -full[2, 0]))
            else:
                alpha = float(np.arctan2(full[1, 0], full[0, 0]))
                gamma = 0.0
                if full[2, 2] < 0:
                    alpha = float(np.arctan2(-full[1, 0], -full[0, 0]))
            out[ids[0]] = alpha % _TWO_PI
            out[ids[1]] = min(max(beta, 0.0), np.pi)
            out[ids[2]] = gamma % np.pi  # column signs fold the second half-turn
    return out


def _initial_step(m: int) -> float:
    return np.pi / 180.0 if m <= 2 else np.pi / 12.0


def _trust_region_dual(gradf: np.ndarray, hessf: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Upper bound on max of grad.delta + delta'H delta/2 over |delta| <= R.

    Every mu >= max(lmax(H), 0) certifies a bound (split off mu|delta|^2/2,
    bound that by mu R^2/2, maximize the rest in closed form), so the
    bisection below only tunes tightness; soundness never depends on it.
    """
    lam, Q = np.linalg.eigh(hessf)
    b2 = np.einsum("bij,bi->bj", Q, gradf) ** 2
    bnorm = np.sqrt(b2.sum(axis=1))
    floor = np.maximum(lam[:, -1], 0.0)
    Rsafe = np.maximum(R, 1e-30)
    eps = 1e-9 * (1.0 + floor + bnorm / Rsafe)
    mu_lo = floor + eps
    mu_hi = floor + bnorm / Rsafe + eps

    def phi(mu):
        return 0.5 * np.sum(b2 / (mu[:, None] - lam), axis=1) + 0.5 * mu * R * R

    for _ in range(30):  # phi is convex beyond lmax; bisect its slope
        mid = 0.5 * (mu_lo + mu_hi)
        rising = np.sum(b2 / (mid[:, None] - lam) ** 2, axis=1) <= R * R
        mu_hi = np.where(rising, mid, mu_hi)
        mu_lo = np.where(rising, mu_lo, mid)
    return np.minimum(phi(mu_lo), phi(mu_hi))


def polish_shape(
    T: np.ndarray,
    shape: AngleShape,
    rng: np.random.Generator,
    starts: int = 32,
):
    """Multistart ascent restricted to one chart: a lower bound and its angles."""
    if shape.n_angles == 0:
        variables, _ = _build_variables(shape, np.zeros((1, 1)))
        f, _ = frame_objective(T, shape.layout, variables)
        return float(f[0]), ()
    run = frame_ascent(T, shape.layout, random_frames(shape.layout.var_shapes, rng, starts))
    angles = _extract_angles(shape, run.variables, int(np.argmax(run.objective)))
    g0, _, _ = _evaluate_terms(T, shape, angles[None, :])
    return float(np.sum(g0**2)), tuple(angles)


def certify_shape(
    T: np.ndarray,
    shape: AngleShape,
    certification_tol: float,
    rng: np.random.Generator,
    polish_starts: int = 32,
    budget: int = 3_000_000,
    chunk: int = 8192,
    floor: float = -np.inf,
    warm: tuple | None = None,
):
    """Branch-and-bound enclosure of the maximum over one angle chart.

    floor is a proven lower bound on the quantity the caller brackets (the
    max across charts); boxes that cannot beat it are dropped early, which
    lets dominated charts finish at coarse resolution.
    """
    m = shape.n_angles
    tnorm = float(np.linalg.norm(T))
    if m == 0:
        variables, _ = _build_variables(shape, np.zeros((1, 1)))
        f, _ = frame_objective(T, shape.layout, variables)
        v = float(f[0])
        return v, v, (), 0.0, 0, 1

    if warm is None:
        lo, best_params = polish_shape(T, shape, rng, polish_starts)
    else:
        g0, _, _ = _evaluate_terms(T, shape, np.asarray(warm)[None, :])
        lo = float(np.sum(g0**2))
        best_params = tuple(warm)
    thr = max(lo, floor)

    A, N2, N3 = _remainder_coeffs(shape)
    step = _initial_step(m)
    axes = []
    for a, b in shape.boxes:
        count = max(1, int(np.ceil((b - a) / step)))
        width = (b - a) / count
        axes.append((a + width * (np.arange(count) + 0.5), width / 2.0))
    centers = np.stack([g.ravel() for g in np.meshgrid(*[ax for ax, _ in axes], indexing="ij")], axis=1)
    halves = np.array([h for _, h in axes])

    heap: list = []
    counter = 0
    evaluations = 0
    max_depth = 0
    # a box is dropped only while its bound is <= lo + tol; lo never shrinks,
    # so tracking the largest dropped bound keeps the final bracket rigorous
    prune_hi = -np.inf

    def push_boxes(C, Hw, depth):
        nonlocal lo, thr, best_params, counter, evaluations, prune_hi
        for s0 in range(0, C.shape[0], chunk):
            cs = C[s0 : s0 + chunk]
            hs = Hw[s0 : s0 + chunk]
            g, dg, d2g = _evaluate_terms(T, shape, cs)
            evaluations += cs.shape[0]
            f = np.sum(g * g, axis=1)
            i_best = int(np.argmax(f))
            if f[i_best] > lo:
                lo = float(f[i_best])
                best_params = tuple(cs[i_best])
                thr = max(lo, floor)
            rem3 = np.einsum("bi,bl,bq,kilq->bk", hs, hs, hs, N3)
            ghat = np.abs(g) + np.sum(hs[:, None, :] * np.abs(dg), axis=2)
            ghat += 0.5 * np.einsum("bi,bkil,bl->bk", hs, np.abs(d2g), hs)
            ghat += (tnorm / 6.0) * rem3
            gb = np.minimum(ghat, tnorm)
            ub_terms = np.sum(gb**2, axis=1)
            gradf = 2.0 * np.einsum("bk,bki->bi", g, dg)
            hessf = 2.0 * (
                np.einsum("bki,bkl->bil", dg, dg) + np.einsum("bk,bkil->bil", g, d2g)
            )
            # |d3 f| over the box from localized |g|, |dg|, |d2g| enclosures
            dgb = np.abs(dg) + np.einsum("bkil,bl->bki", np.abs(d2g), hs)
            dgb += (tnorm / 2.0) * np.einsum("bl,bq,kilq->bki", hs, hs, N3)
            dgb = np.minimum(dgb, tnorm * A)
            d2gb = np.abs(d2g) + tnorm * np.einsum("bq,kilq->bkil", hs, N3)
            d2gb = np.minimum(d2gb, tnorm * N2)
            u1 = np.sum(hs[:, None, :] * dgb, axis=2)
            u2 = np.einsum("bl,bq,bklq->bk", hs, hs, d2gb)
            rem_f = np.sum(gb * rem3 * tnorm + 3.0 * u1 * u2, axis=1) / 3.0
            hess_row = np.einsum("bil,bl->bi", np.abs(hessf), hs)
            ub_f = f + np.sum(hs * np.abs(gradf), axis=1)
            ub_f += 0.5 * np.sum(hs * hess_row, axis=1)
            ub_f += rem_f
            radius = np.sqrt(np.sum(hs * hs, axis=1))
            ub_tr = f + _trust_region_dual(gradf, hessf, radius) + rem_f
            ub = np.minimum(ub_terms, np.minimum(ub_f, ub_tr))
            keep = ub > thr + certification_tol
            if not keep.all():
                prune_hi = max(prune_hi, float(ub[~keep].max()))
            # split where the box bound is most sensitive, not where it is widest
            rem_sens = (3.0 * rem_f / np.maximum(hs.sum(axis=1), 1e-300))[:, None] * hs
            split = np.argmax(hs * (np.abs(gradf) + hess_row) + rem_sens, axis=1)
            for i in np.nonzero(keep)[0]:
                heapq.heappush(
                    heap,
                    (-float(ub[i]), counter, tuple(cs[i]), tuple(hs[i]), depth, int(split[i])),
                )
                counter += 1

    push_boxes(centers, np.broadcast_to(halves, centers.shape), 0)

    while heap and -heap[0][0] > thr + certification_tol:
        if evaluations > budget:
            raise BudgetError(
                f"bracket wider than {certification_tol:g} after {evaluations} evaluations "
                f"(current gap {-heap[0][0] - thr:.3e})"
            )
        batch_c, batch_h, batch_d = [], [], []
        while heap and -heap[0][0] > thr + certification_tol and len(batch_c) < chunk // 2:
            _, _, c, h, depth, w = heapq.heappop(heap)
            for sgn in (-1.0, 1.0):
                child = list(c)
                child[w] += sgn * h[w] / 2.0
                batch_c.append(child)
                hh = list(h)
                hh[w] /= 2.0
                batch_h.append(hh)
                batch_d.append(depth + 1)
        if not batch_c:
            break
        max_depth = max(max_depth, batch_d[-1])
        push_boxes(np.asarray(batch_c), np.asarray(batch_h), batch_d[-1])

    hi = max(lo, prune_hi)
    if heap:
        hi = max(hi, -heap[0][0])
    return lo, float(hi), best_params, step, max_depth, evaluations


def _charts_for(problem: ApproxProblem) -> list[AngleShape]:
    t = problem.tensor
    dims, r, notion = t.dims, problem.rank, problem.notion
    tag = notion.tag
    if all(n == 2 for n in dims):
        if tag in ("SON", "ON") and problem.symmetric_constraint:
            # symmetric terms collapse to orthonormal directions
            layout = _con_layout(dims, min(r, 2), shared=True)
            return [compile_rotation_chart(layout, "symmetric")]
        if tag == "CON":
            layout = _con_layout(dims, r, shared=problem.symmetric_constraint)
            return [compile_rotation_chart(layout, "frames")]
        if tag == "PCON":
            layout = _pcon_layout(
                dims, r, notion.modes, structured=problem.structured, shared=problem.symmetric_constraint
            )
            return [compile_rotation_chart(layout, "frames")]
        if tag == "SON":
            pats = son_patterns(r, dims, dedupe_modes=t.is_cubical and is_symmetric(t))
            return [compile_rotation_chart(son_layout(p, dims), str(p)) for p in pats]
        if tag == "ON":
            pats = on_patterns(r, dims, dedupe_modes=t.is_cubical and is_symmetric(t))
            return [compile_rotation_chart(on_layout(p, dims), str(p)) for p in pats]
        raise UnsupportedShapeError(f"unknown notion {notion}")
    if (
        all(n == 3 for n in dims)
        and tag == "CON"
        and problem.symmetric_constraint
        and is_symmetric(t)
    ):
        return [compile_euler_chart(_con_layout(dims, r, shared=True), "rotation-group")]
    raise UnsupportedShapeError(
        f"no certified chart for dims {dims}, notion {notion}"
        f"{', symmetric' if problem.symmetric_constraint else ''}"
    )


def grid_oracle(problem: ApproxProblem, certification_tol: float = 1e-6) -> OracleReport:
    """Certified bracket on the constrained maximum of sum_k <T, Y_k>^2.

    Supported charts: every notion at n=2 (up to four free angles) and the
    shared-frame symmetric CON class at n=3. Anything else raises
    UnsupportedShapeError rather than silently approximating.
    """
    t = problem.tensor
    if t.field != REAL:
        raise FieldError("the oracle operates over the real field only")
    charts = _charts_for(problem)
    total_angles = max(s.n_angles for s in charts)
    if total_angles > MAX_ANGLES:
        raise UnsupportedShapeError(
            f"{total_angles} free angles exceed the certified limit of {MAX_ANGLES}"
        )
    warm_starts = []
    floor = -np.inf
    for i, shape in enumerate(charts):
        rng = np.random.default_rng(problem.config.seed + i)
        w_lo, w_params = polish_shape(t.data, shape, rng)
        warm_starts.append((w_lo, w_params))
        floor = max(floor, w_lo)
    lo, hi = -np.inf, -np.inf
    best_params: tuple = ()
    best_label = ""
    depth = 0
    evaluations = 0
    resolution = np.inf
    for i, shape in enumerate(charts):
        rng = np.random.default_rng(problem.config.seed + i)
        s_lo, s_hi, params, step, s_depth, s_evals = certify_shape(
            t.data, shape, certification_tol, rng, floor=floor, warm=warm_starts[i][1]
        )
        evaluations += s_evals
        depth = max(depth, s_depth)
        resolution = min(resolution, step)
        if s_lo > lo:
            lo, best_params, best_label = s_lo, params, shape.label
        hi = max(hi, s_hi)
        floor = max(floor, s_lo)
    return OracleReport(
        lo=float(lo),
        hi=float(hi),
        best_params=tuple(float(a) for a in best_params),
        resolution=float(resolution),
        depth=depth,
        evaluations=evaluations,
        shape=best_label or charts[0].label,
    )
