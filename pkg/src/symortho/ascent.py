"""Batched ascent engine shared by the constrained solvers.

One engine carries every constraint class: Riemannian gradient ascent with
polar retraction over a list of orthonormal-column variables. A term's
mode-j factor is either a frame column directly, or a unit combination of
a contiguous column block (a free vector inside the subspace those columns
span). Columns of one frame are orthonormal by construction, so complete
orthogonality, merged parallel factors, orthogonal-complement freedom, and
mutually orthogonal subspaces are all feasible by construction; ascent
never leaves the constraint set.

Everything is vectorized over the leading multi-start batch axis, and the
per-start objective trace is monotone (backtracking line search).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InfeasibleError

_ARMIJO = 1e-4

# slot specs: ("col", var, col) picks one frame column;
# ("span", var, c0, c1, coeff_var) is X[:, c0:c1] @ y with y a unit vector
COL = "col"
SPAN = "span"


def batched_contract(T: np.ndarray, vecs, skip: int | None = None) -> np.ndarray:
    """Contract T with one (B, n_j) vector batch per mode.

    Returns shape (B,) when every mode is contracted, or (B, n_skip) when
    mode ``skip`` (0-based) is left open. ``vecs[skip]`` is ignored.
    """
    d = T.ndim
    axes = [a for a in range(d) if a != skip]
    data = np.moveaxis(T, skip, 0) if skip is not None else T
    batched = False
    for a in reversed(axes):
        v = np.asarray(vecs[a])
        if batched:
            data = np.einsum("b...i,bi->b...", data, v)
        else:
            data = np.einsum("...i,bi->b...", data, v)
            batched = True
    if not batched:  # order-1 tensor with its single mode kept open
        B = np.asarray(vecs[0]).shape[0]
        data = np.broadcast_to(data[None], (B,) + data.shape).copy()
    return data


def polar(Y: np.ndarray) -> np.ndarray:
    """Closest orthonormal-column matrix to Y (batched)."""
    U, _, Vt = np.linalg.svd(Y, full_matrices=False)
    return U @ Vt


def random_frames(shapes, rng: np.random.Generator, batch: int):
    """One Haar-distributed random orthonormal frame batch per (n, g) shape."""
    out = []
    for n, g in shapes:
        A = rng.standard_normal((batch, n, g))
        Q, R = np.linalg.qr(A)
        signs = np.sign(np.einsum("bii->bi", R))
        signs[signs == 0] = 1.0
        out.append(Q * signs[:, None, :])
    return out


@dataclass(frozen=True)
class FrameLayout:
    """Frame variables plus the (term, mode) -> slot-spec map."""

    var_shapes: tuple  # ((n_i, g_i), ...)
    slot_map: tuple    # slot_map[k][j] = spec tuple, see module docstring

    def __post_init__(self):
        for k, row in enumerate(self.slot_map):
            for j, spec in enumerate(row):
                where = f"term {k} mode {j}"
                if spec[0] == COL:
                    _, vi, ci = spec
                    n, g = self.var_shapes[vi]
                    if not 0 <= ci < g:
                        raise InfeasibleError(f"{where}: column {ci} out of range for frame {vi}")
                elif spec[0] == SPAN:
                    _, vi, c0, c1, wi = spec
                    n, g = self.var_shapes[vi]
                    if not 0 <= c0 < c1 <= g:
                        raise InfeasibleError(f"{where}: column block [{c0},{c1}) out of range")
                    m, gw = self.var_shapes[wi]
                    if m != c1 - c0 or gw != 1:
                        raise InfeasibleError(f"{where}: coefficient variable {wi} has wrong shape")
                else:
                    raise InfeasibleError(f"{where}: unknown slot spec {spec!r}")

    @property
    def rank(self) -> int:
        return len(self.slot_map)

    @property
    def order(self) -> int:
        return len(self.slot_map[0])


def slot_vector(variables, spec) -> np.ndarray:
    if spec[0] == COL:
        _, vi, ci = spec
        return variables[vi][:, :, ci]
    _, vi, c0, c1, wi = spec
    return np.einsum("bnc,bc->bn", variables[vi][:, :, c0:c1], variables[wi][:, :, 0])


def _accumulate(grads, variables, spec, delta) -> None:
    """Add the objective gradient of one slot into the variable gradients."""
    if spec[0] == COL:
        _, vi, ci = spec
        grads[vi][:, :, ci] += delta
        return
    _, vi, c0, c1, wi = spec
    y = variables[wi][:, :, 0]
    grads[vi][:, :, c0:c1] += np.einsum("bn,bc->bnc", delta, y)
    grads[wi][:, :, 0] += np.einsum("bnc,bn->bc", variables[vi][:, :, c0:c1], delta)


def frame_objective(T: np.ndarray, layout: FrameLayout, variables):
    """Objective values and per-term inner products, batched."""
    B = variables[0].shape[0]
    inners = np.empty((B, layout.rank))
    for k in range(layout.rank):
        vecs = [slot_vector(variables, spec) for spec in layout.slot_map[k]]
        inners[:, k] = batched_contract(T, vecs)
    return np.sum(inners**2, axis=1), inners


def frame_gradient(T, layout, variables):
    grads = [np.zeros_like(X) for X in variables]
    B = variables[0].shape[0]
    inners = np.empty((B, layout.rank))
    for k in range(layout.rank):
        specs = layout.slot_map[k]
        vecs = [slot_vector(variables, spec) for spec in specs]
        g = batched_contract(T, vecs)
        inners[:, k] = g
        for j in range(layout.order):
            w = batched_contract(T, vecs, skip=j)
            _accumulate(grads, variables, specs[j], 2.0 * g[:, None] * w)
    return grads, inners


def _riemannian(grads, variables):
    """Project Euclidean gradients onto the tangent space of each frame."""
    out = []
    for G, X in zip(grads, variables):
        XtG = np.matmul(X.transpose(0, 2, 1), G)
        sym = 0.5 * (XtG + XtG.transpose(0, 2, 1))
        out.append(G - np.matmul(X, sym))
    return out


@dataclass
class AscentResult:
    variables: list
    objective: np.ndarray       # (B,)
    inners: np.ndarray          # (B, r)
    trace: np.ndarray           # (iters+1, B), nondecreasing along axis 0
    iterations: np.ndarray      # (B,)
    converged: np.ndarray       # (B,) bool
    grad_norms: np.ndarray = field(default=None)

    def term_vectors(self, layout: FrameLayout, start: int):
        """Factor vectors of every term for one batch entry."""
        out = []
        for k in range(layout.rank):
            out.append([slot_vector(self.variables, spec)[start] for spec in layout.slot_map[k]])
        return out


def frame_ascent(
    T: np.ndarray,
    layout: FrameLayout,
    variables,
    max_iters: int = 2000,
    grad_tol: float = 1e-9,
) -> AscentResult:
    """Monotone backtracking projected-gradient ascent with polar retraction."""
    variables = [np.array(X, dtype=float) for X in variables]
    B = variables[0].shape[0]
    f, inners = frame_objective(T, layout, variables)
    trace = [f.copy()]
    alpha = np.full(B, 0.25)
    active = np.ones(B, dtype=bool)
    iterations = np.zeros(B, dtype=int)
    gnorm = np.zeros(B)
    for _ in range(max_iters):
        # converged starts drop out of the working batch; each start's
        # trajectory is independent, so compression does not change it
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        sub = [X[idx] for X in variables]
        grads, _ = frame_gradient(T, layout, sub)
        xi = _riemannian(grads, sub)
        gnorm2 = np.zeros(idx.size)
        for x in xi:
            gnorm2 += np.sum(x * x, axis=(1, 2))
        gn = np.sqrt(gnorm2)
        gnorm[idx] = gn
        still = gn > grad_tol
        a = alpha[idx]
        candidates = [polar(X + a[:, None, None] * x) for X, x in zip(sub, xi)]
        f_new, _ = frame_objective(T, layout, candidates)
        accept = still & (f_new >= f[idx] + _ARMIJO * a * gnorm2)
        for i, (X, C) in enumerate(zip(sub, candidates)):
            variables[i][idx] = np.where(accept[:, None, None], C, X)
        f[idx] = np.where(accept, f_new, f[idx])
        a = np.where(accept, np.minimum(a * 2.0, 1.0), a * 0.5)
        alpha[idx] = a
        active[idx] = still & (a > 1e-14)
        iterations += active
        trace.append(f.copy())
    f, inners = frame_objective(T, layout, variables)
    return AscentResult(
        variables=variables,
        objective=f,
        inners=inners,
        trace=np.array(trace),
        iterations=iterations,
        converged=gnorm <= max(grad_tol, 1e-7),
        grad_norms=gnorm,
    )


# ---------------------------------------------------------------------------
# Penalty ascent (phase B of the SON/ON solvers)
# ---------------------------------------------------------------------------

def _pairs(r: int):
    return [(a, b) for a in range(r) for b in range(a + 1, r)]


def penalty_ascent(
    T: np.ndarray,
    r: int,
    mode_dims,
    rng: np.random.Generator,
    batch: int,
    strong: bool,
    weights=(1.0, 10.0, 100.0),
    iters_per_round: int = 300,
) -> list:
    """Free-sphere ascent of the objective minus a constraint penalty.

    The ON penalty per pair is the squared product of per-mode inner
    products; SON (``strong``) adds a per-mode term vanishing exactly at
    inner products in {0, +1, -1}. Returns the r*d slot vectors after the
    final round; exact feasibility polish is the caller's job.
    """
    d = len(mode_dims)
    slots = []
    for _k in range(r):
        for j in range(d):
            v = rng.standard_normal((batch, mode_dims[j]))
            slots.append(v / np.linalg.norm(v, axis=1, keepdims=True))

    def vec(k, j):
        return slots[k * d + j]

    def full_value(weight):
        vals = np.zeros(batch)
        for k in range(r):
            g = batched_contract(T, [vec(k, j) for j in range(d)])
            vals += g * g
        pen = np.zeros(batch)
        for a, b in _pairs(r):
            s = np.stack([np.sum(vec(a, j) * vec(b, j), axis=1) for j in range(d)], axis=1)
            prod = np.prod(s, axis=1)
            pen += prod * prod
            if strong:
                pen += np.sum((s * (1.0 - s * s)) ** 2, axis=1)
        return vals - weight * pen

    for weight in weights:
        alpha = np.full(batch, 0.1)
        F = full_value(weight)
        for _ in range(iters_per_round):
            grads = [np.zeros_like(v) for v in slots]
            for k in range(r):
                vecs = [vec(k, j) for j in range(d)]
                g = batched_contract(T, vecs)
                for j in range(d):
                    w = batched_contract(T, vecs, skip=j)
                    grads[k * d + j] += 2.0 * g[:, None] * w
            for a, b in _pairs(r):
                s = np.stack([np.sum(vec(a, j) * vec(b, j), axis=1) for j in range(d)], axis=1)
                prod_all = np.prod(s, axis=1)
                for j in range(d):
                    others = np.prod(np.delete(s, j, axis=1), axis=1)
                    coeff = 2.0 * prod_all * others
                    if strong:
                        sj = s[:, j]
                        coeff = coeff + 2.0 * sj * (1.0 - sj * sj) * (1.0 - 3.0 * sj * sj)
                    grads[a * d + j] -= weight * coeff[:, None] * vec(b, j)
                    grads[b * d + j] -= weight * coeff[:, None] * vec(a, j)
            gnorm2 = np.zeros(batch)
            tangents = []
            for v, G in zip(slots, grads):
                tg = G - np.sum(G * v, axis=1, keepdims=True) * v
                tangents.append(tg)
                gnorm2 += np.sum(tg * tg, axis=1)
            if np.max(gnorm2) < 1e-18:
                break
            cand = []
            for v, tg in zip(slots, tangents):
                w = v + alpha[:, None] * tg
                cand.append(w / np.linalg.norm(w, axis=1, keepdims=True))
            trial = [np.where(np.ones(batch, bool)[:, None], c, v) for c, v in zip(cand, slots)]
            saved = slots
            slots = trial
            F_new = full_value(weight)
            accept = F_new >= F + _ARMIJO * alpha * gnorm2
            slots = [np.where(accept[:, None], t, v) for t, v in zip(trial, saved)]
            F = np.where(accept, F_new, F)
            alpha = np.where(accept, np.minimum(alpha * 1.5, 1.0), alpha * 0.5)
            if np.max(alpha) < 1e-13:
                break
    return slots
