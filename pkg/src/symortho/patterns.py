"""Orthogonality patterns for the strong/plain orthogonal solvers.

A strong-orthogonality pattern fixes, per mode, which terms share a factor
(merged groups) and which are orthogonal (distinct groups): a set
partition per mode, with distinct groups mapped to distinct columns of an
orthonormal frame. A pattern is admissible when each mode has at most n_j
groups and every pair of terms lands in different groups in at least one
mode, so their factor inner products multiply to zero.

A plain-orthogonality pattern picks, for each pair of terms, the single
mode whose factor inner product vanishes. Per mode that yields a
constraint graph on the terms; each connected component is realized with
frame columns (edges, triangles) or a pinned center plus free vectors in
its orthogonal complement (paths/stars).

Both families are exhaustive over their feasible sets for rank <= 3,
mirroring a finite case split rather than a heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .ascent import COL, SPAN, FrameLayout
from .exceptions import InfeasibleError, UnsupportedShapeError


def set_partitions(r: int):
    """All partitions of {0..r-1} as tuples of sorted tuples."""
    if r == 0:
        return [()]
    out = []
    for smaller in set_partitions(r - 1):
        last = r - 1
        for i in range(len(smaller)):
            groups = list(smaller)
            groups[i] = groups[i] + (last,)
            out.append(tuple(groups))
        out.append(smaller + ((last,),))
    return out


def _pairs(r: int):
    return tuple((a, b) for a in range(r) for b in range(a + 1, r))


@dataclass(frozen=True)
class SonPattern:
    """One set partition of the terms per mode."""

    partitions: tuple  # partitions[j] = tuple of groups, each a sorted tuple

    @property
    def order(self) -> int:
        return len(self.partitions)

    @property
    def rank(self) -> int:
        return sum(len(g) for g in self.partitions[0])

    def separated(self, a: int, b: int) -> bool:
        """True when some mode puts a and b in different groups."""
        for groups in self.partitions:
            ga = next(i for i, g in enumerate(groups) if a in g)
            gb = next(i for i, g in enumerate(groups) if b in g)
            if ga != gb:
                return True
        return False

    def __str__(self) -> str:
        def fmt(groups):
            return "|".join("{" + ",".join(map(str, g)) + "}" for g in groups)

        return " ".join(f"m{j + 1}:{fmt(g)}" for j, g in enumerate(self.partitions))


def son_patterns(r: int, mode_dims, dedupe_modes: bool = False) -> list[SonPattern]:
    """Admissible strong-orthogonality patterns for the given shape.

    dedupe_modes keeps one representative per multiset of per-mode
    partitions; valid when the target tensor is symmetric (permuting modes
    does not change the objective).
    """
    per_mode = []
    for n in mode_dims:
        per_mode.append([p for p in set_partitions(r) if len(p) <= n])
    out = []
    seen = set()
    for combo in product(*per_mode):
        pat = SonPattern(partitions=tuple(combo))
        if not all(pat.separated(a, b) for a, b in _pairs(r)):
            continue
        if dedupe_modes:
            sig = tuple(sorted(combo))
            if sig in seen:
                continue
            seen.add(sig)
        out.append(pat)
    return out


def son_layout(pattern: SonPattern, mode_dims) -> FrameLayout:
    """Frame layout realizing a strong-orthogonality pattern."""
    r = pattern.rank
    var_shapes = []
    mode_var = []
    for j, groups in enumerate(pattern.partitions):
        if len(groups) > mode_dims[j]:
            raise InfeasibleError(
                f"mode {j + 1} needs {len(groups)} orthogonal directions in dim {mode_dims[j]}"
            )
        mode_var.append(len(var_shapes))
        var_shapes.append((mode_dims[j], len(groups)))
    slot_map = []
    for k in range(r):
        row = []
        for j, groups in enumerate(pattern.partitions):
            col = next(i for i, g in enumerate(groups) if k in g)
            row.append((COL, mode_var[j], col))
        slot_map.append(tuple(row))
    return FrameLayout(var_shapes=tuple(var_shapes), slot_map=tuple(slot_map))


@dataclass(frozen=True)
class OnPattern:
    """For each term pair, the mode whose factor inner product vanishes."""

    rank: int
    assignment: tuple  # assignment[i] = 0-based mode for pair _pairs(r)[i]

    @property
    def pairs(self) -> tuple:
        return _pairs(self.rank)

    def mode_edges(self, d: int):
        edges = [[] for _ in range(d)]
        for (a, b), j in zip(self.pairs, self.assignment):
            edges[j].append((a, b))
        return [tuple(e) for e in edges]

    def __str__(self) -> str:
        bits = [f"({a},{b})->m{j + 1}" for (a, b), j in zip(self.pairs, self.assignment)]
        return " ".join(bits)


def _components(r: int, edges):
    parent = list(range(r))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps = {}
    for v in range(r):
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def _on_mode_feasible(r: int, edges, n: int) -> bool:
    for comp in _components(r, edges):
        cnt = sum(1 for a, b in edges if a in comp)
        if len(comp) == 2 and n < 2:
            return False
        if len(comp) == 3:
            if cnt == 3 and n < 3:
                return False
            if cnt == 2 and n < 2:
                return False
    return True


def on_patterns(r: int, mode_dims, dedupe_modes: bool = False) -> list[OnPattern]:
    """Feasible vanishing-mode assignments; exhaustive for r <= 3."""
    if r > 3:
        raise UnsupportedShapeError("pattern enumeration is limited to rank <= 3")
    d = len(mode_dims)
    pairs = _pairs(r)
    out = []
    seen = set()
    for assignment in product(range(d), repeat=len(pairs)):
        pat = OnPattern(rank=r, assignment=assignment)
        edges = pat.mode_edges(d)
        if not all(_on_mode_feasible(r, e, n) for e, n in zip(edges, mode_dims)):
            continue
        if dedupe_modes:
            sig = tuple(sorted(tuple(sorted(e)) for e in edges))
            if sig in seen:
                continue
            seen.add(sig)
        out.append(pat)
    return out


def on_layout_grouped(pattern: OnPattern, mode_dims) -> FrameLayout:
    """Clique-completed realization of a plain-orthogonality pattern.

    Each connected component of a mode's constraint graph is mapped to
    orthonormal frame columns outright. That enforces every edge (plus a
    few extra), so it stays inside the feasible set but can undershoot the
    optimum when a component is not a clique. Used as the large-rank
    fallback where the exact component shapes are not enumerated.
    """
    r = pattern.rank
    d = len(mode_dims)
    var_shapes = []
    slot_specs = [[None] * d for _ in range(r)]
    for j, edges in enumerate(pattern.mode_edges(d)):
        n = mode_dims[j]
        for comp in _components(r, edges):
            if len(comp) > n:
                raise InfeasibleError(
                    f"mode {j + 1}: component of {len(comp)} terms exceeds dim {n}"
                )
            vi = len(var_shapes)
            var_shapes.append((n, len(comp)))
            for col, k in enumerate(sorted(comp)):
                slot_specs[k][j] = (COL, vi, col)
    return FrameLayout(var_shapes=tuple(var_shapes), slot_map=tuple(tuple(row) for row in slot_specs))


def on_layout(pattern: OnPattern, mode_dims) -> FrameLayout:
    """Frame layout realizing a plain-orthogonality pattern (rank <= 3)."""
    r = pattern.rank
    d = len(mode_dims)
    var_shapes = []
    slot_specs = [[None] * d for _ in range(r)]

    def new_var(shape):
        var_shapes.append(shape)
        return len(var_shapes) - 1

    for j, edges in enumerate(pattern.mode_edges(d)):
        n = mode_dims[j]
        for comp in _components(r, edges):
            comp_edges = [(a, b) for a, b in edges if a in comp]
            if len(comp) == 1:
                vi = new_var((n, 1))
                slot_specs[comp[0]][j] = (COL, vi, 0)
            elif len(comp) == 2:
                vi = new_var((n, 2))
                slot_specs[comp[0]][j] = (COL, vi, 0)
                slot_specs[comp[1]][j] = (COL, vi, 1)
            elif len(comp_edges) == 3:
                if n < 3:
                    raise InfeasibleError(
                        f"mode {j + 1}: three mutually orthogonal directions need dim >= 3"
                    )
                vi = new_var((n, 3))
                for col, k in enumerate(sorted(comp)):
                    slot_specs[k][j] = (COL, vi, col)
            else:
                degree = {v: sum(1 for e in comp_edges if v in e) for v in comp}
                center = max(degree, key=degree.get)
                leaves = [v for v in sorted(comp) if v != center]
                vi = new_var((n, n))
                slot_specs[center][j] = (COL, vi, 0)
                for leaf in leaves:
                    wi = new_var((n - 1, 1))
                    slot_specs[leaf][j] = (SPAN, vi, 1, n, wi)
    slot_map = tuple(tuple(row) for row in slot_specs)
    return FrameLayout(var_shapes=tuple(var_shapes), slot_map=slot_map)
