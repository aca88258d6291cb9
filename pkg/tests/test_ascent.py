import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from symortho.ascent import (
    COL,
    FrameLayout,
    frame_ascent,
    frame_objective,
    polar,
    random_frames,
)
from symortho.tensor import random_symmetric, random_tensor


def _rank1_layout(dims):
    """One free unit vector per mode, one term."""
    var_shapes = tuple((n, 1) for n in dims)
    slot = tuple((COL, j, 0) for j in range(len(dims)))
    return FrameLayout(var_shapes=var_shapes, slot_map=(slot,))


def _odeco_layout(n, d, r):
    """One shared n-by-r frame, term k reads column k in every mode."""
    slot_map = tuple(tuple((COL, 0, k) for _ in range(d)) for k in range(r))
    return FrameLayout(var_shapes=((n, r),), slot_map=slot_map)


def test_polar_returns_orthonormal_columns():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((5, 4, 2))
    Q = polar(Y)
    for b in range(5):
        assert np.allclose(Q[b].T @ Q[b], np.eye(2), atol=1e-12)


def test_polar_fixes_orthonormal_input():
    rng = np.random.default_rng(1)
    q, _ = np.linalg.qr(rng.standard_normal((4, 2)))
    assert np.allclose(polar(q[None]), q[None], atol=1e-12)


def test_random_frames_shapes_and_orthonormality():
    rng = np.random.default_rng(2)
    frames = random_frames(((3, 2), (4, 1)), rng, batch=6)
    assert frames[0].shape == (6, 3, 2)
    assert frames[1].shape == (6, 4, 1)
    for b in range(6):
        assert np.allclose(frames[0][b].T @ frames[0][b], np.eye(2), atol=1e-12)


def test_frame_objective_matches_direct_evaluation():
    rng = np.random.default_rng(3)
    t = random_tensor((3, 3, 3), rng)
    layout = _rank1_layout((3, 3, 3))
    vars_ = random_frames(layout.var_shapes, rng, batch=4)
    f, inners = frame_objective(t.data, layout, vars_)
    for b in range(4):
        u, v, w = (vars_[j][b, :, 0] for j in range(3))
        direct = float(np.einsum("ijk,i,j,k->", t.data, u, v, w))
        assert np.isclose(inners[b, 0], direct)
        assert np.isclose(f[b], direct**2)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_ascent_trace_is_monotone(seed):
    rng = np.random.default_rng(seed)
    t = random_symmetric(3, 3, rng)
    layout = _odeco_layout(3, 3, 2)
    vars_ = random_frames(layout.var_shapes, rng, batch=8)
    res = frame_ascent(t.data, layout, vars_, max_iters=300)
    diffs = np.diff(res.trace, axis=0)
    assert np.all(diffs >= -1e-12)


def test_ascent_is_deterministic():
    rng = np.random.default_rng(7)
    t = random_symmetric(3, 3, rng)
    layout = _odeco_layout(3, 3, 2)
    vars_ = random_frames(layout.var_shapes, np.random.default_rng(11), batch=8)
    a = frame_ascent(t.data, layout, [v.copy() for v in vars_])
    b = frame_ascent(t.data, layout, [v.copy() for v in vars_])
    assert np.array_equal(a.objective, b.objective)
    assert np.array_equal(a.iterations, b.iterations)


def test_ascent_keeps_columns_orthonormal():
    rng = np.random.default_rng(8)
    t = random_symmetric(4, 3, rng)
    layout = _odeco_layout(4, 3, 3)
    vars_ = random_frames(layout.var_shapes, rng, batch=5)
    res = frame_ascent(t.data, layout, vars_, max_iters=200)
    V = res.variables[0]
    for b in range(5):
        assert np.allclose(V[b].T @ V[b], np.eye(3), atol=1e-9)


def test_ascent_converges_on_diagonal_tensor():
    """Best odeco fit of an exactly odeco tensor recovers its value."""
    n, d, r = 3, 3, 2
    t = np.zeros((n,) * d)
    t[0, 0, 0] = 2.0
    t[1, 1, 1] = -1.0
    layout = _odeco_layout(n, d, r)
    vars_ = random_frames(layout.var_shapes, np.random.default_rng(9), batch=32)
    res = frame_ascent(t, layout, vars_)
    assert res.objective.max() >= 5.0 - 1e-8  # 2^2 + 1^2


def test_converged_starts_stop_counting_iterations():
    """Starts converge independently; finished ones stop accruing iterations."""
    rng = np.random.default_rng(10)
    t = random_symmetric(2, 3, rng)
    layout = _odeco_layout(2, 3, 1)
    vars_ = random_frames(layout.var_shapes, rng, batch=16)
    res = frame_ascent(t.data, layout, vars_, max_iters=2000)
    assert res.converged.all()
    assert int(np.median(res.iterations)) < 500
    assert len(set(res.iterations.tolist())) > 1
