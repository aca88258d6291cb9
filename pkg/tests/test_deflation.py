import numpy as np
import pytest

from symortho import (
    DenseTensor,
    InfeasibleError,
    Notion,
    SolverConfig,
    UnsupportedShapeError,
    assemble,
    deflate,
    deflation_gap,
    frobenius_norm,
    random_symmetric,
)

CFG = SolverConfig(starts=16, seed=0)


def _odeco(sigmas, n):
    t = np.zeros((n, n, n))
    for k, s in enumerate(sigmas):
        t[k, k, k] = s
    return DenseTensor.from_array(t)


def test_residual_norms_decrease():
    rng = np.random.default_rng(0)
    t = random_symmetric(3, 3, rng)
    res = deflate(t, 3, config=CFG)
    norms = [frobenius_norm(t)] + [s.residual_norm for s in res.trace.steps]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_each_step_satisfies_pythagoras():
    rng = np.random.default_rng(1)
    t = random_symmetric(3, 3, rng)
    res = deflate(t, 3, config=CFG)
    prev = frobenius_norm(t) ** 2
    for step in res.trace.steps:
        assert np.isclose(step.residual_norm**2, prev - step.sigma**2, atol=1e-9)
        prev = step.residual_norm**2


def test_deflation_recovers_odeco_exactly():
    t = _odeco([3.0, -2.0, 1.0], 3)
    res = deflate(t, 3, constrained=True, config=CFG)
    assert np.isclose(res.residual, 0.0, atol=1e-8)
    got = sorted(abs(s) for s in res.decomposition.sigmas())
    assert np.allclose(got, [1.0, 2.0, 3.0], atol=1e-8)
    back = assemble(res.decomposition)
    assert np.allclose(back.data, t.data, atol=1e-8)


def test_greedy_picks_largest_coefficient_first():
    t = _odeco([3.0, -2.0, 1.0], 3)
    res = deflate(t, 3, config=CFG)
    mags = [abs(s.sigma) for s in res.trace.steps]
    assert mags == sorted(mags, reverse=True)
    assert np.isclose(mags[0], 3.0, atol=1e-9)


def test_constrained_steps_are_cross_orthogonal():
    rng = np.random.default_rng(2)
    t = random_symmetric(4, 3, rng)
    res = deflate(t, 3, constrained=True, config=CFG)
    terms = res.decomposition.terms
    for a in range(len(terms)):
        for b in range(a + 1, len(terms)):
            for j in range(3):
                dot = abs(float(terms[a].factors[j] @ terms[b].factors[j]))
                assert dot <= 1e-8


def test_constrained_never_beats_unconstrained():
    rng = np.random.default_rng(3)
    t = random_symmetric(3, 3, rng)
    free = deflate(t, 2, config=CFG)
    tied = deflate(t, 2, constrained=True, config=CFG)
    assert tied.objective <= free.objective + 1e-8


def test_zero_step_padding_and_flags():
    # rank-one input: the second step has nothing left to remove
    v = np.array([1.0, 0.0])
    t = DenseTensor.from_array(2.0 * np.einsum("i,j,k->ijk", v, v, v))
    res = deflate(t, 2, config=CFG)
    assert res.trace.stopped_early
    assert res.trace.steps[-1].zero
    assert res.decomposition.rank == 2
    assert np.isclose(res.decomposition.terms[-1].sigma, 0.0)
    assert np.isclose(res.residual, 0.0, atol=1e-9)


def test_constrained_rank_above_dimension_is_rejected():
    # only 2 mutually orthogonal directions exist in R^2
    rng = np.random.default_rng(4)
    t = random_symmetric(2, 3, rng)
    with pytest.raises(InfeasibleError):
        deflate(t, 4, constrained=True, config=CFG)


def test_objective_residual_identity():
    rng = np.random.default_rng(5)
    t = random_symmetric(3, 3, rng)
    res = deflate(t, 2, config=CFG)
    assert np.isclose(
        res.objective + res.residual**2, frobenius_norm(t) ** 2, atol=1e-9
    )


def test_deflation_gap_requires_complete_orthogonality():
    rng = np.random.default_rng(6)
    t = random_symmetric(3, 3, rng)
    with pytest.raises(UnsupportedShapeError):
        deflation_gap(t, 2, notion=Notion.on(), config=CFG)


def test_deflation_gap_is_nonnegative():
    rng = np.random.default_rng(7)
    t = random_symmetric(3, 3, rng)
    gap = deflation_gap(t, 2, Notion.con(), config=CFG)
    assert gap.gap >= -1e-8
