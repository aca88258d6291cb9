import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symortho import (
    ApproxProblem,
    DenseTensor,
    FieldError,
    InfeasibleError,
    Notion,
    ShapeError,
    SolverConfig,
    decomposition_check,
    frobenius_norm,
    random_symmetric,
    random_tensor,
    rank_one_hopm,
    solve,
)

FAST = SolverConfig(starts=16, seed=0)


def _scale(t: DenseTensor, c: float) -> DenseTensor:
    return DenseTensor.from_array(c * t.data)


def test_problem_validation():
    rng = np.random.default_rng(0)
    t = random_tensor((2, 3, 4), rng)
    with pytest.raises(InfeasibleError):
        ApproxProblem(t, Notion.con(), 3, config=FAST)  # rank > min dim
    with pytest.raises(ShapeError):
        ApproxProblem(t, Notion.pcon((4,)), 1, config=FAST)  # mode 4 of 3
    with pytest.raises(ShapeError):
        ApproxProblem(t, Notion.con(), 2, symmetric_constraint=True, config=FAST)
    tc = DenseTensor.from_array(np.zeros((2, 2), dtype=complex))
    with pytest.raises(FieldError):
        ApproxProblem(tc, Notion.con(), 1, config=FAST)


def test_rank_one_matches_spectral_value():
    rng = np.random.default_rng(1)
    t = random_symmetric(3, 3, rng)
    res = rank_one_hopm(t, symmetric=True, config=FAST)
    sigma = res.decomposition.terms[0].sigma
    assert np.isclose(res.objective, sigma**2, atol=1e-12)
    assert np.isclose(res.objective + res.residual**2, frobenius_norm(t) ** 2, atol=1e-10)


@pytest.mark.parametrize(
    "notion,rank",
    [
        (Notion.con(), 2),
        (Notion.son(), 2),
        (Notion.on(), 2),
        (Notion.pcon((1, 2)), 2),
    ],
)
def test_solution_feasible_and_consistent(notion, rank):
    """Returned terms satisfy their own constraint and the norm identity."""
    rng = np.random.default_rng(2)
    t = random_tensor((3, 3, 3), rng)
    res = solve(ApproxProblem(t, notion, rank, config=FAST))
    cert = decomposition_check(res.decomposition, notion, tol=1e-9)
    assert cert.ok
    sigmas = np.array(res.decomposition.sigmas())
    assert np.isclose(res.objective, float(np.sum(sigmas**2)), atol=1e-10)
    assert np.isclose(
        res.objective + res.residual**2, frobenius_norm(t) ** 2, atol=1e-10
    )
    assert res.certificate is not None and res.certificate.ok


def test_notion_ordering_at_fixed_rank():
    """Tighter constraint sets cannot beat looser ones."""
    rng = np.random.default_rng(3)
    t = random_symmetric(3, 3, rng)
    cfg = SolverConfig(starts=32, seed=0)
    con = solve(ApproxProblem(t, Notion.con(), 2, config=cfg)).objective
    son = solve(ApproxProblem(t, Notion.son(), 2, config=cfg)).objective
    on = solve(ApproxProblem(t, Notion.on(), 2, config=cfg)).objective
    pcon = solve(ApproxProblem(t, Notion.pcon((1,)), 2, config=cfg)).objective
    slack = 1e-8
    assert con <= son + slack
    assert son <= on + slack
    assert con <= pcon + slack


def test_sign_freedom():
    rng = np.random.default_rng(4)
    t = random_symmetric(3, 3, rng)
    a = solve(ApproxProblem(t, Notion.con(), 2, config=FAST))
    b = solve(ApproxProblem(_scale(t, -1.0), Notion.con(), 2, config=FAST))
    assert np.isclose(a.objective, b.objective, atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.floats(0.1, 10.0))
def test_scaling_equivariance(seed, c):
    rng = np.random.default_rng(seed)
    t = random_symmetric(2, 3, rng)
    a = solve(ApproxProblem(t, Notion.con(), 2, config=FAST))
    b = solve(ApproxProblem(_scale(t, c), Notion.con(), 2, config=FAST))
    assert np.isclose(b.objective, c**2 * a.objective, rtol=1e-7)
    assert np.isclose(b.residual, c * a.residual, rtol=1e-6, atol=1e-9)


def test_symmetric_constraint_terms_are_symmetric():
    rng = np.random.default_rng(5)
    t = random_symmetric(3, 3, rng)
    res = solve(
        ApproxProblem(t, Notion.con(), 2, symmetric_constraint=True, config=FAST)
    )
    for term in res.decomposition.canonical().terms:
        base = term.factors[0]
        for f in term.factors[1:]:
            assert np.allclose(f, base, atol=1e-8)


def test_symmetric_constraint_never_beats_free():
    rng = np.random.default_rng(6)
    t = random_symmetric(3, 3, rng)
    free = solve(ApproxProblem(t, Notion.son(), 2, config=FAST)).objective
    sym = solve(
        ApproxProblem(t, Notion.son(), 2, symmetric_constraint=True, config=FAST)
    ).objective
    assert sym <= free + 1e-8


def test_structured_pcon_repeats_constrained_factor():
    rng = np.random.default_rng(7)
    t = random_symmetric(3, 3, rng)
    notion = Notion.pcon((1, 2))
    res = solve(ApproxProblem(t, notion, 2, structured=True, config=FAST))
    assert decomposition_check(res.decomposition, notion, tol=1e-9).ok
    for term in res.decomposition.canonical().terms:
        assert np.allclose(term.factors[0], term.factors[1], atol=1e-8)


def test_structured_pcon_never_beats_free():
    rng = np.random.default_rng(8)
    t = random_symmetric(3, 3, rng)
    notion = Notion.pcon((1, 2))
    free = solve(ApproxProblem(t, notion, 2, config=FAST)).objective
    tied = solve(ApproxProblem(t, notion, 2, structured=True, config=FAST)).objective
    assert tied <= free + 1e-8


def test_rank_padding_when_optimum_needs_fewer_terms():
    """A rank-1 tensor approximated at rank 2 keeps the exact fit."""
    v = np.array([1.0, 0.0, 0.0])
    t = DenseTensor.from_array(3.0 * np.einsum("i,j,k->ijk", v, v, v))
    res = solve(ApproxProblem(t, Notion.con(), 2, config=FAST))
    assert np.isclose(res.objective, 9.0, atol=1e-9)
    assert np.isclose(res.residual, 0.0, atol=1e-6)


def test_trace_is_monotone():
    rng = np.random.default_rng(9)
    t = random_symmetric(3, 3, rng)
    res = solve(ApproxProblem(t, Notion.con(), 2, config=FAST))
    tr = np.asarray(res.trace)
    assert np.all(np.diff(tr, axis=0) >= -1e-12)


def test_determinism_across_runs():
    rng = np.random.default_rng(10)
    t = random_tensor((3, 3, 3), rng)
    p = lambda: ApproxProblem(t, Notion.son(), 2, config=SolverConfig(starts=8, seed=5))
    a, b = solve(p()), solve(p())
    assert a.objective == b.objective
    assert a.residual == b.residual
    for ta, tb in zip(a.decomposition.terms, b.decomposition.terms):
        assert np.array_equal(ta.factors[0], tb.factors[0])


def test_relative_residual():
    rng = np.random.default_rng(11)
    t = random_tensor((2, 2, 2), rng)
    res = solve(ApproxProblem(t, Notion.con(), 1, config=FAST))
    assert np.isclose(res.relative_residual, res.residual / frobenius_norm(t))
