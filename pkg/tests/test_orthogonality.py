import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symortho import (
    Decomposition,
    Notion,
    RankOneTerm,
    ShapeError,
    assemble,
    cross_orthogonality_check,
    decomposition_check,
    frobenius_norm,
    pair_check,
)


def _orthonormal(n, rng, k=2):
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return [q[:, i] for i in range(k)]


def _con_pair(rng, n=3, d=3):
    """Two terms orthogonal in every mode."""
    cols = [_orthonormal(n, rng) for _ in range(d)]
    x = RankOneTerm(1.0, tuple(c[0] for c in cols))
    y = RankOneTerm(1.0, tuple(c[1] for c in cols))
    return x, y


def _son_pair(rng, n=3, d=3):
    """Each mode parallel or orthogonal, at least one orthogonal."""
    parallel = rng.random(d) < 0.5
    parallel[rng.integers(d)] = False
    fx, fy = [], []
    for j in range(d):
        u, v = _orthonormal(n, rng)
        fx.append(u)
        fy.append(u * (1 if rng.random() < 0.5 else -1) if parallel[j] else v)
    return RankOneTerm(1.0, tuple(fx)), RankOneTerm(1.0, tuple(fy))


def _on_pair(rng, n=3, d=3):
    """Orthogonal in mode 1 only, oblique elsewhere."""
    u, v = _orthonormal(n, rng)
    fx, fy = [u], [v]
    for _ in range(d - 1):
        a = rng.standard_normal(n)
        b = a + 0.3 * rng.standard_normal(n)
        fx.append(a / np.linalg.norm(a))
        fy.append(b / np.linalg.norm(b))
    return RankOneTerm(1.0, tuple(fx)), RankOneTerm(1.0, tuple(fy))


def test_notion_constructors_and_str():
    assert str(Notion.on()) == "ON"
    assert str(Notion.son()) == "SON"
    assert str(Notion.con()) == "CON"
    assert str(Notion.pcon((2, 1))) == "PCON{1,2}"


def test_pcon_validation():
    with pytest.raises(ValueError):
        Notion.pcon(())
    with pytest.raises(ShapeError):
        Notion.pcon((0, 1))
    with pytest.raises(ValueError):
        Notion("CON", frozenset({1}))


def test_pair_check_requires_unit_factors():
    x = RankOneTerm(1.0, (np.array([2.0, 0.0]), np.array([1.0, 0.0])))
    with pytest.raises(ValueError, match="unit"):
        pair_check(x, x, Notion.on())


def test_pair_check_dim_mismatch():
    x = RankOneTerm(1.0, (np.array([1.0, 0.0]),))
    y = RankOneTerm(1.0, (np.array([1.0, 0.0, 0.0]),))
    with pytest.raises(ShapeError):
        pair_check(x, y, Notion.on())


def test_pcon_modes_must_fit_order():
    x = RankOneTerm(1.0, (np.array([1.0, 0.0]), np.array([1.0, 0.0])))
    with pytest.raises(ShapeError):
        pair_check(x, x, Notion.pcon((3,)))


def test_con_pair_satisfies_everything():
    x, y = _con_pair(np.random.default_rng(0))
    cert = pair_check(x, y, Notion.pcon((1, 3)))
    assert cert.ok(Notion.con())
    assert cert.ok(Notion.son())
    assert cert.ok(Notion.on())
    assert cert.verdicts["PCON{1,3}"]


def test_son_pair_is_on_but_not_con():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = _son_pair(rng)
        cert = pair_check(x, y, Notion.son())
        assert cert.ok(Notion.son())
        assert cert.ok(Notion.on())
        mags = [abs(s) for s in cert.mode_inners]
        if any(m > 0.5 for m in mags):
            assert not cert.ok(Notion.con())


def test_on_pair_is_not_son():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, y = _on_pair(rng)
        cert = pair_check(x, y, Notion.on())
        assert cert.ok(Notion.on())
        # oblique modes rule out SON with overwhelming probability
        mags = [abs(s) for s in cert.mode_inners[1:]]
        if all(1e-6 < m < 1 - 1e-6 for m in mags):
            assert not cert.ok(Notion.son())
            assert not cert.ok(Notion.con())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["con", "son", "on"]))
def test_implication_chain(seed, kind):
    """CON implies SON implies ON on randomly generated pairs."""
    rng = np.random.default_rng(seed)
    x, y = {"con": _con_pair, "son": _son_pair, "on": _on_pair}[kind](rng)
    cert = pair_check(x, y, Notion.on())
    if cert.ok(Notion.con()):
        assert cert.ok(Notion.son())
    if cert.ok(Notion.son()):
        assert cert.ok(Notion.on())
    # PCON over all modes is exactly CON
    full = pair_check(x, y, Notion.pcon(range(1, x.order + 1)))
    assert full.verdicts[str(Notion.pcon(range(1, x.order + 1)))] == cert.ok(Notion.con())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_pythagoras_for_orthogonal_terms(seed, r):
    """Pairwise orthogonal terms add norms like perpendicular vectors."""
    rng = np.random.default_rng(seed)
    n = 4
    us = _orthonormal(n, rng, r)
    terms = []
    sigmas = rng.standard_normal(r) + np.sign(rng.standard_normal(r))
    for k in range(r):
        w = rng.standard_normal(n)
        terms.append(RankOneTerm(sigmas[k], (us[k], w / np.linalg.norm(w))))
    dec = Decomposition(terms=tuple(terms))
    total = frobenius_norm(assemble(dec)) ** 2
    assert np.isclose(total, float(np.sum(sigmas**2)), atol=1e-10)


def test_decomposition_check_flags_bad_pair():
    rng = np.random.default_rng(3)
    x, y = _on_pair(rng)
    dec = Decomposition(terms=(x, y))
    assert decomposition_check(dec, Notion.on()).ok
    cert = decomposition_check(dec, Notion.con())
    assert not cert.ok


def test_decomposition_check_odeco():
    rng = np.random.default_rng(4)
    us = _orthonormal(3, rng, 3)
    dec = Decomposition(terms=tuple(RankOneTerm(1.0, (u, u, u)) for u in us))
    for notion in (Notion.con(), Notion.son(), Notion.on(), Notion.pcon((2,))):
        assert decomposition_check(dec, notion).ok


def test_cross_orthogonality_check():
    rng = np.random.default_rng(5)
    us = _orthonormal(4, rng, 4)
    # terms built from disjoint orthonormal vectors: all cross inner products vanish
    good = Decomposition(
        terms=(
            RankOneTerm(1.0, (us[0], us[1], us[0])),
            RankOneTerm(1.0, (us[2], us[3], us[3])),
        )
    )
    assert cross_orthogonality_check(good)
    bad = Decomposition(
        terms=(
            RankOneTerm(1.0, (us[0], us[1], us[0])),
            RankOneTerm(1.0, (us[2], us[1], us[3])),
        )
    )
    assert not cross_orthogonality_check(bad)


def test_single_term_decomposition_passes():
    v = np.array([1.0, 0.0, 0.0])
    dec = Decomposition(terms=(RankOneTerm(2.0, (v, v, v)),))
    assert decomposition_check(dec, Notion.con()).ok
