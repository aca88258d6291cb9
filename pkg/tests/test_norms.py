import numpy as np
import pytest

from symortho import (
    Notion,
    SolverConfig,
    a_norm,
    chain_check,
    frobenius_norm,
    random_symmetric,
    random_tensor,
    spectral_norm,
)
from symortho.norms import CERTIFIED, MULTISTART

CFG = SolverConfig(starts=24, seed=0)


def test_spectral_norm_of_rank_one():
    v = np.array([0.6, 0.8])
    t = np.einsum("i,j,k->ijk", v, v, v) * 2.5
    from symortho import DenseTensor

    val, term = spectral_norm(DenseTensor.from_array(t), config=CFG)
    assert np.isclose(val, 2.5, atol=1e-9)
    assert np.isclose(abs(float(term.factors[0] @ v)), 1.0, atol=1e-8)


def test_value_sandwich():
    """spectral <= class value at rank r <= frobenius"""
    rng = np.random.default_rng(0)
    t = random_symmetric(2, 3, rng)
    spec, _ = spectral_norm(t, config=CFG)
    entry = a_norm(t, Notion.con(), 2, config=CFG)
    assert spec <= entry.value + 1e-9
    assert entry.value <= frobenius_norm(t) + 1e-9


def test_value_monotone_in_rank():
    rng = np.random.default_rng(1)
    t = random_symmetric(3, 3, rng)
    v1 = a_norm(t, Notion.con(), 1, config=CFG, certify=False).value
    v2 = a_norm(t, Notion.con(), 2, config=CFG, certify=False).value
    v3 = a_norm(t, Notion.con(), 3, config=CFG, certify=False).value
    assert v1 <= v2 + 1e-9 <= v3 + 2e-9


def test_value_monotone_in_notion():
    rng = np.random.default_rng(2)
    t = random_symmetric(2, 3, rng)
    con = a_norm(t, Notion.con(), 2, config=CFG, certify=False).value
    son = a_norm(t, Notion.son(), 2, config=CFG, certify=False).value
    on = a_norm(t, Notion.on(), 2, config=CFG, certify=False).value
    assert con <= son + 1e-9
    assert son <= on + 1e-9


def test_certified_status_and_bracket():
    rng = np.random.default_rng(3)
    t = random_symmetric(2, 3, rng)
    entry = a_norm(t, Notion.con(), 2, config=CFG, certify=True)
    assert entry.status == CERTIFIED
    lo, hi = entry.bracket
    assert lo - 1e-9 <= entry.value**2 <= hi + 1e-9


def test_uncertifiable_shape_falls_back_to_multistart():
    rng = np.random.default_rng(4)
    t = random_tensor((3, 3, 3), rng)
    entry = a_norm(t, Notion.on(), 2, config=CFG, certify=True)
    assert entry.status == MULTISTART
    assert entry.bracket is None


def test_chain_check_passes_on_random_input():
    rng = np.random.default_rng(5)
    t = random_symmetric(2, 3, rng)
    chain = chain_check(t, 2, config=CFG, certify=False)
    assert chain.ok
    assert not chain.violations
    rep = chain.report
    assert np.isclose(rep.frobenius, frobenius_norm(t))
    assert rep.spectral <= rep.frobenius + 1e-9


def test_report_value_accessor_and_dict():
    rng = np.random.default_rng(6)
    t = random_symmetric(2, 3, rng)
    chain = chain_check(t, 2, config=CFG, certify=False)
    rep = chain.report
    v = rep.value("CON", 2)
    assert v is not None and v > 0
    d = rep.to_dict()
    assert "frobenius" in d and "entries" in d
    assert any(e["notion"] == "CON" and e["rank"] == 2 for e in d["entries"])


def test_chain_check_rejects_bad_rank():
    rng = np.random.default_rng(7)
    t = random_symmetric(2, 3, rng)
    with pytest.raises(ValueError):
        chain_check(t, 0, config=CFG)
