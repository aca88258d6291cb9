import numpy as np
import pytest

from symortho import (
    CASE_IDS,
    Decomposition,
    DenseTensor,
    Notion,
    RankOneTerm,
    SolverConfig,
    block_embed,
    build_case,
    check_symmetric_structure,
    frobenius_norm,
    is_symmetric,
    verify_case,
)

CFG = SolverConfig(starts=16, seed=0)


def test_every_case_builds():
    for case_id in CASE_IDS:
        case = build_case(case_id)
        assert case.id == case_id
        assert case.tensor.data.size > 0
        # structure cases carry verdict expectations, not frozen numbers
        assert case.expected or case_id.startswith("struct-")
        assert case.summary


def test_unknown_case_raises():
    with pytest.raises(KeyError):
        build_case("thm-nonexistent")
    with pytest.raises(KeyError):
        verify_case("thm-nonexistent", config=CFG)


def test_case_tensors_are_symmetric_where_claimed():
    for case_id in ("thm-main", "thm-no-son", "thm-no-on", "ex-coincide"):
        t = build_case(case_id).tensor
        assert is_symmetric(t), case_id


def test_block_embed_values():
    rng = np.random.default_rng(0)
    t = DenseTensor.from_array(rng.standard_normal((2, 2)))
    big = block_embed(t, 3)
    assert big.dims == (6, 6)
    assert np.allclose(big.data[0:2, 0:2], t.data)
    assert np.allclose(big.data[2:4, 2:4], t.data)
    assert np.allclose(big.data[0:2, 2:4], 0.0)
    assert np.isclose(frobenius_norm(big), np.sqrt(3) * frobenius_norm(t))


def test_block_embed_identity_and_validation():
    rng = np.random.default_rng(1)
    t = DenseTensor.from_array(rng.standard_normal((2, 2, 2)))
    assert np.allclose(block_embed(t, 1).data, t.data)
    with pytest.raises(ValueError):
        block_embed(t, 0)


def _odeco_pair_decomposition(n=3, seed=2):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    terms = tuple(
        RankOneTerm(s, (q[:, k], q[:, k], q[:, k])) for k, s in enumerate((1.3, -0.7))
    )
    return Decomposition(terms=terms, notion=Notion.con())


def test_structure_check_recognizes_odeco():
    dec = _odeco_pair_decomposition()
    verdict = check_symmetric_structure(dec, "symrank2")
    assert verdict.ok
    assert verdict.family == "symmetric"
    assert verdict.max_deviation <= 1e-9


def test_structure_check_recognizes_cyclic_family():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    v, w = q[:, 0], q[:, 1]
    s = 1.7
    terms = (
        RankOneTerm(s, (v, w, w)),
        RankOneTerm(s, (w, v, w)),
        RankOneTerm(s, (w, w, v)),
    )
    dec = Decomposition(terms=terms, notion=Notion.son())
    verdict = check_symmetric_structure(dec, "symrank3")
    assert verdict.ok
    assert verdict.family == "cyclic"


def test_structure_check_rejects_asymmetric_assembly():
    rng = np.random.default_rng(4)
    u = np.array([1.0, 0.0, 0.0])
    v = np.array([0.0, 1.0, 0.0])
    dec = Decomposition(terms=(RankOneTerm(1.0, (u, v, u)),), notion=Notion.con())
    with pytest.raises(ValueError, match="symmetric"):
        check_symmetric_structure(dec, "symrank2")


def test_structure_check_symdecomp_needs_minimal_rank():
    u = np.array([1.0, 0.0, 0.0])
    dec = Decomposition(
        terms=(RankOneTerm(1.0, (u, u, u)), RankOneTerm(0.5, (u, u, u))),
        notion=Notion.con(),
    )
    with pytest.raises(ValueError, match="minimal"):
        check_symmetric_structure(dec, "symdecomp")


def test_structure_check_symdecomp_accepts_odeco():
    dec = _odeco_pair_decomposition(seed=5)
    verdict = check_symmetric_structure(dec, "symdecomp")
    assert verdict.ok


def test_structure_check_unknown_kind():
    dec = _odeco_pair_decomposition(seed=6)
    with pytest.raises(KeyError):
        check_symmetric_structure(dec, "symrank9")


@pytest.mark.parametrize("case_id", ["ex-singular", "ex-deflation", "ex-coincide"])
def test_fast_cases_verify(case_id):
    report = verify_case(case_id, config=CFG)
    assert report.passed, [c.name for c in report.checks if not c.passed]
    assert report.case_id == case_id
    assert report.seconds >= 0


def test_sampled_case_honors_count_override():
    report = verify_case("prop-block", config=CFG, count=2)
    assert report.passed
    d = report.to_dict()
    assert d["case"] == "prop-block"
    assert all_checks_have_fields(d)


def all_checks_have_fields(d):
    return all(
        {"name", "expected", "measured", "tolerance", "passed", "kind"} <= set(c)
        for c in d["checks"]
    )


def test_case_report_dict_round_trips_to_json():
    import json

    report = verify_case("ex-singular", config=CFG)
    text = json.dumps(report.to_dict(), sort_keys=True)
    assert "ex-singular" in text
