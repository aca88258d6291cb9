import numpy as np
import pytest

from symortho.ascent import frame_objective, random_frames, slot_vector
from symortho.exceptions import InfeasibleError
from symortho.patterns import (
    OnPattern,
    SonPattern,
    on_layout,
    on_patterns,
    set_partitions,
    son_layout,
    son_patterns,
)


def test_set_partitions_counts_are_bell_numbers():
    for r, bell in ((1, 1), (2, 2), (3, 5), (4, 15)):
        assert len(set_partitions(r)) == bell


def test_set_partitions_cover_all_elements():
    for p in set_partitions(3):
        flat = sorted(x for g in p for x in g)
        assert flat == [0, 1, 2]


def test_son_patterns_require_separation():
    pats = son_patterns(2, (2, 2, 2))
    assert pats
    for pat in pats:
        assert pat.separated(0, 1)
    # the all-together partition in every mode never qualifies
    lump = SonPattern(partitions=(((0, 1),),) * 3)
    assert not lump.separated(0, 1)
    assert lump not in pats


def test_son_patterns_respect_mode_dims():
    # r=3 terms cannot split into 3 groups inside a dim-2 mode
    for pat in son_patterns(3, (2, 4, 4)):
        assert len(pat.partitions[0]) <= 2


def test_son_dedupe_shrinks_count():
    full = son_patterns(2, (3, 3, 3))
    deduped = son_patterns(2, (3, 3, 3), dedupe_modes=True)
    assert len(deduped) < len(full)
    assert {tuple(sorted(p.partitions)) for p in full} == {
        tuple(sorted(p.partitions)) for p in deduped
    }


def test_son_layout_realizes_pattern():
    """Slots that share a group read the same column; separated groups read
    orthogonal columns of one frame."""
    rng = np.random.default_rng(0)
    pats = son_patterns(2, (3, 3, 3))
    pat = pats[0]
    layout = son_layout(pat, (3, 3, 3))
    assert layout.rank == 2
    vars_ = random_frames(layout.var_shapes, rng, batch=3)
    for j, groups in enumerate(pat.partitions):
        u = slot_vector(vars_, layout.slot_map[0][j])
        v = slot_vector(vars_, layout.slot_map[1][j])
        ga = next(i for i, g in enumerate(groups) if 0 in g)
        gb = next(i for i, g in enumerate(groups) if 1 in g)
        dots = np.einsum("bi,bi->b", u, v)
        if ga == gb:
            assert np.allclose(dots, 1.0)
        else:
            assert np.allclose(dots, 0.0, atol=1e-12)


def test_son_layout_infeasible_group_count():
    pat = SonPattern(partitions=((((0,), (1,), (2,))),) * 2)
    with pytest.raises(InfeasibleError):
        son_layout(pat, (2, 4))


def test_on_patterns_assign_a_mode_per_pair():
    pats = on_patterns(2, (2, 2, 2))
    # one pair, three possible separating modes
    assert len(pats) == 3
    for pat in pats:
        assert pat.rank == 2
        assert len(pat.assignment) == 1
        assert 0 <= pat.assignment[0] < 3


def test_on_patterns_dedupe_modes():
    deduped = on_patterns(2, (2, 2, 2), dedupe_modes=True)
    assert len(deduped) == 1


def test_on_patterns_mode_feasibility():
    # all three pairs forced into one dim-2 mode would need 3 mutually
    # orthogonal vectors in R^2
    pats = on_patterns(3, (2, 8, 8))
    for pat in pats:
        same = [m for m in pat.assignment if m == 0]
        assert len(same) < 3


def test_on_layout_produces_orthogonal_pairs():
    rng = np.random.default_rng(1)
    for build in (on_layout,):
        for pat in on_patterns(2, (3, 3, 3))[:3]:
            layout = build(pat, (3, 3, 3))
            vars_ = random_frames(layout.var_shapes, rng, batch=2)
            j = pat.assignment[0]
            u = slot_vector(vars_, layout.slot_map[0][j])
            v = slot_vector(vars_, layout.slot_map[1][j])
            assert np.allclose(np.einsum("bi,bi->b", u, v), 0.0, atol=1e-12)


def test_layout_objective_evaluates():
    rng = np.random.default_rng(2)
    t = rng.standard_normal((3, 3, 3))
    pat = son_patterns(2, (3, 3, 3))[0]
    layout = son_layout(pat, (3, 3, 3))
    vars_ = random_frames(layout.var_shapes, rng, batch=4)
    f, inners = frame_objective(t, layout, vars_)
    assert f.shape == (4,)
    assert inners.shape == (4, 2)
    assert np.allclose(f, np.sum(inners**2, axis=1))
