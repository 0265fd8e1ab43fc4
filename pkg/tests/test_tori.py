import numpy as np
import pytest

from tdl.errors import UnsupportedKind
from tdl.ff import FpMatrix, mat_det
from tdl.groups import GroupModelSpec, count_eigen1, gsp_multiplier
from tdl.rng import stream
from tdl.tori import (
    diagonal_torus, enumerate_split_tori, enumerate_torus_points, irregular_power_bound,
    is_regular, regular_counts_all_tori, roots_from_weights, scan_W_variety,
    split_regular_eigen1_count, torus_count_formula, union_lower_bound,
)


def gl2(ell):
    return GroupModelSpec.gl(2, ell)


def random_gl2(ell, seed):
    rng = stream(seed, ell)
    while True:
        m = FpMatrix.from_flat(rng.integers(0, ell, 4).tolist(), 2, ell)
        if m.is_invertible():
            return m


def test_roots_gl2():
    assert roots_from_weights([(1, 0), (0, 1)]) == ((-1, 1), (1, -1))


def test_torus_points_examples():
    pts = list(enumerate_torus_points(diagonal_torus(gl2(3))))
    assert len(pts) == 4
    pts5 = list(enumerate_torus_points(diagonal_torus(gl2(5))))
    assert len(pts5) == 16
    for (a, b), m in pts5:
        assert m == FpMatrix.diag([a, b], 5)


def test_conjugated_torus_points_lie_in_group():
    for t in enumerate_split_tori(gl2(5)):
        for _, m in enumerate_torus_points(t):
            assert m.is_invertible()


def test_gsp_torus_points_are_similitudes():
    t = diagonal_torus(GroupModelSpec.gsp(4, 5))
    pts = list(enumerate_torus_points(t))
    assert len(pts) == 4**3
    for (a1, a2, mu), m in pts:
        assert gsp_multiplier(m) == mu


@pytest.mark.parametrize("ell,expected", [(2, 3), (3, 6), (5, 15), (7, 28)])
def test_split_tori_census(ell, expected):
    tori = enumerate_split_tori(gl2(ell))
    assert len(tori) == torus_count_formula(gl2(ell)) == expected
    # distinct tori are distinct subgroups (over F_2 every split torus is trivial)
    sets = {frozenset(m for _, m in enumerate_torus_points(t)) for t in tori}
    assert len(sets) == (expected if ell > 2 else 1)


def test_torus_count_formula_gsp4():
    assert [torus_count_formula(GroupModelSpec.gsp(4, ell)) for ell in (3, 5, 7)] == [1620, 73125, 960400]
    with pytest.raises(UnsupportedKind):
        enumerate_split_tori(GroupModelSpec.gsp(4, 3))


def test_is_regular_examples():
    t = diagonal_torus(gl2(5))
    assert not is_regular((1, 1), t)
    assert is_regular((1, 2), t)
    assert sum(not is_regular(c, t) for c, _ in enumerate_torus_points(t)) == 4


def test_scan_w_examples():
    rep = scan_W_variety(FpMatrix.identity(2, 5), 1, diagonal_torus(gl2(5)))
    assert rep.w_count == 7
    assert rep.regular_count == 6
    assert rep.fiber_sizes == (1, 2, 2, 2)
    assert rep.degree_d == 2


@pytest.mark.parametrize("ell", [3, 5, 7, 11, 13])
def test_identity_regular_count(ell):
    rep = scan_W_variety(FpMatrix.identity(2, ell), 1, diagonal_torus(gl2(ell)))
    assert rep.regular_count == 2 * (ell - 2)
    assert rep.w_count == 2 * (ell - 1) - 1


@pytest.mark.parametrize("ell,N", [(5, 1), (7, 2), (7, 3)])
def test_scan_w_against_direct_determinants(ell, N):
    for seed in range(4):
        B = random_gl2(ell, seed)
        for t in enumerate_split_tori(gl2(ell))[:6]:
            rep = scan_W_variety(B, N, t)
            w = reg = 0
            for coords, m in enumerate_torus_points(t):
                if mat_det(FpMatrix.identity(2, ell) - B @ m**N).value == 0:
                    w += 1
                    reg += is_regular([pow(c, N, ell) for c in coords], t)
            assert (rep.w_count, rep.regular_count) == (w, reg)


def test_all_tori_counts_match_per_torus_scan():
    ell = 7
    B = random_gl2(ell, 9)
    fast = regular_counts_all_tori(B, 2, ell)
    slow = [scan_W_variety(B, 2, t).regular_count for t in enumerate_split_tori(gl2(ell))]
    assert fast.tolist() == slow


def test_union_examples():
    u = union_lower_bound(FpMatrix.identity(2, 5), 1, gl2(5))
    assert u.exact_union == 90 and u.disjoint and u.n_tori == 15
    assert split_regular_eigen1_count(5) == 90
    assert union_lower_bound(FpMatrix.identity(2, 2), 1, gl2(2)).exact_union == 0


@pytest.mark.parametrize("ell", [3, 5, 7])
def test_union_below_eigen1_count(ell):
    for seed in range(5):
        u = union_lower_bound(random_gl2(ell, seed), 1, gl2(ell))
        assert u.disjoint
        assert u.exact_union <= count_eigen1(gl2(ell))


def test_irregular_power_bound_examples():
    t5 = diagonal_torus(gl2(5))
    assert irregular_power_bound(1, t5) == (4, 4)
    assert irregular_power_bound(2, t5) == (8, 16)
    assert irregular_power_bound(1, diagonal_torus(gl2(2))) == (1, 1)
