import pytest

from tdl.errors import BadReduction, DomainError, EmptyRange, FormatError, PrimeClash
from tdl.ff import FpPoly, primes_up_to
from tdl.frobenius import (
    CURVE_CORPUS, ApCache, CurveSpec, FrobeniusRecord, PrimeSetSpec, a_p, a_p_charsum,
    ap_table, build_S, count_points_naive, dC_scan, density_estimate, distinct_roots_qbar,
    frobenius_mod_ell, frobenius_record, good_reduction, zpoly_gcd,
)

E11 = CurveSpec(1, 1)


def test_discriminant_and_reduction():
    assert E11.discriminant == -496
    assert good_reduction(E11, 5)
    assert not good_reduction(E11, 31)
    assert not good_reduction(CurveSpec(0, 1), 2)
    with pytest.raises(DomainError):
        CurveSpec(0, 0)


def test_a_p_examples():
    assert a_p(E11, 5) == -3
    assert count_points_naive(E11, 5) == 9
    assert a_p(E11, 7) == 3 and abs(a_p(E11, 7)) <= 5
    assert a_p(E11, 3) == 0
    with pytest.raises(BadReduction):
        a_p(E11, 31)
    with pytest.raises(BadReduction):
        a_p(E11, 2)


@pytest.mark.parametrize("curve", CURVE_CORPUS, ids=lambda c: f"{c.a},{c.b}")
def test_two_point_counts_agree(curve):
    for p in primes_up_to(200):
        if good_reduction(curve, p):
            ap = a_p_charsum(curve, p)
            assert ap == p + 1 - count_points_naive(curve, p)
            assert ap * ap <= 4 * p


def test_hasse_check_on_record():
    with pytest.raises(DomainError):
        FrobeniusRecord(5, 5)


def test_frobenius_mod_ell_examples():
    rec = frobenius_record(E11, 3)
    assert frobenius_mod_ell(rec, 1, 7) == FpPoly((3, 0, 1), 7)
    assert frobenius_mod_ell(rec, 2, 7) == FpPoly((3, 0, 0, 0, 1), 7)
    with pytest.raises(PrimeClash):
        frobenius_mod_ell(rec, 1, 3)


def test_integer_gcd_and_roots():
    # (x - 1)^2 (x + 2) and its derivative share x - 1
    f = [2, -3, 0, 1]
    assert zpoly_gcd(f, [-3, 0, 3]) == [-1, 1]
    assert distinct_roots_qbar(f) == 2
    assert distinct_roots_qbar([4, 0, 1]) == 2
    assert distinct_roots_qbar([1, 0, 2, 0, 1]) == 2  # (x^2 + 1)^2


def test_dc_scan_examples():
    assert dC_scan(E11, 1, range(21)) == (2, 5)
    d, w = dC_scan(E11, 2, range(21))
    assert d == 4 and w <= 20
    with pytest.raises(EmptyRange):
        dC_scan(E11, 1, range(2, 4))


def test_build_s_examples():
    S = build_S(PrimeSetSpec(E11, 1, 3, cutoff_X=20))
    assert S == [7, 13, 19]
    assert density_estimate(S, 20).numerator == 3 and density_estimate(S, 20).denominator == 8
    S4 = build_S(PrimeSetSpec(E11, 1, 3, modulus_m=4, cutoff_X=30))
    assert set(S4) <= {5, 13, 17, 29}
    big = build_S(PrimeSetSpec(E11, 1, 3, cutoff_X=200))
    cut = build_S(PrimeSetSpec(E11, 1, 3, kappa_min=11, cutoff_X=200))
    assert cut == [ell for ell in big if ell >= 11]


def test_build_s_is_ell_one_mod_three():
    # x^2 + 3 splits mod ell exactly when -3 is a square, i.e. ell = 1 mod 3
    S = build_S(PrimeSetSpec(E11, 1, 3, cutoff_X=500))
    assert S == [ell for ell in primes_up_to(500) if ell % 3 == 1]


def test_density_examples():
    assert density_estimate(primes_up_to(50), 50) == 1
    assert density_estimate([], 50) == 0


def test_cache_roundtrip(tmp_path):
    path = tmp_path / "ap.txt"
    c = ApCache(path, E11)
    assert c.get(5) == -3 and c.get(7) == 3
    assert path.read_text() == "curve 1 1\n5 -3\n7 3\n"
    again = ApCache(path, E11, recheck=True)
    assert again.table([5, 7]) == {5: -3, 7: 3}
    recs = ap_table(E11, 20, again)
    assert [r.p for r in recs] == [5, 7, 11, 13, 17, 19]
    assert path.read_text().count("\n") == 7


def test_cache_rejects_bad_files(tmp_path):
    cases = {
        "wrong curve": "curve 0 1\n",
        "hasse": "curve 1 1\n5 9\n",
        "no newline": "curve 1 1\n5 -3",
        "garbage": "curve 1 1\nfive\n",
    }
    for name, text in cases.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        with pytest.raises(FormatError):
            ApCache(p, E11)
    stale = tmp_path / "stale.txt"
    stale.write_text("curve 1 1\n5 -1\n")
    ApCache(stale, E11)
    with pytest.raises(FormatError):
        ApCache(stale, E11, recheck=True)


def test_hasse_poly_roots_distinct():
    # a_p^2 = 4p is impossible, so P_p has two distinct roots for every good p
    for p in primes_up_to(300):
        if good_reduction(E11, p):
            ap = a_p(E11, p)
            assert ap * ap != 4 * p
            assert distinct_roots_qbar([p, -ap, 1]) == 2
