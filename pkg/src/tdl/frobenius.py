"""Elliptic curves y^2 = x^3 + a x + b over Q: traces of Frobenius and the prime set S.

Two independent routes to a_p are provided, a quadratic-character sum and a
naive count of affine points, and every cached value is checked against the
Hasse bound on load.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BadReduction, DomainError, EmptyRange, FormatError, PrimeClash
from .ff import FpPoly, distinct_root_counts, is_prime, prime_pi, primes_up_to


@dataclass(frozen=True)
class CurveSpec:
    a: int
    b: int

    def __post_init__(self):
        if self.discriminant == 0:
            raise DomainError(f"singular curve a={self.a}, b={self.b}")

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a**3 + 27 * self.b**2)


@dataclass(frozen=True)
class FrobeniusRecord:
    p: int
    a_p: int

    def __post_init__(self):
        if self.a_p * self.a_p > 4 * self.p:
            raise DomainError(f"a_{self.p} = {self.a_p} violates the Hasse bound")

    @property
    def poly(self) -> tuple[int, int, int]:
        """Coefficients of x^2 - a_p x + p, lowest degree first."""
        return (self.p, -self.a_p, 1)


def good_reduction(curve: CurveSpec, p: int) -> bool:
    """p > 3 and p does not divide the discriminant.

    Primes 2 and 3 are always excluded, even when the short model happens to
    be smooth there.
    """
    return p > 3 and is_prime(p) and curve.discriminant % p != 0


def _check_smooth(curve: CurveSpec, p: int):
    if not is_prime(p) or p == 2 or curve.discriminant % p == 0:
        raise BadReduction(f"y^2 = x^3 + {curve.a}x + {curve.b} is not smooth mod {p}")


def a_p_charsum(curve: CurveSpec, p: int) -> int:
    """-sum_x chi(x^3 + a x + b) with chi the quadratic character (Euler's criterion)."""
    _check_smooth(curve, p)
    half = (p - 1) // 2
    total = 0
    for x in range(p):
        v = (x * x * x + curve.a * x + curve.b) % p
        if v:
            total += 1 if pow(v, half, p) == 1 else -1
    return -total


def count_points_naive(curve: CurveSpec, p: int) -> int:
    """|E(F_p)|: affine solutions (x, y) by full scan, plus the point at infinity."""
    _check_smooth(curve, p)
    xs = np.arange(p, dtype=np.int64)
    rhs = (xs * xs % p * xs + curve.a * xs + curve.b) % p
    ysq = xs * xs % p
    hits = np.bincount(ysq, minlength=p)  # hits[v] = #{y : y^2 = v}
    return int(hits[rhs].sum()) + 1


def a_p(curve: CurveSpec, p: int) -> int:
    return a_p_charsum(curve, p)


def frobenius_record(curve: CurveSpec, p: int) -> FrobeniusRecord:
    return FrobeniusRecord(p, a_p(curve, p))


def frobenius_mod_ell(record: FrobeniusRecord, N: int, ell: int) -> FpPoly:
    """x^(2N) - a_p x^N + p reduced mod ell."""
    if ell == record.p:
        raise PrimeClash(f"ell = p = {ell}")
    coeffs = [0] * (2 * N + 1)
    coeffs[0] = record.p
    coeffs[N] = -record.a_p
    coeffs[2 * N] = 1
    return FpPoly(tuple(coeffs), ell)


# ---------------------------------------------------------------------------
# distinct roots over Q-bar via integer polynomial gcd


def _zstrip(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _primitive(f: list[int]) -> list[int]:
    g = 0
    for c in f:
        g = math.gcd(g, c)
    if g == 0:
        return []
    sign = -1 if f[-1] < 0 else 1
    return [sign * c // g for c in f]


def _zprem(f: list[int], g: list[int]) -> list[int]:
    """Pseudo-remainder of f by g (integer coefficients, lowest first)."""
    r = list(f)
    lead = g[-1]
    while len(r) >= len(g) and r:
        shift = len(r) - len(g)
        c = r[-1]
        r = [lead * x for x in r]
        for i, y in enumerate(g):
            r[shift + i] -= c * y
        r = _zstrip(r)
    return r


def zpoly_gcd(f: Sequence[int], g: Sequence[int]) -> list[int]:
    """Primitive gcd over Q[x] of integer polynomials, by a primitive PRS."""
    a, b = _primitive(_zstrip(list(f))), _primitive(_zstrip(list(g)))
    while b:
        a, b = b, _primitive(_zprem(a, b))
    return a


def distinct_roots_qbar(f: Sequence[int]) -> int:
    """deg f - deg gcd(f, f'); exact for characteristic zero."""
    f = _zstrip(list(f))
    if not f:
        raise DomainError("zero polynomial")
    deriv = [i * f[i] for i in range(1, len(f))]
    if not _zstrip(deriv):
        return 0
    return (len(f) - 1) - (len(zpoly_gcd(f, deriv)) - 1)


def frobenius_power_poly(record: FrobeniusRecord, N: int) -> list[int]:
    """Integer coefficients of P(x^N) = x^(2N) - a_p x^N + p."""
    coeffs = [0] * (2 * N + 1)
    coeffs[0] = record.p
    coeffs[N] -= record.a_p
    coeffs[2 * N] += 1
    return coeffs


def dC_scan(curve: CurveSpec, N: int, p_range: Iterable[int]) -> tuple[int, int]:
    """Largest number of distinct roots of P_p(x^N) over good p, and the first p attaining it."""
    best, witness = -1, None
    for p in p_range:
        if not good_reduction(curve, p):
            continue
        d = distinct_roots_qbar(frobenius_power_poly(frobenius_record(curve, p), N))
        if d > best:
            best, witness = d, p
    if witness is None:
        raise EmptyRange("no prime of good reduction in range")
    return best, witness


# ---------------------------------------------------------------------------
# the prime set


@dataclass(frozen=True)
class PrimeSetSpec:
    curve: CurveSpec
    N: int
    witness_p: int
    kappa_min: int = 2
    modulus_m: int = 1
    cutoff_X: int = 100
    d_C: int | None = None

    def __post_init__(self):
        _check_smooth(self.curve, self.witness_p)
        if self.kappa_min < 2:
            raise DomainError("kappa_min must be >= 2")
        if self.N < 1 or self.modulus_m < 1:
            raise DomainError("N and modulus must be >= 1")

    def target_roots(self) -> int:
        if self.d_C is not None:
            return self.d_C
        return distinct_roots_qbar(frobenius_power_poly(self.witness_record(), self.N))

    def witness_record(self) -> FrobeniusRecord:
        return frobenius_record(self.curve, self.witness_p)


def build_S(spec: PrimeSetSpec) -> list[int]:
    """Primes kappa <= ell <= X, ell != witness, ell = 1 mod m, with P_witness(x^N) having d_C roots in F_ell."""
    rec = spec.witness_record()
    d_C = spec.target_roots()
    out = []
    for ell in primes_up_to(spec.cutoff_X):
        if ell < spec.kappa_min or ell == spec.witness_p or ell % spec.modulus_m != 1 % spec.modulus_m:
            continue
        in_field, _ = distinct_root_counts(frobenius_mod_ell(rec, spec.N, ell))
        if in_field == d_C:
            out.append(ell)
    return out


def density_estimate(s: Sequence[int], X: int) -> Fraction:
    pi = prime_pi(X)
    return Fraction(len(s), pi) if pi else Fraction(0)


# ---------------------------------------------------------------------------
# a_p cache: header "curve a b", then one "p a_p" line per prime, append-only


class ApCache:
    def __init__(self, path: str | os.PathLike, curve: CurveSpec, recheck: bool = False):
        self.path = os.fspath(path)
        self.curve = curve
        self.values: dict[int, int] = {}
        if os.path.exists(self.path):
            self._load(recheck)
        else:
            with open(self.path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(f"curve {curve.a} {curve.b}\n")

    def _load(self, recheck: bool):
        with open(self.path, encoding="ascii") as fh:
            lines = fh.read().split("\n")
        if not lines or lines[-1] != "":
            raise FormatError(f"{self.path}: not newline-terminated")
        header = lines[0].split(" ")
        if len(header) != 3 or header[0] != "curve":
            raise FormatError(f"{self.path}: bad header {lines[0]!r}")
        if (int(header[1]), int(header[2])) != (self.curve.a, self.curve.b):
            raise FormatError(f"{self.path}: cache belongs to curve {header[1]} {header[2]}")
        for ln in lines[1:-1]:
            parts = ln.split(" ")
            if len(parts) != 2:
                raise FormatError(f"{self.path}: bad line {ln!r}")
            p, ap = int(parts[0]), int(parts[1])
            _check_smooth(self.curve, p)
            if ap * ap > 4 * p:
                raise FormatError(f"{self.path}: a_{p} = {ap} violates the Hasse bound")
            if self.values.get(p, ap) != ap:
                raise FormatError(f"{self.path}: conflicting entries for p = {p}")
            if recheck and a_p_charsum(self.curve, p) != ap:
                raise FormatError(f"{self.path}: stale value for p = {p}")
            self.values[p] = ap

    def get(self, p: int) -> int:
        if p not in self.values:
            ap = a_p(self.curve, p)
            with open(self.path, "a", encoding="ascii", newline="\n") as fh:
                fh.write(f"{p} {ap}\n")
            self.values[p] = ap
        return self.values[p]

    def table(self, primes: Iterable[int]) -> dict[int, int]:
        return {p: self.get(p) for p in primes}


def ap_table(curve: CurveSpec, pmax: int, cache: ApCache | None = None) -> list[FrobeniusRecord]:
    """Records for every good prime p <= pmax."""
    out = []
    for p in primes_up_to(pmax):
        if good_reduction(curve, p):
            ap = cache.get(p) if cache else a_p(curve, p)
            out.append(FrobeniusRecord(p, ap))
    return out


CURVE_CORPUS = [
    CurveSpec(1, 1),
    CurveSpec(0, 1),
    CurveSpec(1, 0),
    CurveSpec(-1, 0),
    CurveSpec(0, -2),
    CurveSpec(-1, 1),
    CurveSpec(2, 3),
    CurveSpec(-7, 6),
    CurveSpec(5, -3),
    CurveSpec(-2, 5),
]
