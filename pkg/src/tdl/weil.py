"""Point counts of affine varieties over F_q and the explicit Weil-type bound.

The inequality checked is

    | |V(F_q)| - m q^dim | <= C q^(dim - 1/2),   C = 6 (3 + r d)^(n + 1) 2^r

(or its one-sided form). Both sides are squared and compared as integers.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .config import check_budget
from .errors import DomainError, FormatError
from .ff import check_modulus

Term = tuple[int, tuple[int, ...]]
Poly = Sequence[Term]


def parse_poly(text: str, n: int | None = None) -> list[Term]:
    """Parse ``"c:e1,...,en;c:e1,...,en"``; e.g. ``"1:1,1;-1:0,0"`` is xy - 1."""
    terms = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            c, exps = chunk.split(":")
            e = tuple(int(x) for x in exps.split(","))
            terms.append((int(c), e))
        except ValueError:
            raise FormatError(f"bad term {chunk!r}; expected 'c:e1,...,en'") from None
        if any(x < 0 for x in e):
            raise FormatError(f"negative exponent in {chunk!r}")
    if not terms:
        raise FormatError("empty polynomial")
    widths = {len(e) for _, e in terms}
    if len(widths) != 1 or (n is not None and widths != {n}):
        raise FormatError(f"inconsistent number of variables in {text!r}")
    return terms


def format_poly(terms: Poly) -> str:
    return ";".join(f"{c}:{','.join(map(str, e))}" for c, e in terms)


@dataclass(frozen=True)
class PolySystem:
    n: int
    ell: int
    polys: tuple[tuple[Term, ...], ...]
    declared_dim: int
    declared_m: int

    def __post_init__(self):
        check_modulus(self.ell)
        polys = tuple(tuple((int(c), tuple(e)) for c, e in p) for p in self.polys)
        object.__setattr__(self, "polys", polys)
        if not polys:
            raise DomainError("a system needs at least one polynomial")
        for p in polys:
            if any(len(e) != self.n for _, e in p):
                raise FormatError("term has the wrong number of exponents")
        if not 0 <= self.declared_dim <= self.n:
            raise DomainError("declared dimension must lie in [0, n]")
        if self.declared_m < 0:
            raise DomainError("declared component count must be >= 0")

    @property
    def q(self) -> int:
        return self.ell

    @property
    def r(self) -> int:
        return len(self.polys)

    @property
    def d(self) -> int:
        degs = [sum(e) for p in self.polys for c, e in p if c % self.ell]
        return max(degs, default=0)


def _eval_poly(poly, pts: np.ndarray, q: int) -> np.ndarray:
    acc = np.zeros(len(pts), dtype=np.int64)
    for c, e in poly:
        c %= q
        if not c:
            continue
        term = np.full(len(pts), c, dtype=np.int64)
        for k, ek in enumerate(e):
            for _ in range(ek):
                term = term * pts[:, k] % q
        acc = (acc + term) % q
    return acc


def brute_variety_count(sys: PolySystem, budget=None, block: int = 1 << 20) -> int:
    """#{x in F_q^n : every polynomial vanishes}.

    Exhaustive scan with incremental evaluation: coordinates are fixed one
    at a time and each polynomial is tested as soon as its last variable is
    set, so dead prefixes are dropped early. Expansion runs depth first in
    blocks to bound memory.
    """
    q, n = sys.q, sys.n
    check_budget(q**n, budget, f"A^{n}(F_{q})")
    # stage k tests the polynomials whose highest variable is k - 1
    stages: list[list] = [[] for _ in range(n + 1)]
    for poly in sys.polys:
        used = [k for c, e in poly if c % q for k, ek in enumerate(e) if ek]
        stages[max(used) + 1 if used else 0].append(poly)
    for poly in stages[0]:
        if _eval_poly(poly, np.zeros((1, n), dtype=np.int64), q)[0]:
            return 0
    digits = np.arange(q, dtype=np.int64)

    def extend(prefix: np.ndarray, k: int) -> int:
        if k == n:
            return len(prefix)
        step = max(1, block // q)
        total = 0
        for s in range(0, len(prefix), step):
            part = prefix[s : s + step]
            pts = np.repeat(part, q, axis=0)
            pts[:, k] = np.tile(digits, len(part))
            for poly in stages[k + 1]:
                pts = pts[_eval_poly(poly, pts, q) == 0]
                if not len(pts):
                    break
            if len(pts):
                total += extend(pts, k + 1)
        return total

    return extend(np.zeros((1, n), dtype=np.int64), 0)


def naive_variety_count(sys: PolySystem) -> int:
    """Pure-Python reference count (slow; for oracle tests on tiny systems)."""
    import itertools

    q = sys.q
    count = 0
    for x in itertools.product(range(q), repeat=sys.n):
        if all(
            sum(c * _mono(x, e, q) for c, e in p) % q == 0 for p in sys.polys
        ):
            count += 1
    return count


def _mono(x, e, q):
    v = 1
    for xi, ei in zip(x, e):
        v = v * pow(xi, ei, q) % q
    return v


def katz_constant(n: int, r: int, d: int) -> int:
    """6 (3 + r d)^(n + 1) 2^r."""
    if n <= 1:
        raise DomainError("the bound is stated for n > 1")
    if r < 1 or d < 1:
        raise DomainError("need r >= 1 and d >= 1")
    return 6 * (3 + r * d) ** (n + 1) * 2**r


@dataclass
class WeilReport:
    count: int
    main_term: int
    deviation: int
    constant: int
    lhs: int
    rhs: int
    holds: bool
    slack: int
    two_sided: bool
    q: int
    dim: int
    m: int

    def to_dict(self) -> dict:
        d = asdict(self)
        # big integers stay exact as decimal strings
        for k in ("constant", "lhs", "rhs", "slack"):
            d[k] = str(d[k])
        return d


def check_weil_inequality(sys: PolySystem, two_sided: bool, budget=None, count: int | None = None) -> WeilReport:
    """Exact integer test of the point-count bound.

    With deviation D = |V(F_q)| - m q^dim, the two-sided statement
    |D| <= C q^(dim - 1/2) is equivalent to D^2 q <= C^2 q^(2 dim); the
    one-sided statement only constrains positive D.
    """
    C = katz_constant(sys.n, sys.r, max(sys.d, 1))
    if count is None:
        count = brute_variety_count(sys, budget)
    q, dim = sys.q, sys.declared_dim
    main = sys.declared_m * q**dim
    dev = count - main
    effective = dev if two_sided else max(dev, 0)
    lhs = effective * effective * q
    rhs = C * C * q ** (2 * dim)
    return WeilReport(count, main, dev, C, lhs, rhs, lhs <= rhs, rhs - lhs, two_sided, q, dim, sys.declared_m)


# ---------------------------------------------------------------------------
# bundled corpus


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    n: int
    polys: tuple[tuple[Term, ...], ...]
    dim: int
    m: Callable[[int], int]
    two_sided: Callable[[int], bool]

    def system(self, q: int) -> PolySystem:
        return PolySystem(self.n, q, self.polys, self.dim, self.m(q))


def _p(text: str) -> tuple[Term, ...]:
    return tuple(parse_poly(text))


def _always(v):
    return lambda q: v


def default_corpus() -> list[CorpusEntry]:
    from .tori import gl_eigen1_equation, gl_torus_equations

    torus = tuple(tuple(p) for p in gl_torus_equations(2))
    eig1 = tuple(gl_eigen1_equation(2))
    return [
        CorpusEntry("line y=0", 2, (_p("1:0,1"),), 1, _always(1), _always(True)),
        CorpusEntry("point x=y=0", 2, (_p("1:1,0"), _p("1:0,1")), 0, _always(1), _always(True)),
        CorpusEntry("plane x+y+z=0", 3, (_p("1:1,0,0;1:0,1,0;1:0,0,1"),), 2, _always(1), _always(True)),
        CorpusEntry("hyperbola xy=1", 2, (_p("1:1,1;-1:0,0"),), 1, _always(1), _always(True)),
        CorpusEntry("axes xy=0", 2, (_p("1:1,1"),), 1, _always(2), _always(True)),
        # two lines x = +-y, which coincide in characteristic 2
        CorpusEntry("split conic x^2=y^2", 2, (_p("1:2,0;-1:0,2"),), 1, lambda q: 1 if q == 2 else 2, _always(True)),
        # lines x = +-iy: rational iff -1 is a square
        CorpusEntry("x^2+y^2=0", 2, (_p("1:2,0;1:0,2"),), 1, lambda q: 1 if q == 2 else 2, lambda q: q == 2 or q % 4 == 1),
        CorpusEntry("circle x^2+y^2=1", 2, (_p("1:2,0;1:0,2;-1:0,0"),), 1, _always(1), _always(True)),
        CorpusEntry("elliptic y^2=x^3+x+1", 2, (_p("1:0,2;-1:3,0;-1:1,0;-1:0,0"),), 1, _always(1), _always(True)),
        CorpusEntry("twisted cubic", 3, (_p("1:0,1,0;-1:2,0,0"), _p("1:0,0,1;-1:3,0,0")), 1, _always(1), _always(True)),
        CorpusEntry("cone x^2+y^2=z^2", 3, (_p("1:2,0,0;1:0,2,0;-1:0,0,2"),), 2, _always(1), _always(True)),
        CorpusEntry("sphere x^2+y^2+z^2=1", 3, (_p("1:2,0,0;1:0,2,0;1:0,0,2;-1:0,0,0"),), 2, _always(1), _always(True)),
        CorpusEntry("GL2 diagonal torus in A^5", 5, torus, 2, _always(1), _always(True)),
        # W for B = I, N = 1: the lines t_11 = 1 and t_22 = 1 inside the torus
        CorpusEntry("GL2 torus eigenvalue-1 locus", 5, torus + (eig1,), 1, _always(2), _always(True)),
    ]
