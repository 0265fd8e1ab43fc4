"""Prime-field arithmetic: elements, univariate polynomials and square matrices.

Everything here is immutable. Polynomials store residues lowest degree first
with trailing zeros stripped; matrices store residues as a tuple of row tuples.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ModulusMismatch, NotPrime, ZeroInverse, ZeroPolynomial

MAX_MODULUS = 2**31


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_up_to(x: int) -> list[int]:
    """Sieve of Eratosthenes; primes p <= x."""
    if x < 2:
        return []
    sieve = np.ones(x + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(x**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def prime_pi(x: int) -> int:
    return len(primes_up_to(x))


def check_modulus(ell: int) -> int:
    ell = int(ell)
    if not (2 <= ell < MAX_MODULUS) or not is_prime(ell):
        raise NotPrime(f"modulus {ell} is not a prime below 2^31")
    return ell


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class FpElem:
    value: int
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        object.__setattr__(self, "value", self.value % self.modulus)

    def _coerce(self, other) -> int:
        if isinstance(other, FpElem):
            if other.modulus != self.modulus:
                raise ModulusMismatch(f"{self.modulus} vs {other.modulus}")
            return other.value
        if isinstance(other, int):
            return other % self.modulus
        return NotImplemented

    def _new(self, v: int) -> "FpElem":
        return FpElem(v % self.modulus, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._new(self.value * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.value)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * field_inv(FpElem(o, self.modulus))

    def __pow__(self, e: int):
        if e < 0:
            return field_inv(self) ** (-e)
        return self._new(pow(self.value, e, self.modulus))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} mod {self.modulus}"


def field_inv(a: FpElem) -> FpElem:
    if a.value == 0:
        raise ZeroInverse(f"0 has no inverse mod {a.modulus}")
    return FpElem(pow(a.value, -1, a.modulus), a.modulus)


def inv_mod(a: int, ell: int) -> int:
    a %= ell
    if a == 0:
        raise ZeroInverse(f"0 has no inverse mod {ell}")
    return pow(a, -1, ell)


# ---------------------------------------------------------------------------
# polynomials (raw helpers work on tuples of residues, lowest degree first)


def _strip(c: Sequence[int]) -> tuple[int, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(a, b, ell):
    n = max(len(a), len(b))
    return _strip(
        ((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % ell for i in range(n)
    )


def _psub(a, b, ell):
    return _padd(a, tuple((-x) % ell for x in b), ell)


def _pmul(a, b, ell):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _strip(v % ell for v in out)


def _pdivmod(a, b, ell):
    if not b:
        raise ZeroPolynomial("division by the zero polynomial")
    r = list(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    lead_inv = inv_mod(b[-1], ell)
    for shift in range(len(a) - len(b), -1, -1):
        c = r[shift + len(b) - 1] * lead_inv % ell
        q[shift] = c
        if c:
            for j, y in enumerate(b):
                r[shift + j] = (r[shift + j] - c * y) % ell
    return _strip(q), _strip(r[: len(b) - 1])


def _monic(a, ell):
    if not a:
        return a
    inv = inv_mod(a[-1], ell)
    return tuple(x * inv % ell for x in a)


def _pgcd(a, b, ell):
    while b:
        a, b = b, _pdivmod(a, b, ell)[1]
    return _monic(a, ell)


def _pderiv(a, ell):
    return _strip(i * a[i] % ell for i in range(1, len(a)))


def _radical(a, ell):
    """Product of the distinct monic irreducible factors of ``a``.

    Handles multiplicities divisible by ``ell``: those factors survive in the
    gcd with the derivative as ell-th powers and are recovered by an ell-th
    root (coefficients of a prime field are their own ell-th roots).
    """
    a = _monic(a, ell)
    if len(a) <= 1:
        return (1,)
    d = _pderiv(a, ell)
    if not d:
        return _radical(tuple(a[i] for i in range(0, len(a), ell)), ell)
    g = _pgcd(a, d, ell)
    w = _pdivmod(a, g, ell)[0]
    rest = g
    while True:
        h = _pgcd(rest, w, ell)
        if len(h) <= 1:
            break
        rest = _pdivmod(rest, h, ell)[0]
    if len(rest) <= 1:
        return _monic(w, ell)
    return _pmul(_monic(w, ell), _radical(rest, ell), ell)


@dataclass(frozen=True)
class FpPoly:
    coeffs: tuple[int, ...]
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        object.__setattr__(
            self, "coeffs", _strip(int(c) % self.modulus for c in self.coeffs)
        )

    @classmethod
    def from_ints(cls, coeffs: Iterable[int], modulus: int) -> "FpPoly":
        return cls(tuple(coeffs), modulus)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # zero polynomial has degree -1

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: "FpPoly"):
        if other.modulus != self.modulus:
            raise ModulusMismatch(f"{self.modulus} vs {other.modulus}")

    def __add__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        return FpPoly(_padd(self.coeffs, other.coeffs, self.modulus), self.modulus)

    def __sub__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        return FpPoly(_psub(self.coeffs, other.coeffs, self.modulus), self.modulus)

    def __mul__(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        return FpPoly(_pmul(self.coeffs, other.coeffs, self.modulus), self.modulus)

    def __divmod__(self, other: "FpPoly"):
        self._check(other)
        q, r = _pdivmod(self.coeffs, other.coeffs, self.modulus)
        return FpPoly(q, self.modulus), FpPoly(r, self.modulus)

    def derivative(self) -> "FpPoly":
        return FpPoly(_pderiv(self.coeffs, self.modulus), self.modulus)

    def gcd(self, other: "FpPoly") -> "FpPoly":
        self._check(other)
        return FpPoly(_pgcd(self.coeffs, other.coeffs, self.modulus), self.modulus)

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.modulus
        return acc

    def eval_all(self) -> np.ndarray:
        """Values at every x in F_ell, as an int64 array indexed by x."""
        ell = self.modulus
        xs = np.arange(ell, dtype=np.int64)
        acc = np.zeros(ell, dtype=np.int64)
        for c in reversed(self.coeffs):
            acc = (acc * xs + c) % ell
        return acc

    def __repr__(self):
        if not self.coeffs:
            return f"0 mod {self.modulus}"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if c == 1 and mono:
                terms.append(mono)
            else:
                terms.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(terms) + f" mod {self.modulus}"


def distinct_root_counts(f: FpPoly) -> tuple[int, int]:
    """(roots in F_ell by full scan, distinct roots over the algebraic closure)."""
    if f.is_zero():
        raise ZeroPolynomial("zero polynomial has every element as a root")
    ell = f.modulus
    if ell <= 64:
        in_field = sum(1 for x in range(ell) if f(x) == 0)
    else:
        in_field = int(np.count_nonzero(f.eval_all() == 0))
    in_closure = len(_radical(f.coeffs, ell)) - 1
    return in_field, in_closure


def substitute_power(f: FpPoly, N: int) -> FpPoly:
    """f(x^N)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    out = [0] * (N * max(f.degree, 0) + 1)
    for i, c in enumerate(f.coeffs):
        out[i * N] = c
    return FpPoly(tuple(out), f.modulus)


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class FpMatrix:
    rows: tuple[tuple[int, ...], ...]
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        rows = tuple(tuple(int(x) % self.modulus for x in r) for r in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise DomainError("matrix must be square with n >= 1")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int, ell: int) -> "FpMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), ell)

    @classmethod
    def diag(cls, entries: Sequence[int], ell: int) -> "FpMatrix":
        n = len(entries)
        return cls(
            tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n)),
            ell,
        )

    @classmethod
    def from_flat(cls, flat: Sequence[int], n: int, ell: int) -> "FpMatrix":
        return cls(tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n)), ell)

    def flat(self) -> tuple[int, ...]:
        return tuple(x for r in self.rows for x in r)

    def key(self) -> int:
        """Row-major base-ell index; matches enumeration order."""
        k = 0
        for x in self.flat():
            k = k * self.modulus + x
        return k

    def entry(self, i: int, j: int) -> FpElem:
        return FpElem(self.rows[i][j], self.modulus)

    def _check(self, other: "FpMatrix"):
        if other.modulus != self.modulus or other.n != self.n:
            raise ModulusMismatch("matrices over different fields or sizes")

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        self._check(other)
        ell = self.modulus
        cols = list(zip(*other.rows))
        return FpMatrix(
            tuple(
                tuple(sum(a * b for a, b in zip(r, c)) % ell for c in cols) for r in self.rows
            ),
            ell,
        )

    def __add__(self, other: "FpMatrix") -> "FpMatrix":
        self._check(other)
        return FpMatrix(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.modulus,
        )

    def __sub__(self, other: "FpMatrix") -> "FpMatrix":
        self._check(other)
        return FpMatrix(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.modulus,
        )

    def scale(self, c: int) -> "FpMatrix":
        return FpMatrix(tuple(tuple(c * a for a in r) for r in self.rows), self.modulus)

    def transpose(self) -> "FpMatrix":
        return FpMatrix(tuple(zip(*self.rows)), self.modulus)

    def __pow__(self, e: int) -> "FpMatrix":
        if e < 0:
            return self.inverse() ** (-e)
        result = FpMatrix.identity(self.n, self.modulus)
        base = self
        while e:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def inverse(self) -> "FpMatrix":
        ell, n = self.modulus, self.n
        aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((i for i in range(col, n) if aug[i][col]), None)
            if piv is None:
                raise ZeroInverse("singular matrix")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = pow(aug[col][col], -1, ell)
            aug[col] = [x * inv % ell for x in aug[col]]
            for i in range(n):
                if i != col and aug[i][col]:
                    f = aug[i][col]
                    aug[i] = [(x - f * y) % ell for x, y in zip(aug[i], aug[col])]
        return FpMatrix(tuple(tuple(r[n:]) for r in aug), ell)

    def is_invertible(self) -> bool:
        return mat_det(self).value != 0

    def __repr__(self):
        return f"FpMatrix({[list(r) for r in self.rows]}, mod {self.modulus})"


def mat_det(M: FpMatrix) -> FpElem:
    """Determinant by Gaussian elimination over F_ell."""
    ell, n = M.modulus, M.n
    a = [list(r) for r in M.rows]
    det = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col]), None)
        if piv is None:
            return FpElem(0, ell)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col] % ell
        inv = pow(a[col][col], -1, ell)
        for i in range(col + 1, n):
            if a[i][col]:
                f = a[i][col] * inv % ell
                a[i] = [(x - f * y) % ell for x, y in zip(a[i], a[col])]
    return FpElem(det, ell)


def charpoly(M: FpMatrix) -> FpPoly:
    """det(xI - M) via the division-free Berkowitz recurrence."""
    ell, n = M.modulus, M.n
    A = M.rows
    vect = [1, (-A[0][0]) % ell]  # highest degree first
    for r in range(1, n):
        R = A[r][:r]
        C = [A[i][r] for i in range(r)]
        q = [1, (-A[r][r]) % ell]
        v = C
        for _ in range(r):
            q.append((-sum(x * y for x, y in zip(R, v))) % ell)
            v = [sum(A[i][j] * v[j] for j in range(r)) % ell for i in range(r)]
        # Toeplitz product: new[k] = sum_j q[k - j] * vect[j]
        new = []
        for k in range(r + 2):
            s = 0
            for j in range(min(k, r) + 1):
                s += q[k - j] * vect[j]
            new.append(s % ell)
        vect = new
    return FpPoly(tuple(reversed(vect)), ell)


def companion(f: FpPoly) -> FpMatrix:
    """Companion matrix of a monic polynomial of degree >= 1."""
    n, ell = f.degree, f.modulus
    if n < 1 or f.coeffs[-1] != 1:
        raise DomainError("companion matrix needs a monic polynomial of degree >= 1")
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i in range(n):
        rows[i][n - 1] = -f.coeffs[i]
    return FpMatrix(tuple(map(tuple, rows)), ell)


# ---------------------------------------------------------------------------
# batched numpy kernels (arrays of shape (k, n, n) holding residues)


def batch_det(arr: np.ndarray, ell: int) -> np.ndarray:
    """Determinants mod ell of a stack of small matrices.

    Uses cofactor expansion with reduction after each product, so entries
    stay far below int64 range for ell < 2^31.
    """
    arr = np.asarray(arr, dtype=np.int64)
    n = arr.shape[-1]
    if n == 1:
        return arr[..., 0, 0] % ell
    if n == 2:
        return (arr[..., 0, 0] * arr[..., 1, 1] % ell - arr[..., 0, 1] * arr[..., 1, 0] % ell) % ell
    out = np.zeros(arr.shape[:-2], dtype=np.int64)
    for j in range(n):
        minor = np.delete(np.delete(arr, 0, axis=-2), j, axis=-1)
        term = arr[..., 0, j] * batch_det(minor, ell) % ell
        out = (out - term) % ell if j % 2 else (out + term) % ell
    return out


def batch_matmul(a: np.ndarray, b: np.ndarray, ell: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for k in range(n):
        out = (out + a[..., :, k : k + 1] * b[..., k : k + 1, :] % ell) % ell
    return out


def batch_eigen1(arr: np.ndarray, ell: int) -> np.ndarray:
    """Boolean mask: det(I - h) == 0 for each matrix h in the stack."""
    arr = np.asarray(arr, dtype=np.int64)
    n = arr.shape[-1]
    eye = np.eye(n, dtype=np.int64)
    return batch_det((eye - arr) % ell, ell) == 0


def decode_indices(idx: np.ndarray, n: int, ell: int) -> np.ndarray:
    """Row-major base-ell digits of candidate indices, shaped (k, n, n)."""
    idx = np.asarray(idx, dtype=np.int64)
    digits = np.empty(idx.shape + (n * n,), dtype=np.int64)
    rem = idx.copy()
    for pos in range(n * n - 1, -1, -1):
        digits[..., pos] = rem % ell
        rem //= ell
    return digits.reshape(idx.shape + (n, n))


def encode_matrices(arr: np.ndarray, ell: int) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64)
    flat = arr.reshape(arr.shape[:-2] + (-1,))
    key = np.zeros(flat.shape[:-1], dtype=np.int64)
    for pos in range(flat.shape[-1]):
        key = key * ell + flat[..., pos]
    return key
