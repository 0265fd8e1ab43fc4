"""Split maximal tori, regular elements and the eigenvalue-1 locus on a torus.

A torus is given by a parameterization: coordinates (t_1, ..., t_r) in
(F_ell^x)^r map to conj @ diag(w_1(t), ..., w_n(t)) @ conj^-1 where each
weight w_i is a monomial with integer exponents. Scalars correspond to the
cocharacter ``homothety``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .config import check_budget
from .errors import DomainError, UnsupportedKind
from .ff import FpMatrix, batch_det, batch_matmul, encode_matrices
from .groups import GroupModelSpec, group_order

Exponents = tuple[int, ...]


def roots_from_weights(weights: Sequence[Exponents]) -> tuple[Exponents, ...]:
    """Distinct nonzero differences of weights, sorted."""
    out = set()
    for a, b in itertools.permutations(weights, 2):
        diff = tuple(x - y for x, y in zip(a, b))
        if any(diff):
            out.add(diff)
    return tuple(sorted(out))


@dataclass(frozen=True)
class TorusDesc:
    conjugator: FpMatrix
    rank_r: int
    weights: tuple[Exponents, ...]
    roots: tuple[Exponents, ...]
    homothety: Exponents

    def __post_init__(self):
        if not self.weights or not self.roots:
            raise DomainError("weights and roots must be nonempty")
        if any(len(w) != self.rank_r for w in self.weights + self.roots):
            raise DomainError("exponent tuples must have length rank_r")
        if any(sum(a * h for a, h in zip(w, self.homothety)) != 1 for w in self.weights):
            raise DomainError("homothety must evaluate to the scalar on every weight")
        if self.homothety[0] != 1:
            raise DomainError("orbit normalization needs homothety[0] == 1")

    @property
    def ell(self) -> int:
        return self.conjugator.modulus

    @property
    def n(self) -> int:
        return len(self.weights)

    def with_conjugator(self, conj: FpMatrix) -> "TorusDesc":
        return TorusDesc(conj, self.rank_r, self.weights, self.roots, self.homothety)


def diagonal_torus(spec: GroupModelSpec) -> TorusDesc:
    """The standard diagonal torus of a GL or GSp model."""
    ell, n = spec.ell, spec.dim
    eye = FpMatrix.identity(n, ell)
    if spec.kind == "GL":
        weights = tuple(tuple(int(i == k) for k in range(n)) for i in range(n))
        return TorusDesc(eye, n, weights, roots_from_weights(weights), (1,) * n)
    if spec.kind == "GSp":
        # coordinates (a_1, ..., a_g, mu); entry i >= g is mu / a_{n-1-i}
        g = n // 2
        weights = []
        for i in range(n):
            w = [0] * (g + 1)
            if i < g:
                w[i] = 1
            else:
                w[n - 1 - i] = -1
                w[g] = 1
            weights.append(tuple(w))
        return TorusDesc(eye, g + 1, tuple(weights), roots_from_weights(weights), (1,) * g + (2,))
    raise UnsupportedKind("diagonal torus needs a GL or GSp model")


# ---------------------------------------------------------------------------
# evaluation helpers


def _vpow(base: np.ndarray, e: int, ell: int) -> np.ndarray:
    """Elementwise base^e mod ell for units; negative e allowed."""
    e %= ell - 1
    result = np.ones_like(base)
    b = base % ell
    while e:
        if e & 1:
            result = result * b % ell
        b = b * b % ell
        e >>= 1
    return result


def eval_characters(coords: np.ndarray, chars: Sequence[Exponents], ell: int) -> np.ndarray:
    """Values of monomial characters at unit coordinates, shape (points, len(chars))."""
    coords = np.asarray(coords, dtype=np.int64)
    out = np.ones(coords.shape[:-1] + (len(chars),), dtype=np.int64)
    for j, ch in enumerate(chars):
        for k, e in enumerate(ch):
            if e:
                out[..., j] = out[..., j] * _vpow(coords[..., k], e, ell) % ell
    return out


def torus_coords(rank_r: int, ell: int, budget=None) -> np.ndarray:
    """All points of (F_ell^x)^r in lexicographic order, shape ((ell-1)^r, r)."""
    check_budget((ell - 1) ** rank_r, budget, f"torus of rank {rank_r} over F_{ell}")
    units = np.arange(1, ell, dtype=np.int64)
    grids = np.meshgrid(*([units] * rank_r), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def torus_matrices(t_desc: TorusDesc, coords: np.ndarray) -> np.ndarray:
    ell = t_desc.ell
    d = eval_characters(coords, t_desc.weights, ell)
    C = np.array(t_desc.conjugator.rows, dtype=np.int64)
    Cinv = np.array(t_desc.conjugator.inverse().rows, dtype=np.int64)
    return batch_matmul(C * d[..., None, :] % ell, Cinv, ell)


def enumerate_torus_points(t_desc: TorusDesc, ell: int | None = None, budget=None) -> Iterator[tuple[tuple[int, ...], FpMatrix]]:
    ell = ell if ell is not None else t_desc.ell
    coords = torus_coords(t_desc.rank_r, ell, budget)
    mats = torus_matrices(t_desc, coords)
    n = t_desc.n
    for c, m in zip(coords.tolist(), mats.reshape(len(mats), -1).tolist()):
        yield tuple(c), FpMatrix.from_flat(m, n, ell)


def is_regular(coords: Sequence[int], t_desc: TorusDesc, ell: int | None = None) -> bool:
    """Every root evaluates to something other than 1."""
    ell = ell if ell is not None else t_desc.ell
    for root in t_desc.roots:
        v = 1
        for c, e in zip(coords, root):
            v = v * pow(int(c), e, ell) % ell
        if v == 1:
            return False
    return True


def regular_mask(coords: np.ndarray, t_desc: TorusDesc, ell: int | None = None) -> np.ndarray:
    ell = ell if ell is not None else t_desc.ell
    return np.all(eval_characters(coords, t_desc.roots, ell) != 1, axis=-1)


# ---------------------------------------------------------------------------
# torus census


def _p1_points(ell: int) -> list[tuple[int, int]]:
    return [(1, x) for x in range(ell)] + [(0, 1)]


def enumerate_split_tori(spec: GroupModelSpec) -> list[TorusDesc]:
    """Split maximal tori of GL(2, F_ell), one per unordered pair of eigenlines."""
    if spec.kind != "GL" or spec.dim != 2:
        raise UnsupportedKind("split torus enumeration is implemented for GL(2) only")
    ell = spec.ell
    base = diagonal_torus(spec)
    tori = []
    for u, v in itertools.combinations(_p1_points(ell), 2):
        conj = FpMatrix(((u[0], v[0]), (u[1], v[1])), ell)
        tori.append(base.with_conjugator(conj))
    return tori


def weyl_order(spec: GroupModelSpec) -> int:
    if spec.kind == "GL":
        return math.factorial(spec.dim)
    if spec.kind == "GSp":
        g = spec.dim // 2
        return 2**g * math.factorial(g)
    raise UnsupportedKind("Weyl group order is known for GL and GSp only")


def torus_count_formula(spec: GroupModelSpec) -> int:
    """|H(F_ell)| / (|W| (ell - 1)^r): the number of split maximal tori."""
    num = group_order(spec)
    den = weyl_order(spec) * (spec.ell - 1) ** spec.rank_r
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError(f"torus count {num}/{den} is not an integer")
    return q


# ---------------------------------------------------------------------------
# the eigenvalue-1 locus W on a torus


@dataclass
class TorusScanReport:
    ell: int
    N: int
    representative_B: FpMatrix
    w_count: int
    regular_count: int
    irregular_in_W: int
    fiber_sizes: tuple[int, ...]
    degree_d: int
    irregular_power_count: int = field(default=0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["representative_B"] = [list(r) for r in self.representative_B.rows]
        d["fiber_sizes"] = list(self.fiber_sizes)
        return d


def _locus(B: FpMatrix, N: int, t_desc: TorusDesc, coords: np.ndarray):
    """(in_W mask, t^N regular mask) over the given torus coordinates."""
    ell = t_desc.ell
    C = t_desc.conjugator
    # det(I - B t^N) = det(I - B' D^N) with B' = C^-1 B C
    Bp = np.array((C.inverse() @ B @ C).rows, dtype=np.int64)
    powered = _vpow(coords, N, ell)
    d = eval_characters(powered, t_desc.weights, ell)
    M = Bp[None, :, :] * d[:, None, :] % ell
    eye = np.eye(t_desc.n, dtype=np.int64)
    in_w = batch_det((eye - M) % ell, ell) == 0
    return in_w, regular_mask(powered, t_desc, ell)


def _orbit_ids(coords: np.ndarray, t_desc: TorusDesc) -> np.ndarray:
    """Index of each point's scalar orbit, via the representative with t_1 = 1."""
    ell = t_desc.ell
    lam = _vpow(coords[:, 0], -1, ell)
    rep = np.ones_like(coords)
    for k, h in enumerate(t_desc.homothety):
        rep[:, k] = coords[:, k] * _vpow(lam, h, ell) % ell
    key = np.zeros(len(coords), dtype=np.int64)
    for k in range(1, coords.shape[1]):
        key = key * ell + rep[:, k]
    _, ids = np.unique(key, return_inverse=True)
    return ids.ravel()


def scan_W_variety(B: FpMatrix, N: int, t_desc: TorusDesc, budget=None) -> TorusScanReport:
    ell = t_desc.ell
    coords = torus_coords(t_desc.rank_r, ell, budget)
    in_w, reg = _locus(B, N, t_desc, coords)
    fibers = np.bincount(_orbit_ids(coords, t_desc), weights=in_w).astype(np.int64)
    return TorusScanReport(
        ell=ell,
        N=N,
        representative_B=B,
        w_count=int(in_w.sum()),
        regular_count=int((in_w & reg).sum()),
        irregular_in_W=int((in_w & ~reg).sum()),
        fiber_sizes=tuple(sorted(fibers.tolist())),
        degree_d=int(fibers.max()) if len(fibers) else 0,
        irregular_power_count=int((~reg).sum()),
    )


def irregular_power_bound(N: int, t_desc: TorusDesc, ell: int | None = None, budget=None) -> tuple[int, int]:
    """(#{t : t^N not regular}, N^r * #{t : t not regular})."""
    ell = ell if ell is not None else t_desc.ell
    coords = torus_coords(t_desc.rank_r, ell, budget)
    non_regular = int((~regular_mask(coords, t_desc, ell)).sum())
    d_count = int((~regular_mask(_vpow(coords, N, ell), t_desc, ell)).sum())
    bound = N**t_desc.rank_r * non_regular
    assert d_count <= bound
    return d_count, bound


# ---------------------------------------------------------------------------
# all split tori of GL(2) at once


def _gl2_all_tori(ell: int):
    """Conjugators and their inverses for every split torus of GL(2), stacked."""
    pts = _p1_points(ell)
    pairs = list(itertools.combinations(range(len(pts)), 2))
    P = np.array(pts, dtype=np.int64)
    u, v = P[[a for a, _ in pairs]], P[[b for _, b in pairs]]
    C = np.stack([np.stack([u[:, 0], v[:, 0]], 1), np.stack([u[:, 1], v[:, 1]], 1)], 1)
    det = (C[:, 0, 0] * C[:, 1, 1] - C[:, 0, 1] * C[:, 1, 0]) % ell
    dinv = _vpow(det, -1, ell)
    Cinv = np.stack(
        [np.stack([C[:, 1, 1], -C[:, 0, 1]], 1), np.stack([-C[:, 1, 0], C[:, 0, 0]], 1)], 1
    ) * dinv[:, None, None] % ell
    return C, Cinv


def gl2_regular_locus(B: FpMatrix, N: int, ell: int):
    """For every split torus of GL(2) and every t in it: det(I - B t^N) = 0 and t^N regular.

    Returns (mask of shape (tori, points), torus conjugators, inverses, coords).
    """
    C, Cinv = _gl2_all_tori(ell)
    coords = torus_coords(2, ell)
    s = _vpow(coords, N, ell)
    Bm = np.array(B.rows, dtype=np.int64)
    Bp = batch_matmul(batch_matmul(Cinv, Bm, ell), C, ell)  # (T, 2, 2)
    detB = (Bm[0, 0] * Bm[1, 1] - Bm[0, 1] * Bm[1, 0]) % ell
    s1, s2 = s[None, :, 0], s[None, :, 1]
    # det(I - B' diag(s1, s2)) = 1 - b11 s1 - b22 s2 + det(B) s1 s2
    val = (1 - Bp[:, 0, 0, None] * s1 % ell - Bp[:, 1, 1, None] * s2 % ell + detB * (s1 * s2 % ell)) % ell
    mask = (val == 0) & (s1 != s2)
    return mask, C, Cinv, coords


def regular_counts_all_tori(B: FpMatrix, N: int, ell: int) -> np.ndarray:
    """Regular eigenvalue-1 counts, one per split torus of GL(2, F_ell)."""
    mask, *_ = gl2_regular_locus(B, N, ell)
    return mask.sum(axis=1)


@dataclass
class UnionReport:
    exact_union: int
    divided_estimate: int
    regular_sum: int
    image_sum: int
    disjoint: bool
    n_tori: int


def union_lower_bound(B: FpMatrix, N: int, spec: GroupModelSpec) -> UnionReport:
    """Size of the union over split tori of {B t^N : det(I - B t^N) = 0, t^N regular}.

    Per-torus image sets are deduplicated on their own and then merged; the
    union is disjoint exactly when the merged size equals the sum of the
    per-torus sizes.
    """
    if spec.kind != "GL" or spec.dim != 2:
        raise UnsupportedKind("union bound is implemented for GL(2) only")
    ell = spec.ell
    check_budget(ell**4, None, "GL(2) torus union")
    mask, C, Cinv, coords = gl2_regular_locus(B, N, ell)
    s = _vpow(coords, N, ell)
    Bm = np.array(B.rows, dtype=np.int64)
    per_torus = []
    for T in np.flatnonzero(mask.any(axis=1)):
        d = s[mask[T]]
        tN = batch_matmul(C[T] * d[:, None, :] % ell, Cinv[T], ell)
        per_torus.append(np.unique(encode_matrices(batch_matmul(Bm, tN, ell), ell)))
    image_sum = sum(len(k) for k in per_torus)
    union = len(np.unique(np.concatenate(per_torus))) if per_torus else 0
    regular_sum = int(mask.sum())
    return UnionReport(
        exact_union=union,
        divided_estimate=regular_sum // N**spec.rank_r,
        regular_sum=regular_sum,
        image_sum=image_sum,
        disjoint=union == image_sum,
        n_tori=len(C),
    )


def split_regular_eigen1_count(ell: int, budget=None) -> int:
    """#{h in GL(2, F_ell) : det(I - h) = 0 and h has two distinct eigenvalues in F_ell}.

    Direct filter over all matrices: since 1 is an eigenvalue, the other one
    is det h, so the condition is det(I - h) = 0 and det h not in {0, 1}.
    """
    from .groups import iter_blocks

    total = 0
    for blk in iter_blocks(GroupModelSpec.gl(2, ell), budget):
        det = batch_det(blk, ell)
        e1 = batch_det((np.eye(2, dtype=np.int64) - blk) % ell, ell) == 0
        total += int(np.count_nonzero(e1 & (det != 1)))
    return total


def gl_torus_equations(n: int) -> list[list[tuple[int, tuple[int, ...]]]]:
    """Defining polynomials of the diagonal torus of GL(n) inside A^(n^2 + 1).

    Variables are x_11, x_12, ..., x_nn, y; the torus is cut out by the
    off-diagonal entries and det(x) * y - 1.
    """
    nv = n * n + 1

    def var(i, j):
        return i * n + j

    polys = []
    for i in range(n):
        for j in range(n):
            if i != j:
                e = [0] * nv
                e[var(i, j)] = 1
                polys.append([(1, tuple(e))])
    det_y = []
    for perm in itertools.permutations(range(n)):
        sign = 1
        for a, b in itertools.combinations(range(n), 2):
            if perm[a] > perm[b]:
                sign = -sign
        e = [0] * nv
        for i, j in enumerate(perm):
            e[var(i, j)] += 1
        e[-1] = 1
        det_y.append((sign, tuple(e)))
    det_y.append((-1, (0,) * nv))
    polys.append(det_y)
    return polys


def gl_eigen1_equation(n: int) -> list[tuple[int, tuple[int, ...]]]:
    """det(I - X) in the variables of ``gl_torus_equations`` (y unused)."""
    nv = n * n + 1
    terms: dict[tuple[int, ...], int] = {}
    for perm in itertools.permutations(range(n)):
        sign = 1
        for a, b in itertools.combinations(range(n), 2):
            if perm[a] > perm[b]:
                sign = -sign
        # prod_i (delta_{i,perm i} - x_{i,perm i}), expanded over subsets
        factors = [((1 if i == j else 0), i * n + j) for i, j in enumerate(perm)]
        for choice in itertools.product((0, 1), repeat=n):
            coef = sign
            e = [0] * nv
            for (const, v), pick in zip(factors, choice):
                if pick:
                    coef = -coef
                    e[v] += 1
                else:
                    coef *= const
            if coef:
                terms[tuple(e)] = terms.get(tuple(e), 0) + coef
    return [(c, e) for e, c in sorted(terms.items()) if c]
