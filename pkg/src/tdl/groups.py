"""Finite models of the mod-ell image group and its cosets.

Three kinds are supported: the full GL(n, F_ell), the similitude group
GSp(2g, F_ell) for the antidiagonal form ``gsp_form(g)``, and explicit
element lists. Exact counting goes through ``iter_blocks``, which streams the
group as numpy stacks in row-major index order.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence, Union

import numpy as np

from .config import check_budget
from .errors import DomainError, FormatError, NotAGroup, UnsupportedKind, ZeroInverse
from .ff import (
    FpMatrix,
    batch_det,
    batch_eigen1,
    batch_matmul,
    check_modulus,
    decode_indices,
    encode_matrices,
)

BLOCK = 1 << 18
KINDS = ("GL", "GSp", "Explicit")


def gsp_form(g: int, ell: int) -> FpMatrix:
    """Antidiagonal alternating form: +1 above the antidiagonal midpoint, -1 below."""
    n = 2 * g
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][n - 1 - i] = 1 if i < g else -1
    return FpMatrix(tuple(map(tuple, rows)), ell)


@dataclass(frozen=True)
class GroupModelSpec:
    kind: str
    ell: int
    dim: int
    rank_r: int
    index_exponent_N: int = 1
    elements: tuple[FpMatrix, ...] = field(default=(), repr=False, compare=False)
    _keys: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self):
        check_modulus(self.ell)
        if self.kind not in KINDS:
            raise UnsupportedKind(f"unknown group kind {self.kind!r}")
        if self.index_exponent_N < 1:
            raise DomainError("index exponent N must be >= 1")
        if self.kind == "GL" and self.rank_r != self.dim:
            raise DomainError("GL(n) has rank n")
        if self.kind == "GSp":
            if self.dim % 2:
                raise DomainError("GSp needs even dimension")
            if self.rank_r != self.dim // 2 + 1:
                raise DomainError("GSp(2g) has rank g + 1")
        if self.kind == "Explicit":
            if not self.elements:
                raise NotAGroup("explicit group needs at least one element")
            els = sorted({m.key(): m for m in self.elements}.items())
            for _, m in els:
                if m.modulus != self.ell or m.n != self.dim:
                    raise NotAGroup("element over a different field or size")
            object.__setattr__(self, "elements", tuple(m for _, m in els))
            object.__setattr__(self, "_keys", tuple(k for k, _ in els))
            _check_closed(self)

    @classmethod
    def gl(cls, n: int, ell: int, N: int = 1) -> "GroupModelSpec":
        return cls("GL", ell, n, n, N)

    @classmethod
    def gsp(cls, n: int, ell: int, N: int = 1) -> "GroupModelSpec":
        return cls("GSp", ell, n, n // 2 + 1, N)

    @classmethod
    def explicit(
        cls, elements: Iterable[FpMatrix], ell: int | None = None, N: int = 1, rank_r: int | None = None
    ) -> "GroupModelSpec":
        elements = tuple(elements)
        ell = ell if ell is not None else elements[0].modulus
        n = elements[0].n
        return cls("Explicit", ell, n, rank_r if rank_r is not None else n, N, elements)

    def contains(self, m: FpMatrix) -> bool:
        if m.modulus != self.ell or m.n != self.dim:
            return False
        if self.kind == "GL":
            return m.is_invertible()
        if self.kind == "GSp":
            return gsp_multiplier(m) is not None
        k = m.key()
        i = bisect.bisect_left(self._keys, k)
        return i < len(self._keys) and self._keys[i] == k

    @property
    def keys(self) -> np.ndarray:
        return np.asarray(self._keys, dtype=np.int64)


@dataclass(frozen=True)
class CosetSpec:
    group: GroupModelSpec
    representative_B: FpMatrix

    def __post_init__(self):
        B = self.representative_B
        if B.modulus != self.group.ell or B.n != self.group.dim:
            raise NotAGroup("coset representative over a different field or size")
        if not B.is_invertible():
            raise ZeroInverse("coset representative must be invertible")
        if self.group.kind == "Explicit":
            Binv = B.inverse()
            if not all(self.group.contains(B @ g @ Binv) for g in self.group.elements):
                raise NotAGroup("representative does not normalize the explicit subgroup")

    @property
    def ell(self) -> int:
        return self.group.ell

    @property
    def dim(self) -> int:
        return self.group.dim


Target = Union[GroupModelSpec, CosetSpec]


def _check_closed(spec: GroupModelSpec):
    arr = np.array([m.rows for m in spec.elements], dtype=np.int64)
    keys = spec.keys
    ell = spec.ell
    if np.any(batch_det(arr, ell) == 0):
        raise NotAGroup("explicit list contains a singular matrix")
    eye = np.eye(spec.dim, dtype=np.int64)
    if not np.isin(encode_matrices(eye, ell), keys):
        raise NotAGroup("explicit list is missing the identity")
    # a finite set closed under products is closed under inverses
    step = max(1, BLOCK // len(arr))
    for i in range(0, len(arr), step):
        prods = batch_matmul(arr[i : i + step, None], arr[None, :], ell)
        if not np.all(np.isin(encode_matrices(prods, ell), keys)):
            raise NotAGroup("explicit list is not closed under multiplication")


def gsp_multiplier(m: FpMatrix) -> int | None:
    """mu with M^T J M = mu J, or None when M is not a similitude."""
    if m.n % 2:
        return None
    J = gsp_form(m.n // 2, m.modulus)
    lhs = m.transpose() @ J @ m
    mu = lhs.rows[0][m.n - 1]
    if mu == 0 or lhs != J.scale(mu):
        return None
    return mu


def _batch_gsp_mask(arr: np.ndarray, ell: int) -> np.ndarray:
    n = arr.shape[-1]
    J = np.array(gsp_form(n // 2, ell).rows, dtype=np.int64)
    lhs = batch_matmul(np.swapaxes(arr, -1, -2), batch_matmul(J, arr, ell), ell)
    mu = lhs[..., 0, n - 1]
    ok = mu != 0
    ok &= np.all((lhs - mu[..., None, None] * J) % ell == 0, axis=(-1, -2))
    return ok


def group_order(spec: GroupModelSpec) -> int:
    ell = spec.ell
    if spec.kind == "GL":
        return math.prod(ell**spec.dim - ell**i for i in range(spec.dim))
    if spec.kind == "GSp":
        g = spec.dim // 2
        return (ell - 1) * ell ** (g * g) * math.prod(ell ** (2 * i) - 1 for i in range(1, g + 1))
    return len(spec.elements)


def target_order(target: Target) -> int:
    return group_order(target.group if isinstance(target, CosetSpec) else target)


def iter_blocks(spec: GroupModelSpec, budget=None, block: int = BLOCK) -> Iterator[np.ndarray]:
    """Stream the group as (k, n, n) int64 stacks in row-major index order."""
    if spec.kind == "Explicit":
        arr = np.array([m.rows for m in spec.elements], dtype=np.int64)
        for i in range(0, len(arr), block):
            yield arr[i : i + block]
        return
    n, ell = spec.dim, spec.ell
    total = ell ** (n * n)
    check_budget(total, budget, f"{spec.kind}({n}) over F_{ell}")
    if spec.kind == "GSp":
        arr = _gsp_by_columns(n, ell)
        for i in range(0, len(arr), block):
            yield arr[i : i + block]
        return
    for start in range(0, total, block):
        cand = decode_indices(np.arange(start, min(start + block, total), dtype=np.int64), n, ell)
        mask = batch_det(cand, ell) != 0
        if mask.any():
            yield cand[mask]


def _gsp_by_columns(n: int, ell: int) -> np.ndarray:
    """All similitudes of the antidiagonal form, sorted by row-major key.

    Exhaustive search that fixes one column at a time and prunes on the
    pairing conditions omega(c_i, c_j) = mu * J[i, j] against every earlier
    column; mu is fixed by the first column paired with an earlier one.
    """
    g = n // 2
    J = np.array(gsp_form(g, ell).rows, dtype=np.int64)
    idx = np.arange(ell**n, dtype=np.int64)
    vecs = np.stack([(idx // ell ** (n - 1 - k)) % ell for k in range(n)], axis=1)
    omega = (vecs @ J % ell) @ vecs.T % ell  # omega[u, v] = u^T J v
    cols = idx[:, None]
    mu = np.zeros(len(cols), dtype=np.int64)
    step = max(1, BLOCK // len(vecs))
    for j in range(1, n):
        new_cols, new_mus = [], []
        for s in range(0, len(cols), step):
            fc, fm = cols[s : s + step], mu[s : s + step]
            ok = np.ones((len(fc), len(vecs)), dtype=bool)
            m = np.broadcast_to(fm[:, None], ok.shape)
            for i in range(j):
                w = omega[fc[:, i]]
                if J[i, j] == 0:
                    ok &= w == 0
                elif i == g - 1 and j == g:
                    m = w
                    ok &= w != 0
                else:
                    ok &= w == m * J[i, j] % ell
            f_idx, c_idx = np.nonzero(ok)
            new_cols.append(np.concatenate([fc[f_idx], c_idx[:, None]], axis=1))
            new_mus.append(np.asarray(m)[f_idx, c_idx])
        cols, mu = np.concatenate(new_cols), np.concatenate(new_mus)
    mats = np.swapaxes(vecs[cols], 1, 2)
    order = np.argsort(encode_matrices(mats, ell), kind="stable")
    return mats[order]


def iter_target_blocks(target: Target, budget=None) -> Iterator[np.ndarray]:
    if isinstance(target, CosetSpec):
        B = np.array(target.representative_B.rows, dtype=np.int64)
        for blk in iter_blocks(target.group, budget):
            yield batch_matmul(B, blk, target.ell)
    else:
        yield from iter_blocks(target, budget)


def enumerate_group(spec: GroupModelSpec, budget=None) -> Iterator[FpMatrix]:
    ell, n = spec.ell, spec.dim
    for blk in iter_blocks(spec, budget):
        for flat in blk.reshape(len(blk), -1).tolist():
            yield FpMatrix.from_flat(flat, n, ell)


# ---------------------------------------------------------------------------
# sampling


def _draw_candidates(spec: GroupModelSpec, rng: np.random.Generator, k: int) -> np.ndarray:
    cand = rng.integers(0, spec.ell, size=(k, spec.dim, spec.dim), dtype=np.int64)
    if spec.kind == "GL":
        return cand[batch_det(cand, spec.ell) != 0]
    return cand[_batch_gsp_mask(cand, spec.ell)]


def sample_batch(target: Target, rng: np.random.Generator, k: int) -> np.ndarray:
    """k independent uniform draws as a (k, n, n) stack.

    GL and GSp use rejection from the full matrix space; accepted candidates
    keep their draw order, so the output is a deterministic function of the
    generator state.
    """
    spec = target.group if isinstance(target, CosetSpec) else target
    if spec.kind == "Explicit":
        arr = np.array([m.rows for m in spec.elements], dtype=np.int64)
        out = arr[rng.integers(0, len(arr), size=k)]
    else:
        accept = group_order(spec) / spec.ell ** (spec.dim**2)
        parts, have = [], 0
        while have < k:
            want = int((k - have) / accept * 1.1) + 16
            got = _draw_candidates(spec, rng, min(want, BLOCK))
            parts.append(got)
            have += len(got)
        out = np.concatenate(parts)[:k] if parts else np.zeros((0, spec.dim, spec.dim), np.int64)
    if isinstance(target, CosetSpec):
        B = np.array(target.representative_B.rows, dtype=np.int64)
        out = batch_matmul(B, out, spec.ell)
    return out


def sample_uniform(target: Target, rng: np.random.Generator) -> FpMatrix:
    spec = target.group if isinstance(target, CosetSpec) else target
    if spec.kind == "Explicit":
        g = spec.elements[int(rng.integers(0, len(spec.elements)))]
    else:
        while True:
            cand = rng.integers(0, spec.ell, size=spec.dim * spec.dim).tolist()
            g = FpMatrix.from_flat(cand, spec.dim, spec.ell)
            if spec.contains(g):
                break
    if isinstance(target, CosetSpec):
        return target.representative_B @ g
    return g


# ---------------------------------------------------------------------------
# eigenvalue-1 counting


def count_eigen1_scan(target: Target, budget=None) -> int:
    """#{h in target : det(I - h) = 0} by exhaustive scan."""
    ell = target.ell if isinstance(target, CosetSpec) else target.ell
    return int(sum(np.count_nonzero(batch_eigen1(blk, ell)) for blk in iter_target_blocks(target, budget)))


def count_eigen1_gl2_fibered(ell: int) -> int:
    """Exact count over GL(2, F_ell) in O(ell^2).

    For h = [[a, b], [c, d]], det(I - h) = 0 means bc = (1 - a)(1 - d) =: k,
    and invertibility means ad != k. For fixed (a, d) the number of (b, c)
    with bc = k is 2*ell - 1 when k = 0 and ell - 1 otherwise.
    """
    a = np.arange(ell, dtype=np.int64)[:, None]
    d = np.arange(ell, dtype=np.int64)[None, :]
    k = (1 - a) % ell * ((1 - d) % ell) % ell
    ok = (a * d % ell) != k
    fiber = np.where(k == 0, 2 * ell - 1, ell - 1)
    return int(np.sum(fiber[ok]))


def gl2_eigen1_classes(ell: int) -> list[tuple[str, int]]:
    """Conjugacy classes of GL(2, F_ell) having 1 as an eigenvalue, with sizes.

    Sizes are |GL2| / |centralizer|: scalars have the whole group as
    centralizer, the unipotent class has centralizer of order ell(ell - 1),
    and diag(1, mu) with mu != 1 has the split torus, of order (ell - 1)^2.
    """
    order = (ell * ell - 1) * (ell * ell - ell)
    classes = [("identity", 1), ("unipotent", order // (ell * (ell - 1)))]
    classes += [(f"diag(1,{mu})", order // (ell - 1) ** 2) for mu in range(2, ell)]
    return classes


def count_eigen1_gl2_classes(ell: int) -> int:
    return sum(size for _, size in gl2_eigen1_classes(ell))


def _is_full_gl2(target: Target) -> bool:
    spec = target.group if isinstance(target, CosetSpec) else target
    return spec.kind == "GL" and spec.dim == 2


def count_eigen1(target: Target, method: str = "auto", budget=None) -> int:
    """Exact number of elements of ``target`` with 1 as an eigenvalue.

    ``method`` is one of ``auto``, ``scan``, ``fibered`` or ``classes``; the
    last two apply to GL(2) and its cosets (a coset of the full group is the
    group itself). ``auto`` uses the O(ell^2) fibered count for GL(2) and the
    exhaustive scan otherwise.
    """
    if method == "auto":
        method = "fibered" if _is_full_gl2(target) else "scan"
    if method == "scan":
        return count_eigen1_scan(target, budget)
    if not _is_full_gl2(target):
        raise UnsupportedKind(f"method {method!r} is only available for GL(2)")
    if method == "fibered":
        return count_eigen1_gl2_fibered(target.ell)
    if method == "classes":
        return count_eigen1_gl2_classes(target.ell)
    raise DomainError(f"unknown method {method!r}")


def eigen1_ratio(target: Target, method: str = "auto", budget=None) -> Fraction:
    return Fraction(count_eigen1(target, method, budget), target_order(target))


# ---------------------------------------------------------------------------
# subgroups


def check_index_condition(subgroup: GroupModelSpec, ambient: GroupModelSpec, N: int, budget=None) -> bool:
    """True iff h^N lies in ``subgroup`` for every h in ``ambient``."""
    if subgroup.kind != "Explicit":
        raise UnsupportedKind("subgroup must be an explicit element list")
    ell = ambient.ell
    keys = subgroup.keys
    for blk in iter_blocks(ambient, budget):
        power = _batch_power(blk, N, ell)
        if not np.all(np.isin(encode_matrices(power, ell), keys)):
            return False
    return True


def _batch_power(arr: np.ndarray, e: int, ell: int) -> np.ndarray:
    n = arr.shape[-1]
    result = np.broadcast_to(np.eye(n, dtype=np.int64), arr.shape).copy()
    base = arr
    while e:
        if e & 1:
            result = batch_matmul(result, base, ell)
        base = batch_matmul(base, base, ell)
        e >>= 1
    return result


def subgroup_by_filter(
    ambient: GroupModelSpec, keep: Callable[[FpMatrix], bool], N: int = 1, budget=None
) -> GroupModelSpec:
    els = [m for m in enumerate_group(ambient, budget) if keep(m)]
    return GroupModelSpec.explicit(els, ambient.ell, N, ambient.rank_r)


def generate_subgroup(gens: Sequence[FpMatrix], N: int = 1, rank_r: int | None = None) -> GroupModelSpec:
    """Closure of ``gens`` under multiplication (breadth first)."""
    ell, n = gens[0].modulus, gens[0].n
    seen = {FpMatrix.identity(n, ell)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                p = h @ g
                if p not in seen:
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
    return GroupModelSpec.explicit(seen, ell, N, rank_r)


# ---------------------------------------------------------------------------
# text format: header "n ell", then one matrix per line, row-major


def parse_matrices(text: str) -> tuple[int, int, list[FpMatrix]]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty matrix file")
    try:
        n, ell = map(int, lines[0].split())
    except ValueError:
        raise FormatError(f"bad header {lines[0]!r}; expected 'n ell'") from None
    mats = []
    for ln in lines[1:]:
        vals = ln.split()
        if len(vals) != n * n:
            raise FormatError(f"expected {n * n} entries, got {len(vals)}: {ln!r}")
        mats.append(FpMatrix.from_flat([int(v) for v in vals], n, ell))
    return n, ell, mats


def format_matrices(mats: Sequence[FpMatrix], n: int | None = None, ell: int | None = None) -> str:
    n = n if n is not None else mats[0].n
    ell = ell if ell is not None else mats[0].modulus
    out = [f"{n} {ell}"]
    out += [" ".join(map(str, m.flat())) for m in mats]
    return "\n".join(out) + "\n"
