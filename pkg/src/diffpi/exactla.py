"""Exact rational linear algebra on sparse vectors.

Scalars are ``gmpy2.mpq`` values.  Vectors are stored as ``{index: value}``
dictionaries without explicit zeros; :class:`SparseVec` wraps one together
with its ambient dimension for the public API, while the hot loops inside the
package pass bare dictionaries to :meth:`RankAccumulator.insert`.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from gmpy2 import mpq

Scalar = type(mpq())
ZERO = mpq(0)
ONE = mpq(1)

Vec = Dict[int, Scalar]


class DimensionError(ValueError):
    """Vector dimensions do not agree."""


class InconsistentBasisError(ValueError):
    """Quotient coordinates do not complement the given kernel."""


def scalar(x) -> Scalar:
    """Coerce ints, ``Fraction``s, ``mpq``s and ``"p/q"`` strings to an exact scalar."""
    if isinstance(x, Scalar):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty scalar string")
        return mpq(s)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def format_scalar(x) -> str:
    """Serialize as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    x = scalar(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class SparseVec:
    """A vector of fixed dimension holding only its nonzero entries."""

    __slots__ = ("dim", "entries")

    def __init__(self, dim: int, entries: Optional[Mapping[int, object]] = None):
        if dim < 0:
            raise ValueError("dimension must be non-negative")
        self.dim = dim
        clean: Vec = {}
        if entries:
            for i, x in entries.items():
                if not 0 <= i < dim:
                    raise IndexError(f"index {i} out of range for dimension {dim}")
                x = scalar(x)
                if x:
                    clean[i] = x
        self.entries = clean

    @classmethod
    def from_dense(cls, values: Iterable) -> "SparseVec":
        values = list(values)
        return cls(len(values), {i: x for i, x in enumerate(values)})

    @classmethod
    def unit(cls, dim: int, i: int) -> "SparseVec":
        return cls(dim, {i: 1})

    def to_dense(self) -> List[Scalar]:
        out = [ZERO] * self.dim
        for i, x in self.entries.items():
            out[i] = x
        return out

    def __getitem__(self, i: int) -> Scalar:
        return self.entries.get(i, ZERO)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[int, Scalar]]:
        return iter(sorted(self.entries.items()))

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return self.dim == other.dim and self.entries == other.entries

    def __add__(self, other: "SparseVec") -> "SparseVec":
        _check_dims(self.dim, other.dim)
        out = dict(self.entries)
        axpy(out, ONE, other.entries)
        return SparseVec._trusted(self.dim, out)

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        _check_dims(self.dim, other.dim)
        out = dict(self.entries)
        axpy(out, -ONE, other.entries)
        return SparseVec._trusted(self.dim, out)

    def __mul__(self, c) -> "SparseVec":
        c = scalar(c)
        if not c:
            return SparseVec(self.dim)
        return SparseVec._trusted(self.dim, {i: c * x for i, x in self.entries.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {format_scalar(x)}" for i, x in self)
        return f"SparseVec({self.dim}, {{{body}}})"

    @property
    def leading_index(self) -> Optional[int]:
        return min(self.entries) if self.entries else None

    @classmethod
    def _trusted(cls, dim: int, entries: Vec) -> "SparseVec":
        v = cls.__new__(cls)
        v.dim = dim
        v.entries = entries
        return v


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} != {b}")


def axpy(y: Vec, a: Scalar, x: Mapping[int, Scalar]) -> None:
    """In place ``y += a*x`` on bare dictionaries, dropping cancelled entries."""
    for i, xi in x.items():
        v = y.get(i, ZERO) + a * xi
        if v:
            y[i] = v
        else:
            y.pop(i, None)


VecLike = Union[SparseVec, Mapping[int, Scalar]]


class RankAccumulator:
    """Incremental reduced row echelon form over the rationals.

    Each stored row has coefficient 1 at its pivot and 0 at every other
    pivot.  The pivot of a new row is its smallest surviving index, so with
    the monomial order used for indexing, pivots are chosen deterministically.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: Dict[int, Vec] = {}
        # column -> pivots of rows with a nonzero entry there (pivot columns excluded)
        self._occ: Dict[int, set] = {}

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> List[int]:
        return sorted(self._rows)

    def rows(self) -> Iterator[Tuple[int, Vec]]:
        """Yield ``(pivot, row)`` pairs in increasing pivot order."""
        for p in sorted(self._rows):
            yield p, self._rows[p]

    def row(self, pivot: int) -> Vec:
        return self._rows[pivot]

    def _entries(self, v: VecLike) -> Mapping[int, Scalar]:
        if isinstance(v, SparseVec):
            _check_dims(v.dim, self.dim)
            return v.entries
        return v

    def reduce(self, v: VecLike) -> Vec:
        """Return the residue of ``v`` modulo the current span (a new dict)."""
        res = dict(self._entries(v))
        rows = self._rows
        hits = [(p, res[p]) for p in res if p in rows]
        for p, c in hits:
            axpy(res, -c, rows[p])
        return res

    def contains(self, v: VecLike) -> bool:
        return not self.reduce(v)

    def coordinates(self, v: VecLike) -> Dict[int, Scalar]:
        """Coefficients of ``v`` on the stored rows, keyed by pivot."""
        entries = self._entries(v)
        if self.reduce(entries):
            raise ValueError("vector is not in the span")
        return {p: entries[p] for p in entries if p in self._rows}

    def insert(self, v: VecLike) -> bool:
        """Add ``v`` to the span; return True iff the rank went up."""
        entries = self._entries(v)
        res = self.reduce(entries)
        if not res:
            return False
        p = min(res)
        inv = ONE / res[p]
        if inv != 1:
            for i in res:
                res[i] *= inv
        occ = self._occ
        rows = self._rows
        for q in occ.pop(p, ()):
            row = rows[q]
            f = row.pop(p)
            for i, x in res.items():
                if i == p:
                    continue
                old = row.get(i)
                if old is None:
                    row[i] = -f * x
                    occ.setdefault(i, set()).add(q)
                else:
                    old -= f * x
                    if old:
                        row[i] = old
                    else:
                        del row[i]
                        occ[i].discard(q)
        rows[p] = res
        for i in res:
            if i != p:
                occ.setdefault(i, set()).add(p)
        return True

    def extend(self, vectors: Iterable[VecLike]) -> int:
        """Insert many vectors; return how many increased the rank."""
        return sum(1 for v in vectors if self.insert(v))


class EchelonAccumulator:
    """Forward-only sparse echelon form: rows are never back-substituted.

    Cheaper than :class:`RankAccumulator` when the span is nearly the whole
    space, because stored rows keep the sparsity they were inserted with.
    Each row is scaled to 1 at its pivot (its smallest index).
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._rows: Dict[int, Vec] = {}

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> List[int]:
        return sorted(self._rows)

    def _residue(self, v: Mapping[int, Scalar]) -> Tuple[Optional[int], Vec]:
        res = dict(v)
        heap = list(res)
        heapq.heapify(heap)
        rows = self._rows
        while heap:
            p = heapq.heappop(heap)
            c = res.get(p)
            if c is None:
                continue
            row = rows.get(p)
            if row is None:
                return p, res
            for i, x in row.items():
                old = res.get(i)
                if old is None:
                    res[i] = -c * x
                    heapq.heappush(heap, i)
                else:
                    old -= c * x
                    if old:
                        res[i] = old
                    else:
                        del res[i]
        return None, res

    def contains(self, v: VecLike) -> bool:
        entries = v.entries if isinstance(v, SparseVec) else v
        return self._residue(entries)[0] is None

    def insert(self, v: VecLike) -> bool:
        entries = v.entries if isinstance(v, SparseVec) else v
        p, res = self._residue(entries)
        if p is None:
            return False
        inv = ONE / res[p]
        if inv != 1:
            res = {i: x * inv for i, x in res.items()}
        self._rows[p] = res
        return True

    def rows(self) -> Iterator[Tuple[int, Vec]]:
        for p in sorted(self._rows):
            yield p, self._rows[p]

    def to_reduced(self) -> RankAccumulator:
        """The same span in reduced echelon form (largest pivots first keeps fill low)."""
        acc = RankAccumulator(self.dim)
        for p in sorted(self._rows, reverse=True):
            acc.insert(self._rows[p])
        return acc


def rank_insert(acc: RankAccumulator, v: SparseVec) -> bool:
    return acc.insert(v)


def _accumulate(rows: Iterable[VecLike], dim: Optional[int]) -> RankAccumulator:
    rows = list(rows)
    if dim is None:
        dims = {r.dim for r in rows if isinstance(r, SparseVec)}
        if len(dims) > 1:
            raise DimensionError(f"rows have mixed dimensions {sorted(dims)}")
        dim = dims.pop() if dims else 0
    acc = RankAccumulator(dim)
    for r in rows:
        acc.insert(r)
    return acc


def kernel_contains(rows: Iterable[SparseVec], v: SparseVec) -> bool:
    """True iff ``v`` is an exact linear combination of ``rows``."""
    acc = _accumulate(rows, v.dim)
    return acc.contains(v)


def rank_of(rows: Iterable[VecLike], dim: Optional[int] = None) -> int:
    return _accumulate(rows, dim).rank


def nullspace(equations: Iterable[VecLike], nvars: int) -> List[Vec]:
    """Basis of ``{x : e.x = 0 for every equation e}``, one vector per free variable."""
    acc = _accumulate(equations, nvars)
    pivots = set(acc._rows)
    basis = []
    for f in range(nvars):
        if f in pivots:
            continue
        sol: Vec = {f: ONE}
        for p, row in acc._rows.items():
            x = row.get(f)
            if x:
                sol[p] = -x
        basis.append(sol)
    return basis


def trace_on_quotient(
    span_of_kernel: Iterable[VecLike],
    action: Callable[[SparseVec], VecLike],
    quotient_pivots: Iterable[int],
    dim: Optional[int] = None,
) -> Scalar:
    """Trace of the map induced by ``action`` on ``V / K``.

    ``K`` is spanned by ``span_of_kernel``; ``quotient_pivots`` must be exactly
    the non-pivot coordinates of the reduced echelon form of ``K``, so the
    coordinate vectors on them form a complement.  Each such coordinate vector
    is mapped, reduced modulo ``K`` and its own diagonal coefficient summed.
    """
    acc = _accumulate(span_of_kernel, dim)
    n = acc.dim
    qp = sorted(set(quotient_pivots))
    if len(qp) + acc.rank != n or any(j in acc._rows or not 0 <= j < n for j in qp):
        raise InconsistentBasisError(
            f"{len(qp)} quotient coordinates do not complement a kernel of rank {acc.rank} in dimension {n}"
        )
    total = ZERO
    for j in qp:
        image = action(SparseVec._trusted(n, {j: ONE}))
        res = acc.reduce(image)
        total += res.get(j, ZERO)
    return total


def trace_on_span(acc: RankAccumulator, action: Callable[[Vec], Mapping[int, Scalar]]) -> Scalar:
    """Trace of a linear map on the (invariant) span held by ``acc``.

    With rows in reduced echelon form, the coefficient of row ``i`` in any
    vector of the span is that vector's entry at pivot ``i``.
    """
    total = ZERO
    for p, row in acc.rows():
        total += action(row).get(p, ZERO)
    return total


def permutation_trace(acc: RankAccumulator, preimage: Callable[[int], int]) -> Scalar:
    """Trace of a coordinate permutation ``e_i -> e_{s(i)}`` on an invariant span.

    ``preimage(p)`` must return ``s^{-1}(p)``; only one lookup per row is needed.
    """
    total = ZERO
    for p, row in acc._rows.items():
        x = row.get(preimage(p))
        if x:
            total += x
    return total


class SpanCoordinates:
    """Express vectors in a fixed (independent) basis, exactly.

    Rows ``[b_k | e_k]`` are reduced together; reducing ``[v | 0]`` leaves
    ``[0 | -c]`` exactly when ``v = sum c_k b_k``.
    """

    def __init__(self, basis: List[Mapping[int, Scalar]], dim: int):
        self.dim = dim
        self.size = len(basis)
        self._acc = RankAccumulator(dim + self.size)
        for k, b in enumerate(basis):
            row = dict(b)
            row[dim + k] = ONE
            self._acc.insert(row)
        for p in self._acc._rows:
            if p >= dim:
                raise ValueError("basis vectors are linearly dependent")

    def coordinates(self, v: Mapping[int, Scalar]) -> Optional[List[Scalar]]:
        """Coefficients of ``v`` on the basis, or None when ``v`` is outside the span."""
        res = self._acc.reduce(v)
        if any(i < self.dim for i in res):
            return None
        out = [ZERO] * self.size
        for i, x in res.items():
            out[i - self.dim] = -x
        return out
