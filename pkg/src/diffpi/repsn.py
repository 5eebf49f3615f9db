"""Symmetric group characters, cocharacter decomposition and tableau polynomials."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .exactla import ZERO, RankAccumulator, Scalar, scalar
from .diffpoly import DiffPolynomial, Monomial, evaluate
from .fdalg import FDAlgebra, OperatorBasis

Partition = Tuple[int, ...]
MultiplicityMap = Dict[Partition, int]


class DecompositionError(ArithmeticError):
    """Traces do not come from a genuine S_n-module."""


def partitions(n: int, max_part: Optional[int] = None) -> Iterator[Partition]:
    """Partitions of ``n`` in reverse lexicographic order, starting with ``(n,)``."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in partitions(n - k, k):
            yield (k,) + rest


def is_partition(lam: Sequence[int]) -> bool:
    return all(x > 0 for x in lam) and all(a >= b for a, b in zip(lam, lam[1:]))


def is_hook(lam: Partition) -> bool:
    return len(lam) <= 1 or lam[1] == 1


def hook(n: int, r: int) -> Partition:
    """The hook ``(n - r + 1, 1^(r - 1))`` with ``r`` rows."""
    if not 1 <= r <= n:
        raise ValueError("need 1 <= r <= n")
    return (n - r + 1,) + (1,) * (r - 1)


def format_partition(lam: Partition) -> str:
    if len(lam) >= 2 and lam[0] == 1:
        return f"(1^{len(lam)})"
    ones = sum(1 for x in lam[1:] if x == 1)
    if len(lam) >= 3 and is_hook(lam) and ones >= 2:
        return f"({lam[0]},1^{ones})"
    return "(" + ",".join(str(x) for x in lam) + ")"


def parse_partition(text: str) -> Partition:
    body = text.strip().strip("()")
    parts: List[int] = []
    for chunk in body.split(","):
        chunk = chunk.strip()
        if "^" in chunk:
            base, exp = chunk.split("^")
            parts.extend([int(base)] * int(exp))
        elif chunk:
            parts.append(int(chunk))
    lam = tuple(parts)
    if not is_partition(lam):
        raise ValueError(f"{text!r} is not a partition")
    return lam


# -- conjugacy classes ----------------------------------------------------------


def cycle_type(perm: Sequence[int]) -> Partition:
    seen = [False] * len(perm)
    lengths = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        k, j = 0, s
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            k += 1
        lengths.append(k)
    return tuple(sorted(lengths, reverse=True))


def class_size(mu: Partition) -> int:
    n = sum(mu)
    denom = 1
    for k, m in Counter(mu).items():
        denom *= k ** m * math.factorial(m)
    return math.factorial(n) // denom


def representative(mu: Partition) -> Tuple[int, ...]:
    """A permutation of cycle type ``mu`` made of consecutive cycles."""
    perm = []
    start = 0
    for k in mu:
        perm.extend(range(start + 1, start + k))
        perm.append(start)
        start += k
    return tuple(perm)


# -- characters -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _mn(beta: Tuple[int, ...], mu: Tuple[int, ...]) -> int:
    if not mu:
        return 1
    k, rest = mu[0], mu[1:]
    bset = set(beta)
    total = 0
    for b in beta:
        nb = b - k
        if nb < 0 or nb in bset:
            continue
        # sign = (-1)^(number of beta numbers strictly between nb and b)
        height = sum(1 for c in beta if nb < c < b)
        new = tuple(sorted((bset - {b}) | {nb}, reverse=True))
        total += (-1) ** height * _mn(new, rest)
    return total


def mn_character(lam: Sequence[int], mu: Sequence[int]) -> int:
    """Irreducible character ``chi_lam`` at cycle type ``mu`` by rim-hook removal."""
    lam = tuple(lam)
    mu = tuple(sorted(mu, reverse=True))
    if sum(lam) != sum(mu):
        raise ValueError(f"size mismatch: |{lam}| != |{mu}|")
    if not is_partition(lam) or not all(x > 0 for x in mu):
        raise ValueError("expected partitions")
    L = len(lam)
    beta = tuple(lam[i] + (L - 1 - i) for i in range(L))
    return _mn(beta, mu)


def dimension(lam: Partition) -> int:
    return mn_character(lam, (1,) * sum(lam))


def decompose(traces: Mapping[Partition, object], n: int) -> MultiplicityMap:
    """Multiplicities of the irreducibles in a character given on each cycle type.

    Partitions with multiplicity zero are omitted.
    """
    types = list(partitions(n))
    missing = [mu for mu in types if tuple(mu) not in traces]
    if missing:
        raise ValueError(f"missing traces for cycle types {missing}")
    order = math.factorial(n)
    out: MultiplicityMap = {}
    for lam in types:
        s = ZERO
        for mu in types:
            s += class_size(mu) * scalar(traces[mu]) * mn_character(lam, mu)
        m = s / order
        if m.denominator != 1:
            raise DecompositionError(f"multiplicity of {format_partition(lam)} is {m}, not an integer")
        if m < 0:
            raise DecompositionError(f"multiplicity of {format_partition(lam)} is negative ({m})")
        if m:
            out[lam] = int(m)
    return out


def degree_check(mults: Mapping[Partition, int]) -> int:
    """``sum m_lam * f_lam``, the dimension of the module."""
    return sum(m * dimension(lam) for lam, m in mults.items())


# -- tableau polynomials --------------------------------------------------------


@dataclass
class DecoratedTableau:
    """A tableau whose rows list positions ``1..n`` of a monomial.

    The polynomial identifies the entries of row ``r`` with variable ``r`` and
    alternates along columns.  ``decoration`` maps a position to the label
    word carried by the variable sitting at that position.
    """

    shape: Partition
    rows: List[List[int]]
    decoration: Dict[int, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.shape = tuple(self.shape)
        if not is_partition(self.shape) or len(self.shape) > 3:
            raise ValueError("shape must be a partition with at most 3 rows")
        if [len(r) for r in self.rows] != list(self.shape):
            raise ValueError("row lengths do not match the shape")
        n = sum(self.shape)
        if sorted(p for r in self.rows for p in r) != list(range(1, n + 1)):
            raise ValueError("rows must list the positions 1..n exactly once")
        for pos in self.decoration:
            if not 1 <= pos <= n:
                raise ValueError(f"decoration position {pos} outside 1..{n}")

    @property
    def n(self) -> int:
        return sum(self.shape)


def hwv_polynomial(t: DecoratedTableau) -> DiffPolynomial:
    """Column-alternated polynomial of ``t`` with each row identified to one variable."""
    columns = [[r for r in range(len(t.rows)) if c < len(t.rows[r])] for c in range(t.shape[0])]
    per_column = []
    for c, rows in enumerate(columns):
        opts = []
        for perm in itertools.permutations(range(len(rows))):
            sign = _perm_sign(perm)
            opts.append(({t.rows[rows[k]][c]: rows[perm[k]] for k in range(len(rows))}, sign))
        per_column.append(opts)
    terms: Dict[Monomial, Scalar] = {}
    for choice in itertools.product(*per_column):
        var_at: Dict[int, int] = {}
        sign = 1
        for assign, s in choice:
            var_at.update(assign)
            sign *= s
        mono = tuple((var_at[pos], tuple(t.decoration.get(pos, ()))) for pos in range(1, t.n + 1))
        terms[mono] = terms.get(mono, ZERO) + sign
    return DiffPolynomial(terms)


def _perm_sign(perm: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def row_tableau(n: int, decoration: Optional[Mapping[int, Sequence[int]]] = None) -> DecoratedTableau:
    """Single row; with ``{k: word}`` this gives ``x^(k-1) x^word x^(n-k)``."""
    return DecoratedTableau((n,), [list(range(1, n + 1))], {k: tuple(w) for k, w in (decoration or {}).items()})


def two_row_tableau(p: int, q: int, i: int, word: Sequence[int] = ()) -> DecoratedTableau:
    """Shape ``(p+q, p)`` with window ``i``; ``word`` decorates the x next to the central [x, y].

    The polynomial is ``x^i xbar..xtilde [x, y] ybar..ytilde x^(q-i)`` with the
    bars alternating pairwise, or ``(x^w y - y^w x)`` in the middle when decorated.
    """
    if p < 1 or not 0 <= i <= q:
        raise ValueError("need p >= 1 and 0 <= i <= q")
    n = 2 * p + q
    row1 = list(range(i + 1, i + p + 1)) + list(range(1, i + 1)) + list(range(i + 2 * p + 1, n + 1))
    row2 = list(range(i + p + 2, i + 2 * p + 1)) + [i + p + 1]
    deco = {i + p: tuple(word)} if word else {}
    return DecoratedTableau((p + q, p), [row1, row2], deco)


def three_row_tableau(p: int, q: int, i: int, word: Sequence[int] = ()) -> DecoratedTableau:
    """Shape ``(p+q, p, 1)``: a standard polynomial of degree 3 in the first column."""
    if p < 1 or not 0 <= i <= q:
        raise ValueError("need p >= 1 and 0 <= i <= q")
    n = 2 * p + q + 1
    row1 = [i + p] + list(range(i + 1, i + p)) + list(range(1, i + 1)) + list(range(i + 2 * p + 2, n + 1))
    row2 = [i + p + 1] + list(range(i + p + 3, i + 2 * p + 2))
    row3 = [i + p + 2]
    deco = {i + p: tuple(word)} if word else {}
    return DecoratedTableau((p + q, p, 1), [row1, row2, row3], deco)


def first_primes(count: int) -> List[int]:
    out: List[int] = []
    k = 2
    while len(out) < count:
        if all(k % q for q in out):
            out.append(k)
        k += 1
    return out


def default_points(A: FDAlgebra, nvars: int, count: int) -> List[Dict[int, Dict[int, Scalar]]]:
    """One assignment per prime ``beta``: variable v gets ``sum_c (beta + v)^(c + 1) b_c``."""
    points = []
    for beta in first_primes(count):
        beta = scalar(beta)
        points.append({v: {c: (beta + v) ** (c + 1) for c in range(A.dim)} for v in range(nvars)})
    return points


def beta_points(base: Mapping[int, Mapping[int, object]], direction: Mapping[int, Mapping[int, object]],
                betas: Sequence[object]) -> List[Dict[int, Dict[int, Scalar]]]:
    """Assignments ``var -> base[var] + beta * direction[var]``, one per beta."""
    out = []
    for b in betas:
        b = scalar(b)
        point = {}
        for v in set(base) | set(direction):
            vec: Dict[int, Scalar] = {}
            for k, x in base.get(v, {}).items():
                vec[k] = vec.get(k, ZERO) + scalar(x)
            for k, x in direction.get(v, {}).items():
                vec[k] = vec.get(k, ZERO) + b * scalar(x)
            point[v] = {k: x for k, x in vec.items() if x}
        out.append(point)
    return out


def multiplicity_lower_bound(
    A: FDAlgebra,
    W: OperatorBasis,
    lam: Partition,
    candidates: Sequence[DecoratedTableau],
    points: Optional[Sequence[Mapping[int, Mapping[int, object]]]] = None,
) -> int:
    """Number of candidates independent modulo the identities of ``A``.

    Each candidate polynomial is evaluated at every point; the rank of the
    resulting value matrix bounds the multiplicity of ``lam`` from below.
    """
    lam = tuple(lam)
    for t in candidates:
        if t.shape != lam:
            raise ValueError(f"candidate of shape {t.shape} for partition {lam}")
    polys = [hwv_polynomial(t) for t in candidates]
    if points is None:
        points = default_points(A, len(lam), len(candidates) + 2)
    width = A.dim
    acc = RankAccumulator(width * len(points))
    for f in polys:
        row: Dict[int, Scalar] = {}
        for j, pt in enumerate(points):
            for k, x in evaluate(f, A, W, pt).items():
                row[j * width + k] = x
        acc.insert(row)
    return acc.rank
