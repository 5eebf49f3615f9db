"""Codimensions, identities, consequence spaces and two-sided verification.

Two exact routes compute the space of multilinear functions ``A^n -> A``
realized by labeled monomials:

* the *function* route builds it degree by degree: every degree-k monomial
  is a degree-(k-1) monomial in the other variables times one labeled
  variable, so products of a basis at degree k-1 with single labeled
  variables span degree k;
* the *monomial* route streams evaluation columns indexed by the multilinear
  monomials, one per (tuple of points, output coordinate).

Both give ``c_n``; the second also serves canonical and sampled plans.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import os
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .diffpoly import (
    DiffPolynomial,
    Monomial,
    MultilinearIndex,
    evaluate,
    format_polynomial,
    multilinearize,
    relabel,
    substitute,
)
from .exactla import ONE, ZERO, EchelonAccumulator, RankAccumulator, Scalar, Vec, axpy, permutation_trace, scalar, trace_on_quotient
from .fdalg import FDAlgebra, OperatorBasis, op_apply
from .repsn import MultiplicityMap, decompose, degree_check, partitions, representative

DEFAULT_CAP = 10 ** 7
DEFAULT_PATIENCE = 50

LABEL_NOTE = "labels reduced in W: equality certifies generation modulo the operator relations of W"


class PlanError(ValueError):
    """The requested evaluation plan is not admissible."""


class RefutationError(ValueError):
    """A claimed identity does not vanish on the algebra."""

    def __init__(self, generator: str, witness):
        super().__init__(f"{generator} is not an identity; nonzero at {witness}")
        self.generator = generator
        self.witness = witness


class ConsistencyError(AssertionError):
    """Internal invariant violated (e.g. lower bound above upper bound)."""


class PlanMode(str, Enum):
    FULL = "full"
    CANONICAL = "canonical"
    SAMPLED = "sampled"


TupleSource = Callable[[FDAlgebra, int], Iterable[Sequence[Vec]]]


@dataclass(frozen=True)
class EvaluationPlan:
    mode: PlanMode = PlanMode.FULL
    cap: Optional[int] = None
    seed: int = 0
    patience: int = DEFAULT_PATIENCE
    tuple_source: Optional[TupleSource] = None
    note: str = ""

    def effective_cap(self) -> int:
        if self.cap is not None:
            return self.cap
        env = os.environ.get("DIFFPI_CAP")
        return int(env) if env else DEFAULT_CAP


@dataclass
class CodimReport:
    n: int
    c_n: int
    exact: bool
    mode: str
    kernel_dim: int
    pivots: List[Monomial]
    seed: int = 0
    ms: float = 0.0
    route: str = ""

    def to_dict(self, W: Optional[OperatorBasis] = None) -> dict:
        names = W.gen_names if W is not None else None
        return {
            "n": self.n,
            "c_n": self.c_n,
            "exact": self.exact,
            "mode": self.mode,
            "kernel_dim": self.kernel_dim,
            "pivots": [format_polynomial(DiffPolynomial({m: 1}), names) for m in self.pivots],
            "seed": self.seed,
        }


@dataclass
class SandwichVerdict:
    n: int
    lower: int
    upper: int
    equal: bool
    closed_form: Optional[int] = None
    mode: str = "full"
    lower_exact: bool = True
    generators_sha256: str = ""
    notes: List[str] = field(default_factory=list)

    @property
    def closed_form_match(self) -> Optional[bool]:
        return None if self.closed_form is None else self.closed_form == self.lower == self.upper

    @property
    def passed(self) -> bool:
        return self.equal and self.closed_form_match is not False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lower": self.lower,
            "upper": self.upper,
            "equal": self.equal,
            "closed_form": self.closed_form,
            "closed_form_match": self.closed_form_match,
            "mode": self.mode,
            "lower_exact": self.lower_exact,
            "generators_sha256": self.generators_sha256,
            "notes": list(self.notes),
        }


def trivial_operator_basis(A: FDAlgebra) -> OperatorBasis:
    """W = {identity}: the ordinary, derivation-free setting."""
    from .fdalg import op_identity

    return OperatorBasis(A.dim, (), [], [()], [op_identity(A.dim)], [])


# -- evaluation spans --------------------------------------------------------------


@dataclass
class _Span:
    """Row space computed by one of the two routes, kept for trace computations."""

    acc: RankAccumulator
    route: str  # "functions" or "monomials"
    n: int
    d: int
    index: MultilinearIndex
    pivots: List[Monomial]
    exact: bool


def _basis_tuples(A: FDAlgebra, n: int) -> Iterator:
    for js in itertools.product(range(A.dim), repeat=n):
        yield [{j: ONE} for j in js]


def _sampled_tuples(A: FDAlgebra, n: int, seed: int) -> Iterator:
    rng = random.Random(seed)
    while True:
        yield [{k: scalar(x) for k in range(A.dim) if (x := rng.randint(-9, 9))} for _ in range(n)]


def monomial_columns(A: FDAlgebra, W: OperatorBasis, n: int, point: Sequence[Vec]) -> Dict[int, Vec]:
    """Evaluate every multilinear monomial at ``point``.

    Returns ``{output coordinate: {monomial index: value}}``; prefixes are
    shared through a depth-first walk and zero prefixes prune their subtree.
    """
    D = W.dim
    images = [[op_apply(op, point[v]) for op in W.ops] for v in range(n)]
    fact = [math.factorial(k) for k in range(n + 1)]
    label_count = D ** n
    cols: Dict[int, Vec] = {}

    def walk(pos: int, remaining: List[int], rank: int, code: int, prefix: Optional[Vec]):
        for r, v in enumerate(remaining):
            rest = remaining[:r] + remaining[r + 1:]
            nrank = rank + r * fact[n - 1 - pos]
            for w in range(D):
                img = images[v][w]
                if not img:
                    continue
                val = img if prefix is None else A.mul(prefix, img)
                if not val:
                    continue
                ncode = code * D + w
                if pos == n - 1:
                    idx = nrank * label_count + ncode
                    for c, x in val.items():
                        cols.setdefault(c, {})[idx] = x
                else:
                    walk(pos + 1, rest, nrank, ncode, val)

    walk(0, list(range(n)), 0, 0, None)
    return cols


def _monomial_span(A, W, n, tuples: Iterable, patience: Optional[int]) -> Tuple[RankAccumulator, bool]:
    """Rank of streamed columns; returns (accumulator, exhausted-without-early-stop)."""
    index = MultilinearIndex(n, W.dim)
    acc = RankAccumulator(index.size)
    idle = 0
    for point in tuples:
        grew = False
        for _, col in sorted(monomial_columns(A, W, n, point).items()):
            if acc.insert(col):
                grew = True
        if acc.rank == index.size:
            break
        if patience is not None:
            idle = 0 if grew else idle + 1
            if idle >= patience:
                return acc, False
    return acc, True


def _function_span(A: FDAlgebra, W: OperatorBasis, n: int) -> Tuple[RankAccumulator, List[Monomial]]:
    d = A.dim
    D = W.dim
    images = [[op_apply(op, {j: ONE}) for j in range(d)] for op in W.ops]
    acc = RankAccumulator(d * d)
    raw: List[Tuple[Vec, Monomial]] = []
    for w in range(D):
        vec = {j * d + c: x for j in range(d) for c, x in images[w][j].items()}
        if vec and acc.insert(vec):
            raw.append((vec, ((0, W.words[w]),)))
    for k in range(2, n + 1):
        acc = RankAccumulator(d ** k * d)
        new_raw: List[Tuple[Vec, Monomial]] = []
        for f, wit in raw:
            by_tuple: Dict[int, Vec] = {}
            for idx, x in f.items():
                t, c = divmod(idx, d)
                by_tuple.setdefault(t, {})[c] = x
            for i in range(k):
                block = d ** (k - 1 - i)
                moved = tuple((v + 1 if v >= i else v, w) for v, w in wit)
                for w in range(D):
                    vec: Vec = {}
                    for t, val in by_tuple.items():
                        high, low = divmod(t, block)
                        for j in range(d):
                            g = images[w][j]
                            if not g:
                                continue
                            prod = A.mul(val, g)
                            if prod:
                                base = ((high * d + j) * block + low) * d
                                for c, x in prod.items():
                                    vec[base + c] = x
                    if vec and acc.insert(vec):
                        new_raw.append((vec, moved + ((i, W.words[w]),)))
        raw = new_raw
    return acc, [m for _, m in raw]


def _check_cap(A: FDAlgebra, n: int, plan: EvaluationPlan) -> None:
    size = A.dim ** n * A.dim
    cap = plan.effective_cap()
    if size > cap:
        raise PlanError(
            f"full enumeration needs {size} entries (cap {cap}); use the sampled or canonical mode or raise DIFFPI_CAP"
        )


def evaluation_span(A: FDAlgebra, W: OperatorBasis, n: int, plan: Optional[EvaluationPlan] = None,
                    route: Optional[str] = None) -> _Span:
    """Span of the evaluations of degree-n multilinear monomials.

    In the full mode ``route`` picks between streaming monomial columns over
    all basis tuples ("monomials") and building the multilinear functions
    degree by degree ("functions"); by default the smaller side is used.
    """
    if route not in (None, "monomials", "functions"):
        raise ValueError(f"unknown route {route!r}")
    if n < 1:
        raise ValueError("degree must be at least 1")
    plan = plan or EvaluationPlan()
    index = MultilinearIndex(n, W.dim)
    mode = PlanMode(plan.mode)
    if mode is PlanMode.FULL:
        _check_cap(A, n, plan)
        if route is None:
            route = "monomials" if index.size < A.dim ** n else "functions"
        if route == "monomials":
            acc, _ = _monomial_span(A, W, n, _basis_tuples(A, n), None)
            return _Span(acc, "monomials", n, A.dim, index, [index.monomial(p, W) for p in acc.pivots], True)
        acc, pivots = _function_span(A, W, n)
        return _Span(acc, "functions", n, A.dim, index, pivots, True)
    if mode is PlanMode.CANONICAL:
        if plan.tuple_source is None:
            raise PlanError("canonical mode needs a tuple source (see the Grassmann models)")
        acc, _ = _monomial_span(A, W, n, plan.tuple_source(A, n), None)
        return _Span(acc, "monomials", n, A.dim, index, [index.monomial(p, W) for p in acc.pivots], True)
    acc, _ = _monomial_span(A, W, n, _sampled_tuples(A, n, plan.seed), plan.patience)
    return _Span(acc, "monomials", n, A.dim, index, [index.monomial(p, W) for p in acc.pivots], False)


def codimension(A: FDAlgebra, W: OperatorBasis, n: int, plan: Optional[EvaluationPlan] = None) -> CodimReport:
    """Dimension of multilinear degree-n polynomials modulo the identities of ``A``."""
    plan = plan or EvaluationPlan()
    start = time.perf_counter()
    span = evaluation_span(A, W, n, plan)
    ms = (time.perf_counter() - start) * 1000
    c = span.acc.rank
    return CodimReport(n, c, span.exact, PlanMode(plan.mode).value, span.index.size - c, span.pivots,
                       plan.seed, ms, span.route)


# -- identities -----------------------------------------------------------------


def _tuples_for(A: FDAlgebra, k: int, plan: Optional[EvaluationPlan]) -> Iterable:
    plan = plan or EvaluationPlan()
    mode = PlanMode(plan.mode)
    if mode is PlanMode.CANONICAL and plan.tuple_source is not None:
        return plan.tuple_source(A, k)
    if mode is PlanMode.SAMPLED:
        return itertools.islice(_sampled_tuples(A, k, plan.seed), 200)
    return _basis_tuples(A, k)


def find_nonvanishing(A: FDAlgebra, W: OperatorBasis, p: DiffPolynomial,
                      plan: Optional[EvaluationPlan] = None) -> Optional[Dict[int, Vec]]:
    """A point where some multilinear component of ``p`` is nonzero, or None."""
    for comp in multilinearize(p):
        vs = comp.variables()
        for point in _tuples_for(A, len(vs), plan):
            assignment = dict(zip(vs, point))
            if evaluate(comp, A, W, assignment):
                return assignment
    return None


def is_identity(A: FDAlgebra, W: OperatorBasis, p: DiffPolynomial, plan: Optional[EvaluationPlan] = None) -> bool:
    return find_nonvanishing(A, W, p, plan) is None


def describe_point(A: FDAlgebra, point: Dict[int, Vec]) -> Dict[str, str]:
    def vec(v: Vec) -> str:
        parts = []
        for k, x in sorted(v.items()):
            name = A.basis_names[k]
            parts.append(name if x == 1 else f"{x}*{name}")
        return " + ".join(parts) or "0"

    return {f"x{v + 1}": vec(a) for v, a in sorted(point.items())}


# -- consequence spaces ---------------------------------------------------------


def _compositions(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(k))


def generators_sha256(S: Sequence[DiffPolynomial], names: Sequence[str] = ()) -> str:
    text = ";".join(format_polynomial(g, list(names) or None) for g in S)
    return hashlib.sha256(text.encode()).hexdigest()


def _prepare_generators(S: Sequence[DiffPolynomial], W: OperatorBasis) -> List[DiffPolynomial]:
    out = []
    for g in S:
        if not g:
            continue
        if not g.is_multilinear():
            raise ValueError(f"generator {format_polynomial(g, W.gen_names)} is not multilinear")
        out.append(relabel(g, {v: i for i, v in enumerate(g.variables())}))
    return out


class _Moves:
    """Adjacent transpositions and derivation generators acting on degree-n coordinates."""

    def __init__(self, W: OperatorBasis, n: int):
        self.W = W
        self.n = n
        self.index = MultilinearIndex(n, W.dim)
        D = W.dim
        self.powers = [D ** (n - 1 - pos) for pos in range(n)]
        self.columns = [
            [[(u, t[u][w]) for u in range(D) if t[u][w]] for w in range(D)] for t in W.left_mult_tables
        ]

    def transpose(self, i: int, idx: int) -> int:
        perm, labels = self.index.index_monomial(idx)
        sw = [i + 1 if v == i else i if v == i + 1 else v for v in perm]
        return self.index.monomial_index(sw, labels)

    def derive(self, g: int, v: Mapping[int, Scalar]) -> Vec:
        D = self.W.dim
        cols = self.columns[g]
        out: Vec = {}
        for idx, c in v.items():
            for pw in self.powers:
                w = (idx // pw) % D
                for u, x in cols[w]:
                    k = idx + (u - w) * pw
                    y = out.get(k, ZERO) + c * x
                    if y:
                        out[k] = y
                    else:
                        del out[k]
        return out

    def core_instances(self, generators: Sequence[DiffPolynomial]) -> Iterator[Vec]:
        """Each generator at monomials whose concatenated variables are x_1..x_n."""
        W = self.W
        n = self.n
        for g in generators:
            k = len(g.variables())
            if k > n:
                continue
            for comp in _compositions(n, k):
                blocks = []
                start = 0
                for size in comp:
                    blocks.append(range(start, start + size))
                    start += size
                for labels in itertools.product(range(W.dim), repeat=n):
                    args = [DiffPolynomial.monomial([(p, W.words[labels[p]]) for p in b]) for b in blocks]
                    h = substitute(g, args, W)
                    if h:
                        yield self.index.vector(h, W)


class _Level:
    """Degree-n quotient of the multilinear space by the consequences.

    ``V`` is the quotient by the products ``x_j^w * I'`` where ``I'`` is the
    degree-(n-1) consequence space on the other variables; its coordinates
    are triples (first variable j, first label w, basis element b of the
    previous quotient).  ``acc`` holds the image of the remaining
    consequences in ``V``; the coordinates it does not pivot on form the
    basis of the degree-n quotient, each represented by a monomial (``lift``).
    """

    def __init__(self, n: int, prev: Optional["_Level"], moves: Optional[_Moves]):
        self.n = n
        self.prev = prev
        self.moves = moves
        self.nb_prev = prev.size if prev is not None else 0
        self.acc: Optional[RankAccumulator] = None
        self.basis: List[int] = []
        self.position: Dict[int, int] = {}
        self.lift: List[int] = []
        self._nf: Dict[int, Vec] = {}
        self._nfl: Dict[int, Vec] = {}

    @property
    def size(self) -> int:
        return len(self.basis)

    def to_v(self, idx: int) -> Vec:
        """Class of monomial ``idx`` modulo the products with the previous degree."""
        hit = self._nfl.get(idx)
        if hit is not None:
            return hit
        perm, labels = self.moves.index.index_monomial(idx)
        j, w = perm[0], labels[0]
        rest = [v - 1 if v > j else v for v in perm[1:]]
        prev = self.prev
        inner = prev.nf(prev.moves.index.monomial_index(rest, labels[1:])) if prev.n else {0: ONE}
        base = (j * self.moves.W.dim + w) * self.nb_prev
        out = {base + b: x for b, x in inner.items()}
        self._nfl[idx] = out
        return out

    def vec_to_v(self, v: Mapping[int, Scalar]) -> Vec:
        out: Vec = {}
        for idx, c in v.items():
            axpy(out, c, self.to_v(idx))
        return out

    def nf(self, idx: int) -> Vec:
        """Coordinates of monomial ``idx`` on the quotient basis."""
        hit = self._nf.get(idx)
        if hit is None:
            res = self.acc.reduce(self.to_v(idx))
            hit = {self.position[c]: x for c, x in res.items()}
            self._nf[idx] = hit
        return hit

    def nf_vector(self, v: Mapping[int, Scalar]) -> Vec:
        out: Vec = {}
        for idx, c in v.items():
            axpy(out, c, self.nf(idx))
        return out

    def v_lift(self, coord: int) -> int:
        """Monomial representing V coordinate ``coord``."""
        D = self.moves.W.dim
        jw, b = divmod(coord, self.nb_prev)
        j, w = divmod(jw, D)
        if self.n == 1:
            return self.moves.index.monomial_index([0], [w])
        perm, labels = self.prev.moves.index.index_monomial(self.prev.lift[b])
        perm = [j] + [v + 1 if v >= j else v for v in perm]
        return self.moves.index.monomial_index(perm, (w,) + labels)


class _Base:
    """Degree 0: the empty monomial, with nothing to quotient."""

    n = 0
    size = 1
    lift = [0]


class ConsequenceEngine:
    """Degree-n parts of the ideal generated by ``S`` and closed under the derivations.

    Everything in the ideal of degree n is either a product ``x_j^w * e`` or
    ``e * x_j^w`` with ``e`` of degree n-1, or an instance of a generator at
    monomials using every variable, moved by the derivations and by
    permutations of the variables.  The first kind is quotiented out
    structurally (see ``_Level``); the rest is reduced in the small
    remaining space and closed there under adjacent transpositions and the
    derivation generators.
    """

    def __init__(self, S: Sequence[DiffPolynomial], W: OperatorBasis):
        self.W = W
        self.generators = _prepare_generators(S, W)
        self._levels: Dict[int, object] = {0: _Base()}

    def level(self, n: int) -> _Level:
        hit = self._levels.get(n)
        if hit is not None:
            return hit
        prev = self.level(n - 1)
        moves = _Moves(self.W, n)
        lev = _Level(n, prev, moves)
        D = self.W.dim
        acc = RankAccumulator(n * D * prev.size)
        lev.acc = acc

        def seeds() -> Iterator[Vec]:
            if n > 1:
                pidx = prev.moves.index
                lifts = set(prev.lift)
                for i in range(pidx.size):
                    if i in lifts:
                        continue
                    r = {i: ONE}
                    for b, x in prev.nf(i).items():
                        axpy(r, -x, {prev.lift[b]: ONE})
                    for w in range(D):
                        out: Vec = {}
                        for k, x in r.items():
                            perm, labels = pidx.index_monomial(k)
                            out[moves.index.monomial_index(perm + (n - 1,), labels + (w,))] = x
                        yield lev.vec_to_v(out)
            for v in moves.core_instances(self.generators):
                yield lev.vec_to_v(v)

        ngen = self.W.num_generators
        for seed in seeds():
            stack = [seed]
            while stack:
                v = stack.pop()
                if not v or not acc.insert(v):
                    continue
                lifted = [(lev.v_lift(c), x) for c, x in v.items()]
                for i in range(n - 1):
                    stack.append(lev.vec_to_v({moves.transpose(i, m): x for m, x in lifted}))
                for g in range(ngen):
                    stack.append(lev.vec_to_v(moves.derive(g, dict(lifted))))
        pivots = set(acc.pivots)
        lev.basis = [c for c in range(acc.dim) if c not in pivots]
        lev.position = {c: k for k, c in enumerate(lev.basis)}
        lev.lift = [lev.v_lift(c) for c in lev.basis]
        self._levels[n] = lev
        return lev

    def quotient_dimension(self, n: int) -> int:
        """``dim P_n^W`` minus the dimension of the degree-n consequences."""
        return self.level(n).size

    def dimension(self, n: int) -> int:
        return MultilinearIndex(n, self.W.dim).size - self.quotient_dimension(n)

    def normal_form(self, p: DiffPolynomial, n: int) -> Vec:
        lev = self.level(n)
        return lev.nf_vector(lev.moves.index.vector(p, self.W))

    def contains(self, p: DiffPolynomial, n: int) -> bool:
        return not self.normal_form(p, n)

    def basis_vectors(self, n: int) -> Iterator[Vec]:
        """A basis of the consequences: ``m - lift(nf(m))`` for each non-representative monomial ``m``."""
        lev = self.level(n)
        lifts = set(lev.lift)
        for m in range(lev.moves.index.size):
            if m in lifts:
                continue
            v = {m: ONE}
            for b, x in lev.nf(m).items():
                v[lev.lift[b]] = -x
            yield v

    def quotient_traces(self, n: int) -> Dict[Tuple[int, ...], Scalar]:
        """Trace of one permutation per cycle type on the quotient."""
        lev = self.level(n)
        index = lev.moves.index
        traces = {}
        for mu in partitions(n):
            sigma = representative(mu)
            tr = ZERO
            for k, m in enumerate(lev.lift):
                tr += lev.nf(index.act(sigma, m)).get(k, ZERO)
            traces[mu] = tr
        return traces


def direct_consequence_space(S: Sequence[DiffPolynomial], W: OperatorBasis, n: int,
                             _cache: Optional[Dict[int, EchelonAccumulator]] = None) -> EchelonAccumulator:
    """Independent route: close the degree-n consequences in the full multilinear space.

    Seeds are the degree-(n-1) space multiplied by ``x_n^w`` on either side plus
    the generator instances; the span is closed under adjacent transpositions
    and the derivations.  Practical only for small ``n``.
    """
    cache = {} if _cache is None else _cache
    if n in cache:
        return cache[n]
    gens = _prepare_generators(S, W)
    moves = _Moves(W, n)
    index = moves.index
    D = W.dim
    acc = EchelonAccumulator(index.size)

    def seeds() -> Iterator[Vec]:
        if n > 1:
            prev = direct_consequence_space(gens, W, n - 1, cache)
            pidx = MultilinearIndex(n - 1, D)
            for _, row in prev.rows():
                for w in range(D):
                    right: Vec = {}
                    left: Vec = {}
                    for i, x in row.items():
                        perm, labels = pidx.index_monomial(i)
                        right[index.monomial_index(perm + (n - 1,), labels + (w,))] = x
                        left[index.monomial_index((n - 1,) + perm, (w,) + labels)] = x
                    yield right
                    yield left
        yield from moves.core_instances(gens)

    for seed in seeds():
        stack = [seed]
        while stack:
            v = stack.pop()
            if not v or not acc.insert(v):
                continue
            for i in range(n - 1):
                stack.append({moves.transpose(i, m): x for m, x in v.items()})
            for g in range(W.num_generators):
                stack.append(moves.derive(g, v))
    cache[n] = acc
    return acc


def consequence_space(S: Sequence[DiffPolynomial], W: OperatorBasis, n: int) -> Tuple[int, List[Vec]]:
    """Dimension and a basis (one vector per non-representative monomial) of the degree-n consequences."""
    engine = ConsequenceEngine(S, W)
    return engine.dimension(n), list(engine.basis_vectors(n))


def in_ideal(p: DiffPolynomial, S: Sequence[DiffPolynomial], W: OperatorBasis, n: int,
             engine: Optional[ConsequenceEngine] = None) -> bool:
    if not p.is_multilinear() or (p and (p.degree() != n or len(p.variables()) != n)):
        raise ValueError(f"expected a multilinear polynomial of degree {n}")
    p = relabel(p, {v: i for i, v in enumerate(p.variables())})
    engine = engine or ConsequenceEngine(S, W)
    return engine.contains(p, n)


def verify_generating_set(
    A: FDAlgebra,
    W: OperatorBasis,
    S: Sequence[DiffPolynomial],
    n: int,
    closed_form: Optional[int] = None,
    plan: Optional[EvaluationPlan] = None,
    engine: Optional[ConsequenceEngine] = None,
) -> SandwichVerdict:
    """Compare the evaluation rank with the dimension left over by the consequences of ``S``."""
    plan = plan or EvaluationPlan()
    for g in S:
        witness = find_nonvanishing(A, W, g, plan)
        if witness is not None:
            raise RefutationError(format_polynomial(g, W.gen_names), describe_point(A, witness))
    report = codimension(A, W, n, plan)
    engine = engine or ConsequenceEngine(S, W)
    upper = engine.quotient_dimension(n)
    if report.c_n > upper:
        raise ConsistencyError(f"lower bound {report.c_n} exceeds upper bound {upper} at n={n}")
    notes = [LABEL_NOTE]
    if plan.note:
        notes.append(plan.note)
    return SandwichVerdict(
        n=n,
        lower=report.c_n,
        upper=upper,
        equal=report.c_n == upper,
        closed_form=closed_form,
        mode=report.mode,
        lower_exact=report.exact,
        generators_sha256=generators_sha256(S, W.gen_names),
        notes=notes,
    )


# -- cocharacters ---------------------------------------------------------------


def _permute_tuple_index(idx: int, sigma: Sequence[int], n: int, d: int) -> int:
    """Function-space coordinate of ``(j o sigma, c)`` for ``idx = (j, c)``."""
    t, c = divmod(idx, d)
    digits = [0] * n
    for pos in range(n - 1, -1, -1):
        t, digits[pos] = divmod(t, d)
    out = 0
    for v in range(n):
        out = out * d + digits[sigma[v]]
    return out * d + c


def span_traces(span: _Span) -> Dict[Tuple[int, ...], Scalar]:
    """Trace of one permutation per cycle type on the evaluation span."""
    n = span.n
    traces = {}
    for mu in partitions(n):
        sigma = representative(mu)
        if span.route == "functions":
            tr = permutation_trace(span.acc, lambda p: _permute_tuple_index(p, sigma, n, span.d))
        else:
            tr = permutation_trace(span.acc, lambda p: span.index.act(sigma, p))
        traces[mu] = tr
    return traces


def cocharacter(A: FDAlgebra, W: OperatorBasis, n: int, plan: Optional[EvaluationPlan] = None) -> MultiplicityMap:
    """Multiplicities of the irreducible S_n-characters in the quotient of degree n."""
    plan = plan or EvaluationPlan()
    span = evaluation_span(A, W, n, plan)
    if not span.exact:
        raise PlanError("cocharacters need an exact span; use the full or canonical mode")
    mults = decompose(span_traces(span), n)
    if degree_check(mults) != span.acc.rank:
        raise ConsistencyError(f"sum of m_lambda f_lambda != c_{n}")
    return mults


def quotient_cocharacter(S: Sequence[DiffPolynomial], W: OperatorBasis, n: int,
                         engine: Optional[ConsequenceEngine] = None) -> MultiplicityMap:
    """Cocharacter of the multilinear space modulo the consequences of ``S``."""
    engine = engine or ConsequenceEngine(S, W)
    return decompose(engine.quotient_traces(n), n)


def quotient_cocharacter_direct(S: Sequence[DiffPolynomial], W: OperatorBasis, n: int) -> MultiplicityMap:
    """Same as :func:`quotient_cocharacter` via a reduced kernel and explicit quotient traces."""
    acc = direct_consequence_space(S, W, n).to_reduced()
    index = MultilinearIndex(n, W.dim)
    pivots = set(acc.pivots)
    quotient = [j for j in range(index.size) if j not in pivots]
    kernel = [row for _, row in acc.rows()]
    traces = {}
    for mu in partitions(n):
        sigma = representative(mu)

        def action(e, sigma=sigma):
            (j, x), = e
            return {index.act(sigma, j): x}

        traces[mu] = trace_on_quotient(kernel, action, quotient, index.size)
    return decompose(traces, n)
