"""Finite-dimensional algebras acted on by derivations.

An operator on an algebra of dimension ``d`` is stored column-wise as
``{j: image of basis vector j}``, each image a sparse coordinate dict.
"""

from __future__ import annotations

import json
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .exactla import ONE, ZERO, RankAccumulator, Scalar, SpanCoordinates, Vec, axpy, format_scalar, nullspace, scalar

Op = Dict[int, Vec]


class AlgebraError(ValueError):
    """An algebra definition fails one of its structural checks."""


class AssociativityError(AlgebraError):
    def __init__(self, i: int, j: int, k: int):
        super().__init__(f"(b{i} b{j}) b{k} != b{i} (b{j} b{k})")
        self.indices = (i, j, k)


class LeibnizError(AlgebraError):
    def __init__(self, name: str, i: int, j: int):
        super().__init__(f"derivation {name!r} violates D(b{i} b{j}) = D(b{i}) b{j} + b{i} D(b{j})")
        self.derivation = name
        self.indices = (i, j)


class BracketError(AlgebraError):
    def __init__(self, a: str, b: str):
        super().__init__(f"[{a}, {b}] does not match the declared bracket table")
        self.pair = (a, b)


class UnitError(AlgebraError):
    def __init__(self, i: int):
        super().__init__(f"declared unit does not act as identity on b{i}")
        self.index = i


# -- operators ---------------------------------------------------------------


def op_apply(op: Op, v: Mapping[int, Scalar]) -> Vec:
    out: Vec = {}
    for j, x in v.items():
        col = op.get(j)
        if col:
            axpy(out, x, col)
    return out


def op_compose(a: Op, b: Op) -> Op:
    """``a o b``: apply ``b`` first."""
    out: Op = {}
    for j, col in b.items():
        img = op_apply(a, col)
        if img:
            out[j] = img
    return out


def op_identity(dim: int) -> Op:
    return {j: {j: ONE} for j in range(dim)}


def op_combine(terms: Iterable[Tuple[Scalar, Op]]) -> Op:
    out: Op = {}
    for c, op in terms:
        if not c:
            continue
        for j, col in op.items():
            acc = out.setdefault(j, {})
            axpy(acc, c, col)
            if not acc:
                del out[j]
    return out


def op_bracket(a: Op, b: Op) -> Op:
    return op_combine([(ONE, op_compose(a, b)), (-ONE, op_compose(b, a))])


def op_flat(op: Op, dim: int) -> Vec:
    """Row-major flattening: entry ``k*dim + j`` is the coefficient of b_k in op(b_j)."""
    out: Vec = {}
    for j, col in op.items():
        for k, x in col.items():
            out[k * dim + j] = x
    return out


def op_unflat(v: Mapping[int, Scalar], dim: int) -> Op:
    out: Op = {}
    for idx, x in v.items():
        if x:
            k, j = divmod(idx, dim)
            out.setdefault(j, {})[k] = scalar(x)
    return out


def op_from_dense(matrix: Sequence[Sequence]) -> Op:
    """``matrix[i][j]`` is the coefficient of b_i in the image of b_j."""
    out: Op = {}
    for i, row in enumerate(matrix):
        for j, x in enumerate(row):
            x = scalar(x)
            if x:
                out.setdefault(j, {})[i] = x
    return out


def op_to_dense(op: Op, dim: int) -> List[List[Scalar]]:
    m = [[ZERO] * dim for _ in range(dim)]
    for j, col in op.items():
        for i, x in col.items():
            m[i][j] = x
    return m


# -- algebras ----------------------------------------------------------------


class FDAlgebra:
    """Associative algebra given by sparse structure constants, plus derivations.

    ``products[(i, j)]`` holds the coordinates of ``b_i b_j``; missing pairs
    multiply to zero.  ``brackets[(a, b)]``, when given, lists the coefficients
    of ``[D_a, D_b]`` on the derivation list.
    """

    def __init__(
        self,
        dim: int,
        basis_names: Sequence[str],
        products: Mapping[Tuple[int, int], Mapping[int, object]],
        unit: Optional[Mapping[int, object]] = None,
        derivations: Sequence[Tuple[str, Op]] = (),
        brackets: Optional[Mapping[Tuple[int, int], Sequence]] = None,
        name: str = "",
    ):
        if dim <= 0:
            raise AlgebraError("dimension must be positive")
        if len(basis_names) != dim:
            raise AlgebraError("need one basis name per dimension")
        self.dim = dim
        self.basis_names = list(basis_names)
        self.name = name
        self._products: Dict[Tuple[int, int], Vec] = {}
        for (i, j), v in products.items():
            if not (0 <= i < dim and 0 <= j < dim):
                raise AlgebraError(f"product index ({i}, {j}) out of range")
            clean = {k: scalar(x) for k, x in v.items() if scalar(x)}
            if any(not 0 <= k < dim for k in clean):
                raise AlgebraError(f"product b{i} b{j} has an out-of-range coordinate")
            if clean:
                self._products[(i, j)] = clean
        self.unit = None if unit is None else {k: scalar(x) for k, x in unit.items() if scalar(x)}
        self.derivations: List[Tuple[str, Op]] = [(n, _clean_op(op, dim)) for n, op in derivations]
        self.brackets = None if brackets is None else {k: [scalar(x) for x in v] for k, v in brackets.items()}

    def mul_basis(self, i: int, j: int) -> Vec:
        return self._products.get((i, j), _EMPTY)

    def mul(self, u: Mapping[int, Scalar], v: Mapping[int, Scalar]) -> Vec:
        out: Vec = {}
        for i, a in u.items():
            for j, b in v.items():
                p = self.mul_basis(i, j)
                if p:
                    axpy(out, a * b, p)
        return out

    def basis_vector(self, i: int) -> Vec:
        return {i: ONE}

    @property
    def derivation_names(self) -> List[str]:
        return [n for n, _ in self.derivations]

    def with_derivations(self, derivations: Sequence[Tuple[str, Op]], brackets=None, name: str = "") -> "FDAlgebra":
        return FDAlgebra(self.dim, self.basis_names, self._products, self.unit, derivations, brackets, name or self.name)

    def __repr__(self) -> str:
        ders = ",".join(self.derivation_names)
        return f"FDAlgebra({self.name or '?'}, dim={self.dim}, derivations=[{ders}])"


_EMPTY: Vec = {}


def _clean_op(op: Op, dim: int) -> Op:
    out: Op = {}
    for j, col in op.items():
        if not 0 <= j < dim:
            raise AlgebraError("operator column out of range")
        c = {i: scalar(x) for i, x in col.items() if scalar(x)}
        if any(not 0 <= i < dim for i in c):
            raise AlgebraError("operator row out of range")
        if c:
            out[j] = c
    return out


def validate_algebra(A: FDAlgebra) -> FDAlgebra:
    """Check associativity, the Leibniz rule, brackets and unit; return ``A``."""
    d = A.dim
    for i in range(d):
        for j in range(d):
            ij = A.mul_basis(i, j)
            for k in range(d):
                left = A.mul(ij, {k: ONE})
                right = A.mul({i: ONE}, A.mul_basis(j, k))
                if left != right:
                    raise AssociativityError(i, j, k)
    for name, D in A.derivations:
        check_leibniz(A, D, name)
    if A.brackets is not None:
        ops = [D for _, D in A.derivations]
        names = A.derivation_names
        for (a, b), coeffs in A.brackets.items():
            declared = op_combine(zip(coeffs, ops))
            if op_flat(op_bracket(ops[a], ops[b]), d) != op_flat(declared, d):
                raise BracketError(names[a], names[b])
    if A.unit is not None:
        for i in range(d):
            e = {i: ONE}
            if A.mul(A.unit, e) != e or A.mul(e, A.unit) != e:
                raise UnitError(i)
    return A


def check_leibniz(A: FDAlgebra, D: Op, name: str = "D") -> None:
    for i in range(A.dim):
        Di = D.get(i, _EMPTY)
        for j in range(A.dim):
            Dj = D.get(j, _EMPTY)
            lhs = op_apply(D, A.mul_basis(i, j))
            rhs = A.mul(Di, {j: ONE})
            axpy(rhs, ONE, A.mul({i: ONE}, Dj))
            if lhs != rhs:
                raise LeibnizError(name, i, j)


def is_derivation(A: FDAlgebra, D: Op) -> bool:
    try:
        check_leibniz(A, D)
    except LeibnizError:
        return False
    return True


def inner_derivation(A: FDAlgebra, a: Mapping[int, object]) -> Op:
    """Matrix of ``b -> ab - ba``."""
    a = {k: scalar(x) for k, x in a.items() if scalar(x)}
    if any(not 0 <= k < A.dim for k in a):
        raise ValueError("coordinate vector does not match the algebra dimension")
    out: Op = {}
    for j in range(A.dim):
        e = {j: ONE}
        img = A.mul(a, e)
        axpy(img, -ONE, A.mul(e, a))
        if img:
            out[j] = img
    return out


def derivation_space(A: FDAlgebra) -> Tuple[int, List[Op]]:
    """All derivations of ``A``: solve the Leibniz equations over every basis pair.

    Unknown ``k*dim + s`` is the coefficient of b_k in D(b_s).
    """
    d = A.dim
    equations = []
    for i in range(d):
        for j in range(d):
            rows: Dict[int, Vec] = {}
            for s, c in A.mul_basis(i, j).items():
                for r in range(d):
                    rows.setdefault(r, {})
                    axpy(rows[r], c, {r * d + s: ONE})
            for k in range(d):
                for r, c in A.mul_basis(k, j).items():
                    axpy(rows.setdefault(r, {}), -c, {k * d + i: ONE})
                for r, c in A.mul_basis(i, k).items():
                    axpy(rows.setdefault(r, {}), -c, {k * d + j: ONE})
            equations.extend(v for v in rows.values() if v)
    basis = [op_unflat(v, d) for v in nullspace(equations, d * d)]
    return len(basis), basis


def span_dimension(ops: Iterable[Op], dim: int) -> int:
    acc = RankAccumulator(dim * dim)
    for op in ops:
        acc.insert(op_flat(op, dim))
    return acc.rank


def derived_algebra(ops: Sequence[Op], dim: int) -> List[Op]:
    """A basis of the span of all brackets ``[D_a, D_b]``."""
    acc = RankAccumulator(dim * dim)
    out = []
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            br = op_bracket(ops[a], ops[b])
            if acc.insert(op_flat(br, dim)):
                out.append(br)
    return out


def is_metabelian(ops: Sequence[Op], dim: int) -> bool:
    """The derived algebra of ``span(ops)`` is abelian."""
    der = derived_algebra(ops, dim)
    return all(not op_bracket(a, b) for a in der for b in der)


def in_span(ops: Sequence[Op], target: Op, dim: int) -> bool:
    acc = RankAccumulator(dim * dim)
    for op in ops:
        acc.insert(op_flat(op, dim))
    return acc.contains(op_flat(target, dim))


def change_basis(A: FDAlgebra, P: Sequence[Sequence]) -> FDAlgebra:
    """Rewrite ``A`` in the basis ``b'_j = sum_k P[k][j] b_k`` (``P`` invertible)."""
    d = A.dim
    cols = [{k: scalar(P[k][j]) for k in range(d) if scalar(P[k][j])} for j in range(d)]
    coords = SpanCoordinates(cols, d)

    def to_new(v: Mapping[int, Scalar]) -> Vec:
        c = coords.coordinates(v)
        if c is None:
            raise ValueError("change of basis matrix is singular")
        return {i: x for i, x in enumerate(c) if x}

    products = {}
    for i in range(d):
        for j in range(d):
            v = to_new(A.mul(cols[i], cols[j]))
            if v:
                products[(i, j)] = v
    ders = []
    for name, D in A.derivations:
        ders.append((name, {j: img for j in range(d) if (img := to_new(op_apply(D, cols[j])))}))
    unit = to_new(A.unit) if A.unit is not None else None
    names = [f"b'{i}" for i in range(d)]
    return FDAlgebra(d, names, products, unit, ders, A.brackets, A.name + "'")


# -- the acting operator algebra ---------------------------------------------


class OperatorBasis:
    """Basis of the operator algebra W spanned by words in the derivations.

    Basis element 0 is the identity.  ``words[k]`` is the generator word whose
    composite operator is basis element ``k``; the word ``(a, b)`` means
    ``D_a o D_b``.  ``left_mult_tables[g][u][w]`` is the coefficient of basis
    element ``u`` in ``D_g o W_w``.
    """

    def __init__(self, dim_algebra: int, gen_names: Sequence[str], generators: Sequence[Op],
                 words: Sequence[Tuple[int, ...]], ops: Sequence[Op], left_mult_tables):
        self.dim_algebra = dim_algebra
        self.gen_names = tuple(gen_names)
        self.generators = list(generators)
        self.words = [tuple(w) for w in words]
        self.ops = list(ops)
        self.left_mult_tables = left_mult_tables
        self.word_index = {w: k for k, w in enumerate(self.words)}
        self.labels = [self.word_label(w) for w in self.words]
        self._reduced: Dict[Tuple[int, ...], Dict[int, Scalar]] = {}
        self._word_ops: Dict[Tuple[int, ...], Op] = {}

    @property
    def dim(self) -> int:
        return len(self.words)

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    def word_label(self, word: Sequence[int]) -> str:
        if not word:
            return "1"
        return "∘".join(self.gen_names[g] for g in word)

    def reduce_word(self, word: Sequence[int]) -> Dict[int, Scalar]:
        """Coordinates of the operator of ``word`` in the W basis."""
        word = tuple(word)
        hit = self._reduced.get(word)
        if hit is not None:
            return hit
        if word in self.word_index:
            vec = {self.word_index[word]: ONE}
        else:
            inner = self.reduce_word(word[1:])
            table = self.left_mult_tables[word[0]]
            vec = {}
            for w, c in inner.items():
                for u in range(self.dim):
                    t = table[u][w]
                    if t:
                        vec[u] = vec.get(u, ZERO) + c * t
            vec = {u: x for u, x in vec.items() if x}
        self._reduced[word] = vec
        return vec

    def word_operator(self, word: Sequence[int]) -> Op:
        word = tuple(word)
        hit = self._word_ops.get(word)
        if hit is None:
            hit = op_combine((c, self.ops[w]) for w, c in self.reduce_word(word).items())
            self._word_ops[word] = hit
        return hit

    def compose(self, g: int, w: int) -> Dict[int, Scalar]:
        """``D_g o W_w`` in W coordinates."""
        table = self.left_mult_tables[g]
        return {u: table[u][w] for u in range(self.dim) if table[u][w]}

    def generator_index(self, name: str) -> int:
        try:
            return self.gen_names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}; known: {', '.join(self.gen_names) or 'none'}") from None

    def __repr__(self) -> str:
        return f"OperatorBasis(dim_W={self.dim}, basis=[{', '.join(self.labels)}])"


def operator_closure(A: FDAlgebra) -> OperatorBasis:
    """Close ``{identity}`` under left composition with the derivations of ``A``.

    Candidate words are taken level by level (length, then lexicographic) and
    kept greedily when independent of the basis found so far.
    """
    d = A.dim
    gens = [D for _, D in A.derivations]
    names = A.derivation_names
    acc = RankAccumulator(d * d)
    words: List[Tuple[int, ...]] = [()]
    ops: List[Op] = [op_identity(d)]
    acc.insert(op_flat(ops[0], d))
    frontier = [0]
    while frontier:
        cands = []
        for k in frontier:
            for g in range(len(gens)):
                cands.append(((g,) + words[k], k, g))
        cands.sort(key=lambda c: c[0])
        frontier = []
        for word, k, g in cands:
            op = op_compose(gens[g], ops[k])
            if acc.insert(op_flat(op, d)):
                words.append(word)
                ops.append(op)
                frontier.append(len(ops) - 1)
    coords = SpanCoordinates([op_flat(op, d) for op in ops], d * d)
    tables = []
    for g in range(len(gens)):
        table = [[ZERO] * len(ops) for _ in range(len(ops))]
        for w, op in enumerate(ops):
            c = coords.coordinates(op_flat(op_compose(gens[g], op), d))
            if c is None:
                raise AssertionError("operator algebra is not closed")
            for u, x in enumerate(c):
                table[u][w] = x
        tables.append(table)
    return OperatorBasis(d, names, gens, words, ops, tables)


def check_closure(W: OperatorBasis) -> bool:
    """Recompute every ``D_g o W_w`` and compare with the stored tables."""
    d = W.dim_algebra
    for g, D in enumerate(W.generators):
        for w, op in enumerate(W.ops):
            expected = op_combine((c, W.ops[u]) for u, c in W.compose(g, w).items())
            if op_flat(op_compose(D, op), d) != op_flat(expected, d):
                return False
    return True


# -- JSON --------------------------------------------------------------------


def algebra_to_json(A: FDAlgebra) -> dict:
    d = A.dim
    mult = []
    for i in range(d):
        row = []
        for j in range(d):
            p = A.mul_basis(i, j)
            row.append([format_scalar(p.get(k, ZERO)) for k in range(d)])
        mult.append(row)
    out = {
        "name": A.name,
        "dim": d,
        "basis": list(A.basis_names),
        "unit": None if A.unit is None else [format_scalar(A.unit.get(k, ZERO)) for k in range(d)],
        "mult": mult,
        "derivations": [
            {"name": n, "matrix": [[format_scalar(x) for x in r] for r in op_to_dense(D, d)]}
            for n, D in A.derivations
        ],
    }
    if A.brackets is not None:
        t = len(A.derivations)
        out["brackets"] = [
            [[format_scalar(x) for x in A.brackets.get((a, b), [ZERO] * t)] for b in range(t)] for a in range(t)
        ]
    return out


def algebra_from_json(obj) -> FDAlgebra:
    """Build an algebra from the JSON layout produced by :func:`algebra_to_json`."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    d = int(obj["dim"])
    basis = obj.get("basis") or [f"b{i}" for i in range(d)]
    mult = obj["mult"]
    if len(mult) != d or any(len(r) != d for r in mult):
        raise AlgebraError("mult must be a dim x dim table of coordinate lists")
    products = {}
    for i in range(d):
        for j in range(d):
            coords = mult[i][j]
            if len(coords) != d:
                raise AlgebraError(f"mult[{i}][{j}] must have {d} coordinates")
            v = {k: scalar(x) for k, x in enumerate(coords) if scalar(x)}
            if v:
                products[(i, j)] = v
    unit = obj.get("unit")
    unit = None if unit is None else {k: scalar(x) for k, x in enumerate(unit) if scalar(x)}
    ders = [(D["name"], op_from_dense(D["matrix"])) for D in obj.get("derivations", [])]
    brackets = None
    if obj.get("brackets") is not None:
        t = len(ders)
        brackets = {(a, b): obj["brackets"][a][b] for a in range(t) for b in range(t)}
    return FDAlgebra(d, basis, products, unit, ders, brackets, obj.get("name", ""))
