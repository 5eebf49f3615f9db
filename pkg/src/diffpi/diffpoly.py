"""Noncommutative polynomials in variables carrying derivation labels.

A monomial is a tuple of factors ``(var, word)``.  ``word`` is a tuple of
generator indices read as an operator composite: ``(a, b)`` is ``D_a o D_b``,
so ``x^{ab}`` means ``D_a(D_b(x))``.  Words are kept unreduced until
:func:`normalize` rewrites them in the basis of an :class:`OperatorBasis`;
this keeps relations such as ``x^{eps eps} - x^{eps}`` nonzero as free
polynomials, so their substitution instances are not lost.
"""

from __future__ import annotations

import itertools
import math
import re
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .exactla import ONE, ZERO, Scalar, Vec, axpy, format_scalar, scalar
from .fdalg import FDAlgebra, OperatorBasis, op_apply

Word = Tuple[int, ...]
Factor = Tuple[int, Word]
Monomial = Tuple[Factor, ...]


def monomial_key(m: Monomial):
    """Global monomial order: degree, then variable sequence, then labels."""
    return (len(m), tuple(v for v, _ in m), tuple((len(w), w) for _, w in m))


class DiffPolynomial:
    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, object]] = None):
        clean: Dict[Monomial, Scalar] = {}
        if terms:
            for m, c in terms.items():
                c = scalar(c)
                if not c:
                    continue
                if not m:
                    raise ValueError("constant terms are not allowed")
                m = tuple((int(v), tuple(w)) for v, w in m)
                clean[m] = clean.get(m, ZERO) + c
                if not clean[m]:
                    del clean[m]
        self.terms = clean

    @classmethod
    def _trusted(cls, terms: Dict[Monomial, Scalar]) -> "DiffPolynomial":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    @classmethod
    def var(cls, v: int, word: Sequence[int] = ()) -> "DiffPolynomial":
        return cls._trusted({((v, tuple(word)),): ONE})

    @classmethod
    def monomial(cls, factors: Sequence[Tuple[int, Sequence[int]]], coeff=1) -> "DiffPolynomial":
        return cls({tuple((v, tuple(w)) for v, w in factors): coeff})

    @classmethod
    def zero(cls) -> "DiffPolynomial":
        return cls._trusted({})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __iter__(self) -> Iterator[Tuple[Monomial, Scalar]]:
        for m in sorted(self.terms, key=monomial_key):
            yield m, self.terms[m]

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPolynomial):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        out = dict(self.terms)
        axpy(out, ONE, other.terms)
        return DiffPolynomial._trusted(out)

    def __sub__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        out = dict(self.terms)
        axpy(out, -ONE, other.terms)
        return DiffPolynomial._trusted(out)

    def __neg__(self) -> "DiffPolynomial":
        return DiffPolynomial._trusted({m: -c for m, c in self.terms.items()})

    def __mul__(self, other) -> "DiffPolynomial":
        if isinstance(other, DiffPolynomial):
            out: Dict[Monomial, Scalar] = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = m1 + m2
                    x = out.get(m, ZERO) + c1 * c2
                    if x:
                        out[m] = x
                    else:
                        out.pop(m, None)
            return DiffPolynomial._trusted(out)
        c = scalar(other)
        if not c:
            return DiffPolynomial.zero()
        return DiffPolynomial._trusted({m: c * x for m, x in self.terms.items()})

    def __rmul__(self, other) -> "DiffPolynomial":
        return self * other

    def variables(self) -> List[int]:
        return sorted({v for m in self.terms for v, _ in m})

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def is_multilinear(self) -> bool:
        if not self.terms:
            return True
        vs = None
        for m in self.terms:
            seq = sorted(v for v, _ in m)
            if len(set(seq)) != len(seq) or (vs is not None and seq != vs):
                return False
            vs = seq
        return True

    def __repr__(self) -> str:
        return f"DiffPolynomial({format_polynomial(self)})"


def commutator(*args: DiffPolynomial) -> DiffPolynomial:
    """Left-normed commutator ``[a, b, c] = [[a, b], c]``."""
    if len(args) < 2:
        raise ValueError("a commutator needs at least two entries")
    acc = args[0]
    for b in args[1:]:
        acc = acc * b - b * acc
    return acc


# -- derivation action ---------------------------------------------------------


def apply_word(word: Sequence[int], p: DiffPolynomial, W: Optional[OperatorBasis] = None) -> DiffPolynomial:
    """Apply the operator of ``word`` (innermost letter last) by repeated Leibniz."""
    for g in reversed(tuple(word)):
        p = apply_generator(g, p, W)
    return p


def apply_generator(g: int, p: DiffPolynomial, W: Optional[OperatorBasis] = None) -> DiffPolynomial:
    """Leibniz action of generator ``g`` on ``p``.

    Without ``W`` the generator is prepended to each label word as a free
    symbol; with ``W`` the result is rewritten in W's basis.
    """
    if W is not None and not 0 <= g < W.num_generators:
        raise KeyError(f"unknown generator index {g}")
    if g < 0:
        raise KeyError(f"unknown generator index {g}")
    out: Dict[Monomial, Scalar] = {}
    for m, c in p.terms.items():
        for i, (v, w) in enumerate(m):
            nm = m[:i] + ((v, (g,) + w),) + m[i + 1:]
            x = out.get(nm, ZERO) + c
            if x:
                out[nm] = x
            else:
                out.pop(nm, None)
    q = DiffPolynomial._trusted(out)
    return normalize(q, W) if W is not None else q


def normalize(p: DiffPolynomial, W: OperatorBasis) -> DiffPolynomial:
    """Rewrite every label word as a combination of W basis words."""
    out: Dict[Monomial, Scalar] = {}
    words = W.words
    for m, c in p.terms.items():
        choices = []
        for v, w in m:
            red = W.reduce_word(w)
            if not red:
                choices = None
                break
            choices.append([((v, words[u]), x) for u, x in red.items()])
        if choices is None:
            continue
        for combo in itertools.product(*choices):
            nm = tuple(f for f, _ in combo)
            x = c
            for _, y in combo:
                x = x * y
            x = out.get(nm, ZERO) + x
            if x:
                out[nm] = x
            else:
                out.pop(nm, None)
    return DiffPolynomial._trusted(out)


def substitute(
    g: DiffPolynomial,
    assignment: Union[Sequence[DiffPolynomial], Mapping[int, DiffPolynomial]],
    W: Optional[OperatorBasis] = None,
) -> DiffPolynomial:
    """Replace each variable ``v`` of ``g`` by ``assignment[v]``.

    A labeled occurrence ``x^w`` becomes the operator ``w`` applied to the
    assigned polynomial (Leibniz expansion for products).
    """
    if not isinstance(assignment, Mapping):
        assignment = dict(enumerate(assignment))
    missing = [v for v in g.variables() if v not in assignment]
    if missing:
        raise KeyError(f"no assignment for variables {missing}")
    cache: Dict[Factor, DiffPolynomial] = {}
    total = DiffPolynomial.zero()
    for m, c in g.terms.items():
        prod = None
        for f in m:
            img = cache.get(f)
            if img is None:
                img = apply_word(f[1], assignment[f[0]], W)
                cache[f] = img
            prod = img if prod is None else prod * img
            if not prod:
                break
        if prod:
            total = total + prod * c
    return normalize(total, W) if W is not None else total


def relabel(p: DiffPolynomial, mapping: Mapping[int, int]) -> DiffPolynomial:
    return DiffPolynomial({tuple((mapping[v], w) for v, w in m): c for m, c in p.terms.items()})


# -- evaluation ----------------------------------------------------------------


def evaluate(
    p: DiffPolynomial,
    A: FDAlgebra,
    W: OperatorBasis,
    assignment: Mapping[int, Mapping[int, Scalar]],
) -> Vec:
    """Value of ``p`` when variable ``v`` takes the coordinate vector ``assignment[v]``."""
    missing = [v for v in p.variables() if v not in assignment]
    if missing:
        raise KeyError(f"no assignment for variables {missing}")
    images: Dict[Factor, Vec] = {}
    out: Vec = {}
    for m, c in p.terms.items():
        val = None
        for f in m:
            img = images.get(f)
            if img is None:
                img = op_apply(W.word_operator(f[1]), {k: scalar(x) for k, x in assignment[f[0]].items()})
                images[f] = img
            val = img if val is None else A.mul(val, img)
            if not val:
                break
        if val:
            axpy(out, c, val)
    return out


# -- multilinear structure -----------------------------------------------------


def multihomogeneous_components(p: DiffPolynomial) -> List[DiffPolynomial]:
    groups: Dict[Tuple, Dict[Monomial, Scalar]] = {}
    for m, c in p.terms.items():
        key = tuple(sorted(v for v, _ in m))
        groups.setdefault(key, {})[m] = c
    return [DiffPolynomial._trusted(groups[k]) for k in sorted(groups, key=lambda k: (len(k), k))]


def multilinearize(p: DiffPolynomial) -> List[DiffPolynomial]:
    """Full polarization of every multihomogeneous component.

    A variable of degree ``k`` is replaced by ``k`` fresh variables and all
    bijective assignments of its occurrences are summed.  Components that are
    already multilinear are returned unchanged.
    """
    out = []
    for comp in multihomogeneous_components(p):
        if comp.is_multilinear():
            out.append(comp)
            continue
        first = next(iter(comp.terms))
        degs: Dict[int, int] = {}
        for v, _ in first:
            degs[v] = degs.get(v, 0) + 1
        fresh: Dict[int, List[int]] = {}
        nxt = 0
        for v in sorted(degs):
            fresh[v] = list(range(nxt, nxt + degs[v]))
            nxt += degs[v]
        terms: Dict[Monomial, Scalar] = {}
        for m, c in comp.terms.items():
            slots = {v: [i for i, (u, _) in enumerate(m) if u == v] for v in degs}
            per_var = [
                [dict(zip(slots[v], perm)) for perm in itertools.permutations(fresh[v])] for v in sorted(degs)
            ]
            for choice in itertools.product(*per_var):
                pos: Dict[int, int] = {}
                for d in choice:
                    pos.update(d)
                nm = tuple((pos[i], w) for i, (_, w) in enumerate(m))
                x = terms.get(nm, ZERO) + c
                if x:
                    terms[nm] = x
                else:
                    terms.pop(nm, None)
        out.append(DiffPolynomial._trusted(terms))
    return out


def _perm_rank(perm: Sequence[int]) -> int:
    """Lexicographic rank of a permutation of ``0..n-1``."""
    n = len(perm)
    rank = 0
    remaining = list(range(n))
    for i, x in enumerate(perm):
        j = remaining.index(x)
        rank += j * math.factorial(n - 1 - i)
        remaining.pop(j)
    return rank


def _perm_unrank(rank: int, n: int) -> Tuple[int, ...]:
    remaining = list(range(n))
    out = []
    for i in range(n):
        f = math.factorial(n - 1 - i)
        j, rank = divmod(rank, f)
        out.append(remaining.pop(j))
    return tuple(out)


class MultilinearIndex:
    """Bijection between ``range(n! * dim_W**n)`` and multilinear monomials.

    Index = permutation rank * dim_W**n + label word read in base ``dim_W``
    (first position most significant).  The permutation lists the variable
    at each position, so index 0 is ``x_1 x_2 ... x_n`` with every label 1.
    """

    def __init__(self, n: int, dim_W: int):
        if n < 1 or dim_W < 1:
            raise ValueError("need n >= 1 and dim_W >= 1")
        self.n = n
        self.dim_W = dim_W
        self.label_count = dim_W ** n
        self.size = math.factorial(n) * self.label_count

    def __len__(self) -> int:
        return self.size

    def monomial_index(self, perm: Sequence[int], labels: Sequence[int]) -> int:
        if sorted(perm) != list(range(self.n)) or len(labels) != self.n:
            raise ValueError("not a multilinear monomial of this degree")
        code = 0
        for w in labels:
            if not 0 <= w < self.dim_W:
                raise ValueError(f"label {w} out of range")
            code = code * self.dim_W + w
        return _perm_rank(perm) * self.label_count + code

    def index_monomial(self, idx: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        if not 0 <= idx < self.size:
            raise IndexError(f"index {idx} out of range for size {self.size}")
        r, code = divmod(idx, self.label_count)
        labels = []
        for _ in range(self.n):
            code, w = divmod(code, self.dim_W)
            labels.append(w)
        return _perm_unrank(r, self.n), tuple(reversed(labels))

    def monomial(self, idx: int, W: OperatorBasis) -> Monomial:
        perm, labels = self.index_monomial(idx)
        return tuple((v, W.words[w]) for v, w in zip(perm, labels))

    def act(self, sigma: Sequence[int], idx: int) -> int:
        """Index of ``sigma`` applied to the monomial: ``x_i^w -> x_{sigma(i)}^w``."""
        perm, labels = self.index_monomial(idx)
        return self.monomial_index([sigma[v] for v in perm], labels)

    def vector(self, p: DiffPolynomial, W: OperatorBasis) -> Vec:
        """Coordinates of a multilinear polynomial in ``x_0..x_{n-1}`` (labels reduced in W)."""
        p = normalize(p, W)
        out: Vec = {}
        for m, c in p.terms.items():
            if len(m) != self.n:
                raise ValueError(f"term of degree {len(m)} in a degree-{self.n} space")
            idx = self.monomial_index([v for v, _ in m], [W.word_index[w] for _, w in m])
            x = out.get(idx, ZERO) + c
            if x:
                out[idx] = x
            else:
                out.pop(idx, None)
        return out

    def polynomial(self, vec: Mapping[int, Scalar], W: OperatorBasis) -> DiffPolynomial:
        return DiffPolynomial({self.monomial(i, W): c for i, c in vec.items()})


# -- text syntax ---------------------------------------------------------------

GREEK_ALIASES = {"ε": "eps", "δ": "delta"}
_SUPERSCRIPT = {"²": 2, "³": 3}


class ParseError(ValueError):
    pass


class _Parser:
    def __init__(self, text: str, gen_names: Sequence[str], numbered: bool, names: Dict[str, int]):
        self.s = text
        self.i = 0
        self.gen_names = list(gen_names)
        self.numbered = numbered
        self.names = names

    def error(self, msg: str):
        raise ParseError(f"{msg} at position {self.i} in {self.s!r}")

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.ws()
        return self.s[self.i] if self.i < len(self.s) else ""

    def eat(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.i += 1

    def parse(self) -> DiffPolynomial:
        if self.s.strip() == "0":
            return DiffPolynomial.zero()
        p = self.expr()
        if self.peek():
            self.error("unexpected text")
        return p

    def expr(self) -> DiffPolynomial:
        sign = ONE
        if self.peek() in ("+", "-"):
            sign = ONE if self.s[self.i] == "+" else -ONE
            self.i += 1
        total = self.term() * sign
        while self.peek() in ("+", "-"):
            sign = ONE if self.s[self.i] == "+" else -ONE
            self.i += 1
            total = total + self.term() * sign
        return total

    def term(self) -> DiffPolynomial:
        coeff = ONE
        m = re.compile(r"\d+(/\d+)?").match(self.s, self.i) if self.peek().isdigit() else None
        if m:
            coeff = scalar(m.group(0))
            self.i = m.end()
            if self.peek() == "*":
                self.i += 1
        prod = None
        while True:
            ch = self.peek()
            if not ch or not (ch.isalpha() or ch in "[("):
                break
            f = self.factor()
            prod = f if prod is None else prod * f
            if self.peek() == "*":
                self.i += 1
        if prod is None:
            self.error("expected a variable, commutator or parenthesis")
        return prod * coeff

    def factor(self) -> DiffPolynomial:
        ch = self.peek()
        if ch == "[":
            self.i += 1
            parts = [self.expr()]
            while self.peek() == ",":
                self.i += 1
                parts.append(self.expr())
            self.eat("]")
            base = commutator(*parts)
        elif ch == "(":
            self.i += 1
            base = self.expr()
            self.eat(")")
        else:
            m = re.compile(r"[A-Za-z]\d*").match(self.s, self.i)
            if not m:
                self.error("expected a variable")
            self.i = m.end()
            base = DiffPolynomial.var(self.var_id(m.group(0)))
        while self.i < len(self.s) and self.s[self.i] in "^" + "".join(_SUPERSCRIPT):
            if self.s[self.i] in _SUPERSCRIPT:
                k = _SUPERSCRIPT[self.s[self.i]]
                self.i += 1
                out = base
                for _ in range(k - 1):
                    out = out * base
                base = out
                continue
            self.i += 1
            m = re.compile(r"\d+").match(self.s, self.i)
            if m:
                self.i = m.end()
                out = base
                for _ in range(int(m.group(0)) - 1):
                    out = out * base
                base = out
                continue
            base = apply_word(self.label(), base)
        return base

    def var_id(self, name: str) -> int:
        if self.numbered:
            return int(name[1:]) - 1
        return self.names.setdefault(name, len(self.names))

    def label(self) -> Word:
        if self.i < len(self.s) and self.s[self.i] == "{":
            end = self.s.find("}", self.i)
            if end < 0:
                self.error("unclosed label brace")
            body = self.s[self.i + 1:end]
            self.i = end + 1
            word: List[int] = []
            for chunk in re.split(r"[\s∘]+", body.strip()):
                if chunk:
                    word.extend(self.label_chunk(chunk))
            if not word:
                self.error("empty label")
            return tuple(word)
        return self.one_name(single=True)

    def label_chunk(self, chunk: str) -> List[int]:
        sub = _Parser(chunk, self.gen_names, self.numbered, self.names)
        out: List[int] = []
        while sub.i < len(chunk):
            out.extend(sub.one_name(single=False))
        return out

    def one_name(self, single: bool) -> Word:
        """Longest known generator name at the cursor, with an optional power."""
        rest = self.s[self.i:]
        best = None
        for g, name in enumerate(self.gen_names):
            for alias in [name] + [a for a, full in GREEK_ALIASES.items() if full == name]:
                if rest.startswith(alias) and (best is None or len(alias) > len(best[1])):
                    best = (g, alias)
        if best is None:
            known = ", ".join(self.gen_names) or "none"
            self.error(f"unknown label (known: {known})")
        g, alias = best
        self.i += len(alias)
        power = 1
        if self.i < len(self.s) and self.s[self.i] in _SUPERSCRIPT:
            power = _SUPERSCRIPT[self.s[self.i]]
            self.i += 1
        elif not single and self.s.startswith("^", self.i):
            m = re.compile(r"\^(\d+)").match(self.s, self.i)
            if not m:
                self.error("expected a power")
            power = int(m.group(1))
            self.i = m.end()
        return (g,) * power


def parse_polynomial(text: str, gen_names: Sequence[str] = ()) -> Tuple[DiffPolynomial, List[str]]:
    """Parse the text syntax into a polynomial with free label words.

    Returns the polynomial and the variable names ordered by id.  When every
    variable is written ``x<k>`` the id is ``k-1``; otherwise ids follow
    first appearance.
    """
    names: Dict[str, int] = {}
    p = _Parser(text, gen_names, False, names).parse()
    numbered = bool(names) and all(re.fullmatch(r"x[1-9]\d*", t) for t in names)
    if not numbered:
        return p, sorted(names, key=names.get)
    p = _Parser(text, gen_names, True, {}).parse()
    top = max(int(t[1:]) for t in names)
    return p, [f"x{k}" for k in range(1, top + 1)]


def parse_generators(text: str, gen_names: Sequence[str] = ()) -> List[DiffPolynomial]:
    """Parse a ';'-separated list of polynomials, each with its own variables."""
    return [parse_polynomial(part, gen_names)[0] for part in text.split(";") if part.strip()]


def format_word(word: Sequence[int], gen_names: Sequence[str]) -> str:
    if not word:
        return ""
    return "^{" + " ".join(gen_names[g] for g in word) + "}"


def format_polynomial(p: DiffPolynomial, gen_names: Optional[Sequence[str]] = None,
                      var_names: Optional[Sequence[str]] = None) -> str:
    if not p.terms:
        return "0"
    pieces = []
    for m, c in p:
        body = ""
        for v, w in m:
            name = var_names[v] if var_names else f"x{v + 1}"
            names = gen_names if gen_names is not None else [f"d{g + 1}" for g in range(max(w, default=0) + 1)]
            body += name + format_word(w, names)
        if c == 1:
            coef, sign = "", "+"
        elif c == -1:
            coef, sign = "", "-"
        else:
            sign = "-" if c < 0 else "+"
            coef = format_scalar(abs(c)) + "*"
        pieces.append((sign, coef + body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out
