"""Built-in algebras with derivations, including truncated Grassmann algebras."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .diffpoly import DiffPolynomial, parse_generators
from .exactla import ONE, Vec, scalar
from .fdalg import FDAlgebra, OperatorBasis, inner_derivation, operator_closure, validate_algebra
from .ideals import EvaluationPlan, PlanError, PlanMode, codimension, trivial_operator_basis

HALF = scalar("1/2")

FINITE_MODELS = [
    "ut2", "ut2_eps", "ut2_delta", "ut2_D",
    "c_eps",
    "m1", "m1_eps", "m1_delta", "m1_D",
    "m2", "m2_eps", "m2_delta", "m2_D",
]
GRASSMANN_MODELS = ["grassmann", "grassmann_der"]
MODEL_NAMES = FINITE_MODELS + GRASSMANN_MODELS

# Claimed generating sets of the identities, in the text syntax of diffpoly.
GENERATORS = {
    "ut2": "[x1,x2][x3,x4]",
    "ut2_eps": "[x,y]^eps - [x,y]; x^eps y^eps; x^{eps eps} - x^eps",
    "ut2_delta": "[x,y][z,w]; [x,y]^delta; x^delta[y,z]; x^delta y^delta; x^{delta delta}",
    "ut2_D": "[x,y]^eps - [x,y]; x^eps y^eps; x^{eps eps} - x^eps; x^{delta eps}; x^{eps delta} - x^delta",
    "c_eps": "[x,y]; x^eps y^eps; x^{eps eps} - x^eps",
    "m1": "x[y,z]",
    "m1_eps": "x y^eps; x^eps y - y^eps x - [x,y]; x^{eps eps} - x^eps",
    "m1_delta": "x[y,z]; x^delta y - y^delta x; x y^delta; x^{delta delta}",
    "m1_D": "x y^eps; x^eps y - y^eps x - [x,y]; x^{eps eps} - x^eps; x^{delta eps}; x^{eps delta} - x^delta",
    "m2": "[x,y]z",
    "m2_eps": "x^eps y; x y^eps - y x^eps - [x,y]; x^{eps eps} - x^eps",
    "m2_delta": "[x,y]z; x y^delta - y x^delta; x^delta y; x^{delta delta}",
    "m2_D": "x^eps y; x y^eps - y x^eps - [x,y]; x^{eps eps} - x^eps; x^{delta eps}; x^{eps delta} - x^delta",
    "grassmann": "[x,y,z]",
}


def grassmann_generators_text(t: int) -> str:
    parts = ["[x,y,z]"]
    parts += [f"[x^d{i}, y]" for i in range(1, t + 1)]
    parts += [f"x^{{d{i} d{j}}}" for i in range(1, t + 1) for j in range(1, t + 1)]
    return "; ".join(parts)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    m: Optional[int] = None
    t: int = 0

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.name!r}; choose from {', '.join(MODEL_NAMES)}")
        if self.name in GRASSMANN_MODELS:
            if self.m is None or self.m < 1:
                raise ValueError(f"{self.name} needs a truncation m >= 1")
            if self.name == "grassmann_der" and self.t < 1:
                raise ValueError("grassmann_der needs t >= 1")
            if self.name == "grassmann_der" and self.t > self.m:
                raise ValueError("need t <= m")

    @property
    def label(self) -> str:
        if self.name == "grassmann":
            return f"grassmann(m={self.m})"
        if self.name == "grassmann_der":
            return f"grassmann_der(m={self.m},t={self.t})"
        return self.name


# -- matrix-unit models ----------------------------------------------------------


def ut2() -> FDAlgebra:
    """Upper triangular 2x2 matrices, basis e11, e12, e22."""
    products = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 2): {1: 1}, (2, 2): {2: 1}}
    return FDAlgebra(3, ["e11", "e12", "e22"], products, {0: 1, 2: 1}, name="ut2")


def c_algebra() -> FDAlgebra:
    """Span of the identity u = e11 + e22 and e12."""
    products = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}
    return FDAlgebra(2, ["u", "e12"], products, {0: 1}, name="c")


def m1_algebra() -> FDAlgebra:
    """Span of e22 and e12."""
    products = {(0, 0): {0: 1}, (1, 0): {1: 1}}
    return FDAlgebra(2, ["e22", "e12"], products, name="m1")


def m2_algebra() -> FDAlgebra:
    """Span of e11 and e12."""
    products = {(0, 0): {0: 1}, (0, 1): {1: 1}}
    return FDAlgebra(2, ["e11", "e12"], products, name="m2")


_BRACKET_ED = {(0, 1): [0, 1], (1, 0): [0, -1], (0, 0): [0, 0], (1, 1): [0, 0]}


def _with_action(A: FDAlgebra, eps, delta, action: str, name: str) -> FDAlgebra:
    if action == "":
        return A.with_derivations([], name=name)
    if action == "eps":
        return A.with_derivations([("eps", eps)], name=name)
    if action == "delta":
        return A.with_derivations([("delta", delta)], name=name)
    return A.with_derivations([("eps", eps), ("delta", delta)], _BRACKET_ED, name=name)


def _finite_model(name: str) -> FDAlgebra:
    base, _, action = name.partition("_")
    if base == "ut2":
        A = ut2()
        eps = inner_derivation(A, {0: HALF, 2: -HALF})
        delta = inner_derivation(A, {1: HALF})
    elif base == "c":
        A = c_algebra()
        eps = {1: {1: ONE}}
        delta = None
    elif base == "m1":
        A = m1_algebra()
        eps = {1: {1: ONE}}
        delta = {0: {1: ONE}}
    else:
        A = m2_algebra()
        eps = {1: {1: ONE}}
        delta = {0: {1: ONE}}
    return _with_action(A, eps, delta, action, name)


# -- Grassmann -------------------------------------------------------------------


def _popcount(x: int) -> int:
    return bin(x).count("1")


def grassmann_sign(u: int, v: int) -> int:
    """Sign of ``e_u e_v`` relative to the sorted monomial (0 on overlap)."""
    if u & v:
        return 0
    inv = 0
    b = v
    while b:
        low = b & -b
        inv += _popcount(u & ~((low << 1) - 1))
        b ^= low
    return -1 if inv & 1 else 1


class GrassmannAlgebra(FDAlgebra):
    """Grassmann algebra on generators e1..em; basis index = bitmask of the support."""

    def __init__(self, m: int, derivations=(), brackets=None, name: str = ""):
        self.m = m
        dim = 1 << m
        names = [self.monomial_name(mask) for mask in range(dim)]
        super().__init__(dim, names, {}, {0: 1}, derivations, brackets, name or f"grassmann(m={m})")
        self._cache: Dict[Tuple[int, int], Vec] = {}

    @staticmethod
    def monomial_name(mask: int) -> str:
        if not mask:
            return "1"
        return "".join(f"e{i + 1}" for i in range(mask.bit_length()) if mask >> i & 1)

    def mul_basis(self, i: int, j: int) -> Vec:
        key = (i, j)
        hit = self._cache.get(key)
        if hit is None:
            s = grassmann_sign(i, j)
            hit = {i | j: scalar(s)} if s else {}
            self._cache[key] = hit
        return hit

    def with_derivations(self, derivations, brackets=None, name: str = "") -> "GrassmannAlgebra":
        return GrassmannAlgebra(self.m, derivations, brackets, name or self.name)


def grassmann(m: int) -> GrassmannAlgebra:
    return GrassmannAlgebra(m)


def grassmann_der(m: int, t: int) -> GrassmannAlgebra:
    """Grassmann algebra with ``d_i = (1/2) ad e_i`` for i = 1..t."""
    if not 1 <= t <= m:
        raise ValueError("need 1 <= t <= m")
    G = GrassmannAlgebra(m)
    ders = [(f"d{i + 1}", inner_derivation(G, {1 << i: HALF})) for i in range(t)]
    brackets = {(a, b): [0] * t for a in range(t) for b in range(t)}
    return GrassmannAlgebra(m, ders, brackets, f"grassmann_der(m={m},t={t})")


def canonical_patterns(n: int, t: int) -> Iterator[Tuple[Tuple[int, int], ...]]:
    """Per variable (parity, reserved-support bitmask), reserved supports pairwise disjoint."""
    single = [(p, r) for r in range(1 << t) for p in (0, 1)]
    for combo in itertools.product(single, repeat=n):
        used = 0
        ok = True
        for _, r in combo:
            if used & r:
                ok = False
                break
            used |= r
        if ok:
            yield combo


def realize_pattern(pattern: Sequence[Tuple[int, int]], m: int, t: int) -> Optional[List[int]]:
    """Basis masks realizing ``pattern`` with fresh generators after the reserved ones.

    A variable gets one fresh generator exactly when its reserved support has
    the wrong parity; ``None`` when ``m`` generators are not enough.
    """
    nxt = t
    out = []
    for parity, r in pattern:
        mask = r
        if _popcount(r) % 2 != parity:
            if nxt >= m:
                return None
            mask |= 1 << nxt
            nxt += 1
        out.append(mask)
    return out


def canonical_tuples(A: GrassmannAlgebra, n: int, t: int, strict: bool = True) -> Iterator[List[Vec]]:
    if strict and A.m < 2 * n + t:
        raise PlanError(f"truncation m={A.m} is below 2n+t={2 * n + t}")
    for pattern in canonical_patterns(n, t):
        masks = realize_pattern(pattern, A.m, t)
        if masks is not None:
            yield [{mask: ONE} for mask in masks]


def canonical_grassmann_plan(n: int, t: int, strict: bool = True) -> EvaluationPlan:
    """Evaluate only on one representative tuple per support pattern.

    The truncation check applies at degree ``n``; other degrees (for example
    checking a generator with more variables) are evaluated exactly on the
    truncated algebra itself.
    """
    note = "Grassmann derivations taken as (1/2) ad e_i on single generators"

    def source(A, k):
        return canonical_tuples(A, k, t, strict and k == n)

    return EvaluationPlan(mode=PlanMode.CANONICAL, tuple_source=source, note=note if t else "")


@dataclass
class ScanReport:
    n: int
    t: int
    values: List[Tuple[int, int]] = field(default_factory=list)
    stable: Optional[int] = None
    expected: Optional[int] = None

    @property
    def conclusive(self) -> bool:
        return self.stable is not None

    @property
    def match(self) -> Optional[bool]:
        if self.stable is None or self.expected is None:
            return None
        return self.stable == self.expected

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "values": [{"m": m, "c_n": c} for m, c in self.values],
            "stable": self.stable,
            "expected": self.expected,
            "match": self.match,
            "conclusive": self.conclusive,
        }


def grassmann_scan(n: int, t: int, m_start: Optional[int] = None, m_max: Optional[int] = None) -> ScanReport:
    """Grow the truncation until two consecutive codimensions agree.

    ``t = 0`` scans the Grassmann algebra without derivations.
    """
    from .formulas import closed_form

    if m_start is None:
        m_start = max(1, t + n - 1)
    if m_max is None:
        m_max = 2 * n + t + 2
    report = ScanReport(n, t, expected=closed_form("grassmann_der" if t else "grassmann", n, t))
    prev = None
    for m in range(max(m_start, t, 1), m_max + 1):
        spec = ModelSpec("grassmann_der", m, t) if t else ModelSpec("grassmann", m)
        A, W = build_named(spec, validate=False)
        c = codimension(A, W, n, canonical_grassmann_plan(n, t, strict=False)).c_n
        report.values.append((m, c))
        if prev is not None and c == prev:
            report.stable = c
            break
        prev = c
    return report


# -- registry --------------------------------------------------------------------


@lru_cache(maxsize=None)
def _build(name: str, m: Optional[int], t: int, validate: bool) -> Tuple[FDAlgebra, OperatorBasis]:
    if name == "grassmann":
        A = grassmann(m)
    elif name == "grassmann_der":
        A = grassmann_der(m, t)
    else:
        A = _finite_model(name)
    if validate:
        validate_algebra(A)
    W = operator_closure(A) if A.derivations else trivial_operator_basis(A)
    return A, W


def build_named(spec, validate: bool = True, m: Optional[int] = None, t: int = 0) -> Tuple[FDAlgebra, OperatorBasis]:
    """Build a model and its operator algebra from a :class:`ModelSpec` or a name."""
    if isinstance(spec, str):
        spec = ModelSpec(spec, m, t)
    return _build(spec.name, spec.m, spec.t, validate)


def generators_for(spec, W: OperatorBasis) -> List[DiffPolynomial]:
    if isinstance(spec, str):
        spec = ModelSpec(spec) if spec not in GRASSMANN_MODELS else ModelSpec(spec, 1, 1 if spec == "grassmann_der" else 0)
    text = grassmann_generators_text(spec.t) if spec.name == "grassmann_der" else GENERATORS[spec.name]
    return parse_generators(text, W.gen_names)


def default_truncation(n: int, t: int) -> int:
    return 2 * n + t


def list_models(n_for_grassmann: int = 2, t: int = 1) -> List[dict]:
    rows = []
    for name in MODEL_NAMES:
        if name == "grassmann":
            spec = ModelSpec(name, default_truncation(n_for_grassmann, 0))
        elif name == "grassmann_der":
            spec = ModelSpec(name, default_truncation(n_for_grassmann, t), t)
        else:
            spec = ModelSpec(name)
        A, W = build_named(spec, validate=False)
        rows.append({
            "model": name,
            "spec": spec.label,
            "dim": A.dim,
            "dim_W": W.dim,
            "derivations": A.derivation_names,
            "W_basis": W.labels,
        })
    return rows
