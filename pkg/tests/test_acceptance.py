"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import math
import random

import pytest

from diffpi.diffpoly import DiffPolynomial, apply_generator, evaluate, normalize
from diffpi.exactla import scalar
from diffpi.fdalg import (
    change_basis,
    derivation_space,
    derived_algebra,
    in_span,
    inner_derivation,
    is_metabelian,
    op_apply,
    operator_closure,
    span_dimension,
)
from diffpi.formulas import closed_form, multiplicities
from diffpi.ideals import (
    ConsequenceEngine,
    EvaluationPlan,
    codimension,
    cocharacter,
    evaluation_span,
    quotient_cocharacter,
    trivial_operator_basis,
    verify_generating_set,
)
from diffpi.repsn import class_size, degree_check, is_hook, mn_character, partitions
from diffpi.zoo import (
    FINITE_MODELS,
    ModelSpec,
    build_named,
    c_algebra,
    canonical_grassmann_plan,
    default_truncation,
    generators_for,
    grassmann_scan,
    m1_algebra,
    m2_algebra,
    ut2,
)


@pytest.fixture
def report(capsys):
    def emit(number, title, failures):
        status = "PASS" if not failures else "FAIL"
        with capsys.disabled():
            print(f"\nCRITERION {number}: {status} {title}")
            for f in failures[:10]:
                print(f"  - {f}")
        assert not failures, failures

    return emit


def grassmann_setup(name, n, t):
    spec = ModelSpec(name, default_truncation(n, t), t)
    A, W = build_named(spec, validate=False)
    return spec, A, W, canonical_grassmann_plan(n, t)


CODIM_TABLE = [
    ("ut2", 6), ("ut2_eps", 5), ("ut2_delta", 5), ("ut2_D", 5), ("c_eps", 6),
    ("m1", 6), ("m2", 6), ("m1_eps", 6), ("m2_eps", 6), ("m1_delta", 6), ("m2_delta", 6),
    ("m1_D", 6), ("m2_D", 6),
]


def test_criterion_1_codimension_tables(report):
    failures = []
    for model, top in CODIM_TABLE:
        A, W = build_named(model)
        for n in range(1, top + 1):
            r = codimension(A, W, n, EvaluationPlan())
            want = closed_form(model, n)
            if not r.exact or r.c_n != want:
                failures.append(f"{model} n={n}: c_n={r.c_n} expected {want}")
    report(1, "codimension tables (full mode, exact)", failures)


SANDWICH_CASES = [(model, None) for model in FINITE_MODELS] + [("grassmann", 0), ("grassmann_der", 1), ("grassmann_der", 2)]


def test_criterion_2_sandwich(report):
    failures = []
    for model, t in SANDWICH_CASES:
        if t is None:
            A, W = build_named(model)
            S = generators_for(model, W)
            engine = ConsequenceEngine(S, W)
            top = 5 if W.dim <= 2 else 4
            for n in range(1, top + 1):
                v = verify_generating_set(A, W, S, n, closed_form(model, n), engine=engine)
                if not v.passed:
                    failures.append(f"{model} n={n}: lower={v.lower} upper={v.upper}")
            continue
        top = 5 if t + 1 <= 2 else 4
        for n in range(1, top + 1):
            spec, A, W, plan = grassmann_setup(model, n, t)
            S = generators_for(spec, W)
            v = verify_generating_set(A, W, S, n, closed_form(model, n, t), plan)
            if not v.passed:
                failures.append(f"{spec.label} n={n}: lower={v.lower} upper={v.upper}")
    report(2, "sandwich verification of every stated generating set", failures)


COCHAR_MODELS = ["ut2", "ut2_eps", "ut2_delta", "ut2_D", "c_eps",
                 "m1", "m1_eps", "m1_delta", "m1_D", "m2", "m2_eps", "m2_delta", "m2_D"]


def test_criterion_3_cocharacters(report):
    failures = []
    for model in COCHAR_MODELS:
        A, W = build_named(model)
        for n in range(1, 6):
            mults = cocharacter(A, W, n)
            c_n = codimension(A, W, n).c_n
            if any(not isinstance(m, int) or m < 0 for m in mults.values()):
                failures.append(f"{model} n={n}: bad multiplicities {mults}")
            if degree_check(mults) != c_n:
                failures.append(f"{model} n={n}: sum m f = {degree_check(mults)} != c_n = {c_n}")
            if mults != multiplicities(model, n):
                failures.append(f"{model} n={n}: {mults} != {multiplicities(model, n)}")
    report(3, "cocharacter multiplicities", failures)


def test_criterion_4_grassmann(report):
    failures = []
    for n in range(1, 6):
        r = grassmann_scan(n, 0)
        if not r.conclusive or r.stable != 2 ** (n - 1):
            failures.append(f"grassmann n={n}: scan {r.values}")
    for t, top, formula in [(1, 4, lambda n: 2 ** n), (2, 3, lambda n: 2 ** (n + 1) - 1)]:
        for n in range(1, top + 1):
            r = grassmann_scan(n, t)
            if not r.conclusive or r.stable != formula(n) or r.stable != closed_form("grassmann_der", n, t):
                failures.append(f"grassmann_der t={t} n={n}: scan {r.values}")
    for t in (0, 1, 2):
        name = "grassmann_der" if t else "grassmann"
        for n in range(1, 5):
            spec, A, W, plan = grassmann_setup(name, n, t)
            mults = cocharacter(A, W, n, plan)
            if any(not is_hook(lam) for lam in mults):
                failures.append(f"{spec.label} n={n}: non-hook shape in {mults}")
            if mults != multiplicities(name, n, t):
                failures.append(f"{spec.label} n={n}: {mults} != {multiplicities(name, n, t)}")
    report(4, "Grassmann codimensions and hook cocharacters", failures)


def test_criterion_5_derivation_spaces(report):
    failures = []
    for make, want in [(c_algebra, 1), (m1_algebra, 2), (m2_algebra, 2), (ut2, 2)]:
        A = make()
        d, ders = derivation_space(A)
        if d != want:
            failures.append(f"{A.name}: dim Der = {d}, expected {want}")
        if want == 2:
            if span_dimension(derived_algebra(ders, A.dim), A.dim) != 1 or not is_metabelian(ders, A.dim):
                failures.append(f"{A.name}: derivation algebra is not 2-dim metabelian")
    A = ut2()
    _, ders = derivation_space(A)
    inner = [inner_derivation(A, {k: 1}) for k in range(A.dim)]
    if not all(in_span(inner, D, A.dim) for D in ders):
        failures.append("ut2 has a derivation outside the inner derivations")
    report(5, "derivation spaces", failures)


def _random_multilinear(rng, W, n):
    terms = {}
    for _ in range(rng.randint(1, 4)):
        perm = rng.sample(range(n), n)
        words = [tuple(rng.choice(range(W.num_generators)) for _ in range(rng.randint(0, 2))) for _ in perm]
        terms[tuple(zip(perm, words))] = rng.randint(-3, 3)
    return normalize(DiffPolynomial(terms), W)


def _random_invertible(rng, d):
    while True:
        P = [[rng.randint(-2, 2) for _ in range(d)] for _ in range(d)]
        cols = [{k: scalar(P[k][j]) for k in range(d) if P[k][j]} for j in range(d)]
        if span_dimension([{0: c} for c in cols], d) == d:
            return P


def test_criterion_6_property_suites(report):
    failures = []
    rng = random.Random(2024)

    # ordinary codimensions and multiplicities bound the differential ones
    cases = [(m, None) for m in FINITE_MODELS] + [("grassmann", 0), ("grassmann_der", 1), ("grassmann_der", 2)]
    for model, t in cases:
        for n in range(1, 5):
            if t is None:
                A, W = build_named(model)
                plan = EvaluationPlan()
            else:
                _, A, W, plan = grassmann_setup(model, n, t)
            T = trivial_operator_basis(A)
            ordinary, differential = cocharacter(A, T, n, plan), cocharacter(A, W, n, plan)
            if degree_check(ordinary) > degree_check(differential):
                failures.append(f"{model} t={t} n={n}: c_n > c_n^L")
            if any(m > differential.get(lam, 0) for lam, m in ordinary.items()):
                failures.append(f"{model} t={t} n={n}: m_lambda > m_lambda^L")

    # evaluation commutes with the derivations, 1000 random instances
    with_ders = [m for m in FINITE_MODELS if m not in ("ut2", "m1", "m2")]
    for k in range(1000):
        model = rng.choice(with_ders)
        A, W = build_named(model)
        n = rng.randint(1, 4)
        p = _random_multilinear(rng, W, n)
        point = {v: {c: scalar(rng.randint(-4, 4)) for c in range(A.dim)} for v in range(n)}
        g = rng.randrange(W.num_generators)
        lhs = evaluate(apply_generator(g, p, W), A, W, point)
        rhs = op_apply(W.word_operator((g,)), evaluate(p, A, W, point))
        if lhs != rhs:
            failures.append(f"Leibniz/evaluation mismatch on {model} instance {k}")

    # c_n is invariant under change of basis, 20 random conjugations
    for k in range(20):
        model = rng.choice(FINITE_MODELS)
        A, W = build_named(model)
        B = change_basis(A, _random_invertible(rng, A.dim))
        WB = operator_closure(B) if B.derivations else trivial_operator_basis(B)
        for n in range(1, 4):
            if codimension(B, WB, n).c_n != codimension(A, W, n).c_n:
                failures.append(f"{model} conjugation {k}: c_{n} changed")

    # character orthogonality
    for n in range(1, 8):
        shapes = list(partitions(n))
        for lam in shapes:
            for nu in shapes:
                s = sum(class_size(mu) * mn_character(lam, mu) * mn_character(nu, mu) for mu in shapes)
                if s != (math.factorial(n) if lam == nu else 0):
                    failures.append(f"orthogonality fails for {lam}, {nu}")

    # canonical Grassmann plan agrees with full enumeration
    for m in range(1, 9):
        for n in (1, 2):
            A, W = build_named(ModelSpec("grassmann_der", m, 1), validate=False)
            full = evaluation_span(A, W, n, EvaluationPlan(cap=10 ** 9)).acc.rank
            canon = evaluation_span(A, W, n, canonical_grassmann_plan(n, 1, strict=False)).acc.rank
            if full != canon:
                failures.append(f"grassmann_der(m={m},t=1) n={n}: full {full} canonical {canon}")

    # the quotient by the consequences carries the same character as the evaluation span
    for model in ("ut2_D", "m1_D", "c_eps"):
        A, W = build_named(model)
        S = generators_for(model, W)
        if quotient_cocharacter(S, W, 4) != cocharacter(A, W, 4):
            failures.append(f"{model}: quotient and evaluation cocharacters differ at n=4")
    report(6, "property suites", failures)
