import pytest

from diffpi.diffpoly import MultilinearIndex, parse_generators, parse_polynomial
from diffpi.ideals import (
    ConsequenceEngine,
    EvaluationPlan,
    PlanError,
    PlanMode,
    RefutationError,
    codimension,
    cocharacter,
    consequence_space,
    direct_consequence_space,
    evaluation_span,
    find_nonvanishing,
    generators_sha256,
    in_ideal,
    is_identity,
    quotient_cocharacter,
    quotient_cocharacter_direct,
    trivial_operator_basis,
    verify_generating_set,
)
from diffpi.zoo import FINITE_MODELS, build_named, generators_for


def P(text, W):
    return parse_polynomial(text, W.gen_names)[0]


@pytest.mark.parametrize("model", FINITE_MODELS)
def test_generators_are_identities(model):
    A, W = build_named(model)
    for g in generators_for(model, W):
        assert is_identity(A, W, g)


def test_non_identity_has_witness():
    A, W = build_named("ut2")
    g = P("[x,y]", W)
    assert not is_identity(A, W, g)
    point = find_nonvanishing(A, W, g)
    assert point is not None


def test_refuted_generator_raises():
    A, W = build_named("ut2_eps")
    S = parse_generators("[x,y]", W.gen_names)
    with pytest.raises(RefutationError):
        verify_generating_set(A, W, S, 2)


@pytest.mark.parametrize("model", ["ut2", "ut2_eps", "ut2_D", "m1_D", "c_eps"])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_function_and_monomial_routes_agree(model, n):
    A, W = build_named(model)
    span = evaluation_span(A, W, n)
    other = "functions" if span.route == "monomials" else "monomials"
    forced = evaluation_span(A, W, n, route=other)
    assert span.acc.rank == forced.acc.rank
    assert cocharacter_from(span) == cocharacter_from(forced)


def cocharacter_from(span):
    from diffpi.ideals import span_traces
    from diffpi.repsn import decompose

    return decompose(span_traces(span), span.n)


def test_sampled_plan_is_lower_bound():
    A, W = build_named("ut2_D")
    full = codimension(A, W, 3)
    sampled = codimension(A, W, 3, EvaluationPlan(mode=PlanMode.SAMPLED, seed=7))
    assert not sampled.exact
    assert sampled.c_n <= full.c_n
    again = codimension(A, W, 3, EvaluationPlan(mode=PlanMode.SAMPLED, seed=7))
    assert again.c_n == sampled.c_n


def test_cap_refuses_large_runs():
    A, W = build_named("ut2_D")
    with pytest.raises(PlanError):
        codimension(A, W, 6, EvaluationPlan(cap=100))


def test_cap_from_environment(monkeypatch):
    A, W = build_named("ut2")
    monkeypatch.setenv("DIFFPI_CAP", "10")
    with pytest.raises(PlanError):
        codimension(A, W, 3)


def test_codimension_report_pivots():
    A, W = build_named("m1")
    r = codimension(A, W, 3)
    assert r.c_n == 3 and r.exact and len(r.pivots) == 3
    assert r.kernel_dim == MultilinearIndex(3, 1).size - 3
    assert r.to_dict(W)["c_n"] == 3


@pytest.mark.parametrize("model", ["ut2", "ut2_eps", "ut2_delta", "ut2_D", "c_eps", "m1_eps", "m2_D"])
def test_engine_matches_direct_closure(model):
    _, W = build_named(model)
    S = generators_for(model, W)
    engine = ConsequenceEngine(S, W)
    cache = {}
    top = 4 if W.dim <= 2 else 3
    for n in range(1, top + 1):
        direct = direct_consequence_space(S, W, n, cache)
        assert engine.dimension(n) == direct.rank
    assert quotient_cocharacter(S, W, top, engine) == quotient_cocharacter_direct(S, W, top)


def test_consequence_basis_vectors_lie_in_direct_span():
    _, W = build_named("ut2_delta")
    S = generators_for("ut2_delta", W)
    dim, basis = consequence_space(S, W, 3)
    direct = direct_consequence_space(S, W, 3)
    assert dim == len(basis) == direct.rank
    for v in basis:
        assert direct.contains(v)


def test_membership():
    A, W = build_named("ut2")
    S = generators_for("ut2", W)
    assert in_ideal(P("[x1,x2][x3,x4]", W), S, W, 4)
    assert in_ideal(P("[x1,x2][x3,x4] x5", W), S, W, 5)
    assert in_ideal(P("[x3,x1][x2,x4]", W), S, W, 4)
    assert not in_ideal(P("[x1,x2]x3x4", W), S, W, 4)
    with pytest.raises(ValueError):
        in_ideal(P("x1 x2", W), S, W, 3)


def test_eps_relations_are_consequences():
    _, W = build_named("ut2_eps")
    S = generators_for("ut2_eps", W)
    # ([x,y]^eps - [x,y]) z and the eps-derivative of x^eps y^eps
    assert in_ideal(P("[x1,x2]^eps x3 - [x1,x2] x3", W), S, W, 3)
    assert in_ideal(P("x1^eps x2^eps x3", W), S, W, 3)
    assert not in_ideal(P("x1^eps x2", W), S, W, 2)


def test_smaller_generating_set_fails_sandwich():
    A, W = build_named("ut2")
    S = parse_generators("[x1,x2][x3,x4][x5,x6]", W.gen_names)
    v = verify_generating_set(A, W, S, 4, closed_form=18)
    assert v.lower == 18 and v.upper > 18
    assert not v.equal and not v.passed


def test_verdict_fields():
    A, W = build_named("m2_eps")
    S = generators_for("m2_eps", W)
    v = verify_generating_set(A, W, S, 3, closed_form=4)
    assert v.equal and v.passed and v.closed_form_match
    d = v.to_dict()
    assert d["lower"] == d["upper"] == 4
    assert d["generators_sha256"] == generators_sha256(S, W.gen_names)
    assert d["notes"]


def test_ordinary_codimension_ignores_derivations():
    A, _ = build_named("ut2_D")
    T = trivial_operator_basis(A)
    assert [codimension(A, T, n).c_n for n in range(1, 5)] == [1, 2, 6, 18]


def test_cocharacter_of_m1():
    A, W = build_named("m1")
    assert cocharacter(A, W, 4) == {(4,): 1, (3, 1): 1}
    S = generators_for("m1", W)
    assert quotient_cocharacter(S, W, 4) == {(4,): 1, (3, 1): 1}


def test_cocharacter_needs_exact_plan():
    A, W = build_named("m1")
    with pytest.raises(PlanError):
        cocharacter(A, W, 3, EvaluationPlan(mode=PlanMode.SAMPLED))
