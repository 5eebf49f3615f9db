import itertools

import pytest

from diffpi.fdalg import op_apply, validate_algebra
from diffpi.ideals import EvaluationPlan, PlanError, codimension, evaluation_span, find_nonvanishing
from diffpi.zoo import (
    FINITE_MODELS,
    MODEL_NAMES,
    ModelSpec,
    build_named,
    canonical_grassmann_plan,
    canonical_patterns,
    canonical_tuples,
    generators_for,
    grassmann,
    grassmann_der,
    grassmann_generators_text,
    grassmann_scan,
    list_models,
    realize_pattern,
)


def popcount(x):
    return bin(x).count("1")


@pytest.mark.parametrize("model", FINITE_MODELS)
def test_named_models_validate(model):
    A, W = build_named(model, validate=False)
    validate_algebra(A)
    assert A.dim == (3 if model.startswith("ut2") else 2)
    expected_w = 1 + ("_eps" in model) + ("_delta" in model) + 2 * model.endswith("_D")
    assert W.dim == expected_w


def test_model_spec_checks():
    with pytest.raises(ValueError):
        ModelSpec("nope")
    with pytest.raises(ValueError):
        ModelSpec("grassmann")
    with pytest.raises(ValueError):
        ModelSpec("grassmann_der", 4, 0)
    with pytest.raises(ValueError):
        ModelSpec("grassmann_der", 2, 3)
    assert ModelSpec("grassmann_der", 5, 1).label == "grassmann_der(m=5,t=1)"


def test_model_listing():
    rows = list_models()
    assert [r["model"] for r in rows] == list(MODEL_NAMES)
    assert len(rows) == 15


@pytest.mark.parametrize("m", range(1, 7))
def test_grassmann_sign_rule(m):
    G = grassmann(m)
    for u in range(1 << m):
        for v in range(1 << m):
            uv = G.mul_basis(u, v)
            vu = G.mul_basis(v, u)
            if u & v:
                assert uv == {} and vu == {}
            else:
                sign = -1 if popcount(u) % 2 and popcount(v) % 2 else 1
                assert uv[u | v] == sign * vu[u | v]


def test_grassmann_validates():
    validate_algebra(grassmann(4))
    validate_algebra(grassmann_der(4, 2))


@pytest.mark.parametrize("t", [1, 2])
def test_inner_derivation_action(t):
    A, W = build_named(ModelSpec("grassmann_der", 5, t), validate=False)
    for i in range(t):
        g = 1 << i
        D = W.word_operator((i,))
        for mask in range(1 << 5):
            if mask & g:
                continue
            image = op_apply(D, {mask: 1})
            if popcount(mask) % 2 == 0:
                assert image == {}
            else:
                assert image == A.mul({g: 1}, {mask: 1})
    assert W.dim == t + 1
    for i in range(t):
        for j in range(t):
            assert W.reduce_word((i, j)) == {}


@pytest.mark.parametrize("m", range(1, 9))
def test_grassmann_identities_hold(m):
    A, W = build_named(ModelSpec("grassmann", m), validate=False)
    (g,) = generators_for(ModelSpec("grassmann", m), W)
    plan = EvaluationPlan() if m <= 5 else canonical_grassmann_plan(3, 0, strict=False)
    assert find_nonvanishing(A, W, g, plan) is None


@pytest.mark.parametrize("m,t", [(3, 1), (4, 2), (6, 1), (8, 2)])
def test_grassmann_der_identities_hold(m, t):
    spec = ModelSpec("grassmann_der", m, t)
    A, W = build_named(spec, validate=False)
    S = generators_for(spec, W)
    assert len(S) == 1 + t + t * t
    for g in S:
        k = len(g.variables())
        plan = EvaluationPlan() if m <= 4 else canonical_grassmann_plan(k, t, strict=False)
        assert find_nonvanishing(A, W, g, plan) is None


def test_generator_text():
    assert grassmann_generators_text(1) == "[x,y,z]; [x^d1, y]; x^{d1 d1}"


def test_patterns_for_one_variable():
    assert sorted(canonical_patterns(1, 1)) == [((0, 0),), ((0, 1),), ((1, 0),), ((1, 1),)]
    # reserved supports never overlap
    for pat in canonical_patterns(3, 2):
        masks = [r for _, r in pat]
        assert all(not (a & b) for a, b in itertools.combinations(masks, 2))


def test_pattern_realization():
    assert realize_pattern([(1, 0), (0, 1)], 4, 1) == [0b10, 0b101]
    assert realize_pattern([(1, 0), (1, 0), (1, 0)], 3, 1) is None


def test_strict_plan_rejects_small_truncation():
    A = grassmann_der(4, 1)
    with pytest.raises(PlanError):
        list(canonical_tuples(A, 2, 1))


@pytest.mark.parametrize("n,t,c", [(1, 1, 2), (2, 1, 4), (2, 2, 7)])
def test_canonical_codimension_examples(n, t, c):
    spec = ModelSpec("grassmann_der", 2 * n + t, t)
    A, W = build_named(spec, validate=False)
    assert codimension(A, W, n, canonical_grassmann_plan(n, t)).c_n == c


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("n", [1, 2])
def test_canonical_matches_full_small(m, n):
    A, W = build_named(ModelSpec("grassmann_der", m, 1), validate=False)
    full = evaluation_span(A, W, n, EvaluationPlan(cap=10 ** 9))
    canon = evaluation_span(A, W, n, canonical_grassmann_plan(n, 1, strict=False))
    assert full.acc.rank == canon.acc.rank


@pytest.mark.parametrize("n,t,stable", [(3, 1, 8), (4, 1, 16), (3, 2, 15), (5, 0, 16)])
def test_scan_stabilizes(n, t, stable):
    report = grassmann_scan(n, t)
    assert report.conclusive and report.stable == stable and report.match
    assert report.values[-1][1] == report.values[-2][1]


def test_scan_reports_false_plateau_as_mismatch():
    # too few generators: m = 2 and 3 both give 11, and the report says it disagrees
    report = grassmann_scan(4, 1, m_start=2, m_max=3)
    assert report.values == [(2, 11), (3, 11)]
    assert report.conclusive and report.match is False


def test_scan_without_room_is_inconclusive():
    report = grassmann_scan(4, 1, m_start=4, m_max=4)
    assert not report.conclusive
    assert report.match is None
    assert report.to_dict()["conclusive"] is False
