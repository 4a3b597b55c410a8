import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmpg.algebra import RationalFunction, count_roots_left_closed, parse_rational_function
from pmpg.arena import Action, Arena, State, WeightedPrioritySystem, enumerate_profiles, fixture, validate
from pmpg.blackwell import (
    BudgetExceeded,
    ParametrizationError,
    blackwell_search_exact,
    blackwell_search_hybrid,
    canonical_parametrization,
    certify_parametrization,
    derive_system,
    limit_at_one,
    limit_check,
    parametrization_for,
)
from pmpg.discounted import eval_profile_discounted, saddle_violation
from pmpg.generate import random_arena

F = Fraction
t = RationalFunction.t()
parse = parse_rational_function
FIG1 = fixture("fig1")


def system(**entries):
    return WeightedPrioritySystem({s: F(w) for s, (w, _) in entries.items()}, {s: p for s, (_, p) in entries.items()})


def single(reward=F(3)):
    return Arena((State("s", "max", reward, (Action("a", (("s", F(1)),)),), F(1), 1),))


# -- parametrizations ---------------------------------------------------------------------


def test_canonical_examples():
    param = canonical_parametrization(system(a=(1, 1), b=(1, 2), c=(F(1, 2), 3)))
    assert param.lambda_t["a"] == t
    assert param.lambda_t["b"] == parse("1-(1-t)^2")
    assert param.lambda_t["c"] == parse("1-(1-t)^3/2")
    assert param.epsilon == F(1, 2)


def test_canonical_epsilon_shrinks_for_heavy_weights():
    # 3 * eps < 1 first holds at eps = 1/4
    assert canonical_parametrization(system(a=(3, 1))).epsilon == F(1, 4)


def test_canonical_rejects_astronomical_weight():
    with pytest.raises(ParametrizationError):
        canonical_parametrization(system(a=(2**70, 1)))


@given(st.integers(0, 10_000))
def test_canonical_discounts_lie_in_unit_interval(seed):
    rng = random.Random(seed)
    sys_ = system(**{f"s{i}": (F(rng.randint(1, 40), rng.randint(1, 10)), rng.randint(1, 5)) for i in range(3)})
    param = canonical_parametrization(sys_)
    t0 = 1 - param.epsilon * F(rng.randint(1, 100), 100)
    assert all(0 <= v < 1 for v in param.at(t0).values())


@pytest.mark.parametrize(
    "text, priority, weight",
    [("t^2", 1, F(2)), ("(2*t-1)/t", 1, F(1)), ("1-(1-t)^2", 2, F(1)), ("1-3*(1-t)^3/(1+t)", 3, F(3, 2))],
)
def test_derive_system_examples(text, priority, weight):
    derived = derive_system(certify_parametrization({"s": parse(text)}))
    assert derived.priority["s"] == priority
    assert derived.weight["s"] == weight


def test_derive_round_trip_example():
    sys_ = system(a=(F(3, 2), 2), b=(F(1, 7), 1))
    back = derive_system(canonical_parametrization(sys_))
    assert dict(back.weight) == dict(sys_.weight) and dict(back.priority) == dict(sys_.priority)


def test_certify_shrinks_epsilon_with_note():
    # (2t - 1)/t vanishes at t = 1/2, inside [1/2, 1)
    param = certify_parametrization({"s": parse("(2*t-1)/t")})
    assert param.epsilon == F(1, 4)
    assert param.notes == ("epsilon shrunk to 2^-2 for state s",)


@given(st.integers(1, 6), st.integers(1, 9))
def test_certified_interval_has_no_roots(p, q):
    # lambda_t = 1 - (1 - t) * (q t - p)/ (q t) style family with a root that may sit near 1
    lam = 1 - (1 - t) * (t * q + p) / (t * q)
    param = certify_parametrization({"s": lam})
    a = 1 - param.epsilon
    for poly in (lam.num, lam.den, (1 - lam).num):
        if not poly.is_constant():
            assert count_roots_left_closed(poly, a, 1) == 0
    for k in range(1, 12):
        v = param.at(a + (1 - a) * (1 - F(1, 2**k)))["s"]
        assert 0 <= v < 1


@pytest.mark.parametrize("text", ["1/2", "2 - t", "1 + (1-t)^2"])
def test_certify_rejects_discounts_not_tending_to_one_from_below(text):
    with pytest.raises(ParametrizationError):
        certify_parametrization({"s": parse(text)})


def test_parametrization_from_document():
    doc = {"states": [
        {"id": "a", "controller": "max", "reward": "1", "discount": "t", "actions": [{"label": "x", "to": [{"state": "b", "prob": "1"}]}]},
        {"id": "b", "controller": "min", "reward": "0", "discount": "1-(1-t)^2", "actions": [{"label": "y", "to": [{"state": "a", "prob": "1"}]}]},
    ]}
    param = parametrization_for(validate(doc))
    assert param.lambda_t == {"a": t, "b": parse("1-(1-t)^2")}
    doc["states"][1].pop("discount")
    with pytest.raises(Exception, match="every state or on none"):
        parametrization_for(validate(doc))


# -- exact search -------------------------------------------------------------------------


def test_fig1_exact():
    res = blackwell_search_exact(FIG1, canonical_parametrization(FIG1.priority_system()))
    assert res.profile.as_dict() == {"sMax": "right", "sMin": "left"}
    assert res.value_functions["sMax"] == parse("t*(1-t)/(1+t-t^2)")
    assert res.qualifying_max_choices == {"sMax": ["right"]}
    assert res.verified
    # every unilateral deviation of either player at every state
    assert len(res.certificate) == 2 * 2
    doc = res.to_json()
    assert doc["value_functions"]["sMax"] == "(t^2 - t)/(t^2 - t - 1)"


def test_single_state_exact():
    arena = single()
    res = blackwell_search_exact(arena, canonical_parametrization(arena.priority_system()))
    assert res.value_functions == {"s": 3} and res.certificate == []


@given(st.integers(0, 10_000), st.integers(-4, 4))
def test_constant_rewards_every_profile_qualifies(seed, c):
    base = random_arena(random.Random(seed))
    arena = base.with_rewards({s: F(c) for s in base.ids})
    res = blackwell_search_exact(arena, canonical_parametrization(arena.priority_system()))
    profiles = list(enumerate_profiles(arena))
    assert res.qualifying_profiles == profiles
    assert res.profile == profiles[0]
    assert set(res.value_functions.values()) == {F(c)}


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        blackwell_search_exact(FIG1, canonical_parametrization(FIG1.priority_system()), budget=2)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_blackwell_profile_is_optimal_at_fixed_t_near_one(seed):
    arena = random_arena(random.Random(seed))
    param = canonical_parametrization(arena.priority_system())
    res = blackwell_search_exact(arena, param)
    table = {p: eval_profile_discounted(arena, param.lambda_t, p) for p in enumerate_profiles(arena)}
    # every difference against the candidate keeps its sign on [t0, 1)
    t0 = 1 - param.epsilon
    for vals in table.values():
        for s in arena.ids:
            diff = vals[s] - res.value_functions[s]
            for poly in (diff.num, diff.den):
                while not poly.is_constant() and count_roots_left_closed(poly, t0, 1):
                    t0 = (t0 + 1) / 2
    assert saddle_violation(arena, param.at(t0), res.profile) == 0


# -- hybrid search ----------------------------------------------------------------------------


def test_fig1_hybrid_matches_exact():
    param = canonical_parametrization(FIG1.priority_system())
    exact = blackwell_search_exact(FIG1, param)
    hybrid = blackwell_search_hybrid(FIG1, param)
    assert hybrid.mode == "hybrid"
    assert hybrid.profile == exact.profile
    assert hybrid.value_functions == exact.value_functions


def test_single_state_hybrid_stable_from_first_sample():
    arena = single()
    res = blackwell_search_hybrid(arena, canonical_parametrization(arena.priority_system()))
    assert res.samples[0]["profile"] == res.profile.to_json()
    assert res.mode == "hybrid"


@pytest.mark.parametrize("seed", range(8))
def test_hybrid_agrees_with_exact_on_three_state_arenas(seed):
    arena = random_arena(random.Random(1000 + seed), n_states=3)
    param = canonical_parametrization(arena.priority_system())
    exact = blackwell_search_exact(arena, param)
    hybrid = blackwell_search_hybrid(arena, param)
    assert hybrid.verified
    assert hybrid.value_functions == exact.value_functions


def test_hybrid_rejects_bad_range():
    with pytest.raises(ValueError):
        blackwell_search_hybrid(FIG1, canonical_parametrization(FIG1.priority_system()), k_start=5, k_end=5)


# -- limit check -------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "f, expected",
    [(t, 1), (parse("t*(1-t)/(1+t-t^2)"), 0), ((1 - t * t) / (1 - t), 2), (RationalFunction.t() * 0, 0)],
)
def test_limit_at_one(f, expected):
    assert limit_at_one(f) == expected


def test_limit_at_one_rejects_pole():
    with pytest.raises(ValueError):
        limit_at_one(1 / (1 - t))


def test_fig1_limit_check():
    report = limit_check(FIG1, canonical_parametrization(FIG1.priority_system()))
    assert report.ok
    assert report.pmp_values == {"sMax": 0, "sMin": 0}
    assert report.blackwell_profile.as_dict() == {"sMax": "right", "sMin": "left"}
    assert [row["k"] for row in report.numeric] == list(range(4, 21))
    assert report.final_deviation() <= 1e-4
    assert report.to_json()["ok"] is True


def test_single_state_limit_check():
    report = limit_check(single(), canonical_parametrization(single().priority_system()))
    assert report.ok and report.max_numeric_deviation == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_random_three_state_limit_check(seed):
    arena = random_arena(random.Random(2000 + seed), n_states=3, max_priority=3)
    report = limit_check(arena, canonical_parametrization(arena.priority_system()))
    assert all(report.equality.values())
    assert all(report.limit_equality.values())
    # per-profile limits cover every profile
    assert report.profile_limits_ok and len(report.profile_limits) == arena.profile_count() * len(arena)


def test_limit_check_skips_points_outside_interval():
    heavy = fixture("fig1").with_system(system(sMax=(3, 1), sMin=(1, 2)))
    param = canonical_parametrization(heavy.priority_system())
    assert param.epsilon == F(1, 4)
    report = limit_check(heavy, param, kmin=1, kmax=4)
    assert "skipped" in report.numeric[0]
    assert report.ok
