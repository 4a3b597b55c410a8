"""Rational discount parametrizations, Blackwell-optimal profiles and the discounted-to-priority limit."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import (
    RationalFunction,
    compare_near_one,
    count_roots_left_closed,
    sign_near_one,
    zero_order_at_one,
)
from .arena import MAX, MIN, Arena, ArenaError, StrategyProfile, WeightedPrioritySystem
from .discounted import ConvergenceError, discounts_at, eval_profile_discounted, solve_discounted
from .priority_mp import (
    BudgetExceeded,
    InvariantViolation,
    eval_profile_pmp,
    evaluate_all,
    maximin_values,
    solve_pmp_bruteforce,
)

log = logging.getLogger(__name__)

MAX_HALVINGS = 64
DEFAULT_BUDGET = 4096


class ParametrizationError(ValueError):
    pass


@dataclass(frozen=True)
class DiscountParametrization:
    """Per-state discount ``t -> lambda_t(s)``, certified in ``[0, 1)`` for ``t`` in ``[1 - epsilon, 1)``."""

    lambda_t: Mapping[str, RationalFunction]
    epsilon: Fraction
    notes: tuple[str, ...] = ()

    def at(self, t) -> dict[str, Fraction]:
        return discounts_at(self, t)

    def to_json(self) -> dict:
        return {
            "lambda_t": {s: f.to_text() for s, f in self.lambda_t.items()},
            "epsilon": str(self.epsilon),
            "notes": list(self.notes),
        }


def canonical_parametrization(system: WeightedPrioritySystem) -> DiscountParametrization:
    """``lambda_t(s) = 1 - w(s) (1 - t)**priority(s)``.

    ``epsilon`` is the largest ``2**-k`` (``1 <= k <= 64``) with
    ``w(s) * epsilon**priority(s) < 1`` for every state; ``(1 - t)**p`` is
    increasing as ``t`` decreases, so this bounds ``1 - lambda_t`` on the
    whole interval.
    """
    t = RationalFunction.t()
    lambda_t = {}
    k_needed = 1
    for s, w in system.weight.items():
        w = Fraction(w)
        p = system.priority[s]
        lambda_t[s] = 1 - w * (1 - t) ** p
        for k in range(k_needed, MAX_HALVINGS + 1):
            if w * Fraction(1, 2**k) ** p < 1:
                k_needed = k
                break
        else:
            raise ParametrizationError(f"weight {w} of {s!r} too large: no epsilon >= 2^-{MAX_HALVINGS}")
    return DiscountParametrization(lambda_t, Fraction(1, 2**k_needed))


def certify_parametrization(lambda_t: Mapping[str, RationalFunction]) -> DiscountParametrization:
    """Check a user-supplied parametrization and compute a valid ``epsilon``.

    Each ``1 - lambda_t(s)`` must be positive near ``1⁻`` and vanish at ``t = 1``.
    ``epsilon`` starts at 1/2 and is halved until no root of the numerators
    or denominator of ``lambda_t(s)`` and ``1 - lambda_t(s)`` lies in
    ``[1 - epsilon, 1)``; on that interval both then keep their sign near
    ``1⁻``, which puts ``lambda_t(s)`` in ``(0, 1)``.
    """
    k_needed = 1
    notes = []
    for s, lam in lambda_t.items():
        gap = 1 - lam
        sg = sign_near_one(gap)
        if sg.sign <= 0 or sg.vanishing_order < 1:
            raise ParametrizationError(
                f"discount of {s!r} must tend to 1 from below as t -> 1 (1 - lambda: {sg})"
            )
        polys = [p for p in (lam.num, lam.den, gap.num) if not p.is_constant()]
        for k in range(1, MAX_HALVINGS + 1):
            a = 1 - Fraction(1, 2**k)
            if all(count_roots_left_closed(p, a, 1) == 0 for p in polys):
                break
        else:
            raise ParametrizationError(f"no epsilon >= 2^-{MAX_HALVINGS} certifies the discount of {s!r}")
        if k > 1:
            notes.append(f"epsilon shrunk to 2^-{k} for state {s}")
        k_needed = max(k_needed, k)
    return DiscountParametrization(dict(lambda_t), Fraction(1, 2**k_needed), tuple(notes))


def parametrization_for(arena: Arena) -> DiscountParametrization:
    """The document's ``discount`` expressions if every state has one, else the canonical one."""
    if arena.has_discounts():
        return certify_parametrization({s.id: s.discount for s in arena.states})
    if any(s.discount is not None for s in arena.states):
        raise ArenaError("states", "discount must be given on every state or on none")
    return canonical_parametrization(arena.priority_system())


def derive_system(param: DiscountParametrization) -> WeightedPrioritySystem:
    """Priority = order of the zero of ``1 - lambda_t(s)`` at 1, weight = the deflated value there."""
    weight, priority = {}, {}
    for s, lam in param.lambda_t.items():
        gap = 1 - lam
        if gap.is_zero():
            raise ParametrizationError(f"1 - lambda_t({s}) is identically zero")
        m, val = zero_order_at_one(gap.num)
        md, dval = zero_order_at_one(gap.den)
        if md != 0:
            raise ParametrizationError(f"1 - lambda_t({s}) has a pole at t = 1")
        if m < 1:
            raise ParametrizationError(f"1 - lambda_t({s}) does not vanish at t = 1")
        w = val / dval
        if w <= 0:
            raise ParametrizationError(f"derived weight of {s!r} is not positive ({w})")
        weight[s] = w
        priority[s] = m
    return WeightedPrioritySystem(weight, priority)


# -- Blackwell-optimal profiles ------------------------------------------------------


@dataclass(frozen=True)
class CertificateEntry:
    """Comparison near ``1⁻`` of a deviation's value against the candidate's at one state.

    ``order`` is the sign of ``V_deviation(t) - V_candidate(t)``; a Max
    deviation must give ``order <= 0`` and a Min deviation ``order >= 0``.
    """

    state: str
    deviator: str
    deviation: StrategyProfile
    order: int

    @property
    def ok(self) -> bool:
        return self.order <= 0 if self.deviator == MAX else self.order >= 0

    def to_json(self) -> dict:
        return {
            "state": self.state,
            "deviator": self.deviator,
            "deviation": self.deviation.to_json(),
            "order": self.order,
            "ok": self.ok,
        }


@dataclass
class BlackwellResult:
    profile: StrategyProfile
    value_functions: dict[str, RationalFunction]
    certificate: list[CertificateEntry]
    qualifying_profiles: list[StrategyProfile] = field(default_factory=list)
    qualifying_max_choices: dict[str, list[str]] = field(default_factory=dict)
    qualifying_min_choices: dict[str, list[str]] = field(default_factory=dict)
    mode: str = "exact"
    samples: list[dict] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return all(e.ok for e in self.certificate)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "profile": self.profile.to_json(),
            "value_functions": {s: f.to_text() for s, f in self.value_functions.items()},
            "qualifying_max_choices": self.qualifying_max_choices,
            "qualifying_min_choices": self.qualifying_min_choices,
            "qualifying_profiles": [p.to_json() for p in self.qualifying_profiles],
            "certificate": [e.to_json() for e in self.certificate],
            "verified": self.verified,
            "samples": self.samples,
        }


def _deviations(arena: Arena, profile: StrategyProfile):
    for mx in arena.max_strategies():
        if mx != profile.max_choice:
            yield MAX, StrategyProfile(mx, profile.min_choice)
    for mn in arena.min_strategies():
        if mn != profile.min_choice:
            yield MIN, StrategyProfile(profile.max_choice, mn)


def certify_profile(arena: Arena, values, profile: StrategyProfile, first_failure: bool = False):
    """Certificate entries for every unilateral deviation from ``profile``.

    ``values`` is a mapping (or callable) from profiles to rational-function
    value vectors. With ``first_failure`` stop at the first bad entry.
    """
    lookup = values if callable(values) else values.__getitem__
    base = lookup(profile)
    entries = []
    for who, dev in _deviations(arena, profile):
        dv = lookup(dev)
        for s in arena.ids:
            e = CertificateEntry(s, who, dev, compare_near_one(dv[s], base[s]))
            entries.append(e)
            if first_failure and not e.ok:
                return entries
    return entries


def _choices_used(arena: Arena, profiles, controller: str) -> dict[str, list[str]]:
    out = {}
    for s in arena.states:
        if s.controller == controller:
            used = {p.action(s.id) for p in profiles}
            out[s.id] = [label for label in s.labels if label in used]
    return out


def discounted_table(arena: Arena, param: DiscountParametrization, budget: int = DEFAULT_BUDGET) -> dict:
    """Value functions of every profile, in enumeration order."""
    return evaluate_all(arena, lambda p: eval_profile_discounted(arena, param.lambda_t, p), budget)


def blackwell_search_exact(
    arena: Arena,
    param: DiscountParametrization,
    budget: int = DEFAULT_BUDGET,
    table: Mapping | None = None,
) -> BlackwellResult:
    """Enumerate profiles and return the first one optimal for all ``t`` near ``1⁻``.

    A profile qualifies when no unilateral deviation (of either player)
    improves the deviator's value function near ``1⁻`` at any state.
    """
    if table is None:
        table = discounted_table(arena, param, budget)
    qualifying = []
    for p in table:
        entries = certify_profile(arena, table, p, first_failure=True)
        if all(e.ok for e in entries):
            qualifying.append(p)
    if not qualifying:
        raise InvariantViolation("no Blackwell-optimal profile found")
    best = qualifying[0]
    return BlackwellResult(
        profile=best,
        value_functions=dict(table[best]),
        certificate=certify_profile(arena, table, best),
        qualifying_profiles=qualifying,
        qualifying_max_choices=_choices_used(arena, qualifying, MAX),
        qualifying_min_choices=_choices_used(arena, qualifying, MIN),
    )


def sample_point(param: DiscountParametrization, k: int) -> Fraction:
    """``1 - 2**-k`` moved into ``[1 - epsilon/2, 1)`` when it falls outside."""
    t = 1 - Fraction(1, 2**k)
    floor = 1 - param.epsilon / 2
    return max(t, floor)


def blackwell_search_hybrid(
    arena: Arena,
    param: DiscountParametrization,
    k_start: int = 1,
    k_end: int = 16,
    tolerance: float = 1e-10,
    max_iter: int = 200_000,
    budget: int = DEFAULT_BUDGET,
    stable_runs: int = 3,
) -> BlackwellResult:
    """Numeric value iteration at ``t_k = 1 - 2**-k`` until the greedy profile repeats
    ``stable_runs`` times, then an exact certificate for that single candidate.

    Sampling also stops when value iteration exceeds ``max_iter`` (discounts
    close to 1 contract slowly). Falls back to :func:`blackwell_search_exact`
    if no candidate stabilises or the certificate fails.
    """
    if k_start >= k_end:
        raise ValueError("k_start must be below k_end")
    samples = []
    history: list[StrategyProfile] = []
    x = None
    candidate = None
    last_t = None
    for k in range(k_start, k_end + 1):
        t = sample_point(param, k)
        if t == last_t:
            continue
        last_t = t
        try:
            res = solve_discounted(arena, param.at(t), tolerance, max_iter, init=x)
        except ConvergenceError as exc:
            log.info("value iteration too slow at k=%d (%s); stopping sampling", k, exc)
            samples.append({"k": k, "t": str(t), "converged": False})
            break
        x = list(res.values.values())
        history.append(res.profile)
        samples.append(
            {"k": k, "t": str(t), "converged": True, "iterations": res.iterations, "profile": res.profile.to_json()}
        )
        if len(history) >= stable_runs and len(set(history[-stable_runs:])) == 1:
            candidate = history[-1]
            break

    if candidate is not None:
        cache: dict[StrategyProfile, dict] = {}

        def values(p):
            if p not in cache:
                cache[p] = eval_profile_discounted(arena, param.lambda_t, p)
            return cache[p]

        entries = certify_profile(arena, values, candidate)
        if all(e.ok for e in entries):
            return BlackwellResult(
                profile=candidate,
                value_functions=dict(values(candidate)),
                certificate=entries,
                qualifying_profiles=[candidate],
                qualifying_max_choices=_choices_used(arena, [candidate], MAX),
                qualifying_min_choices=_choices_used(arena, [candidate], MIN),
                mode="hybrid",
                samples=samples,
            )
        log.info("candidate %s failed exact certification; falling back to enumeration", candidate)

    result = blackwell_search_exact(arena, param, budget)
    result.mode = "hybrid-fallback"
    result.samples = samples
    return result


# -- limit check ---------------------------------------------------------------------------


def limit_at_one(f: RationalFunction) -> Fraction:
    """``lim_{t -> 1⁻} f(t)``; raises if ``f`` has a pole at 1."""
    if f.is_zero():
        return Fraction(0)
    mn, vn = zero_order_at_one(f.num)
    md, vd = zero_order_at_one(f.den)
    if mn < md:
        raise ValueError(f"{f} has a pole at t = 1")
    return vn / vd if mn == md else Fraction(0)


@dataclass
class LimitReport:
    pmp_values: dict[str, Fraction]
    pmp_profile: StrategyProfile
    blackwell_profile: StrategyProfile
    blackwell_pmp_values: dict[str, Fraction]
    equality: dict[str, bool]
    limits: dict[str, Fraction]
    limit_equality: dict[str, bool]
    profile_limits: list[dict]
    numeric: list[dict]
    system: WeightedPrioritySystem
    epsilon: Fraction

    @property
    def profile_limits_ok(self) -> bool:
        return all(e["ok"] for e in self.profile_limits)

    @property
    def ok(self) -> bool:
        return all(self.equality.values()) and all(self.limit_equality.values()) and self.profile_limits_ok

    @property
    def max_numeric_deviation(self) -> float:
        devs = [row["max_deviation"] for row in self.numeric if "max_deviation" in row]
        return max(devs) if devs else 0.0

    def final_deviation(self) -> float:
        """Deviation from the priority value at the sample closest to 1."""
        rows = [row for row in self.numeric if "max_deviation" in row]
        return rows[-1]["max_deviation"] if rows else 0.0

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "epsilon": str(self.epsilon),
            "derived_system": {
                "weight": {s: str(w) for s, w in self.system.weight.items()},
                "priority": dict(self.system.priority),
            },
            "pmp_values": {s: str(v) for s, v in self.pmp_values.items()},
            "pmp_profile": self.pmp_profile.to_json(),
            "blackwell_profile": self.blackwell_profile.to_json(),
            "blackwell_pmp_values": {s: str(v) for s, v in self.blackwell_pmp_values.items()},
            "equality": self.equality,
            "value_limits": {s: str(v) for s, v in self.limits.items()},
            "limit_equality": self.limit_equality,
            "profile_limits_ok": self.profile_limits_ok,
            "profile_limits": self.profile_limits,
            "numeric": self.numeric,
            "max_numeric_deviation": self.max_numeric_deviation,
        }


def limit_check(
    arena: Arena,
    param: DiscountParametrization,
    system_override: WeightedPrioritySystem | None = None,
    kmin: int = 4,
    kmax: int = 20,
    budget: int = DEFAULT_BUDGET,
    limit_profiles: Sequence[StrategyProfile] | None = None,
) -> LimitReport:
    """Compare the parametrized discounted game near ``t = 1`` with the derived priority game.

    Checks, per state: the Blackwell profile's priority mean payoff equals the
    brute-force game value; the Blackwell value function tends to that value;
    every profile's (or each of ``limit_profiles``') discounted value function
    tends to its own priority mean payoff; and records the exact discounted
    game value at ``t = 1 - 2**-k`` for ``k = kmin..kmax``.
    """
    system = system_override or derive_system(param)
    pmp = solve_pmp_bruteforce(arena, system, budget)
    table = discounted_table(arena, param, budget)
    bw = blackwell_search_exact(arena, param, budget, table=table)
    bw_pmp = eval_profile_pmp(arena, bw.profile, system)
    equality = {s: bw_pmp[s] == pmp.values[s] for s in arena.ids}
    limits = {s: limit_at_one(f) for s, f in bw.value_functions.items()}
    limit_equality = {s: limits[s] == pmp.values[s] for s in arena.ids}

    profile_limits = []
    for p in limit_profiles if limit_profiles is not None else table:
        vals = table[p] if p in table else eval_profile_discounted(arena, param.lambda_t, p)
        target = eval_profile_pmp(arena, p, system)
        for s in arena.ids:
            sg = sign_near_one(vals[s] - target[s])
            profile_limits.append(
                {
                    "profile": p.to_json(),
                    "state": s,
                    "pmp_value": str(target[s]),
                    "sign": sg.sign,
                    "vanishing_order": sg.vanishing_order,
                    "ok": sg.sign == 0 or sg.vanishing_order >= 1,
                }
            )

    numeric = []
    for k in range(kmin, kmax + 1):
        t = 1 - Fraction(1, 2**k)
        if t < 1 - param.epsilon:
            numeric.append({"k": k, "t": str(t), "skipped": "outside the certified interval"})
            continue
        at_t = {p: {s: f(t) for s, f in vals.items()} for p, vals in table.items()}
        game = maximin_values(arena, at_t)
        dev = max(abs(float(game[s] - pmp.values[s])) for s in arena.ids)
        numeric.append(
            {
                "k": k,
                "t": str(t),
                "game_values": {s: float(v) for s, v in game.items()},
                "blackwell_values": {s: float(at_t[bw.profile][s]) for s in arena.ids},
                "max_deviation": dev,
            }
        )
    return LimitReport(
        pmp_values=pmp.values,
        pmp_profile=pmp.profile,
        blackwell_profile=bw.profile,
        blackwell_pmp_values=bw_pmp,
        equality=equality,
        limits=limits,
        limit_equality=limit_equality,
        profile_limits=profile_limits,
        numeric=numeric,
        system=system,
        epsilon=param.epsilon,
    )


__all__ = [
    "BlackwellResult",
    "BudgetExceeded",
    "CertificateEntry",
    "DiscountParametrization",
    "LimitReport",
    "ParametrizationError",
    "blackwell_search_exact",
    "blackwell_search_hybrid",
    "canonical_parametrization",
    "certify_parametrization",
    "derive_system",
    "limit_at_one",
    "limit_check",
    "parametrization_for",
]
