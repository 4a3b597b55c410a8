"""Multi-discounted games: play payoffs, exact profile evaluation, value iteration, A* transform."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .algebra import RationalFunction, solve_linear
from .arena import (
    MAX,
    Action,
    Arena,
    ArenaError,
    State,
    StrategyProfile,
    enumerate_profiles,
    induced_chain,
)

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Value iteration hit ``max_iter``; ``values`` holds the last iterate."""

    def __init__(self, values: np.ndarray, iterations: int, gap: float):
        self.values = values
        self.iterations = iterations
        self.gap = gap
        super().__init__(f"value iteration did not converge in {iterations} iterations (gap {gap:.3g})")


def check_discounts(arena: Arena, discounts: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Validate a constant discount map: one entry per state, each in ``[0, 1)``."""
    if set(discounts) != set(arena.ids):
        raise ValueError("discount map must have exactly one entry per state")
    out = {}
    for s in arena.ids:
        lam = Fraction(discounts[s])
        if not 0 <= lam < 1:
            raise ValueError(f"discount of {s!r} must lie in [0, 1), got {lam}")
        out[s] = lam
    return out


def _lambda_map(discounts) -> Mapping:
    # a DiscountParametrization carries its map in ``lambda_t``
    return getattr(discounts, "lambda_t", discounts)


def _check_play(arena: Arena, play: Sequence[str], actions: Sequence[str] | None) -> None:
    if not play:
        raise ValueError("empty play")
    for i, s in enumerate(play):
        if s not in arena.index:
            raise ValueError(f"play step {i}: unknown state {s!r}")
    if actions is not None and len(actions) < len(play) - 1:
        raise ValueError("need one action per transition of the play")
    for i in range(len(play) - 1):
        state = arena.state(play[i])
        nxt = play[i + 1]
        candidates = [state.action(actions[i])] if actions is not None else state.actions
        if not any(p > 0 for a in candidates for q, p in a.successors if q == nxt):
            raise ValueError(f"play step {i}: illegal move {play[i]!r} -> {nxt!r}")


def discounted_payoff_of_play(
    play: Sequence[str],
    arena: Arena,
    discounts: Mapping[str, Fraction],
    actions: Sequence[str] | None = None,
) -> Fraction:
    """Partial sum over ``play`` of ``lambda(s_0)...lambda(s_{i-1}) (1 - lambda(s_i)) r(s_i)``.

    ``actions``, when given, are the actions taken between consecutive
    states and are checked for legality too.
    """
    _check_play(arena, play, actions)
    total = Fraction(0)
    prefix = Fraction(1)
    for s in play:
        lam = Fraction(discounts[s])
        total += prefix * (1 - lam) * arena.state(s).reward
        prefix *= lam
        if prefix == 0:
            break
    return total


def eval_profile_discounted(arena: Arena, discounts, profile: StrategyProfile) -> dict:
    """Exact expected discounted payoff from every state under ``profile``.

    ``discounts`` maps states to rationals (result over ``Fraction``) or to
    rational functions of ``t`` such as a parametrization's ``lambda_t``
    (result over ``RationalFunction``). Solves ``(I - M) x = v`` with
    ``M[s, s'] = lambda(s) P[s, s']`` and ``v[s] = (1 - lambda(s)) r(s)``.
    """
    lam_map = _lambda_map(discounts)
    P = induced_chain(arena, profile)
    ids = arena.ids
    lam = [lam_map[s] for s in ids]
    n = len(ids)
    A = []
    for i in range(n):
        row = []
        for j in range(n):
            m = lam[i] * P[i][j] if P[i][j] else 0
            row.append((1 if i == j else 0) - m)
        A.append(row)
    v = [(1 - lam[i]) * arena.states[i].reward for i in range(n)]
    x = solve_linear(A, v)
    return dict(zip(ids, x))


# -- value iteration ------------------------------------------------------------------


@dataclass
class DiscountedSolveResult:
    values: dict[str, float]
    profile: StrategyProfile
    residual: float
    iterations: int


class ShapleyOperator:
    """One-step operator ``F(x)[s] = opt_a [(1 - lambda(s)) r(s) + lambda(s) sum_s' delta(s,a)(s') x[s']]``."""

    def __init__(self, arena: Arena, discounts: Mapping[str, Fraction]):
        discounts = check_discounts(arena, discounts)
        self.arena = arena
        n = len(arena)
        rows, const, gain, owner = [], [], [], []
        for i, s in enumerate(arena.states):
            lam = float(discounts[s.id])
            for a in s.actions:
                row = np.zeros(n)
                for q, p in a.successors:
                    row[arena.index[q]] += float(p)
                rows.append(row)
                const.append((1 - lam) * float(s.reward))
                gain.append(lam)
                owner.append(i)
        self.P = np.array(rows)
        self.const = np.array(const)
        self.gain = np.array(gain)
        self.owner = np.array(owner)
        self.starts = np.searchsorted(self.owner, np.arange(n))
        self.is_max = np.array([s.controller == MAX for s in arena.states])
        self.lambda_max = max(float(v) for v in discounts.values())

    def q_values(self, x: np.ndarray) -> np.ndarray:
        return self.const + self.gain * (self.P @ x)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        q = self.q_values(x)
        hi = np.maximum.reduceat(q, self.starts)
        lo = np.minimum.reduceat(q, self.starts)
        return np.where(self.is_max, hi, lo)

    def greedy(self, x: np.ndarray, rtol: float = 1e-12) -> StrategyProfile:
        """Greedy profile; near-ties go to the first action in document order."""
        q = self.q_values(x)
        choices = {}
        k = 0
        for i, s in enumerate(self.arena.states):
            qs = q[k : k + len(s.actions)]
            best = qs.max() if self.is_max[i] else qs.min()
            window = rtol * max(1.0, abs(best))
            ok = np.abs(qs - best) <= window
            choices[s.id] = s.actions[int(np.argmax(ok))].label
            k += len(s.actions)
        return self.arena.profile(choices)


def solve_discounted(
    arena: Arena,
    discounts: Mapping[str, Fraction],
    tolerance: float = 1e-9,
    max_iter: int = 1_000_000,
    init: np.ndarray | None = None,
) -> DiscountedSolveResult:
    """Value iteration with per-state discount factors.

    Starts from ``init`` or else the reward vector. Stops once the sup-norm
    step is at most ``tolerance * (1 - lmax) / lmax``, which bounds the
    distance to the true value by ``tolerance``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    F = ShapleyOperator(arena, discounts)
    lmax = F.lambda_max
    if init is None:
        # start from the rewards: exact when every state's reward is its value
        x = np.array([float(s.reward) for s in arena.states])
    else:
        x = np.asarray(init, dtype=float).copy()
    threshold = tolerance * (1 - lmax) / lmax if lmax > 0 else np.inf
    gap = np.inf
    for it in range(1, max_iter + 1):
        nxt = F(x)
        gap = float(np.max(np.abs(nxt - x)))
        x = nxt
        if gap <= threshold:
            break
    else:
        raise ConvergenceError(x, max_iter, gap)
    log.debug("value iteration converged after %d iterations (gap %.3g)", it, gap)
    return DiscountedSolveResult(dict(zip(arena.ids, x.tolist())), F.greedy(x), gap, it)


def saddle_violation(arena: Arena, discounts, profile: StrategyProfile) -> Fraction:
    """Largest gain any unilateral memoryless deviation achieves over ``profile`` (exact).

    Zero means ``profile`` is a saddle point among deterministic memoryless
    profiles at these constant discounts.
    """
    base = eval_profile_discounted(arena, discounts, profile)
    worst = Fraction(0)
    for other in enumerate_profiles(arena):
        if other.min_choice == profile.min_choice and other.max_choice != profile.max_choice:
            vals = eval_profile_discounted(arena, discounts, other)
            worst = max(worst, max(vals[s] - base[s] for s in arena.ids))
        elif other.max_choice == profile.max_choice and other.min_choice != profile.min_choice:
            vals = eval_profile_discounted(arena, discounts, other)
            worst = max(worst, max(base[s] - vals[s] for s in arena.ids))
    return worst


def improvement_gap(arena: Arena, discounts, profile: StrategyProfile, values: Mapping[str, Fraction]) -> Fraction:
    """Largest exact one-step gain of switching a single action against ``values``.

    With ``values`` the exact value of ``profile``, zero is equivalent to
    ``profile`` being a memoryless saddle point, and a gap ``g`` bounds any
    unilateral deviation gain by ``g / (1 - lambda_max)``.
    """
    discounts = check_discounts(arena, discounts)
    worst = Fraction(0)
    for s in arena.states:
        lam = discounts[s.id]
        for a in s.actions:
            q = (1 - lam) * s.reward + lam * sum((p * values[t] for t, p in a.successors), Fraction(0))
            gain = q - values[s.id] if s.controller == MAX else values[s.id] - q
            worst = max(worst, gain)
    return worst


# -- stopping-game transform -------------------------------------------------------------


def star_name(arena: Arena, state_id: str) -> str:
    """Name of the absorbing copy of ``state_id``: ``id*``, padded with ``*`` until unique."""
    return _star_names(arena)[state_id]


def _star_names(arena: Arena) -> dict[str, str]:
    taken = set(arena.ids)
    names = {}
    for s in arena.ids:
        name = f"{s}*"
        while name in taken:
            name += "*"
        taken.add(name)
        names[s] = name
    return names


def star_transform(arena: Arena, discounts: Mapping[str, Fraction]) -> Arena:
    """Fold discounting into transitions: each state ``s`` gets an absorbing copy ``s*``.

    Action ``a`` at ``s`` moves to ``s'`` with probability
    ``lambda(s) delta(s,a)(s')`` and to ``s*`` with ``1 - lambda(s)``;
    ``s*`` has reward ``r(s)`` and a single self-looping action ``star``.
    Every weight and priority is set to 1.
    """
    discounts = check_discounts(arena, discounts)
    originals, stars = [], []
    names = _star_names(arena)
    for s in arena.states:
        lam = discounts[s.id]
        star = names[s.id]
        actions = []
        for a in s.actions:
            succ = [(q, lam * p) for q, p in a.successors if lam * p != 0]
            succ.append((star, 1 - lam))
            actions.append(Action(a.label, tuple(succ)))
        originals.append(
            replace(s, actions=tuple(actions), weight=Fraction(1), priority=1, discount=None)
        )
        stars.append(
            State(star, MAX, s.reward, (Action("star", ((star, Fraction(1)),)),), Fraction(1), 1)
        )
    return Arena(tuple(originals + stars), arena.description)


def discounts_at(param, t: Fraction) -> dict[str, Fraction]:
    """Constant discounts obtained by evaluating a parametrization at ``t``."""
    out = {}
    for s, lam in _lambda_map(param).items():
        value = lam(Fraction(t)) if isinstance(lam, RationalFunction) else Fraction(lam)
        out[s] = value
    return out


def constant_discounts(arena: Arena) -> dict[str, Fraction]:
    """Discount factors written in the document, which must not depend on ``t``."""
    out = {}
    for i, s in enumerate(arena.states):
        if s.discount is None:
            raise ArenaError(f"states[{i}].discount", "missing discount")
        if not s.discount.is_constant():
            raise ArenaError(f"states[{i}].discount", "discount depends on t; pass a value of t")
        out[s.id] = s.discount.constant_value()
    return check_discounts(arena, out)
