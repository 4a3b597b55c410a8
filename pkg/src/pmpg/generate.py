"""Seeded random arenas for property tests and the acceptance suite."""

from __future__ import annotations

import random
from fractions import Fraction

from .arena import MAX, MIN, Action, Arena, State

WEIGHTS = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))


def random_distribution(rng: random.Random, targets: list[str], max_support: int = 2, denom: int = 4):
    """Random distribution over up to ``max_support`` distinct targets, probabilities in ``1/denom`` steps."""
    k = rng.randint(1, min(max_support, len(targets)))
    chosen = rng.sample(targets, k)
    if k == 1:
        return ((chosen[0], Fraction(1)),)
    cuts = sorted(rng.sample(range(1, denom), k - 1))
    bounds = [0] + cuts + [denom]
    return tuple((q, Fraction(bounds[i + 1] - bounds[i], denom)) for i, q in enumerate(chosen))


def random_arena(
    rng: random.Random,
    n_states: int | None = None,
    max_states: int = 4,
    max_actions: int = 2,
    max_priority: int = 3,
    deterministic: bool = False,
    reward_range: tuple[int, int] = (-3, 3),
    reward_denom: int = 2,
    controllers: str | None = None,
) -> Arena:
    """Random arena with weights in :data:`WEIGHTS` and priorities ``1..max_priority``.

    ``controllers`` may force ``"max"`` or ``"min"`` on every state.
    """
    n = n_states or rng.randint(1, max_states)
    ids = [f"s{i}" for i in range(n)]
    states = []
    for sid in ids:
        n_actions = rng.randint(1, max_actions)
        actions = []
        for j in range(n_actions):
            if deterministic:
                succ = ((rng.choice(ids), Fraction(1)),)
            else:
                succ = random_distribution(rng, ids)
            actions.append(Action(f"a{j}", succ))
        controller = controllers or rng.choice((MAX, MIN))
        reward = Fraction(rng.randint(*reward_range), rng.randint(1, reward_denom))
        states.append(
            State(
                sid,
                controller,
                reward,
                tuple(actions),
                weight=rng.choice(WEIGHTS),
                priority=rng.randint(1, max_priority),
            )
        )
    return Arena(tuple(states))


def random_discounts(rng: random.Random, arena: Arena, low=Fraction(1, 4), high=Fraction(15, 16), denom: int = 16):
    """Constant discounts on the grid ``k/denom`` within ``[low, high]``."""
    lo = int(low * denom)
    hi = int(high * denom)
    return {s: Fraction(rng.randint(lo, hi), denom) for s in arena.ids}


def random_profile(rng: random.Random, arena: Arena):
    return arena.profile({s.id: rng.choice(s.labels) for s in arena.states})
