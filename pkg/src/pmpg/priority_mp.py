"""Priority mean-payoff games: play payoffs, exact profile values, brute-force solver."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import solve_linear
from .arena import (
    MAX,
    Arena,
    StrategyProfile,
    WeightedPrioritySystem,
    enumerate_profiles,
    induced_chain,
)
from .discounted import _check_play


class BudgetExceeded(RuntimeError):
    """The number of profiles to enumerate is above the configured budget."""


class InvariantViolation(AssertionError):
    """A property guaranteed by theory failed to hold; indicates a bug."""


class _Undefined:
    """The indefinite value 0/0 of a prefix average (never a number)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()

DEFAULT_BUDGET = 1 << 16


def pmp_payoff_of_play_prefix(
    play: Sequence[str],
    arena: Arena,
    system: WeightedPrioritySystem,
    assumed_priority: int,
    actions: Sequence[str] | None = None,
):
    """Weighted average reward over the states of ``play`` whose priority is ``assumed_priority``.

    Returns :data:`UNDEFINED` if no such state occurs.
    """
    _check_play(arena, play, actions)
    num = Fraction(0)
    den = Fraction(0)
    for s in play:
        if system.priority[s] == assumed_priority:
            w = Fraction(system.weight[s])
            num += w * arena.state(s).reward
            den += w
    if den == 0:
        return UNDEFINED
    return num / den


# -- Markov chain structure ----------------------------------------------------------


def _support(P: list[list[Fraction]]) -> list[list[int]]:
    return [[j for j, p in enumerate(row) if p > 0] for row in P]


def _reachable(succ: list[list[int]], sources) -> list[int]:
    seen = set(sources)
    stack = list(sources)
    while stack:
        u = stack.pop()
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return sorted(seen)


def strongly_connected_components(succ: list[list[int]], nodes: Sequence[int]) -> list[list[int]]:
    """Tarjan's algorithm restricted to ``nodes`` (iterative)."""
    allowed = set(nodes)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []

    def visit(u: int) -> None:
        index[u] = low[u] = len(index)
        stack.append(u)
        on_stack.add(u)

    for root in nodes:
        if root in index:
            continue
        visit(root)
        work = [(root, 0)]
        while work:
            u, i = work[-1]
            targets = succ[u]
            if i < len(targets):
                work[-1] = (u, i + 1)
                v = targets[i]
                if v not in allowed:
                    continue
                if v not in index:
                    visit(v)
                    work.append((v, 0))
                elif v in on_stack:
                    low[u] = min(low[u], index[v])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
            if low[u] == index[u]:
                comp = []
                while True:
                    v = stack.pop()
                    on_stack.discard(v)
                    comp.append(v)
                    if v == u:
                        break
                comps.append(sorted(comp))
    return comps


def bottom_components(succ: list[list[int]], nodes: Sequence[int]) -> list[list[int]]:
    """Closed SCCs (no edge leaves the component), ordered by smallest member."""
    bottoms = []
    for comp in strongly_connected_components(succ, nodes):
        members = set(comp)
        if all(v in members for u in comp for v in succ[u]):
            bottoms.append(comp)
    return sorted(bottoms)


def stationary_distribution(P: list[list[Fraction]], cls: Sequence[int]) -> dict[int, Fraction]:
    """Unique invariant distribution of the irreducible chain ``P`` restricted to ``cls``."""
    k = len(cls)
    # unknowns xi[c]; equations xi (P - I) = 0 for all but the last column, plus sum = 1
    A = []
    b = []
    for col in range(k - 1):
        A.append([P[cls[r]][cls[col]] - (1 if r == col else 0) for r in range(k)])
        b.append(Fraction(0))
    A.append([Fraction(1)] * k)
    b.append(Fraction(1))
    xi = solve_linear(A, b)
    return dict(zip(cls, xi))


def absorption_probabilities(
    P: list[list[Fraction]], classes: list[list[int]], nodes: Sequence[int]
) -> dict[int, list[Fraction]]:
    """Probability, from each node, of ending in each recurrent class."""
    recurrent = {u: c for c, cls in enumerate(classes) for u in cls}
    transient = [u for u in nodes if u not in recurrent]
    out: dict[int, list[Fraction]] = {}
    for u, c in recurrent.items():
        row = [Fraction(0)] * len(classes)
        row[c] = Fraction(1)
        out[u] = row
    if not transient:
        return out
    pos = {u: i for i, u in enumerate(transient)}
    A = [
        [(1 if i == j else 0) - P[u][v] for j, v in enumerate(transient)]
        for i, u in enumerate(transient)
    ]
    columns = []
    for cls in classes:
        rhs = [sum((P[u][v] for v in cls), Fraction(0)) for u in transient]
        columns.append(solve_linear(A, rhs))
    for u in transient:
        out[u] = [col[pos[u]] for col in columns]
    return out


@dataclass
class ChainAnalysis:
    """Recurrent structure of the chain induced by a profile.

    ``absorption`` maps each reachable state to its probability of ending in
    each class (same order as ``recurrent_classes``).
    """

    reachable: frozenset[str]
    recurrent_classes: list[tuple[str, ...]]
    class_priority: list[int]
    stationary: list[dict[str, Fraction]]
    absorption: dict[str, list[Fraction]] = field(default_factory=dict)

    def class_value(self, c: int, arena: Arena, system: WeightedPrioritySystem) -> Fraction:
        """Stationary average of ``w r`` over the class's minimal-priority states."""
        alpha = self.class_priority[c]
        num = Fraction(0)
        den = Fraction(0)
        for q, xi in self.stationary[c].items():
            if system.priority[q] == alpha:
                w = Fraction(system.weight[q])
                num += xi * w * arena.state(q).reward
                den += xi * w
        if den <= 0:
            raise InvariantViolation(f"empty priority filter on class {self.recurrent_classes[c]}")
        return num / den


def _analyze(arena: Arena, P, sources, system: WeightedPrioritySystem) -> ChainAnalysis:
    ids = arena.ids
    succ = _support(P)
    nodes = _reachable(succ, sources)
    classes = bottom_components(succ, nodes)
    stationary = [
        {ids[u]: x for u, x in stationary_distribution(P, cls).items()} for cls in classes
    ]
    absorption = {
        ids[u]: row for u, row in absorption_probabilities(P, classes, nodes).items()
    }
    return ChainAnalysis(
        reachable=frozenset(ids[u] for u in nodes),
        recurrent_classes=[tuple(ids[u] for u in cls) for cls in classes],
        class_priority=[min(system.priority[ids[u]] for u in cls) for cls in classes],
        stationary=stationary,
        absorption=absorption,
    )


def analyze_chain(
    arena: Arena, profile: StrategyProfile, initial: str | None, system: WeightedPrioritySystem
) -> ChainAnalysis:
    """Recurrent classes, stationary laws and absorption probabilities from ``initial``.

    ``initial=None`` analyses the whole state space.
    """
    P = induced_chain(arena, profile)
    if initial is None:
        sources = range(len(arena))
    else:
        sources = [arena.index[initial]]
    return _analyze(arena, P, sources, system)


def eval_profile_pmp(
    arena: Arena, profile: StrategyProfile, system: WeightedPrioritySystem
) -> dict[str, Fraction]:
    """Exact expected priority mean payoff from every state under ``profile``."""
    ca = analyze_chain(arena, profile, None, system)
    class_values = [ca.class_value(c, arena, system) for c in range(len(ca.recurrent_classes))]
    return {
        s: sum((a * v for a, v in zip(ca.absorption[s], class_values)), Fraction(0))
        for s in arena.ids
    }


# -- brute-force solver --------------------------------------------------------------


@dataclass
class PmpSolveResult:
    values: dict[str, Fraction]
    profile: StrategyProfile
    saddle_profiles: list[StrategyProfile]

    def optimal_max_choices(self, arena: Arena) -> dict[str, list[str]]:
        """Per Max state, the actions used by some saddle profile (document order)."""
        return _choices_used(arena, self.saddle_profiles, MAX)

    def optimal_min_choices(self, arena: Arena) -> dict[str, list[str]]:
        return _choices_used(arena, self.saddle_profiles, "min")


def _choices_used(arena: Arena, profiles, controller: str) -> dict[str, list[str]]:
    out = {}
    for s in arena.states:
        if s.controller != controller:
            continue
        used = {p.action(s.id) for p in profiles}
        out[s.id] = [label for label in s.labels if label in used]
    return out


def evaluate_all(arena: Arena, evaluator, budget: int = DEFAULT_BUDGET) -> dict[StrategyProfile, dict]:
    """Evaluate every profile in enumeration order, refusing above ``budget``."""
    count = arena.profile_count()
    if count > budget:
        raise BudgetExceeded(f"{count} profiles exceed the enumeration budget {budget}")
    return {p: evaluator(p) for p in enumerate_profiles(arena)}


def maximin_values(arena: Arena, table: Mapping[StrategyProfile, Mapping[str, object]]) -> dict:
    """Per state: max over Max strategies of min over Min strategies of the profile value."""
    by_max: dict = {}
    for p, vals in table.items():
        by_max.setdefault(p.max_choice, []).append(vals)
    return {
        s: max(min(v[s] for v in group) for group in by_max.values())
        for s in arena.ids
    }


def saddle_profiles(arena: Arena, table: Mapping[StrategyProfile, Mapping[str, object]]) -> list[StrategyProfile]:
    """Profiles from which no unilateral deviation helps the deviator at any state."""
    by_min: dict = {}
    by_max: dict = {}
    for p, vals in table.items():
        by_min.setdefault(p.min_choice, []).append(vals)
        by_max.setdefault(p.max_choice, []).append(vals)
    out = []
    ids = arena.ids
    for p, vals in table.items():
        # Max deviations keep Min's part; Min deviations keep Max's part
        if any(alt[s] > vals[s] for alt in by_min[p.min_choice] for s in ids):
            continue
        if any(alt[s] < vals[s] for alt in by_max[p.max_choice] for s in ids):
            continue
        out.append(p)
    return out


def solve_pmp_bruteforce(
    arena: Arena, system: WeightedPrioritySystem, budget: int = DEFAULT_BUDGET
) -> PmpSolveResult:
    """Values and a verified memoryless saddle profile by full enumeration."""
    system.check_keys(arena)
    table = evaluate_all(arena, lambda p: eval_profile_pmp(arena, p, system), budget)
    values = maximin_values(arena, table)
    saddles = saddle_profiles(arena, table)
    if not saddles:
        raise InvariantViolation("no deterministic memoryless saddle profile exists")
    for p in saddles:
        if table[p] != values:
            raise InvariantViolation(f"saddle profile {p} does not attain the maximin value")
    return PmpSolveResult(values, saddles[0], saddles)


# -- parity games ------------------------------------------------------------------------


def parity_encoding(priorities: Mapping[str, int]) -> tuple[dict[str, Fraction], WeightedPrioritySystem]:
    """Rewards and weights turning a parity condition into a priority mean payoff.

    Weight 1 everywhere, reward 1 on even priorities and 0 on odd ones.
    """
    rewards = {s: Fraction(1 if p % 2 == 0 else 0) for s, p in priorities.items()}
    system = WeightedPrioritySystem({s: Fraction(1) for s in priorities}, dict(priorities))
    return rewards, system
