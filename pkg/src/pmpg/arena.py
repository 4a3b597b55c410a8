"""Arena data model, validation and the JSON arena document format."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

from .algebra import ParseError, RationalFunction, parse_rational_function

MAX = "max"
MIN = "min"

_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


class ArenaError(ValueError):
    """Invalid arena document; ``location`` is a JSON path like ``states[1].actions[0]``."""

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}" if location else message)


def parse_rational(value: Any, location: str = "") -> Fraction:
    """Parse ``"p/q"``, ``"n"`` or a JSON integer into an exact rational."""
    if isinstance(value, bool):
        raise ArenaError(location, f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str) and _RATIONAL.match(value):
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise ArenaError(location, f"zero denominator in {value!r}") from None
    raise ArenaError(location, f"expected a rational string 'p/q' or 'n', got {value!r}")


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class Action:
    label: str
    successors: tuple[tuple[str, Fraction], ...]


@dataclass(frozen=True)
class State:
    id: str
    controller: str
    reward: Fraction
    actions: tuple[Action, ...]
    weight: Fraction | None = None
    priority: int | None = None
    discount: RationalFunction | None = None

    def action(self, label: str) -> Action:
        for a in self.actions:
            if a.label == label:
                return a
        raise KeyError(f"state {self.id!r} has no action {label!r}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a.label for a in self.actions)


@dataclass(frozen=True)
class WeightedPrioritySystem:
    """Positive weight and priority (>= 1) per state; lower priority is more significant."""

    weight: Mapping[str, Fraction]
    priority: Mapping[str, int]

    def __post_init__(self):
        if set(self.weight) != set(self.priority):
            raise ValueError("weight and priority maps must have the same keys")
        for s, w in self.weight.items():
            if not Fraction(w) > 0:
                raise ValueError(f"weight of {s!r} must be positive, got {w}")
        for s, p in self.priority.items():
            if not (isinstance(p, int) and p >= 1):
                raise ValueError(f"priority of {s!r} must be an integer >= 1, got {p!r}")

    def check_keys(self, arena: Arena) -> None:
        if set(self.weight) != set(arena.ids):
            raise ValueError("weighted priority system is not keyed by the arena's states")


@dataclass(frozen=True, order=True)
class StrategyProfile:
    """Deterministic memoryless strategies of both players.

    Choices are stored as ``(state id, action label)`` pairs in arena order,
    so profiles are hashable and compare in enumeration order only when
    built from the same arena.
    """

    max_choice: tuple[tuple[str, str], ...]
    min_choice: tuple[tuple[str, str], ...]

    @cached_property
    def _lookup(self) -> dict[str, str]:
        return dict(self.max_choice + self.min_choice)

    def action(self, state_id: str) -> str:
        return self._lookup[state_id]

    def as_dict(self) -> dict[str, str]:
        return dict(self._lookup)

    def to_json(self) -> dict[str, dict[str, str]]:
        return {"max": dict(self.max_choice), "min": dict(self.min_choice)}

    def with_max(self, other: StrategyProfile) -> StrategyProfile:
        """This profile with Max's part taken from ``other``."""
        return StrategyProfile(other.max_choice, self.min_choice)

    def with_min(self, other: StrategyProfile) -> StrategyProfile:
        return StrategyProfile(self.max_choice, other.min_choice)

    def __str__(self) -> str:
        mx = ", ".join(f"{s}:{a}" for s, a in self.max_choice)
        mn = ", ".join(f"{s}:{a}" for s, a in self.min_choice)
        return f"Max({mx}) Min({mn})"


@dataclass(frozen=True)
class Arena:
    states: tuple[State, ...]
    description: str | None = field(default=None, compare=False)

    @cached_property
    def index(self) -> dict[str, int]:
        return {s.id: i for i, s in enumerate(self.states)}

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.states]

    def __len__(self) -> int:
        return len(self.states)

    def state(self, state_id: str) -> State:
        return self.states[self.index[state_id]]

    @property
    def max_states(self) -> list[State]:
        return [s for s in self.states if s.controller == MAX]

    @property
    def min_states(self) -> list[State]:
        return [s for s in self.states if s.controller == MIN]

    def profile_count(self) -> int:
        n = 1
        for s in self.states:
            n *= len(s.actions)
        return n

    def rewards(self) -> dict[str, Fraction]:
        return {s.id: s.reward for s in self.states}

    def with_rewards(self, rewards: Mapping[str, Fraction]) -> Arena:
        return Arena(tuple(replace(s, reward=Fraction(rewards[s.id])) for s in self.states), self.description)

    def with_system(self, system: WeightedPrioritySystem) -> Arena:
        return Arena(
            tuple(replace(s, weight=Fraction(system.weight[s.id]), priority=system.priority[s.id]) for s in self.states),
            self.description,
        )

    def priority_system(self) -> WeightedPrioritySystem:
        """Weights and priorities from the document; both must be present on every state."""
        missing = [s.id for s in self.states if s.weight is None or s.priority is None]
        if missing:
            raise ArenaError("states", f"weight/priority missing on {', '.join(missing)}")
        return WeightedPrioritySystem(
            {s.id: s.weight for s in self.states}, {s.id: s.priority for s in self.states}
        )

    def has_discounts(self) -> bool:
        return all(s.discount is not None for s in self.states)

    def profile(self, choices: Mapping[str, str]) -> StrategyProfile:
        """Build and validate a profile from a flat ``{state: label}`` map."""
        unknown = set(choices) - set(self.index)
        if unknown:
            raise ArenaError("profile", f"unknown states {sorted(unknown)}")
        mx, mn = [], []
        for s in self.states:
            if s.id in choices:
                label = choices[s.id]
            elif len(s.actions) == 1:
                label = s.actions[0].label
            else:
                raise ArenaError(f"profile.{s.id}", "no action chosen for controlled state")
            if label not in s.labels:
                raise ArenaError(f"profile.{s.id}", f"unknown action {label!r}")
            (mx if s.controller == MAX else mn).append((s.id, label))
        return StrategyProfile(tuple(mx), tuple(mn))

    def max_strategies(self) -> list[tuple[tuple[str, str], ...]]:
        return _choices(self.max_states)

    def min_strategies(self) -> list[tuple[tuple[str, str], ...]]:
        return _choices(self.min_states)


def _choices(states: Sequence[State]) -> list[tuple[tuple[str, str], ...]]:
    return [
        tuple(zip((s.id for s in states), labels))
        for labels in itertools.product(*(s.labels for s in states))
    ]


# -- operations ------------------------------------------------------------------


def enumerate_profiles(arena: Arena) -> Iterator[StrategyProfile]:
    """Every deterministic memoryless profile, lexicographic in (state order, action order)."""
    for labels in itertools.product(*(s.labels for s in arena.states)):
        mx, mn = [], []
        for s, label in zip(arena.states, labels):
            (mx if s.controller == MAX else mn).append((s.id, label))
        yield StrategyProfile(tuple(mx), tuple(mn))


def induced_chain(arena: Arena, profile: StrategyProfile) -> list[list[Fraction]]:
    """Transition matrix of the Markov chain obtained by fixing ``profile``."""
    n = len(arena)
    P = [[Fraction(0)] * n for _ in range(n)]
    for i, s in enumerate(arena.states):
        for target, prob in s.action(profile.action(s.id)).successors:
            P[i][arena.index[target]] += prob
    return P


# -- document format --------------------------------------------------------------


def validate(doc: Any) -> Arena:
    """Check a parsed arena document and build the :class:`Arena`.

    Raises :class:`ArenaError` naming the violated rule and its location.
    """
    if not isinstance(doc, dict) or "states" not in doc:
        raise ArenaError("", "top level must be an object with a 'states' list")
    raw_states = doc["states"]
    if not isinstance(raw_states, list) or not raw_states:
        raise ArenaError("states", "must be a non-empty list")
    seen: dict[str, int] = {}
    for i, rs in enumerate(raw_states):
        loc = f"states[{i}]"
        if not isinstance(rs, dict):
            raise ArenaError(loc, "state must be an object")
        sid = rs.get("id")
        if not isinstance(sid, str) or not sid:
            raise ArenaError(f"{loc}.id", "state id must be a non-empty string")
        if sid in seen:
            raise ArenaError(f"{loc}.id", f"duplicate state id {sid!r} (first at states[{seen[sid]}])")
        seen[sid] = i

    states = []
    for i, rs in enumerate(raw_states):
        loc = f"states[{i}]"
        controller = rs.get("controller")
        if controller not in (MAX, MIN):
            raise ArenaError(f"{loc}.controller", f"must be 'max' or 'min', got {controller!r}")
        reward = parse_rational(rs.get("reward", "0"), f"{loc}.reward")
        weight = None
        if "weight" in rs:
            weight = parse_rational(rs["weight"], f"{loc}.weight")
            if weight <= 0:
                raise ArenaError(f"{loc}.weight", f"weight must be positive, got {weight}")
        priority = None
        if "priority" in rs:
            priority = rs["priority"]
            if isinstance(priority, bool) or not isinstance(priority, int) or priority < 1:
                raise ArenaError(f"{loc}.priority", f"priority must be an integer >= 1, got {priority!r}")
        discount = None
        if "discount" in rs:
            if not isinstance(rs["discount"], str):
                raise ArenaError(f"{loc}.discount", "discount must be a string expression in t")
            try:
                discount = parse_rational_function(rs["discount"])
            except (ParseError, ZeroDivisionError) as exc:
                raise ArenaError(f"{loc}.discount", str(exc)) from None
        raw_actions = rs.get("actions")
        if not isinstance(raw_actions, list) or not raw_actions:
            raise ArenaError(f"{loc}.actions", "empty action set: every state needs at least one action")
        actions = []
        labels: set[str] = set()
        for j, ra in enumerate(raw_actions):
            aloc = f"{loc}.actions[{j}]"
            if not isinstance(ra, dict):
                raise ArenaError(aloc, "action must be an object")
            label = ra.get("label")
            if not isinstance(label, str) or not label:
                raise ArenaError(f"{aloc}.label", "action label must be a non-empty string")
            if label in labels:
                raise ArenaError(f"{aloc}.label", f"duplicate action label {label!r}")
            labels.add(label)
            raw_to = ra.get("to")
            if not isinstance(raw_to, list) or not raw_to:
                raise ArenaError(f"{aloc}.to", "action needs a non-empty successor list")
            succ = []
            targets: set[str] = set()
            total = Fraction(0)
            for k, rt in enumerate(raw_to):
                tloc = f"{aloc}.to[{k}]"
                if not isinstance(rt, dict):
                    raise ArenaError(tloc, "successor must be an object")
                target = rt.get("state")
                if target not in seen:
                    raise ArenaError(f"{tloc}.state", f"dangling successor {target!r}")
                if target in targets:
                    raise ArenaError(f"{tloc}.state", f"successor {target!r} listed twice")
                targets.add(target)
                prob = parse_rational(rt.get("prob"), f"{tloc}.prob")
                if prob < 0:
                    raise ArenaError(f"{tloc}.prob", f"negative probability {prob}")
                total += prob
                succ.append((target, prob))
            if total != 1:
                raise ArenaError(f"{aloc}.to", f"probabilities sum to {total} ≠ 1")
            actions.append(Action(label, tuple(succ)))
        states.append(
            State(rs["id"], controller, reward, tuple(actions), weight, priority, discount)
        )
    description = doc.get("description")
    return Arena(tuple(states), description if isinstance(description, str) else None)


def to_document(arena: Arena) -> dict:
    states = []
    for s in arena.states:
        d: dict[str, Any] = {"id": s.id, "controller": s.controller, "reward": format_rational(s.reward)}
        if s.weight is not None:
            d["weight"] = format_rational(s.weight)
        if s.priority is not None:
            d["priority"] = s.priority
        if s.discount is not None:
            d["discount"] = s.discount.to_text()
        d["actions"] = [
            {"label": a.label, "to": [{"state": q, "prob": format_rational(p)} for q, p in a.successors]}
            for a in s.actions
        ]
        states.append(d)
    doc: dict[str, Any] = {}
    if arena.description:
        doc["description"] = arena.description
    doc["states"] = states
    return doc


def dumps(arena: Arena, indent: int | None = 2) -> str:
    return json.dumps(to_document(arena), indent=indent, ensure_ascii=False)


def loads(text: str) -> Arena:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArenaError(f"line {exc.lineno} column {exc.colno}", f"malformed JSON: {exc.msg}") from None
    return validate(doc)


def load(path: str | Path) -> Arena:
    return loads(Path(path).read_text(encoding="utf-8"))


def fixture(name: str = "fig1") -> Arena:
    """Load a bundled example arena by name."""
    text = resources.files("pmpg").joinpath("data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return loads(text)
