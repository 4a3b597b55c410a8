"""Seeded Monte-Carlo play sampling for cross-checking exact expectations.

Randomness comes from numpy's Philox counter-based generator. Stream ``i``
of a run is keyed by ``SeedSequence(seed, spawn_key=(i,))`` and covers a
fixed block of samples, so results do not depend on the number of worker
threads. Each random choice consumes one raw 64-bit draw ``U`` and picks
the first outcome whose cumulative probability ``c`` satisfies
``U < ceil(c * 2**64)``, i.e. ``U / 2**64 < c`` evaluated exactly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .arena import Arena, StrategyProfile, WeightedPrioritySystem
from .discounted import check_discounts

STREAM_BLOCK = 1 << 14
_TWO64 = 1 << 64
_UMAX = _TWO64 - 1


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    samples: int = 100_000
    horizon: int = 10_000
    estimator: str = "discounted"

    def __post_init__(self):
        if not 0 <= self.seed < _TWO64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.samples < 1 or self.horizon < 1:
            raise ValueError("samples and horizon must be >= 1")
        if self.estimator not in ("discounted", "pmp"):
            raise ValueError(f"unknown estimator {self.estimator!r}")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    samples_used: int
    truncated_fraction: float
    approximate: bool = False

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "samples_used": self.samples_used,
            "truncated_fraction": self.truncated_fraction,
            "approximate": self.approximate,
        }


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def threshold(c: Fraction) -> int:
    """Smallest integer ``T`` with ``U < T  <=>  U / 2**64 < c`` for integer ``U``."""
    return -((-c.numerator * _TWO64) // c.denominator)


# -- single plays ---------------------------------------------------------------------


def _choose(successors, u: int) -> str:
    acc = Fraction(0)
    for target, p in successors:
        acc += p
        if u < threshold(acc):
            return target
    return successors[-1][0]


def sample_play(
    arena: Arena, profile: StrategyProfile, initial: str, horizon: int, rng: np.random.Generator
) -> list[str]:
    """Draw a play of ``horizon`` states; ``rng`` advances by one raw draw per move."""
    play = [initial]
    s = initial
    for _ in range(horizon - 1):
        succ = arena.state(s).action(profile.action(s)).successors
        u = int(rng.bit_generator.random_raw())
        s = _choose(succ, u)
        play.append(s)
    return play


# -- vectorised chains ------------------------------------------------------------------


class _Chain:
    """Transition tables of the chain induced by a profile, for batched sampling."""

    def __init__(self, arena: Arena, profile: StrategyProfile):
        n = len(arena)
        rows = []
        for s in arena.states:
            succ = s.action(profile.action(s.id)).successors
            rows.append([(q, p) for q, p in succ if p > 0])
        width = max(len(r) for r in rows)
        self.succ = np.zeros((n, width), dtype=np.int64)
        self.thr = np.full((n, max(width - 1, 1)), _UMAX, dtype=np.uint64)
        for i, row in enumerate(rows):
            acc = Fraction(0)
            idx = [arena.index[q] for q, _ in row]
            idx += [idx[-1]] * (width - len(idx))
            self.succ[i] = idx
            for j, (_, p) in enumerate(row[:-1]):
                acc += p
                self.thr[i, j] = min(threshold(acc), _UMAX)

    def step(self, cur: np.ndarray, u: np.ndarray) -> np.ndarray:
        k = (u[:, None] >= self.thr[cur]).sum(axis=1)
        k = np.minimum(k, self.succ.shape[1] - 1)
        return self.succ[cur, k]


def _raw(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.asarray(rng.bit_generator.random_raw(n), dtype=np.uint64)


def _moments(x: np.ndarray) -> tuple[int, float, float]:
    n = x.size
    mean = float(x.mean())
    m2 = float(((x - mean) ** 2).sum())
    return n, mean, m2


def _merge(a, b):
    """Combine (count, mean, M2) summaries of two disjoint samples."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _threads() -> int:
    env = os.environ.get("PMPG_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_streams(config: SimConfig, block_fn) -> tuple[tuple[int, float, float], int]:
    blocks = []
    remaining = config.samples
    i = 0
    while remaining > 0:
        size = min(STREAM_BLOCK, remaining)
        blocks.append((i, size))
        remaining -= size
        i += 1

    def run(block):
        stream, size = block
        values, truncated = block_fn(make_rng(config.seed, stream), size)
        return _moments(values), truncated

    workers = min(_threads(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]
    total = results[0][0]
    truncated = results[0][1]
    for summary, tr in results[1:]:
        total = _merge(total, summary)
        truncated += tr
    return total, truncated


def _finish(total, truncated: int, approximate: bool = False) -> SimEstimate:
    n, mean, m2 = total
    var = m2 / (n - 1) if n > 1 else 0.0
    return SimEstimate(mean, math.sqrt(var / n), n, truncated / n, approximate)


def estimate_discounted(
    arena: Arena,
    discounts: Mapping[str, Fraction],
    profile: StrategyProfile,
    initial: str,
    config: SimConfig,
) -> SimEstimate:
    """Stopping-game estimate of the expected discounted payoff from ``initial``.

    At each visit to ``s`` the play stops with probability ``1 - lambda(s)``
    and pays ``r(s)``. Plays still running at the horizon are truncated and
    contribute their partial discounted sum.
    """
    discounts = check_discounts(arena, discounts)
    chain = _Chain(arena, profile)
    lam = np.array([float(discounts[s]) for s in arena.ids])
    reward = np.array([float(s.reward) for s in arena.states])
    stop_thr = np.array([min(threshold(1 - discounts[s]), _UMAX) for s in arena.ids], dtype=np.uint64)
    always = np.array([discounts[s] == 0 for s in arena.ids])
    start = arena.index[initial]

    def block(rng, size):
        cur = np.full(size, start, dtype=np.int64)
        payoff = np.zeros(size)
        partial = np.zeros(size)
        prefix = np.ones(size)
        alive = np.arange(size)
        for _ in range(config.horizon):
            if alive.size == 0:
                break
            c = cur[alive]
            partial[alive] += prefix[alive] * (1 - lam[c]) * reward[c]
            prefix[alive] *= lam[c]
            u = _raw(rng, alive.size)
            stopped = always[c] | (u < stop_thr[c])
            payoff[alive[stopped]] = reward[c[stopped]]
            alive = alive[~stopped]
            if alive.size:
                cur[alive] = chain.step(cur[alive], _raw(rng, alive.size))
        payoff[alive] = partial[alive]
        return payoff, int(alive.size)

    return _finish(*_run_streams(config, block))


def estimate_pmp(
    arena: Arena,
    system: WeightedPrioritySystem,
    profile: StrategyProfile,
    initial: str,
    config: SimConfig,
) -> SimEstimate:
    """Truncated-play estimate of the expected priority mean payoff.

    Each play runs ``horizon`` steps; its priority is taken as the minimum
    over the second half of the play and its payoff as the weighted reward
    average over the states of that priority in the same half. This is a
    consistent but biased stand-in for the limit, flagged ``approximate``.
    """
    if config.horizon < 2:
        raise ValueError("horizon must be at least 2 for the suffix-half estimator")
    chain = _Chain(arena, profile)
    levels = sorted(set(system.priority.values()))
    level_of = np.array([levels.index(system.priority[s]) for s in arena.ids])
    w = np.array([float(system.weight[s]) for s in arena.ids])
    wr = w * np.array([float(s.reward) for s in arena.states])
    start = arena.index[initial]
    first = config.horizon // 2
    L = len(levels)

    def block(rng, size):
        cur = np.full(size, start, dtype=np.int64)
        num = np.zeros(L * size)
        den = np.zeros(L * size)
        lowest = np.full(size, L, dtype=np.int64)
        ar = np.arange(size)
        for step in range(config.horizon):
            if step >= first:
                lv = level_of[cur]
                flat = lv * size + ar
                num[flat] += wr[cur]
                den[flat] += w[cur]
                np.minimum(lowest, lv, out=lowest)
            if step + 1 < config.horizon:
                cur = chain.step(cur, _raw(rng, size))
        flat = lowest * size + ar
        return num[flat] / den[flat], size

    return _finish(*_run_streams(config, block), approximate=True)
