"""
sic_sim.py
----------
Frame-level Monte Carlo simulation of IRSA with K-MPR SIC decoding.

Each trial samples a bipartite user/slot graph (every user draws a degree
from the transmission distribution and that many distinct slots), then
peels it: any slot holding at most K undecoded replicas decodes all of
them, and the decoded users' other replicas are cancelled. Users still
undecoded at the peeling fixed point count as lost.

Trial t of load point j draws from numpy's SeedSequence stream
[seed, j, t], so results do not depend on how trials are spread across
worker processes.
"""

from __future__ import annotations

# std modules
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

# universal imports
from utils.config import logger

# local imports
from degree_dist import DegreeDistribution
from errors import ConfigError, ValidationError

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameGraph:
    num_users:   int                          # M
    num_slots:   int                          # N
    assignments: tuple[tuple[int, ...], ...]  # user -> distinct replica slots

    def __post_init__(self):
        if len(self.assignments) != self.num_users:
            raise ValidationError(
                f"expected {self.num_users} slot sets, got {len(self.assignments)}"
            )
        for user, slots in enumerate(self.assignments):
            if len(set(slots)) != len(slots):
                raise ValidationError(f"user {user} has repeated slots {slots}")
            if any(s < 0 or s >= self.num_slots for s in slots):
                raise ValidationError(f"user {user} has slots outside [0, {self.num_slots}): {slots}")

    @classmethod
    def from_slot_sets(cls, num_slots: int, slot_sets: Iterable[Iterable[int]]) -> "FrameGraph":
        assignments = tuple(tuple(sorted(s)) for s in slot_sets)
        return cls(num_users=len(assignments), num_slots=num_slots, assignments=assignments)

    def slot_degrees(self) -> np.ndarray:
        counts = np.zeros(self.num_slots, dtype=int)
        for slots in self.assignments:
            counts[list(slots)] += 1
        return counts


@dataclass(frozen=True)
class DecodeResult:
    decoded: frozenset[int]
    rounds:  tuple[frozenset[int], ...]   # users decoded by each decode + subtract round

    @property
    def iterations(self) -> int:
        return len(self.rounds)


@dataclass(frozen=True)
class SimConfig:
    dist:      DegreeDistribution
    mpr:       int      # K
    num_users: int      # M
    load:      float    # nominal G; N = round(M / G)
    trials:    int
    seed:      int

    def __post_init__(self):
        if int(self.mpr) != self.mpr or self.mpr < 1:
            raise ValidationError(f"K must be a positive integer, got {self.mpr!r}")
        if self.num_users < 1:
            raise ValidationError(f"need at least one user, got {self.num_users}")
        if self.trials < 1:
            raise ValidationError(f"need at least one trial, got {self.trials}")
        if not self.load > 0.0:
            raise ValidationError(f"load must be positive, got {self.load!r}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.num_slots < self.dist.max_degree:
            raise ConfigError(
                f"frame of {self.num_slots} slots cannot hold degree-{self.dist.max_degree} users "
                f"(M={self.num_users}, G={self.load})"
            )

    @property
    def num_slots(self) -> int:
        return max(1, int(round(self.num_users / self.load)))

    @property
    def realized_load(self) -> float:
        return self.num_users / self.num_slots


@dataclass(frozen=True)
class SimReport:
    load:           float
    realized_load:  float
    num_slots:      int
    plr_estimate:   float
    plr_ci_low:     float
    plr_ci_high:    float
    throughput:     float   # G (1 - PLR)
    users_observed: int
    users_lost:     int
    trials:         int
    num_users:      int
    mpr:            int
    seed:           int


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def trial_rng(seed: int, load_index: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, load_index, trial_index])


def sample_frame(config: SimConfig, trial_index: int, load_index: int = 0) -> FrameGraph:
    """
    Draw one frame: inverse-CDF degrees, then a partial Fisher-Yates draw of
    distinct slots per user. Deterministic in (seed, load_index, trial_index).
    """
    num_slots = config.num_slots
    rng = trial_rng(config.seed, load_index, trial_index)

    degrees_table = np.asarray(config.dist.degrees)
    picks = np.searchsorted(config.dist.cdf(), rng.random(config.num_users), side="right")
    degrees = degrees_table[np.minimum(picks, len(degrees_table) - 1)]

    # position k within each user's draw picks uniformly from the N - k untouched slots
    offsets = np.concatenate([np.arange(d) for d in degrees])
    swaps = (offsets + rng.integers(0, num_slots - offsets)).tolist()

    perm = list(range(num_slots))
    assignments = []
    cursor = 0
    for d in degrees.tolist():
        for k in range(d):
            j = swaps[cursor + k]
            perm[k], perm[j] = perm[j], perm[k]
        assignments.append(tuple(sorted(perm[:d])))
        # undo in reverse so perm is the identity again
        for k in range(d - 1, -1, -1):
            j = swaps[cursor + k]
            perm[k], perm[j] = perm[j], perm[k]
        cursor += d

    return FrameGraph(num_users=config.num_users, num_slots=num_slots, assignments=tuple(assignments))


# ---------------------------------------------------------------------------
# SIC decoding
# ---------------------------------------------------------------------------

def sic_decode(graph: FrameGraph, mpr: int) -> DecodeResult:
    """
    Peel the graph to its fixed point.

    Each iteration decodes every user with a replica in a slot of current
    degree 1..K, then cancels all replicas of those users. Only slots whose
    degree changed need re-checking, so the work is linear in the edges.
    """
    if mpr < 1:
        raise ValidationError(f"K must be at least 1, got {mpr}")

    slot_users: list[set[int]] = [set() for _ in range(graph.num_slots)]
    for user, slots in enumerate(graph.assignments):
        for s in slots:
            slot_users[s].add(user)

    decoded: set[int] = set()
    rounds: list[frozenset[int]] = []
    candidates = set(range(graph.num_slots))

    while candidates:
        # decoding phase
        newly: set[int] = set()
        for s in candidates:
            if 1 <= len(slot_users[s]) <= mpr:
                newly |= slot_users[s]
        if not newly:
            break
        rounds.append(frozenset(newly))
        decoded |= newly

        # subtracting phase
        candidates = set()
        for user in newly:
            for s in graph.assignments[user]:
                slot_users[s].discard(user)
                candidates.add(s)

    return DecodeResult(decoded=frozenset(decoded), rounds=tuple(rounds))


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------

def _lost_in_trial(config: SimConfig, load_index: int, trial_index: int) -> int:
    graph = sample_frame(config, trial_index, load_index)
    return graph.num_users - len(sic_decode(graph, config.mpr).decoded)


def wilson_interval(lost: int, observed: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(lost, observed).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def run_trials(config: SimConfig, threads: int = 1, load_index: int = 0) -> SimReport:
    """
    Run `trials` independent frames and estimate the PLR with a Wilson 95%
    interval. With threads > 1 the frames are peeled in that many worker
    processes; lost-user counts are summed, so the report is identical for
    any worker count.
    """
    worker = partial(_lost_in_trial, config, load_index)
    if threads > 1 and config.trials > 1:
        workers = min(threads, config.trials)
        chunk = max(1, config.trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            lost = sum(pool.map(worker, range(config.trials), chunksize=chunk))
    else:
        lost = sum(map(worker, range(config.trials)))

    observed = config.num_users * config.trials
    plr = lost / observed
    low, high = wilson_interval(lost, observed)

    logger.info(
        f"G={config.load:g} (N={config.num_slots}, K={config.mpr}): "
        f"PLR={plr:.3e} over {config.trials} frames"
    )
    return SimReport(
        load=config.load,
        realized_load=config.realized_load,
        num_slots=config.num_slots,
        plr_estimate=plr,
        plr_ci_low=min(low, plr),
        plr_ci_high=max(high, plr),
        throughput=config.load * (1.0 - plr),
        users_observed=observed,
        users_lost=lost,
        trials=config.trials,
        num_users=config.num_users,
        mpr=config.mpr,
        seed=config.seed,
    )


def plr_curve(template: SimConfig, loads: Sequence[float], threads: int = 1) -> list[SimReport]:
    """One run_trials per load, ordered by G; load j of the sorted list seeds stream j."""
    if len(loads) == 0:
        raise ValidationError("loads list is empty")
    if any(not g > 0.0 for g in loads):
        raise ValidationError(f"every load must be positive, got {list(loads)}")

    return [
        run_trials(replace(template, load=float(g)), threads=threads, load_index=j)
        for j, g in enumerate(sorted(loads))
    ]
