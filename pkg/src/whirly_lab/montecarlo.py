"""Seeded Monte Carlo estimation of set measures with Wilson intervals.

Estimators draw realizations of the tree process (unconditional or pinned at a
level), evaluate set membership on the stored level arrays, and report the hit
fraction with a Wilson score confidence interval.

Sharding rule: the requested sample count is pre-partitioned into fixed-size
blocks by index, and block ``i`` always draws from the stream's child key
``(stream_id, i)``.  Workers only decide which blocks they execute, and block
hit counts are integers summed commutatively, so the result is bit-identical
for any worker count.  The block size depends only on the sampling depth (to
bound per-block memory), never on run-time conditions.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .rng import RngStream
from .sets import BorelSet
from .tree import DepthMismatchError, LevelVector, conditional_levels, sample_levels

DEFAULT_CONFIDENCE = 0.95
MIN_SAMPLES = 100
MAX_JOINT_EVENTS = 12

# Per-block leaf budget: keeps a block's level arrays around a few tens of MB
# at any depth while letting shallow problems run in large vectorized chunks.
_BLOCK_LEAF_BUDGET = 1 << 21
_MIN_BLOCK = 64
_MAX_BLOCK = 1 << 16


def default_block_size(depth: int) -> int:
    """Fixed block size used by the shard rule at a given sampling depth."""
    return int(min(_MAX_BLOCK, max(_MIN_BLOCK, _BLOCK_LEAF_BUDGET >> depth)))


def tally_blocks(
    block_fn: Callable[[np.random.Generator, int], np.ndarray],
    samples: int,
    rng: RngStream,
    *,
    block_size: int,
    workers: int = 1,
) -> np.ndarray:
    """Sum integer tallies over the deterministic shard plan.

    ``block_fn(gen, count)`` must return a 1-D int64 array whose value depends
    only on the generator state and ``count``.  Blocks are laid out by index
    and block ``i`` uses ``rng.block(i)``, so the total is independent of
    ``workers``.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    if block_size <= 0:
        raise ValueError("block_size must be positive")
    plan = [(i, min(block_size, samples - i * block_size)) for i in range((samples + block_size - 1) // block_size)]

    def run(task: tuple[int, int]) -> np.ndarray:
        index, count = task
        out = np.asarray(block_fn(rng.block(index), count), dtype=np.int64)
        return out

    if workers <= 1:
        results = [run(task) for task in plan]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, plan))
    total = results[0].copy()
    for part in results[1:]:
        total += part
    return total


# ---------------------------------------------------------------------------
# intervals and result containers
# ---------------------------------------------------------------------------


def wilson_interval(hits: int, samples: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Endpoints are exact at the boundary (0 hits gives a lower endpoint of 0,
    all hits gives an upper endpoint of 1) and always lie inside [0, 1].
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    if not 0 <= hits <= samples:
        raise ValueError("hits must lie in [0, samples]")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly between 0 and 1")
    z = float(stats.norm.ppf(0.5 * (1.0 + confidence)))
    p = hits / samples
    zz = z * z / samples
    center = (p + zz / 2.0) / (1.0 + zz)
    half = z * math.sqrt(p * (1.0 - p) / samples + zz / (4.0 * samples)) / (1.0 + zz)
    # At the boundaries center and half agree exactly in exact arithmetic;
    # pin the endpoints so rounding noise cannot leak across 0 or 1.
    low = 0.0 if hits == 0 else max(0.0, center - half)
    high = 1.0 if hits == samples else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class MeasureEstimate:
    """Monte Carlo measure estimate with its Wilson interval and provenance."""

    estimate: float
    ci_low: float
    ci_high: float
    samples: int
    hits: int
    seed: int
    confidence: float = DEFAULT_CONFIDENCE
    stream_id: int = field(default=0, compare=False)

    @property
    def std_error(self) -> float:
        """Binomial standard error of the point estimate."""
        p = self.estimate
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.samples)

    def json_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci": [self.ci_low, self.ci_high],
            "samples": self.samples,
            "hits": self.hits,
            "seed": self.seed,
            "confidence": self.confidence,
        }

    def to_json(self) -> str:
        return json.dumps(self.json_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class JointTable:
    """Joint occupancy table for a family of events.

    Cell index ``c`` collects samples for which event ``j`` happened exactly
    when bit ``j`` of ``c`` is set; cell probabilities sum to 1.
    """

    n_events: int
    counts: tuple[int, ...]
    samples: int
    seed: int

    @property
    def probs(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / self.samples

    def marginal(self, j: int) -> float:
        """Estimated probability of event ``j``."""
        if not 0 <= j < self.n_events:
            raise ValueError(f"event index {j} out of range")
        idx = np.arange(1 << self.n_events)
        return float(self.probs[(idx >> j) & 1 == 1].sum())

    def cell(self, outcome: Sequence[int]) -> float:
        """Estimated probability of one exact on/off pattern."""
        if len(outcome) != self.n_events:
            raise ValueError("outcome length must equal the number of events")
        code = 0
        for j, bit in enumerate(outcome):
            if bit not in (0, 1):
                raise ValueError("outcome bits must be 0 or 1")
            code |= bit << j
        return float(self.probs[code])

    def json_dict(self) -> dict:
        return {
            "events": self.n_events,
            "counts": list(self.counts),
            "samples": self.samples,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _check_common(depth: int, min_level: int, samples: int) -> None:
    if depth < min_level:
        raise DepthMismatchError(
            f"sampling depth {depth} is below the required level {min_level}"
        )
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")


def estimate_measure(
    target: BorelSet,
    depth: int,
    samples: int,
    rng: RngStream,
    *,
    workers: int = 1,
    confidence: float = DEFAULT_CONFIDENCE,
) -> MeasureEstimate:
    """Estimate the measure of ``target`` from trees sampled at ``depth``.

    Any depth at or below the determination level gives an unbiased estimate
    of the same quantity because level laws are projection-consistent.
    """
    _check_common(depth, target.level, samples)

    def block(gen: np.random.Generator, count: int) -> np.ndarray:
        levels = sample_levels(depth, count, gen)
        return np.array([int(np.count_nonzero(target.indicator(levels)))], dtype=np.int64)

    hits = int(tally_blocks(block, samples, rng, block_size=default_block_size(depth), workers=workers)[0])
    low, high = wilson_interval(hits, samples, confidence)
    return MeasureEstimate(
        estimate=hits / samples,
        ci_low=low,
        ci_high=high,
        samples=samples,
        hits=hits,
        seed=rng.master_seed,
        confidence=confidence,
        stream_id=rng.stream_id,
    )


def estimate_conditional_measure(
    target: BorelSet,
    given: LevelVector,
    depth: int,
    samples: int,
    rng: RngStream,
    *,
    workers: int = 1,
    confidence: float = DEFAULT_CONFIDENCE,
) -> MeasureEstimate:
    """Estimate the conditional measure of ``target`` given an exact level
    vector, using the exact conditional sampler."""
    _check_common(depth, max(target.level, given.level), samples)

    def block(gen: np.random.Generator, count: int) -> np.ndarray:
        levels = conditional_levels(given.entries, given.level, depth, count, gen)
        return np.array([int(np.count_nonzero(target.indicator(levels)))], dtype=np.int64)

    hits = int(tally_blocks(block, samples, rng, block_size=default_block_size(depth), workers=workers)[0])
    low, high = wilson_interval(hits, samples, confidence)
    return MeasureEstimate(
        estimate=hits / samples,
        ci_low=low,
        ci_high=high,
        samples=samples,
        hits=hits,
        seed=rng.master_seed,
        confidence=confidence,
        stream_id=rng.stream_id,
    )


def estimate_joint_events(
    events: Sequence[BorelSet],
    depth: int,
    samples: int,
    rng: RngStream,
    *,
    given: LevelVector | None = None,
    workers: int = 1,
) -> JointTable:
    """Joint occupancy counts for up to 12 events on shared samples.

    With ``given`` the samples come from the exact conditional law pinned at
    that level vector.
    """
    n_events = len(events)
    if not 1 <= n_events <= MAX_JOINT_EVENTS:
        raise ValueError(f"need between 1 and {MAX_JOINT_EVENTS} events, got {n_events}")
    min_level = max(e.level for e in events)
    if given is not None:
        min_level = max(min_level, given.level)
    _check_common(depth, min_level, samples)

    def block(gen: np.random.Generator, count: int) -> np.ndarray:
        if given is None:
            levels = sample_levels(depth, count, gen)
        else:
            levels = conditional_levels(given.entries, given.level, depth, count, gen)
        code = np.zeros(count, dtype=np.int64)
        for j, event in enumerate(events):
            code |= event.indicator(levels).astype(np.int64) << j
        return np.bincount(code, minlength=1 << n_events)

    counts = tally_blocks(block, samples, rng, block_size=default_block_size(depth), workers=workers)
    return JointTable(
        n_events=n_events,
        counts=tuple(int(c) for c in counts),
        samples=samples,
        seed=rng.master_seed,
    )
