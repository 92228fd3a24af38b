"""Brownian trajectories indexed by working partitions.

Draws come from a counter-based Philox stream keyed by (seed, path_id);
the i-th increment always reads stream position i through the inverse
normal CDF, so a path is fully determined by (seed, path_id, step index)
no matter how many paths run or in which order.  When min(scale) > 0 the
sample is prefixed with time 0 and one initial increment so that W_0 = 0
holds literally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .timescale import TimeScale, WorkingPartition

__all__ = ["RngConfig", "PathSample", "normal_draws", "sample_path", "RefinementPlan"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngConfig:
    """Provenance of one trajectory; (seed, path_id) fixes it completely."""

    seed: int
    path_id: int


def normal_draws(seed: int, path_id: int, count: int) -> np.ndarray:
    """Standard normal draws at stream positions 0..count-1 of the
    (seed, path_id) Philox stream, via the inverse CDF so each position
    maps to exactly one counter value."""
    key = np.array([seed & _MASK64, path_id & _MASK64], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(count)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


@dataclass
class PathSample:
    """A Brownian trajectory sampled on a working partition.

    ``times`` are the partition times, prefixed with 0 when the partition
    starts above 0; ``values`` are W at those times with W(0) = 0.
    ``offset`` is the index of the first partition time inside ``times``.
    """

    times: np.ndarray
    values: np.ndarray
    seed: int
    path_id: int
    partition: WorkingPartition | None = None
    offset: int = 0

    def __post_init__(self):
        self.times.setflags(write=False)
        self.values.setflags(write=False)

    def index_of(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t))
        if i >= len(self.times) or self.times[i] != t:
            raise KeyError(f"t={t} is not a sample time of this path")
        return i

    def value_at(self, t: float) -> float:
        return float(self.values[self.index_of(t)])

    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def sample_path(partition: WorkingPartition, rng: RngConfig) -> PathSample:
    """Sample W on the partition: independent N(0, dt) increments, one
    Philox stream position per step."""
    if len(partition.times) == 0:
        raise ValueError("partition is empty")
    if partition.times[0] > 0.0:
        times = np.concatenate([[0.0], partition.times])
        offset = 1
    else:
        times = partition.times
        offset = 0
    dt = np.diff(times)
    z = normal_draws(rng.seed, rng.path_id, len(dt))
    values = np.empty(len(times))
    values[0] = 0.0
    np.cumsum(z * np.sqrt(dt), out=values[1:])
    return PathSample(
        times=times,
        values=values,
        seed=rng.seed,
        path_id=rng.path_id,
        partition=partition,
        offset=offset,
    )


@dataclass
class RefinementPlan:
    """Partitions of one window at several levels plus a shared sampler.

    Trajectories are sampled once at the finest level; coarser paths are
    the same trajectory read at the coarser times (partition grids are
    nested), which realizes coarse increments as the telescoped sums of
    the fine increments.  Values shared between levels are bitwise equal,
    so gap contributions to any statistic are identical across levels.
    """

    scale: TimeScale
    t1: float
    t2: float
    levels: tuple[int, ...]
    partitions: dict[int, WorkingPartition] = field(init=False)
    _index_maps: dict[int, np.ndarray] = field(init=False)

    def __post_init__(self):
        self.levels = tuple(sorted(set(int(n) for n in self.levels)))
        if not self.levels:
            raise ValueError("need at least one refinement level")
        self.partitions = {n: self.scale.partition(self.t1, self.t2, n) for n in self.levels}
        fine = self.partitions[self.finest].times
        self._index_maps = {}
        for n in self.levels:
            idx = np.searchsorted(fine, self.partitions[n].times)
            if not np.array_equal(fine[idx], self.partitions[n].times):
                raise AssertionError("partition grids failed to nest")
            self._index_maps[n] = idx

    @property
    def finest(self) -> int:
        return self.levels[-1]

    def sample(self, rng: RngConfig) -> dict[int, PathSample]:
        """One trajectory at the finest level, viewed at every level."""
        fine_path = sample_path(self.partitions[self.finest], rng)
        out: dict[int, PathSample] = {self.finest: fine_path}
        for n in self.levels[:-1]:
            idx = self._index_maps[n] + fine_path.offset
            if fine_path.offset:
                idx = np.concatenate([[0], idx])
            out[n] = PathSample(
                times=fine_path.times[idx],
                values=fine_path.values[idx],
                seed=rng.seed,
                path_id=rng.path_id,
                partition=self.partitions[n],
                offset=fine_path.offset,
            )
        return out
