"""Canonical time-scale representation and its deterministic structure.

A time scale is stored as a sorted list of disjoint closed intervals of
[0, inf); a degenerate interval encodes an isolated point.  All structure
queries (jump operators, graininess, gap enumeration, working partitions)
are answered from this canonical segment list using exact float
comparisons: the constructors are the single source of coordinates, so no
epsilon snapping is performed anywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ScaleError",
    "NotInScaleError",
    "GapInterval",
    "WorkingPartition",
    "TimeScale",
    "canonicalize",
    "qscale_points",
]


class ScaleError(ValueError):
    """Invalid scale specification or misuse of a scale operation."""


class NotInScaleError(ScaleError):
    """A time argument that must be a member of the scale is not."""


@dataclass(frozen=True)
class GapInterval:
    """Maximal open interval (left, right) containing no scale point.

    ``left`` is right-scattered and ``right`` is left-scattered; both are
    members of the owning scale.
    """

    left: float
    right: float

    @property
    def length(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class WorkingPartition:
    """Refinement grid over a scale window.

    ``times`` are scale members t1 = s_0 < ... < s_n = t2 containing every
    gap endpoint in the window.  Subinterval i is (times[i], times[i+1]);
    ``gap_mask[i]`` is True when it coincides with a gap of the scale
    (label 'b') and False when it lies inside a dense stretch (label 'a',
    length <= 2**-level).
    """

    times: np.ndarray
    level: int
    gap_mask: np.ndarray

    def __post_init__(self):
        self.times.setflags(write=False)
        self.gap_mask.setflags(write=False)

    @property
    def t1(self) -> float:
        return float(self.times[0])

    @property
    def t2(self) -> float:
        return float(self.times[-1])

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple("b" if g else "a" for g in self.gap_mask)

    def __len__(self) -> int:
        return len(self.times)


def qscale_points(q: float, kmin: int, kmax: int) -> list[float]:
    """Geometric points q**k for kmin <= k <= kmax, built by repeated
    multiplication/division from 1.0 so that consecutive points are exact
    floating-point neighbours under *q and /q."""
    if not q > 1.0:
        raise ScaleError(f"geometric ratio must exceed 1, got {q}")
    if kmin > kmax:
        raise ScaleError(f"kmin={kmin} exceeds kmax={kmax}")
    up: list[float] = [1.0]
    for _ in range(max(kmax, 0)):
        up.append(up[-1] * q)
    down: list[float] = [1.0]
    for _ in range(max(-kmin, 0)):
        down.append(down[-1] / q)
    pts = [up[k] if k >= 0 else down[-k] for k in range(kmin, kmax + 1)]
    if len(set(pts)) != len(pts):
        raise ScaleError("geometric points collide in float precision; use a larger q or narrower k range")
    return pts


def _expand_piece(piece: dict) -> list[tuple[float, float]]:
    keys = [k for k in ("interval", "point", "qscale") if piece.get(k) is not None]
    if len(keys) != 1:
        raise ScaleError(f"scale piece must have exactly one of interval/point/qscale, got {sorted(piece)}")
    kind = keys[0]
    if kind == "interval":
        a, b = piece["interval"]
        a, b = float(a), float(b)
        if not (0.0 <= a <= b):
            raise ScaleError(f"interval [{a}, {b}] must satisfy 0 <= a <= b")
        return [(a, b)]
    if kind == "point":
        c = float(piece["point"])
        if c < 0.0:
            raise ScaleError(f"point {c} must be nonnegative")
        return [(c, c)]
    spec = piece["qscale"]
    pts = qscale_points(float(spec["q"]), int(spec["kmin"]), int(spec["kmax"]))
    segs = [(p, p) for p in pts]
    if spec.get("include_zero"):
        segs.insert(0, (0.0, 0.0))
    return segs


def canonicalize(pieces: Iterable[dict]) -> "TimeScale":
    """Build a TimeScale from a list of pieces.

    Each piece is a dict with exactly one of the keys ``interval`` ([a, b]),
    ``point`` (c) or ``qscale`` ({q, kmin, kmax, include_zero}).  Segments
    are sorted and merged; overlapping or touching pieces coalesce, so the
    result is strictly disjoint.
    """
    raw: list[tuple[float, float]] = []
    for piece in pieces:
        raw.extend(_expand_piece(piece))
    if not raw:
        raise ScaleError("scale specification contains no pieces")
    raw.sort()
    merged: list[list[float]] = [list(raw[0])]
    for a, b in raw[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return TimeScale([(a, b) for a, b in merged])


class TimeScale:
    """A nonempty closed subset of [0, inf) stored as disjoint segments."""

    def __init__(self, segments: Sequence[tuple[float, float]]):
        if not segments:
            raise ScaleError("a time scale must be nonempty")
        self.segments: tuple[tuple[float, float], ...] = tuple((float(a), float(b)) for a, b in segments)
        prev_end = -math.inf
        for a, b in self.segments:
            if not (0.0 <= a <= b):
                raise ScaleError(f"segment [{a}, {b}] must satisfy 0 <= a <= b")
            if a <= prev_end:
                raise ScaleError("segments must be sorted and strictly disjoint")
            prev_end = b
        self._starts = np.array([a for a, _ in self.segments])
        self._ends = np.array([b for _, b in self.segments])

    # -- construction -----------------------------------------------------

    @classmethod
    def from_spec(cls, spec: dict) -> "TimeScale":
        """Build from the structured scale-spec form {"pieces": [...]}."""
        if "pieces" not in spec:
            raise ScaleError('scale spec must contain a "pieces" list')
        return canonicalize(spec["pieces"])

    @classmethod
    def from_file(cls, path) -> "TimeScale":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_spec(json.load(fh))

    def __repr__(self) -> str:
        return f"TimeScale({list(self.segments)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeScale) and self.segments == other.segments

    def __hash__(self) -> int:
        return hash(self.segments)

    # -- membership and jump operators -------------------------------------

    @property
    def min(self) -> float:
        return float(self._starts[0])

    @property
    def max(self) -> float:
        return float(self._ends[-1])

    def _segment_index(self, t: float) -> int:
        """Index of the segment containing t, or -1."""
        i = int(np.searchsorted(self._starts, t, side="right")) - 1
        if i >= 0 and t <= self._ends[i]:
            return i
        return -1

    def __contains__(self, t: float) -> bool:
        return self._segment_index(float(t)) >= 0

    def _member_segment(self, t: float) -> int:
        i = self._segment_index(t)
        if i < 0:
            raise NotInScaleError(f"t={t} is not a member of the scale")
        return i

    def sigma(self, t: float) -> float:
        """Forward jump: least member strictly after t; t itself at the maximum."""
        t = float(t)
        i = self._member_segment(t)
        if t < self._ends[i]:
            return t
        if i + 1 < len(self.segments):
            return float(self._starts[i + 1])
        return t

    def rho(self, t: float) -> float:
        """Backward jump: greatest member strictly before t; t itself at the minimum."""
        t = float(t)
        i = self._member_segment(t)
        if t > self._starts[i]:
            return t
        if i > 0:
            return float(self._ends[i - 1])
        return t

    def mu(self, t: float) -> float:
        """Graininess sigma(t) - t; zero at right-dense points."""
        return self.sigma(t) - float(t)

    def sup_le(self, t: float) -> float:
        """Greatest member <= t, for any real t >= min."""
        t = float(t)
        if t < self.min:
            raise ScaleError(f"t={t} lies below the scale minimum {self.min}")
        i = int(np.searchsorted(self._starts, t, side="right")) - 1
        if t <= self._ends[i]:
            return t
        return float(self._ends[i])

    # -- gaps and partitions ------------------------------------------------

    def gaps(self) -> list[GapInterval]:
        """All gaps of the scale, sorted."""
        return [
            GapInterval(float(self._ends[i]), float(self._starts[i + 1]))
            for i in range(len(self.segments) - 1)
        ]

    def gaps_between(self, t1: float, t2: float) -> list[GapInterval]:
        """Gaps lying strictly inside (t1, t2); endpoints must be members."""
        t1, t2 = float(t1), float(t2)
        self._member_segment(t1)
        self._member_segment(t2)
        if t1 > t2:
            raise ScaleError(f"t1={t1} exceeds t2={t2}")
        return [g for g in self.gaps() if g.left >= t1 and g.right <= t2]

    def partition(self, t1: float, t2: float, n: int) -> WorkingPartition:
        """Working partition of [t1, t2] at refinement level n.

        Includes t1, t2 and every gap endpoint in between; each maximal
        dense stretch is subdivided uniformly into a power-of-two number of
        steps of length <= 2**-n, so the level-(n+1) grid refines the
        level-n grid as a set of times.
        """
        t1, t2 = float(t1), float(t2)
        i1 = self._member_segment(t1)
        i2 = self._member_segment(t2)
        if t1 >= t2:
            raise ScaleError(f"need t1 < t2, got t1={t1}, t2={t2}")
        if n < 0:
            raise ScaleError(f"refinement level must be >= 0, got {n}")
        mesh = 2.0 ** (-n)
        chunks: list[np.ndarray] = []
        gap_flags: list[bool] = []
        for i in range(i1, i2 + 1):
            lo = max(float(self._starts[i]), t1)
            hi = min(float(self._ends[i]), t2)
            if chunks:
                gap_flags.append(True)  # junction between consecutive segments
            if lo < hi:
                steps = math.ceil((hi - lo) / mesh)
                m = 1 << (steps - 1).bit_length()
                pts = lo + (hi - lo) * (np.arange(m + 1) / m)
                pts[0] = lo
                pts[-1] = hi
                gap_flags.extend([False] * m)
            else:
                pts = np.array([lo])
            chunks.append(pts)
        times = np.concatenate(chunks)
        return WorkingPartition(times=times, level=int(n), gap_mask=np.array(gap_flags, dtype=bool))
