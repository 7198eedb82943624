"""Points, dyadic intervals and sampled functions on the Walsh group.

A point of the group is truncated to ``resolution`` coordinates and stored
as an integer whose bit ``i`` is the coordinate ``x_i``. A function that is
constant on the rank-``m`` cosets is stored as a grid of ``2**m`` values in
which cell ``j`` holds the value on the coset of the point with bits ``j``.
Multi-dimensional grids are row-major with the first dimension slowest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_RESOLUTION = 62


class ResolutionError(ValueError):
    """Raised when an object is used outside the resolution it was built for."""


def _check_resolution(m):
    if not 0 <= m <= MAX_RESOLUTION:
        raise ResolutionError(f"resolution {m} outside [0, {MAX_RESOLUTION}]")


@dataclass(frozen=True)
class GroupPoint:
    bits: int
    resolution: int

    def __post_init__(self):
        _check_resolution(self.resolution)
        if self.bits < 0 or self.bits >> self.resolution:
            raise ResolutionError(
                f"bits {self.bits:#x} do not fit in {self.resolution} coordinates"
            )

    @classmethod
    def from_coords(cls, coords: Sequence[int]) -> GroupPoint:
        bits = 0
        for i, c in enumerate(coords):
            if c not in (0, 1):
                raise ValueError(f"coordinate {i} is {c!r}, expected 0 or 1")
            bits |= c << i
        return cls(bits, len(coords))

    @classmethod
    def zero(cls, resolution: int) -> GroupPoint:
        return cls(0, resolution)

    @classmethod
    def unit(cls, n: int, resolution: int) -> GroupPoint:
        """The point ``e_n``: coordinate ``n`` is 1, the rest 0."""
        if not 0 <= n < resolution:
            raise ResolutionError(f"e_{n} needs resolution > {n}")
        return cls(1 << n, resolution)

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(self.resolution))

    def __getitem__(self, k: int) -> int:
        if not 0 <= k < self.resolution:
            raise ResolutionError(f"coordinate {k} outside resolution {self.resolution}")
        return (self.bits >> k) & 1

    def __add__(self, other: GroupPoint) -> GroupPoint:
        return xor_add(self, other)


def xor_add(x: GroupPoint, y: GroupPoint) -> GroupPoint:
    if x.resolution != y.resolution:
        raise ResolutionError(
            f"cannot add points of resolution {x.resolution} and {y.resolution}"
        )
    return GroupPoint(x.bits ^ y.bits, x.resolution)


def reverse_bits(v, width):
    """Reverse the lowest ``width`` bits of ``v`` (int or integer array)."""
    if isinstance(v, np.ndarray):
        v = v.astype(np.int64)
        out = np.zeros_like(v)
    else:
        out = 0
    for i in range(width):
        out = out | (((v >> i) & 1) << (width - 1 - i))
    return out


def tau_bits(v, a):
    """Reverse the first ``a`` coordinates of packed point(s) ``v``."""
    low = (1 << a) - 1
    return reverse_bits(v & low, a) | (v & ~low)


def tau(x: GroupPoint, a: int) -> GroupPoint:
    """Prefix reversal: reverse ``x_0..x_{a-1}``, keep the other coordinates."""
    if not 0 <= a <= x.resolution:
        raise ResolutionError(f"tau_{a} needs resolution >= {a}, got {x.resolution}")
    return GroupPoint(tau_bits(x.bits, a), x.resolution)


@dataclass(frozen=True)
class DyadicInterval:
    """``I_rank(anchor)``: points agreeing with ``anchor`` on the first ``rank`` coordinates."""

    anchor: GroupPoint
    rank: int

    def __post_init__(self):
        if not 0 <= self.rank <= self.anchor.resolution:
            raise ResolutionError(
                f"rank {self.rank} outside [0, {self.anchor.resolution}]"
            )

    @property
    def measure(self) -> float:
        return 2.0 ** -self.rank

    def contains(self, x: GroupPoint) -> bool:
        mask = (1 << self.rank) - 1
        return (x.bits & mask) == (self.anchor.bits & mask)

    def mask(self, m: int) -> np.ndarray:
        """Boolean membership of every rank-``m`` coset (needs ``m >= rank``)."""
        if m < self.rank:
            raise ResolutionError(f"interval of rank {self.rank} is not rank-{m} measurable")
        low = (1 << self.rank) - 1
        j = np.arange(1 << m)
        return (j & low) == (self.anchor.bits & low)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Real function on ``G^d`` that is constant on rank-``ranks`` cosets."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if v.ndim == 0:
            raise ValueError("a sampled function needs at least one dimension")
        for n in v.shape:
            if n < 1 or n & (n - 1):
                raise ResolutionError(f"grid shape {v.shape} is not a power of two per axis")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def _owned(cls, values):
        # skip the defensive copy for arrays built by the library itself
        if values.dtype != np.float64 or not values.flags.c_contiguous:
            return cls(values)
        obj = object.__new__(cls)
        values.setflags(write=False)
        object.__setattr__(obj, "values", values)
        return obj

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(n.bit_length() - 1 for n in self.values.shape)

    @classmethod
    def constant(cls, ranks: Sequence[int], c: float = 1.0) -> SampledFunction:
        return cls(np.full(tuple(1 << m for m in ranks), float(c)))

    @classmethod
    def indicator(cls, intervals: Sequence[DyadicInterval], ranks: Sequence[int]) -> SampledFunction:
        """Indicator of the product rectangle ``I^1 x ... x I^d``."""
        if len(intervals) != len(ranks):
            raise ValueError("need one interval per dimension")
        out = np.ones(())
        for iv, m in zip(intervals, ranks):
            out = np.multiply.outer(out, iv.mask(m).astype(np.float64))
        return cls(out)

    def __call__(self, *points: GroupPoint) -> float:
        if len(points) != self.dims:
            raise ValueError(f"expected {self.dims} points")
        idx = []
        for x, m in zip(points, self.ranks):
            if x.resolution < m:
                raise ResolutionError(f"point resolution {x.resolution} < grid rank {m}")
            idx.append(x.bits & ((1 << m) - 1))
        return float(self.values[tuple(idx)])

    def __add__(self, other):
        return SampledFunction(self.values + _vals(other))

    def __sub__(self, other):
        return SampledFunction(self.values - _vals(other))

    def __mul__(self, other):
        return SampledFunction(self.values * _vals(other))

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(-self.values)

    def __abs__(self):
        return SampledFunction(np.abs(self.values))

    def refine(self, ranks: Sequence[int]) -> SampledFunction:
        """Resample onto finer cosets (each cell copied to its children)."""
        if len(ranks) != self.dims:
            raise ValueError("rank count mismatch")
        out = self.values
        for axis, (old, new) in enumerate(zip(self.ranks, ranks)):
            if new < old:
                raise ResolutionError("refine cannot coarsen a grid")
            reps = [1] * self.dims
            reps[axis] = 1 << (new - old)
            # cell j at rank new lies in coset j mod 2**old at rank old
            out = np.tile(out, reps)
        return SampledFunction(out)


def _vals(other):
    if isinstance(other, SampledFunction):
        return other.values
    return other


def integrate(f: SampledFunction) -> float:
    """Haar integral: the mean of the grid, summed pairwise."""
    v = f.values.ravel()
    return float(np.add.reduce(v) / v.size)


def lp_norm(f: SampledFunction, p: float) -> float:
    """``(int |f|^p)^(1/p)`` for ``0 < p < inf``; grid maximum of ``|f|`` for ``p = inf``."""
    if not p > 0:
        raise ValueError(f"lp_norm needs p > 0, got {p}")
    a = np.abs(f.values).ravel()
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(np.add.reduce(a) / a.size)
    return float((np.add.reduce(a**p) / a.size) ** (1.0 / p))
