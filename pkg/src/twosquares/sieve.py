"""Segmented lattice sieve for sums of two squares, r2 tables and distances.

The membership table is built by marking a^2 + b^2 directly (branch-light and
segment-parallel); the classical factorization criterion is kept alongside as
an independent oracle and never feeds the sieve.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = [
    "TwoSquareTable",
    "R2Table",
    "GapRecord",
    "sieve_two_squares",
    "is_sum_of_two_squares",
    "build_r2_table",
    "r2_square_sum",
    "nearest_distance",
    "nearest_distance_many",
    "circle_lattice_distance",
    "gaps",
    "gap_array",
    "record_gaps",
    "two_square_defect",
    "save_table",
    "load_table",
    "load_or_build",
]

DEFAULT_SEGMENT_SIZE = 1 << 22

# guard against absurd allocations (bool array of this many entries = 16 GiB)
_MAX_TABLE_SIZE = 1 << 34

_CACHE_MAGIC = b"S2BITS1\x00"


class TwoSquareTable:
    """Membership bitset of {1..x_max} representable as a^2 + b^2, plus the sorted members."""

    def __init__(self, x_max: int, bits: np.ndarray):
        self.x_max = int(x_max)
        bits.flags.writeable = False
        self.bits = bits
        self._elements = None
        self._gap_cache = None

    @property
    def elements(self) -> np.ndarray:
        """Sorted members, materialized on first use."""
        if self._elements is None:
            elems = np.flatnonzero(self.bits).astype(np.int64)
            elems.flags.writeable = False
            self._elements = elems
        return self._elements

    def is_member(self, n: int) -> bool:
        if not (0 <= n <= self.x_max):
            raise ValueError(f"n={n} outside table range [0, {self.x_max}]")
        return bool(self.bits[n])

    def __contains__(self, n) -> bool:
        return self.is_member(int(n))

    def __repr__(self):
        return f"TwoSquareTable(x_max={self.x_max})"


def sieve_two_squares(x_max: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> TwoSquareTable:
    """Mark every a^2 + b^2 <= x_max segment by segment.

    Work is proportional to the lattice-point count (about pi x/4 pairs) plus
    per-segment overhead.  Segments have independent write regions, so the
    loop below could run them concurrently without coordination.
    """
    x_max = int(x_max)
    if x_max < 8:
        raise ValueError("x_max must be >= 8")
    if x_max + 1 > _MAX_TABLE_SIZE:
        raise ValueError(f"x_max={x_max} exceeds the addressable bitset capacity")
    if segment_size < 1024:
        raise ValueError("segment_size must be >= 1024")
    bits = np.zeros(x_max + 1, dtype=bool)
    for seg_lo in range(0, x_max + 1, segment_size):
        seg_hi = min(seg_lo + segment_size, x_max + 1)  # exclusive
        top = seg_hi - 1
        for a in range(0, math.isqrt(top // 2) + 1):
            aa = a * a
            b_hi = math.isqrt(top - aa)
            if seg_lo > aa + aa:
                b_lo = math.isqrt(seg_lo - aa - 1) + 1  # smallest b with aa+b^2 >= seg_lo
            else:
                b_lo = a
            b_lo = max(b_lo, a)
            if b_lo > b_hi:
                continue
            b = np.arange(b_lo, b_hi + 1, dtype=np.int64)
            bits[aa + b * b] = True
    bits[0] = False  # the set starts at 1 even though 0 = 0^2 + 0^2
    return TwoSquareTable(x_max, bits)


def is_sum_of_two_squares(n: int) -> bool:
    """Factorization criterion: every prime p = 3 (mod 4) divides n to an even power.

    Trial division up to sqrt(n); kept free of any sieve data so the two
    membership routes stay independent.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    while n % 2 == 0:
        n //= 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            exp = 0
            while n % d == 0:
                n //= d
                exp += 1
            if d % 4 == 3 and exp % 2 == 1:
                return False
        d += 2
    # leftover cofactor is prime (or 1); it occurs to the first power
    return n % 4 != 3


@dataclass(frozen=True)
class R2Table:
    """counts[n] = number of integer pairs (a, b) with a^2 + b^2 = n, for n <= limit."""

    limit: int
    counts: np.ndarray

    def __post_init__(self):
        self.counts.flags.writeable = False


def build_r2_table(limit: int) -> R2Table:
    """Count lattice points shell by shell: quadrant enumeration with symmetry weights."""
    limit = int(limit)
    if limit < 0:
        raise ValueError("limit must be >= 0")
    if limit + 1 > _MAX_TABLE_SIZE // 8:
        raise ValueError(f"limit={limit} exceeds the r2 table memory budget")
    counts = np.zeros(limit + 1, dtype=np.int64)
    for a in range(0, math.isqrt(limit) + 1):
        b = np.arange(0, math.isqrt(limit - a * a) + 1, dtype=np.int64)
        weight = np.where(b > 0, 2, 1) * (2 if a > 0 else 1)
        np.add.at(counts, a * a + b * b, weight)
    return R2Table(limit, counts)


def r2_square_sum(table: R2Table, x: int) -> int:
    """Sum of r2(n)^2 over 0 < n < x."""
    x = int(x)
    if x > table.limit + 1:
        raise ValueError(f"x={x} exceeds the r2 table limit {table.limit}")
    c = table.counts[1:max(x, 1)]
    return int(np.sum(c * c))


# ----------------------------------------------------------------------------
# Distance functions
# ----------------------------------------------------------------------------

def _bracket(elements: np.ndarray, y: float):
    """Members immediately left/right of y (right one must exist)."""
    pos = int(np.searchsorted(elements, y))
    if pos == len(elements):
        raise ValueError(f"table too small: no member at or above {y}")
    left = int(elements[pos - 1]) if pos > 0 else None
    return left, int(elements[pos])


def nearest_distance(table: TwoSquareTable, y: float) -> float:
    """Distance from real y >= 0 to the nearest representable number.

    Exact whenever the table contains a member >= y: any member beyond the
    bracketing pair is farther away.
    """
    y = float(y)
    if not (math.isfinite(y) and y >= 0):
        raise ValueError("y must be finite and >= 0")
    left, right = _bracket(table.elements, y)
    if left is None:
        return float(right) - y  # below s_1 = 1 the nearest member is 1
    return min(y - left, right - y)


def nearest_distance_many(table: TwoSquareTable, ys: np.ndarray) -> np.ndarray:
    """Vectorized nearest_distance for a batch of points."""
    ys = np.asarray(ys, dtype=float)
    if np.any(ys < 0) or not np.all(np.isfinite(ys)):
        raise ValueError("points must be finite and >= 0")
    elements = table.elements
    pos = np.searchsorted(elements, ys)
    if np.any(pos == len(elements)):
        raise ValueError("table too small for some points")
    right = elements[pos].astype(float) - ys
    has_left = pos > 0
    left = np.where(has_left, ys - elements[np.maximum(pos - 1, 0)], np.inf)
    return np.minimum(left, right)


def circle_lattice_distance(table: TwoSquareTable, n: float) -> float:
    """Distance between the circle of radius sqrt(n) and the integer lattice.

    Equals min over lattice radii m in {0} union S of |sqrt(n) - sqrt(m)|;
    since sqrt is monotone, the minimum is attained by a bracketing radius.
    """
    n = float(n)
    if not (math.isfinite(n) and n > 0):
        raise ValueError("n must be finite and > 0")
    left, right = _bracket(table.elements, n)
    root = math.sqrt(n)
    left_dist = root if left is None else root - math.sqrt(left)  # radius 0 is a lattice point
    return min(left_dist, math.sqrt(right) - root)


# ----------------------------------------------------------------------------
# Gaps
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GapRecord:
    s_lo: int
    s_hi: int
    gap: int


def gap_array(table: TwoSquareTable) -> np.ndarray:
    """All consecutive member pairs as an (K, 2) int64 array (lo, hi), cached on the table."""
    if table._gap_cache is None:
        e = table.elements
        arr = np.stack([e[:-1], e[1:]], axis=1)
        arr.flags.writeable = False
        table._gap_cache = arr
    return table._gap_cache


def gaps(table: TwoSquareTable) -> Iterator[GapRecord]:
    """Consecutive-pair records in increasing order."""
    for lo, hi in gap_array(table):
        yield GapRecord(int(lo), int(hi), int(hi - lo))


def record_gaps(table: TwoSquareTable) -> list[GapRecord]:
    """Gaps strictly larger than every earlier gap (the frozen-fixture series)."""
    arr = gap_array(table)
    widths = arr[:, 1] - arr[:, 0]
    prev_best = np.maximum.accumulate(np.concatenate([[0], widths[:-1]]))
    return [GapRecord(int(arr[i, 0]), int(arr[i, 1]), int(widths[i]))
            for i in np.flatnonzero(widths > prev_best)]


def two_square_defect(n: int) -> int:
    """n minus the nearest-below sum of two squares produced by double square peeling.

    With f(x) = x - isqrt(x)^2, both x - f(x) and f(x) - f(f(x)) are squares,
    so n - f(f(n)) is a sum of two squares and f(f(n)) <= 2 sqrt(2) n^{1/4}.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be >= 0")
    f1 = n - math.isqrt(n) ** 2
    return f1 - math.isqrt(f1) ** 2


# ----------------------------------------------------------------------------
# Bitset cache
# ----------------------------------------------------------------------------

class InvalidCacheError(ValueError):
    """Cache file is missing, malformed, or was written for another x_max."""


def save_table(table: TwoSquareTable, path) -> None:
    """Raw little-endian bitset with an 8-byte magic and 8-byte x_max header."""
    packed = np.packbits(table.bits, bitorder="little")
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(np.uint64(table.x_max).tobytes())
        fh.write(packed.tobytes())


def load_table(path, expected_x_max: int | None = None) -> TwoSquareTable:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise InvalidCacheError(f"bad magic in {path!r}")
        header = fh.read(8)
        if len(header) != 8:
            raise InvalidCacheError(f"truncated header in {path!r}")
        x_max = int(np.frombuffer(header, dtype=np.uint64)[0])
        if expected_x_max is not None and x_max != expected_x_max:
            raise InvalidCacheError(f"cache holds x_max={x_max}, expected {expected_x_max}")
        payload = np.frombuffer(fh.read(), dtype=np.uint8)
    need_bytes = (x_max + 1 + 7) // 8
    if payload.size != need_bytes:
        raise InvalidCacheError(f"cache payload has {payload.size} bytes, expected {need_bytes}")
    bits = np.unpackbits(payload, count=x_max + 1, bitorder="little").astype(bool)
    return TwoSquareTable(x_max, bits)


def cache_path(cache_dir, x_max: int) -> str:
    return os.path.join(cache_dir, f"s2_{x_max}.bits")


def load_or_build(x_max: int, cache_dir=None,
                  segment_size: int = DEFAULT_SEGMENT_SIZE) -> TwoSquareTable:
    """Load the bitset cache when its header matches, else sieve and refresh it."""
    if cache_dir is None:
        return sieve_two_squares(x_max, segment_size)
    os.makedirs(cache_dir, exist_ok=True)
    path = cache_path(cache_dir, x_max)
    if os.path.exists(path):
        try:
            return load_table(path, expected_x_max=x_max)
        except InvalidCacheError:
            pass  # stale or foreign file: rebuild below
    table = sieve_two_squares(x_max, segment_size)
    save_table(table, path)
    return table
