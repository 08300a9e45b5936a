"""256x256 register planes and the kernel operations built on them.

Emulates the digital register planes of a pixel-processor array in
deterministic sequential form. Planes are immutable values: every
operation is a pure function returning a new plane, so planes can be
shared across threads without locking.

Indexing convention: (x, y) = (row, col), row 0 is the top of the image
and row 255 the bottom (nearest the robot).
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

PLANE_SIZE = 256
PLANE_SHAPE = (PLANE_SIZE, PLANE_SIZE)


class PixelCoord(NamedTuple):
    x: int  # row
    y: int  # col


class BoundingBox(NamedTuple):
    x_min: int
    x_max: int
    y_min: int
    y_max: int

    @property
    def bottom_center(self) -> PixelCoord:
        # floor of the column midpoint: deterministic tie-break on even widths
        return PixelCoord(self.x_max, (self.y_min + self.y_max) // 2)


def _lock(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class GrayPlane:
    """8-bit intensity plane."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.shape != PLANE_SHAPE:
            raise ValueError(f"gray plane must be {PLANE_SHAPE}, got {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("gray plane values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        else:
            arr = arr.copy()
        self.pixels = _lock(arr)

    @classmethod
    def uniform(cls, value: int) -> "GrayPlane":
        return cls(np.full(PLANE_SHAPE, value, dtype=np.uint8))

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()

    @classmethod
    def from_bytes(cls, raw: bytes) -> "GrayPlane":
        return cls(np.frombuffer(raw, dtype=np.uint8).reshape(PLANE_SHAPE))

    def __eq__(self, other):
        return isinstance(other, GrayPlane) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayPlane(min={self.pixels.min()}, max={self.pixels.max()})"


class BitPlane:
    """1-bit plane (a digital register across all pixels)."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.shape != PLANE_SHAPE:
            raise ValueError(f"bit plane must be {PLANE_SHAPE}, got {arr.shape}")
        if arr.dtype != np.bool_:
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError("bit plane values must be 0 or 1")
            arr = arr.astype(bool)
        else:
            arr = arr.copy()
        self.bits = _lock(arr)

    @classmethod
    def zeros(cls) -> "BitPlane":
        return cls(np.zeros(PLANE_SHAPE, dtype=bool))

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    def __eq__(self, other):
        return isinstance(other, BitPlane) and np.array_equal(self.bits, other.bits)

    def __xor__(self, other: "BitPlane") -> "BitPlane":
        return xor(self, other)

    def __invert__(self) -> "BitPlane":
        return invert(self)

    def __repr__(self):
        return f"BitPlane(popcount={self.popcount})"


def threshold(g: GrayPlane, t: int, polarity: str = "above") -> BitPlane:
    """Binarize: 'above' sets bits where g >= t, 'below' where g < t."""
    if polarity == "above":
        return BitPlane(g.pixels >= t)
    if polarity == "below":
        return BitPlane(g.pixels < t)
    raise ValueError(f"polarity must be 'above' or 'below', got {polarity!r}")


def _shift(bits: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Shift a plane by (dx, dy) rows/cols, filling vacated pixels with 0."""
    out = np.zeros(PLANE_SHAPE, dtype=bool)
    xs_dst = slice(max(dx, 0), PLANE_SIZE + min(dx, 0))
    ys_dst = slice(max(dy, 0), PLANE_SIZE + min(dy, 0))
    xs_src = slice(max(-dx, 0), PLANE_SIZE + min(-dx, 0))
    ys_src = slice(max(-dy, 0), PLANE_SIZE + min(-dy, 0))
    out[xs_dst, ys_dst] = bits[xs_src, ys_src]
    return out


_KERNEL_3X3 = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]


def filter_noise(b: BitPlane) -> BitPlane:
    """Speckle removal: morphological opening with a 3x3 square element."""
    if not b.bits.any():
        return b
    eroded = np.ones(PLANE_SHAPE, dtype=bool)
    for dx, dy in _KERNEL_3X3:
        eroded &= _shift(b.bits, dx, dy)
    dilated = np.zeros(PLANE_SHAPE, dtype=bool)
    for dx, dy in _KERNEL_3X3:
        dilated |= _shift(eroded, dx, dy)
    return BitPlane(dilated)


def global_or(b: BitPlane) -> bool:
    """True iff at least one bit is set."""
    return bool(b.bits.any())


def scan_first_event(b: BitPlane) -> Optional[PixelCoord]:
    """First set bit in row-major order from (0,0); None on an empty plane."""
    flat = b.bits.reshape(-1)
    idx = int(flat.argmax())
    if not flat[idx]:
        return None
    return PixelCoord(*divmod(idx, PLANE_SIZE))


def load_point(c: PixelCoord) -> BitPlane:
    """Plane with exactly one bit set at c."""
    x, y = c
    if not (0 <= x < PLANE_SIZE and 0 <= y < PLANE_SIZE):
        raise ValueError(f"point {c} outside the {PLANE_SHAPE} plane")
    bits = np.zeros(PLANE_SHAPE, dtype=bool)
    bits[x, y] = True
    return BitPlane(bits)


def _mask_runs(m: np.ndarray):
    """Decompose a bit array into horizontal runs.

    Returns (row_of_run, start_col, end_col) arrays plus per-row slices
    into them, all in row-major order.
    """
    padded = np.zeros((PLANE_SIZE, PLANE_SIZE + 2), dtype=np.int8)
    padded[:, 1:-1] = m
    d = np.diff(padded, axis=1)
    start_rows, start_cols = np.nonzero(d == 1)
    _, end_cols = np.nonzero(d == -1)  # same row order as the starts
    row_slices = np.searchsorted(start_rows, np.arange(PLANE_SIZE + 1))
    return start_rows, start_cols, end_cols - 1, row_slices


def flood(seed: BitPlane, mask: BitPlane) -> BitPlane:
    """Propagate seed bits through 4-connected components of the mask.

    Returns the union of mask components containing at least one seed bit.
    Seed bits on a 0 mask pixel contribute nothing; a fully disjoint seed
    yields the all-zero plane. Implemented as breadth-first propagation
    over horizontal runs, equivalent to the hardware's synchronous
    nearest-neighbour spread.
    """
    m = mask.bits
    out = np.zeros(PLANE_SHAPE, dtype=bool)
    hits = np.argwhere(seed.bits & m)
    if hits.size == 0:
        return BitPlane(out)
    run_rows, starts, ends, row_slices = _mask_runs(m)
    visited = np.zeros(len(run_rows), dtype=bool)

    def run_at(x: int, y: int) -> int:
        lo, hi = row_slices[x], row_slices[x + 1]
        i = lo + int(np.searchsorted(starts[lo:hi], y, side="right")) - 1
        return i if lo <= i and ends[i] >= y else -1

    stack = []
    for x, y in hits:
        i = run_at(int(x), int(y))
        if i >= 0 and not visited[i]:
            visited[i] = True
            stack.append(i)
    while stack:
        i = stack.pop()
        x, s, e = int(run_rows[i]), int(starts[i]), int(ends[i])
        out[x, s : e + 1] = True
        for xn in (x - 1, x + 1):
            if not (0 <= xn < PLANE_SIZE):
                continue
            lo, hi = row_slices[xn], row_slices[xn + 1]
            # runs in the neighbour row overlapping [s, e]
            j = lo + int(np.searchsorted(ends[lo:hi], s))
            while j < hi and starts[j] <= e:
                if not visited[j]:
                    visited[j] = True
                    stack.append(j)
                j += 1
    return BitPlane(out)


def scan_bounding_box(b: BitPlane) -> BoundingBox:
    """Tight axis-aligned bounds of all set bits."""
    rows = np.flatnonzero(b.bits.any(axis=1))
    if rows.size == 0:
        raise ValueError("cannot take the bounding box of an empty plane")
    cols = np.flatnonzero(b.bits.any(axis=0))
    return BoundingBox(int(rows[0]), int(rows[-1]), int(cols[0]), int(cols[-1]))


def xor(a: BitPlane, b: BitPlane) -> BitPlane:
    return BitPlane(a.bits ^ b.bits)


def invert(a: BitPlane) -> BitPlane:
    return BitPlane(~a.bits)
