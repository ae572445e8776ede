"""CFA data model: mosaic frames, pattern arithmetic and lossless rearrangements.

Nothing in here interpolates; every operation only moves or drops samples, so
all results are bit-exact functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

DEFAULT_BLACK_LEVEL = 0
DEFAULT_WHITE_LEVEL = 1023


class PatternMismatchError(ValueError):
    """Raised when an operation receives a mosaic with the wrong CFA layout."""


class InvalidImageError(ValueError):
    """Raised for malformed frames: bad shapes, out-of-range values, bad crops."""


@dataclass(frozen=True)
class CfaPattern:
    """Color layout of one CFA tile, indexed by (row mod period, col mod period)."""

    name: str
    tile: tuple[str, ...]

    def __post_init__(self):
        n = len(self.tile)
        if n not in (2, 4) or any(len(row) != n for row in self.tile):
            raise ValueError(f"CFA tile must be square with period 2 or 4, got {self.tile!r}")
        if set("".join(self.tile)) - set("RGB"):
            raise ValueError(f"CFA tile may only hold R, G, B: {self.tile!r}")

    @property
    def period(self) -> int:
        return len(self.tile)

    @property
    def is_quad(self) -> bool:
        return self.period == 4

    def color_at(self, row: int, col: int) -> str:
        p = self.period
        return self.tile[row % p][col % p]

    def color_map(self, height: int, width: int) -> np.ndarray:
        """(height, width) array of channel indices 0/1/2 for R/G/B."""
        lut = {"R": 0, "G": 1, "B": 2}
        tile = np.array([[lut[c] for c in row] for row in self.tile], dtype=np.intp)
        p = self.period
        return np.tile(tile, (-(-height // p), -(-width // p)))[:height, :width]

    def shifted(self, drow: int, dcol: int) -> CfaPattern:
        """Pattern seen after dropping ``drow`` rows and ``dcol`` columns from the top-left."""
        p = self.period
        tile = tuple(
            "".join(self.color_at(r + drow, c + dcol) for c in range(p)) for r in range(p)
        )
        return _named(tile)


def _named(tile: tuple[str, ...]) -> CfaPattern:
    for pat in (QUAD, RGGB, GRBG, GBRG, BGGR):
        if pat.tile == tile:
            return pat
    return CfaPattern("custom", tile)


QUAD = CfaPattern("quad4", ("RRGG", "RRGG", "GGBB", "GGBB"))
RGGB = CfaPattern("rggb", ("RG", "GB"))
GRBG = CfaPattern("grbg", ("GR", "BG"))
GBRG = CfaPattern("gbrg", ("GB", "RG"))
BGGR = CfaPattern("bggr", ("BG", "GR"))


def canonical_pattern(period: int) -> CfaPattern:
    return QUAD if period == 4 else RGGB


@dataclass(frozen=True, eq=False)
class RawImage:
    """Single-plane mosaic with intensities normalized to [0, 1].

    ``black_level``/``white_level`` are the DN levels the data was normalized
    with; they travel along so the container format can round trip exactly.
    """

    data: np.ndarray
    pattern: CfaPattern
    black_level: int = DEFAULT_BLACK_LEVEL
    white_level: int = DEFAULT_WHITE_LEVEL
    gain_db: float = 0.0
    scene_id: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InvalidImageError(f"raw data must be 2-D, got shape {data.shape}")
        p = self.pattern.period
        h, w = data.shape
        if h == 0 or w == 0 or h % p or w % p:
            raise InvalidImageError(f"raw size {h}x{w} is not a positive multiple of the CFA period {p}")
        if not np.all(np.isfinite(data)) or data.min() < 0.0 or data.max() > 1.0:
            raise InvalidImageError("raw intensities must be finite and lie in [0, 1]")
        if self.white_level <= self.black_level:
            raise InvalidImageError("white_level must exceed black_level")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray, pattern: CfaPattern | None = None, **changes) -> RawImage:
        """Copy of this frame's metadata around new pixel data."""
        return replace(self, data=data, pattern=pattern or self.pattern, **changes)

    def to_dn(self) -> np.ndarray:
        scale = self.white_level - self.black_level
        return np.rint(self.data * scale).astype(np.int64) + self.black_level

    @classmethod
    def from_dn(cls, dn: np.ndarray, pattern: CfaPattern, black_level: int = DEFAULT_BLACK_LEVEL,
                white_level: int = DEFAULT_WHITE_LEVEL, **meta) -> RawImage:
        dn = np.asarray(dn, dtype=np.float64)
        data = np.clip((dn - black_level) / (white_level - black_level), 0.0, 1.0)
        return cls(data, pattern, black_level, white_level, **meta)

    def equals(self, other: RawImage) -> bool:
        """Bit-exact equality of pixels and metadata."""
        return (
            self.pattern == other.pattern
            and self.black_level == other.black_level
            and self.white_level == other.white_level
            and self.gain_db == other.gain_db
            and self.scene_id == other.scene_id
            and np.array_equal(self.data, other.data)
        )


@dataclass(frozen=True, eq=False)
class ColorPlaneSet:
    """The period**2 sub-sampled phases of a mosaic, in row-major phase order."""

    planes: np.ndarray  # (period**2, height // period, width // period)
    origin_offsets: tuple[tuple[int, int], ...]
    pattern: CfaPattern
    meta: dict = field(default_factory=dict)

    @property
    def colors(self) -> tuple[str, ...]:
        return tuple(self.pattern.color_at(r, c) for r, c in self.origin_offsets)


def decompose_planes(raw: RawImage) -> ColorPlaneSet:
    """Pixel-unshuffle: plane k holds raw[i*P + r_k, j*P + c_k]."""
    p = raw.pattern.period
    h, w = raw.data.shape
    if h % p or w % p:
        raise InvalidImageError(f"raw size {h}x{w} not divisible by period {p}")
    planes = raw.data.reshape(h // p, p, w // p, p).transpose(1, 3, 0, 2).reshape(p * p, h // p, w // p)
    offsets = tuple((r, c) for r in range(p) for c in range(p))
    meta = dict(black_level=raw.black_level, white_level=raw.white_level,
                gain_db=raw.gain_db, scene_id=raw.scene_id)
    return ColorPlaneSet(planes.copy(), offsets, raw.pattern, meta)


def recompose_planes(planes: ColorPlaneSet) -> RawImage:
    """Pixel-shuffle, the exact inverse of :func:`decompose_planes`."""
    stack = np.asarray(planes.planes, dtype=np.float64)
    p = planes.pattern.period
    if stack.ndim != 3 or stack.shape[0] != p * p or len(planes.origin_offsets) != p * p:
        raise InvalidImageError(f"expected {p * p} planes for period {p}, got array of shape {stack.shape}")
    if sorted(planes.origin_offsets) != [(r, c) for r in range(p) for c in range(p)]:
        raise InvalidImageError("plane offsets must cover every CFA phase exactly once")
    _, ph, pw = stack.shape
    out = np.empty((ph * p, pw * p), dtype=np.float64)
    for plane, (r, c) in zip(stack, planes.origin_offsets):
        out[r::p, c::p] = plane
    return RawImage(out, planes.pattern, **planes.meta)


def recompose_from_list(planes: list[np.ndarray], pattern: CfaPattern, **meta) -> RawImage:
    """Recompose from loose per-phase arrays; sizes must all agree."""
    shapes = {np.shape(pl) for pl in planes}
    if len(shapes) != 1:
        raise InvalidImageError(f"inconsistent plane sizes: {sorted(shapes)}")
    p = pattern.period
    offsets = tuple((r, c) for r in range(p) for c in range(p))
    return recompose_planes(ColorPlaneSet(np.stack(planes), offsets, pattern, meta))


_SWAP_ORDER = np.array([0, 2, 1, 3])


def swap_quad_units(data: np.ndarray) -> np.ndarray:
    """Swap columns 1<->2 then rows 1<->2 of every 4x4 unit (self-inverse)."""
    h, w = data.shape
    rows = (np.arange(h) // 4) * 4 + _SWAP_ORDER[np.arange(h) % 4]
    cols = (np.arange(w) // 4) * 4 + _SWAP_ORDER[np.arange(w) % 4]
    return data[np.ix_(rows, cols)]


def quad_swap(raw: RawImage) -> RawImage:
    """Rearrange a canonical Quad mosaic into RGGB Bayer without interpolation."""
    if raw.pattern != QUAD:
        raise PatternMismatchError(f"quad_swap needs a canonical quad4 mosaic, got {raw.pattern.name}")
    return raw.with_data(swap_quad_units(raw.data), RGGB)


def quad_unswap(bayer: RawImage) -> RawImage:
    """Inverse of :func:`quad_swap`; restores the Quad tag."""
    if bayer.pattern != RGGB:
        raise PatternMismatchError(f"quad_unswap needs an rggb mosaic, got {bayer.pattern.name}")
    if bayer.height % 4 or bayer.width % 4:
        raise InvalidImageError("quad_unswap needs dimensions divisible by 4")
    return bayer.with_data(swap_quad_units(bayer.data), QUAD)


@dataclass(frozen=True)
class GeomTransform:
    kind: Literal["crop", "flip_h", "flip_v", "transpose"]
    rect: tuple[int, int, int, int] | None = None  # (top, left, height, width), crop only

    def __post_init__(self):
        if self.kind not in ("crop", "flip_h", "flip_v", "transpose"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if (self.kind == "crop") != (self.rect is not None):
            raise ValueError("a crop needs a rect and only a crop takes one")


def _transform_pattern(pattern: CfaPattern, kind: str) -> CfaPattern:
    p = pattern.period
    if kind == "flip_h":
        tile = tuple("".join(pattern.color_at(r, p - 1 - c) for c in range(p)) for r in range(p))
    elif kind == "flip_v":
        tile = tuple("".join(pattern.color_at(p - 1 - r, c) for c in range(p)) for r in range(p))
    else:
        tile = tuple("".join(pattern.color_at(c, r) for c in range(p)) for r in range(p))
    return _named(tile)


def phase_offset(pattern: CfaPattern, target: CfaPattern) -> tuple[int, int]:
    """Smallest (rows, cols) to drop from the top-left so ``pattern`` reads as ``target``."""
    p = pattern.period
    for dr in range(p):
        for dc in range(p):
            if pattern.shifted(dr, dc).tile == target.tile:
                return dr, dc
    raise PatternMismatchError(f"{pattern.tile} cannot be shifted into {target.tile}")


def unify_phase(data: np.ndarray, pattern: CfaPattern, meta: RawImage) -> RawImage:
    """Crop ``data`` (laid out as ``pattern``) to the canonical phase for its period."""
    p = pattern.period
    target = canonical_pattern(p)
    dr, dc = phase_offset(pattern, target)
    h = (data.shape[0] - dr) // p * p
    w = (data.shape[1] - dc) // p * p
    if h <= 0 or w <= 0:
        raise InvalidImageError("nothing left after aligning the CFA phase")
    return meta.with_data(data[dr:dr + h, dc:dc + w], target)


def apply_transform(raw: RawImage, t: GeomTransform) -> RawImage:
    """Apply a geometric augmentation, then crop back to canonical CFA phase."""
    data = raw.data
    if t.kind == "crop":
        top, left, h, w = t.rect
        if top < 0 or left < 0 or h <= 0 or w <= 0 or top + h > raw.height or left + w > raw.width:
            raise InvalidImageError(f"crop {t.rect} falls outside the {raw.height}x{raw.width} frame")
        cropped = data[top:top + h, left:left + w]
        pattern = raw.pattern.shifted(top, left)
        return unify_phase(cropped, pattern, raw)
    if t.kind == "flip_h":
        out = data[:, ::-1]
    elif t.kind == "flip_v":
        out = data[::-1, :]
    else:
        out = data.T
    return unify_phase(out, _transform_pattern(raw.pattern, t.kind), raw)
