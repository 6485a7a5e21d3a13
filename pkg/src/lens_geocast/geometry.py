"""Planar geometry of a highway split into equal rectangular cells.

Cell ``i`` occupies ``x in [i*L, (i+1)*L]`` and ``y in [0, W]``; its covering
disk of radius ``R`` is centred at ``((i + 0.5)*L, W/2)``.  Two successive
disks overlap in a lens, and each cell owns three nested circular sectors
(forwarding zones) opening along ``+x``.

All angles are radians.  Regions are closed sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

CHORD_CONSISTENT = "chord_consistent"
PAPER_LITERAL = "paper_literal"
MODES = (CHORD_CONSISTENT, PAPER_LITERAL)

# relative slack on squared-distance tests so that points constructed to lie
# exactly on a boundary (e.g. cell corners in chord-consistent mode) stay inside
_SLACK = 1e-12


class GeometryError(ValueError):
    """Raised for inputs outside the domain of a geometric quantity."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class HighwayModel:
    """Road width ``W``, cell length ``L``, radio range ``R`` and cell count ``n``.

    In ``chord_consistent`` mode the covering circle passes through the cell
    corners, i.e. ``L = sqrt(4R^2 - W^2)``.  Use :meth:`chord_consistent` to
    build one from ``R`` and ``W``.  In ``paper_literal`` mode the three lengths
    are independent.
    """

    W: float
    L: float
    R: float
    n: int = 2
    mode: str = PAPER_LITERAL

    def __post_init__(self):
        for name in ("W", "L", "R"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise GeometryError(f"{name} must be a positive finite number, got {v!r}")
        if not self.R > self.W / 2:
            raise GeometryError(f"R must exceed W/2 (R={self.R}, W={self.W})")
        if int(self.n) != self.n or self.n < 2:
            raise GeometryError(f"cell count must be an integer >= 2, got {self.n!r}")
        if self.mode not in MODES:
            raise GeometryError(f"unknown mode {self.mode!r}")
        if self.mode == CHORD_CONSISTENT:
            expected = math.sqrt(4 * self.R**2 - self.W**2)
            if abs(self.L - expected) > 1e-9 * self.R:
                raise GeometryError(
                    f"L={self.L} is not chord-consistent with R={self.R}, W={self.W} "
                    f"(expected {expected})")

    @classmethod
    def chord_consistent(cls, R: float, W: float, n: int = 2) -> "HighwayModel":
        return cls(W=W, L=cell_length_from_radius(R, W), R=R, n=n, mode=CHORD_CONSISTENT)

    @property
    def length(self) -> float:
        return self.n * self.L

    @property
    def strip_area(self) -> float:
        return self.n * self.L * self.W

    def cell_center(self, i: int) -> Point:
        return Point((i + 0.5) * self.L, self.W / 2)

    def cell_of(self, x):
        """Index of the cell whose half-open span ``[iL, (i+1)L)`` holds ``x``."""
        return np.clip(np.floor_divide(x, self.L), 0, self.n - 1).astype(int)


# --------------------------------------------------------------------------
# Regions


class Region:
    """Base class of the measurable, sampleable subsets of the plane."""

    __slots__ = ()


@dataclass(frozen=True)
class Lens(Region):
    """Overlap of the covering disks of cells ``i`` and ``i + 1``."""

    i: int


@dataclass(frozen=True)
class SectorZone(Region):
    """Forwarding zone ``k`` of cell ``i``: sector of half-angle atan(W / (2^(k-1) L))."""

    i: int
    k: int


@dataclass(frozen=True)
class CellRect(Region):
    i: int


@dataclass(frozen=True)
class Strip(Region):
    pass


@dataclass(frozen=True)
class ForwardHalfDisk(Region):
    """Half of the covering disk of cell ``i`` with ``x >= x_i``."""

    i: int


def _check_region(region: Region, model: HighwayModel) -> None:
    if isinstance(region, Strip):
        return
    if not isinstance(region, (Lens, SectorZone, CellRect, ForwardHalfDisk)):
        raise GeometryError(f"unsupported region {region!r}")
    hi = model.n - 1 if isinstance(region, Lens) else model.n
    if not (0 <= region.i < hi):
        raise GeometryError(f"{region!r} index out of range for {model.n} cells")
    if isinstance(region, SectorZone) and region.k not in (1, 2, 3):
        raise GeometryError(f"zone number must be 1, 2 or 3, got {region.k!r}")


# --------------------------------------------------------------------------
# Scalar formulas


def cell_length_from_radius(R: float, W: float) -> float:
    """Cell length for which the covering circle passes through the cell corners."""
    if W < 0 or W >= 2 * R:
        raise GeometryError(f"degenerate chord: need 0 <= W < 2R (R={R}, W={W})")
    return math.sqrt(4 * R * R - W * W)


def apex_angle(W: float, L: float) -> float:
    """Full opening angle ``2*atan(W/L)`` of the sector spanned by the cell's chord."""
    if not L > 0:
        raise GeometryError(f"L must be > 0, got {L}")
    if W < 0:
        raise GeometryError(f"W must be >= 0, got {W}")
    return 2.0 * math.atan(W / L)


def triangle_area(R: float, W: float) -> float:
    """Area of the isosceles triangle with legs ``R`` and base ``W``."""
    if W < 0 or W > 2 * R:
        raise GeometryError(f"need 0 <= W <= 2R (R={R}, W={W})")
    return W / 4.0 * math.sqrt(4 * R * R - W * W)


def sector_area(R: float, alpha: float) -> float:
    if not R > 0:
        raise GeometryError(f"R must be > 0, got {R}")
    if not 0 <= alpha <= 2 * math.pi:
        raise GeometryError(f"angle must lie in [0, 2*pi], got {alpha}")
    return 0.5 * alpha * R * R


def lens_area_paper(R: float, W: float, L: float) -> float:
    """Intersection-area formula written from road width and cell length.

    Twice the difference between the sector of opening ``2*atan(W/L)`` and the
    triangle on the chord ``W``::

        A = 2 R^2 atan(W/L) - (W/2) sqrt(4R^2 - W^2)

    It is the true lens area only when ``L = sqrt(4R^2 - W^2)``; for independent
    ``W, L, R`` it is just the formula and may even be negative.
    """
    if not R > 0:
        raise GeometryError(f"R must be > 0, got {R}")
    if W < 0 or W >= 2 * R:
        raise GeometryError(f"degenerate chord: need 0 <= W < 2R (R={R}, W={W})")
    return 2.0 * (sector_area(R, apex_angle(W, L)) - triangle_area(R, W))


def lens_area_exact(R: float, d: float) -> float:
    """Area shared by two radius-``R`` disks whose centres are ``d`` apart."""
    if not R > 0:
        raise GeometryError(f"R must be > 0, got {R}")
    if d < 0:
        raise GeometryError(f"distance must be >= 0, got {d}")
    if d >= 2 * R:
        return 0.0
    chord = math.sqrt((2 * R - d) * (2 * R + d))
    # acos(d / 2R), evaluated where acos itself loses digits (d close to 2R)
    theta = math.atan2(chord, d)
    return 2 * R * R * theta - d / 2 * chord


def zone_half_angle(model: HighwayModel, k: int) -> float:
    if k not in (1, 2, 3):
        raise GeometryError(f"zone number must be 1, 2 or 3, got {k!r}")
    return math.atan(model.W / (2 ** (k - 1) * model.L))


def zone_area(model: HighwayModel, k: int) -> float:
    """Area ``atan(W / (2^(k-1) L)) * R^2`` of forwarding zone ``k``."""
    return sector_area(model.R, 2 * zone_half_angle(model, k))


def lens_area(model: HighwayModel) -> float:
    """Intersection area used by the closed-form probabilities.

    The sector/triangle formula in ``paper_literal`` mode, the exact two-disk
    lens otherwise (the two agree when the model is chord-consistent).
    """
    if model.mode == PAPER_LITERAL:
        return lens_area_paper(model.R, model.W, model.L)
    return lens_area_exact(model.R, model.L)


# --------------------------------------------------------------------------
# Membership, areas and bounding boxes

PointLike = Union[Point, tuple, np.ndarray]


def _within(dx, dy, R):
    return dx * dx + dy * dy <= R * R * (1 + _SLACK)


def region_contains(region: Region, p: PointLike, model: HighwayModel):
    """Closed-set membership of ``p`` in ``region``.

    ``p`` may be a single point or an array of shape ``(..., 2)``; the result is
    a bool or a bool array of shape ``p.shape[:-1]`` accordingly.
    """
    _check_region(region, model)
    arr = np.asarray(p, dtype=float)
    x, y = arr[..., 0], arr[..., 1]
    R, L, W = model.R, model.L, model.W

    if isinstance(region, Strip):
        out = (x >= 0) & (x <= model.length) & (y >= 0) & (y <= W)
    elif isinstance(region, CellRect):
        out = (x >= region.i * L) & (x <= (region.i + 1) * L) & (y >= 0) & (y <= W)
    else:
        cx, cy = model.cell_center(region.i)
        dx, dy = x - cx, y - cy
        near = _within(dx, dy, R)
        if isinstance(region, Lens):
            out = near & _within(dx - L, dy, R)
        elif isinstance(region, ForwardHalfDisk):
            out = near & (dx >= 0)
        else:
            # |angle(p - c, +x)| <= atan(W / (2^(k-1) L)) without calling atan
            scale = 2 ** (region.k - 1) * L
            out = near & (dx >= 0) & (np.abs(dy) * scale <= dx * W * (1 + _SLACK))
    return bool(out) if np.ndim(out) == 0 else out


def region_area(region: Region, model: HighwayModel) -> float:
    _check_region(region, model)
    if isinstance(region, Lens):
        return lens_area_exact(model.R, model.L)
    if isinstance(region, SectorZone):
        return zone_area(model, region.k)
    if isinstance(region, CellRect):
        return model.L * model.W
    if isinstance(region, ForwardHalfDisk):
        return math.pi * model.R**2 / 2
    return model.strip_area


def region_bbox(region: Region, model: HighwayModel) -> tuple[float, float, float, float]:
    """Tight axis-aligned box ``(xmin, xmax, ymin, ymax)`` around ``region``."""
    _check_region(region, model)
    R, L, W = model.R, model.L, model.W
    if isinstance(region, Strip):
        return 0.0, model.length, 0.0, W
    if isinstance(region, CellRect):
        return region.i * L, (region.i + 1) * L, 0.0, W
    cx, cy = model.cell_center(region.i)
    if isinstance(region, Lens):
        if L >= 2 * R:
            return cx + L / 2, cx + L / 2, cy, cy
        h = math.sqrt(R * R - L * L / 4)
        return cx + L - R, cx + R, cy - h, cy + h
    if isinstance(region, ForwardHalfDisk):
        return cx, cx + R, cy - R, cy + R
    h = R * math.sin(zone_half_angle(model, region.k))
    return cx, cx + R, cy - h, cy + h


def region_within_strip(region: Region, model: HighwayModel) -> bool:
    """True when every point of ``region`` lies on the road strip."""
    xmin, xmax, ymin, ymax = region_bbox(region, model)
    tol = 1e-9 * model.R
    return xmin >= -tol and xmax <= model.length + tol and ymin >= -tol and ymax <= model.W + tol
