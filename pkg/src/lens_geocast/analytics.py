"""Closed-form node-count probabilities under a homogeneous planar Poisson field."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CHORD_CONSISTENT,
    PAPER_LITERAL,
    GeometryError,
    HighwayModel,
    Lens,
    Region,
    lens_area,
    lens_area_exact,
    lens_area_paper,
    region_area,
    region_bbox,
    zone_area,
)

EVENTS = ("void", "at_least_one")


class AnalyticsError(ValueError):
    pass


class UnreachableTarget(AnalyticsError):
    """No radius in the search range meets the requested void probability."""


@dataclass(frozen=True)
class NodeField:
    """Node population: Poisson intensity, or ``N`` nodes spread over area ``A``.

    A fixed population is treated analytically as Poisson with ``lambda = N/A``.
    """

    kind: str
    lam: float = 0.0
    N: int = 0
    area: float = 0.0

    def __post_init__(self):
        if self.kind == "poisson":
            if not (self.lam >= 0 and math.isfinite(self.lam)):
                raise AnalyticsError(f"intensity must be finite and >= 0, got {self.lam!r}")
        elif self.kind == "fixed":
            if int(self.N) != self.N or self.N < 0:
                raise AnalyticsError(f"node count must be a non-negative integer, got {self.N!r}")
            if not (self.area > 0 and math.isfinite(self.area)):
                raise AnalyticsError(f"area must be > 0, got {self.area!r}")
        else:
            raise AnalyticsError(f"unknown field kind {self.kind!r}")

    @classmethod
    def poisson(cls, lam: float) -> "NodeField":
        return cls("poisson", lam=float(lam))

    @classmethod
    def fixed(cls, N: int, area: float) -> "NodeField":
        return cls("fixed", N=int(N), area=float(area))

    @property
    def effective_lambda(self) -> float:
        if self.kind == "poisson":
            return self.lam
        return self.N / self.area


def _check_mean_m(mean, m):
    if not mean >= 0:
        raise AnalyticsError(f"mean must be >= 0, got {mean!r}")
    if int(m) != m or m < 0:
        raise AnalyticsError(f"count must be a non-negative integer, got {m!r}")


def poisson_pmf(mean: float, m: int) -> float:
    """P(X = m) for X ~ Poisson(mean); log-space once terms could overflow."""
    _check_mean_m(mean, m)
    m = int(m)
    if mean == 0:
        return 1.0 if m == 0 else 0.0
    if mean > 50 or m > 20:
        return math.exp(m * math.log(mean) - mean - math.lgamma(m + 1))
    return mean**m * math.exp(-mean) / math.factorial(m)


def poisson_cdf(mean: float, m: int) -> float:
    """P(X <= m), summed from the pmf."""
    _check_mean_m(mean, m)
    return min(1.0, math.fsum(poisson_pmf(mean, j) for j in range(int(m) + 1)))


def _mean(field: NodeField, area: float) -> float:
    if area < 0:
        raise AnalyticsError(f"area must be >= 0, got {area!r}")
    return field.effective_lambda * area


def p_void(field: NodeField, area: float) -> float:
    """Probability that a region of the given area holds no node."""
    return poisson_pmf(_mean(field, area), 0)


def p_at_least_one(field: NodeField, area: float) -> float:
    return -math.expm1(-_mean(field, area))


def p_m_in_lens(field: NodeField, model: HighwayModel, m: int) -> float:
    return poisson_pmf(_mean(field, lens_area(model)), m)


def p_void_zone(field: NodeField, model: HighwayModel, k: int) -> float:
    return p_void(field, zone_area(model, k))


def p_m_in_zone(field: NodeField, model: HighwayModel, k: int, m: int) -> float:
    return poisson_pmf(_mean(field, zone_area(model, k)), m)


def analytic_area(region: Region, model: HighwayModel) -> float:
    """Area fed to the closed forms: the mode-dependent lens area for lenses."""
    if isinstance(region, Lens):
        region_area(region, model)  # index check
        return lens_area(model)
    return region_area(region, model)


def parse_event(event: str) -> tuple[str, int | None]:
    """Split ``'void'``, ``'at_least_one'`` or ``'exactly_<m>'`` into (kind, m)."""
    if event in EVENTS:
        return event, None
    if event.startswith("exactly_"):
        tail = event[len("exactly_"):]
        if tail.isdigit():
            return "exactly", int(tail)
    raise AnalyticsError(f"unknown event {event!r}")


def region_probability(field: NodeField, model: HighwayModel, region: Region, event: str) -> float:
    kind, m = parse_event(event)
    area = analytic_area(region, model)
    if kind == "void":
        return p_void(field, area)
    if kind == "at_least_one":
        return p_at_least_one(field, area)
    return poisson_pmf(_mean(field, area), m)


# --------------------------------------------------------------------------
# Planning queries


def _target_area(R, W, L, target, mode):
    if mode == CHORD_CONSISTENT:
        L = math.sqrt(4 * R * R - W * W)
    if target == "lens":
        if mode == PAPER_LITERAL:
            return lens_area_paper(R, W, L)
        return lens_area_exact(R, L)
    return math.atan(W / (2 ** (target - 1) * L)) * R * R


def min_radius_for_void(field: NodeField, W: float, L: float | None, target,
                        epsilon: float, mode: str = PAPER_LITERAL,
                        r_max: float = 1e6, resolution: float = 0.01,
                        scan_points: int = 4000) -> float:
    """Smallest radius whose void probability in ``target`` is at most ``epsilon``.

    ``target`` is ``"lens"`` or a zone number 1-3.  In ``paper_literal`` mode
    ``W`` and ``L`` stay fixed while ``R`` varies; in ``chord_consistent`` mode
    ``L`` is re-derived from ``R`` (pass ``L=None``).  The range ``(W/2, r_max]``
    is scanned on a geometric grid and the first qualifying bracket is bisected
    down to ``resolution`` metres.  A result equal to the scan floor
    ``W/2 + resolution`` means the whole range qualifies.

    Raises
    ------
    UnreachableTarget
        If no scanned radius qualifies, which happens for chord-consistent
        lenses whose area shrinks as ``R`` grows.
    """
    if not 0 < epsilon <= 1:
        raise AnalyticsError(f"epsilon must lie in (0, 1], got {epsilon!r}")
    if target != "lens" and target not in (1, 2, 3):
        raise AnalyticsError(f"target must be 'lens' or a zone number, got {target!r}")
    if mode == PAPER_LITERAL and not (L is not None and L > 0):
        raise AnalyticsError("paper_literal mode needs a fixed cell length L > 0")
    if W < 0:
        raise GeometryError(f"W must be >= 0, got {W}")

    lam = field.effective_lambda

    def ok(R):
        try:
            area = _target_area(R, W, L, target, mode)
        except (GeometryError, ValueError):
            return False
        return area >= 0 and math.exp(-lam * area) <= epsilon

    lo = W / 2 + resolution
    if ok(lo):
        return lo
    grid = np.geomspace(lo, r_max, scan_points)
    prev = lo
    for R in grid[1:]:
        if ok(R):
            a, b = prev, float(R)
            while b - a > resolution:
                mid = 0.5 * (a + b)
                if ok(mid):
                    b = mid
                else:
                    a = mid
            return b
        prev = float(R)
    raise UnreachableTarget(
        f"void probability never drops to {epsilon} for R in ({W / 2}, {r_max}]")


def lenses_disjoint(model: HighwayModel) -> bool:
    """Whether successive lenses meet at most in a single point.

    Lenses are convex and symmetric about the road axis, so two of them overlap
    exactly when their x-extents do; non-adjacent lenses lie further apart.
    """
    if model.n < 3:
        return True
    a = region_bbox(Lens(0), model)
    b = region_bbox(Lens(1), model)
    return a[1] <= b[0]


def end_to_end_connectivity(field: NodeField, model: HighwayModel, hops: int) -> float:
    """Probability that ``hops`` successive lenses each hold at least one node."""
    if int(hops) != hops or not 1 <= hops <= model.n - 1:
        raise AnalyticsError(f"hops must lie in [1, {model.n - 1}], got {hops!r}")
    if hops > 1 and not lenses_disjoint(model):
        raise AnalyticsError("overlapping lenses - independence assumption violated")
    return p_at_least_one(field, lens_area_exact(model.R, model.L)) ** int(hops)
