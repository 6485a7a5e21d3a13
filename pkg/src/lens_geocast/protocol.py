"""Two-phase geocast over a sampled highway placement.

Phase I carries the message from a virtual source at a cell centre to any node
inside the geocast cells, one greedy hop at a time: each hop picks the most
forward node that lies in the current cell's candidate region, within radio
range of the current holder and strictly ahead of it.  Phase II floods the
geocast cells from the node that received the message.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .analytics import NodeField
from .geometry import (
    ForwardHalfDisk,
    HighwayModel,
    Lens,
    Region,
    SectorZone,
    region_contains,
)
from .montecarlo import MIN_TRIALS, SimEstimate, SimulationError, map_trials, sample_placement


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class ZonePolicy:
    """Which region a holder searches for its next relay.

    ``lens_only`` uses the lens shared with the next cell, ``fixed_zone`` one
    forwarding zone, and ``escalating`` widens zone 3 -> 2 -> 1 -> forward
    half-disk whenever the current level has no candidate.
    """

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind == "fixed_zone":
            if self.k not in (1, 2, 3):
                raise ProtocolError(f"fixed zone needs k in 1..3, got {self.k!r}")
        elif self.kind in ("lens_only", "escalating"):
            if self.k is not None:
                raise ProtocolError(f"{self.kind} takes no zone number")
        else:
            raise ProtocolError(f"unknown zone policy {self.kind!r}")

    @property
    def levels(self) -> int:
        return 4 if self.kind == "escalating" else 1

    def __str__(self):
        return f"fixed_zone_{self.k}" if self.kind == "fixed_zone" else self.kind

    @classmethod
    def parse(cls, text: str) -> "ZonePolicy":
        text = text.strip()
        if text.startswith("fixed_zone_") and text[-1:].isdigit():
            return cls("fixed_zone", int(text[len("fixed_zone_"):]))
        return cls(text)


LENS_ONLY = ZonePolicy("lens_only")
ESCALATING = ZonePolicy("escalating")


def fixed_zone(k: int) -> ZonePolicy:
    return ZonePolicy("fixed_zone", k)


@dataclass(frozen=True)
class GeocastScenario:
    source_cell: int
    geocast_cells: tuple[int, int]
    zone_policy: ZonePolicy
    max_hops: int

    def validate(self, model: HighwayModel) -> None:
        lo, hi = self.geocast_cells
        if not 0 <= self.source_cell < lo <= hi < model.n:
            raise ProtocolError(
                f"need 0 <= source_cell < g_lo <= g_hi < {model.n}, got "
                f"source_cell={self.source_cell}, geocast={lo}..{hi}")
        if self.max_hops < 1:
            raise ProtocolError(f"max_hops must be >= 1, got {self.max_hops}")

    @property
    def lens_hops(self) -> int:
        """Number of lenses between the source cell and the geocast region."""
        return self.geocast_cells[0] - self.source_cell


@dataclass(frozen=True)
class DeliveryResult:
    delivered: bool
    phase1_hops: int
    relays_used: int
    escalations: int
    phase2_reached: int
    phase2_total: int
    entry_node: int = -1  # index of the node that entered the geocast region


def candidate_region(model: HighwayModel, current_cell: int, zone_policy: ZonePolicy,
                     escalation_level: int = 0) -> Region:
    if not 0 <= escalation_level < zone_policy.levels:
        raise ProtocolError(
            f"escalation level {escalation_level} invalid for policy {zone_policy}")
    if not 0 <= current_cell < model.n:
        raise ProtocolError(f"cell {current_cell} out of range")
    if zone_policy.kind == "lens_only":
        return Lens(current_cell)
    if zone_policy.kind == "fixed_zone":
        return SectorZone(current_cell, zone_policy.k)
    if escalation_level == 3:
        return ForwardHalfDisk(current_cell)
    return SectorZone(current_cell, 3 - escalation_level)


def flood_reached(points: np.ndarray, entry: int, radius: float, block: int = 256) -> int:
    """Size of the unit-disk connected component containing ``points[entry]``.

    Breadth-first, one frontier at a time: each round only tests frontier
    nodes against nodes not yet reached, so a dense cluster is absorbed in
    one or two vectorised rounds.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return 0
    r2 = radius * radius
    unseen = np.ones(len(pts), dtype=bool)
    unseen[entry] = False
    frontier = np.array([entry])
    while len(frontier):
        rest = np.flatnonzero(unseen)
        if not len(rest):
            break
        hit = np.zeros(len(rest), dtype=bool)
        for s in range(0, len(frontier), block):
            f = pts[frontier[s:s + block]]
            d = pts[rest, None, :] - f[None, :, :]
            hit |= ((d * d).sum(axis=2) <= r2).any(axis=1)
        frontier = rest[hit]
        unseen[frontier] = False
    return int(len(pts) - np.count_nonzero(unseen))


def run_geocast(positions, model: HighwayModel, scenario: GeocastScenario) -> DeliveryResult:
    """Deliver one message over a fixed node placement.

    ``positions`` is a :class:`~lens_geocast.montecarlo.Placement` or an
    ``(k, 2)`` array.  Ties for the most forward candidate go to the smaller
    ``y``, then to the earlier node.
    """
    scenario.validate(model)
    pos = np.asarray(getattr(positions, "positions", positions), dtype=float).reshape(-1, 2)
    R, L = model.R, model.L
    g_lo, g_hi = scenario.geocast_cells
    x_lo, x_hi = g_lo * L, (g_hi + 1) * L
    in_geocast = (pos[:, 0] >= x_lo) & (pos[:, 0] <= x_hi)
    phase2_total = int(np.count_nonzero(in_geocast))
    policy = scenario.zone_policy

    hx, hy = model.cell_center(scenario.source_cell)
    cell = scenario.source_cell
    hops = escalations = 0
    holder = -1
    delivered = False

    while hops < scenario.max_hops:
        ahead = pos[:, 0] > hx
        dx, dy = pos[:, 0] - hx, pos[:, 1] - hy
        reach = ahead & (dx * dx + dy * dy <= R * R)
        candidates = np.empty(0, dtype=int)
        for level in range(policy.levels):
            if level:
                escalations += 1
            if policy.kind == "lens_only" and cell >= model.n - 1:
                break
            region = candidate_region(model, cell, policy, level)
            candidates = np.flatnonzero(reach & region_contains(region, pos, model))
            if len(candidates):
                break
        if not len(candidates):
            break
        cx, cy = pos[candidates, 0], pos[candidates, 1]
        holder = int(candidates[np.lexsort((candidates, cy, -cx))[0]])
        hx, hy = pos[holder]
        hops += 1
        if in_geocast[holder]:
            delivered = True
            break
        if hx > x_hi:
            break  # overshot; x only increases from here
        cell = int(model.cell_of(hx))

    reached = 0
    if delivered:
        members = np.flatnonzero(in_geocast)
        entry = int(np.searchsorted(members, holder))
        reached = flood_reached(pos[members], entry, R)
    return DeliveryResult(delivered, hops, hops, escalations, reached, phase2_total,
                          holder if delivered else -1)


def _geocast_chunk(field, model, scenarios, seed, start, stop):
    out = []
    for t in range(start, stop):
        pos = sample_placement(field, model, seed, t).positions
        out.append(tuple(run_geocast(pos, model, s) for s in scenarios))
    return out


def geocast_trials(field: NodeField, model: HighwayModel, scenarios: Sequence[GeocastScenario],
                   trials: int, seed: int, workers: int = 1) -> list[tuple[DeliveryResult, ...]]:
    """Run every scenario on the same placement for each trial (paired seeds)."""
    for s in scenarios:
        s.validate(model)
    fn = partial(_geocast_chunk, field, model, tuple(scenarios), seed)
    return map_trials(fn, trials, workers, chunk=500)


def delivery_ratio(field: NodeField, model: HighwayModel, scenario: GeocastScenario,
                   trials: int, seed: int, workers: int = 1) -> SimEstimate:
    if trials < MIN_TRIALS:
        raise SimulationError(f"need at least {MIN_TRIALS} trials, got {trials}")
    results = geocast_trials(field, model, [scenario], trials, seed, workers)
    return SimEstimate.from_counts(sum(r[0].delivered for r in results), trials)
