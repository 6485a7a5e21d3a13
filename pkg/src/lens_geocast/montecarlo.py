"""Monte Carlo placement of nodes on the road strip and empirical probabilities.

Every trial draws from its own Philox stream keyed by the master seed, with the
trial index in the top word of the 256-bit counter.  A trial's placement
therefore depends only on ``(seed, trial_index)``, and any split of the trial
range across worker processes gives bit-identical results.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np
from scipy.stats import norm

from .analytics import NodeField, parse_event, poisson_cdf
from .geometry import HighwayModel, Region, region_contains

MAX_EXPECTED_NODES = 1e8
MIN_TRIALS = 100
Z_PASS = 4.0
# two-sided normal tail beyond 4 sigma
TAIL_ALPHA = math.erfc(Z_PASS / math.sqrt(2))
RARE_P = 1e-6
# below this many expected hits (or misses) a z-test is not trusted
RARE_EXPECTED = 10.0
_Z95 = NormalDist().inv_cdf(0.975)


class SimulationError(ValueError):
    pass


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Generator for one trial, a pure function of ``(seed, trial_index)``."""
    if not 0 <= seed < 2**64:
        raise SimulationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    if trial_index < 0:
        raise SimulationError(f"trial index must be >= 0, got {trial_index!r}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial_index]))


@dataclass(frozen=True, eq=False)
class Placement:
    positions: np.ndarray  # shape (k, 2)
    master_seed: int
    trial_index: int
    field_mode: str

    def __len__(self):
        return len(self.positions)


def sample_placement(field: NodeField, model: HighwayModel, seed: int,
                     trial_index: int) -> Placement:
    """Nodes placed uniformly on the strip ``[0, nL] x [0, W]``.

    Poisson fields draw the node count from Poisson(lambda * strip area);
    fixed fields place exactly ``N`` nodes.
    """
    if field.kind == "fixed":
        expected = field.N
    else:
        expected = field.effective_lambda * model.strip_area
    if expected > MAX_EXPECTED_NODES:
        raise SimulationError(f"scale refused: {expected:.3g} expected nodes per trial")
    rng = trial_rng(seed, trial_index)
    count = field.N if field.kind == "fixed" else int(rng.poisson(expected))
    pos = rng.random((count, 2))
    pos *= (model.length, model.W)
    return Placement(pos, seed, trial_index, field.kind)


def count_in_region(p: Placement, region: Region, model: HighwayModel) -> int:
    if len(p.positions) == 0:
        region_contains(region, (0.0, 0.0), model)  # index check
        return 0
    return int(np.count_nonzero(region_contains(region, p.positions, model)))


# --------------------------------------------------------------------------
# Chunked, order-preserving trial execution


def map_trials(fn: Callable[[int, int], np.ndarray | list], trials: int,
               workers: int = 1, chunk: int = 2000):
    """Apply ``fn(start, stop)`` over ``range(trials)`` in chunks and concatenate.

    ``fn`` must be picklable when ``workers > 1``.  Chunk boundaries never
    affect the results because each trial seeds itself.
    """
    bounds = [(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]
    if workers <= 1 or len(bounds) <= 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, *zip(*bounds)))
    if parts and isinstance(parts[0], np.ndarray):
        return np.concatenate(parts)
    return [x for part in parts for x in part]


def _counts_chunk(field, model, regions, seed, start, stop):
    out = np.zeros((stop - start, len(regions)), dtype=np.int64)
    for row, t in enumerate(range(start, stop)):
        pos = sample_placement(field, model, seed, t).positions
        if len(pos):
            for j, region in enumerate(regions):
                out[row, j] = np.count_nonzero(region_contains(region, pos, model))
    return out


def region_counts(field: NodeField, model: HighwayModel, regions: Sequence[Region],
                  trials: int, seed: int, workers: int = 1) -> np.ndarray:
    """Node counts per trial and region, shape ``(trials, len(regions))``."""
    for region in regions:
        region_contains(region, (0.0, 0.0), model)  # index check
    fn = partial(_counts_chunk, field, model, tuple(regions), seed)
    return map_trials(fn, trials, workers)


# --------------------------------------------------------------------------
# Estimates


def wilson_interval(hits: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    p = hits / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class SimEstimate:
    trials: int
    hits: int
    p_hat: float
    std_err: float
    ci95_low: float
    ci95_high: float

    @classmethod
    def from_counts(cls, hits: int, trials: int) -> "SimEstimate":
        hits, trials = int(hits), int(trials)
        if trials <= 0 or not 0 <= hits <= trials:
            raise SimulationError(f"invalid counts hits={hits}, trials={trials}")
        p = hits / trials
        lo, hi = wilson_interval(hits, trials)
        return cls(trials, hits, p, math.sqrt(p * (1 - p) / trials), lo, hi)


def event_hits(counts: np.ndarray, event: str) -> np.ndarray:
    kind, m = parse_event(event)
    if kind == "void":
        return counts == 0
    if kind == "at_least_one":
        return counts > 0
    return counts == m


def estimate_probability(field: NodeField, model: HighwayModel, region: Region, event: str,
                         trials: int, seed: int, workers: int = 1) -> SimEstimate:
    if trials < MIN_TRIALS:
        raise SimulationError(f"need at least {MIN_TRIALS} trials, got {trials}")
    parse_event(event)
    counts = region_counts(field, model, [region], trials, seed, workers)[:, 0]
    return SimEstimate.from_counts(np.count_nonzero(event_hits(counts, event)), trials)


@dataclass(frozen=True)
class Comparison:
    z_score: float
    passed: bool
    method: str  # "z" or "exact_tail"
    p_value: float


def _exact_tail(k: int, mean: float) -> float:
    """Two-sided Poisson tail probability of observing ``k`` events."""
    lower = poisson_cdf(mean, k)
    upper = 1.0 if k == 0 else 1.0 - poisson_cdf(mean, k - 1)
    return min(1.0, 2 * min(lower, upper))


def compare_to_analytic(estimate: SimEstimate, analytic: float) -> Comparison:
    """Test an empirical frequency against a closed-form probability.

    A 4-sigma z-test on the Wald standard error, except when the event is rare
    (``analytic < 1e-6``) or so few hits or misses are expected that the normal
    approximation breaks down; then the observed count of the rarer outcome is
    checked against its exact Poisson tail at the same two-sided level, and
    ``z_score`` reports the normal quantile of that tail probability.
    """
    n = estimate.trials
    if n <= 0:
        raise SimulationError("estimate has no trials")
    q = min(analytic, 1 - analytic)
    if analytic < RARE_P or 1 - analytic < RARE_P or n * q < RARE_EXPECTED:
        if analytic <= 0.5:
            k, mean = estimate.hits, n * analytic
        else:
            k, mean = n - estimate.hits, n * (1 - analytic)
        pv = _exact_tail(k, mean)
        z = float(norm.isf(pv / 2)) if pv < 1 else 0.0
        z = math.copysign(z, estimate.p_hat - analytic)
        return Comparison(z, pv >= TAIL_ALPHA, "exact_tail", pv)

    diff = estimate.p_hat - analytic
    if estimate.std_err == 0:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    else:
        z = diff / estimate.std_err
    return Comparison(z, abs(z) <= Z_PASS, "z", math.erfc(abs(z) / math.sqrt(2)))
