import math

import numpy as np
import pytest
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from lens_geocast.analytics import NodeField, p_void, region_probability
from lens_geocast.geometry import (
    CellRect,
    HighwayModel,
    Lens,
    SectorZone,
    Strip,
    lens_area_exact,
    region_area,
)
from lens_geocast.montecarlo import (
    Placement,
    SimEstimate,
    SimulationError,
    compare_to_analytic,
    count_in_region,
    estimate_probability,
    map_trials,
    region_counts,
    sample_placement,
    trial_rng,
    wilson_interval,
)

CHORD = HighwayModel.chord_consistent(250.0, 150.0, n=2)
LENS_AREA = lens_area_exact(CHORD.R, CHORD.L)


def lam_for_lens_mean(mean, model=CHORD):
    return mean / lens_area_exact(model.R, model.L)


class TestPlacement:
    def test_fixed_counts(self):
        assert len(sample_placement(NodeField.fixed(0, 1.0), CHORD, 1, 0)) == 0
        p = sample_placement(NodeField.fixed(5, 1.0), CHORD, 1, 0)
        assert len(p) == 5
        assert count_in_region(p, Strip(), CHORD) == 5

    def test_pure_function_of_seed_and_index(self):
        f = NodeField.poisson(1e-3)
        a = sample_placement(f, CHORD, 42, 17).positions
        sample_placement(f, CHORD, 42, 3)
        b = sample_placement(f, CHORD, 42, 17).positions
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample_placement(f, CHORD, 42, 18).positions)
        assert not np.array_equal(a, sample_placement(f, CHORD, 43, 17).positions)

    def test_poisson_count_mean(self):
        m = HighwayModel(W=10, L=100, R=60, n=2)
        f = NodeField.poisson(20 / m.strip_area)
        counts = [len(sample_placement(f, m, 9, t)) for t in range(100_000)]
        assert abs(np.mean(counts) - 20) <= 4 * math.sqrt(20 / 100_000)

    def test_scale_refused(self):
        with pytest.raises(SimulationError, match="scale refused"):
            sample_placement(NodeField.poisson(1.0), HighwayModel(W=1e4, L=1e4, R=1e4), 0, 0)

    def test_seed_range(self):
        with pytest.raises(SimulationError):
            trial_rng(2**64, 0)
        with pytest.raises(SimulationError):
            trial_rng(-1, 0)
        trial_rng(2**64 - 1, 0)


class TestCounting:
    def test_empty(self):
        empty = Placement(np.empty((0, 2)), 0, 0, "fixed")
        assert count_in_region(empty, Lens(0), CHORD) == 0

    def test_all_at_centre(self):
        c = CHORD.cell_center(0)
        p = Placement(np.tile([c.x + 10, c.y], (7, 1)), 0, 0, "fixed")
        assert count_in_region(p, SectorZone(0, 3), CHORD) == 7

    def test_corner_on_lens_boundary(self):
        p = Placement(np.array([[CHORD.L, 0.0]]), 0, 0, "fixed")
        assert count_in_region(p, Lens(0), CHORD) == 1


class TestEstimates:
    def test_wilson_matches_statsmodels(self):
        for hits, n in [(0, 100), (1, 100), (50, 100), (100, 100), (2570, 10_000), (3, 100_000)]:
            lo, hi = wilson_interval(hits, n)
            ref = proportion_confint(hits, n, alpha=0.05, method="wilson")
            assert (lo, hi) == pytest.approx(ref, abs=1e-12)

    def test_from_counts(self):
        e = SimEstimate.from_counts(25, 100)
        assert e.p_hat == 0.25
        assert e.std_err == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
        assert 0 <= e.ci95_low < 0.25 < e.ci95_high <= 1
        with pytest.raises(SimulationError):
            SimEstimate.from_counts(101, 100)

    def test_lambda_zero(self):
        e = estimate_probability(NodeField.poisson(0.0), CHORD, Lens(0), "void", 100, 1)
        assert e.p_hat == 1 and e.std_err == 0

    def test_exactly_zero_is_void(self):
        f = NodeField.poisson(lam_for_lens_mean(1.0))
        a = estimate_probability(f, CHORD, Lens(0), "void", 500, 5)
        b = estimate_probability(f, CHORD, Lens(0), "exactly_0", 500, 5)
        assert a == b

    def test_min_trials(self):
        with pytest.raises(SimulationError):
            estimate_probability(NodeField.poisson(0.0), CHORD, Lens(0), "void", 99, 1)

    def test_table2_anchor(self):
        f = NodeField.poisson(lam_for_lens_mean(-math.log(0.2570)))
        e = estimate_probability(f, CHORD, Lens(0), "void", 100_000, 2024)
        assert abs(e.p_hat - 0.2570) <= 4 * e.std_err
        assert compare_to_analytic(e, p_void(f, LENS_AREA)).passed

    def test_single_region_matches_batched(self):
        f = NodeField.poisson(lam_for_lens_mean(2.0))
        regions = [Lens(0), SectorZone(0, 2), CellRect(1)]
        counts = region_counts(f, CHORD, regions, 300, 77)
        for j, r in enumerate(regions):
            e = estimate_probability(f, CHORD, r, "at_least_one", 300, 77)
            assert e.hits == np.count_nonzero(counts[:, j] > 0)


class TestComparator:
    def test_equal(self):
        c = compare_to_analytic(SimEstimate.from_counts(50, 100), 0.5)
        assert c.z_score == 0 and c.passed and c.method == "z"

    def test_impossible(self):
        c = compare_to_analytic(SimEstimate.from_counts(10_000, 10_000), 0.0)
        assert not c.passed

    def test_rare_event_uses_exact_tail(self):
        c = compare_to_analytic(SimEstimate.from_counts(0, 100_000), 1e-9)
        assert c.method == "exact_tail" and c.passed and c.z_score == 0
        c = compare_to_analytic(SimEstimate.from_counts(3, 100_000), 1e-9)
        assert not c.passed

    def test_few_expected_hits(self):
        # 3 expected hits and none seen: consistent, though the Wald error is 0
        c = compare_to_analytic(SimEstimate.from_counts(0, 100_000), 3e-5)
        assert c.method == "exact_tail" and c.passed
        assert c.p_value == pytest.approx(2 * math.exp(-3), rel=1e-12)

    def test_tail_matches_scipy(self):
        c = compare_to_analytic(SimEstimate.from_counts(12, 100_000), 4e-5)
        ref = 2 * stats.poisson.sf(11, 4.0)
        assert c.p_value == pytest.approx(ref, rel=1e-9)
        assert c.z_score > 0

    def test_z_branch(self):
        c = compare_to_analytic(SimEstimate.from_counts(600, 1000), 0.5)
        assert c.method == "z" and not c.passed
        assert c.z_score == pytest.approx(0.1 / math.sqrt(0.6 * 0.4 / 1000))


def _square_chunk(start, stop):
    return np.arange(start, stop) ** 2


def test_map_trials_order_and_workers():
    serial = map_trials(_square_chunk, 5003, workers=1, chunk=700)
    parallel = map_trials(_square_chunk, 5003, workers=3, chunk=700)
    assert np.array_equal(serial, np.arange(5003) ** 2)
    assert np.array_equal(serial, parallel)


def test_determinism_under_parallelism():
    f = NodeField.poisson(lam_for_lens_mean(1.36))
    regions = [Lens(0), SectorZone(0, 1)]
    a = region_counts(f, CHORD, regions, 4500, 99, workers=1)
    b = region_counts(f, CHORD, regions, 4500, 99, workers=2)
    assert np.array_equal(a, b)


def _poisson_gof(counts, mean):
    top = int(stats.poisson.ppf(1 - 1e-4, mean)) + 1
    bins = np.arange(0, top)
    observed = np.array([np.count_nonzero(counts == k) for k in bins[:-1]]
                        + [np.count_nonzero(counts >= bins[-1])], dtype=float)
    probs = np.append(stats.poisson.pmf(bins[:-1], mean), stats.poisson.sf(bins[-1] - 1, mean))
    expected = probs * len(counts)
    # merge sparse bins from the right so every expected count is >= 5
    obs, exp = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed[::-1], expected[::-1]):
        o_acc += o
        e_acc += e
        if e_acc >= 5:
            obs.append(o_acc)
            exp.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc:
        obs[-1] += o_acc
        exp[-1] += e_acc
    return stats.chisquare(obs, exp).pvalue


def test_poisson_restriction_property():
    f = NodeField.poisson(lam_for_lens_mean(1.0))
    regions = [Lens(0), SectorZone(0, 1), SectorZone(0, 2), SectorZone(0, 3)]
    counts = region_counts(f, CHORD, regions, 100_000, 31337)
    for j, r in enumerate(regions):
        mean = f.effective_lambda * region_area(r, CHORD)
        assert _poisson_gof(counts[:, j], mean) > 1e-3, r


def test_fixed_vs_poisson_void():
    lam = lam_for_lens_mean(2.0)
    N = round(lam * CHORD.strip_area)
    assert N >= 100
    pois = estimate_probability(NodeField.poisson(lam), CHORD, Lens(0), "void", 20_000, 8)
    fixed = estimate_probability(NodeField.fixed(N, CHORD.strip_area), CHORD, Lens(0), "void",
                                 20_000, 8)
    combined = math.hypot(pois.std_err, fixed.std_err)
    assert abs(pois.p_hat - fixed.p_hat) < 5 * combined


@pytest.mark.parametrize("region", [Lens(0), SectorZone(0, 1), SectorZone(0, 3), CellRect(0)], ids=repr)
@pytest.mark.parametrize("event", ["void", "at_least_one", "exactly_1"])
def test_every_closed_form_has_mc_counterpart(region, event):
    f = NodeField.poisson(lam_for_lens_mean(1.36))
    e = estimate_probability(f, CHORD, region, event, 5000, 4)
    assert compare_to_analytic(e, region_probability(f, CHORD, region, event)).passed
