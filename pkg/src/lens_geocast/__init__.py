"""Connectivity of intersection-area geocast on a cell-partitioned highway."""
from .analytics import (
    NodeField,
    end_to_end_connectivity,
    min_radius_for_void,
    p_at_least_one,
    p_m_in_lens,
    p_m_in_zone,
    p_void,
    p_void_zone,
    poisson_cdf,
    poisson_pmf,
    region_probability,
)
from .geometry import (
    CellRect,
    ForwardHalfDisk,
    HighwayModel,
    Lens,
    Point,
    SectorZone,
    Strip,
    apex_angle,
    cell_length_from_radius,
    lens_area_exact,
    lens_area_paper,
    region_area,
    region_contains,
    sector_area,
    triangle_area,
    zone_area,
)
from .montecarlo import (
    SimEstimate,
    compare_to_analytic,
    count_in_region,
    estimate_probability,
    region_counts,
    sample_placement,
)
from .protocol import (
    ESCALATING,
    LENS_ONLY,
    DeliveryResult,
    GeocastScenario,
    ZonePolicy,
    candidate_region,
    delivery_ratio,
    fixed_zone,
    run_geocast,
)

__version__ = "0.1.0"

__all__ = [
    "apex_angle",
    "candidate_region",
    "cell_length_from_radius",
    "CellRect",
    "compare_to_analytic",
    "count_in_region",
    "delivery_ratio",
    "DeliveryResult",
    "end_to_end_connectivity",
    "ESCALATING",
    "estimate_probability",
    "fixed_zone",
    "ForwardHalfDisk",
    "GeocastScenario",
    "HighwayModel",
    "Lens",
    "lens_area_exact",
    "lens_area_paper",
    "LENS_ONLY",
    "min_radius_for_void",
    "NodeField",
    "p_at_least_one",
    "p_m_in_lens",
    "p_m_in_zone",
    "p_void",
    "p_void_zone",
    "Point",
    "poisson_cdf",
    "poisson_pmf",
    "region_area",
    "region_contains",
    "region_counts",
    "region_probability",
    "run_geocast",
    "sample_placement",
    "sector_area",
    "SectorZone",
    "SimEstimate",
    "Strip",
    "triangle_area",
    "zone_area",
    "ZonePolicy",
]
