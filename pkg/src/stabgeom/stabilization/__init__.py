"""Add-one costs, two-scale discrepancies, stabilization radii and two-arm
events."""
from stabgeom.stabilization.functionals import (FunctionalSpec, add_one_cost, add_one_cost_augmented,
                                                add_one_cost_batch)
from stabgeom.stabilization.gamma import gamma_geometric, overlap_pair_volume, window_volume
from stabgeom.stabilization.radii import (CONE_HALF_ANGLE, MIN_TAIL_SAMPLES, RadiusSample, cone_axes,
                                          cone_covering_angle, estimate_radius_tail, mst_attachment_radius,
                                          onng_stabilization_radius, wall_event)
from stabgeom.stabilization.two_arm import (MismatchStep, PairedTraceCheck, check_two_arm_inclusion,
                                            crossing_components, paired_traces, two_arm_event_boolean,
                                            two_arm_event_components)
from stabgeom.stabilization.two_scale import (MIN_REPLICAS, DiscrepancyEstimate, SiteDiscrepancy, TwoScalePair,
                                              estimate_phi, estimate_psi, site_grid, two_scale_discrepancy,
                                              two_scale_discrepancy_augmented)

__all__ = [
    "FunctionalSpec", "add_one_cost", "add_one_cost_augmented", "add_one_cost_batch",
    "gamma_geometric", "overlap_pair_volume", "window_volume",
    "CONE_HALF_ANGLE", "MIN_TAIL_SAMPLES", "RadiusSample", "cone_axes", "cone_covering_angle",
    "estimate_radius_tail", "mst_attachment_radius", "onng_stabilization_radius", "wall_event",
    "MismatchStep", "PairedTraceCheck", "check_two_arm_inclusion", "crossing_components", "paired_traces",
    "two_arm_event_boolean", "two_arm_event_components",
    "MIN_REPLICAS", "DiscrepancyEstimate", "SiteDiscrepancy", "TwoScalePair", "estimate_phi", "estimate_psi",
    "site_grid", "two_scale_discrepancy", "two_scale_discrepancy_augmented",
]
