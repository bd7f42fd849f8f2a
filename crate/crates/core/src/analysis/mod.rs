//! Bounds, covering, regions, convergence curves and Monte Carlo experiments.

pub mod bounds;
pub mod covering;
pub mod curve;
pub mod experiment;
pub mod region;
pub mod stats;

pub use bounds::{corrected_theorem_bounds, event_bounds, theorem_bounds, EventBounds, Setting};
pub use covering::{
    covering_bound, empirical_covering, simulate_synthetic, CoveringBound, CoveringEstimate, CoveringParams, SyntheticArray,
};
pub use curve::{doubling, iid_convergence_curve, CurvePoint};
pub use experiment::{
    digest_json, run_experiment, run_trials, with_quality, BoundCheck, CheckRow, CodebookMode, Digests, EventCounts, EventRate,
    ExperimentConfig, ExperimentReport, ExperimentSetup, InputQualitySync, Quantities,
};
pub use region::{binning_region, compare_regions, marton_region, region_contains, BinningRegion, HalfPlane, RateRegion, RegionComparison};
pub use stats::{
    chi_square_independence, chi_square_p_value, chi_square_statistic, clopper_pearson, compare_to_bound, lower_limit, upper_limit,
    BoundComparison, Proportion,
};
