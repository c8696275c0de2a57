//! Exponent algebra for weighted bilinear gain estimates, and a numerical
//! harness that measures the constants on random Gaussian data.

mod exponents;
mod harness;

pub use exponents::{
    check_admissible, cleared_form_roots, condition_interval, delta_family, extended_real, feasibility_threshold,
    min_r_sweep, Admissibility, DeltaFamily, ExponentTriple, MinR, Verdict,
};
pub use harness::{
    drift, empirical_constant, estimate_from_sweep, gaussian_mixture_ensemble, lossy_bounds_check, ratio,
    weighted_l1, BoundRatios, EnsembleSweep, EstimateReport, EstimateRow, LossyBound, LossyExponents, LossyReport,
    SampleRatio,
};
