//! Velocity grids, sphere quadrature, distributions and weighted norms.

mod distribution;
mod grid;
mod norms;
mod sphere;

pub use distribution::{Bump, ClosedForm, Distribution, Envelope, GridData};
pub use grid::VelocityGrid;
pub use norms::{bracket_pow, compensated_sum, weighted_lp_norm, weighted_lp_norm_values, WeightedNormSpec};
pub use sphere::{SphereKind, SphereRule};
