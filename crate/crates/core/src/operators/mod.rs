//! Gain, loss and frequency operators of the classical and quantum
//! (Nordheim) collision kernels.
//!
//! Two evaluation paths share the same conventions:
//! * `point` evaluates at arbitrary velocities for any distribution and any
//!   branch filter;
//! * `stencil` sweeps the whole velocity grid, exploiting that for a fixed
//!   lattice displacement and scattering direction the interpolation weights
//!   are the same at every output node.

mod conservation;
mod point;
mod stencil;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use conservation::{
    collision_operator_on_grid, conservation_defect, conservation_defect_values, ConservationDefect,
};
pub use point::{
    collision_sum, frequency_cl, frequency_qu, full_q, gain_cl, gain_qu, loss_cl, loss_qu,
    GainPiece, LossPiece,
};
pub use stencil::{ClosedSums, ClosedSweep, ClosedSweepOutput, GridSweep, GridSweepOutput};

use crate::discretization::{SphereRule, VelocityGrid};
use crate::error::{Error, Result};

/// Tolerance under which `u_hat . sigma` counts as an equator node.
pub const EQUATOR_TOL: f64 = 1e-12;

/// Even angular kernel `b(x)` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AngularKernel {
    Constant(f64),
    /// `sum_i c_i x^(2i)` with nonnegative coefficients.
    EvenPolynomial(Vec<f64>),
}

impl AngularKernel {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            AngularKernel::Constant(c) => *c,
            AngularKernel::EvenPolynomial(cs) => {
                let x2 = x * x;
                cs.iter().rev().fold(0.0, |acc, c| acc * x2 + c)
            }
        }
    }

    pub fn bound(&self) -> f64 {
        match self {
            AngularKernel::Constant(c) => *c,
            AngularKernel::EvenPolynomial(cs) => cs.iter().sum(),
        }
    }
}

/// `B(u, sigma) = |u|^gamma b(u_hat . sigma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    gamma: f64,
    b: AngularKernel,
}

impl CrossSection {
    pub fn new(gamma: f64, b: AngularKernel) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Config(format!(
                "gamma must lie in [0, 1] (hard potentials with angular cutoff), got {gamma}"
            )));
        }
        let ok = match &b {
            AngularKernel::Constant(c) => *c >= 0.0 && c.is_finite(),
            AngularKernel::EvenPolynomial(cs) => {
                !cs.is_empty() && cs.iter().all(|c| *c >= 0.0 && c.is_finite())
            }
        };
        if !ok {
            return Err(Error::Config("angular kernel must be finite and nonnegative".into()));
        }
        Ok(CrossSection { gamma, b })
    }

    pub fn hard_spheres() -> Self {
        CrossSection { gamma: 1.0, b: AngularKernel::Constant(1.0) }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn angular(&self) -> &AngularKernel {
        &self.b
    }

    pub fn b(&self, x: f64) -> f64 {
        self.b.eval(x)
    }

    /// `|u|^gamma` with `0^0 = 1`.
    pub fn speed_factor(&self, speed: f64) -> f64 {
        if self.gamma == 0.0 {
            1.0
        } else if self.gamma == 1.0 {
            speed
        } else {
            speed.powf(self.gamma)
        }
    }
}

/// Energy-split indicator applied to gain-type sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchFilter {
    Full,
    /// Keep `|v*|^2 >= E/2`.
    Q0,
    /// Keep `|v1*|^2 >= E/2`.
    Q1,
}

/// Classical or quantum collision operator. `cubic` multiplies every term of
/// the quantum correction; `cubic = 0` is the classical operator evaluated on
/// the quantum code path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Classical,
    Quantum { cubic: f64 },
}

impl Mode {
    pub const QUANTUM: Mode = Mode::Quantum { cubic: 1.0 };

    pub fn cubic(self) -> f64 {
        match self {
            Mode::Classical => 0.0,
            Mode::Quantum { cubic } => cubic,
        }
    }
}

/// Cutoff `chi(u_hat . sigma)`: one on the open upper hemisphere, one half
/// on the equator, zero below.
pub fn chi(c: f64) -> f64 {
    if c > EQUATOR_TOL {
        1.0
    } else if c >= -EQUATOR_TOL {
        0.5
    } else {
        0.0
    }
}

/// Cross section, sphere rule and integration grid shared by a family of
/// operator evaluations.
#[derive(Debug, Clone)]
pub struct OperatorParams {
    pub cross_section: CrossSection,
    pub sphere: Arc<SphereRule>,
    pub grid: VelocityGrid,
    pub branch: BranchFilter,
}

impl OperatorParams {
    pub fn new(cross_section: CrossSection, sphere: SphereRule, grid: VelocityGrid) -> Self {
        OperatorParams {
            cross_section,
            sphere: Arc::new(sphere),
            grid,
            branch: BranchFilter::Full,
        }
    }

    pub fn with_branch(&self, branch: BranchFilter) -> Self {
        OperatorParams { branch, ..self.clone() }
    }

    pub fn with_sphere(&self, sphere: SphereRule) -> Self {
        OperatorParams { sphere: Arc::new(sphere), ..self.clone() }
    }

    pub fn with_grid(&self, grid: VelocityGrid) -> Self {
        OperatorParams { grid, ..self.clone() }
    }
}
