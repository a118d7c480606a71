//! Scalar conservation laws `u_t + f(x, u)_x = 0` whose flux jumps from
//! `f_l` to `f_r` across `x = 0` and admit no classical weak solution.
//!
//! The crate classifies flux geometry, builds stationary shadow-wave
//! solutions and the composed Riemann fan, and cross-checks both with a
//! Godunov scheme on the augmented system `(u, h)` and a delta-mass test.
//!
//! ```
//! use twoflux::prelude::*;
//!
//! let setup = ProblemSetup::new(
//!     "(1+2*u^2)/(1+u^2)",
//!     "-(1+2*u^2)/(1+u^2)",
//!     1.0,
//!     1.0,
//!     Interval::new(-5.0, 5.0),
//! )
//! .unwrap();
//! let fan = setup.solve().unwrap();
//! assert_eq!(fan.sdw.profile.kappa, 3.0);
//! ```

pub mod analysis;
mod error;
pub mod fluxlang;
pub mod godunov;
pub mod problem;
pub mod riemann;
pub mod shadow;
pub mod verify;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{FluxKind, FluxProfile, GeometryCase, Interval};
    pub use crate::fluxlang::FluxExpr;
    pub use crate::godunov::{GridState, SimulationParams};
    pub use crate::problem::{AsymptoticsOverride, ProblemSetup};
    pub use crate::riemann::{RiemannCase, WaveFan};
    pub use crate::shadow::{ShadowKind, ShadowProfile, ShadowWaveNet, TableRow};
    pub use crate::{Error, Result};
}
