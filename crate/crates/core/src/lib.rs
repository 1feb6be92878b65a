//! Gradient projection methods with feasible inexact projections.
//!
//! The projection step only has to return a point `w` of the feasible set
//! whose variational inequality holds up to a tolerance
//! `phi_gamma(u, v, w)`; for the spectrahedron this is met by a rank-`p`
//! projection built from a few leading eigenpairs, with `p` increased until
//! a support-point certificate accepts it.
//!
//! ```
//! use ginexpm::prelude::*;
//!
//! let inst = generate_instance(20, 40, 3, 0.05, 7).unwrap();
//! let set = Spectrahedron::new(20).unwrap();
//! let x0 = starting_point(0.0, 20).unwrap();
//! let res = solve_armijo(&inst, &set, x0, &ArmijoConfig::default(), &SolveOptions::default()).unwrap();
//! assert!(set.contains(&res.x, 1e-8));
//! ```

pub mod error;
pub mod linalg;
pub mod problems;
pub mod schedules;
pub mod sets;
pub mod solver;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::linalg::{Point, SymMatrix};
    pub use crate::problems::{
        default_density, generate_instance, make_boxqp, starting_point, BoxQP, SpectrahedronLSQ,
    };
    pub use crate::schedules::{ForcingParams, SummableSchedule, ToleranceFn};
    pub use crate::sets::{
        certify_inexact_projection, BoxSet, ConvexSet, Spectrahedron, WarmStart,
    };
    pub use crate::solver::{
        constant_alpha_from_gamma, solve_armijo, solve_constant, ArmijoConfig, ConstantStepConfig,
        Objective, ProjectionMode, SolveOptions, SolveResult, StopReason,
    };
}
