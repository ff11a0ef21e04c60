//! Numerical toolkit for self-similar blow-up of the axisymmetric 3D Euler
//! equations: closed-form fundamental profiles, weighted-norm calculus, the
//! elliptic potential solver, the fake-time perturbation relaxation, blow-up
//! diagnostics, and an identity-verification suite.

pub mod banded;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod io;
pub mod params;
pub mod profiles;
pub mod quad;
pub mod relaxation;
pub mod report;
pub mod spaces;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use grid::{make_grids, Field, GridConfig, Grids, RadialFn};
pub use params::ModelParams;
pub use report::Report;
