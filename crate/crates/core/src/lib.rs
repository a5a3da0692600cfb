//! Finsler's lemma for parameter-dependent matrices.
//!
//! The crate certifies feasibility of `Q - mu * B^T B < 0` pointwise and over
//! parameter grids, synthesizes multipliers of the simplest admissible class
//! (constant, continuous, polynomial, piecewise constant), and generates the
//! polytopic LMI relaxations together with their SDPA export.
//!
//! All numerics are generic over [`Scalar`]; the aliases at the crate root fix
//! the scalar to `f64`, which is what the CLI and the JSON schema use.

pub mod error;
pub mod finsler_point;
pub mod pd_analysis;
pub mod pd_models;
pub mod polytopic;
pub mod scalar;
pub mod schema;
pub mod switching;
pub mod symlin;

pub use error::{Error, Result};
pub use finsler_point::{ExtendedReal as GenericExtendedReal, Tolerances as GenericTolerances};
pub use scalar::Scalar;

/// Dense symmetric matrix over `f64`.
pub type SymMatrix = symlin::SymMatrix<f64>;
/// Dense rectangular matrix over `f64`.
pub type RectMatrix = symlin::RectMatrix<f64>;
/// Symmetric eigendecomposition over `f64`.
pub type EigenSym = symlin::EigenSym<f64>;
pub type ExtendedReal = finsler_point::ExtendedReal<f64>;
pub type Tolerances = finsler_point::Tolerances<f64>;
pub type FinslerCertificate = finsler_point::FinslerCertificate<f64>;
pub type ParamDomain = pd_models::ParamDomain<f64>;
pub type MatrixFn = pd_models::MatrixFn<f64>;
pub type MuProfile = pd_analysis::MuProfile<f64>;
pub type BoundFns = pd_analysis::BoundFns<f64>;
pub type ModeSet = switching::ModeSet<f64>;
pub type Polytope = polytopic::Polytope<f64>;
pub type LmiSet = polytopic::LmiSet<f64>;

/// Single-precision aliases, for callers that trade accuracy for speed.
pub mod f32 {
    pub type SymMatrix = crate::symlin::SymMatrix<f32>;
    pub type RectMatrix = crate::symlin::RectMatrix<f32>;
    pub type Tolerances = crate::finsler_point::Tolerances<f32>;
    pub type ExtendedReal = crate::finsler_point::ExtendedReal<f32>;
}
