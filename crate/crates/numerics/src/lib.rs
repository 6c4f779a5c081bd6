//! Sparse symmetric linear algebra used by the homogenisation solvers.
//!
//! Everything here is generic over a [`Real`] scalar (`f32` or `f64`);
//! the aliases at the bottom of this file pin the double-precision
//! instantiations the rest of the workspace uses.

mod dense;
mod error;
mod lanczos;
mod ldlt;
mod ordering;
mod scalar;
mod sparse;
mod tridiag;

pub use dense::{symmetric_eigen, DenseSymmetricEigen};
pub use error::NumericsError;
pub use lanczos::{smallest_eigpairs, EigenOptions, EigenResult};
pub use ldlt::LdlFactor;
pub use ordering::nested_dissection;
pub use scalar::Real;
pub use sparse::{SparseSymmetric, TripletBuilder};
pub use tridiag::tridiagonal_eigen;

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Double-precision sparse symmetric matrix.
pub type SparseMatrix = SparseSymmetric<f64>;
/// Double-precision LDLᵀ factor.
pub type Factor = LdlFactor<f64>;
/// Double-precision eigen decomposition result.
pub type EigenPairs = EigenResult<f64>;
