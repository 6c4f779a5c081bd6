//! Two-scale homogenisation of 2D elastic composites whose stiff phase is a
//! thin periodic rod framework and whose soft phase has stiffness `ε²`.

pub mod cell_homog;
pub mod direct;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod geometry;
pub mod homogenised;
pub mod limit;
pub mod materials;
pub mod micro;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
