//! Grassmann algebras, supermatrices, and numerical verification of the super
//! Riesz distributions, the super-bosonisation identity and the super Fourier
//! transform on flat superspace.

pub mod error;
pub mod grassmann;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod riesz;
pub mod sampling;
pub mod sbos;
pub mod scalar;
pub mod special;
pub mod suite;
pub mod superexpr;
pub mod superfourier;
pub mod supermatrix;

pub use error::{Error, Result};
pub use grassmann::GrassmannNumber;
pub use supermatrix::{Format, GroupElement, MultiIndex, SuperMatrix};

/// Grassmann number with `f64` coefficients.
pub type Grassmann = GrassmannNumber<f64>;
/// Grassmann number with `f32` coefficients.
pub type Grassmann32 = GrassmannNumber<f32>;
/// Supermatrix with `f64` coefficients.
pub type SMatrix = SuperMatrix<f64>;
/// Complex `f64` scalar.
pub type Complex64 = num_complex::Complex<f64>;
