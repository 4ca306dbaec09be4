//! Scalar products of Bethe vectors in gl(2)-invariant integrable models.
//!
//! The crate evaluates the on-shell/off-shell scalar product four independent
//! ways and checks them against each other and against a literal spin chain:
//!
//! * [`scalar_product::slavnov_det`]: the Slavnov determinant of the matrix
//!   `J(u_j, x_k)` built from derivatives of the transfer-matrix eigenvalue.
//! * [`scalar_product::hny_form`]: the hybrid symmetrized forms that
//!   interpolate between the residue sum and the determinant.
//! * [`scalar_product::scalar_sum_form`]: the symmetrized chained-residue sum.
//! * [`scalar_product::extract_coefficient`]: the coefficient of `B(v̄)` in the
//!   multiple action `t(v₁)…t(v_n) B(ū)`, computed from the single-action
//!   formula on abstract state expansions.
//!
//! Periodic and reflection (open, diagonal boundary) models are covered.
//! [`oracle`] builds monodromy matrices on `(ℂ²)^⊗N` from rational
//! L-operators and supplies the ground truth.
//!
//! All numerical code is generic over the real type `T: Real` (`f32` or
//! `f64`); values are `Complex<T>`. The aliases at the crate root fix `f64`.

pub mod cli;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod real;
pub mod scalar_product;
pub mod solver;

pub use error::{Error, Result};
pub use kernels::{KernelKind, KernelValues, Kernels, ParamSet, Partition};
pub use model::{Boundary, ModelSpec, Rational, Realization};
pub use num_complex::Complex;
pub use real::Real;
pub use solver::{BetheRoots, SolveConfig};

/// Double-precision complex number, the value type of spectral parameters.
pub type Scalar = Complex<f64>;
/// Single-precision complex number.
pub type Scalar32 = Complex<f32>;
/// A set of spectral parameters in double precision.
pub type ParamSet64 = ParamSet<f64>;
/// Model definition in double precision.
pub type Model = ModelSpec<f64>;
/// Model definition in single precision.
pub type Model32 = ModelSpec<f32>;
/// Solved Bethe roots in double precision.
pub type Roots = BetheRoots<f64>;
/// Abstract Bethe-vector expansion in double precision.
pub type Expansion = scalar_product::StateExpansion<f64>;
/// Dense spin-chain operator in double precision.
pub type Operator = oracle::DenseOperator<f64>;
/// Spin-chain state in double precision.
pub type State = oracle::StateVector<f64>;
