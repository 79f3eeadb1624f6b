//! Verification kernels for the two quantizations of motion on a double cone.
//!
//! The crate is organized around one classical model family (free particle
//! and radial harmonic oscillator on the cone `x² + y² = cot²(α) z²`,
//! parametrized by signed `r` and angle `φ` with `k = sin α`) and the two
//! Schrödinger operators proposed for it. The modules provide:
//!
//! - [`jet`] / [`expr`] / [`field`]: forward-mode second-order automatic
//!   differentiation of closed-form scalar fields, real or complex.
//! - [`specfun`]: Γ, Bessel `J_ν` of real order, generalized Laguerre `L_n^μ`.
//! - [`model`] / [`integrate`]: Lagrangians, equations of motion, exact
//!   solutions, adaptive Runge–Kutta integration, and the eight conserved
//!   first integrals of each model.
//! - [`symmetry`]: generator catalogs, second prolongations, numerical
//!   determining-equation residuals, commutators, structure constants,
//!   Killing form, and the evolutionary action on wave functions.
//! - [`spectrum`]: the four candidate Schrödinger equations, radial
//!   reduction, a bound-state eigensolver, closed-form eigenfunctions, and
//!   the cone-measure inner product.
//!
//! Everything is a pure function over immutable data; all public items are
//! safe to use from multiple threads.

pub mod error;
pub mod expr;
pub mod field;
pub mod integrate;
pub mod jet;
pub mod model;
pub mod specfun;
pub mod spectrum;
pub mod symmetry;
pub mod tridiag;

pub use error::CoreError;
pub use expr::Ex;
pub use field::{Jet, Point, ScalarField};
pub use integrate::{IntegrationOptions, Trajectory, VertexEvent};
pub use model::{ExactSolutionParams, Model, ModelParams, State};
pub use spectrum::{Eigenpair, ModeNumbers, PdeTag, PdeVariant, RadialProblem, SolveOptions};
pub use symmetry::{GeneratorSet, StructureConstants, VectorField};
