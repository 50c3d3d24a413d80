//! Discrete Volterra kernel calculus on nonuniform time meshes.
//!
//! Convolution kernels discretized on a nonuniform mesh lose their Toeplitz
//! structure: the weight attached to interval `j` at time `t_n` depends on
//! both indices. This crate stores such kernels as ragged lower-triangular
//! arrays ([`ArrayKernel`]) and provides
//!
//! * the pseudo-convolution product, inverses, left/right complementary
//!   kernels, resolvents, and diagonal scaling ([`kernel`]);
//! * structural checks with first-violation witnesses — column/row/double
//!   monotonicity, complete-positivity sign patterns, R-CMM and L-CMM,
//!   log-convexity, and resolvent inequalities ([`props`]);
//! * ordinary sequence convolution and the matching checks on uniform
//!   meshes ([`uniform`]);
//! * the averaged-integral kernel of Caputo fractional ODEs in closed form
//!   ([`fode`]);
//! * an implicit stepper for `u_n = h(t_n) + sum_j a^n_{n-j} f(t_j, u_j)`
//!   with ordering and monotonicity reports ([`solver`]).
//!
//! Kernels with the R-CMM property transfer the qualitative behavior of
//! nonincreasing completely positive convolution kernels to arbitrary
//! meshes: numerical solutions ordered by their input signals stay ordered,
//! and autonomous solutions with constant signals stay monotone. The checks
//! here verify those structural hypotheses numerically for the first `N`
//! rows, and the solver plus reports verify the conclusions on concrete
//! problems.

pub mod error;
pub mod fode;
pub mod kernel;
pub mod mesh;
pub mod props;
pub mod solver;
pub mod uniform;

pub use error::{Error, Result};
pub use kernel::{ArrayKernel, DiagonalKernel};
pub use mesh::{Mesh, MeshSpec, SplitMix64};
pub use props::{PropertyReport, Witness};
pub use solver::{Problem, Signal, SolveOptions, Trajectory};
pub use uniform::Sequence;
