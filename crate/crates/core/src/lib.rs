//! Spectral-determinant representation of the six-vertex partition function
//! with domain-wall boundaries.
//!
//! The partition function `Z(λ₀, …, λ_{L−1})` is written as `κ₀ · det(H_L)`,
//! where the entries of `H_L` are eigenvalues `Λ(λ)` of the anti-periodic
//! (σˣ-twisted) transfer matrix together with the kernel functions `M` and
//! `N`. The crate builds that representation and checks it against
//! independent evaluators of `Z`:
//!
//! * [`oracle`]: configuration enumeration, row-operator contraction,
//!   the Izergin-Korepin determinant and the Korepin recurrence.
//! * [`transfer`]: the twisted transfer matrix and its spectrum.
//! * [`kernel`]: the coefficient functions `M_i^{(n)}` and `N_{j,i}^{(n)}`.
//! * [`determinant`]: layout and assembly of `H_L`, `κ₀`, and `Z`.
//! * [`chain`]: the recursive functions `F_n`.
//! * [`verify`]: randomized residual batteries and the regression self-test.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod closed_forms;
pub mod determinant;
mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod subset;
pub mod transfer;
pub mod verify;
mod wide;

pub use error::{Error, Result};
pub use model::{ModelParams, SpectralPoints, C64};
pub use subset::{GroundSet, IndexSubset};
pub use transfer::SpectrumTable;
