//! Truncated tensor algebra kernels for smooth (quasi-)geometric rough paths.
//!
//! The crate is `no_std` with `alloc`. Everything is built from a weighted
//! [`Alphabet`] with an optional commutative bracket:
//!
//! * [`TensorSeries`]: truncated series with concatenation, `exp` and `log`.
//! * [`hopf`]: shuffle and quasi-shuffle products, character predicates.
//! * [`hoffman`]: the Hoffman exponential/logarithm and their adjoints.
//! * [`lie`]: Lyndon bases and orthonormal Lie bases.
//! * [`develop`]: drivers, Cartan development and smooth rough models.
//! * [`renorm`]: translations, renormalization, canonical sums and couplings.
//! * [`field`] and [`rde`]: polynomial vector fields, the pre-Lie product and
//!   the differential equation solver.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod alphabet;
mod dense;
pub mod develop;
pub mod error;
pub mod field;
pub mod hoffman;
pub mod hopf;
pub mod lie;
pub mod rde;
pub mod renorm;
pub mod series;
pub mod word;

pub use alphabet::{Alphabet, Letter};
pub use develop::{Driver, Segment, SmoothModel, Velocity};
pub use error::{Error, Result};
pub use hopf::{HopfContext, ProductKind};
pub use series::TensorSeries;
pub use word::Word;

/// Default absolute tolerance on coefficients.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default cap on working truncation levels.
pub const DEFAULT_MAX_LEVEL: u32 = 8;
