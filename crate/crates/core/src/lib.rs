//! Numerical verification laboratory for energy growth and stability of
//! semilinear elliptic equations `Lap u = G'(u)`.
//!
//! The crate builds an explicit pair `(phi, sigma)` with
//! `div(phi^2 grad sigma) = 0` whose weighted mass over balls grows like
//! `R^k` for any prescribed `k > 2` (showing the quadratic-growth exponent
//! in the associated Liouville theorem cannot be raised), and it checks the
//! quantitative energy machinery around such solutions: the pointwise
//! gradient bound, the monotone rescaled energy, the stability quadratic
//! form and its square-root substitution identity, deficit bounds, and the
//! Dirichlet lower bound, all by deterministic quadrature and finite
//! differences.
//!
//! Module map:
//! - [`profile`]: the one-dimensional profile g, potentials, the kink.
//! - [`field`]: scalar/vector fields, the counterexample pair, the flux,
//!   finite-difference residuals.
//! - [`quad`]: deterministic quadrature over intervals, balls, annuli and
//!   slabs with error estimation.
//! - [`energy`]: growth series with exponent estimation, energy ledgers,
//!   deficit and lower bounds; growth measures live behind the
//!   [`energy::GrowthMeasure`] registry and are selected by name.
//! - [`stability`]: the quadratic form, the identity and inequality checks,
//!   cutoffs and the seeded test-function corpus.
//! - [`sample`]: seeded point samplers.

pub mod energy;
pub mod error;
pub mod field;
pub mod profile;
pub mod quad;
pub mod sample;
pub mod stability;

pub use error::{Error, Result};
