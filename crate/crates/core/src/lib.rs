//! Numerical engine for G-Lévy processes under model uncertainty.
//!
//! Sublinear expectations `Ê[ξ] = sup_θ E^θ[ξ]` are evaluated two ways: a
//! monotone explicit scheme for the nonlocal generator equation
//! ([`pide`]) and a Monte Carlo supremum over controlled jump-diffusions
//! ([`simulate`]). The remaining modules provide the path-space tools
//! around them: Poisson random measure counts and integrals, jump times and
//! càdlàg moduli ([`paths`]), compensation and decomposition
//! ([`analysis`]), and capacity-based function-space diagnostics
//! ([`fnspace`]).

pub mod analysis;
pub mod config;
pub mod error;
pub mod fnspace;
pub mod linalg;
pub mod paths;
pub mod payoff;
pub mod pide;
pub mod region;
pub mod simulate;
pub mod uncertainty;

pub use error::{Error, Result};
pub use region::Region;
pub use uncertainty::{DiscreteLevyMeasure, LevyTriple, UncertaintySet};
