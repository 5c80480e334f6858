//! Exact symbolic toolkit for Poisson polynomial algebras, rank-1 Poisson
//! modules, order-`n` moment systems over `k[t]/t^(n+1)` and their
//! trivialization.

pub mod cli;
pub mod derivation;
pub mod error;
pub mod instance;
pub mod line;
pub mod linalg;
pub mod model;
pub mod moment;
pub mod poisson;
pub mod poly;
pub mod rat;
pub mod report;
pub mod tpoly;

pub use derivation::Derivation;
pub use error::{AlgebraError, Result};
pub use line::{LineData, TotElement};
pub use moment::{GaugeTwist, MomentSystem, TrivializationResult};
pub use poisson::{ConformalField, Point, PoissonStructure};
pub use poly::{Monomial, Poly};
pub use rat::Rat;
pub use report::{Report, Witness};
pub use tpoly::TPoly;
