#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod expansion;
pub mod hankel;
pub mod identities;
pub mod laguerre;
pub mod numerics;
pub mod quadrature;
pub mod recurrence;
pub mod rho;

pub use error::{Error, Result};
pub use numerics::PrecisionContext;
