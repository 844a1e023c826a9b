//! Exact fair allocation of goods among agents with arbitrary entitlements.

pub mod analysis;
pub mod divisible;
pub mod enumerate;
pub mod error;
pub mod exactlp;
pub mod model;
pub mod notions;
pub mod rational;
pub mod shares;

pub use error::{Error, Result};
pub use model::{i_improves, Allocation, Bundle, Entitlements, IndivisibleInstance, IndivisibleValuation, Limits};
pub use rational::Rational;
