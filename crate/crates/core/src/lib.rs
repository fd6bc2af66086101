//! Exact symbolic construction and verification of Lepage equivalents of
//! variational problems on jet bundles.

pub mod charts;
pub mod error;
pub mod exterior;
pub mod kernel;
pub mod lepage;
pub mod rational;
pub mod relativity;
pub mod suite;

pub use error::{Error, Result};
pub use kernel::{Atom, Expr, JetSpace, Monomial, MultiIndex};
pub use rational::Rational;
