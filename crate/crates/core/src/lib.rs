//! Hermite's simultaneous rational approximations to values of the
//! exponential function, with exact and numerical tools that check their
//! determinant identities, recurrences, p-adic and Archimedean estimates,
//! the associated graph constructions and the continued fraction of `e^α`.

pub mod ascent;
pub mod cf;
pub mod cli;
pub mod error;
pub mod forest;
pub mod hermite;
pub mod interval;
pub mod minima;
pub mod padic;
pub mod poly;
pub mod rational;
pub mod volume;

pub use error::{Error, Result};
pub use rational::Rational;
