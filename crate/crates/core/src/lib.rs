pub mod error;
pub mod group;
pub mod poly;
pub mod quadric;

pub use error::{Error, Result};
pub mod integrand;
pub mod quadrature;
pub mod cycle;
pub mod isotopy;
pub mod relax;
pub mod sl2;
pub mod continuation;
pub mod sampling;
pub mod cli;
