//! Symmetric convex bodies, their polars and volumes, and numerical checks
//! of the volume-product inequalities around them.

pub mod bodies;
pub mod catalog;
pub mod duality;
pub mod error;
pub mod functional;
pub mod harmonic;
pub mod linalg;
pub mod perturb;
pub mod products;
pub mod report;
pub mod rng;
pub mod runner;
pub mod suite;
pub mod tolerances;
pub mod volume;

pub use bodies::ConvexBody;
pub use error::{Error, Result};
pub use report::CheckReport;
