//! Estimators for transversality-type regularity constants of pairs of
//! closed sets in ℝⁿ, alternating projections with rate fitting, and
//! checks of the inequalities linking these quantities.

pub mod altproj;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod normalcones;
pub mod projections;
pub mod regmap;
pub mod sampling;

pub use error::{Error, Result};
pub use geometry::{RhoNorm, Vector};
pub use projections::{intersect, Intersection, ProjectionResult, SetRep};
