//! Action sets, projections and regularizers.

mod point;
mod regularizer;
mod set;

pub use point::Point;
pub use regularizer::{Regularizer, RegularizerKind};
pub use set::{project_onto_capped_simplex, project_onto_simplex, ActionSet, SetKind};
