pub mod error;
pub mod finite_field;

pub use error::{Error, Result};
pub mod char_sums;
pub mod geometry;
pub mod rng;
pub mod stats;
pub mod shifted_subset_oracle;
pub mod hidden_radius;
pub mod hidden_flat;
pub mod hidden_polynomial;
pub mod verify;
