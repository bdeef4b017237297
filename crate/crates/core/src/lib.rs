pub mod audit;
pub mod beurling_selberg;
pub mod error;
pub mod family;
pub mod field_tower;
pub mod lfun;
pub mod statistics;
pub mod zeros;

pub use error::{Error, Result};
