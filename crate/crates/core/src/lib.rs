pub mod cantor;
pub mod config;
pub mod constructions;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod incidence;
mod par;
pub mod spacing;
pub mod sumproduct;

pub use config::{Configuration, Meta};
pub use error::{Error, Result};
pub use geometry::{Ball, Scale, Square, Tube};
