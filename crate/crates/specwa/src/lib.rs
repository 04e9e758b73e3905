pub mod algebra;
pub mod error;
pub mod expr;
pub mod operator;
pub mod scenario;
pub mod space;
pub mod spectra;

pub use error::{Error, Result};
