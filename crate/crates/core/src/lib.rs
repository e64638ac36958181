pub mod abelian;
pub mod coupling;
pub mod cubic;
pub mod cube;
pub mod error;
pub mod exchange;
pub mod host_kra;
pub mod measure;
pub mod report;
pub mod scalar;
pub mod uniformity;

pub use error::{Error, Result};
