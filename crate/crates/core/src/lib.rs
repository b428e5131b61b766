pub mod cavity;
pub mod dia;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod naqi;
pub mod optim;
pub mod pseudomode;
pub mod qstate;
pub mod repro;
pub mod scenario;

pub use error::{Error, Result};
