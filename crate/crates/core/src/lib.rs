pub mod error;
pub mod graph;
pub mod instances;
pub mod lars;
pub mod linalg;
pub mod oracle;
pub mod proximal;

pub use error::{Error, Result};
