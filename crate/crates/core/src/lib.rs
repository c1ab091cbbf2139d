pub mod bridge;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod kirchhoff;
pub mod linalg;
pub mod pde;
pub mod prox;

pub use error::{Error, Result};
