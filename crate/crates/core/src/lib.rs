pub mod analysis;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evolution;
pub mod explicit_front;
pub mod grid;
pub mod interp;
pub mod io;
pub mod nonlinearity;
pub mod poisson;
pub mod quad;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
