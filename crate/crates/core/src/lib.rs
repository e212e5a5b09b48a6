pub mod analytic;
pub mod cli;
pub mod error;
pub mod gate;
pub mod grid;
pub mod io;
pub mod units;

pub use error::{Error, Result};
pub mod numerics;
pub mod potentials;
pub mod run;
pub mod sta;
