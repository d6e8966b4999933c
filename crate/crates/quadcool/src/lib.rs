//! Configuration, experiment harnesses, file output and the command-line
//! front end of the quadrupole Doppler-cooling simulator.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod scheme_io;
pub mod units;

pub use config::Config;
pub use error::{Error, Result};
