//! Host-side companion to `cabba-core`: file formats, traffic and loss
//! fixtures, parallel BER sweeps, scenario replay and the `cabba` CLI.

pub mod cli;
pub mod cor;
pub mod formats;
pub mod gen;
pub mod num;
pub mod rxsim;
pub mod sweep;

pub use cli::{run, CliError, Outcome};
