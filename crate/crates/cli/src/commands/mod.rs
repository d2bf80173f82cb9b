//! One module per family of subcommands. Each subcommand has a clap `Args`
//! struct (every flag optional) and a `Params` struct holding the resolved
//! values with their defaults.

pub mod flow;
pub mod frames;
pub mod nls;
pub mod profile;
pub mod spectral;
