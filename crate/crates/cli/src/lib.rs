//! Library side of the `mhrev` command: chain-file I/O, the comparison report
//! and one function per subcommand.

pub mod chain;
pub mod commands;
pub mod error;
pub mod report;

pub use chain::ChainFile;
pub use commands::{
    cmd_bd_sst, cmd_compare, cmd_info, cmd_mis, cmd_project, cmd_reversiblize, cmd_suite, Kind,
};
pub use error::CliError;
pub use report::{Battery, ComparisonReport, Verdict};
