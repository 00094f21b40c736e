//! Command-line front end for famova: CSV ingestion, configuration, and
//! text/JSON/CSV reports of ANOVA tables, corrected decisions and
//! simulated error rates.

pub mod args;
pub mod error;
pub mod ingest;
pub mod presets;
pub mod report;
pub mod run;

pub use args::{Cli, Format};
pub use error::{usage_error, CliError};
pub use report::Report;
pub use run::{run, Outcome};
