//! Library side of the `botoc` command-line tool: run configuration, the six
//! commands, result records and their CSV/JSON rendering.
//!
//! A run is fully described by a [`RunConfig`]; [`run`] returns a [`ResultRecord`]
//! whose `config_echo` reproduces the payload exactly.
//!
//! ```
//! use botoc_cli::{run, Command, RunConfig};
//!
//! let mut cfg = RunConfig::for_command(Command::OtocCurve);
//! cfg.model.n_sites = 4;
//! cfg.times.n_points = 3;
//! let record = run(&cfg).unwrap();
//! assert_eq!(record.payload.table().rows.len(), 3);
//! ```

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    figure1_models, run, run_channel, run_entropy, run_estimates, run_figure1, run_otoc_curve, run_sample, Payload,
    ResultRecord, SCHEMA_VERSION,
};
pub use config::{Command, ConfigError, Cut, OutputFormat, RunConfig, TimeGrid};
pub use output::{payload_json, render, to_csv};

use bipartite_otoc::DenseOperator;

/// Environment variable that sets the worker-thread count when `--threads` is absent.
pub const THREADS_ENV: &str = "BOTOC_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Reads a dense matrix in the plain-text format of [`bipartite_otoc::matrix_io`].
pub fn load_matrix(path: &std::path::Path) -> anyhow::Result<DenseOperator> {
    Ok(bipartite_otoc::matrix_io::load_matrix(path)?)
}

/// Exit code for a failed run: numerical failures give 2, everything else 1.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use bipartite_otoc::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Numerical(_) | Error::NotUnitary(_) => EXIT_NUMERICAL,
                _ => EXIT_VALIDATION,
            };
        }
    }
    EXIT_VALIDATION
}
