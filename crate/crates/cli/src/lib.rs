//! Experiment harness for the `ladder` command.
//!
//! Presets are embedded; any command that takes a config accepts either a
//! file path or a preset name (`fig3`, `fig3-standard`, `fig3-bangbang`,
//! `fig5`).

pub mod config;
pub mod experiment;
pub mod output;

use std::fs;
use std::path::Path;

use ladder_core::diagnostics::{self, SweepSummary};
use rand::rngs::StdRng;
use rand::SeedableRng;
use thiserror::Error;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use experiment::{
    bound_summary, compare_controllers, run_experiment, Comparison, ComparisonRow, Outcome,
};

pub const PRESETS: &[(&str, &str)] = &[
    ("fig3", include_str!("../presets/fig3.conf")),
    (
        "fig3-standard",
        include_str!("../presets/fig3-standard.conf"),
    ),
    (
        "fig3-bangbang",
        include_str!("../presets/fig3-bangbang.conf"),
    ),
    ("fig5", include_str!("../presets/fig5.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Model(ladder_core::Error),
    #[error("integration failed: {0}")]
    Integration(ladder_core::Error),
    #[error("{0}")]
    Check(String),
}

impl From<ladder_core::Error> for CliError {
    fn from(e: ladder_core::Error) -> Self {
        match e {
            ladder_core::Error::IntegrationFailure { .. } => Self::Integration(e),
            other => Self::Model(other),
        }
    }
}

impl CliError {
    /// 1 for anything wrong with the inputs, 2 when the integrator gave up,
    /// 3 when a self-check found a violation.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Model(_) => 1,
            Self::Integration(_) => 2,
            Self::Check(_) => 3,
        }
    }
}

/// Reads a config file, or a preset when no such file exists.
pub fn load_config(source: &str) -> Result<ExperimentConfig, CliError> {
    let text = if Path::new(source).exists() {
        fs::read_to_string(source).map_err(|e| CliError::Io {
            path: source.to_string(),
            source: e,
        })?
    } else if let Some(text) = preset(source) {
        text.to_string()
    } else {
        return Err(CliError::Io {
            path: source.to_string(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or preset"),
        });
    };
    Ok(parse_config(&text)?)
}

/// The property sweeps behind `ladder selftest`, from one seed.
pub fn selftest(samples: usize, seed: u64) -> Vec<SweepSummary> {
    let mut rng = StdRng::seed_from_u64(seed);
    vec![
        diagnostics::descent_sweep(&mut rng, samples, 2..=8),
        diagnostics::rate_agreement_sweep(&mut rng, samples, 3..=6),
        diagnostics::lemma1_sweep(&mut rng, samples, 2..=8),
        diagnostics::round_trip_sweep(&mut rng, samples, 2..=8),
        diagnostics::global_phase_sweep(&mut rng, samples, 2..=8),
    ]
}

pub fn render_sweep(s: &SweepSummary) -> String {
    format!(
        "{} samples={} failures={} worst={} tolerance={} {}",
        s.name,
        s.samples,
        s.failures,
        output::real(s.worst),
        output::real(s.tolerance),
        if s.passed() { "PASS" } else { "FAIL" }
    )
}

/// Writes a trajectory CSV to `path`.
pub fn save_csv(path: &Path, traj: &ladder_core::Trajectory64) -> Result<(), CliError> {
    let io_err = |e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    output::write_csv(std::io::BufWriter::new(file), traj).map_err(io_err)
}
