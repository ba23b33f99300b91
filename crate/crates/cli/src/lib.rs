//! Command-line front end for `casimir-core`: configuration parsing,
//! temperature sweeps written as CSV and the validation report runner.

pub mod config;
pub mod sweep;

use std::fs;
use std::path::{Path, PathBuf};

use casimir_core::oracle::{format_reports, OracleReport, Status};
use casimir_core::system::{builtin_scenario, builtin_scenarios, FieldKind};
use casimir_core::validation::{negative_control, validate_all, ValidationOptions};
use thiserror::Error;

pub use config::{ConfigError, Method, RunConfig};
pub use sweep::{run_sweep, to_csv, Row, RowStatus, SweepOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Fails early when the file's parent directory does not exist.
pub fn check_output_dir(path: &Path) -> Result<(), CliError> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(CliError::Usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

/// Settings of one `sweep` invocation.
#[derive(Debug, Clone, Default)]
pub struct SweepRequest {
    pub config: Option<PathBuf>,
    pub scenario: Option<String>,
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
    pub chi_product: Option<f64>,
    pub asymptotic: bool,
}

/// Builds the run from a scenario and/or a config file plus flags.
pub fn resolve(req: &SweepRequest) -> Result<RunConfig, CliError> {
    let base = match &req.scenario {
        Some(name) => Some(RunConfig::from_scenario(&builtin_scenario(name).ok_or_else(|| {
            CliError::Usage(format!("unknown scenario `{name}` (see `casimir-thermo scenarios`)"))
        })?)),
        None => None,
    };
    let mut cfg = match (&req.config, base) {
        (Some(path), base) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            RunConfig::from_text(&text, base)?
        }
        (None, Some(base)) => base,
        (None, None) => return Err(CliError::Usage("sweep needs --config or --scenario".into())),
    };
    if let Some(m) = req.method {
        cfg.method = m;
    }
    if let Some(p) = req.chi_product {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(CliError::Usage("--chi-product must be a non-negative number".into()));
        }
        cfg.field = cfg.field.with_chi_product(p);
        if req.scenario.as_deref().is_some_and(|s| s.starts_with("fig4")) {
            cfg.name = format!("fig4-chi{p}");
        }
    }
    if let Some(o) = &req.out {
        cfg.output = Some(o.clone());
    }
    if cfg.method == Method::Series && cfg.field.kind() != FieldKind::Em {
        return Err(CliError::Usage(format!(
            "method `series` is only available for the em field, not {}",
            cfg.field.kind()
        )));
    }
    if req.asymptotic && cfg.field.kind() != FieldKind::Scalar2D {
        return Err(CliError::Usage("--asymptotic applies to scalar2d sweeps only".into()));
    }
    Ok(cfg)
}

/// Outcome of a sweep: the CSV text and how many rows failed numerically.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: String,
    pub rows: Vec<Row>,
    pub failures: usize,
}

/// Runs the sweep and writes the CSV to the configured output (if any).
pub fn execute_sweep(cfg: &RunConfig, opts: SweepOptions) -> Result<SweepOutput, CliError> {
    if let Some(out) = &cfg.output {
        check_output_dir(out)?;
    }
    let rows = run_sweep(cfg, opts);
    let csv = to_csv(cfg, &rows);
    if let Some(out) = &cfg.output {
        fs::write(out, &csv).map_err(io_err(out))?;
    }
    let failures = rows.iter().filter(|r| r.status.is_numerical_failure()).count();
    Ok(SweepOutput { csv, rows, failures })
}

/// Validation results with the negative control first.
pub fn run_validation(opts: &ValidationOptions) -> Result<Vec<OracleReport>, CliError> {
    let control = negative_control().map_err(|e| CliError::Numerical(format!("negative control: {e}")))?;
    if control.status != Status::Fail {
        return Err(CliError::Numerical("negative control was not rejected".into()));
    }
    Ok(validate_all(&builtin_scenarios(), opts))
}

/// Writes the report; the negative control is checked but not recorded.
pub fn write_validation(out: &Path, opts: &ValidationOptions) -> Result<Vec<OracleReport>, CliError> {
    check_output_dir(out)?;
    let reports = run_validation(opts)?;
    fs::write(out, format_reports(&reports)).map_err(io_err(out))?;
    Ok(reports)
}

/// One line per built-in scenario: name, tab, description.
pub fn scenario_listing() -> String {
    builtin_scenarios()
        .iter()
        .map(|s| format!("{}\t{}\n", s.name, s.description))
        .collect()
}
