//! Temperature sweeps and CSV emission.

use std::fmt::Write as _;

use casimir_core::oracle::{oracle_free_energy, oracle_thermo, OracleValue};
use casimir_core::scalar2d::printed_asymptotic_entropy_2d;
use casimir_core::system::FieldConfig;
use casimir_core::thermo::ThermoPoint;
use casimir_core::Error;
use rayon::prelude::*;

use crate::config::{Method, RunConfig};

/// Relative agreement required between closed form and direct sum in
/// `both` mode.
pub const AGREE_REL: f64 = 1e-8;
/// Monte-Carlo agreement window in standard errors.
pub const AGREE_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    NonConverged,
    Error,
    Agree,
    Disagree,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NonConverged => "nonconverged",
            RowStatus::Error => "error",
            RowStatus::Agree => "agree",
            RowStatus::Disagree => "disagree",
        }
    }

    /// True for rows that make the run exit with the numerical failure code.
    pub fn is_numerical_failure(self) -> bool {
        matches!(self, RowStatus::NonConverged | RowStatus::Error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Grid value on the configured axis (T or Z).
    pub x: f64,
    pub point: Option<ThermoPoint>,
    pub status: RowStatus,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Replace the planar entropy by the asymptotic form.
    pub asymptotic: bool,
}

fn failed(x: f64, e: &Error) -> Row {
    let status = match e {
        Error::NotConverged { .. } => RowStatus::NonConverged,
        _ => RowStatus::Error,
    };
    Row { x, point: None, status }
}

fn agreement(closed: f64, oracle: &OracleValue) -> RowStatus {
    let d = (closed - oracle.value).abs();
    let ok = match oracle.std_error {
        Some(se) => d <= AGREE_SIGMA * se,
        None => d <= AGREE_REL * closed.abs().max(oracle.value.abs()),
    };
    match (oracle.converged, ok) {
        (false, _) => RowStatus::NonConverged,
        (true, true) => RowStatus::Agree,
        (true, false) => RowStatus::Disagree,
    }
}

fn closed_point(cfg: &RunConfig, t: f64, opts: SweepOptions) -> Result<ThermoPoint, Error> {
    let mut p = cfg.field.closed_thermo(t, &cfg.units, &cfg.numerics)?;
    if opts.asymptotic {
        if let FieldConfig::Scalar2D(pair) = &cfg.field {
            p.entropy = printed_asymptotic_entropy_2d(pair, t, &cfg.units, &cfg.numerics)?;
            p.internal_energy = p.e_total() + t * p.entropy;
        }
    }
    Ok(p)
}

fn row(cfg: &RunConfig, x: f64, opts: SweepOptions) -> Row {
    let t = cfg.grid.temperature(x);
    let result = match cfg.method {
        Method::Closed => closed_point(cfg, t, opts).map(|p| (p, RowStatus::Ok)),
        Method::Series => cfg
            .field
            .series_thermo(t, &cfg.units, &cfg.numerics)
            .map(|p| (p, RowStatus::Ok)),
        Method::Oracle => oracle_thermo(&cfg.field, t, &cfg.units, &cfg.numerics).map(|p| (p, RowStatus::Ok)),
        Method::Both => closed_point(cfg, t, opts).and_then(|p| {
            let o = oracle_free_energy(&cfg.field, t, &cfg.units, &cfg.numerics)?;
            Ok((p, agreement(p.e_total(), &o)))
        }),
    };
    match result {
        Ok((point, status)) => Row {
            x,
            point: Some(point),
            status,
        },
        Err(e) => failed(x, &e),
    }
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn run_sweep(cfg: &RunConfig, opts: SweepOptions) -> Vec<Row> {
    cfg.grid.values().par_iter().map(|&x| row(cfg, x, opts)).collect()
}

fn num(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v.filter(|v| v.is_finite()) {
        let _ = write!(out, "{v:e}");
    }
}

/// Renders rows as CSV with header `T,E_self,E_int,E_total,S,U,F,status`
/// (first column `Z` on a Z grid). Non-finite and unavailable values are
/// left empty.
pub fn to_csv(cfg: &RunConfig, rows: &[Row]) -> String {
    let mut out = format!("{},E_self,E_int,E_total,S,U,F,status\n", cfg.grid.axis_label());
    for r in rows {
        let _ = write!(out, "{:e}", r.x);
        let p = r.point.as_ref();
        num(&mut out, p.map(|p| p.e_self));
        num(&mut out, p.map(|p| p.e_interaction));
        num(&mut out, p.map(ThermoPoint::e_total));
        num(&mut out, p.map(|p| p.entropy));
        num(&mut out, p.map(|p| p.internal_energy));
        num(&mut out, p.and_then(|p| p.force));
        out.push(',');
        out.push_str(r.status.as_str());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use casimir_core::system::builtin_scenario;

    fn small(name: &str, steps: usize) -> RunConfig {
        let mut c = RunConfig::from_scenario(&builtin_scenario(name).unwrap());
        c.grid = casimir_core::system::TemperatureGrid::new(c.grid.min, c.grid.max, steps, c.grid.spacing, c.grid.axis)
            .unwrap();
        c
    }

    #[test]
    fn csv_shape() {
        let c = small("fig1-blue", 4);
        let csv = to_csv(&c, &run_sweep(&c, SweepOptions::default()));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "T,E_self,E_int,E_total,S,U,F,status");
        assert_eq!(lines.len(), 5);
        assert!(lines[1..]
            .iter()
            .all(|l| l.split(',').count() == 8 && l.ends_with(",ok")));
        assert!(lines[1].starts_with("1e-3,"));
    }

    #[test]
    fn z_axis_and_empty_force() {
        let c = small("fig4", 3);
        let csv = to_csv(&c, &run_sweep(&c, SweepOptions::default()));
        assert!(csv.starts_with("Z,"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",,ok"));
    }

    #[test]
    fn both_mode_agrees() {
        let mut c = small("fig1-red", 3);
        c.method = Method::Both;
        let rows = run_sweep(&c, SweepOptions::default());
        assert!(rows.iter().all(|r| r.status == RowStatus::Agree), "{rows:?}");
    }

    #[test]
    fn series_needs_em() {
        let mut c = small("fig1-red", 2);
        c.method = Method::Series;
        let rows = run_sweep(&c, SweepOptions::default());
        assert!(rows.iter().all(|r| r.status == RowStatus::Error));
    }

    #[test]
    fn shortest_round_trip() {
        let mut s = String::new();
        num(&mut s, Some(0.1 + 0.2));
        assert_eq!(s[1..].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(&s, ",3.0000000000000004e-1");
        num(&mut s, Some(f64::NAN));
        assert!(s.ends_with(','));
    }
}
