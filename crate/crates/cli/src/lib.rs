//! Config-driven pipelines behind the `twoflux` binary.
//!
//! Each command reads a [`ProblemConfig`] and writes its results into an
//! output directory: `classify.json`, `fan.json` + `profile.csv`,
//! `snapshot_NNN.csv` + `manifest.json`, or `delta_mass.csv` +
//! `summary.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use twoflux::analysis::Interval;
use twoflux::godunov;
use twoflux::prelude::*;
use twoflux::problem::Classification;
use twoflux::riemann::Rarefaction;
use twoflux::verify::{delta_mass, DeltaMassReport, MASS_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub fluxes: Fluxes,
    pub data: Data,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotics: Option<AsymptoticsOverride>,
    #[serde(default)]
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fluxes {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Data {
    pub u_l: f64,
    pub u_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub dx: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub entropy_delta: f64,
    /// Width parameter of the shadow fan used when sampling the exact
    /// solution.
    pub eps_background: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let p = SimulationParams::default();
        Numerics {
            dx: p.dx,
            cfl: p.cfl,
            t_end: p.t_end,
            snapshot_times: p.snapshot_times,
            entropy_delta: p.entropy_delta,
            eps_background: 1e-6,
            x_min: p.x_min,
            x_max: p.x_max,
        }
    }
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let c: ProblemConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let n = &c.numerics;
        if !(n.eps_background > 0.0 && n.eps_background < 1.0) {
            return Err(CliError::Config(format!(
                "eps_background must be in (0, 1), got {}",
                n.eps_background
            )));
        }
        if !(n.x_min < 0.0 && n.x_max > 0.0) {
            return Err(CliError::Config(format!(
                "the grid [{}, {}] must contain the interface x = 0",
                n.x_min, n.x_max
            )));
        }
        Ok(c)
    }

    pub fn setup(&self) -> Result<ProblemSetup, CliError> {
        let s = ProblemSetup::new(
            &self.fluxes.left,
            &self.fluxes.right,
            self.data.u_l,
            self.data.u_r,
            Interval::new(self.domain.u_min, self.domain.u_max),
        )?;
        Ok(match self.asymptotics {
            Some(o) => s.with_asymptotics(o)?,
            None => s,
        })
    }

    pub fn params(&self) -> SimulationParams {
        let n = &self.numerics;
        SimulationParams {
            x_min: n.x_min,
            x_max: n.x_max,
            dx: n.dx,
            t_end: n.t_end,
            cfl: n.cfl,
            snapshot_times: n.snapshot_times.clone(),
            entropy_delta: n.entropy_delta,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("delta-mass check failed: max_rel_err = {max_rel_err:e} exceeds {tolerance}")]
    VerifyFailed { max_rel_err: f64, tolerance: f64 },
}

impl CliError {
    /// Process exit code: 2 config, 3 unsupported geometry, 4 failed
    /// verification, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(e) => match e {
                Error::Parse(_) | Error::InvalidInput(_) | Error::Asymptotics { .. } | Error::EpsTooLarge { .. } => 2,
                Error::UnsupportedGeometry(_) | Error::NoTableRow(_) => 3,
                _ => 1,
            },
            CliError::VerifyFailed { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "unsupported",
            4 => "verification",
            _ => "runtime",
        }
    }

    /// One-line JSON reason for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
        .to_string()
    }
}

fn write(out: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = out.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn prepare(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })
}

/// Writes `classify.json` and returns the report. A failed composition is
/// recorded in the report, not returned; see [`composition_error`].
pub fn cmd_classify(config: &ProblemConfig, out: &Path) -> Result<Classification, CliError> {
    prepare(out)?;
    let c = config.setup()?.classify()?;
    write(out, "classify.json", &to_json(&c))?;
    Ok(c)
}

/// The error that kept `c` from yielding a solution, if any.
pub fn composition_error(c: &Classification) -> Result<(), CliError> {
    match &c.unsupported {
        Some(e) => Err(CliError::Solver(e.clone())),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RarefactionSummary {
    pub side: twoflux::riemann::Side,
    pub u_slow: f64,
    pub u_fast: f64,
    pub speed_lo: f64,
    pub speed_hi: f64,
}

impl From<&Rarefaction> for RarefactionSummary {
    fn from(r: &Rarefaction) -> Self {
        RarefactionSummary {
            side: r.side,
            u_slow: r.u_slow,
            u_fast: r.u_fast,
            speed_lo: r.speed_lo,
            speed_hi: r.speed_hi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FanSummary {
    pub case: RiemannCase,
    pub u_l: f64,
    pub u_r: f64,
    pub sdw_states: [f64; 2],
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub kind: ShadowKind,
    pub table_row: String,
    pub backward: Option<RarefactionSummary>,
    pub forward: Option<RarefactionSummary>,
    pub eps: f64,
    /// `None` when no rarefaction bounds the shadow fan.
    pub eps_limit: Option<f64>,
    pub sample_times: Vec<f64>,
}

impl FanSummary {
    fn new(fan: &WaveFan, eps: f64, sample_times: Vec<f64>) -> Self {
        let p = &fan.sdw.profile;
        let lim = fan.eps_limit();
        FanSummary {
            case: fan.case,
            u_l: fan.u_l,
            u_r: fan.u_r,
            sdw_states: [fan.sdw.u0, fan.sdw.u1],
            kappa: p.kappa,
            alpha: p.alpha,
            beta: p.beta,
            xi0: p.xi0,
            xi1: p.xi1,
            kind: p.kind,
            table_row: p.table_row.label().to_string(),
            backward: fan.back.as_ref().map(Into::into),
            forward: fan.fwd.as_ref().map(Into::into),
            eps,
            eps_limit: lim.is_finite().then_some(lim),
            sample_times,
        }
    }
}

/// Writes `fan.json` and `profile.csv` (`x,t,u` at the cell centres of the
/// simulation grid, for every positive output time).
pub fn cmd_riemann(config: &ProblemConfig, out: &Path) -> Result<FanSummary, CliError> {
    prepare(out)?;
    let setup = config.setup()?;
    let fan = setup.solve()?;
    let params = config.params();
    let times: Vec<f64> = params.output_times()?.into_iter().filter(|&t| t > 0.0).collect();
    if times.is_empty() {
        return Err(CliError::Config("profile sampling needs t_end > 0".into()));
    }
    let eps = config.numerics.eps_background;
    let grid = GridState::riemann(params.x_min, params.x_max, params.dx, setup.u_l, setup.u_r)?;
    let mut csv = String::from("x,t,u\n");
    for &t in &times {
        for j in 0..grid.len() {
            let x = grid.x(j);
            let u = fan.sample(x, t, eps)?;
            let _ = writeln!(csv, "{x:.16e},{t:.16e},{u:.16e}");
        }
    }
    let summary = FanSummary::new(&fan, eps, times);
    write(out, "fan.json", &to_json(&summary))?;
    write(out, "profile.csv", &csv)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ProblemConfig,
    pub cells: usize,
    pub snapshots: Vec<SnapshotEntry>,
}

/// Writes one `snapshot_NNN.csv` per output time and `manifest.json`,
/// which embeds the resolved config.
pub fn cmd_simulate(config: &ProblemConfig, out: &Path) -> Result<Manifest, CliError> {
    prepare(out)?;
    let setup = config.setup()?;
    let snaps = godunov::run(&setup, &config.params())?;
    let mut entries = Vec::with_capacity(snaps.len());
    for (i, s) in snaps.iter().enumerate() {
        let file = format!("snapshot_{i:03}.csv");
        write(out, &file, &s.to_csv())?;
        entries.push(SnapshotEntry { file, t: s.t });
    }
    let m = Manifest {
        config: config.clone(),
        cells: snaps.first().map_or(0, GridState::len),
        snapshots: entries,
    };
    write(out, "manifest.json", &to_json(&m))?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub kappa: f64,
    pub dx: f64,
    pub max_rel_err: f64,
    pub pass: bool,
}

/// Solve, simulate and compare the singular mass with `κt`. Writes
/// `delta_mass.csv` and `summary.json`; a failed gate is returned as
/// [`CliError::VerifyFailed`] after both files are written.
pub fn cmd_verify(config: &ProblemConfig, out: &Path) -> Result<(VerifySummary, DeltaMassReport), CliError> {
    prepare(out)?;
    let setup = config.setup()?;
    let fan = setup.solve()?;
    let snaps = godunov::run(&setup, &config.params())?;
    let report = delta_mass(&snaps, &fan, config.numerics.eps_background)?;
    let summary = VerifySummary {
        kappa: report.kappa,
        dx: config.numerics.dx,
        max_rel_err: report.max_rel_err,
        pass: report.passes(),
    };
    write(out, "delta_mass.csv", &report.to_csv())?;
    write(out, "summary.json", &to_json(&summary))?;
    if !summary.pass {
        return Err(CliError::VerifyFailed {
            max_rel_err: summary.max_rel_err,
            tolerance: MASS_TOLERANCE,
        });
    }
    Ok((summary, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{
        "fluxes": {"left": "(1+2*u^2)/(1+u^2)", "right": "-(1+2*u^2)/(1+u^2)"},
        "data": {"u_l": 1, "u_r": 1},
        "domain": {"u_min": -5, "u_max": 5}
    }"#;

    #[test]
    fn numerics_default() {
        let c = ProblemConfig::from_json(EX1).unwrap();
        assert_eq!(c.numerics.dx, 0.01);
        assert_eq!(c.numerics.cfl, 0.9);
        assert_eq!(c.numerics.entropy_delta, 0.0);
        assert_eq!(c.numerics.eps_background, 1e-6);
        assert!(c.asymptotics.is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = EX1.replacen("\"data\"", "\"extra\": 1, \"data\"", 1);
        assert!(matches!(ProblemConfig::from_json(&bad), Err(CliError::Config(_))));
        let bad = EX1.replacen("\"u_r\": 1", "\"u_r\": 1, \"u_m\": 0", 1);
        assert!(matches!(ProblemConfig::from_json(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_keys_rejected() {
        let bad = r#"{"fluxes": {"left": "u", "right": "-u"}, "data": {"u_l": 1, "u_r": 1}}"#;
        assert_eq!(ProblemConfig::from_json(bad).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Solver(Error::UnsupportedGeometry("B".into())).exit_code(), 3);
        assert_eq!(CliError::Solver(Error::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::VerifyFailed { max_rel_err: 1.0, tolerance: 0.05 }.exit_code(), 4);
        let line = CliError::Config("boom".into()).to_json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "config");
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ProblemConfig::from_json(EX1).unwrap();
        let back = ProblemConfig::from_json(&to_json(&c)).unwrap();
        assert_eq!(back, c);
    }
}
