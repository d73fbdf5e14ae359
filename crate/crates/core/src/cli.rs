//! Command implementations behind the `lightspin` binary. Each command
//! writes its CSV output plus a `manifest.json` naming it.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{
    ellipticity_law, extract_precession_frequency, scaling_exponent, FrequencyFit,
};
use crate::config::RunConfig;
use crate::constants::CODATA_2018;
use crate::dirac::{build_spinor_table, MomentumLattice};
use crate::fields::ConfigError;
use crate::integrator::{propagate, IntegratorError, TimeSeries};
use crate::perturbation::{
    harmonicity_ratio, pauli_components, perturbative_bounds, u2_dirac_coefficient,
    u4_dirac_secular, PerturbationError, PerturbativeSummary,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const TIMESERIES_FILE: &str = "spin_timeseries.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const REGION_FILE: &str = "region.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Column reference printed by `lightspin schema` and `--help`.
pub const SCHEMA: &str = "\
spin_timeseries.csv (run)
  t_cycles            time in laser cycles
  s_z_over_hbar       spin expectation s_z / hbar, in [-1/2, 1/2]
  norm                sum of |c|^2
  lambda_rho_quarter  lambda * rho(lambda/4); Pauli models only, empty for dirac
sweep.csv (sweep)
  E_hat               peak field per beam, V/m
  eta                 ellipticity phase, rad
  model               dirac | pauli-rel | pauli-nonrel
  omega_fit           fitted precession frequency, rad/s
  residual            RMS fit residual, units of hbar
  error               empty on success
  trailing '#' lines  fitted exponent or sin(eta) law deviation
region.csv (region)
  lambda              wavelength, m
  E_min               lowest field that completes a half flip in N cycles, V/m
  E_max               field at which xi = 1, V/m
  nonempty            true when E_min <= E_max
report --format=csv
  quantity,value,unit
All numbers are written with 17 significant digits.";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("integration aborted: {0}")]
    Numerical(String),
    #[error("perturbation oracle: {0}")]
    Resonance(#[from] PerturbationError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<IntegratorError> for CliError {
    fn from(e: IntegratorError) -> Self {
        match e {
            IntegratorError::Config(c) => CliError::Config(c),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Resonance(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

/// Written next to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config: Option<RunConfig>,
    pub constants: crate::constants::PhysicalConstants,
    pub constants_fingerprint: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, config: Option<RunConfig>, start: Instant, outputs: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            version: VERSION,
            config,
            constants: CODATA_2018,
            constants_fingerprint: CODATA_2018.fingerprint(),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
        Ok(())
    }
}

/// Full round-trip precision.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn timeseries_csv(series: &TimeSeries) -> String {
    let mut out = String::from("t_cycles,s_z_over_hbar,norm,lambda_rho_quarter\n");
    let cycles = series.times_cycles();
    for i in 0..series.len() {
        let rho = series
            .density
            .as_ref()
            .map(|d| num(d[i]))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(cycles[i]),
            num(series.s_z[i]),
            num(series.norms[i]),
            rho
        );
    }
    out
}

pub struct RunOutcome {
    pub config: RunConfig,
    pub series: TimeSeries,
    pub fit: FrequencyFit,
    pub files: Vec<PathBuf>,
}

/// Propagates one configuration and writes the sampled observables.
pub fn cmd_run(config: &Path, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let cfg = RunConfig::load(config)?;
    let series = propagate(cfg.model, &cfg.laser, &cfg.settings)?;
    let fit = extract_precession_frequency(&series);
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(TIMESERIES_FILE);
    std::fs::write(&path, timeseries_csv(&series))?;
    RunManifest::new("run", Some(cfg), start, &[TIMESERIES_FILE]).write(out_dir)?;
    Ok(RunOutcome {
        config: cfg,
        series,
        fit,
        files: vec![path, out_dir.join(MANIFEST_FILE)],
    })
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepGrid {
    /// Peak fields, V/m.
    FieldStrength(Vec<f64>),
    /// Ellipticities, rad.
    Eta(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub e_hat: f64,
    pub eta: f64,
    pub fit: Option<FrequencyFit>,
    pub error: Option<String>,
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// `(name, value)` lines appended to the CSV.
    pub summary: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
}

/// Runs the configuration at every grid point in parallel.
pub fn cmd_sweep(config: &Path, grid: &SweepGrid, out_dir: &Path) -> Result<SweepOutcome, CliError> {
    let start = Instant::now();
    let cfg = RunConfig::load(config)?;
    let points: Vec<(f64, f64)> = match grid {
        SweepGrid::FieldStrength(es) => es.iter().map(|&e| (e, cfg.laser.eta)).collect(),
        SweepGrid::Eta(etas) => etas.iter().map(|&h| (cfg.laser.e_hat, h)).collect(),
    };
    if points.is_empty() {
        return Err(ConfigError::new("grid", "is empty").into());
    }
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(e_hat, eta)| {
            let laser = cfg.laser.with_e_hat(e_hat).with_eta(eta);
            let outcome = laser
                .validate()
                .map_err(IntegratorError::from)
                .and_then(|_| propagate(cfg.model, &laser, &cfg.settings));
            match outcome {
                Ok(series) => {
                    let fit = extract_precession_frequency(&series);
                    let error = (!fit.usable).then(|| "no precession period in window".to_string());
                    SweepRow {
                        e_hat,
                        eta,
                        fit: Some(fit),
                        error,
                    }
                }
                Err(e) => SweepRow {
                    e_hat,
                    eta,
                    fit: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let mut summary = Vec::new();
    match grid {
        SweepGrid::FieldStrength(_) => {
            let pts: Vec<_> = good.iter().map(|r| (r.e_hat, r.fit.unwrap().omega_fit)).collect();
            let value = match scaling_exponent(&pts) {
                Ok(f) => num(f.slope),
                Err(e) => format!("n/a ({e})"),
            };
            summary.push(("exponent".to_string(), value));
        }
        SweepGrid::Eta(_) => {
            let pts: Vec<_> = good.iter().map(|r| (r.eta, r.fit.unwrap().omega_fit)).collect();
            let value = match ellipticity_law(&pts) {
                Ok(f) => num(f.max_deviation),
                Err(e) => format!("n/a ({e})"),
            };
            summary.push(("sin_eta_max_deviation".to_string(), value));
        }
    }

    let mut csv = String::from("E_hat,eta,model,omega_fit,residual,error\n");
    for r in &rows {
        let (w, res) = r
            .fit
            .map(|f| (num(f.omega_fit), num(f.residual_rms)))
            .unwrap_or_default();
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(csv, "{},{},{},{},{},{}", num(r.e_hat), num(r.eta), cfg.model, w, res, err);
    }
    for (k, v) in &summary {
        let _ = writeln!(csv, "# {k} = {v}");
    }
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(SWEEP_FILE);
    std::fs::write(&path, csv)?;
    RunManifest::new("sweep", Some(cfg), start, &[SWEEP_FILE]).write(out_dir)?;
    if good.is_empty() {
        return Err(CliError::Numerical("every sweep point failed".into()));
    }
    Ok(SweepOutcome {
        rows,
        summary,
        files: vec![path, out_dir.join(MANIFEST_FILE)],
    })
}

/// Tabulates the perturbative field window over a wavelength range.
pub fn cmd_region(
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
    cycles: f64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    if !(lambda_min > 0.0 && lambda_max >= lambda_min && lambda_max.is_finite()) {
        return Err(ConfigError::new("lambda", "range must satisfy 0 < min <= max").into());
    }
    if points == 0 {
        return Err(ConfigError::new("points", "must be at least 1").into());
    }
    if !(cycles >= 1.0 && cycles.is_finite()) {
        return Err(ConfigError::new("cycles", "must be at least 1").into());
    }
    let mut csv = String::from("lambda,E_min,E_max,nonempty\n");
    for i in 0..points {
        let lambda = if points == 1 {
            lambda_min
        } else {
            lambda_min + (lambda_max - lambda_min) * i as f64 / (points - 1) as f64
        };
        let b = perturbative_bounds(lambda, cycles);
        let _ = writeln!(csv, "{},{},{},{}", num(lambda), num(b.e_min), num(b.e_max), b.nonempty);
    }
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(REGION_FILE);
    std::fs::write(&path, csv)?;
    RunManifest::new("region", None, start, &[REGION_FILE]).write(out_dir)?;
    Ok(vec![path, out_dir.join(MANIFEST_FILE)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
}

/// Closed-form and fourth-order oracle values for a configuration. The cycle
/// budget for the field bounds is the configured `T_cycles`.
pub fn cmd_report(config: &Path, format: ReportFormat) -> Result<String, CliError> {
    let cfg = RunConfig::load(config)?;
    let laser = &cfg.laser;
    let summary = PerturbativeSummary::new(laser, laser.t_cycles().max(1.0));
    let h = harmonicity_ratio(laser);
    let table = build_spinor_table(&MomentumLattice::for_config(laser, 4));
    let m = u4_dirac_secular(laser, &table)?;
    let [m1, mx, _, _] = pauli_components(&m);
    let u2 = u2_dirac_coefficient(laser, &table);
    let off = u2[(0, 1)].norm().max(u2[(1, 0)].norm()) / u2[(0, 0)].norm().max(f64::MIN_POSITIVE);
    let gap = (mx.re - summary.omega / 2.0) / (summary.omega / 2.0);

    let rows: Vec<(&str, String, &str)> = vec![
        ("Omega", num(summary.omega), "rad/s"),
        ("Omega_phi", num(summary.omega_phi), "rad/s"),
        ("Omega_P", num(summary.omega_p), "rad/s"),
        ("xi", num(summary.xi), "1"),
        ("secondary_ratio", num(h.secondary), "1"),
        ("E_min", num(summary.e_min), "V/m"),
        ("E_max", num(summary.e_max), "V/m"),
        ("u4_sigma_x", num(mx.re), "rad/s"),
        ("u4_identity", num(m1.re), "rad/s"),
        ("u4_sigma_x_gap", num(gap), "1"),
        ("u2_offdiagonal_ratio", num(off), "1"),
        ("perturbative", (h.xi < 1.0).to_string(), "bool"),
    ];
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str("quantity,value,unit\n");
            for (k, v, u) in &rows {
                let _ = writeln!(out, "{k},{v},{u}");
            }
        }
        ReportFormat::Table => {
            for (k, v, u) in &rows {
                let _ = writeln!(out, "{k:<22} {v:>24} {u}");
            }
            if h.xi >= 1.0 {
                out.push_str("WARNING: xi >= 1, outside the perturbative regime; precession is not harmonic\n");
            }
        }
    }
    Ok(out)
}

/// Minimal reader for the CSV files written here: header, rows, and the
/// `#` summary lines as `(key, value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<(String, String)>,
}

pub fn parse_csv(text: &str) -> Result<CsvTable, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for line in lines {
        if let Some(note) = line.strip_prefix('#') {
            let (k, v) = note.split_once('=').ok_or("malformed summary line")?;
            notes.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(format!("row has {} fields, header has {}", row.len(), header.len()));
        }
        rows.push(row);
    }
    Ok(CsvTable {
        header,
        rows,
        notes,
    })
}
