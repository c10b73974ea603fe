//! Run configuration: a single TOML document whose defaults reproduce the reference experiment.
//!
//! Rates are given as ordinary frequencies in Hz (the `gamma / 2 pi`
//! convention); the experiments convert to angular rates.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Modes,
    SubtractionScan,
    TeleportCompare,
    TomographyRoundtrip,
}

impl ExperimentKind {
    pub const ALL: [Self; 4] = [Self::Modes, Self::SubtractionScan, Self::TeleportCompare, Self::TomographyRoundtrip];

    pub fn name(self) -> &'static str {
        match self {
            Self::Modes => "modes",
            Self::SubtractionScan => "subtraction_scan",
            Self::TeleportCompare => "teleport_compare",
            Self::TomographyRoundtrip => "tomography_roundtrip",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Self::ALL.into_iter().find(|k| k.name() == key).ok_or_else(|| Error::Config {
            path: "experiment".into(),
            reason: format!("unknown experiment `{s}`; expected one of modes, subtraction_scan, teleport_compare, tomography_roundtrip"),
        })
    }
}

/// Squeezed-light source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceConfig {
    /// OPO half width `gamma / 2 pi` in Hz.
    pub gamma_hz: f64,
    /// Squeezing parameter of the mode-filtered arm.
    pub r_filtered: f64,
    /// Squeezing parameter of the conventional arm.
    pub r_conventional: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { gamma_hz: 6.2e6, r_filtered: 0.36, r_conventional: 0.38 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    /// Optical high-pass cavity half width `kappa / 2 pi` in Hz.
    pub kappa_hz: f64,
    /// `kappa' / kappa` of the cavity.
    pub impedance_ratio: f64,
    /// Teleporter electrical high-pass cutoff in Hz.
    pub electrical_cutoff_hz: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { kappa_hz: 0.5e6, impedance_ratio: -0.37, electrical_cutoff_hz: 101e3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfficiencyConfig {
    /// Detection efficiency excluding mode matching.
    pub eta0: f64,
    /// Fraction of heralds that are dark counts.
    pub zeta: f64,
}

impl Default for EfficiencyConfig {
    fn default() -> Self {
        Self { eta0: 0.83, zeta: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    /// Cavity half widths of the plotted filtered modes, Hz.
    pub kappas_hz: Vec<f64>,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self { kappas_hz: vec![0.2e6, 0.5e6, 1.0e6] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// OPO half width used for the scan, Hz.
    pub gamma_hz: f64,
    /// Cutoff of the mode the filtered state actually occupies, Hz.
    pub true_kappa_hz: f64,
    /// Largest applied cutoff, Hz.
    pub kappa_max_hz: f64,
    /// Evenly spaced applied cutoffs from 0 to `kappa_max_hz`; the true cutoff is added.
    pub points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { gamma_hz: 6.5e6, true_kappa_hz: 0.48e6, kappa_max_hz: 2.0e6, points: 41 }
    }
}

pub const R_EPR_NOTE: &str = "calibrated to the target output negativity, not a measured value";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeleportConfig {
    /// EPR squeezing of the teleporter; added noise variance is `exp(-2 r_epr)`.
    pub r_epr: f64,
    /// Provenance of `r_epr`.
    pub r_epr_note: String,
    /// One run per seed; both arms of a run share the seed.
    pub seeds: Vec<u64>,
    pub n_samples: usize,
    /// Bootstrap replicas per dataset; 0 uses the spread over seeds only.
    pub n_boot: usize,
}

impl Default for TeleportConfig {
    fn default() -> Self {
        Self { r_epr: 0.84, r_epr_note: R_EPR_NOTE.into(), seeds: vec![1, 2, 3, 4], n_samples: 100_000, n_boot: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub n_cut: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub n_boot: usize,
    pub bootstrap_seed: u64,
    pub replica_tol: f64,
    pub search_radius: f64,
    /// Half width of the emitted Wigner grids.
    pub grid_half_width: f64,
    pub grid_points: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 2024,
            n_cut: 10,
            tol: 1e-8,
            max_iter: 2000,
            n_boot: 100,
            bootstrap_seed: 7,
            replica_tol: 1e-5,
            search_radius: 0.5,
            grid_half_width: 5.0,
            grid_points: 101,
        }
    }
}

/// Acceptance thresholds; the exit status reflects these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub residual_reflection: f64,
    pub residual_reflection_tol: f64,
    pub conventional_w00: f64,
    pub conventional_tol: f64,
    pub filtered_w00: f64,
    pub filtered_tol: f64,
    pub roundtrip_tol: f64,
    pub min_fidelity: f64,
    pub bootstrap_min: f64,
    pub bootstrap_max: f64,
    pub teleport_min_wins: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            residual_reflection: 0.1369,
            residual_reflection_tol: 0.002,
            conventional_w00: -0.171,
            conventional_tol: 0.01,
            filtered_w00: -0.179,
            filtered_tol: 0.003,
            roundtrip_tol: 0.005,
            min_fidelity: 0.99,
            bootstrap_min: 0.002,
            bootstrap_max: 0.008,
            teleport_min_wins: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub efficiency: EfficiencyConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub teleport: TeleportConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

fn cfg_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config { path: path.into(), reason: reason.into() }
}

impl RunConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            output_dir: PathBuf::from("runs").join(experiment.name()),
            source: SourceConfig::default(),
            filter: FilterConfig::default(),
            efficiency: EfficiencyConfig::default(),
            modes: ModesConfig::default(),
            scan: ScanConfig::default(),
            teleport: TeleportConfig::default(),
            tomography: TomographyConfig::default(),
            checks: ChecksConfig::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err("", e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| cfg_err("", e.message().to_string()))?;
        Self::from_table(value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err("", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
            let msg = e.message().to_string();
            let path = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("")
                .to_string();
            cfg_err(&path, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `section.key=value` overrides; values are parsed as TOML
    /// literals, falling back to plain strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(&self.to_toml()?).map_err(|e| cfg_err("", e.to_string()))?;
        for item in overrides {
            let item = item.as_ref();
            let (path, raw) = item.split_once('=').ok_or_else(|| cfg_err(item, "override must look like `section.key=value`"))?;
            let path = path.trim();
            let value = parse_literal(raw.trim());
            set_path(&mut table, path, value)?;
            let probe: std::result::Result<Self, _> = toml::Value::Table(table.clone()).try_into();
            if let Err(e) = probe {
                return Err(cfg_err(path, e.message().to_string()));
            }
        }
        Self::from_table(table)
    }

    /// Checks every field that the type system does not; errors name the field path.
    pub fn validate(&self) -> Result<()> {
        let positive = |path: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(cfg_err(path, format!("must be positive, got {v}"))) };
        let unit = |path: &str, v: f64, open_low: bool| {
            let ok = v.is_finite() && v <= 1.0 && if open_low { v > 0.0 } else { v >= 0.0 };
            if ok { Ok(()) } else { Err(cfg_err(path, format!("must lie in {}0, 1], got {v}", if open_low { "(" } else { "[" }))) }
        };
        positive("source.gamma_hz", self.source.gamma_hz)?;
        for (path, r) in [("source.r_filtered", self.source.r_filtered), ("source.r_conventional", self.source.r_conventional)] {
            if !(r >= 0.0 && r <= 2.0) {
                return Err(cfg_err(path, format!("squeezing parameter must lie in [0, 2], got {r}")));
            }
        }
        positive("filter.kappa_hz", self.filter.kappa_hz)?;
        if !(self.filter.impedance_ratio.abs() < 1.0) {
            return Err(cfg_err("filter.impedance_ratio", "must lie strictly between -1 and 1"));
        }
        positive("filter.electrical_cutoff_hz", self.filter.electrical_cutoff_hz)?;
        unit("efficiency.eta0", self.efficiency.eta0, true)?;
        if !(self.efficiency.zeta >= 0.0 && self.efficiency.zeta < 1.0) {
            return Err(cfg_err("efficiency.zeta", "must lie in [0, 1)"));
        }
        if self.modes.kappas_hz.is_empty() {
            return Err(cfg_err("modes.kappas_hz", "needs at least one cutoff"));
        }
        for (i, &k) in self.modes.kappas_hz.iter().enumerate() {
            positive(&format!("modes.kappas_hz[{i}]"), k)?;
        }
        positive("scan.gamma_hz", self.scan.gamma_hz)?;
        positive("scan.true_kappa_hz", self.scan.true_kappa_hz)?;
        positive("scan.kappa_max_hz", self.scan.kappa_max_hz)?;
        if self.scan.points < 3 {
            return Err(cfg_err("scan.points", "needs at least 3 points"));
        }
        if !(self.teleport.r_epr >= 0.0 && self.teleport.r_epr.is_finite()) {
            return Err(cfg_err("teleport.r_epr", "must be finite and non-negative"));
        }
        if self.teleport.seeds.is_empty() {
            return Err(cfg_err("teleport.seeds", "needs at least one seed"));
        }
        // TOML integers are signed 64-bit
        let seeds = self.teleport.seeds.iter().enumerate().map(|(i, &s)| (format!("teleport.seeds[{i}]"), s));
        let seeds = seeds.chain([("tomography.seed".to_string(), self.tomography.seed), ("tomography.bootstrap_seed".to_string(), self.tomography.bootstrap_seed)]);
        for (path, s) in seeds {
            if s > i64::MAX as u64 {
                return Err(cfg_err(&path, format!("seed {s} exceeds {}", i64::MAX)));
            }
        }
        let boot = |path: &str, n: usize| if n == 1 { Err(cfg_err(path, "use 0 (off) or at least 2 replicas")) } else { Ok(()) };
        boot("teleport.n_boot", self.teleport.n_boot)?;
        boot("tomography.n_boot", self.tomography.n_boot)?;
        for (path, n) in [("teleport.n_samples", self.teleport.n_samples), ("tomography.n_samples", self.tomography.n_samples)] {
            if n < 100 {
                return Err(cfg_err(path, format!("too few samples for reconstruction ({n})")));
            }
        }
        let t = &self.tomography;
        if t.n_cut < 2 || t.n_cut > 30 {
            return Err(cfg_err("tomography.n_cut", "must lie in [2, 30]"));
        }
        positive("tomography.tol", t.tol)?;
        positive("tomography.replica_tol", t.replica_tol)?;
        if t.max_iter == 0 {
            return Err(cfg_err("tomography.max_iter", "must be positive"));
        }
        if !(t.search_radius >= 0.0 && t.search_radius < t.grid_half_width) {
            return Err(cfg_err("tomography.search_radius", "must be non-negative and inside the grid"));
        }
        positive("tomography.grid_half_width", t.grid_half_width)?;
        if t.grid_points < 11 {
            return Err(cfg_err("tomography.grid_points", "needs at least 11 points"));
        }
        if self.checks.bootstrap_min > self.checks.bootstrap_max {
            return Err(cfg_err("checks.bootstrap_min", "exceeds checks.bootstrap_max"));
        }
        Ok(())
    }

    /// Angular rate from a frequency in Hz.
    pub fn angular(hz: f64) -> f64 {
        std::f64::consts::TAU * hz
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| cfg_err(path, "empty field path"))?;
    let mut cur = table;
    for (i, key) in keys.iter().enumerate() {
        let here = keys[..=i].join(".");
        cur = cur
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| cfg_err(&here, "is not a section"))?;
    }
    // keep integer/float distinctions of the target field
    let value = match (cur.get(last), value) {
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (_, v) => v,
    };
    cur.insert(last.to_string(), value);
    Ok(())
}
