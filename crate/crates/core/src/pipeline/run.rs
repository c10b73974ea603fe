//! Experiment drivers. Every number that ends up in a report is computed
//! here and stored in `summary.json` or an artifact file.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentKind, RunConfig};
use super::report::report;
use crate::error::{Error, Result};
use crate::homodyne_sampler::{
    apply_mode_mismatch, sample_dataset, teleport_channel, PhaseSchedule, QuadratureDataset, TeleportChannel,
};
use crate::state_model::{model_state, wigner_value, FockDensityMatrix, GridSpec, ModelParams};
use crate::temporal_modes::{
    electrical_hpf_project, filtered_mode_from_rates, lorentzian_mode, overlap, CavityFilter, ModeFunction, TimeGrid,
};
use crate::tomography::{
    bootstrap_error, fbp_wigner, kappa_scan, min_negativity_of_state, reconstruct, reconstructed_grid,
    BootstrapPipeline, FbpOptions, KappaScan, MleOptions, NegativityReport, ScanPoint, StopReason, TrueMode,
};

pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.json";
pub const REPORT_FILE: &str = "report.txt";
pub const FAILED_FILE: &str = "FAILED";
pub const ARTIFACT_DIR: &str = "artifacts";

/// Truncation used for model states before sampling.
const MODEL_N_CUT: usize = 30;

pub const KAPPA_ZERO_CAVEAT: &str =
    "the measured conventional point sits above theory at kappa = 0; a known discrepancy of the simple model, hence the wider tolerance";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn within(name: &str, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            passed: (value - target).abs() <= tol,
            value,
            target: format!("{target:.4} +- {tol:.4}"),
            note: None,
        }
    }

    fn flag(name: &str, passed: bool, value: f64, target: impl Into<String>) -> Self {
        Self { name: name.into(), passed, value, target: target.into(), note: None }
    }

    fn noted(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub kappa_hz: f64,
    /// Overlap with the unfiltered Lorentzian mode.
    pub overlap_lorentzian: f64,
    /// Time integral (the DC content left by the impedance mismatch).
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesResults {
    pub gamma_hz: f64,
    pub impedance_ratio: f64,
    /// `|response(0)|^2` of the cavity.
    pub residual_reflection: f64,
    pub modes: Vec<ModeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResults {
    pub gamma_hz: f64,
    pub true_kappa_hz: f64,
    pub conventional: Vec<ScanPoint>,
    pub filtered: Vec<ScanPoint>,
    pub conventional_min: ScanPoint,
    pub filtered_min: ScanPoint,
    pub caveat: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub negativity: NegativityReport,
    pub w00: f64,
    pub evaluations: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResults {
    pub arm: String,
    pub r: f64,
    pub eta_kappa: f64,
    /// Closed-form `W(0,0)` of the input state.
    pub input_w00: f64,
    /// `W(0,0)` of the modelled teleporter output.
    pub model_w00: f64,
    pub runs: Vec<SeedResult>,
    /// Mean of the per-run minima.
    pub mean_w_min: f64,
    /// Scatter of single-run minima (sample standard deviation over seeds).
    pub seed_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportResults {
    pub r_epr: f64,
    pub r_epr_note: String,
    pub noise_variance: f64,
    pub electrical_cutoff_hz: f64,
    pub filtered: ArmResults,
    pub conventional: ArmResults,
    /// Runs in which the filtered arm is strictly more negative.
    pub filtered_wins: usize,
    /// Mean of filtered minus conventional minima.
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyResults {
    pub model_w00: f64,
    pub reconstructed_w00: f64,
    pub negativity: NegativityReport,
    pub bootstrap_std: Option<f64>,
    pub bootstrap_replicas: usize,
    pub fidelity: f64,
    pub evaluations: usize,
    pub stop: StopReason,
    pub fbp_w00: f64,
    pub fbp_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Modes(ModesResults),
    SubtractionScan(ScanResults),
    TeleportCompare(TeleportResults),
    TomographyRoundtrip(TomographyResults),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub version: String,
    pub seeds: Vec<u64>,
    /// Paths relative to the run directory.
    pub artifacts: Vec<String>,
    pub checks: Vec<Check>,
    pub results: Results,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Tracks files written under the run directory.
struct Artifacts {
    root: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root.join(ARTIFACT_DIR))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    fn dir(&self) -> PathBuf {
        self.root.join(ARTIFACT_DIR)
    }

    fn record(&mut self, name: &str) -> PathBuf {
        self.written.push(format!("{ARTIFACT_DIR}/{name}"));
        self.dir().join(name)
    }

    fn text(&mut self, name: &str, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.record(name);
        let mut out = BufWriter::new(fs::File::create(path)?);
        write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        let path = self.record(name);
        fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    fn dataset(&mut self, data: &QuadratureDataset<f64>, stem: &str) -> Result<()> {
        data.write(&self.dir(), stem)?;
        self.written.push(format!("{ARTIFACT_DIR}/{stem}.txt"));
        self.written.push(format!("{ARTIFACT_DIR}/{stem}.json"));
        Ok(())
    }

    fn density(&mut self, rho: &FockDensityMatrix<f64>, name: &str) -> Result<()> {
        let path = self.record(name);
        let mut out = BufWriter::new(fs::File::create(path)?);
        rho.write_json(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

/// Removes the files a previous run left in `dir`; anything else is left alone.
fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for name in [CONFIG_FILE, SUMMARY_FILE, REPORT_FILE, FAILED_FILE] {
        let path = dir.join(name);
        if path.exists() {
            fs::remove_file(path)?;
        }
    }
    let artifacts = dir.join(ARTIFACT_DIR);
    if artifacts.exists() {
        fs::remove_dir_all(artifacts)?;
    }
    Ok(())
}

/// Runs the configured experiment in `config.output_dir`. On failure a
/// `FAILED` file with the error is left next to the partial outputs.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    config.validate()?;
    let dir = config.output_dir.as_path();
    prepare_dir(dir)?;
    fs::write(dir.join(CONFIG_FILE), config.to_toml()?)?;
    let outcome = execute(config, dir).and_then(|summary| {
        fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&summary)? + "\n")?;
        let text = report(dir)?;
        fs::write(dir.join(REPORT_FILE), &text)?;
        Ok(summary)
    });
    if let Err(e) = &outcome {
        // best effort: the original error is what the caller needs
        let _ = fs::write(dir.join(FAILED_FILE), format!("{e}\n"));
    }
    outcome
}

fn execute(config: &RunConfig, dir: &Path) -> Result<RunSummary> {
    let mut artifacts = Artifacts::new(dir)?;
    let (seeds, checks, results) = match config.experiment {
        ExperimentKind::Modes => modes(config, &mut artifacts)?,
        ExperimentKind::SubtractionScan => subtraction_scan(config, &mut artifacts)?,
        ExperimentKind::TeleportCompare => teleport_compare(config, &mut artifacts)?,
        ExperimentKind::TomographyRoundtrip => tomography_roundtrip(config, &mut artifacts)?,
    };
    Ok(RunSummary {
        experiment: config.experiment,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds,
        artifacts: artifacts.written,
        checks,
        results,
    })
}

type Outcome = (Vec<u64>, Vec<Check>, Results);

fn modes(config: &RunConfig, art: &mut Artifacts) -> Result<Outcome> {
    let gamma = RunConfig::angular(config.source.gamma_hz);
    let ratio = config.filter.impedance_ratio;
    let kappas: Vec<f64> = config.modes.kappas_hz.iter().map(|&k| RunConfig::angular(k)).collect();
    let grid = TimeGrid::for_rates(gamma, &kappas)?;
    let base = lorentzian_mode(gamma, &grid)?;
    let filtered: Vec<ModeFunction<f64>> =
        kappas.iter().map(|&k| filtered_mode_from_rates(gamma, k, ratio * k, &grid)).collect::<Result<_>>()?;
    art.text("modes.txt", |out| {
        write!(out, "# t_microseconds lorentzian")?;
        for k in &config.modes.kappas_hz {
            write!(out, " kappa_{}kHz", k / 1e3)?;
        }
        writeln!(out)?;
        for i in 0..grid.len() {
            write!(out, "{} {}", base.time(i) * 1e6, base.samples()[i])?;
            for m in &filtered {
                write!(out, " {}", m.samples()[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    })?;
    let rows: Vec<ModeRow> = config
        .modes
        .kappas_hz
        .iter()
        .zip(&filtered)
        .map(|(&k, m)| Ok(ModeRow { kappa_hz: k, overlap_lorentzian: overlap(&base, m)?, integral: m.integral() }))
        .collect::<Result<_>>()?;
    let cavity = CavityFilter::from_kappa(1.0, ratio)?;
    let residual = cavity.response(0.0).norm_sqr();
    let results = ModesResults { gamma_hz: config.source.gamma_hz, impedance_ratio: ratio, residual_reflection: residual, modes: rows };
    art.json("modes.json", &results)?;

    let c = &config.checks;
    let mut checks = vec![Check::within("residual_reflection", residual, c.residual_reflection, c.residual_reflection_tol)];
    let mut order: Vec<&ModeRow> = results.modes.iter().collect();
    order.sort_by(|a, b| a.kappa_hz.total_cmp(&b.kappa_hz));
    let decreasing = order.windows(2).all(|w| w[1].overlap_lorentzian < w[0].overlap_lorentzian);
    let worst = order.last().map_or(1.0, |r| r.overlap_lorentzian);
    checks.push(Check::flag("overlap_decreases_with_cutoff", decreasing, worst, "strictly decreasing in kappa"));
    Ok((Vec::new(), checks, Results::Modes(results)))
}

fn scan_grid(config: &RunConfig) -> Vec<f64> {
    let s = &config.scan;
    let step = s.kappa_max_hz / (s.points - 1) as f64;
    let mut hz: Vec<f64> = (0..s.points).map(|i| i as f64 * step).collect();
    if !hz.iter().any(|&k| (k - s.true_kappa_hz).abs() < 1e-9 * s.kappa_max_hz) {
        hz.push(s.true_kappa_hz);
        hz.sort_by(f64::total_cmp);
    }
    hz.into_iter().map(RunConfig::angular).collect()
}

fn write_curve(out: &mut dyn Write, curve: &[ScanPoint]) -> Result<()> {
    writeln!(out, "# kappa_over_2pi_MHz eta_kappa W00")?;
    for p in curve {
        writeln!(out, "{} {} {}", p.kappa / std::f64::consts::TAU / 1e6, p.eta_kappa, p.w00)?;
    }
    Ok(())
}

fn argmin(curve: &[ScanPoint]) -> usize {
    (0..curve.len()).min_by(|&a, &b| curve[a].w00.total_cmp(&curve[b].w00)).unwrap_or(0)
}

fn subtraction_scan(config: &RunConfig, art: &mut Artifacts) -> Result<Outcome> {
    let gamma = RunConfig::angular(config.scan.gamma_hz);
    let true_kappa = RunConfig::angular(config.scan.true_kappa_hz);
    let ratio = config.filter.impedance_ratio;
    let kappas = scan_grid(config);
    let spec = |mode: TrueMode, r: f64| KappaScan {
        gamma,
        true_mode: mode,
        applied_impedance_ratio: ratio,
        eta0: config.efficiency.eta0,
        r,
        zeta: config.efficiency.zeta,
        force_unit_overlap: false,
    };
    let conventional = kappa_scan(&spec(TrueMode { kappa: 0.0, kappa_prime: 0.0 }, config.source.r_conventional), &kappas)?;
    let filtered = kappa_scan(
        &spec(TrueMode { kappa: true_kappa, kappa_prime: ratio * true_kappa }, config.source.r_filtered),
        &kappas,
    )?;
    art.text("scan_conventional.txt", |out| write_curve(out, &conventional))?;
    art.text("scan_filtered.txt", |out| write_curve(out, &filtered))?;
    let (ic, jf) = (argmin(&conventional), argmin(&filtered));
    let results = ScanResults {
        gamma_hz: config.scan.gamma_hz,
        true_kappa_hz: config.scan.true_kappa_hz,
        conventional_min: conventional[ic],
        filtered_min: filtered[jf],
        conventional,
        filtered,
        caveat: KAPPA_ZERO_CAVEAT.into(),
    };
    art.json("scan.json", &results)?;

    let c = &config.checks;
    let conv = &results.conventional;
    let filt = &results.filtered;
    let rises = conv.windows(2).all(|w| w[1].w00 > w[0].w00);
    let step = RunConfig::angular(config.scan.kappa_max_hz) / (config.scan.points - 1) as f64;
    let interior = jf > 0 && jf + 1 < filt.len();
    let checks = vec![
        Check::flag("conventional_monotone", rises, conv[conv.len() - 1].w00 - conv[0].w00, "W(0,0) increasing in applied kappa"),
        Check::flag("conventional_min_at_zero", ic == 0 && conv[0].kappa == 0.0, conv[ic].kappa, "minimum at kappa = 0"),
        Check::within("conventional_w00", conv[0].w00, c.conventional_w00, c.conventional_tol).noted(KAPPA_ZERO_CAVEAT),
        Check::flag(
            "filtered_interior_minimum",
            interior && (filt[jf].kappa - true_kappa).abs() <= step,
            filt[jf].kappa / std::f64::consts::TAU,
            format!("interior, within one scan step of {} Hz", config.scan.true_kappa_hz),
        ),
        Check::flag("filtered_beats_conventional", filt[jf].w00 <= conv[ic].w00, filt[jf].w00 - conv[ic].w00, "<= 0"),
        Check::within("filtered_w00", filt[jf].w00, c.filtered_w00, c.filtered_tol),
    ];
    Ok((Vec::new(), checks, Results::SubtractionScan(results)))
}

fn mle_options(config: &RunConfig) -> MleOptions {
    let t = &config.tomography;
    MleOptions { n_cut: t.n_cut, tol: t.tol, max_iter: t.max_iter, accelerate: true }
}

fn grid_spec(config: &RunConfig) -> GridSpec<f64> {
    GridSpec::square(config.tomography.grid_half_width, config.tomography.grid_points)
}

/// Seed of the bootstrap resampling for a dataset seed.
fn bootstrap_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5bd1_e995
}

struct Arm<'a> {
    name: &'a str,
    r: f64,
    mode: ModeFunction<f64>,
}

fn teleport_compare(config: &RunConfig, art: &mut Artifacts) -> Result<Outcome> {
    let gamma = RunConfig::angular(config.source.gamma_hz);
    let kappa = RunConfig::angular(config.filter.kappa_hz);
    let cutoff = RunConfig::angular(config.filter.electrical_cutoff_hz);
    let ratio = config.filter.impedance_ratio;
    let grid = TimeGrid::for_rates(gamma, &[kappa, cutoff])?;
    let arms = [
        Arm { name: "filtered", r: config.source.r_filtered, mode: filtered_mode_from_rates(gamma, kappa, ratio * kappa, &grid)? },
        Arm { name: "conventional", r: config.source.r_conventional, mode: lorentzian_mode(gamma, &grid)? },
    ];
    let channel = TeleportChannel::unity(config.teleport.r_epr);
    let radius = config.tomography.search_radius;
    let opts = mle_options(config);
    let mut summaries = Vec::new();
    for arm in &arms {
        // the feed-forward high-pass leaves the state in the projected mode
        let projected = electrical_hpf_project(&arm.mode, cutoff)?;
        let base = ModelParams::from_components(arm.r, config.efficiency.eta0, 1.0, config.efficiency.zeta)?;
        let params = apply_mode_mismatch(&base, &arm.mode, &projected)?;
        let input = model_state(&params, MODEL_N_CUT)?;
        let output = teleport_channel(&input, &channel)?;
        let mut runs = Vec::new();
        for &seed in &config.teleport.seeds {
            let label = format!("teleported {} input", arm.name);
            let data = sample_dataset(&output, config.teleport.n_samples, &PhaseSchedule::LinearSweep, seed, &label)?;
            let stem = format!("teleport_{}_seed{seed}", arm.name);
            art.dataset(&data, &stem)?;
            let fit = reconstruct(&data, &opts)?;
            art.density(&fit.rho, &format!("{stem}_rho.json"))?;
            let grid = reconstructed_grid(&fit.rho, &grid_spec(config), &stem)?;
            art.text(&format!("{stem}_wigner.txt"), |out| grid.write_text(out))?;
            let mut negativity = min_negativity_of_state(&fit.rho, radius)?;
            if config.teleport.n_boot > 0 {
                let pipeline = BootstrapPipeline { mle: opts, search_radius: radius, warm_start: true, replica_tol: config.tomography.replica_tol };
                negativity.std_error = bootstrap_error(&data, config.teleport.n_boot, &pipeline, bootstrap_seed(seed))?.std_error;
            }
            runs.push(SeedResult {
                seed,
                negativity,
                w00: wigner_value(&fit.rho, 0.0, 0.0),
                evaluations: fit.evaluations,
                stop: fit.stop,
            });
        }
        let k = runs.len() as f64;
        let mean = runs.iter().map(|r| r.negativity.w_min).sum::<f64>() / k;
        let seed_std = if runs.len() > 1 {
            (runs.iter().map(|r| (r.negativity.w_min - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        summaries.push(ArmResults {
            arm: arm.name.into(),
            r: arm.r,
            eta_kappa: params.eta_kappa,
            input_w00: params.w00(),
            model_w00: wigner_value(&output, 0.0, 0.0),
            runs,
            mean_w_min: mean,
            seed_std,
        });
    }
    let conventional = summaries.pop().expect("two arms");
    let filtered = summaries.pop().expect("two arms");
    let wins = filtered
        .runs
        .iter()
        .zip(&conventional.runs)
        .filter(|(f, c)| f.negativity.w_min < c.negativity.w_min)
        .count();
    let results = TeleportResults {
        r_epr: config.teleport.r_epr,
        r_epr_note: config.teleport.r_epr_note.clone(),
        noise_variance: channel.noise_variance(),
        electrical_cutoff_hz: config.filter.electrical_cutoff_hz,
        mean_gap: filtered.mean_w_min - conventional.mean_w_min,
        filtered_wins: wins,
        filtered,
        conventional,
    };
    art.json("teleport.json", &results)?;
    let n = config.teleport.seeds.len();
    let checks = vec![
        Check::flag(
            "filtered_more_negative",
            wins >= config.checks.teleport_min_wins.min(n),
            wins as f64,
            format!(">= {} of {n} runs", config.checks.teleport_min_wins.min(n)),
        ),
        Check::flag("mean_gap_sign", results.mean_gap < 0.0, results.mean_gap, "< 0 (filtered minus conventional)"),
    ];
    Ok((config.teleport.seeds.clone(), checks, Results::TeleportCompare(results)))
}

fn tomography_roundtrip(config: &RunConfig, art: &mut Artifacts) -> Result<Outcome> {
    let t = &config.tomography;
    let params = ModelParams::from_components(config.source.r_filtered, config.efficiency.eta0, 1.0, config.efficiency.zeta)?;
    let truth = model_state(&params, MODEL_N_CUT)?;
    let data = sample_dataset(&truth, t.n_samples, &PhaseSchedule::LinearSweep, t.seed, "model state")?;
    art.dataset(&data, "roundtrip")?;
    let opts = mle_options(config);
    let fit = reconstruct(&data, &opts)?;
    art.density(&fit.rho, "roundtrip_rho.json")?;
    let grid = reconstructed_grid(&fit.rho, &grid_spec(config), "roundtrip")?;
    art.text("roundtrip_wigner.txt", |out| grid.write_text(out))?;
    let mut negativity = min_negativity_of_state(&fit.rho, t.search_radius)?;
    let bootstrap_std = if t.n_boot > 0 {
        let pipeline = BootstrapPipeline { mle: opts, search_radius: t.search_radius, warm_start: true, replica_tol: t.replica_tol };
        let boot = bootstrap_error(&data, t.n_boot, &pipeline, t.bootstrap_seed)?;
        art.text("roundtrip_bootstrap.txt", |out| {
            writeln!(out, "# replica w_min")?;
            for (i, w) in boot.replicas.iter().enumerate() {
                writeln!(out, "{i} {w}")?;
            }
            Ok(())
        })?;
        negativity.std_error = boot.std_error;
        Some(boot.std_error)
    } else {
        None
    };
    let (fbp_w00, fbp_se) = fbp_wigner(&data, 0.0, 0.0, &FbpOptions::default())?;
    let fidelity = fit.rho.with_n_cut(truth.n_cut())?.fidelity(&truth)?;
    let results = TomographyResults {
        model_w00: params.w00(),
        reconstructed_w00: wigner_value(&fit.rho, 0.0, 0.0),
        negativity,
        bootstrap_std,
        bootstrap_replicas: t.n_boot,
        fidelity,
        evaluations: fit.evaluations,
        stop: fit.stop,
        fbp_w00,
        fbp_std_error: fbp_se,
    };
    art.json("roundtrip.json", &results)?;
    let c = &config.checks;
    let mut checks = vec![
        Check::within("roundtrip_w00", results.reconstructed_w00, results.model_w00, c.roundtrip_tol),
        Check::flag("roundtrip_fidelity", fidelity >= c.min_fidelity, fidelity, format!(">= {}", c.min_fidelity)),
        Check::within("fbp_agrees_with_mle", fbp_w00, results.reconstructed_w00, 3.0 * fbp_se),
    ];
    if let Some(s) = bootstrap_std {
        checks.push(Check::flag(
            "bootstrap_error_scale",
            s >= c.bootstrap_min && s <= c.bootstrap_max,
            s,
            format!("[{}, {}]", c.bootstrap_min, c.bootstrap_max),
        ));
    }
    Ok((vec![t.seed, t.bootstrap_seed], checks, Results::TomographyRoundtrip(results)))
}

/// Fails with [`Error::MissingArtifact`] naming the first absent file.
pub fn check_artifacts(dir: &Path, summary: &RunSummary) -> Result<()> {
    for rel in &summary.artifacts {
        let path = dir.join(rel);
        if !path.is_file() {
            return Err(Error::MissingArtifact(path));
        }
    }
    Ok(())
}
