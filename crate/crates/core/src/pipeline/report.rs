//! Human-readable summaries rendered from a run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::{check_artifacts, ArmResults, Results, RunSummary, SUMMARY_FILE};
use crate::error::{Error, Result};

/// Loads `summary.json` from a run directory and confirms that every artifact it lists exists.
pub fn load_summary(dir: &Path) -> Result<RunSummary> {
    let path = dir.join(SUMMARY_FILE);
    if !path.is_file() {
        return Err(Error::MissingArtifact(path));
    }
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(&path)?)?;
    check_artifacts(dir, &summary)?;
    Ok(summary)
}

/// Report text for a completed run directory.
pub fn report(dir: &Path) -> Result<String> {
    Ok(render(&load_summary(dir)?))
}

fn arm_rows(out: &mut String, arm: &ArmResults) {
    for run in &arm.runs {
        let err = if run.negativity.std_error > 0.0 { format!("{:.4}", run.negativity.std_error) } else { "-".into() };
        let _ = writeln!(
            out,
            "  {:<13} {:>5}  {:>9.4}  {:>7}  {:>9.4}  ({:+.3}, {:+.3})",
            arm.arm, run.seed, run.negativity.w_min, err, run.w00, run.negativity.location.0, run.negativity.location.1
        );
    }
}

/// Formats a summary; all numbers come from the summary itself.
pub fn render(s: &RunSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment: {}", s.experiment);
    let _ = writeln!(out, "version:    {}", s.version);
    if !s.seeds.is_empty() {
        let seeds: Vec<String> = s.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "seeds:      {}", seeds.join(", "));
    }
    let _ = writeln!(out);
    match &s.results {
        Results::Modes(m) => {
            let _ = writeln!(out, "gamma/2pi = {} MHz, kappa'/kappa = {}", m.gamma_hz / 1e6, m.impedance_ratio);
            let _ = writeln!(out, "residual carrier reflection |R(0)|^2 = {:.4}", m.residual_reflection);
            let _ = writeln!(out, "  kappa/2pi [MHz]  overlap with f0 (eta_kappa)  integral [s^1/2]");
            for r in &m.modes {
                let _ = writeln!(out, "  {:>15.3}  {:>27.5}  {:>16.3e}", r.kappa_hz / 1e6, r.overlap_lorentzian, r.integral);
            }
        }
        Results::SubtractionScan(r) => {
            let _ = writeln!(out, "gamma/2pi = {} MHz, true cutoff kappa/2pi = {} MHz", r.gamma_hz / 1e6, r.true_kappa_hz / 1e6);
            let _ = writeln!(out, "  curve          kappa/2pi [MHz]  eta_kappa     W(0,0)");
            for (name, p) in [("conventional", &r.conventional_min), ("mode-filtered", &r.filtered_min)] {
                let _ = writeln!(
                    out,
                    "  {:<13}  {:>15.3}  {:>9.5}  {:>9.4}",
                    name,
                    p.kappa / std::f64::consts::TAU / 1e6,
                    p.eta_kappa,
                    p.w00
                );
            }
            let _ = writeln!(out, "  (minimum of each curve; full curves in artifacts/scan_*.txt)");
            let _ = writeln!(out, "  note on the kappa = 0 point: {}", r.caveat);
        }
        Results::TeleportCompare(t) => {
            let _ = writeln!(out, "r_epr = {} ({}), added noise variance {:.4}", t.r_epr, t.r_epr_note, t.noise_variance);
            let _ = writeln!(out, "electrical high-pass cutoff {} kHz", t.electrical_cutoff_hz / 1e3);
            let _ = writeln!(out, "  arm            seed    W_min      error     W(0,0)   location");
            arm_rows(&mut out, &t.filtered);
            arm_rows(&mut out, &t.conventional);
            let _ = writeln!(out, "  arm            r     eta_kappa  input W(0,0)  model output  mean W_min +- seed std");
            for a in [&t.filtered, &t.conventional] {
                let _ = writeln!(
                    out,
                    "  {:<13} {:.2}  {:>9.5}  {:>12.4}  {:>12.4}  {:.4} +- {:.4}",
                    a.arm, a.r, a.eta_kappa, a.input_w00, a.model_w00, a.mean_w_min, a.seed_std
                );
            }
            let _ = writeln!(
                out,
                "filtered arm more negative in {} of {} runs; mean gap {:+.4}",
                t.filtered_wins,
                t.filtered.runs.len(),
                t.mean_gap
            );
            let _ = writeln!(out, "error bars are bootstrap standard errors (shown when enabled) and the scatter over seeds");
        }
        Results::TomographyRoundtrip(t) => {
            let _ = writeln!(out, "model W(0,0)          {:.4}", t.model_w00);
            let _ = writeln!(out, "reconstructed W(0,0)  {:.4}", t.reconstructed_w00);
            let err = t.bootstrap_std.map_or("-".to_string(), |s| format!("{s:.4}"));
            let _ = writeln!(
                out,
                "minimum within r = {}: {:.4} +- {} (bootstrap, {} replicas) at ({:+.3}, {:+.3})",
                t.negativity.search_radius, t.negativity.w_min, err, t.bootstrap_replicas, t.negativity.location.0, t.negativity.location.1
            );
            let _ = writeln!(out, "back-projection W(0,0) {:.4} +- {:.4}", t.fbp_w00, t.fbp_std_error);
            let _ = writeln!(out, "fidelity to model     {:.5}", t.fidelity);
            let _ = writeln!(out, "likelihood evaluations {} ({:?})", t.evaluations, t.stop);
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "checks:");
    for c in &s.checks {
        let _ = writeln!(out, "  {}  {:<30} value {:<12.6} target {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
        if let Some(note) = &c.note {
            let _ = writeln!(out, "        note: {note}");
        }
    }
    let _ = writeln!(out, "overall: {}", if s.passed() { "PASS" } else { "FAIL" });
    out
}
