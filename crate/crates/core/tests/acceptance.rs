//! Acceptance run: every criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_PI, TAU};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use modefilter::pipeline::run::Results;
use modefilter::pipeline::{run, ExperimentKind, RunConfig};
use modefilter::state_model::*;
use modefilter::temporal_modes::*;
use modefilter::tomography::{kappa_scan, KappaScan, TrueMode};

type Outcome = (bool, String);

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let took = start.elapsed();
    match limit {
        Some(l) => (ok && took < l, format!("{detail}; {:.1} s (limit {} s)", took.as_secs_f64(), l.as_secs())),
        None => (ok, format!("{detail}; {:.1} s", took.as_secs_f64())),
    }
}

fn fock_w00(params: &ModelParams<f64>) -> f64 {
    wigner_value(&model_state(params, DEFAULT_N_CUT).unwrap(), 0.0, 0.0)
}

fn oracle_grid() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for r in [0.0, 0.2, 0.36, 0.38, 0.5] {
        for eta in [0.0, 0.25, 0.5, 0.83, 1.0] {
            for zeta in [0.0, 0.02, 0.5, 1.0] {
                let p = ModelParams::with_eta(r, eta, zeta).unwrap();
                worst = worst.max((fock_w00(&p) - w00_closed_form(r, eta, zeta)).abs());
                count += 1;
            }
        }
    }
    (count == 100 && worst < 1e-6, format!("{count} points, max |Fock - closed form| = {worst:.2e} (tol 1e-6)"))
}

fn ideal_limit() -> Outcome {
    let mut closed: f64 = 0.0;
    let mut fock: f64 = 0.0;
    for r in [0.0, 0.2, 0.36, 0.5] {
        closed = closed.max((w00_closed_form(r, 1.0, 0.0) + FRAC_1_PI).abs());
        fock = fock.max((fock_w00(&ModelParams::with_eta(r, 1.0, 0.0).unwrap()) + FRAC_1_PI).abs());
    }
    (closed < 1e-8 && fock < 1e-6, format!("max deviation from -1/pi: closed form {closed:.1e} (tol 1e-8), Fock {fock:.1e} (tol 1e-6)"))
}

fn reported_value(r: f64, target: f64, tol: f64) -> Outcome {
    let p = ModelParams::from_components(r, 0.83, 1.0, 0.02).unwrap();
    let closed = p.w00();
    let fock = fock_w00(&p);
    let ok = (closed - target).abs() <= tol && (fock - target).abs() <= tol;
    (ok, format!("r = {r}: W(0,0) = {closed:.4} (Fock {fock:.4}), reported {target} +- {tol}"))
}

fn efficiency_budget() -> Outcome {
    let eta0: f64 = budget_eta0(&EfficiencyBudget::MEASURED).unwrap();
    let shown = format!("{eta0:.2}");
    (shown == "0.85", format!("eta0 = {eta0:.4} -> {shown}"))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Matched-cavity filtered mode in its piecewise textbook form.
fn matched_reference(gamma: f64, kappa: f64, t: f64) -> f64 {
    if t >= 0.0 {
        gamma.sqrt() * (-gamma * t).exp()
    } else {
        gamma.sqrt() * ((gamma + kappa) / (gamma - kappa) * (gamma * t).exp() - 2.0 * kappa / (gamma - kappa) * (kappa * t).exp())
    }
}

fn mode_suite() -> Outcome {
    let base = TAU * 6.2e6;
    let pairs: Vec<(f64, f64)> = [2.0, 3.5, 5.0, 8.0, 12.4, 17.0, 25.0, 33.0, 41.0, 50.0]
        .iter()
        .enumerate()
        .map(|(i, &q)| (base * (0.6 + 0.1 * i as f64), base * (0.6 + 0.1 * i as f64) / q))
        .collect();
    let mut failures = Vec::new();
    let mut worst_l2: f64 = 0.0;
    for &(gamma, kappa) in &pairs {
        let at = filtered_mode_value(gamma, kappa, 0.0, 0.0);
        let below = filtered_mode_value(gamma, kappa, 0.0, -1e-9 / gamma);
        if (at - below).abs() > 1e-6 * at {
            failures.push(format!("continuity at gamma/kappa = {:.1}", gamma / kappa));
        }
        let f = |t: f64| filtered_mode_value(gamma, kappa, 0.0, t);
        let area = simpson(f, -60.0 / kappa, 0.0, 400_000) + simpson(f, 0.0, 60.0 / gamma, 20_000);
        let scale = simpson(|t| f(t).abs(), -60.0 / kappa, 0.0, 400_000);
        if area.abs() > 1e-6 * scale {
            failures.push(format!("zero integral at gamma/kappa = {:.1}", gamma / kappa));
        }
        for k in -400..=40 {
            let t = k as f64 * 0.05 / gamma;
            let reduced = filtered_mode_value(gamma, kappa, 0.0, t);
            if (reduced - matched_reference(gamma, kappa, t)).abs() > 1e-12 * gamma.sqrt() {
                failures.push(format!("kappa' = 0 reduction at gamma/kappa = {:.1}", gamma / kappa));
                break;
            }
        }
        for kp in [0.0, -0.37 * kappa] {
            let grid = TimeGrid::for_rates(gamma, &[kappa]).unwrap();
            let f0 = lorentzian_mode(gamma, &grid).unwrap();
            let filter = CavityFilter::from_kappa(kappa, kp).unwrap();
            let d = l2_distance(&convolve_with_filter(&f0, &filter).unwrap(), &filtered_mode(gamma, &filter, &grid).unwrap()).unwrap();
            worst_l2 = worst_l2.max(d);
        }
    }
    if worst_l2 >= 1e-4 {
        failures.push(format!("convolution L2 {worst_l2:.2e}"));
    }
    // kappa -> 0: distance to the Lorentzian vanishes like sqrt(kappa / gamma)
    let kappas: Vec<f64> = (0..=4).map(|k| base / 10.0 * 10f64.powf(-(k as f64) / 2.0)).collect();
    let grid = TimeGrid::for_rates(base, &[*kappas.last().unwrap()]).unwrap();
    let f0 = lorentzian_mode(base, &grid).unwrap();
    let dist: Vec<f64> =
        kappas.iter().map(|&k| l2_distance(&filtered_mode_from_rates(base, k, 0.0, &grid).unwrap(), &f0).unwrap()).collect();
    let at_zero = l2_distance(&filtered_mode_from_rates(base, 0.0, 0.0, &grid).unwrap(), &f0).unwrap();
    let n = dist.len();
    let slope = (dist[n - 1] / dist[n - 2]).log10() / (kappas[n - 1] / kappas[n - 2]).log10();
    let limit_ok = dist.windows(2).all(|w| w[1] < w[0]) && (slope - 0.5).abs() < 0.05 && at_zero < 1e-12;
    if !limit_ok {
        failures.push(format!("kappa -> 0 limit, distances {dist:?}, at zero {at_zero:.1e}"));
    }
    let detail = format!(
        "{} (gamma, kappa) pairs; max convolution L2 {worst_l2:.2e}; L2 to Lorentzian ~ kappa^{slope:.3}, {at_zero:.1e} at kappa = 0{}",
        pairs.len(),
        if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
    );
    (failures.is_empty(), detail)
}

fn impedance_mismatch() -> Outcome {
    let kappa = TAU * 0.5e6;
    let residual = CavityFilter::from_kappa(kappa, -0.37 * kappa).unwrap().response(0.0).norm_sqr();
    ((residual - 0.1369).abs() <= 0.002, format!("|response(0)|^2 = {residual:.5} (target 0.1369 +- 0.002)"))
}

fn scan_shape() -> Outcome {
    let gamma = TAU * 6.5e6;
    let true_kappa = TAU * 0.48e6;
    let mut kappas: Vec<f64> = (0..=40).map(|i| TAU * 0.05e6 * i as f64).collect();
    kappas.push(true_kappa);
    kappas.sort_by(f64::total_cmp);
    let scan = |mode: TrueMode, r: f64| {
        let spec = KappaScan { gamma, true_mode: mode, applied_impedance_ratio: -0.37, eta0: 0.83, r, zeta: 0.02, force_unit_overlap: false };
        kappa_scan(&spec, &kappas).unwrap()
    };
    let conv = scan(TrueMode { kappa: 0.0, kappa_prime: 0.0 }, 0.38);
    let filt = scan(TrueMode { kappa: true_kappa, kappa_prime: -0.37 * true_kappa }, 0.36);
    let monotone = conv.windows(2).all(|w| w[1].w00 > w[0].w00);
    let argmin = |c: &[modefilter::tomography::ScanPoint]| (0..c.len()).min_by(|&a, &b| c[a].w00.total_cmp(&c[b].w00)).unwrap();
    let (ic, jf) = (argmin(&conv), argmin(&filt));
    let kf = filt[jf].kappa / TAU;
    let interior = jf > 0 && jf + 1 < filt.len() && (0.48e6..=0.5e6).contains(&kf);
    let better = filt[jf].w00 <= conv[ic].w00;
    let max_step = conv.windows(2).chain(filt.windows(2)).map(|w| (w[1].w00 - w[0].w00).abs()).fold(0.0, f64::max);
    let ok = monotone && ic == 0 && interior && better && max_step < 0.01;
    (
        ok,
        format!(
            "conventional monotone {monotone}, min at kappa/2pi = {:.2} MHz ({:.4}); filtered min at {:.3} MHz ({:.4}); largest step {max_step:.4}",
            conv[ic].kappa / TAU / 1e6,
            conv[ic].w00,
            kf / 1e6,
            filt[jf].w00
        ),
    )
}

fn run_in(dir: &Path, kind: ExperimentKind, overrides: &[&str]) -> modefilter::pipeline::RunSummary {
    let mut cfg = RunConfig::new(kind);
    cfg.output_dir = dir.to_path_buf();
    run(&cfg.with_overrides(overrides).unwrap()).unwrap()
}

fn tomography_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let summary = run_in(tmp.path(), ExperimentKind::TomographyRoundtrip, &[]);
    let Results::TomographyRoundtrip(t) = summary.results else { unreachable!() };
    let boot = t.bootstrap_std.unwrap_or(f64::NAN);
    let ok = (t.reconstructed_w00 - t.model_w00).abs() <= 0.005 && (0.002..=0.008).contains(&boot);
    (
        ok,
        format!(
            "1e5 samples: W(0,0) {:.4} vs model {:.4} (tol 0.005); bootstrap std {boot:.4} over {} replicas (range [0.002, 0.008])",
            t.reconstructed_w00, t.model_w00, t.bootstrap_replicas
        ),
    )
}

fn teleport_ordering() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let summary = run_in(tmp.path(), ExperimentKind::TeleportCompare, &[]);
    let Results::TeleportCompare(t) = summary.results else { unreachable!() };
    let ok = t.filtered_wins >= 3 && t.mean_gap < 0.0;
    (
        ok,
        format!(
            "filtered more negative in {}/4 runs; means {:.4} +- {:.4} (filtered) vs {:.4} +- {:.4} (conventional), gap {:+.4}",
            t.filtered_wins, t.filtered.mean_w_min, t.filtered.seed_std, t.conventional.mean_w_min, t.conventional.seed_std, t.mean_gap
        ),
    )
}

fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir.join("artifacts")).unwrap() {
        let path = entry.unwrap().path();
        out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap());
    }
    for name in ["summary.json", "report.txt"] {
        out.insert(name.into(), fs::read(dir.join(name)).unwrap());
    }
    out
}

fn determinism() -> Outcome {
    let reduced = [
        "teleport.n_samples=10000",
        "teleport.seeds=[5, 6]",
        "tomography.n_samples=10000",
        "tomography.n_boot=4",
        "tomography.tol=1e-6",
        "tomography.grid_points=41",
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for kind in ExperimentKind::ALL {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_in(a.path(), kind, &reduced);
        run_in(b.path(), kind, &reduced);
        let (fa, fb) = (data_files(a.path()), data_files(b.path()));
        if fa.keys().ne(fb.keys()) {
            differing.push(format!("{kind}: file sets"));
        }
        for (name, bytes) in &fa {
            compared += 1;
            if fb.get(name) != Some(bytes) {
                differing.push(format!("{kind}/{name}"));
            }
        }
    }
    (differing.is_empty(), format!("{compared} files over 4 experiment kinds compared byte for byte; differing: {differing:?}"))
}

fn main() -> ExitCode {
    let minute = Some(Duration::from_secs(60));
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("closed-form oracle on the parameter grid", Box::new(move || timed(minute, oracle_grid))),
        ("ideal limit -1/pi", Box::new(|| timed(None, ideal_limit))),
        ("mode-filtered input W(0,0)", Box::new(|| timed(None, || reported_value(0.36, -0.179, 0.003)))),
        ("conventional input W(0,0)", Box::new(|| timed(None, || reported_value(0.38, -0.171, 0.01)))),
        ("efficiency budget", Box::new(|| timed(None, efficiency_budget))),
        ("mode-function suite", Box::new(move || timed(minute, mode_suite))),
        ("impedance mismatch residual", Box::new(|| timed(None, impedance_mismatch))),
        ("cutoff scan shape", Box::new(|| timed(None, scan_shape))),
        ("tomography round trip", Box::new(|| timed(Some(Duration::from_secs(600)), tomography_round_trip))),
        ("teleportation ordering", Box::new(|| timed(None, teleport_ordering))),
        ("determinism", Box::new(|| timed(None, determinism))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!("{} [{:>2}] {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
