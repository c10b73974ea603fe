use std::f64::consts::{FRAC_1_PI, PI};

use modefilter::state_model::*;
use modefilter::Error;
use num_complex::Complex;
use proptest::prelude::*;

fn pipeline_w00(r: f64, eta: f64, zeta: f64) -> f64 {
    let params = ModelParams::with_eta(r, eta, zeta).unwrap();
    let rho = model_state(&params, DEFAULT_N_CUT).unwrap();
    wigner_value(&rho, 0.0, 0.0)
}

#[test]
fn fock_pipeline_matches_closed_form_on_parameter_grid() {
    for &r in &[0.0, 0.2, 0.36, 0.38, 0.5] {
        for &eta in &[0.0, 0.25, 0.5, 0.83, 1.0] {
            for &zeta in &[0.0, 0.02, 0.5, 1.0] {
                let fock = pipeline_w00(r, eta, zeta);
                let closed = w00_closed_form(r, eta, zeta);
                assert!((fock - closed).abs() < 1e-6, "r={r} eta={eta} zeta={zeta}: {fock} vs {closed}");
            }
        }
    }
}

#[test]
fn ideal_limit_is_minus_one_over_pi() {
    for &r in &[0.0, 0.2, 0.36, 0.5, 1.3] {
        assert!((w00_closed_form(r, 1.0, 0.0) + FRAC_1_PI).abs() < 1e-12);
        assert!(w00_closed_form(r, 0.5, 0.0).abs() < 1e-15);
    }
}

#[test]
fn squeezed_vacuum_photon_number_and_parity() {
    let rho = squeezed_vacuum(0.36, 30).unwrap();
    assert!((rho.mean_photon_number() - 0.36f64.sinh().powi(2)).abs() < 1e-6);
    for n in (1..=30).step_by(2) {
        assert_eq!(rho.population(n), 0.0);
    }
    assert_eq!(squeezed_vacuum(0.0, 10).unwrap().population(0), 1.0);
}

#[test]
fn truncation_failure_suggests_larger_cutoff() {
    match squeezed_vacuum(1.5, 10) {
        Err(Error::Truncation { suggested, .. }) => {
            assert!(suggested > 10);
            assert!(squeezed_vacuum(1.5, suggested).is_ok());
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
}

#[test]
fn model_state_grows_truncation_when_needed() {
    let params = ModelParams::with_eta(1.5, 0.8, 0.0).unwrap();
    let rho = model_state(&params, 10).unwrap();
    assert!(rho.n_cut() > 10);
    let closed = w00_closed_form(1.5f64, 0.8, 0.0);
    assert!((wigner_value(&rho, 0.0, 0.0) - closed).abs() < 1e-6);
}

#[test]
fn subtraction_matches_squeezed_single_photon() {
    let r = 0.36;
    let via_subtraction = photon_subtracted_squeezed_vacuum(r, 30).unwrap();
    let direct = squeezed_single_photon(r, 30).unwrap();
    assert!(via_subtraction.trace_distance(&direct).unwrap() < 1e-9);
    for n in (0..=30).step_by(2) {
        assert_eq!(via_subtraction.population(n), 0.0);
    }
    assert!((wigner_value(&via_subtraction, 0.0, 0.0) + FRAC_1_PI).abs() < 1e-9);
}

#[test]
fn small_squeezing_subtraction_tends_to_single_photon() {
    let rho = photon_subtracted_squeezed_vacuum(1e-4f64, 20).unwrap();
    assert!((rho.population(1) - 1.0).abs() < 1e-7);
    let one = FockDensityMatrix::<f64>::number_state(1, 20).unwrap();
    assert!(subtract_photon(&one).unwrap().population(0) == 1.0);
    assert!(matches!(subtract_photon(&FockDensityMatrix::<f64>::vacuum(5)), Err(Error::ZeroNorm)));
}

#[test]
fn loss_on_single_photon_is_binomial() {
    let one = FockDensityMatrix::number_state(1, 5).unwrap();
    let out = loss_channel(&one, 0.83f64).unwrap();
    assert!((out.population(1) - 0.83).abs() < 1e-14);
    assert!((out.population(0) - 0.17).abs() < 1e-14);
    let gone = loss_channel(&squeezed_vacuum(0.5f64, 30).unwrap(), 0.0).unwrap();
    assert!((gone.population(0) - 1.0).abs() < 1e-12);
    let sq = squeezed_vacuum(0.5, 30).unwrap();
    assert_eq!(loss_channel(&sq, 1.0).unwrap(), sq);
}

#[test]
fn dark_count_corners() {
    let sub = photon_subtracted_squeezed_vacuum(0.36, 30).unwrap();
    let sq = squeezed_vacuum(0.36, 30).unwrap();
    assert_eq!(dark_count_mix(&sub, &sq, 0.0).unwrap(), sub);
    let all_dark = dark_count_mix(&sub, &sq, 1.0).unwrap();
    assert!((wigner_value(&all_dark, 0.0, 0.0) - FRAC_1_PI).abs() < 1e-9);
    // Gaussian peak 1 / (2 pi sigma_x sigma_p) with sigma_x sigma_p = 1/2
    assert!((wigner_value(&all_dark, 0.0, 0.0) - 1.0 / (2.0 * PI * 0.5)).abs() < 1e-9);
}

#[test]
fn reference_parameters_give_measured_negativity() {
    let w = pipeline_w00(0.36, 0.83, 0.02);
    assert!((w - w00_closed_form(0.36, 0.83, 0.02)).abs() < 1e-6);
    assert!((w + 0.179).abs() < 0.003, "{w}");
}

#[test]
fn efficiency_budget_product() {
    let eta0: f64 = budget_eta0(&EfficiencyBudget::MEASURED).unwrap();
    assert_eq!(format!("{eta0:.2}"), "0.85");
    assert_eq!(overall_efficiency(0.83, 1.0).unwrap(), 0.83);
    assert!((overall_efficiency(0.83f64, 0.95).unwrap() - 0.749075).abs() < 1e-12);
    assert!(overall_efficiency(1.2, 0.5).is_err());
    let p = ModelParams::from_components(0.36f64, 0.83, 0.97, 0.02).unwrap();
    assert!((p.eta - 0.83 * 0.97 * 0.97).abs() < 1e-12);
}

#[test]
fn dark_count_fraction_from_rates() {
    let cfg = ExperimentConfig::new(0.03f64, 7200.0, 150.0).unwrap();
    assert!((cfg.zeta().unwrap() - 0.0208).abs() < 1e-3);
    assert!(ExperimentConfig::new(0.03, 100.0, 150.0).is_err());
}

/// Hermite functions from the physicists' polynomials.
fn hermite_function(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    let h = match n {
        0 => h0,
        _ => {
            for k in 1..n {
                let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    };
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    h * (-x * x / 2.0).exp() / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt()
}

/// `W(x, p) = (1/pi) int psi(x + y) psi*(x - y) e^{-2ipy} dy` for a pure state.
fn wigner_from_wavefunction(amps: &[Complex<f64>], x: f64, p: f64) -> f64 {
    let psi = |q: f64| amps.iter().enumerate().map(|(n, c)| c * hermite_function(n, q)).sum::<Complex<f64>>();
    let h = 2e-3;
    let mut acc = Complex::new(0.0, 0.0);
    let mut y = -12.0;
    while y <= 12.0 {
        acc += psi(x + y) * psi(x - y).conj() * Complex::from_polar(1.0, -2.0 * p * y);
        y += h;
    }
    acc.re * h / PI
}

#[test]
fn laguerre_wigner_matches_wavefunction_integral() {
    let amps = vec![
        Complex::new(0.5, 0.0),
        Complex::new(0.1, -0.4),
        Complex::new(-0.3, 0.2),
        Complex::new(0.0, 0.35),
        Complex::new(0.25, 0.1),
        Complex::new(-0.2, -0.15),
    ];
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amps: Vec<_> = amps.iter().map(|a| a / norm).collect();
    let mut padded = amps.clone();
    padded.resize(9, Complex::new(0.0, 0.0));
    let rho = FockDensityMatrix::from_pure(&padded).unwrap();
    for &(x, p) in &[(0.0, 0.0), (0.3, -0.7), (-1.2, 0.4), (1.9, 1.1), (-0.5, -2.2)] {
        let fock = wigner_value(&rho, x, p);
        let direct = wigner_from_wavefunction(&amps, x, p);
        assert!((fock - direct).abs() < 1e-8, "({x}, {p}): {fock} vs {direct}");
    }
}

#[test]
fn rotation_covariance() {
    let amps: Vec<Complex<f64>> =
        (0..8).map(|k| Complex::from_polar(1.0 / (1.0 + k as f64), 0.7 * k as f64)).collect();
    let rho = FockDensityMatrix::from_pure(&amps).unwrap();
    let theta = 0.83;
    let rotated = rho.rotated(theta);
    let (c, s) = (theta.cos(), theta.sin());
    for &(x, p) in &[(0.2, 0.1), (-1.0, 0.7), (0.9, -1.4)] {
        let lhs = wigner_value(&rotated, x, p);
        let rhs = wigner_value(&rho, c * x - s * p, s * x + c * p);
        assert!((lhs - rhs).abs() < 1e-8);
    }
}

#[test]
fn gaussian_grids_match_analytic_form() {
    let (r, eta) = (0.4f64, 0.7f64);
    let rho = loss_channel(&squeezed_vacuum(r, 40).unwrap(), eta).unwrap();
    let vx = eta * (-2.0 * r).exp() / 2.0 + (1.0 - eta) / 2.0;
    let vp = eta * (2.0 * r).exp() / 2.0 + (1.0 - eta) / 2.0;
    let grid = wigner_grid(&rho, &GridSpec::square(5.0, 51)).unwrap();
    for (i, &x) in grid.x_axis.iter().enumerate() {
        for (j, &p) in grid.p_axis.iter().enumerate() {
            let analytic = (-x * x / (2.0 * vx) - p * p / (2.0 * vp)).exp() / (2.0 * PI * (vx * vp).sqrt());
            assert!((grid.values[[i, j]] - analytic).abs() < 1e-6);
        }
    }
}

#[test]
fn default_grid_is_normalized() {
    let rho = model_state(&ModelParams::with_eta(0.36, 0.83, 0.02).unwrap(), 30).unwrap();
    let grid = wigner_grid(&rho, &GridSpec::default()).unwrap();
    assert!((grid.integral() - 1.0).abs() < 1e-4);
    let vac = FockDensityMatrix::<f64>::vacuum(4);
    assert!((wigner_value(&vac, 0.0, 0.0) - FRAC_1_PI).abs() < 1e-15);
    let coarse = GridSpec { nx: 4, np: 4, ..GridSpec::square(6.0, 4) };
    assert!(matches!(wigner_grid(&rho, &coarse), Err(Error::CoarseGrid(_))));
    assert!(wigner_grid(&rho, &GridSpec::square(2.0, 41)).is_err());
}

#[test]
fn density_json_round_trip() {
    let rho = model_state(&ModelParams::with_eta(0.36, 0.83, 0.02).unwrap(), 12).unwrap();
    let mut buf = Vec::new();
    rho.write_json(&mut buf).unwrap();
    let back = FockDensityMatrix::<f64>::read_json(buf.as_slice()).unwrap();
    assert_eq!(back, rho);
}

#[test]
fn single_precision_pipeline() {
    let params = ModelParams::<f32>::with_eta(0.36, 0.83, 0.02).unwrap();
    let rho = model_state(&params, 30).unwrap();
    let w = wigner_value(&rho, 0.0, 0.0);
    assert!((w - w00_closed_form(0.36f32, 0.83, 0.02)).abs() < 1e-5);
}

fn assert_physical(rho: &FockDensityMatrix<f64>) {
    assert!((rho.trace() - 1.0).abs() < 1e-10);
    assert!(rho.min_eigenvalue() > -1e-10);
    rho.validate().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channels_preserve_trace_and_positivity(r in 0.0f64..0.5, eta in 0.0f64..=1.0, zeta in 0.0f64..=1.0) {
        let sq = squeezed_vacuum(r, 30).unwrap();
        let sub = photon_subtracted_squeezed_vacuum(r, 30).unwrap();
        assert_physical(&sq);
        assert_physical(&sub);
        let lsq = loss_channel(&sq, eta).unwrap();
        let lsub = loss_channel(&sub, eta).unwrap();
        assert_physical(&lsq);
        assert_physical(&lsub);
        assert_physical(&dark_count_mix(&lsub, &lsq, zeta).unwrap());
        prop_assert!(sq.population(30) < 1e-8);
    }

    #[test]
    fn subtraction_flips_parity(r in 0.01f64..0.5) {
        let sq = squeezed_vacuum(r, 30).unwrap();
        prop_assert!((sq.parity() - 1.0).abs() < 1e-12);
        let sub = subtract_photon(&sq).unwrap();
        prop_assert!((sub.parity() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn negativity_fades_with_loss(r in 0.0f64..1.0, eta_a in 0.5001f64..1.0, eta_b in 0.5001f64..1.0) {
        prop_assume!((eta_a - eta_b).abs() > 1e-6);
        let (lo, hi) = if eta_a < eta_b { (eta_a, eta_b) } else { (eta_b, eta_a) };
        prop_assert!(w00_closed_form(r, lo, 0.0) > w00_closed_form(r, hi, 0.0));
    }
}
