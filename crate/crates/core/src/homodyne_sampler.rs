//! Synthetic phase-scanned homodyne data, the unity-gain teleportation
//! channel, and the mode-mismatch penalty of the analysis mode.
//!
//! The quadrature measured at local-oscillator phase `theta` is
//! `x_theta = x cos(theta) + p sin(theta)`; phase 0 is the squeezed quadrature
//! of `S(r)|0>`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::state_model::{wigner_value, FockDensityMatrix, ModelParams, MAX_N_CUT, TRUNCATION_TAIL};
use crate::temporal_modes::{overlap, ModeFunction};

pub const DATASET_FORMAT: &str = "quadrature-dataset/v1";
/// Samples drawn from one random stream.
const CHUNK: usize = 4096;

/// Harmonic-oscillator eigenfunctions `psi_0..psi_{d-1}` at `x` (vacuum variance 1/2).
pub fn hermite_functions<T: Real>(x: T, d: usize) -> Vec<T> {
    let mut psi = vec![T::zero(); d];
    if d == 0 {
        return psi;
    }
    psi[0] = T::PI().powf(T::lit(-0.25)) * (-x * x * T::lit(0.5)).exp();
    if d > 1 {
        psi[1] = T::SQRT_2() * x * psi[0];
    }
    for n in 1..d.saturating_sub(1) {
        let nf = T::from_usize_lossy(n);
        psi[n + 1] = (T::lit(2.0) / (nf + T::one())).sqrt() * x * psi[n] - (nf / (nf + T::one())).sqrt() * psi[n - 1];
    }
    psi
}

/// `p(x | theta) = sum_mn psi_m(x) psi_n(x) rho_mn e^{i (n - m) theta}`.
#[derive(Debug, Clone)]
pub struct QuadraturePdf<T> {
    kernel: Array2<T>,
}

impl<T: Real> QuadraturePdf<T> {
    pub fn value(&self, x: T) -> T {
        let psi = hermite_functions(x, self.kernel.nrows());
        let mut acc = T::zero();
        for (m, &pm) in psi.iter().enumerate() {
            let row: T = psi.iter().enumerate().map(|(n, &pn)| self.kernel[[m, n]] * pn).sum();
            acc += pm * row;
        }
        acc.max(T::zero())
    }

    /// `(integral, mean, second moment)` by the trapezoid rule on `[-l, l]`.
    pub fn moments(&self, half_width: T, points: usize) -> (T, T, T) {
        let h = T::lit(2.0) * half_width / T::from_usize_lossy(points - 1);
        let (mut z, mut m1, mut m2) = (T::zero(), T::zero(), T::zero());
        for i in 0..points {
            let x = -half_width + h * T::from_usize_lossy(i);
            let w = if i == 0 || i + 1 == points { T::lit(0.5) } else { T::one() };
            let p = self.value(x) * w;
            z += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        (z * h, m1 * h, m2 * h)
    }
}

/// Marginal distribution of the quadrature at phase `theta`.
pub fn quadrature_pdf<T: Real>(rho: &FockDensityMatrix<T>, theta: T) -> QuadraturePdf<T> {
    let d = rho.dim();
    let kernel = Array2::from_shape_fn((d, d), |(m, n)| {
        let k = T::from_usize_lossy(n) - T::from_usize_lossy(m);
        (rho.get(m, n) * Complex::from_polar(T::one(), k * theta)).re
    });
    QuadraturePdf { kernel }
}

/// Local-oscillator phases assigned to consecutive records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseSchedule {
    /// `theta_i = 2 pi i / n`.
    LinearSweep,
    /// Cycles through the listed phases.
    Fixed { phases: Vec<f64> },
}

impl PhaseSchedule {
    pub fn phase<T: Real>(&self, i: usize, n: usize) -> T {
        match self {
            Self::LinearSweep => T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n),
            Self::Fixed { phases } => T::lit(phases[i % phases.len()]),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Fixed { phases } = self {
            if phases.is_empty() || phases.iter().any(|p| !p.is_finite()) {
                return Err(invalid("schedule", "fixed schedule needs at least one finite phase"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format: String,
    pub seed: u64,
    pub n_samples: usize,
    pub schedule: PhaseSchedule,
    /// Free-form description of the sampled state.
    pub state: String,
    /// Free-form description of any channel applied before sampling.
    pub channel: Option<String>,
}

/// Phase-tagged homodyne records.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDataset<T> {
    pub thetas: Vec<T>,
    pub xs: Vec<T>,
    pub meta: DatasetMeta,
}

impl<T: Real> QuadratureDataset<T> {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Writes `<stem>.txt` (two columns, `theta_radians x`) and `<stem>.json` (metadata).
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let text_path = dir.join(format!("{stem}.txt"));
        let meta_path = dir.join(format!("{stem}.json"));
        let mut out = std::io::BufWriter::new(fs::File::create(&text_path)?);
        writeln!(out, "# {DATASET_FORMAT}")?;
        writeln!(out, "# theta_radians x")?;
        for (t, x) in self.thetas.iter().zip(&self.xs) {
            writeln!(out, "{} {}", t.as_f64(), x.as_f64())?;
        }
        out.flush()?;
        fs::write(&meta_path, serde_json::to_string_pretty(&self.meta)?)?;
        Ok((text_path, meta_path))
    }

    /// Reads a dataset written by [`QuadratureDataset::write`].
    pub fn read(dir: &Path, stem: &str) -> Result<Self> {
        let text_path = dir.join(format!("{stem}.txt"));
        let meta_path = dir.join(format!("{stem}.json"));
        if !text_path.exists() {
            return Err(Error::MissingArtifact(text_path));
        }
        if !meta_path.exists() {
            return Err(Error::MissingArtifact(meta_path));
        }
        let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(&meta_path)?)?;
        if meta.format != DATASET_FORMAT {
            return Err(Error::Parse(format!("unsupported dataset format `{}`", meta.format)));
        }
        let text = fs::read_to_string(&text_path)?;
        let mut thetas = Vec::with_capacity(meta.n_samples);
        let mut xs = Vec::with_capacity(meta.n_samples);
        for (lineno, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace().map(str::parse::<f64>);
            match (cols.next(), cols.next(), cols.next()) {
                (Some(Ok(t)), Some(Ok(x)), None) => {
                    thetas.push(T::lit(t));
                    xs.push(T::lit(x));
                }
                _ => return Err(Error::Parse(format!("{}: line {}", text_path.display(), lineno + 1))),
            }
        }
        if xs.len() != meta.n_samples {
            return Err(Error::Parse(format!("expected {} records, found {}", meta.n_samples, xs.len())));
        }
        Ok(Self { thetas, xs, meta })
    }
}

/// Phase-independent majorant of `p(x | theta)` and a Gaussian envelope
/// scaled to dominate it.
struct Envelope<T> {
    sigma: T,
    scale: T,
}

impl<T: Real> Envelope<T> {
    fn for_state(rho: &FockDensityMatrix<T>) -> Self {
        let d = effective_dim(rho);
        let abs_rho = Array2::from_shape_fn((d, d), |(m, n)| rho.get(m, n).norm());
        // <x^2> <= n + 1/2 in every direction, and the envelope must be wider than vacuum
        let sigma = (T::lit(2.0) * rho.mean_photon_number() + T::one()).sqrt().max(T::one());
        let reach = (T::lit(2.0) * T::from_usize_lossy(d) + T::one()).sqrt() + T::lit(8.0);
        let points = 4001;
        let h = T::lit(2.0) * reach / T::from_usize_lossy(points - 1);
        let mut ratio = T::zero();
        for i in 0..points {
            let x = -reach + h * T::from_usize_lossy(i);
            let psi = hermite_functions(x, d);
            let mut bound = T::zero();
            for m in 0..d {
                for n in 0..d {
                    bound += (psi[m] * psi[n]).abs() * abs_rho[[m, n]];
                }
            }
            ratio = ratio.max(bound / gaussian_density(x, sigma));
        }
        Self { sigma, scale: ratio * T::lit(1.1) }
    }
}

fn gaussian_density<T: Real>(x: T, sigma: T) -> T {
    (-x * x / (T::lit(2.0) * sigma * sigma)).exp() / (sigma * T::TAU().sqrt())
}

/// Number of levels that carry any population.
fn effective_dim<T: Real>(rho: &FockDensityMatrix<T>) -> usize {
    (0..rho.dim()).rev().find(|&n| rho.population(n) > T::lit(1e-16)).map_or(1, |n| n + 1)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws `n` independent homodyne samples, the `i`-th at phase
/// `schedule.phase(i, n)`, by rejection from a Gaussian envelope.
///
/// Records are generated in fixed chunks, each with its own random stream,
/// so the output depends only on `seed` and not on the thread count.
pub fn sample_dataset<T: Real>(
    rho: &FockDensityMatrix<T>,
    n: usize,
    schedule: &PhaseSchedule,
    seed: u64,
    state: impl Into<String>,
) -> Result<QuadratureDataset<T>> {
    if n == 0 {
        return Err(invalid("n", "at least one sample is required"));
    }
    schedule.validate()?;
    let d = effective_dim(rho);
    let elements = rho.elements();
    let rho_eff = Array2::from_shape_fn((d, d), |(m, k)| elements[[m, k]]);
    let envelope = Envelope::for_state(rho);
    let n_chunks = n.div_ceil(CHUNK);
    let chunks: Vec<Vec<(T, T)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let range = c * CHUNK..((c + 1) * CHUNK).min(n);
            range
                .map(|i| {
                    let theta: T = schedule.phase(i, n);
                    let phase: Vec<Complex<T>> =
                        (0..d).map(|k| Complex::from_polar(T::one(), T::from_usize_lossy(k) * theta)).collect();
                    loop {
                        let z: f64 = rng.sample(StandardNormal);
                        let x = envelope.sigma * T::lit(z);
                        let psi = hermite_functions(x, d);
                        let v: Vec<Complex<T>> = phase.iter().zip(&psi).map(|(e, &p)| e.scale(p)).collect();
                        let mut p = T::zero();
                        for m in 0..d {
                            let mut row = Complex::zero();
                            for k in 0..d {
                                row += rho_eff[[m, k]] * v[k];
                            }
                            p += (v[m].conj() * row).re;
                        }
                        let u: f64 = rng.random();
                        if T::lit(u) * envelope.scale * gaussian_density(x, envelope.sigma) < p {
                            return (theta, x);
                        }
                    }
                })
                .collect()
        })
        .collect();
    let (thetas, xs) = chunks.into_iter().flatten().unzip();
    Ok(QuadratureDataset {
        thetas,
        xs,
        meta: DatasetMeta {
            format: DATASET_FORMAT.to_string(),
            seed,
            n_samples: n,
            schedule: schedule.clone(),
            state: state.into(),
            channel: None,
        },
    })
}

/// Unity-gain continuous-variable teleportation with a two-mode squeezed
/// resource of squeezing `r_epr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeleportChannel<T> {
    pub r_epr: T,
    pub gain: T,
}

impl<T: Real> TeleportChannel<T> {
    pub fn unity(r_epr: T) -> Self {
        Self { r_epr, gain: T::one() }
    }

    /// Resource squeezing that adds `variance` to each quadrature.
    pub fn from_noise_variance(variance: T) -> Result<Self> {
        if !(variance > T::zero()) || variance > T::one() {
            return Err(invalid("variance", "teleportation noise lies in (0, 1] for r_epr >= 0"));
        }
        Ok(Self::unity(-variance.ln() * T::lit(0.5)))
    }

    /// Added variance per quadrature, `e^{-2 r_epr}`.
    pub fn noise_variance(&self) -> T {
        (-T::lit(2.0) * self.r_epr).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_epr >= T::zero()) {
            return Err(invalid("r_epr", "must be non-negative"));
        }
        if (self.gain - T::one()).abs() > T::lit(1e-12) {
            return Err(Error::NonUnityGain(self.gain.as_f64()));
        }
        Ok(())
    }
}

/// Adds independent Gaussian noise of `variance` to both quadratures,
/// realized as pure loss `1/G` followed by a quantum-limited amplifier of
/// gain `G = 1 + variance`. The output truncation starts at `rho`'s and is
/// doubled (up to [`MAX_N_CUT`]) while the amplified tail does not fit.
pub fn gaussian_noise_channel<T: Real>(rho: &FockDensityMatrix<T>, variance: T) -> Result<FockDensityMatrix<T>> {
    let mut n_out = rho.n_cut().max(1);
    loop {
        match gaussian_noise_channel_to(rho, variance, n_out) {
            Err(Error::Truncation { .. }) if n_out < MAX_N_CUT => n_out = (2 * n_out).min(MAX_N_CUT),
            other => return other,
        }
    }
}

/// [`gaussian_noise_channel`] with an explicit output truncation. Weight
/// pushed above `n_out` is an error when it exceeds the truncation tolerance.
pub fn gaussian_noise_channel_to<T: Real>(
    rho: &FockDensityMatrix<T>,
    variance: T,
    n_out: usize,
) -> Result<FockDensityMatrix<T>> {
    if !(variance >= T::zero()) || !variance.is_finite() {
        return Err(invalid("variance", "must be finite and non-negative"));
    }
    if variance == T::zero() {
        return rho.with_n_cut(n_out);
    }
    let gain = T::one() + variance;
    let lossy = crate::state_model::loss_channel(rho, T::one() / gain)?;
    let d_in = lossy.dim();
    let d_out = n_out + 1;
    let x = T::one() - T::one() / gain;
    let inv_sqrt_gain = T::one() / gain.sqrt();
    // b[k][m] = <m+k| B_k |m>
    let kmax = d_out;
    let mut b = Array2::<T>::zeros((kmax, d_in));
    for m in 0..d_in {
        let base = inv_sqrt_gain.powi(m as i32 + 1);
        let mut coeff = T::one(); // sqrt(C(m+k, k) x^k)
        for k in 0..kmax {
            if k > 0 {
                coeff *= (T::from_usize_lossy(m + k) / T::from_usize_lossy(k) * x).sqrt();
            }
            b[[k, m]] = base * coeff;
        }
    }
    let mut out = Array2::<Complex<T>>::zeros((d_out, d_out));
    for k in 0..kmax {
        for m in 0..d_in {
            if m + k >= d_out {
                break;
            }
            for n in 0..d_in {
                if n + k >= d_out {
                    break;
                }
                out[[m + k, n + k]] += lossy.get(m, n).scale(b[[k, m]] * b[[k, n]]);
            }
        }
    }
    let kept: T = (0..d_out).map(|i| out[[i, i]].re).sum();
    let leaked = T::one() - kept;
    if leaked > T::lit(TRUNCATION_TAIL) {
        let suggested = n_out * 2;
        return Err(Error::Truncation { n_cut: n_out, tail: leaked.as_f64(), suggested });
    }
    out.mapv_inplace(|z| z.unscale(kept));
    Ok(FockDensityMatrix::from_channel(out))
}

/// Applies the teleportation channel in the Fock basis.
pub fn teleport_channel<T: Real>(rho: &FockDensityMatrix<T>, ch: &TeleportChannel<T>) -> Result<FockDensityMatrix<T>> {
    ch.validate()?;
    gaussian_noise_channel(rho, ch.noise_variance())
}

/// Wigner function after adding Gaussian noise of `variance`, computed by
/// direct trapezoidal convolution of the input Wigner function (step
/// `sigma / 8` over `+-10 sigma`). Independent of the Fock-basis channel.
pub fn gaussian_smoothed_wigner<T: Real>(rho: &FockDensityMatrix<T>, variance: T, x: T, p: T) -> T {
    if variance == T::zero() {
        return wigner_value(rho, x, p);
    }
    let sigma = variance.sqrt();
    let h = sigma / T::lit(8.0);
    let half = 80i32;
    let kernel: Vec<T> = (-half..=half)
        .map(|i| {
            let u = h * T::lit(i as f64);
            let w = if i.abs() == half { T::lit(0.5) } else { T::one() };
            w * gaussian_density(u, sigma) * h
        })
        .collect();
    let mut acc = T::zero();
    for (i, &ki) in kernel.iter().enumerate() {
        let u = h * T::lit(i as f64 - half as f64);
        for (j, &kj) in kernel.iter().enumerate() {
            let v = h * T::lit(j as f64 - half as f64);
            acc += ki * kj * wigner_value(rho, x - u, p - v);
        }
    }
    acc
}

/// Folds the overlap between the state's true temporal mode and the applied
/// analysis mode into the efficiency: `eta_kappa <- eta_kappa |<true, applied>|`
/// and `eta = eta0 eta_kappa^2`. Composition is multiplicative so repeated
/// mismatches accumulate and `eta` never increases.
pub fn apply_mode_mismatch<T: Real>(
    params: &ModelParams<T>,
    true_mode: &ModeFunction<T>,
    applied_mode: &ModeFunction<T>,
) -> Result<ModelParams<T>> {
    let o = overlap(true_mode, applied_mode)?.abs().min(T::one());
    if o < T::lit(1e-12) {
        return Err(Error::DegenerateOverlap);
    }
    params.with_eta_kappa(params.eta_kappa * o)
}
