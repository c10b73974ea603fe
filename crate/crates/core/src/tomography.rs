//! State reconstruction from phase-scanned homodyne data, Wigner negativity
//! with bootstrap error bars, and the scan of the applied mode's cutoff.
//!
//! The primary estimator is maximum likelihood in the truncated Fock basis
//! (the `R rho R` fixed-point iteration, accelerated by squared
//! extrapolation). Filtered back-projection is provided as an independent
//! cross-check that does not impose physicality.

use ndarray::Array2;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::homodyne_sampler::{hermite_functions, QuadratureDataset};
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;
use crate::state_model::{
    w00_closed_form, wigner_value, FockDensityMatrix, GridSource, GridSpec, ModelParams, Provenance, WignerGrid,
};
use crate::temporal_modes::{filtered_mode_from_rates, overlap, TimeGrid};

/// Phase bins (over `[0, pi)`) that must all contain data.
const COVERAGE_BINS: usize = 18;
/// Population of the top level above which the truncation is reported as too small.
const TOP_LEVEL_LIMIT: f64 = 1e-3;
/// Samples per block of the likelihood evaluation.
const BLOCK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub n_cut: usize,
    /// Stop when the trace norm of one plain `R rho R` step falls below this.
    pub tol: f64,
    /// Budget of likelihood evaluations.
    pub max_iter: usize,
    /// Squared extrapolation between plain steps.
    pub accelerate: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { n_cut: 10, tol: 1e-8, max_iter: 2000, accelerate: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct MleResult<T> {
    pub rho: FockDensityMatrix<T>,
    pub evaluations: usize,
    pub stop: StopReason,
    /// Trace norm of the last plain step.
    pub final_step: T,
    /// Mean log-likelihood per sample.
    pub log_likelihood: T,
}

/// Per-sample projector data in a layout suited to repeated likelihood
/// evaluation: for every level pair `m <= n`, the products
/// `psi_m psi_n cos((n - m) theta)` and `psi_m psi_n sin((n - m) theta)`.
pub struct LikelihoodData<T> {
    dim: usize,
    len: usize,
    pairs: Vec<(usize, usize)>,
    cos_part: Vec<Vec<T>>,
    sin_part: Vec<Vec<T>>,
}

impl<T: Real> LikelihoodData<T> {
    pub fn new(dataset: &QuadratureDataset<T>, n_cut: usize) -> Result<Self> {
        check_phase_coverage(dataset)?;
        let dim = n_cut + 1;
        let len = dataset.len();
        let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|m| (m..dim).map(move |n| (m, n))).collect();
        let mut cos_part = vec![vec![T::zero(); len]; pairs.len()];
        let mut sin_part = vec![vec![T::zero(); len]; pairs.len()];
        for (i, (&theta, &x)) in dataset.thetas.iter().zip(&dataset.xs).enumerate() {
            let psi = hermite_functions(x, dim);
            let trig: Vec<(T, T)> = (0..dim).map(|k| (T::from_usize_lossy(k) * theta).sin_cos()).collect();
            for (j, &(m, n)) in pairs.iter().enumerate() {
                let prod = psi[m] * psi[n];
                let (s, c) = trig[n - m];
                cos_part[j][i] = prod * c;
                sin_part[j][i] = prod * s;
            }
        }
        Ok(Self { dim, len, pairs, cos_part, sin_part })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_cut(&self) -> usize {
        self.dim - 1
    }

    /// Mean log-likelihood and, when it is finite, the operator
    /// `R = sum_i w_i Pi_i / p_i / sum_i w_i`. Samples are processed in
    /// blocks so the projector data is streamed from memory once.
    fn evaluate(&self, rho: &CMatrix<T>, weights: Option<&[T]>) -> Evaluation<T> {
        let coeffs: Vec<(T, T)> = self
            .pairs
            .iter()
            .map(|&(m, n)| {
                let z = rho[[m, n]];
                let f = if m == n { T::one() } else { T::lit(2.0) };
                (z.re * f, z.im * f)
            })
            .collect();
        let mut sums = vec![(T::zero(), T::zero()); self.pairs.len()];
        let mut log_sum = T::zero();
        let mut total = T::zero();
        let mut p = vec![T::zero(); BLOCK];
        let mut u = vec![T::zero(); BLOCK];
        for start in (0..self.len).step_by(BLOCK) {
            let end = (start + BLOCK).min(self.len);
            let p = &mut p[..end - start];
            let u = &mut u[..end - start];
            p.iter_mut().for_each(|v| *v = T::zero());
            for (j, &(m, n)) in self.pairs.iter().enumerate() {
                let (a, b) = coeffs[j];
                let c = &self.cos_part[j][start..end];
                if m == n {
                    p.iter_mut().zip(c).for_each(|(pi, &ci)| *pi += a * ci);
                } else {
                    let s = &self.sin_part[j][start..end];
                    for ((pi, &ci), &si) in p.iter_mut().zip(c).zip(s) {
                        *pi += a * ci - b * si;
                    }
                }
            }
            for (k, (&pi, ui)) in p.iter().zip(u.iter_mut()).enumerate() {
                let w = weights.map_or(T::one(), |w| w[start + k]);
                total += w;
                if w == T::zero() {
                    *ui = T::zero();
                    continue;
                }
                if !(pi > T::zero()) {
                    return Evaluation { log_likelihood: T::neg_infinity(), r: None };
                }
                log_sum += w * pi.ln();
                *ui = w / pi;
            }
            for (j, &(m, n)) in self.pairs.iter().enumerate() {
                let re = dot(&self.cos_part[j][start..end], u);
                sums[j].0 += re;
                if m != n {
                    let im = dot(&self.sin_part[j][start..end], u);
                    sums[j].1 += im;
                }
            }
        }
        let mut r = Array2::<Complex<T>>::zeros((self.dim, self.dim));
        for (&(m, n), &(re, im)) in self.pairs.iter().zip(&sums) {
            let z = Complex::new(re, -im).unscale(total);
            r[[m, n]] = z;
            r[[n, m]] = z.conj();
        }
        Evaluation { log_likelihood: log_sum / total, r: Some(r) }
    }
}

/// Dot product with eight independent accumulators, which keeps the
/// reduction from serializing on floating-point add latency.
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: T = ca.remainder().iter().zip(cb.remainder()).map(|(&x, &y)| x * y).sum();
    for (xa, xb) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += xa[k] * xb[k];
        }
    }
    acc.iter().copied().sum::<T>() + tail
}

struct Evaluation<T> {
    log_likelihood: T,
    r: Option<CMatrix<T>>,
}

fn rrr_step<T: Real>(rho: &CMatrix<T>, r: &CMatrix<T>) -> CMatrix<T> {
    let next = linalg::hermitian_part(&linalg::matmul(&linalg::matmul(r, rho), r));
    let tr = linalg::trace(&next).re;
    next.mapv(|z| z.unscale(tr))
}

fn wrap<T: Real>(x: T, period: T) -> T {
    let w = x - period * (x / period).floor();
    if w >= period { w - period } else { w }
}

fn check_phase_coverage<T: Real>(dataset: &QuadratureDataset<T>) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::PhaseCoverage("dataset is empty".into()));
    }
    let mut seen = [false; COVERAGE_BINS];
    for &theta in &dataset.thetas {
        let folded = wrap(theta, T::PI());
        let bin = (folded / T::PI() * T::from_usize_lossy(COVERAGE_BINS)).to_usize().unwrap_or(0);
        seen[bin.min(COVERAGE_BINS - 1)] = true;
    }
    let missing = seen.iter().filter(|&&s| !s).count();
    if missing > 0 {
        return Err(Error::PhaseCoverage(format!(
            "{missing} of {COVERAGE_BINS} phase intervals of width 10 degrees (modulo 180) contain no data"
        )));
    }
    Ok(())
}

/// Maximum-likelihood reconstruction with optional per-sample weights and
/// starting point.
pub fn reconstruct_weighted<T: Real>(
    data: &LikelihoodData<T>,
    weights: Option<&[T]>,
    start: Option<&FockDensityMatrix<T>>,
    opts: &MleOptions,
) -> Result<MleResult<T>> {
    let d = data.dim;
    let mut x0 = match start {
        Some(s) => s.with_n_cut(d - 1)?.into_elements(),
        None => linalg::identity::<T>(d).mapv(|z| z.unscale(T::from_usize_lossy(d))),
    };
    let tol = T::lit(opts.tol);
    let mut evaluations = 1;
    let mut e0 = data.evaluate(&x0, weights);
    if e0.r.is_none() {
        // a warm start may assign zero probability to some sample; mix in the identity
        let mixed = &x0.mapv(|z| z.scale(T::lit(0.9)))
            + &linalg::identity::<T>(d).mapv(|z| z.scale(T::lit(0.1) / T::from_usize_lossy(d)));
        x0 = mixed;
        e0 = data.evaluate(&x0, weights);
        evaluations += 1;
    }
    loop {
        let r0 = e0.r.as_ref().expect("current iterate has finite likelihood");
        let x1 = rrr_step(&x0, r0);
        let step = linalg::trace_norm(&(&x1 - &x0));
        if step < tol || evaluations >= opts.max_iter {
            let stop = if step < tol { StopReason::Converged } else { StopReason::IterationLimit };
            return finish(x1, evaluations, stop, step, e0.log_likelihood);
        }
        let e1 = data.evaluate(&x1, weights);
        evaluations += 1;
        if !opts.accelerate || e1.r.is_none() {
            x0 = x1;
            e0 = e1;
            if e0.r.is_none() {
                return Err(Error::InvalidState("likelihood iteration reached a zero-probability state".into()));
            }
            continue;
        }
        let x2 = rrr_step(&x1, e1.r.as_ref().expect("checked above"));
        let r = &x1 - &x0;
        let v = &(&x2 - &x1) - &r;
        let v_norm = linalg::frobenius_norm_sq(&v).sqrt();
        let mut alpha = if v_norm > T::zero() {
            -(linalg::frobenius_norm_sq(&r).sqrt() / v_norm)
        } else {
            -T::one()
        };
        alpha = alpha.min(-T::one());
        loop {
            let candidate = if alpha == -T::one() {
                x2.clone()
            } else {
                let raw = &(&x0 - &r.mapv(|z| z.scale(T::lit(2.0) * alpha))) + &v.mapv(|z| z.scale(alpha * alpha));
                linalg::project_to_density(&raw)
            };
            let ec = data.evaluate(&candidate, weights);
            evaluations += 1;
            if alpha == -T::one() || (ec.r.is_some() && ec.log_likelihood >= e1.log_likelihood) {
                if ec.r.is_none() {
                    x0 = x1;
                    e0 = e1;
                } else {
                    x0 = candidate;
                    e0 = ec;
                }
                break;
            }
            alpha = ((alpha - T::one()) * T::lit(0.5)).max(-T::one());
            if (alpha + T::one()).abs() < T::lit(1e-3) {
                alpha = -T::one();
            }
        }
    }
}

fn finish<T: Real>(x: CMatrix<T>, evaluations: usize, stop: StopReason, step: T, ll: T) -> Result<MleResult<T>> {
    let rho = FockDensityMatrix::new(linalg::project_to_density(&x))?;
    Ok(MleResult { rho, evaluations, stop, final_step: step, log_likelihood: ll })
}

/// Reconstructs the density matrix of a dataset, checking the truncation.
pub fn reconstruct<T: Real>(dataset: &QuadratureDataset<T>, opts: &MleOptions) -> Result<MleResult<T>> {
    let data = LikelihoodData::new(dataset, opts.n_cut)?;
    let result = reconstruct_weighted(&data, None, None, opts)?;
    let top = result.rho.population(opts.n_cut);
    if top > T::lit(TOP_LEVEL_LIMIT) {
        return Err(Error::Truncation { n_cut: opts.n_cut, tail: top.as_f64(), suggested: opts.n_cut * 2 });
    }
    Ok(result)
}

/// [`reconstruct`] with default options at truncation `n_cut`.
pub fn reconstruct_density<T: Real>(dataset: &QuadratureDataset<T>, n_cut: usize) -> Result<FockDensityMatrix<T>> {
    Ok(reconstruct(dataset, &MleOptions { n_cut, ..MleOptions::default() })?.rho)
}

/// Default radius of the disk around the origin searched for the minimum.
pub const DEFAULT_SEARCH_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub w_min: f64,
    pub location: (f64, f64),
    pub std_error: f64,
    pub search_radius: f64,
}

/// Smallest grid value within `radius` of the origin.
pub fn min_negativity<T: Real>(grid: &WignerGrid<T>, radius: T) -> Result<NegativityReport> {
    let covers = |axis: &[T]| axis[0] <= -radius && axis[axis.len() - 1] >= radius;
    if !(radius >= T::zero()) || !covers(&grid.x_axis) || !covers(&grid.p_axis) {
        return Err(Error::SearchDiskOutsideGrid { radius: radius.as_f64() });
    }
    let r2 = radius * radius * (T::one() + T::lit(1e-12));
    let mut best: Option<(T, T, T)> = None;
    for (i, &x) in grid.x_axis.iter().enumerate() {
        for (j, &p) in grid.p_axis.iter().enumerate() {
            if x * x + p * p > r2 {
                continue;
            }
            let w = grid.values[[i, j]];
            if best.is_none_or(|(b, _, _)| w < b) {
                best = Some((w, x, p));
            }
        }
    }
    let (w, x, p) = best.ok_or(Error::SearchDiskOutsideGrid { radius: radius.as_f64() })?;
    Ok(NegativityReport { w_min: w.as_f64(), location: (x.as_f64(), p.as_f64()), std_error: 0.0, search_radius: radius.as_f64() })
}

/// Minimum of the state's Wigner function over the disk: a polar grid
/// search followed by a shrinking pattern search kept inside the disk.
pub fn min_negativity_of_state<T: Real>(rho: &FockDensityMatrix<T>, radius: T) -> Result<NegativityReport> {
    if !(radius >= T::zero()) || !radius.is_finite() {
        return Err(invalid("radius", "must be finite and non-negative"));
    }
    let w = |x: T, p: T| wigner_value(rho, x, p);
    let mut best = (w(T::zero(), T::zero()), T::zero(), T::zero());
    let rings = 8;
    for ring in 1..=rings {
        let rr = radius * T::from_usize_lossy(ring) / T::from_usize_lossy(rings);
        let spokes = 8 * ring;
        for s in 0..spokes {
            let a = T::TAU() * T::from_usize_lossy(s) / T::from_usize_lossy(spokes);
            let (x, p) = (rr * a.cos(), rr * a.sin());
            let v = w(x, p);
            if v < best.0 {
                best = (v, x, p);
            }
        }
    }
    let mut step = radius / T::from_usize_lossy(rings);
    let inside = |x: T, p: T| x * x + p * p <= radius * radius;
    while step > T::lit(1e-7) && radius > T::zero() {
        let mut improved = false;
        for (dx, dp) in [(step, T::zero()), (-step, T::zero()), (T::zero(), step), (T::zero(), -step)] {
            let (x, p) = (best.1 + dx, best.2 + dp);
            if !inside(x, p) {
                continue;
            }
            let v = w(x, p);
            if v < best.0 {
                best = (v, x, p);
                improved = true;
            }
        }
        if !improved {
            step = step * T::lit(0.5);
        }
    }
    Ok(NegativityReport {
        w_min: best.0.as_f64(),
        location: (best.1.as_f64(), best.2.as_f64()),
        std_error: 0.0,
        search_radius: radius.as_f64(),
    })
}

/// What each bootstrap replica computes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPipeline {
    pub mle: MleOptions,
    pub search_radius: f64,
    /// Start replicas from the full-data estimate.
    pub warm_start: bool,
    /// Convergence tolerance used for replicas.
    pub replica_tol: f64,
}

impl Default for BootstrapPipeline {
    fn default() -> Self {
        Self { mle: MleOptions::default(), search_radius: DEFAULT_SEARCH_RADIUS, warm_start: true, replica_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    /// Estimate from the full dataset.
    pub estimate: NegativityReport,
    /// Sample standard deviation of the replica minima.
    pub std_error: f64,
    pub replicas: Vec<f64>,
    pub seed: u64,
}

/// Multinomial resampling weights for replica `index`.
fn resample_weights<T: Real>(n: usize, seed: u64, index: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut counts = vec![T::zero(); n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += T::one();
    }
    counts
}

/// Bootstrap standard error of the minimum negativity: `n_boot`
/// reconstructions from datasets resampled with replacement. Replica `b`
/// draws from its own random stream of `seed`, so the result does not depend
/// on scheduling.
pub fn bootstrap_error<T: Real>(
    dataset: &QuadratureDataset<T>,
    n_boot: usize,
    pipeline: &BootstrapPipeline,
    seed: u64,
) -> Result<BootstrapReport> {
    if n_boot < 2 {
        return Err(invalid("n_boot", "at least two replicas are needed for a spread"));
    }
    let data = LikelihoodData::new(dataset, pipeline.mle.n_cut)?;
    let full = reconstruct_weighted(&data, None, None, &pipeline.mle)?;
    let radius = T::lit(pipeline.search_radius);
    let estimate = min_negativity_of_state(&full.rho, radius)?;
    let replica_opts = MleOptions { tol: pipeline.replica_tol, ..pipeline.mle };
    let replicas: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let weights = resample_weights::<T>(data.len(), seed, b);
            let start = pipeline.warm_start.then_some(&full.rho);
            let fit = reconstruct_weighted(&data, Some(&weights), start, &replica_opts)?;
            Ok(min_negativity_of_state(&fit.rho, radius)?.w_min)
        })
        .collect::<Result<_>>()?;
    let mean = replicas.iter().sum::<f64>() / n_boot as f64;
    let var = replicas.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n_boot - 1) as f64;
    let std_error = var.sqrt();
    Ok(BootstrapReport { estimate: NegativityReport { std_error, ..estimate }, std_error, replicas, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbpOptions {
    /// Frequency cutoff of the ramp filter (inverse quadrature units).
    pub k_cut: f64,
    /// Angular bins over `[0, pi)`.
    pub bins: usize,
}

impl Default for FbpOptions {
    fn default() -> Self {
        Self { k_cut: 6.0, bins: 180 }
    }
}

/// Band-limited ramp kernel `int_0^k xi cos(xi u) d xi`.
fn ramp_kernel<T: Real>(k: T, u: T) -> T {
    let ku = k * u;
    if ku.abs() < T::lit(1e-2) {
        let k2 = k * k;
        let u2 = u * u;
        k2 * T::lit(0.5) - k2 * k2 * u2 / T::lit(8.0) + k2 * k2 * k2 * u2 * u2 / T::lit(144.0)
    } else {
        (ku.cos() - T::one()) / (u * u) + k * ku.sin() / u
    }
}

/// Records folded into `[0, pi)` and grouped by angular bin.
fn binned_records<T: Real>(dataset: &QuadratureDataset<T>, bins: usize) -> Result<Vec<Vec<(T, T)>>> {
    check_phase_coverage(dataset)?;
    let mut out = vec![Vec::new(); bins];
    for (&theta, &x) in dataset.thetas.iter().zip(&dataset.xs) {
        let t = wrap(theta, T::TAU());
        let (t, x) = if t >= T::PI() { (t - T::PI(), -x) } else { (t, x) };
        let b = (t / T::PI() * T::from_usize_lossy(bins)).to_usize().unwrap_or(0).min(bins - 1);
        out[b].push((t, x));
    }
    if out.iter().any(|b| b.is_empty()) {
        return Err(Error::PhaseCoverage(format!("back-projection needs data in all {bins} angular bins")));
    }
    Ok(out)
}

/// Inverse Radon estimate of `W(x, p)` and its standard error.
///
/// `W = 1/(2 pi) * mean over bins of mean_i K(x_i - x cos(theta_i) - p sin(theta_i))`;
/// averaging per bin first equalizes uneven phase coverage.
pub fn fbp_wigner<T: Real>(dataset: &QuadratureDataset<T>, x: T, p: T, opts: &FbpOptions) -> Result<(T, T)> {
    let bins = binned_records(dataset, opts.bins)?;
    let k = T::lit(opts.k_cut);
    let mut total = T::zero();
    let mut var = T::zero();
    for records in &bins {
        let vals: Vec<T> = records.iter().map(|&(t, xi)| ramp_kernel(k, xi - x * t.cos() - p * t.sin())).collect();
        let n = T::from_usize_lossy(vals.len());
        let mean = vals.iter().copied().sum::<T>() / n;
        total += mean;
        if vals.len() > 1 {
            let v = vals.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / (n - T::one());
            var += v / n;
        }
    }
    let b = T::from_usize_lossy(opts.bins);
    let scale = T::one() / (T::TAU() * b);
    Ok((total * scale, var.sqrt() * scale))
}

/// Back-projected Wigner function on a grid, from filtered projections
/// tabulated per bin (at the bin-centre phase) and interpolated linearly.
pub fn fbp_wigner_grid<T: Real>(
    dataset: &QuadratureDataset<T>,
    spec: &GridSpec<T>,
    opts: &FbpOptions,
) -> Result<WignerGrid<T>> {
    let bins = binned_records(dataset, opts.bins)?;
    let k = T::lit(opts.k_cut);
    let x_axis = spec.x_axis();
    let p_axis = spec.p_axis();
    let reach = [spec.x_min, spec.x_max, spec.p_min, spec.p_max].iter().map(|v| v.abs()).fold(T::zero(), T::max)
        * T::SQRT_2();
    let h = T::lit(0.02);
    let ns = (T::lit(2.0) * reach / h).ceil().to_usize().unwrap_or(2) + 1;
    let s_axis: Vec<T> = (0..ns).map(|i| -reach + h * T::from_usize_lossy(i)).collect();
    let b_count = T::from_usize_lossy(opts.bins);
    let projections: Vec<(T, Vec<T>)> = bins
        .par_iter()
        .enumerate()
        .map(|(b, records)| {
            let centre = (T::from_usize_lossy(b) + T::lit(0.5)) * T::PI() / b_count;
            let n = T::from_usize_lossy(records.len());
            let q = s_axis.iter().map(|&s| records.iter().map(|&(_, xi)| ramp_kernel(k, xi - s)).sum::<T>() / n).collect();
            (centre, q)
        })
        .collect();
    let scale = T::one() / (T::TAU() * b_count);
    let values = Array2::from_shape_fn((x_axis.len(), p_axis.len()), |(i, j)| {
        let (x, p) = (x_axis[i], p_axis[j]);
        let mut acc = T::zero();
        for (theta, q) in &projections {
            let s = x * theta.cos() + p * theta.sin();
            let u = ((s + reach) / h).max(T::zero());
            let idx = u.floor().to_usize().unwrap_or(0).min(ns - 2);
            let f = (u - T::from_usize_lossy(idx)).min(T::one());
            acc += q[idx] * (T::one() - f) + q[idx + 1] * f;
        }
        acc * scale
    });
    Ok(WignerGrid {
        x_axis,
        p_axis,
        values,
        provenance: Provenance { source: GridSource::Reconstructed, n_cut: 0, dataset: Some(dataset.meta.state.clone()) },
    })
}

/// Wigner grid of a reconstructed state, tagged with its dataset.
pub fn reconstructed_grid<T: Real>(
    rho: &FockDensityMatrix<T>,
    spec: &GridSpec<T>,
    dataset: &str,
) -> Result<WignerGrid<T>> {
    let mut grid = crate::state_model::wigner_grid(rho, spec)?;
    grid.provenance = Provenance { source: GridSource::Reconstructed, n_cut: rho.n_cut(), dataset: Some(dataset.into()) };
    Ok(grid)
}

/// Temporal mode the heralded state actually occupies: `kappa = 0` for the
/// unfiltered Lorentzian, otherwise the cavity-filtered mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueMode {
    pub kappa: f64,
    pub kappa_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaScan {
    pub gamma: f64,
    pub true_mode: TrueMode,
    /// `kappa' / kappa` of every applied mode.
    pub applied_impedance_ratio: f64,
    pub eta0: f64,
    pub r: f64,
    pub zeta: f64,
    /// Fix `eta_kappa = 1` (isolates the cutoff dependence that enters through the overlap).
    pub force_unit_overlap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub kappa: f64,
    pub eta_kappa: f64,
    pub eta: f64,
    pub w00: f64,
}

/// `W(0, 0)` predicted for each applied cutoff: the applied mode is the
/// filtered mode with cutoff `kappa`, `eta_kappa` its overlap with the true
/// mode, and `W(0, 0)` the closed form at `eta = eta0 eta_kappa^2`.
pub fn kappa_scan(scan: &KappaScan, kappas: &[f64]) -> Result<Vec<ScanPoint>> {
    if !(scan.gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if let Some(k) = kappas.iter().find(|k| !(**k >= 0.0)) {
        return Err(invalid("kappa_list", format!("cutoffs must be non-negative, got {k}")));
    }
    let base = ModelParams::from_components(scan.r, scan.eta0, 1.0, scan.zeta)?;
    kappas
        .par_iter()
        .map(|&kappa| {
            let eta_kappa = if scan.force_unit_overlap {
                1.0
            } else {
                let grid = TimeGrid::for_rates(scan.gamma, &[kappa, scan.true_mode.kappa])?;
                let truth =
                    filtered_mode_from_rates(scan.gamma, scan.true_mode.kappa, scan.true_mode.kappa_prime, &grid)?;
                let applied = filtered_mode_from_rates(scan.gamma, kappa, scan.applied_impedance_ratio * kappa, &grid)?;
                overlap(&truth, &applied)?.abs().min(1.0)
            };
            let params = base.with_eta_kappa(eta_kappa)?;
            Ok(ScanPoint { kappa, eta_kappa, eta: params.eta, w00: w00_closed_form(params.r, params.eta, params.zeta) })
        })
        .collect()
}
