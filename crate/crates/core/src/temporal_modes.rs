//! Temporal mode functions of the heralded state and the cavity filter that
//! reshapes them.
//!
//! Time is measured from the detector click, `t_c = 0`; negative times lie
//! before the click. Angular frequencies are offsets from the carrier. Every
//! mode is stored on a uniform grid that contains `t = 0` as a sample, and is
//! renormalized so that `sum(f^2) * dt = 1`. Global constants and the overall
//! sign of convolution outputs are absorbed into that normalization: outputs
//! are oriented to have a non-negative overlap with their input.

use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Samples per fastest time constant in the default grid.
const DEFAULT_SAMPLES_PER_TAU: f64 = 40.0;
/// Extent of the default grid in units of the relevant time constant.
const DEFAULT_SPAN_TAUS: f64 = 12.0;
/// Minimum extent, in time constants, for the truncated norm to be below 1e-6.
const MIN_SPAN_TAUS: f64 = 8.0;
/// Required resolution of the convolution routines: dt <= tau / 20.
const MIN_SAMPLES_PER_TAU: f64 = 20.0;
/// Below this relative separation the gamma = kappa limit form is used.
const DEGENERATE_RELATIVE_GAP: f64 = 1e-9;

/// Uniform time grid `t_i = (i - n_before) * dt`, so `t = 0` is always a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    pub dt: T,
    pub n_before: usize,
    pub n_after: usize,
}

impl<T: Real> TimeGrid<T> {
    /// Grid covering at least `[-before, after]` with spacing `dt`.
    pub fn new(dt: T, before: T, after: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(invalid("dt", format!("must be positive and finite, got {dt}")));
        }
        if before < T::zero() || after < T::zero() || !before.is_finite() || !after.is_finite() {
            return Err(invalid("span", "grid extents must be finite and non-negative"));
        }
        let count = |span: T| (span / dt).ceil().to_usize().ok_or_else(|| invalid("span", "too many samples"));
        Ok(Self { dt, n_before: count(before)?, n_after: count(after)? })
    }

    /// Default grid for a mode of bandwidth `gamma` reshaped by processes
    /// with rates `slow_rates` (cavity cutoff, electrical cutoff; zeros are
    /// ignored): `dt = 1 / (40 max rate)`, span `[-12 / slowest, +12 / gamma]`.
    pub fn for_rates(gamma: T, slow_rates: &[T]) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(invalid("gamma", "must be positive"));
        }
        let active = slow_rates.iter().copied().filter(|&r| r > T::zero());
        let fastest = active.clone().fold(gamma, T::max);
        let slowest = active.fold(gamma, T::min);
        let dt = T::one() / (T::lit(DEFAULT_SAMPLES_PER_TAU) * fastest);
        let span = T::lit(DEFAULT_SPAN_TAUS);
        Self::new(dt, span / slowest, span / gamma)
    }

    pub fn len(&self) -> usize {
        self.n_before + self.n_after + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t0(&self) -> T {
        -T::from_usize_lossy(self.n_before) * self.dt
    }

    pub fn time(&self, i: usize) -> T {
        (T::from_usize_lossy(i) - T::from_usize_lossy(self.n_before)) * self.dt
    }

    pub fn span_before(&self) -> T {
        T::from_usize_lossy(self.n_before) * self.dt
    }

    pub fn span_after(&self) -> T {
        T::from_usize_lossy(self.n_after) * self.dt
    }

    fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }
}

/// Closed-form parameters a mode was built from (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams<T> {
    pub gamma: T,
    pub kappa: T,
    pub kappa_prime: T,
}

/// A real, unit-norm temporal mode sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction<T> {
    samples: Vec<T>,
    dt: T,
    t0: T,
    params: Option<ModeParams<T>>,
}

impl<T: Real> ModeFunction<T> {
    /// Builds a mode from raw samples, normalizing them discretely.
    pub fn from_samples(samples: Vec<T>, dt: T, t0: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(invalid("dt", "must be positive"));
        }
        if samples.is_empty() {
            return Err(invalid("samples", "empty mode"));
        }
        let mut mode = Self { samples, dt, t0, params: None };
        mode.normalize()?;
        Ok(mode)
    }

    fn with_params(mut self, params: Option<ModeParams<T>>) -> Self {
        self.params = params;
        self
    }

    fn normalize(&mut self) -> Result<()> {
        let norm_sq = self.norm_sq();
        if !(norm_sq > T::zero()) || !norm_sq.is_finite() {
            return Err(invalid("samples", "mode has zero or non-finite norm"));
        }
        let scale = T::one() / norm_sq.sqrt();
        self.samples.iter_mut().for_each(|s| *s *= scale);
        Ok(())
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Time of the first sample relative to the click.
    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn params(&self) -> Option<&ModeParams<T>> {
        self.params.as_ref()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_usize_lossy(i) * self.dt
    }

    pub fn t_end(&self) -> T {
        self.time(self.len() - 1)
    }

    /// `sum(f^2) * dt`.
    pub fn norm_sq(&self) -> T {
        self.samples.iter().map(|&s| s * s).sum::<T>() * self.dt
    }

    /// `sum(f) * dt`.
    pub fn integral(&self) -> T {
        self.samples.iter().copied().sum::<T>() * self.dt
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, t: T) -> T {
        let u = (t - self.t0) / self.dt;
        if u < T::zero() || u > T::from_usize_lossy(self.len() - 1) {
            return T::zero();
        }
        let i = u.floor().to_usize().unwrap_or(0).min(self.len() - 1);
        if i + 1 >= self.len() {
            return self.samples[i];
        }
        let frac = u - T::from_usize_lossy(i);
        self.samples[i] * (T::one() - frac) + self.samples[i + 1] * frac
    }

    /// Index of the sample closest to `t_c = 0`, if on the grid.
    pub fn click_index(&self) -> Option<usize> {
        let u = (-self.t0 / self.dt).round();
        u.to_usize().filter(|&i| i < self.len())
    }

    /// Writes `t_seconds amplitude` rows.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# t_seconds amplitude")?;
        for (i, s) in self.samples.iter().enumerate() {
            writeln!(out, "{} {}", self.time(i).as_f64(), s.as_f64())?;
        }
        Ok(())
    }

    /// Reads the two-column text format, renormalizing on load.
    pub fn read_text(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace().map(str::parse::<f64>);
            match (cols.next(), cols.next(), cols.next()) {
                (Some(Ok(t)), Some(Ok(v)), None) => {
                    times.push(t);
                    values.push(T::lit(v));
                }
                _ => return Err(Error::Parse(format!("mode line {}: expected two numbers", lineno + 1))),
            }
        }
        if times.len() < 2 {
            return Err(Error::Parse("mode file needs at least two samples".into()));
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        Self::from_samples(values, T::lit(dt), T::lit(times[0]))
    }
}

/// Reflecting cavity acting as an optical high-pass filter.
///
/// `kappa = (kappa1 + kappa2) / 2`, `kappa' = (kappa1 - kappa2) / 2`; the
/// reflected field is `(kappa' + i w) / (kappa - i w)` times the input plus
/// `sqrt(kappa1 kappa2) / (kappa - i w)` times an auxiliary vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityFilter<T> {
    kappa1: T,
    kappa2: T,
}

impl<T: Real> CavityFilter<T> {
    pub fn new(kappa1: T, kappa2: T) -> Result<Self> {
        if !(kappa1 >= T::zero()) || !(kappa2 >= T::zero()) {
            return Err(invalid("kappa1/kappa2", "mirror decay rates must be non-negative"));
        }
        if !(kappa1 + kappa2 > T::zero()) || !(kappa1 + kappa2).is_finite() {
            return Err(invalid("kappa", "total decay rate must be positive and finite"));
        }
        Ok(Self { kappa1, kappa2 })
    }

    /// From the mean rate `kappa` and imbalance `kappa'` (`|kappa'| <= kappa`).
    pub fn from_kappa(kappa: T, kappa_prime: T) -> Result<Self> {
        if kappa_prime.abs() > kappa {
            return Err(invalid("kappa_prime", "|kappa'| must not exceed kappa"));
        }
        Self::new(kappa + kappa_prime, kappa - kappa_prime)
    }

    /// From the cavity half width at half maximum in Hz and the ratio `kappa'/kappa`.
    pub fn from_hwhm(hwhm_hz: T, impedance_ratio: T) -> Result<Self> {
        let kappa = T::TAU() * hwhm_hz;
        Self::from_kappa(kappa, impedance_ratio * kappa)
    }

    /// Impedance-matched cavity (`kappa1 = kappa2 = kappa`).
    pub fn matched(kappa: T) -> Result<Self> {
        Self::new(kappa, kappa)
    }

    pub fn kappa1(&self) -> T {
        self.kappa1
    }

    pub fn kappa2(&self) -> T {
        self.kappa2
    }

    pub fn kappa(&self) -> T {
        (self.kappa1 + self.kappa2) * T::lit(0.5)
    }

    pub fn kappa_prime(&self) -> T {
        (self.kappa1 - self.kappa2) * T::lit(0.5)
    }

    /// Reflection coefficient seen by the input field at offset `omega`.
    pub fn response(&self, omega: T) -> Complex<T> {
        Complex::new(self.kappa_prime(), omega) / Complex::new(self.kappa(), -omega)
    }

    /// Coefficient of the auxiliary vacuum in the reflected field.
    pub fn vacuum_coupling(&self, omega: T) -> Complex<T> {
        Complex::new((self.kappa1 * self.kappa2).sqrt(), T::zero()) / Complex::new(self.kappa(), -omega)
    }
}

/// `sqrt(gamma) exp(-gamma |t|)`.
pub fn lorentzian_value<T: Real>(gamma: T, t: T) -> T {
    gamma.sqrt() * (-gamma * t.abs()).exp()
}

/// `expm1(delta t) / delta`, continuous through `delta = 0`.
fn exp_difference_ratio<T: Real>(delta: T, gamma: T, t: T) -> T {
    if delta.abs() < T::lit(DEGENERATE_RELATIVE_GAP) * gamma {
        t * (T::one() + delta * t * T::lit(0.5))
    } else {
        (delta * t).exp_m1() / delta
    }
}

/// Closed-form filtered mode at time `t`, including the analytic
/// normalization constant.
///
/// For `t < 0` the textbook form `A e^{gamma t} - B e^{kappa t}` has both
/// coefficients diverging as `kappa -> gamma`; it is evaluated as
/// `c e^{kappa t} (e^{(gamma-kappa) t} - 1) / (gamma - kappa) + (gamma - kappa') / (gamma + kappa) e^{gamma t}`
/// with `c = 2 gamma (kappa + kappa') / (gamma + kappa)`, which is exact and
/// has a finite limit at `kappa = gamma`.
pub fn filtered_mode_value<T: Real>(gamma: T, kappa: T, kappa_prime: T, t: T) -> T {
    if kappa == T::zero() {
        return lorentzian_value(gamma, t);
    }
    let two = T::lit(2.0);
    let norm = (gamma * kappa * (gamma + kappa).powi(2)
        / (gamma * gamma * kappa + kappa_prime * kappa_prime * (two * gamma + kappa)))
        .sqrt();
    let head = (gamma - kappa_prime) / (gamma + kappa);
    if t >= T::zero() {
        norm * head * (-gamma * t).exp()
    } else {
        let c = two * gamma * (kappa + kappa_prime) / (gamma + kappa);
        let tail = c * (kappa * t).exp() * exp_difference_ratio(gamma - kappa, gamma, t);
        norm * (tail + head * (gamma * t).exp())
    }
}

fn check_gamma<T: Real>(gamma: T) -> Result<()> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be positive and finite, got {gamma}")));
    }
    Ok(())
}

fn check_span<T: Real>(grid: &TimeGrid<T>, before_rate: T, after_rate: T) -> Result<()> {
    let need_before = T::lit(MIN_SPAN_TAUS) / before_rate;
    let need_after = T::lit(MIN_SPAN_TAUS) / after_rate;
    if grid.span_before() < need_before || grid.span_after() < need_after {
        let defect = ((-T::lit(2.0) * before_rate * grid.span_before()).exp()
            + (-T::lit(2.0) * after_rate * grid.span_after()).exp())
            * T::lit(0.5);
        return Err(Error::GridTooNarrow(format!(
            "grid covers [-{:.3e}, {:.3e}] s but needs [-{:.3e}, {:.3e}] s; truncated norm defect ~{:.1e}",
            grid.span_before().as_f64(),
            grid.span_after().as_f64(),
            need_before.as_f64(),
            need_after.as_f64(),
            defect.as_f64()
        )));
    }
    Ok(())
}

/// Unfiltered mode of the degenerate parametric oscillator, `sqrt(gamma) e^{-gamma |t|}`.
pub fn lorentzian_mode<T: Real>(gamma: T, grid: &TimeGrid<T>) -> Result<ModeFunction<T>> {
    check_gamma(gamma)?;
    check_span(grid, gamma, gamma)?;
    let samples = grid.times().map(|t| lorentzian_value(gamma, t)).collect();
    Ok(ModeFunction::from_samples(samples, grid.dt, grid.t0())?.with_params(Some(ModeParams {
        gamma,
        kappa: T::zero(),
        kappa_prime: T::zero(),
    })))
}

/// Mode heralded through the cavity filter, from its closed form.
pub fn filtered_mode<T: Real>(gamma: T, filter: &CavityFilter<T>, grid: &TimeGrid<T>) -> Result<ModeFunction<T>> {
    filtered_mode_from_rates(gamma, filter.kappa(), filter.kappa_prime(), grid)
}

/// [`filtered_mode`] from the rates directly. `kappa = 0` (no cavity) gives
/// the Lorentzian mode.
pub fn filtered_mode_from_rates<T: Real>(
    gamma: T,
    kappa: T,
    kappa_prime: T,
    grid: &TimeGrid<T>,
) -> Result<ModeFunction<T>> {
    check_gamma(gamma)?;
    if !(kappa >= T::zero()) || !kappa.is_finite() {
        return Err(invalid("kappa", format!("must be finite and non-negative, got {kappa}")));
    }
    if kappa_prime.abs() > kappa {
        return Err(invalid("kappa_prime", "|kappa'| must not exceed kappa"));
    }
    if kappa == T::zero() {
        return lorentzian_mode(gamma, grid);
    }
    check_span(grid, gamma.min(kappa), gamma)?;
    let samples = grid.times().map(|t| filtered_mode_value(gamma, kappa, kappa_prime, t)).collect();
    Ok(ModeFunction::from_samples(samples, grid.dt, grid.t0())?.with_params(Some(ModeParams {
        gamma,
        kappa,
        kappa_prime,
    })))
}

/// Weights `(w0, w1)` of `int_0^h e^{-rate s} f(s) ds` for `f` linear between
/// its end values, and the decay `e^{-rate h}`.
fn exponential_step_weights<T: Real>(rate: T, h: T) -> (T, T, T) {
    let x = rate * h;
    let (total, first_moment) = if x < T::lit(1e-2) {
        // int_0^1 e^{-xu} du and int_0^1 u e^{-xu} du as series
        let mut term = T::one();
        let mut a = T::zero();
        let mut b = T::zero();
        for k in 0..10 {
            let kf = T::from_usize_lossy(k);
            a += term / (kf + T::one());
            b += term / (kf + T::lit(2.0));
            term = term * (-x) / (kf + T::one());
        }
        (a, b)
    } else {
        let e = (-x).exp();
        (-(-x).exp_m1() / x, (T::one() - e * (T::one() + x)) / (x * x))
    };
    let w1 = h * first_moment;
    let w0 = h * total - w1;
    (w0, w1, (-x).exp())
}

/// `I_i = int_0^{t_end - t_i} e^{-rate s} f(t_i + s) ds` for a piecewise
/// linear `f`, computed exactly by a backward recursion.
fn forward_exponential_average<T: Real>(samples: &[T], dt: T, rate: T) -> Vec<T> {
    let (w0, w1, decay) = exponential_step_weights(rate, dt);
    let n = samples.len();
    let mut out = vec![T::zero(); n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = decay * out[i + 1] + w0 * samples[i] + w1 * samples[i + 1];
    }
    out
}

fn finish_convolution<T: Real>(
    input: &ModeFunction<T>,
    raw: Vec<T>,
    params: Option<ModeParams<T>>,
) -> Result<ModeFunction<T>> {
    let mut out = ModeFunction::from_samples(raw, input.dt, input.t0)?;
    let dot: T = out.samples.iter().zip(&input.samples).map(|(&a, &b)| a * b).sum();
    if dot < T::zero() {
        out.samples.iter_mut().for_each(|s| *s = -*s);
    }
    Ok(out.with_params(params))
}

/// Numerically convolves `mode` with the time-reversed impulse response of
/// the cavity, `g(t) ∝ (kappa + kappa') e^{-kappa t} Θ(t) - δ(t)`:
/// `f_out(t) ∝ (kappa + kappa') int_0^∞ e^{-kappa s} f(t + s) ds - f(t)`.
///
/// The input is treated as zero beyond the last sample.
pub fn convolve_with_filter<T: Real>(mode: &ModeFunction<T>, filter: &CavityFilter<T>) -> Result<ModeFunction<T>> {
    let kappa = filter.kappa();
    let kappa_prime = filter.kappa_prime();
    let mut fastest = kappa;
    if let Some(p) = mode.params() {
        fastest = fastest.max(p.gamma);
    }
    let required = T::one() / (T::lit(MIN_SAMPLES_PER_TAU) * fastest);
    if mode.dt > required {
        return Err(Error::UnderResolved { dt: mode.dt.as_f64(), required: required.as_f64() });
    }
    let avg = forward_exponential_average(&mode.samples, mode.dt, kappa);
    let raw = avg
        .iter()
        .zip(&mode.samples)
        .map(|(&i, &f)| (kappa + kappa_prime) * i - f)
        .collect();
    let params = mode
        .params()
        .filter(|p| p.kappa == T::zero())
        .map(|p| ModeParams { gamma: p.gamma, kappa, kappa_prime });
    finish_convolution(mode, raw, params)
}

/// `int f g dt` by the grid sum. Grids with the same spacing and aligned
/// offsets are summed directly over their common samples; otherwise the
/// coarser mode is linearly interpolated onto the finer grid over the common
/// time window.
pub fn overlap<T: Real>(f: &ModeFunction<T>, g: &ModeFunction<T>) -> Result<T> {
    pairwise_sum(f, g, |a, b| a * b)
}

/// L2 distance `sqrt(int (f - g)^2 dt)` over the common window.
pub fn l2_distance<T: Real>(f: &ModeFunction<T>, g: &ModeFunction<T>) -> Result<T> {
    if let Some(shift) = aligned_shift(f, g) {
        // include samples that lie outside the common window
        let mut acc = T::zero();
        for (i, &a) in f.samples.iter().enumerate() {
            let j = i as i64 - shift;
            let b = if j >= 0 && (j as usize) < g.len() { g.samples[j as usize] } else { T::zero() };
            acc += (a - b) * (a - b);
        }
        for (j, &b) in g.samples.iter().enumerate() {
            let i = j as i64 + shift;
            if i < 0 || i as usize >= f.len() {
                acc += b * b;
            }
        }
        return Ok((acc * f.dt).sqrt());
    }
    let sq = pairwise_sum(f, g, |a, b| (a - b) * (a - b))?;
    Ok(sq.sqrt())
}

/// Offset in samples of `g` relative to `f` when both share one lattice.
fn aligned_shift<T: Real>(f: &ModeFunction<T>, g: &ModeFunction<T>) -> Option<i64> {
    if (f.dt - g.dt).abs() > T::lit(1e-9) * f.dt {
        return None;
    }
    let u = (g.t0 - f.t0) / f.dt;
    let r = u.round();
    if (u - r).abs() > T::lit(1e-6) {
        return None;
    }
    r.to_i64()
}

fn pairwise_sum<T: Real>(f: &ModeFunction<T>, g: &ModeFunction<T>, op: impl Fn(T, T) -> T) -> Result<T> {
    if let Some(shift) = aligned_shift(f, g) {
        // g sample j sits at f index j + shift
        let lo = shift.max(0);
        let hi = (f.len() as i64).min(g.len() as i64 + shift);
        if lo >= hi {
            return Err(Error::NoOverlapRegion);
        }
        let acc: T = (lo..hi).map(|i| op(f.samples[i as usize], g.samples[(i - shift) as usize])).sum();
        return Ok(acc * f.dt);
    }
    let (fine, coarse, swapped) = if f.dt <= g.dt { (f, g, false) } else { (g, f, true) };
    let start = fine.t0.max(coarse.t0);
    let end = fine.t_end().min(coarse.t_end());
    if start > end {
        return Err(Error::NoOverlapRegion);
    }
    let mut acc = T::zero();
    let mut any = false;
    for (i, &a) in fine.samples.iter().enumerate() {
        let t = fine.time(i);
        if t < start || t > end {
            continue;
        }
        any = true;
        let b = coarse.value_at(t);
        acc += if swapped { op(b, a) } else { op(a, b) };
    }
    if !any {
        return Err(Error::NoOverlapRegion);
    }
    Ok(acc * fine.dt)
}

/// Effective analysis mode after a single-pole electrical high-pass filter
/// `i w / (cutoff - i w)` on the homodyne photocurrent.
///
/// Filtering the photocurrent and then integrating against `f` is the same
/// as integrating the raw photocurrent against `f` convolved with the
/// time-reversed filter response, which is what this returns (renormalized).
/// A cutoff of exactly zero is the identity.
pub fn electrical_hpf_project<T: Real>(mode: &ModeFunction<T>, cutoff: T) -> Result<ModeFunction<T>> {
    if cutoff == T::zero() {
        return Ok(mode.clone());
    }
    if !(cutoff > T::zero()) || !cutoff.is_finite() {
        return Err(invalid("cutoff", "must be positive and finite"));
    }
    let before = T::from_usize_lossy(mode.click_index().unwrap_or(0)) * mode.dt;
    let need = T::lit(MIN_SPAN_TAUS) / cutoff;
    if before < need {
        return Err(Error::GridTooNarrow(format!(
            "electrical cutoff {:.3e} rad/s needs {:.3e} s of grid before the click, have {:.3e} s",
            cutoff.as_f64(),
            need.as_f64(),
            before.as_f64()
        )));
    }
    let required = T::one() / (T::lit(MIN_SAMPLES_PER_TAU) * cutoff);
    if mode.dt > required {
        return Err(Error::UnderResolved { dt: mode.dt.as_f64(), required: required.as_f64() });
    }
    let avg = forward_exponential_average(&mode.samples, mode.dt, cutoff);
    let raw = avg.iter().zip(&mode.samples).map(|(&i, &f)| cutoff * i - f).collect();
    finish_convolution(mode, raw, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    const GAMMA: f64 = TAU * 6.2e6;

    fn grid(gamma: f64, kappa: f64) -> TimeGrid<f64> {
        TimeGrid::for_rates(gamma, &[kappa]).unwrap()
    }

    #[test]
    fn grid_contains_click_sample() {
        let g = grid(GAMMA, TAU * 0.5e6);
        assert_eq!(g.time(g.n_before), 0.0);
        assert!(g.span_before() >= 12.0 / (TAU * 0.5e6));
    }

    #[test]
    fn lorentzian_peak_and_symmetry() {
        let g = grid(GAMMA, 0.0);
        assert!((lorentzian_value(GAMMA, 0.0) - GAMMA.sqrt()).abs() < 1e-9 * GAMMA.sqrt());
        let mode = lorentzian_mode(GAMMA, &TimeGrid { n_after: g.n_before, ..g }).unwrap();
        let c = mode.click_index().unwrap();
        for k in 1..c.min(mode.len() - c) {
            assert_eq!(mode.samples()[c + k], mode.samples()[c - k]);
        }
        assert!((mode.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_rejects_bad_inputs() {
        let g = grid(GAMMA, 0.0);
        assert!(matches!(lorentzian_mode(0.0, &g), Err(Error::InvalidParameter { .. })));
        let narrow = TimeGrid::new(g.dt, 3.0 / GAMMA, 3.0 / GAMMA).unwrap();
        assert!(matches!(lorentzian_mode(GAMMA, &narrow), Err(Error::GridTooNarrow(_))));
    }

    #[test]
    fn matched_cavity_rejects_carrier() {
        let f = CavityFilter::matched(TAU * 0.5e6).unwrap();
        assert_eq!(f.response(0.0).norm(), 0.0);
        assert!((f.response(1e12).norm() - 1.0).abs() < 1e-5);
        assert!((f.response(-1e12).norm() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn impedance_mismatch_leaves_carrier_reflection() {
        let f = CavityFilter::<f64>::from_hwhm(0.5e6, -0.37).unwrap();
        let r0 = f.response(0.0);
        assert!((r0.re + 0.37).abs() < 1e-12);
        assert!((r0.norm_sqr() - 0.1369).abs() < 1e-12);
    }

    #[test]
    fn cavity_parameter_validation() {
        assert!(CavityFilter::new(-1.0, 1.0).is_err());
        assert!(CavityFilter::new(0.0, 0.0).is_err());
        assert!(CavityFilter::from_kappa(1.0, 2.0).is_err());
        let f = CavityFilter::from_kappa(3.0, -1.0).unwrap();
        assert_eq!((f.kappa1(), f.kappa2()), (2.0, 4.0));
    }

    #[test]
    fn degenerate_limit_matches_neighbouring_closed_form() {
        let kp = -0.37 * GAMMA;
        let near = GAMMA * (1.0 - 1e-6);
        for &t in &[-5.0 / GAMMA, -1.0 / GAMMA, -0.1 / GAMMA] {
            let at = filtered_mode_value(GAMMA, GAMMA, kp, t);
            let beside = filtered_mode_value(GAMMA, near, kp, t);
            assert!(at.is_finite());
            assert!((at - beside).abs() < 1e-5 * GAMMA.sqrt(), "t={t}: {at} vs {beside}");
        }
    }

    #[test]
    fn convolution_rejects_coarse_grid() {
        let g = TimeGrid::new(1.0 / (5.0 * GAMMA), 20.0 / GAMMA, 20.0 / GAMMA).unwrap();
        let m = lorentzian_mode(GAMMA, &g).unwrap();
        let f = CavityFilter::matched(0.1 * GAMMA).unwrap();
        assert!(matches!(convolve_with_filter(&m, &f), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn overlap_requires_common_window() {
        let a = ModeFunction::from_samples(vec![1.0, 2.0, 1.0], 0.1, 0.0).unwrap();
        let b = ModeFunction::from_samples(vec![1.0, 2.0, 1.0], 0.1, 10.0).unwrap();
        assert!(matches!(overlap(&a, &b), Err(Error::NoOverlapRegion)));
        let c = ModeFunction::from_samples(vec![1.0, 2.0, 1.0], 0.07, 10.0).unwrap();
        assert!(matches!(overlap(&a, &c), Err(Error::NoOverlapRegion)));
    }

    #[test]
    fn overlap_interpolates_across_spacings() {
        let fine = TimeGrid::new(1.0 / (80.0 * GAMMA), 12.0 / GAMMA, 12.0 / GAMMA).unwrap();
        let coarse = TimeGrid::new(1.0 / (30.0 * GAMMA), 12.0 / GAMMA, 12.0 / GAMMA).unwrap();
        let a = lorentzian_mode(GAMMA, &fine).unwrap();
        let b = lorentzian_mode(GAMMA, &coarse).unwrap();
        let o = overlap(&a, &b).unwrap();
        assert!((o - 1.0).abs() < 2e-3, "{o}");
        assert!((overlap(&b, &a).unwrap() - o).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let g = TimeGrid::new(1.0 / (40.0 * GAMMA), 10.0 / GAMMA, 10.0 / GAMMA).unwrap();
        let m = lorentzian_mode(GAMMA, &g).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let back = ModeFunction::<f64>::read_text(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.len(), m.len());
        assert!((overlap(&m, &back).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_precision_modes_work() {
        let gamma = TAU as f32 * 6.2e6;
        let g = TimeGrid::<f32>::for_rates(gamma, &[TAU as f32 * 0.5e6]).unwrap();
        let f = CavityFilter::matched(TAU as f32 * 0.5e6).unwrap();
        let m = filtered_mode(gamma, &f, &g).unwrap();
        assert!((m.norm_sq() - 1.0).abs() < 1e-4);
    }
}
