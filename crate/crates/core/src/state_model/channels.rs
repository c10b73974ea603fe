use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;

use super::efficiency::ModelParams;
use super::fock::FockDensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Largest weight allowed above the truncation.
pub const TRUNCATION_TAIL: f64 = 1e-8;
pub const DEFAULT_N_CUT: usize = 30;
/// `model_state` stops doubling the truncation here.
pub const MAX_N_CUT: usize = 240;

/// Amplitudes of a state populating every second level from `first`, given
/// the leading amplitude and the ratio between consecutive populated levels.
/// Returns the amplitudes up to `n_cut` and the weight beyond it.
fn ladder_state<T: Real>(first: usize, lead: T, ratio: impl Fn(usize) -> T, n_cut: usize) -> (Vec<Complex<T>>, T, usize) {
    let mut ladder = Vec::new();
    let mut c = lead;
    let mut n = first;
    loop {
        ladder.push((n, c));
        if (n >= n_cut && c * c < T::lit(1e-30)) || n > 20_000 {
            break;
        }
        c = c * ratio(n);
        n += 2;
    }
    let mut amps = vec![Complex::zero(); n_cut + 1];
    let mut tail = T::zero();
    for &(level, c) in &ladder {
        if level <= n_cut {
            amps[level] = Complex::new(c, T::zero());
        } else {
            tail += c * c;
        }
    }
    // smallest truncation whose neglected weight is below the limit
    let mut suggested = first;
    let mut acc = T::zero();
    for &(level, c) in ladder.iter().rev() {
        acc += c * c;
        if acc > T::lit(TRUNCATION_TAIL) {
            suggested = level;
            break;
        }
    }
    (amps, tail, suggested)
}

fn check_r<T: Real>(r: T) -> Result<()> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(invalid("r", format!("squeezing parameter must be finite and non-negative, got {r}")));
    }
    Ok(())
}

fn check_unit<T: Real>(name: &'static str, v: T) -> Result<()> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// `S(r)|0>` with `S(r) = exp(r (a^2 - a†^2) / 2)`, so the `x` quadrature
/// (phase 0) is the squeezed one.
pub fn squeezed_vacuum<T: Real>(r: T, n_cut: usize) -> Result<FockDensityMatrix<T>> {
    check_r(r)?;
    let t = r.tanh();
    let lead = T::one() / r.cosh().sqrt();
    // c_{2m+2} = -tanh(r) sqrt((2m+1) / (2m+2)) c_{2m}
    let ratio = |n: usize| -t * (T::from_usize_lossy(n + 1) / T::from_usize_lossy(n + 2)).sqrt();
    let (amps, tail, suggested) = ladder_state(0, lead, ratio, n_cut);
    if tail > T::lit(TRUNCATION_TAIL) {
        return Err(Error::Truncation { n_cut, tail: tail.as_f64(), suggested });
    }
    FockDensityMatrix::from_pure(&amps)
}

/// `S(r)|1>`, which is proportional to `a S(r)|0>`. Used as an independent
/// check of the subtraction route.
pub fn squeezed_single_photon<T: Real>(r: T, n_cut: usize) -> Result<FockDensityMatrix<T>> {
    check_r(r)?;
    if n_cut < 1 {
        return Err(Error::Truncation { n_cut, tail: 1.0, suggested: 1 });
    }
    let t = r.tanh();
    let lead = T::one() / r.cosh().powi(3).sqrt();
    // c_{2m+3} = -tanh(r) sqrt((2m+3) / (2m+2)) c_{2m+1}
    let ratio = |n: usize| -t * (T::from_usize_lossy(n + 2) / T::from_usize_lossy(n + 1)).sqrt();
    let (amps, tail, suggested) = ladder_state(1, lead, ratio, n_cut);
    if tail > T::lit(TRUNCATION_TAIL) {
        return Err(Error::Truncation { n_cut, tail: tail.as_f64(), suggested });
    }
    FockDensityMatrix::from_pure(&amps)
}

/// `a rho a† / tr(a rho a†)`. The top level of the result is empty.
pub fn subtract_photon<T: Real>(rho: &FockDensityMatrix<T>) -> Result<FockDensityMatrix<T>> {
    let d = rho.dim();
    let sqrt_n: Vec<T> = (0..d).map(|n| T::from_usize_lossy(n).sqrt()).collect();
    let out = Array2::from_shape_fn((d, d), |(m, n)| {
        if m + 1 < d && n + 1 < d {
            rho.get(m + 1, n + 1).scale(sqrt_n[m + 1] * sqrt_n[n + 1])
        } else {
            Complex::zero()
        }
    });
    let norm: T = (0..d).map(|m| out[[m, m]].re).sum();
    if !(norm > T::epsilon()) {
        return Err(Error::ZeroNorm);
    }
    Ok(FockDensityMatrix::from_channel(out.mapv(|z| z.unscale(norm))))
}

/// The heralded state `a S(r)|0>` normalized, truncated at `n_cut`.
///
/// At `r = 0` the subtraction has nothing to act on; the state is then the
/// `r -> 0` limit, the single photon `|1>`.
pub fn photon_subtracted_squeezed_vacuum<T: Real>(r: T, n_cut: usize) -> Result<FockDensityMatrix<T>> {
    check_r(r)?;
    if r == T::zero() {
        return FockDensityMatrix::number_state(1, n_cut);
    }
    let sq = squeezed_vacuum(r, n_cut + 1).map_err(|e| match e {
        Error::Truncation { tail, suggested, .. } => Error::Truncation { n_cut, tail, suggested },
        other => other,
    })?;
    subtract_photon(&sq)?.with_n_cut(n_cut)
}

/// Beam-splitter loss with transmissivity `eta`:
/// `rho'_mn = sum_k sqrt(C(m+k, k) C(n+k, k)) eta^{(m+n)/2} (1-eta)^k rho_{m+k, n+k}`.
pub fn loss_channel<T: Real>(rho: &FockDensityMatrix<T>, eta: T) -> Result<FockDensityMatrix<T>> {
    check_unit("eta", eta)?;
    let d = rho.dim();
    // sqrt of binomial coefficients by Pascal's rule
    let mut sqrt_binom = Array2::<T>::zeros((d, d));
    {
        let mut binom = Array2::<T>::zeros((d, d));
        for j in 0..d {
            binom[[j, 0]] = T::one();
            for k in 1..=j {
                binom[[j, k]] = binom[[j - 1, k - 1]] + if k < j { binom[[j - 1, k]] } else { T::zero() };
            }
        }
        sqrt_binom.zip_mut_with(&binom, |s, &b| *s = b.sqrt());
    }
    let sqrt_eta = eta.sqrt();
    let lost = T::one() - eta;
    let eta_pow: Vec<T> = (0..2 * d).map(|k| sqrt_eta.powi(k as i32)).collect();
    let lost_pow: Vec<T> = (0..d).map(|k| lost.powi(k as i32)).collect();
    let out = Array2::from_shape_fn((d, d), |(m, n)| {
        let mut acc = Complex::zero();
        for k in 0..d - m.max(n) {
            let w = sqrt_binom[[m + k, k]] * sqrt_binom[[n + k, k]] * lost_pow[k];
            acc += rho.get(m + k, n + k).scale(w);
        }
        acc.scale(eta_pow[m + n])
    });
    Ok(FockDensityMatrix::from_channel(out))
}

/// `(1 - zeta) rho_sub + zeta rho_sq`: a dark count heralds the state without
/// any subtraction.
pub fn dark_count_mix<T: Real>(
    rho_subtracted: &FockDensityMatrix<T>,
    rho_squeezed: &FockDensityMatrix<T>,
    zeta: T,
) -> Result<FockDensityMatrix<T>> {
    check_unit("zeta", zeta)?;
    rho_subtracted.mix(rho_squeezed, zeta)
}

/// The model state `(1 - zeta) L_eta[a S|0>] + zeta L_eta[S|0>]`.
///
/// The truncation is doubled automatically (up to [`MAX_N_CUT`]) when the
/// requested one is too small for `r`.
pub fn model_state<T: Real>(params: &ModelParams<T>, n_cut: usize) -> Result<FockDensityMatrix<T>> {
    params.validate()?;
    let mut n = n_cut.max(1);
    loop {
        match model_state_at(params, n) {
            Err(Error::Truncation { suggested, .. }) if n < MAX_N_CUT => {
                n = (2 * n).max(suggested + 1).min(MAX_N_CUT);
            }
            other => return other,
        }
    }
}

fn model_state_at<T: Real>(params: &ModelParams<T>, n_cut: usize) -> Result<FockDensityMatrix<T>> {
    let sq = squeezed_vacuum(params.r, n_cut)?;
    let sub = photon_subtracted_squeezed_vacuum(params.r, n_cut)?;
    dark_count_mix(&loss_channel(&sub, params.eta)?, &loss_channel(&sq, params.eta)?, params.zeta)
}
