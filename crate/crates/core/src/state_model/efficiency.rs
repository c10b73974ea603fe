use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Value of the Wigner function at the origin for the lossy photon-subtracted
/// squeezed vacuum with dark-count fraction `zeta`.
pub fn w00_closed_form<T: Real>(r: T, eta: T, zeta: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let s2 = r.sinh().powi(2);
    let num = one - two * eta + two * zeta * eta * (one + two * (one - eta) * s2);
    let den = T::PI() * (one + T::lit(4.0) * eta * (one - eta) * s2).powf(T::lit(1.5));
    num / den
}

fn check_unit<T: Real>(name: &'static str, v: T) -> Result<()> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// `eta = eta0 eta_kappa^2`.
pub fn overall_efficiency<T: Real>(eta0: T, eta_kappa: T) -> Result<T> {
    check_unit("eta0", eta0)?;
    check_unit("eta_kappa", eta_kappa)?;
    Ok(eta0 * eta_kappa * eta_kappa)
}

/// Efficiencies of the optical path before a mode function is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBudget<T> {
    pub eta_opo: T,
    pub eta_pr: T,
    pub eta_vis: T,
    pub eta_hom: T,
}

impl EfficiencyBudget<f64> {
    /// OPO escape 0.98, propagation 0.95, visibility 0.98, homodyne 0.95.
    pub const MEASURED: Self = Self { eta_opo: 0.98, eta_pr: 0.95, eta_vis: 0.98, eta_hom: 0.95 };
}

/// `eta0 = eta_opo eta_pr eta_vis^2 eta_hom`.
pub fn budget_eta0<T: Real>(b: &EfficiencyBudget<T>) -> Result<T> {
    check_unit("eta_opo", b.eta_opo)?;
    check_unit("eta_pr", b.eta_pr)?;
    check_unit("eta_vis", b.eta_vis)?;
    check_unit("eta_hom", b.eta_hom)?;
    Ok(b.eta_opo * b.eta_pr * b.eta_vis * b.eta_vis * b.eta_hom)
}

/// Parameters of the model state. `eta` is the overall efficiency and is
/// kept equal to `eta0 * eta_kappa^2` by the constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub r: T,
    pub eta: T,
    pub zeta: T,
    pub eta0: T,
    pub eta_kappa: T,
}

impl<T: Real> ModelParams<T> {
    pub fn from_components(r: T, eta0: T, eta_kappa: T, zeta: T) -> Result<Self> {
        let eta = overall_efficiency(eta0, eta_kappa)?;
        let p = Self { r, eta, zeta, eta0, eta_kappa };
        p.validate()?;
        Ok(p)
    }

    /// Perfect mode matching, so `eta0 = eta`.
    pub fn with_eta(r: T, eta: T, zeta: T) -> Result<Self> {
        Self::from_components(r, eta, T::one(), zeta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= T::zero()) || !self.r.is_finite() {
            return Err(invalid("r", format!("must be finite and non-negative, got {}", self.r)));
        }
        check_unit("eta", self.eta)?;
        check_unit("zeta", self.zeta)?;
        check_unit("eta0", self.eta0)?;
        check_unit("eta_kappa", self.eta_kappa)?;
        Ok(())
    }

    /// Same state with a different mode-matching parameter.
    pub fn with_eta_kappa(&self, eta_kappa: T) -> Result<Self> {
        Self::from_components(self.r, self.eta0, eta_kappa, self.zeta)
    }

    pub fn w00(&self) -> T {
        w00_closed_form(self.r, self.eta, self.zeta)
    }
}

/// Herald bookkeeping. `tap_reflectivity` is recorded but enters no formula:
/// the model assumes a weak tap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig<T> {
    pub tap_reflectivity: T,
    pub total_count_rate: T,
    pub dark_count_rate: T,
}

impl<T: Real> ExperimentConfig<T> {
    pub fn new(tap_reflectivity: T, total_count_rate: T, dark_count_rate: T) -> Result<Self> {
        let c = Self { tap_reflectivity, total_count_rate, dark_count_rate };
        c.zeta()?;
        check_unit("tap_reflectivity", tap_reflectivity)?;
        Ok(c)
    }

    /// `dark_count_rate / total_count_rate`.
    pub fn zeta(&self) -> Result<T> {
        if !(self.total_count_rate > T::zero()) {
            return Err(invalid("total_count_rate", "must be positive"));
        }
        if !(self.dark_count_rate >= T::zero()) || self.dark_count_rate > self.total_count_rate {
            return Err(invalid("dark_count_rate", "must lie between 0 and the total count rate"));
        }
        Ok(self.dark_count_rate / self.total_count_rate)
    }
}
