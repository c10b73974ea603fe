use std::io::Write;

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fock::FockDensityMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

pub const WIGNER_SCHEMA: &str = "wigner-grid/v1";

/// Wigner function at `(x, p)` with vacuum variance 1/2.
///
/// Uses `W_{n+d,n} = (-1)^n / pi * sqrt(n! / (n+d)!) * z^{d/2} e^{-i d phi}
/// e^{-z/2} L_n^{(d)}(z)` with `z = 2 (x^2 + p^2)`, `phi = atan2(p, x)`;
/// the scaled Laguerre factors are generated by a three-term recurrence
/// that never forms factorials.
pub fn wigner_value<T: Real>(rho: &FockDensityMatrix<T>, x: T, p: T) -> T {
    let d = rho.dim();
    let z = T::lit(2.0) * (x * x + p * p);
    let phase = Complex::from_polar(T::one(), -p.atan2(x));
    let envelope = (-z * T::lit(0.5)).exp();
    let mut total = T::zero();
    // lead = z^{k/2} / sqrt(k!)
    let mut lead = T::one();
    let mut rot = Complex::new(T::one(), T::zero());
    for k in 0..d {
        if k > 0 {
            lead *= (z / T::from_usize_lossy(k)).sqrt();
            rot = rot * phase;
        }
        let kf = T::from_usize_lossy(k);
        let mut prev = T::zero();
        let mut cur = lead;
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in 0..d - k {
            let term = rho.get(n + k, n).scale(cur);
            acc += if n % 2 == 0 { term } else { -term };
            let nf = T::from_usize_lossy(n);
            let next = ((T::lit(2.0) * nf + T::one() + kf - z) * cur - (nf * (nf + kf)).sqrt() * prev)
                / ((nf + T::one()) * (nf + T::one() + kf)).sqrt();
            prev = cur;
            cur = next;
        }
        let contrib = (acc * rot).re;
        total += if k == 0 { contrib } else { T::lit(2.0) * contrib };
    }
    total * envelope / T::PI()
}

/// Rectangular phase-space grid specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub x_min: T,
    pub x_max: T,
    pub nx: usize,
    pub p_min: T,
    pub p_max: T,
    pub np: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn square(half_width: T, n: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, nx: n, p_min: -half_width, p_max: half_width, np: n }
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.np < 2 {
            return Err(invalid("grid", "needs at least two points per axis"));
        }
        if !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(invalid("grid", "axis bounds must be increasing"));
        }
        Ok(())
    }

    pub fn x_axis(&self) -> Vec<T> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn p_axis(&self) -> Vec<T> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

impl Default for GridSpec<f64> {
    /// `[-6, 6]^2` with 241 points per axis (spacing 0.05).
    fn default() -> Self {
        Self::square(6.0, 241)
    }
}

pub(crate) fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n).map(|i| a + step * T::from_usize_lossy(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Model,
    Reconstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: GridSource,
    pub n_cut: usize,
    /// Name of the dataset a reconstructed grid came from.
    pub dataset: Option<String>,
}

/// Wigner function sampled on a rectangular grid; `values[[i, j]] = W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid<T> {
    pub x_axis: Vec<T>,
    pub p_axis: Vec<T>,
    pub values: Array2<T>,
    pub provenance: Provenance,
}

impl<T: Real> WignerGrid<T> {
    pub fn dx(&self) -> T {
        self.x_axis[1] - self.x_axis[0]
    }

    pub fn dp(&self) -> T {
        self.p_axis[1] - self.p_axis[0]
    }

    /// Trapezoidal integral of `W` over the grid.
    pub fn integral(&self) -> T {
        let (nx, np) = self.values.dim();
        let w = |i: usize, n: usize| if i == 0 || i + 1 == n { T::lit(0.5) } else { T::one() };
        let mut acc = T::zero();
        for i in 0..nx {
            for j in 0..np {
                acc += w(i, nx) * w(j, np) * self.values[[i, j]];
            }
        }
        acc * self.dx() * self.dp()
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, x: T, p: T) -> Option<T> {
        let locate = |axis: &[T], v: T| -> Option<(usize, T)> {
            let h = axis[1] - axis[0];
            let u = (v - axis[0]) / h;
            let last = T::from_usize_lossy(axis.len() - 1);
            if u < -T::tol(1e-9) || u > last + T::tol(1e-9) {
                return None;
            }
            let u = u.max(T::zero()).min(last);
            let i = u.floor().to_usize()?.min(axis.len() - 2);
            Some((i, u - T::from_usize_lossy(i)))
        };
        let (i, fx) = locate(&self.x_axis, x)?;
        let (j, fp) = locate(&self.p_axis, p)?;
        let v = &self.values;
        let one = T::one();
        Some(
            v[[i, j]] * (one - fx) * (one - fp)
                + v[[i + 1, j]] * fx * (one - fp)
                + v[[i, j + 1]] * (one - fx) * fp
                + v[[i + 1, j + 1]] * fx * fp,
        )
    }

    /// Three columns `x p W`, with a blank line between rows of constant `x`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# x p W")?;
        for (i, x) in self.x_axis.iter().enumerate() {
            for (j, p) in self.p_axis.iter().enumerate() {
                writeln!(out, "{} {} {}", x.as_f64(), p.as_f64(), self.values[[i, j]].as_f64())?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> WignerGridJson {
        WignerGridJson {
            schema: WIGNER_SCHEMA.to_string(),
            x_axis: self.x_axis.iter().map(|v| v.as_f64()).collect(),
            p_axis: self.p_axis.iter().map(|v| v.as_f64()).collect(),
            values: self.values.iter().map(|v| v.as_f64()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, &self.to_json())?;
        Ok(())
    }
}

/// Serialized grid; `values` is row-major with `x` as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGridJson {
    pub schema: String,
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl WignerGridJson {
    pub fn into_grid(self) -> Result<WignerGrid<f64>> {
        if self.schema != WIGNER_SCHEMA {
            return Err(Error::Parse(format!("unsupported schema `{}`", self.schema)));
        }
        let shape = (self.x_axis.len(), self.p_axis.len());
        let values = Array2::from_shape_vec(shape, self.values).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(WignerGrid { x_axis: self.x_axis, p_axis: self.p_axis, values, provenance: self.provenance })
    }
}

/// Largest normalization defect accepted from [`wigner_grid`].
pub const GRID_NORM_TOLERANCE: f64 = 1e-3;

/// Evaluates the Wigner function of `rho` on `spec`.
///
/// The grid must cover five vacuum standard deviations on both axes and
/// integrate to one within [`GRID_NORM_TOLERANCE`].
pub fn wigner_grid<T: Real>(rho: &FockDensityMatrix<T>, spec: &GridSpec<T>) -> Result<WignerGrid<T>> {
    spec.validate()?;
    let reach = T::lit(5.0) * T::FRAC_1_SQRT_2();
    if spec.x_min > -reach || spec.x_max < reach || spec.p_min > -reach || spec.p_max < reach {
        return Err(invalid("grid", "must cover at least five vacuum widths (|x|, |p| <= 3.54) on each axis"));
    }
    let x_axis = spec.x_axis();
    let p_axis = spec.p_axis();
    let rows: Vec<Vec<T>> =
        x_axis.par_iter().map(|&x| p_axis.iter().map(|&p| wigner_value(rho, x, p)).collect()).collect();
    let values = Array2::from_shape_fn((spec.nx, spec.np), |(i, j)| rows[i][j]);
    let grid = WignerGrid {
        x_axis,
        p_axis,
        values,
        provenance: Provenance { source: GridSource::Model, n_cut: rho.n_cut(), dataset: None },
    };
    let defect = (grid.integral() - T::one()).abs();
    if defect > T::lit(GRID_NORM_TOLERANCE) {
        return Err(Error::CoarseGrid(defect.as_f64()));
    }
    Ok(grid)
}
