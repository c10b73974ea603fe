use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scalar::Real;

pub const DENSITY_SCHEMA: &str = "fock-density-matrix/v1";

/// Density operator truncated to photon numbers `0..=n_cut`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix<T> {
    elements: CMatrix<T>,
}

impl<T: Real> FockDensityMatrix<T> {
    /// Validating constructor for externally supplied matrices.
    pub fn new(elements: CMatrix<T>) -> Result<Self> {
        let rho = Self { elements };
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix produced by an exact channel. Only the Hermitian part
    /// is kept so rounding never breaks symmetry.
    pub(crate) fn from_channel(elements: CMatrix<T>) -> Self {
        Self { elements: linalg::hermitian_part(&elements) }
    }

    pub fn from_pure(amplitudes: &[Complex<T>]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm > T::zero()) {
            return Err(Error::ZeroNorm);
        }
        let n = amplitudes.len();
        let elements = Array2::from_shape_fn((n, n), |(i, j)| (amplitudes[i] * amplitudes[j].conj()).unscale(norm));
        Ok(Self::from_channel(elements))
    }

    pub fn vacuum(n_cut: usize) -> Self {
        Self::number_state(0, n_cut).expect("vacuum fits any truncation")
    }

    pub fn number_state(n: usize, n_cut: usize) -> Result<Self> {
        if n > n_cut {
            return Err(Error::InvalidState(format!("|{n}> does not fit below n_cut = {n_cut}")));
        }
        let mut elements = Array2::zeros((n_cut + 1, n_cut + 1));
        elements[[n, n]] = Complex::new(T::one(), T::zero());
        Ok(Self { elements })
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let m = &self.elements;
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidState(format!("matrix shape {:?} is not square", m.dim())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite element".into()));
        }
        let herm_tol = T::tol(1e-12);
        let n = m.nrows();
        for i in 0..n {
            for j in 0..=i {
                if (m[[i, j]] - m[[j, i]].conj()).norm() > herm_tol {
                    return Err(Error::InvalidState(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let tr = linalg::trace(m).re;
        if (tr - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -T::tol(1e-10) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn elements(&self) -> &CMatrix<T> {
        &self.elements
    }

    pub fn into_elements(self) -> CMatrix<T> {
        self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn n_cut(&self) -> usize {
        self.dim() - 1
    }

    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.elements[[m, n]]
    }

    pub fn population(&self, n: usize) -> T {
        if n < self.dim() {
            self.elements[[n, n]].re
        } else {
            T::zero()
        }
    }

    pub fn trace(&self) -> T {
        linalg::trace(&self.elements).re
    }

    pub fn mean_photon_number(&self) -> T {
        (0..self.dim()).map(|n| T::from_usize_lossy(n) * self.population(n)).sum()
    }

    /// Expectation of the parity operator `(-1)^n`; equals `pi W(0, 0)`.
    pub fn parity(&self) -> T {
        (0..self.dim())
            .map(|n| if n % 2 == 0 { self.population(n) } else { -self.population(n) })
            .sum()
    }

    pub fn min_eigenvalue(&self) -> T {
        linalg::hermitian_eigen(&self.elements).values[0]
    }

    /// Applies the phase shift `exp(-i theta n)`: `rho_mn -> rho_mn e^{-i (m - n) theta}`.
    /// The Wigner function of the result is that of `self` rotated by `-theta`.
    pub fn rotated(&self, theta: T) -> Self {
        let elements = Array2::from_shape_fn(self.elements.dim(), |(m, n)| {
            let k = T::from_usize_lossy(m) - T::from_usize_lossy(n);
            self.elements[[m, n]] * Complex::from_polar(T::one(), -k * theta)
        });
        Self { elements }
    }

    /// Pads with empty levels, or drops levels carrying less than `1e-10`
    /// of population and renormalizes.
    pub fn with_n_cut(&self, n_cut: usize) -> Result<Self> {
        let d = n_cut + 1;
        if d < self.dim() {
            let dropped: T = (d..self.dim()).map(|n| self.population(n)).sum();
            if dropped > T::tol(1e-10) {
                return Err(Error::Truncation { n_cut, tail: dropped.as_f64(), suggested: self.n_cut() });
            }
        }
        let mut elements = Array2::from_shape_fn((d, d), |(i, j)| {
            if i < self.dim() && j < self.dim() {
                self.elements[[i, j]]
            } else {
                Complex::zero()
            }
        });
        let tr = linalg::trace(&elements).re;
        elements.mapv_inplace(|z| z.unscale(tr));
        Ok(Self::from_channel(elements))
    }

    /// `(1 - w) self + w other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.n_cut(), other.n_cut()));
        }
        let keep = T::one() - w;
        Ok(Self::from_channel(&self.elements.mapv(|z| z.scale(keep)) + &other.elements.mapv(|z| z.scale(w))))
    }

    /// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.n_cut(), other.n_cut()));
        }
        let s = linalg::psd_sqrt(&self.elements);
        let inner = linalg::matmul(&linalg::matmul(&s, &other.elements), &s);
        let root: T = linalg::hermitian_eigen(&inner).values.iter().map(|&l| l.max(T::zero()).sqrt()).sum();
        Ok((root * root).min(T::one()))
    }

    /// Trace distance `||self - other||_1 / 2`.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.n_cut(), other.n_cut()));
        }
        Ok(linalg::trace_norm(&(&self.elements - &other.elements)) * T::lit(0.5))
    }

    pub fn to_json(&self) -> DensityMatrixJson {
        DensityMatrixJson {
            schema: DENSITY_SCHEMA.to_string(),
            dim: self.dim(),
            n_cut: self.n_cut(),
            elements: self.elements.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
        }
    }

    pub fn from_json(doc: &DensityMatrixJson) -> Result<Self> {
        if doc.schema != DENSITY_SCHEMA {
            return Err(Error::Parse(format!("unsupported schema `{}`", doc.schema)));
        }
        if doc.dim != doc.n_cut + 1 || doc.elements.len() != doc.dim * doc.dim {
            return Err(Error::Parse("density matrix dimensions are inconsistent".into()));
        }
        let elements = Array2::from_shape_fn((doc.dim, doc.dim), |(i, j)| {
            let [re, im] = doc.elements[i * doc.dim + j];
            Complex::new(T::lit(re), T::lit(im))
        });
        Self::new(elements)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.to_json())?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let doc: DensityMatrixJson = serde_json::from_reader(input)?;
        Self::from_json(&doc)
    }
}

/// Serialized form: `elements` holds `[re, im]` pairs in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub schema: String,
    pub dim: usize,
    pub n_cut: usize,
    pub elements: Vec<[f64; 2]>,
}
