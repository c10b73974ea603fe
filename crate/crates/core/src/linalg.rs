//! Small dense complex linear algebra on `ndarray` matrices.
//!
//! Density matrices here are at most a few dozen levels, so a cyclic Jacobi
//! eigensolver is both simple and accurate enough.

use ndarray::Array2;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

pub type CMatrix<T> = Array2<Complex<T>>;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Column `j` is the eigenvector of `values[j]`.
    pub vectors: CMatrix<T>,
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { Complex::one() } else { Complex::zero() })
}

pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.t().mapv(|z| z.conj())
}

pub fn hermitian_part<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let half = T::lit(0.5);
    let n = a.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| (a[[i, j]] + a[[j, i]].conj()).scale(half))
}

pub fn trace<T: Real>(a: &CMatrix<T>) -> Complex<T> {
    a.diag().iter().fold(Complex::zero(), |acc, &z| acc + z)
}

pub fn frobenius_norm_sq<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot
/// with a diagonal unitary, then applies a real Givens rotation.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> HermitianEigen<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigen-decomposition needs a square matrix");
    let mut m = hermitian_part(a);
    let mut v = identity::<T>(n);
    let eps = T::epsilon();

    for _sweep in 0..64 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let s = m[[i, j]].norm_sqr();
                total += s;
                if i != j {
                    off += s;
                }
            }
        }
        if off <= eps * eps * total || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                // phase of the pivot, e^{i phi}
                let phase = apq.unscale(mag);
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let e_minus = phase.conj();
                // columns: U_pp = c, U_qp = -s e^{-i phi}, U_pq = s, U_qq = c e^{-i phi}
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp.scale(c) - (e_minus * mkq).scale(s);
                    m[[k, q]] = mkp.scale(s) + (e_minus * mkq).scale(c);
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp.scale(c) - (e_minus * vkq).scale(s);
                    v[[k, q]] = vkp.scale(s) + (e_minus * vkq).scale(c);
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = mpk.scale(c) - (phase * mqk).scale(s);
                    m[[q, k]] = mpk.scale(s) + (phase * mqk).scale(c);
                }
                m[[p, q]] = Complex::zero();
                m[[q, p]] = Complex::zero();
                m[[p, p]] = Complex::new(m[[p, p]].re, T::zero());
                m[[q, q]] = Complex::new(m[[q, q]].re, T::zero());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.partial_cmp(&m[[j, j]].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[[i, i]].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    HermitianEigen { values, vectors }
}

/// Rebuilds `V f(Λ) V†` from a decomposition.
pub fn spectral_map<T: Real>(eig: &HermitianEigen<T>, f: impl Fn(T) -> T) -> CMatrix<T> {
    let n = eig.values.len();
    let mapped: Vec<T> = eig.values.iter().map(|&l| f(l)).collect();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let mut acc = Complex::zero();
        for (k, &w) in mapped.iter().enumerate() {
            acc += (eig.vectors[[i, k]] * eig.vectors[[j, k]].conj()).scale(w);
        }
        acc
    })
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm<T: Real>(a: &CMatrix<T>) -> T {
    hermitian_eigen(a).values.iter().map(|l| l.abs()).sum()
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues from rounding are clipped.
pub fn psd_sqrt<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    spectral_map(&hermitian_eigen(a), |l| l.max(T::zero()).sqrt())
}

/// Nearest unit-trace PSD matrix obtained by clipping negative eigenvalues.
pub fn project_to_density<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let clipped = spectral_map(&hermitian_eigen(a), |l| l.max(T::zero()));
    let tr = trace(&clipped).re;
    clipped.mapv(|z| z.unscale(tr))
}

/// Matrix product that stays generic over the scalar.
pub fn matmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.dot(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_hermitian(n: usize) -> CMatrix<f64> {
        let raw = Array2::from_shape_fn((n, n), |(i, j)| {
            let x = (i * 7 + j * 3) as f64;
            Complex::new((x * 0.37).sin(), (x * 0.11 + i as f64).cos() * if i == j { 0.0 } else { 1.0 })
        });
        hermitian_part(&raw)
    }

    #[test]
    fn eigen_reconstructs_input() {
        let a = sample_hermitian(9);
        let eig = hermitian_eigen(&a);
        let back = spectral_map(&eig, |l| l);
        let err: f64 = (&back - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "reconstruction error {err}");
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let vh_v = matmul(&adjoint(&eig.vectors), &eig.vectors);
        let id = identity::<f64>(9);
        let orth: f64 = (&vh_v - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(orth < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_keeps_orthonormal_vectors() {
        // rank-one projector: eight-fold degenerate zero eigenvalue
        let n = 9;
        let psi: Vec<Complex<f64>> = (0..n).map(|k| Complex::from_polar(1.0 / 3.0, k as f64 * 0.4)).collect();
        let a = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        let eig = hermitian_eigen(&a);
        assert!((eig.values[n - 1] - 1.0).abs() < 1e-12);
        assert!(eig.values[..n - 1].iter().all(|l| l.abs() < 1e-12));
        let vh_v = matmul(&adjoint(&eig.vectors), &eig.vectors);
        let orth: f64 = (&vh_v - &identity::<f64>(n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(orth < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = sample_hermitian(6);
        let psd = matmul(&a, &adjoint(&a));
        let s = psd_sqrt(&psd);
        let back = matmul(&s, &s);
        let err: f64 = (&back - &psd).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
    }
}
