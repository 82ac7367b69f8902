//! Cyclic Jacobi eigensolver for small real-symmetric matrices.

use crate::error::{QkdError, Result};
use crate::scalar::Real;

use super::matrix::HermitianMatrix;

/// Sweep budget of the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius tolerance, relative to `max(1, ‖M‖_F)`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;

/// Eigen-decomposition `M = V·diag(w)·Vᵀ` with eigenvalues in descending
/// order. `vectors[i]` belongs to `values[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub sweeps: usize,
}

impl<T: Real> Eigen<T> {
    /// `V·diag(f(w))·Vᵀ`.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Result<HermitianMatrix<T>> {
        let n = self.values.len();
        let fw: Vec<T> = self.values.iter().map(|&w| f(w)).collect();
        HermitianMatrix::from_fn(n, |i, j| {
            (0..n).fold(T::zero(), |acc, k| {
                acc + fw[k] * self.vectors[k][i] * self.vectors[k][j]
            })
        })
    }

    pub fn reconstruct(&self) -> Result<HermitianMatrix<T>> {
        self.map_values(|w| w)
    }

    pub fn min_value(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of `m`.
pub fn symmetric_eig<T: Real>(m: &HermitianMatrix<T>) -> Result<Eigen<T>> {
    let n = m.dim();
    let mut a: Vec<T> = m.entries().to_vec();
    // v is stored row-major with eigenvectors as columns
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }

    let tol = T::lit(OFF_DIAGONAL_TOL).max(T::epsilon() * T::lit(64.0))
        * T::one().max(m.frobenius_norm());
    let off_norm = |a: &[T]| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(QkdError::NoConvergence {
                sweeps,
                off_norm: off.as_f64(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // A ← Jᵀ A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // descending; ties keep the original index order
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    Ok(Eigen {
        values,
        vectors,
        sweeps,
    })
}

/// `‖M‖₁ = Σ|wᵢ|`.
pub fn trace_norm<T: Real>(m: &HermitianMatrix<T>) -> Result<T> {
    let eig = symmetric_eig(m)?;
    Ok(eig.values.iter().fold(T::zero(), |acc, &w| acc + w.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orthonormality_defect(e: &Eigen<f64>) -> f64 {
        let n = e.values.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| e.vectors[i][k] * e.vectors[j][k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_spectrum() {
        let e = symmetric_eig(&HermitianMatrix::<f64>::identity(3).unwrap()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn diagonal_spectrum() {
        let e = symmetric_eig(&HermitianMatrix::<f64>::diagonal(&[-1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![2.0, -1.0]);
        assert_eq!(e.vectors[0], vec![0.0, 1.0]);
        assert_eq!(e.vectors[1], vec![1.0, 0.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = HermitianMatrix::<f64>::new(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = symmetric_eig(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_norm_values() {
        assert_eq!(
            trace_norm(&HermitianMatrix::<f64>::identity(2).unwrap()).unwrap(),
            2.0
        );
        assert_eq!(
            trace_norm(&HermitianMatrix::<f64>::diagonal(&[1.0, -1.0]).unwrap()).unwrap(),
            2.0
        );
    }

    #[test]
    fn largest_supported_size() {
        let m = HermitianMatrix::<f64>::from_fn(64, |i, j| {
            1.0 / (1.0 + i as f64 + j as f64) + if i == j { 0.5 } else { 0.0 }
        })
        .unwrap();
        let e = symmetric_eig(&m).unwrap();
        assert!(e.reconstruct().unwrap().max_abs_diff(&m) < 1e-10);
        assert!(orthonormality_defect(&e) < 1e-12);
    }

    fn arb_symmetric(n: usize) -> impl Strategy<Value = HermitianMatrix<f64>> {
        proptest::collection::vec(-5.0f64..5.0, n * n)
            .prop_map(move |raw| HermitianMatrix::from_fn(n, |i, j| raw[i * n + j]).unwrap())
    }

    fn rotation(n: usize, angles: &[f64]) -> Vec<f64> {
        // product of Givens rotations in successive planes
        let mut r = vec![0.0; n * n];
        for i in 0..n {
            r[i * n + i] = 1.0;
        }
        for (k, &th) in angles.iter().enumerate() {
            let p = k % n;
            let q = (k + 1) % n;
            if p == q {
                continue;
            }
            let (c, s) = (th.cos(), th.sin());
            for row in 0..n {
                let a = r[row * n + p];
                let b = r[row * n + q];
                r[row * n + p] = c * a - s * b;
                r[row * n + q] = s * a + c * b;
            }
        }
        r
    }

    proptest! {
        #[test]
        fn reconstruction_and_order((n, m) in (1usize..9).prop_flat_map(|n| (Just(n), arb_symmetric(n)))) {
            let e = symmetric_eig(&m).unwrap();
            prop_assert!(e.reconstruct().unwrap().max_abs_diff(&m) <= 1e-10);
            prop_assert!(orthonormality_defect(&e) <= 1e-12);
            for w in e.values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let _ = n;
        }

        #[test]
        fn trace_norm_rotation_invariant(
            m in arb_symmetric(5),
            angles in proptest::collection::vec(-3.2f64..3.2, 12),
        ) {
            let r = rotation(5, &angles);
            let rotated = m.conjugate(&r).unwrap();
            let a = trace_norm(&m).unwrap();
            let b = trace_norm(&rotated).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
            let e = symmetric_eig(&m).unwrap();
            let direct: f64 = e.values.iter().map(|w| w.abs()).sum();
            prop_assert!((a - direct).abs() <= 1e-14 * a.max(1.0));
        }
    }
}
