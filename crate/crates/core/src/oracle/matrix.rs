use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::scalar::Real;

/// Largest dimension accepted by the oracle.
pub const MAX_DIM: usize = 64;

/// Dense real-symmetric (hence Hermitian) matrix, row-major.
///
/// Every state and Gram matrix the oracle builds has real entries in a
/// suitable basis, so the imaginary part is never stored.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Real> HermitianMatrix<T> {
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(QkdError::Matrix(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(QkdError::Matrix(format!(
                "{} entries for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(QkdError::Matrix("non-finite entry".into()));
        }
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if (a - b).abs() > tol {
                    return Err(QkdError::Matrix(format!(
                        "not symmetric at ({i},{j}): {} vs {}",
                        a.as_f64(),
                        b.as_f64()
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from the upper triangle of `f`, mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut entries = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let x = f(i, j);
                entries[i * dim + j] = x;
                entries[j * dim + i] = x;
            }
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(values: &[T]) -> Result<Self> {
        Self::from_fn(
            values.len(),
            |i, j| if i == j { values[i] } else { T::zero() },
        )
    }

    /// Outer-product sum `Σ_k w_k·|v_k⟩⟨v_k|`.
    pub fn from_outer_products(dim: usize, terms: &[(T, &[T])]) -> Result<Self> {
        for (_, v) in terms {
            if v.len() != dim {
                return Err(QkdError::Matrix("vector length mismatch".into()));
            }
        }
        Self::from_fn(dim, |i, j| {
            terms
                .iter()
                .fold(T::zero(), |acc, (w, v)| acc + *w * v[i] * v[j])
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| (0..self.dim).fold(T::zero(), |acc, j| acc + self.get(i, j) * v[j]))
            .collect()
    }

    /// `R·M·Rᵀ` for a row-major `dim×dim` matrix `R`.
    pub fn conjugate(&self, r: &[T]) -> Result<Self> {
        let n = self.dim;
        if r.len() != n * n {
            return Err(QkdError::Matrix("rotation has wrong size".into()));
        }
        let mut rm = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                rm[i * n + j] =
                    (0..n).fold(T::zero(), |acc, k| acc + r[i * n + k] * self.get(k, j));
            }
        }
        Self::from_fn(n, |i, j| {
            (0..n).fold(T::zero(), |acc, k| acc + rm[i * n + k] * r[j * n + k])
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.dim != other.dim {
            return Err(QkdError::Matrix(format!(
                "dimension mismatch {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl<T: fmt::Debug> fmt::Debug for HermitianMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:?}", self.entries[i * self.dim + j]))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(HermitianMatrix::<f64>::new(2, vec![1.0, 2.0, 2.1, 1.0]).is_err());
        assert!(HermitianMatrix::<f64>::new(2, vec![1.0, 2.0, 2.0]).is_err());
        assert!(HermitianMatrix::<f64>::new(0, vec![]).is_err());
        assert!(HermitianMatrix::<f64>::identity(65).is_err());
        assert!(HermitianMatrix::<f64>::new(1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn conjugation_by_swap() {
        let m = HermitianMatrix::<f64>::diagonal(&[1.0, 2.0]).unwrap();
        let swap = [0.0, 1.0, 1.0, 0.0];
        let c = m.conjugate(&swap).unwrap();
        assert_eq!(c.get(0, 0), 2.0);
        assert_eq!(c.get(1, 1), 1.0);
        assert_eq!(c.trace(), 3.0);
    }
}
