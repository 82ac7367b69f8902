//! Square-root measurement on the pyramid states of the `(d+1)`-bases
//! protocol.
//!
//! Only overlaps matter, so the states are realized from their Gram matrix
//! by a semidefinite Cholesky factorization instead of an explicit basis of
//! Eve's system. The orthogonal `x ≠ y` branch is certain for Eve and enters
//! analytically with weight `Q`.

use crate::error::{domain, QkdError, Result};
use crate::protocol::is_prime;
use crate::scalar::Real;

use super::eig::symmetric_eig;
use super::matrix::HermitianMatrix;

fn check_pyramid<T: Real>(d: usize, q_err: T) -> Result<()> {
    if d < 2 || !is_prime(d) {
        return Err(QkdError::Protocol(format!(
            "dimension {d} must be a prime >= 2"
        )));
    }
    let df = T::count(d);
    if !(q_err >= T::zero() && q_err < (df - T::one()) / df) {
        return domain("Q", q_err.as_f64(), "0 <= Q < (d-1)/d");
    }
    Ok(())
}

/// Gram matrix of the pyramid states: unit diagonal, `1 - β₁/β₀` elsewhere.
pub fn pyramid_gram<T: Real>(d: usize, q_err: T) -> Result<HermitianMatrix<T>> {
    check_pyramid(d, q_err)?;
    let beta0 = T::one() - q_err;
    let beta1 = q_err / T::count(d - 1);
    let overlap = T::one() - beta1 / beta0;
    HermitianMatrix::from_fn(d, |i, j| if i == j { T::one() } else { overlap })
}

/// Result of the numerical square-root measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrmOverlaps<T> {
    /// `|⟨e_xx|E_xx⟩|²`, averaged over `x`.
    pub eta0: T,
    /// `|⟨e_xx|E_yy⟩|²` for `x ≠ y`, averaged.
    pub eta1: T,
    /// `Q + (1-Q)·η₀`.
    pub pguess: T,
    /// Largest deviation of `Σ_x |e_x⟩⟨e_x|` from the projector onto the span
    /// of the states.
    pub completeness_defect: T,
}

/// Rows of `L` with `G = L·Lᵀ`; zero pivots are dropped so rank-deficient
/// Gram matrices factor cleanly.
fn semidefinite_cholesky<T: Real>(g: &HermitianMatrix<T>) -> Vec<Vec<T>> {
    let n = g.dim();
    let scale = (0..n).fold(T::zero(), |acc, i| acc.max(g.get(i, i).abs()));
    let tol = T::lit(1e-12) * scale.max(T::one());
    let mut l = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let s = g.get(j, j) - (0..j).fold(T::zero(), |acc, k| acc + l[j][k] * l[j][k]);
        if s <= tol {
            continue;
        }
        let pivot = s.sqrt();
        l[j][j] = pivot;
        for i in (j + 1)..n {
            let dot = (0..j).fold(T::zero(), |acc, k| acc + l[i][k] * l[j][k]);
            l[i][j] = (g.get(i, j) - dot) / pivot;
        }
    }
    l
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Square-root measurement computed numerically through the eigensolver.
pub fn srm_numeric<T: Real>(d: usize, q_err: T) -> Result<SrmOverlaps<T>> {
    let gram = pyramid_gram(d, q_err)?;
    let states = semidefinite_cholesky(&gram);

    // d·ρ^(=) = Σ_x |E_x⟩⟨E_x|
    let terms: Vec<(T, &[T])> = states.iter().map(|s| (T::one(), s.as_slice())).collect();
    let d_rho = HermitianMatrix::from_outer_products(d, &terms)?;
    let eig = symmetric_eig(&d_rho)?;
    let top = eig.values[0];
    if !(top > T::zero()) {
        return Err(QkdError::Singular("ensemble average state vanishes".into()));
    }
    let cut = top * T::lit(1e-12);
    let inv_sqrt = eig.map_values(|w| {
        if w > cut {
            T::one() / w.sqrt()
        } else {
            T::zero()
        }
    })?;
    let projector = eig.map_values(|w| if w > cut { T::one() } else { T::zero() })?;

    for s in &states {
        let residual = projector
            .mul_vec(s)
            .iter()
            .zip(s)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        if residual > T::lit(1e-8) {
            return Err(QkdError::Singular(format!(
                "pyramid state leaves the support of ρ^(=) by {:e}",
                residual.as_f64()
            )));
        }
    }

    let measurement: Vec<Vec<T>> = states.iter().map(|s| inv_sqrt.mul_vec(s)).collect();
    let df = T::count(d);
    let mut eta0 = T::zero();
    let mut eta1 = T::zero();
    for (x, e) in measurement.iter().enumerate() {
        for (y, s) in states.iter().enumerate() {
            let amp = dot(e, s);
            if x == y {
                eta0 = eta0 + amp * amp;
            } else {
                eta1 = eta1 + amp * amp;
            }
        }
    }
    eta0 = eta0 / df;
    eta1 = if d > 1 {
        eta1 / (df * (df - T::one()))
    } else {
        T::zero()
    };

    let m_terms: Vec<(T, &[T])> = measurement
        .iter()
        .map(|e| (T::one(), e.as_slice()))
        .collect();
    let povm_sum = HermitianMatrix::from_outer_products(d, &m_terms)?;
    let completeness_defect = povm_sum.max_abs_diff(&projector);

    Ok(SrmOverlaps {
        eta0,
        eta1,
        pguess: q_err + (T::one() - q_err) * eta0,
        completeness_defect,
    })
}

/// Guessing probability from the numerical square-root measurement.
pub fn srm_pguess_numeric<T: Real>(d: usize, q_err: T) -> Result<T> {
    Ok(srm_numeric(d, q_err)?.pguess)
}

/// Closed-form SRM quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrmEta<T> {
    pub r0: T,
    pub r1: T,
    pub eta0: T,
    pub eta1: T,
}

/// `√η₀ = (√r₀ + (d-1)√r₁)/√d` and `√η₁ = (√r₀ - √r₁)/√d` with
/// `r₀ = 1 - ((d-1)/d)(β₁/β₀)`, `r₁ = β₁/(dβ₀)`.
///
/// The overlaps are the entries of `G^{1/2}`, so `η₀ + (d-1)η₁ = 1`.
pub fn srm_eta_closed<T: Real>(d: usize, q_err: T) -> Result<SrmEta<T>> {
    check_pyramid(d, q_err)?;
    let one = T::one();
    let df = T::count(d);
    let beta0 = one - q_err;
    let beta1 = q_err / (df - one);
    let r0 = one - (df - one) / df * (beta1 / beta0);
    let r1 = beta1 / (df * beta0);
    let sqrt_d = df.sqrt();
    let s0 = (r0.sqrt() + (df - one) * r1.sqrt()) / sqrt_d;
    let s1 = (r0.sqrt() - r1.sqrt()) / sqrt_d;
    Ok(SrmEta {
        r0,
        r1,
        eta0: s0 * s0,
        eta1: s1 * s1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::pguess_d_bases;

    #[test]
    fn gram_edge_cases() {
        let g = pyramid_gram(3, 0.0f64).unwrap();
        assert!(g.entries().iter().all(|&x| x == 1.0));
        let g = pyramid_gram(2, 1.0f64 / 3.0).unwrap();
        assert!((g.get(0, 1) - 0.5).abs() < 1e-15);
        assert!(pyramid_gram(4, 0.1f64).is_err());
        assert!(pyramid_gram(3, 0.7f64).is_err());
        assert!(pyramid_gram(3, -0.1f64).is_err());
    }

    #[test]
    fn gram_spectrum_matches_r0_r1() {
        let (d, q) = (3usize, 0.1f64);
        let eig = symmetric_eig(&pyramid_gram(d, q).unwrap()).unwrap();
        let closed = srm_eta_closed(d, q).unwrap();
        assert!((eig.values[0] - d as f64 * closed.r0).abs() < 1e-13);
        for w in &eig.values[1..] {
            assert!((w - d as f64 * closed.r1).abs() < 1e-13);
        }
    }

    #[test]
    fn noiseless_limit() {
        for d in [2usize, 3, 5, 7] {
            let s = srm_numeric(d, 0.0f64).unwrap();
            assert!((s.pguess - 1.0 / d as f64).abs() < 1e-12);
            let c = srm_eta_closed(d, 0.0f64).unwrap();
            assert!((c.eta0 - 1.0 / d as f64).abs() < 1e-15);
            assert!((c.eta1 - 1.0 / d as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn numeric_matches_closed_form() {
        let s = srm_numeric(2, 0.05f64).unwrap();
        assert!((s.pguess - pguess_d_bases(2, 0.05).unwrap()).abs() < 1e-9);
        let s = srm_numeric(5, 0.1f64).unwrap();
        assert!((s.pguess - pguess_d_bases(5, 0.1).unwrap()).abs() < 1e-9);
        let s = srm_numeric(3, 0.1f64).unwrap();
        let c = srm_eta_closed(3, 0.1f64).unwrap();
        assert!((s.eta0 - c.eta0).abs() < 1e-9);
        assert!((s.eta1 - c.eta1).abs() < 1e-9);
        assert!(s.completeness_defect < 1e-10);
    }

    #[test]
    fn eta_normalization_identity() {
        for d in [2usize, 3, 5, 7, 11, 13, 17] {
            for i in 0..20 {
                let q = 0.3 * i as f64 / 20.0;
                let c = srm_eta_closed(d, q).unwrap();
                let total = c.eta0 + (d as f64 - 1.0) * c.eta1;
                assert!((total - 1.0).abs() < 1e-12, "d={d} Q={q}: {total}");
            }
        }
    }

    #[test]
    fn frozen_eta0() {
        // arbitrary-precision evaluation
        let c = srm_eta_closed(3, 0.1f64).unwrap();
        assert!((c.eta0 - 0.523_730_927_183_406_9).abs() < 1e-14);
        let c = srm_eta_closed(5, 0.1f64).unwrap();
        assert!((c.eta0 - 0.331_257_770_323_747_55).abs() < 1e-14);
    }
}
