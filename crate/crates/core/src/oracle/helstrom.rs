//! Two-state minimum-error discrimination for BB84.
//!
//! Eve's purification is `Σ √λ_ij |Φ_ij⟩_AB |e_ij⟩_E`. Conditioned on
//! Alice's bit `x`, Eve holds `ρ_E^x = |a_x⟩⟨a_x| + |b_x⟩⟨b_x|` with
//! `a_x = √λ₀₀ e₀₀ ± √λ₀₁ e₀₁` and `b_x = √λ₁₀ e₁₀ ± √λ₁₁ e₁₁` (sign `+` for
//! `x = 0`), written here in the basis `(e₀₀, e₀₁, e₁₀, e₁₁)`.

use crate::error::{QkdError, Result};
use crate::protocol::ChannelModel;
use crate::scalar::Real;

use super::eig::{symmetric_eig, trace_norm};
use super::matrix::HermitianMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleBb84<T> {
    pub rho0: HermitianMatrix<T>,
    pub rho1: HermitianMatrix<T>,
    /// Prior of `rho0`.
    pub prior: T,
}

impl<T: Real> EnsembleBb84<T> {
    /// Checks unit trace and positivity of both states.
    pub fn new(rho0: HermitianMatrix<T>, rho1: HermitianMatrix<T>, prior: T) -> Result<Self> {
        if rho0.dim() != rho1.dim() {
            return Err(QkdError::Matrix(
                "ensemble states differ in dimension".into(),
            ));
        }
        if !(prior >= T::zero() && prior <= T::one()) {
            return Err(QkdError::Constraint(format!(
                "prior {} not in [0,1]",
                prior.as_f64()
            )));
        }
        let tol = T::lit(1e-10);
        for (name, rho) in [("rho0", &rho0), ("rho1", &rho1)] {
            let tr = rho.trace();
            if (tr - T::one()).abs() > tol {
                return Err(QkdError::Constraint(format!(
                    "{name} has trace {}",
                    tr.as_f64()
                )));
            }
            let w = symmetric_eig(rho)?.min_value();
            if w < -tol {
                return Err(QkdError::Constraint(format!(
                    "{name} has negative eigenvalue {:e}",
                    w.as_f64()
                )));
            }
        }
        Ok(Self { rho0, rho1, prior })
    }
}

/// Eve's conditional states for the BB84 channel with free parameters
/// `(u, v)`.
pub fn build_eve_states_bb84<T: Real>(q_err: T, u: T, v: T) -> Result<EnsembleBb84<T>> {
    let channel = ChannelModel::bb84_uv(q_err, u, v)?;
    eve_states_from_channel(&channel)
}

pub fn eve_states_from_channel<T: Real>(channel: &ChannelModel<T>) -> Result<EnsembleBb84<T>> {
    if channel.dimension != 2 {
        return Err(QkdError::Unsupported(
            "Helstrøm oracle is defined for qubit channels".into(),
        ));
    }
    let s: Vec<T> = channel
        .lambda
        .iter()
        .map(|&l| l.max(T::zero()).sqrt())
        .collect();
    let z = T::zero();
    let a0 = [s[0], s[1], z, z];
    let b0 = [z, z, s[2], s[3]];
    let a1 = [s[0], -s[1], z, z];
    let b1 = [z, z, s[2], -s[3]];
    let one = T::one();
    let rho0 = HermitianMatrix::from_outer_products(4, &[(one, &a0), (one, &b0)])?;
    let rho1 = HermitianMatrix::from_outer_products(4, &[(one, &a1), (one, &b1)])?;
    EnsembleBb84::new(rho0, rho1, T::lit(0.5))
}

/// Helstrøm bound `p_guess = ½(1 + ‖p₀ρ₀ - p₁ρ₁‖₁)`.
pub fn helstrom_pguess<T: Real>(e: &EnsembleBb84<T>) -> Result<T> {
    let weighted = e
        .rho0
        .scale(e.prior)
        .sub(&e.rho1.scale(T::one() - e.prior))?;
    Ok((T::one() + trace_norm(&weighted)?) / T::lit(2.0))
}

/// Half trace distance `½‖ρ₀ - ρ₁‖₁` along the constraint line, as a function
/// of `v`.
pub fn f_of_v<T: Real>(q_err: T, v: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let first = ((one - v) * q_err * (one + (v - two) * q_err)).max(T::zero());
    let second = ((one - v) * v * q_err * q_err).max(T::zero());
    two * first.sqrt() + two * second.sqrt()
}

/// Tolerance of the golden-section search in `v`.
pub const V_TOLERANCE: f64 = 1e-9;

/// Maximizes `f(v)` over `[0, 1]` by golden-section search; `f` is concave
/// on that interval. Returns `(v*, f(v*))`.
pub fn maximize_f_over_v<T: Real>(q_err: T) -> Result<(T, T)> {
    if !(q_err > T::zero() && q_err < T::lit(0.5)) {
        return crate::error::domain("Q", q_err.as_f64(), "0 < Q < 1/2");
    }
    let f = |v: T| f_of_v(q_err, v);
    let (v, fv) = golden_section_max(f, T::zero(), T::one(), T::lit(V_TOLERANCE));
    Ok((v, fv))
}

pub(crate) fn golden_section_max<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::lit(2.0);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::pguess;
    use crate::protocol::{PeKind, ProtocolSpec};

    #[test]
    fn noiseless_states_coincide() {
        let e = build_eve_states_bb84(0.0f64, 0.0, 0.0).unwrap();
        assert_eq!(e.rho0.max_abs_diff(&e.rho1), 0.0);
        assert_eq!(helstrom_pguess(&e).unwrap(), 0.5);
    }

    #[test]
    fn orthogonal_pure_states() {
        let mut a = vec![0.0f64; 4];
        a[0] = 1.0;
        let mut b = vec![0.0f64; 4];
        b[3] = 1.0;
        let r0 = HermitianMatrix::from_outer_products(4, &[(1.0, &a)]).unwrap();
        let r1 = HermitianMatrix::from_outer_products(4, &[(1.0, &b)]).unwrap();
        let e = EnsembleBb84::new(r0, r1, 0.5).unwrap();
        assert!((helstrom_pguess(&e).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn difference_matches_closed_trace_norm() {
        let q = 0.05f64;
        let e = build_eve_states_bb84(q, q, q).unwrap();
        let (l00, l01, l10, l11): (f64, f64, f64, f64) = (0.9025, 0.0475, 0.0475, 0.0025);
        let expected = 4.0 * (l00 * l01).sqrt() + 4.0 * (l10 * l11).sqrt();
        let diff = e.rho0.sub(&e.rho1).unwrap();
        assert!((trace_norm(&diff).unwrap() - expected).abs() < 1e-14);
        // off-diagonal structure: only (e00,e01) and (e10,e11) couplings
        assert!((diff.get(0, 1) - 2.0 * (l00 * l01).sqrt()).abs() < 1e-15);
        assert!((diff.get(2, 3) - 2.0 * (l10 * l11).sqrt()).abs() < 1e-15);
        assert_eq!(diff.get(0, 0), 0.0);
        assert_eq!(diff.get(0, 2), 0.0);
    }

    #[test]
    fn corner_of_constraint_line() {
        let e = build_eve_states_bb84(0.1f64, 0.0, 1.0).unwrap();
        assert!((e.rho0.trace() - 1.0).abs() < 1e-15);
        assert!(build_eve_states_bb84(0.1f64, 0.2, 1.0).is_err());
    }

    #[test]
    fn helstrom_matches_closed_form() {
        let q = 0.05f64;
        let e = build_eve_states_bb84(q, q, q).unwrap();
        let closed = pguess(&ProtocolSpec::bb84(PeKind::Cpovm), q).unwrap();
        assert!((helstrom_pguess(&e).unwrap() - closed).abs() < 1e-10);
    }

    #[test]
    fn maximizer_sits_at_v_equals_q() {
        for &q in &[0.05f64, 0.25] {
            let (v, fmax) = maximize_f_over_v(q).unwrap();
            assert!((v - q).abs() < 1e-6, "Q = {q}: v* = {v}");
            let closed = pguess(&ProtocolSpec::bb84(PeKind::Cpovm), q).unwrap();
            assert!((0.5 * fmax + 0.5 - closed).abs() < 1e-12);
        }
        assert!(maximize_f_over_v(0.0f64).is_err());
        assert!(maximize_f_over_v(0.5f64).is_err());
    }

    #[test]
    fn f_matches_matrix_route() {
        let q = 0.12f64;
        for i in 0..=20 {
            let v = i as f64 / 20.0;
            let ch = ChannelModel::bb84(q, v).unwrap();
            let e = eve_states_from_channel(&ch).unwrap();
            let half = trace_norm(&e.rho0.sub(&e.rho1).unwrap()).unwrap() / 2.0;
            assert!((half - f_of_v(q, v)).abs() < 1e-12, "v = {v}");
        }
    }
}
