//! Protocol and channel data model.
//!
//! A protocol is either the two-basis BB84 scheme on qubits or a
//! `(d+1)`-bases scheme on qudits of prime dimension `d` (the six-state
//! protocol is the `d = 2` member). The channel after symmetrization is a
//! Bell-diagonal state described by `d²` weights `λ_jk`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, QkdError, Result};
use crate::scalar::Real;

/// Basis family of a prepare-and-measure protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// BB84: one key basis and one test basis, qubits only.
    TwoBases,
    /// Complete set of `d+1` mutually unbiased bases.
    DPlusOneBases,
}

/// Parameter-estimation measurement scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeKind {
    /// One two-outcome POVM per estimated parameter.
    Ipovm,
    /// A single common POVM for all parameters.
    Cpovm,
}

/// Which finite-size correction applies to the von Neumann rate.
///
/// The qubit protocols carry coefficient 7, the qudit family carries
/// `2·log₂d + 3`. Both are kept at `d = 2` so the two published forms can be
/// compared directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionRule {
    Qubit,
    Qudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub family: Family,
    pub dimension: usize,
    pub pe_scheme: PeKind,
    pub correction: CorrectionRule,
}

impl ProtocolSpec {
    /// Validated constructor.
    pub fn new(
        family: Family,
        dimension: usize,
        pe_scheme: PeKind,
        correction: CorrectionRule,
    ) -> Result<Self> {
        let spec = Self {
            family,
            dimension,
            pe_scheme,
            correction,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bb84(pe_scheme: PeKind) -> Self {
        Self {
            family: Family::TwoBases,
            dimension: 2,
            pe_scheme,
            correction: CorrectionRule::Qubit,
        }
    }

    pub fn six_state(pe_scheme: PeKind) -> Self {
        Self {
            family: Family::DPlusOneBases,
            dimension: 2,
            pe_scheme,
            correction: CorrectionRule::Qubit,
        }
    }

    /// `(d+1)`-bases protocol evaluated with the qudit formulas, including
    /// at `d = 2`.
    pub fn d_bases(dimension: usize, pe_scheme: PeKind) -> Result<Self> {
        Self::new(
            Family::DPlusOneBases,
            dimension,
            pe_scheme,
            CorrectionRule::Qudit,
        )
    }

    pub fn with_pe(self, pe_scheme: PeKind) -> Self {
        Self { pe_scheme, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(QkdError::Protocol(format!(
                "dimension {} must be at least 2",
                self.dimension
            )));
        }
        if !is_prime(self.dimension) {
            return Err(QkdError::Protocol(format!(
                "dimension {} is not prime",
                self.dimension
            )));
        }
        if self.family == Family::TwoBases && self.dimension != 2 {
            return Err(QkdError::Protocol(format!(
                "two-basis protocol is defined for qubits only, got d = {}",
                self.dimension
            )));
        }
        Ok(())
    }

    /// Number of measurement bases.
    pub fn bases(&self) -> usize {
        match self.family {
            Family::TwoBases => 2,
            Family::DPlusOneBases => self.dimension + 1,
        }
    }

    /// Largest error rate for which the entropy formulas of this protocol are
    /// defined: `1/2` for BB84, `d/(d+1)` for the `(d+1)`-bases family.
    pub fn q_max<T: Real>(&self) -> T {
        match self.family {
            Family::TwoBases => T::lit(0.5),
            Family::DPlusOneBases => {
                let d = T::count(self.dimension);
                d / (d + T::one())
            }
        }
    }

    pub fn log2_dimension<T: Real>(&self) -> T {
        T::count(self.dimension).log2()
    }
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Bell-diagonal channel state parametrized by the error rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel<T> {
    pub q_err: T,
    pub dimension: usize,
    /// Row-major `λ_jk`, `j, k ∈ {0, …, d-1}`.
    pub lambda: Vec<T>,
    pub beta0: T,
    pub beta1: T,
    /// BB84 free parameters; `None` for `d > 2`.
    pub u: Option<T>,
    pub v: Option<T>,
}

impl<T: Real> ChannelModel<T> {
    /// Depolarized state `(β₀-β₁)|Φ₀₀⟩⟨Φ₀₀| + (β₁/d)·1` with `Q = 1-β₀`.
    pub fn symmetric(dimension: usize, q_err: T) -> Result<Self> {
        if dimension < 2 {
            return Err(QkdError::Protocol(format!(
                "dimension {dimension} must be at least 2"
            )));
        }
        let d = T::count(dimension);
        let dm1 = d - T::one();
        if !(q_err >= T::zero() && q_err <= dm1 / d) {
            return domain("Q", q_err.as_f64(), "0 <= Q <= (d-1)/d");
        }
        let beta0 = T::one() - q_err;
        let beta1 = q_err / dm1;
        let mut lambda = vec![beta1 / d; dimension * dimension];
        lambda[0] = T::one() - (d + T::one()) / d * q_err;
        let (u, v) = if dimension == 2 {
            // λ₀₁ = (1-Q)u and λ₁₁ = Qv
            let u = if beta0 > T::zero() {
                lambda[1] / beta0
            } else {
                T::zero()
            };
            (Some(u), Some(T::lit(0.5)))
        } else {
            (None, None)
        };
        let model = Self {
            q_err,
            dimension,
            lambda,
            beta0,
            beta1,
            u,
            v,
        };
        model.check_weights()?;
        Ok(model)
    }

    /// BB84 channel with `λ₀₀=(1-Q)(1-u)`, `λ₀₁=(1-Q)u`, `λ₁₀=Q(1-v)`,
    /// `λ₁₁=Qv`, where `u` follows from `(1-Q)u + Qv = Q`.
    pub fn bb84(q_err: T, v: T) -> Result<Self> {
        if !(q_err >= T::zero() && q_err < T::one()) {
            return domain("Q", q_err.as_f64(), "0 <= Q < 1");
        }
        if !(v >= T::zero() && v <= T::one()) {
            return domain("v", v.as_f64(), "0 <= v <= 1");
        }
        let u = q_err * (T::one() - v) / (T::one() - q_err);
        Self::bb84_uv(q_err, u, v)
    }

    /// BB84 channel from explicit `(u, v)`; the constraint is checked, not
    /// imposed.
    pub fn bb84_uv(q_err: T, u: T, v: T) -> Result<Self> {
        let one = T::one();
        let residual = (one - q_err) * u + q_err * v - q_err;
        if residual.abs() > T::lit(1e-12) {
            return Err(QkdError::Constraint(format!(
                "(1-Q)u + Qv = Q violated by {:e}",
                residual.as_f64()
            )));
        }
        let lambda = vec![
            (one - q_err) * (one - u),
            (one - q_err) * u,
            q_err * (one - v),
            q_err * v,
        ];
        let model = Self {
            q_err,
            dimension: 2,
            lambda,
            beta0: one - q_err,
            beta1: q_err,
            u: Some(u),
            v: Some(v),
        };
        model.check_weights()?;
        Ok(model)
    }

    /// Worst case for Eve's guessing probability, `u = v = Q`.
    pub fn bb84_worst_case(q_err: T) -> Result<Self> {
        Self::bb84(q_err, q_err)
    }

    pub fn lambda_at(&self, j: usize, k: usize) -> T {
        self.lambda[j * self.dimension + k]
    }

    /// Error rate in the computational basis, `λ₁₀ + λ₁₁` (qubits).
    pub fn e_z(&self) -> T {
        self.lambda_at(1, 0) + self.lambda_at(1, 1)
    }

    /// Error rate in the conjugate basis, `λ₀₁ + λ₁₁` (qubits).
    pub fn e_x(&self) -> T {
        self.lambda_at(0, 1) + self.lambda_at(1, 1)
    }

    fn check_weights(&self) -> Result<()> {
        let tol = T::lit(1e-12);
        for &l in &self.lambda {
            if l < -tol {
                return Err(QkdError::Constraint(format!(
                    "negative Bell weight {:e}",
                    l.as_f64()
                )));
            }
        }
        let total = self.lambda.iter().fold(T::zero(), |acc, &l| acc + l);
        if (total - T::one()).abs() > tol.max(T::epsilon() * T::lit(16.0)) {
            return Err(QkdError::Constraint(format!(
                "Bell weights sum to {}",
                total.as_f64()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let p: Vec<usize> = (0..20).filter(|&n| is_prime(n)).collect();
        assert_eq!(p, vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn protocol_validation() {
        assert!(ProtocolSpec::d_bases(4, PeKind::Cpovm).is_err());
        assert!(ProtocolSpec::d_bases(1, PeKind::Cpovm).is_err());
        assert!(
            ProtocolSpec::new(Family::TwoBases, 3, PeKind::Cpovm, CorrectionRule::Qubit).is_err()
        );
        assert!(ProtocolSpec::bb84(PeKind::Ipovm).validate().is_ok());
        assert_eq!(ProtocolSpec::d_bases(5, PeKind::Cpovm).unwrap().bases(), 6);
        assert_eq!(ProtocolSpec::bb84(PeKind::Cpovm).bases(), 2);
    }

    #[test]
    fn symmetric_state_weights() {
        for &d in &[2usize, 3, 5, 7] {
            let q = 0.07;
            let ch = ChannelModel::<f64>::symmetric(d, q).unwrap();
            let sum: f64 = ch.lambda.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let df = d as f64;
            assert!((ch.beta0 + (df - 1.0) * ch.beta1 - 1.0).abs() < 1e-15);
            assert!((ch.lambda[0] - (1.0 - (df + 1.0) / df * q)).abs() < 1e-15);
            assert!((ch.lambda_at(1, 1) - ch.beta1 / df).abs() < 1e-15);
        }
        let ch = ChannelModel::<f64>::symmetric(2, 0.1).unwrap();
        assert!((ch.e_x() - 0.1).abs() < 1e-15);
        assert!((ch.e_z() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bb84_worst_case_weights() {
        let q = 0.05;
        let ch = ChannelModel::<f64>::bb84_worst_case(q).unwrap();
        assert!((ch.lambda_at(0, 0) - 0.9025).abs() < 1e-15);
        assert!((ch.lambda_at(0, 1) - 0.0475).abs() < 1e-15);
        assert!((ch.lambda_at(1, 0) - 0.0475).abs() < 1e-15);
        assert!((ch.lambda_at(1, 1) - 0.0025).abs() < 1e-15);
        assert!((ch.e_x() - q).abs() < 1e-15);
    }

    #[test]
    fn bb84_constraint_is_checked() {
        assert!(ChannelModel::<f64>::bb84_uv(0.1, 0.1, 0.5).is_err());
        // v = 1 forces u = 0: λ₁₁ = Q, λ₀₁ = 0
        let ch = ChannelModel::<f64>::bb84(0.1, 1.0).unwrap();
        assert_eq!(ch.lambda_at(0, 1), 0.0);
        assert!((ch.lambda_at(1, 1) - 0.1).abs() < 1e-15);
    }
}
