use serde::{Deserialize, Serialize};

use crate::entropy::{leak_ec, min_entropy_from_pguess, pguess, physical_q_limit, vn_entropy};
use crate::error::{domain, Result};
use crate::estimation::{scheme_xi, worst_case_q};
use crate::protocol::{CorrectionRule, ProtocolSpec};
use crate::scalar::Real;

use super::budget::SecurityBudget;
use super::yields::{yields, YieldRule};

/// Entropy bound entering the key rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    /// Conditional von Neumann entropy plus the finite-size correction `Δ`.
    VonNeumann,
    /// `-log₂ p_guess`, no smoothing correction.
    MinEntropy,
}

/// Error rate at which the error-correction leakage is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeakPoint {
    /// Worst-case error rate compatible with the estimation statistics.
    #[default]
    WorstCase,
    /// The measured error rate.
    Measured,
}

/// How the statistical deviation `ξ` moves the error rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationRule {
    /// `ξ` bounds `½|Q̂ - Q|`, so the worst case is `Q + 2ξ`.
    #[default]
    HalfDistance,
    /// `ξ` bounds `|Q̂ - Q|` directly, worst case `Q + ξ`.
    Absolute,
}

impl DeviationRule {
    pub fn factor<T: Real>(self) -> T {
        match self {
            DeviationRule::HalfDistance => T::lit(2.0),
            DeviationRule::Absolute => T::one(),
        }
    }
}

/// Modelling choices that are not fixed by the rate formula itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateOptions<T> {
    pub yield_rule: YieldRule,
    pub leak_factor: T,
    pub leak_at: LeakPoint,
    pub deviation: DeviationRule,
}

impl<T: Real> Default for RateOptions<T> {
    fn default() -> Self {
        Self {
            yield_rule: YieldRule::PaperLiteral,
            leak_factor: T::lit(1.2),
            leak_at: LeakPoint::WorstCase,
            deviation: DeviationRule::HalfDistance,
        }
    }
}

/// Full audit of one key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown<T> {
    pub bound: Bound,
    pub rate: T,
    pub n_total: T,
    pub n: T,
    pub m: T,
    pub q_key: T,
    pub q_err: T,
    pub xi: T,
    pub q_eff: T,
    pub q_eff_clamped: bool,
    pub entropy_term: T,
    pub entropy_clamped: bool,
    /// `Δ ≤ 0`; zero for the min-entropy bound.
    pub delta: T,
    pub leak: T,
    /// `(2/N)·log₂(2ε_PA)`.
    pub pa_term: T,
    pub budget: SecurityBudget<T>,
}

impl<T: Real> RateBreakdown<T> {
    /// `(n/N)·(entropy + Δ - leak) + PA term`.
    pub fn recompose(&self) -> T {
        self.n / self.n_total * (self.entropy_term + self.delta - self.leak) + self.pa_term
    }
}

/// Finite-size correction of the von Neumann bound:
/// `-7·√(log₂(2/ε̄)/n)` for the qubit protocols and
/// `-(2·log₂d + 3)·√(log₂(2/ε̄)/n)` for the qudit family.
pub fn delta_correction<T: Real>(n: T, eps_bar: T, protocol: &ProtocolSpec) -> Result<T> {
    if !(n > T::zero()) {
        return domain("n", n.as_f64(), "n > 0");
    }
    if !(eps_bar > T::zero() && eps_bar < T::one()) {
        return domain("eps_bar", eps_bar.as_f64(), "0 < eps_bar < 1");
    }
    let coefficient = match protocol.correction {
        CorrectionRule::Qubit => T::lit(7.0),
        CorrectionRule::Qudit => T::lit(2.0) * T::count(protocol.dimension).log2() + T::lit(3.0),
    };
    Ok(-coefficient * ((T::lit(2.0) / eps_bar).log2() / n).sqrt())
}

/// Secret-key rate for fixed security split and key-basis probability.
pub fn key_rate<T: Real>(
    bound: Bound,
    protocol: &ProtocolSpec,
    q_err: T,
    n_total: T,
    budget: &SecurityBudget<T>,
    q_key: T,
    options: &RateOptions<T>,
) -> Result<RateBreakdown<T>> {
    protocol.validate()?;
    budget.validate()?;
    if !(q_err >= T::zero() && q_err < physical_q_limit::<T>(protocol)) {
        return domain("Q", q_err.as_f64(), "0 <= Q < (d-1)/d");
    }
    let y = yields(n_total, q_key, protocol, options.yield_rule)?;
    let xi = scheme_xi(protocol, budget.eps_pe, y.m)?;
    let outcome = worst_case_q(q_err, options.deviation.factor::<T>() * xi, protocol);

    let (entropy_term, entropy_clamped, delta) = match bound {
        Bound::VonNeumann => {
            let s = vn_entropy(protocol, outcome.q_eff)?;
            (
                s.bits,
                s.clamped,
                delta_correction(y.n, budget.eps_bar, protocol)?,
            )
        }
        Bound::MinEntropy => {
            let h = min_entropy_from_pguess(pguess(protocol, outcome.q_eff)?)?;
            (h, false, T::zero())
        }
    };
    let leak_q = match options.leak_at {
        LeakPoint::WorstCase => outcome.q_eff,
        LeakPoint::Measured => q_err,
    };
    let leak = leak_ec(protocol, leak_q, options.leak_factor)?;
    let pa_term = T::lit(2.0) / n_total * (T::lit(2.0) * budget.eps_pa).log2();

    let mut breakdown = RateBreakdown {
        bound,
        rate: T::zero(),
        n_total,
        n: y.n,
        m: y.m,
        q_key,
        q_err,
        xi,
        q_eff: outcome.q_eff,
        q_eff_clamped: outcome.clamped,
        entropy_term,
        entropy_clamped,
        delta,
        leak,
        pa_term,
        budget: *budget,
    };
    breakdown.rate = breakdown.recompose();
    Ok(breakdown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::binary_entropy;
    use crate::protocol::PeKind;

    fn budget() -> SecurityBudget<f64> {
        SecurityBudget::with_remainder(1e-9, 1e-10, 3e-10, 3e-10).unwrap()
    }

    #[test]
    fn delta_values() {
        let qubit = ProtocolSpec::bb84(PeKind::Cpovm);
        let d = delta_correction(1e6f64, 1e-10, &qubit).unwrap();
        assert!((d - -0.040_948_074_026_684_18).abs() < 1e-15);
        assert!(delta_correction(1e30f64, 1e-10, &qubit).unwrap() > -1e-12);
        // the qudit form at d = 2 carries 5 instead of 7
        let qudit = ProtocolSpec::d_bases(2, PeKind::Cpovm).unwrap();
        let dq = delta_correction(1e6f64, 1e-10, &qudit).unwrap();
        assert!((d / dq - 7.0 / 5.0).abs() < 1e-14);
        assert!(delta_correction(0.0f64, 1e-10, &qubit).is_err());
        assert!(delta_correction(1e6f64, 0.0, &qubit).is_err());
    }

    #[test]
    fn recomposition_identity() {
        for bound in [Bound::VonNeumann, Bound::MinEntropy] {
            let r = key_rate(
                bound,
                &ProtocolSpec::six_state(PeKind::Ipovm),
                0.03,
                1e5,
                &budget(),
                0.7,
                &RateOptions::default(),
            )
            .unwrap();
            assert!((r.rate - r.recompose()).abs() <= 1e-12);
            assert!(r.delta <= 0.0);
            if bound == Bound::MinEntropy {
                assert_eq!(r.delta, 0.0);
            }
        }
    }

    #[test]
    fn asymptotic_limit() {
        let opts = RateOptions::<f64>::default();
        let q = 0.999;
        let r = key_rate(
            Bound::VonNeumann,
            &ProtocolSpec::bb84(PeKind::Cpovm),
            0.05,
            1e18,
            &budget(),
            q,
            &opts,
        )
        .unwrap();
        let asymptote = q * q * (1.0 - 2.2 * binary_entropy(0.05).unwrap());
        assert!((r.rate - asymptote).abs() < 1e-3 * asymptote);
    }

    #[test]
    fn heavily_penalized_rate_is_reported_negative() {
        let r = key_rate(
            Bound::VonNeumann,
            &ProtocolSpec::bb84(PeKind::Cpovm),
            0.3,
            1e3,
            &budget(),
            0.5,
            &RateOptions::default(),
        )
        .unwrap();
        assert!(r.rate < 0.0);
        assert!(r.q_eff_clamped);
        assert_eq!(r.entropy_term, 0.0);
        assert!(r.rate <= r.pa_term);
    }

    #[test]
    fn leak_point_and_deviation_rule() {
        let p = ProtocolSpec::bb84(PeKind::Cpovm);
        let base = RateOptions::<f64>::default();
        let measured = RateOptions {
            leak_at: LeakPoint::Measured,
            deviation: DeviationRule::Absolute,
            ..base
        };
        let a = key_rate(Bound::VonNeumann, &p, 0.05, 1e6, &budget(), 0.9, &base).unwrap();
        let b = key_rate(Bound::VonNeumann, &p, 0.05, 1e6, &budget(), 0.9, &measured).unwrap();
        assert!((a.q_eff - (0.05 + 2.0 * a.xi)).abs() < 1e-15);
        assert!((b.q_eff - (0.05 + b.xi)).abs() < 1e-15);
        assert!((b.leak - 1.2 * binary_entropy(0.05).unwrap()).abs() < 1e-15);
        assert!((a.leak - 1.2 * binary_entropy(a.q_eff).unwrap()).abs() < 1e-15);
        assert!(a.rate < b.rate);
    }

    #[test]
    fn invalid_inputs() {
        let p = ProtocolSpec::bb84(PeKind::Cpovm);
        let o = RateOptions::default();
        assert!(key_rate(Bound::MinEntropy, &p, 0.5, 1e6, &budget(), 0.9, &o).is_err());
        assert!(key_rate(Bound::MinEntropy, &p, -0.1, 1e6, &budget(), 0.9, &o).is_err());
        assert!(key_rate(Bound::MinEntropy, &p, 0.05, 0.0, &budget(), 0.9, &o).is_err());
        assert!(key_rate(Bound::MinEntropy, &p, 0.05, 1e6, &budget(), 1.0, &o).is_err());
        let mut bad = budget();
        bad.eps_bar *= 2.0;
        assert!(key_rate(Bound::MinEntropy, &p, 0.05, 1e6, &bad, 0.9, &o).is_err());
        let d5 = ProtocolSpec::d_bases(5, PeKind::Ipovm).unwrap();
        assert!(key_rate(Bound::MinEntropy, &d5, 0.05, 1e6, &budget(), 0.9, &o).is_err());
    }
}
