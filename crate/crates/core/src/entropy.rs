//! Closed-form entropies, guessing probabilities and error-correction
//! leakage for the supported protocols.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::protocol::{CorrectionRule, Family, ProtocolSpec};
use crate::scalar::Real;

/// Entropy value in bits. `clamped` is set when the raw formula dipped below
/// zero and was raised to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropy<T> {
    pub bits: T,
    pub clamped: bool,
}

impl<T: Real> Entropy<T> {
    fn clamp(raw: T) -> Self {
        if raw < T::zero() {
            Self {
                bits: T::zero(),
                clamped: true,
            }
        } else {
            Self {
                bits: raw,
                clamped: false,
            }
        }
    }
}

fn check_probability<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        domain(name, x.as_f64(), "[0, 1]")
    }
}

/// `h(x) = -x·log₂x - (1-x)·log₂(1-x)`.
pub fn binary_entropy<T: Real>(x: T) -> Result<T> {
    check_probability("x", x)?;
    let one = T::one();
    Ok(-T::xlog2(x, one) - T::xlog2(one - x, one))
}

/// `h_d(p) = -p·log₂(p/(d-1)) - (1-p)·log₂(1-p)`.
pub fn d_ary_entropy<T: Real>(p: T, d: usize) -> Result<T> {
    check_probability("p", p)?;
    if d < 2 {
        return domain("d", d as f64, "d >= 2");
    }
    let one = T::one();
    let dm1 = T::count(d - 1);
    Ok(-T::xlog2(p, dm1) - T::xlog2(one - p, one))
}

/// Upper end of the error-rate range on which the closed forms of
/// `protocol` are defined: `1/2` for BB84, `d/(d+1)` otherwise.
pub fn formula_q_limit<T: Real>(protocol: &ProtocolSpec) -> T {
    match protocol.family {
        Family::TwoBases => T::lit(0.5),
        Family::DPlusOneBases => {
            let d = T::count(protocol.dimension);
            d / (d + T::one())
        }
    }
}

/// Error rate at which both entropy bounds reach zero, `(d-1)/d`. The bounds
/// are non-increasing on `[0, physical_q_limit]`.
pub fn physical_q_limit<T: Real>(protocol: &ProtocolSpec) -> T {
    let d = T::count(protocol.dimension);
    (d - T::one()) / d
}

fn check_q<T: Real>(protocol: &ProtocolSpec, q: T) -> Result<()> {
    protocol.validate()?;
    let limit = formula_q_limit::<T>(protocol);
    if q >= T::zero() && q <= limit && q < T::one() {
        Ok(())
    } else {
        match protocol.family {
            Family::TwoBases => domain("Q", q.as_f64(), "0 <= Q <= 1/2"),
            Family::DPlusOneBases => domain("Q", q.as_f64(), "0 <= Q <= d/(d+1)"),
        }
    }
}

/// Conditional von Neumann entropy `S(X|E)` of the symmetric attack.
pub fn vn_entropy<T: Real>(protocol: &ProtocolSpec, q: T) -> Result<Entropy<T>> {
    check_q(protocol, q)?;
    let one = T::one();
    let raw = match (protocol.family, protocol.correction, protocol.dimension) {
        (Family::TwoBases, _, _) => one - binary_entropy(q)?,
        (Family::DPlusOneBases, CorrectionRule::Qubit, 2) => {
            let arg = (one - T::lit(1.5) * q) / (one - q);
            (one - q) * (one - binary_entropy(arg.min(one).max(T::zero()))?)
        }
        (Family::DPlusOneBases, _, d) => {
            let df = T::count(d);
            let arg = one - (one - (df + one) / df * q) / (one - q);
            (one - q) * (df.log2() - d_ary_entropy(arg.min(one).max(T::zero()), d)?)
        }
    };
    Ok(Entropy::clamp(raw))
}

/// Eve's optimal guessing probability for Alice's key symbol.
pub fn pguess<T: Real>(protocol: &ProtocolSpec, q: T) -> Result<T> {
    check_q(protocol, q)?;
    let one = T::one();
    let two = T::lit(2.0);
    match protocol.family {
        Family::TwoBases => Ok((one + two * ((one - q) * q).sqrt()) / two),
        Family::DPlusOneBases => pguess_d_bases(protocol.dimension, q),
    }
}

/// Square-root-measurement guessing probability of the `(d+1)`-bases
/// protocol as a function of the error rate.
pub fn pguess_d_bases<T: Real>(d: usize, q: T) -> Result<T> {
    let one = T::one();
    let df = T::count(d);
    let dm1 = df - one;
    if !(q >= T::zero() && q < one) {
        return domain("Q", q.as_f64(), "0 <= Q < 1");
    }
    let mut radicand = df * q - (df + one) * q * q;
    if radicand < T::zero() {
        if radicand > -T::epsilon() * T::lit(8.0) {
            radicand = T::zero();
        } else {
            return domain("Q", q.as_f64(), "0 <= Q <= d/(d+1)");
        }
    }
    let one_m_q = one - q;
    let root = (radicand / (dm1 * df * df * one_m_q * one_m_q)).sqrt();
    let bracket = one - (df - T::lit(2.0)) * q / (df * (q - one)) + T::lit(2.0) * dm1 * root;
    Ok(q + one_m_q / df * bracket)
}

/// Qubit six-state guessing probability `½(1 + √(Q(2-3Q)) + Q)`.
pub fn pguess_six_state<T: Real>(q: T) -> Result<T> {
    let radicand = q * (T::lit(2.0) - T::lit(3.0) * q);
    if !(q >= T::zero()) || radicand < T::zero() {
        return domain("Q", q.as_f64(), "0 <= Q <= 2/3");
    }
    Ok((T::one() + radicand.sqrt() + q) / T::lit(2.0))
}

/// `H_min = -log₂ p_guess`.
pub fn min_entropy_from_pguess<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p <= T::one()) {
        return domain("p_guess", p.as_f64(), "0 < p <= 1");
    }
    Ok(-p.log2())
}

/// Error-correction leakage per sifted symbol, `factor·h_d(Q)`.
pub fn leak_ec<T: Real>(protocol: &ProtocolSpec, q: T, factor: T) -> Result<T> {
    protocol.validate()?;
    if !(factor > T::zero()) {
        return domain("leak factor", factor.as_f64(), "factor > 0");
    }
    let h = if protocol.dimension == 2 {
        binary_entropy(q)?
    } else {
        d_ary_entropy(q, protocol.dimension)?
    };
    Ok(factor * h)
}
