use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::protocol::{Family, ProtocolSpec};
use crate::scalar::Real;

/// How the number of estimation signals follows from the basis
/// probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YieldRule {
    /// `m = N·p²`.
    #[default]
    PaperLiteral,
    /// `m = N·d·p²` for the `(d+1)`-bases family (both parties in the same
    /// test basis, any of the `d`); `N·p²` for BB84.
    PerBasis,
}

/// Signal accounting for one choice of the key-basis probability `q`.
///
/// `n = N·q²` keeps rounds where both parties picked the key basis; the
/// remainder `N - n - m` is sifting loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YieldModel<T> {
    pub n_total: T,
    pub q_key: T,
    pub p_pe: T,
    pub n: T,
    pub m: T,
    pub rule: YieldRule,
}

impl<T: Real> YieldModel<T> {
    /// Rounds discarded in sifting.
    pub fn discarded(&self) -> T {
        self.n_total - self.n - self.m
    }
}

/// Test-basis probability `p` for key-basis probability `q`:
/// `q = 1 - d·p` (`(d+1)` bases) or `q = 1 - p` (two bases).
pub fn test_basis_probability<T: Real>(protocol: &ProtocolSpec, q_key: T) -> T {
    match protocol.family {
        Family::TwoBases => T::one() - q_key,
        Family::DPlusOneBases => (T::one() - q_key) / T::count(protocol.dimension),
    }
}

/// Multiplier `c` in `m = c·N·p²`.
pub fn test_multiplicity<T: Real>(protocol: &ProtocolSpec, rule: YieldRule) -> T {
    match (rule, protocol.family) {
        (YieldRule::PerBasis, Family::DPlusOneBases) => T::count(protocol.dimension),
        _ => T::one(),
    }
}

pub fn yields<T: Real>(
    n_total: T,
    q_key: T,
    protocol: &ProtocolSpec,
    rule: YieldRule,
) -> Result<YieldModel<T>> {
    if !(n_total > T::zero() && n_total.is_finite()) {
        return domain("N", n_total.as_f64(), "N > 0");
    }
    if !(q_key > T::zero() && q_key < T::one()) {
        return domain("q", q_key.as_f64(), "0 < q < 1");
    }
    let p_pe = test_basis_probability(protocol, q_key);
    let m = test_multiplicity::<T>(protocol, rule) * n_total * p_pe * p_pe;
    let n = n_total * q_key * q_key;
    Ok(YieldModel {
        n_total,
        q_key,
        p_pe,
        n,
        m,
        rule,
    })
}
