//! Statistical parameter estimation: the deviation bound `ξ(ε, |χ|, m)`,
//! the per-parameter (IPOVM) versus common-POVM (CPOVM) dispatch, the
//! worst-case error rate, and a Monte Carlo check of the bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::entropy::physical_q_limit;
use crate::error::{domain, QkdError, Result};
use crate::protocol::{Family, PeKind, ProtocolSpec};
use crate::scalar::Real;

/// Parameter-estimation scheme derived from a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeScheme {
    pub kind: PeKind,
    /// Number of independently estimated parameters; `ε_PE` and `m` are split
    /// this many ways.
    pub n_pe: usize,
    /// Outcomes per POVM.
    pub chi: usize,
}

impl PeScheme {
    /// IPOVM estimates one error rate per basis with a two-outcome POVM.
    /// CPOVM on the symmetrized, one-parameter state needs a single
    /// two-outcome POVM.
    pub fn for_protocol(protocol: &ProtocolSpec) -> Result<Self> {
        protocol.validate()?;
        match protocol.pe_scheme {
            PeKind::Cpovm => Ok(Self {
                kind: PeKind::Cpovm,
                n_pe: 1,
                chi: 2,
            }),
            PeKind::Ipovm => {
                if protocol.family == Family::DPlusOneBases && protocol.dimension > 2 {
                    return Err(QkdError::Unsupported(format!(
                        "IPOVM estimation is only defined for qubits, got d = {}",
                        protocol.dimension
                    )));
                }
                Ok(Self {
                    kind: PeKind::Ipovm,
                    n_pe: protocol.bases(),
                    chi: 2,
                })
            }
        }
    }

    pub fn xi<T: Real>(&self, eps_pe: T, m: T) -> Result<T> {
        let k = T::count(self.n_pe);
        xi_bound(eps_pe / k, self.chi, m / k)
    }
}

/// Deviation outcome of parameter estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeOutcome<T> {
    pub xi: T,
    pub q_eff: T,
    pub clamped: bool,
}

/// `ξ(ε, |χ|, m) = √((ln(1/ε) + |χ|·ln(m+1)) / (8m))`.
pub fn xi_bound<T: Real>(eps_pe: T, chi: usize, m: T) -> Result<T> {
    if !(eps_pe > T::zero() && eps_pe <= T::one()) {
        return domain("eps_PE", eps_pe.as_f64(), "0 < eps_PE <= 1");
    }
    if chi < 2 {
        return domain("|chi|", chi as f64, "|chi| >= 2");
    }
    if !(m > T::zero() && m.is_finite()) {
        return domain("m", m.as_f64(), "m > 0");
    }
    let numerator = eps_pe.recip().ln() + T::count(chi) * (m + T::one()).ln();
    Ok((numerator / (T::lit(8.0) * m)).sqrt())
}

/// Deviation for the protocol's estimation scheme.
pub fn scheme_xi<T: Real>(protocol: &ProtocolSpec, eps_pe: T, m: T) -> Result<T> {
    PeScheme::for_protocol(protocol)?.xi(eps_pe, m)
}

/// Error rate of the least favourable state compatible with the
/// statistics, `min(Q + deviation, (d-1)/d)`.
pub fn worst_case_q<T: Real>(q_err: T, deviation: T, protocol: &ProtocolSpec) -> PeOutcome<T> {
    let limit = physical_q_limit::<T>(protocol);
    let shifted = q_err + deviation;
    if shifted >= limit {
        PeOutcome {
            xi: deviation,
            q_eff: limit,
            clamped: true,
        }
    } else {
        PeOutcome {
            xi: deviation,
            q_eff: shifted,
            clamped: false,
        }
    }
}

fn check_distribution<T: Real>(name: &'static str, p: &[T]) -> Result<()> {
    if p.is_empty() {
        return Err(QkdError::Constraint(format!("{name} is empty")));
    }
    if p.iter().any(|&x| !(x >= T::zero())) {
        return Err(QkdError::Constraint(format!("{name} has a negative entry")));
    }
    let total = p.iter().fold(T::zero(), |a, &x| a + x);
    if (total - T::one()).abs() > T::lit(1e-9) {
        return Err(QkdError::Constraint(format!(
            "{name} sums to {}",
            total.as_f64()
        )));
    }
    Ok(())
}

/// Kullback–Leibler divergence `D(p‖q) = Σ pᵢ·log₂(pᵢ/qᵢ)` in bits.
pub fn relative_entropy<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(QkdError::Constraint(format!(
            "length mismatch {} vs {}",
            p.len(),
            q.len()
        )));
    }
    check_distribution("p", p)?;
    check_distribution("q", q)?;
    let mut total = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > T::zero() && qi == T::zero() {
            return Err(QkdError::Constraint(
                "p is not absolutely continuous with respect to q".into(),
            ));
        }
        total = total + T::xlog2(pi, qi);
    }
    Ok(total.max(T::zero()))
}

/// Half L1 distance between two distributions.
pub fn half_l1<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter()
        .zip(q)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs())
        / T::lit(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeSimulation<T> {
    pub violation_rate: T,
    pub xi_used: T,
    pub trials: usize,
    pub violations: usize,
}

/// Draws `trials` multinomial samples of size `m` from `true_dist` and counts
/// how often the empirical half-L1 deviation exceeds `ξ(ε, |true_dist|, m)`.
///
/// The stream is `ChaCha8` seeded from `seed`; results are reproducible.
pub fn simulate_pe_bound<T: Real>(
    true_dist: &[T],
    m: usize,
    eps_pe: T,
    trials: usize,
    seed: u64,
) -> Result<PeSimulation<T>> {
    check_distribution("true_dist", true_dist)?;
    if m == 0 {
        return domain("m", 0.0, "m >= 1");
    }
    if trials == 0 {
        return domain("trials", 0.0, "trials >= 1");
    }
    let chi = true_dist.len().max(2);
    let xi = xi_bound(eps_pe, chi, T::count(m))?;
    let xi_f = xi.as_f64();
    let probs: Vec<f64> = true_dist.iter().map(|x| x.as_f64()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    let mut violations = 0usize;
    for _ in 0..trials {
        multinomial(&mut rng, m as u64, &probs, &mut counts);
        let dev = counts
            .iter()
            .zip(&probs)
            .map(|(&c, &p)| (c as f64 / m as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        if dev > xi_f {
            violations += 1;
        }
    }
    Ok(PeSimulation {
        violation_rate: T::count(violations) / T::count(trials),
        xi_used: xi,
        trials,
        violations,
    })
}

/// Multinomial draw by successive conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64], out: &mut [u64]) {
    let mut remaining_n = n;
    let mut remaining_p = 1.0f64;
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if i == last || remaining_n == 0 {
            out[i] = remaining_n;
            remaining_n = 0;
            continue;
        }
        let cond = if remaining_p > 0.0 {
            (p / remaining_p).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = Binomial::new(remaining_n, cond)
            .expect("conditional probability in [0, 1]")
            .sample(rng);
        out[i] = k;
        remaining_n -= k;
        remaining_p -= p;
    }
}
