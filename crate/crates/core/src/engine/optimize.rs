use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::protocol::{Family, ProtocolSpec};
use crate::scalar::Real;

use super::budget::SecurityBudget;
use super::rate::{key_rate, Bound, RateBreakdown, RateOptions};
use super::yields::test_multiplicity;

/// Grid layout of the deterministic optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub refinements: usize,
    pub shrink: f64,
    /// Lower bound of each of `ε_PE`, `ε_PA`, `ε̄` as a fraction of
    /// `ε - ε_EC`, divided by three.
    pub min_fraction: f64,
    /// Smallest key-basis probability considered.
    pub q_floor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 15,
            refinements: 3,
            shrink: 4.0,
            min_fraction: 1e-3,
            q_floor: 0.01,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(QkdError::Constraint("grid needs at least 2 points".into()));
        }
        if !(self.shrink > 1.0) {
            return Err(QkdError::Constraint("shrink factor must exceed 1".into()));
        }
        if !(self.min_fraction > 0.0 && self.min_fraction < 1.0) {
            return Err(QkdError::Constraint(
                "min_fraction must lie in (0, 1)".into(),
            ));
        }
        if !(self.q_floor > 0.0 && self.q_floor < 1.0) {
            return Err(QkdError::Constraint("q_floor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Optimizing point in the search coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalParams<T> {
    pub eps_pe: T,
    pub eps_pa: T,
    pub eps_bar: T,
    pub q_key: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum<T> {
    pub best: RateBreakdown<T>,
    pub params: OptimalParams<T>,
    /// Candidates evaluated, infeasible ones included.
    pub evaluations: usize,
}

/// Everything `optimize_rate` needs besides the observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProblem<T> {
    pub bound: Bound,
    pub protocol: ProtocolSpec,
    pub q_err: T,
    pub n_total: T,
    pub eps_total: T,
    pub eps_ec: T,
    pub options: RateOptions<T>,
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn at(&self, i: usize, points: usize) -> f64 {
        if i + 1 == points {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (points - 1) as f64
        }
    }

    fn around(&self, center: f64, shrink: f64, outer: &Range) -> Range {
        let width = ((self.hi - self.lo) / shrink).min(outer.hi - outer.lo);
        let mut lo = center - width / 2.0;
        let mut hi = center + width / 2.0;
        if lo < outer.lo {
            hi += outer.lo - lo;
            lo = outer.lo;
        }
        if hi > outer.hi {
            lo -= hi - outer.hi;
            hi = outer.hi;
        }
        Range {
            lo: lo.max(outer.lo),
            hi,
        }
    }
}

/// Range of `log₁₀(1 - q)` keeping `m ≥ 1`.
fn q_range<T: Real>(problem: &RateProblem<T>, grid: &GridSpec) -> Result<Range> {
    let d_f = match problem.protocol.family {
        Family::TwoBases => 1.0,
        Family::DPlusOneBases => problem.protocol.dimension as f64,
    };
    let mult = test_multiplicity::<f64>(&problem.protocol, problem.options.yield_rule);
    // m = mult·N·((1-q)/d_f)² ≥ 1
    let lo = (d_f / (mult * problem.n_total.as_f64()).sqrt()).log10();
    let hi = (1.0 - grid.q_floor).log10();
    if !(lo <= hi) {
        return Err(QkdError::Constraint(format!(
            "N = {} cannot supply one estimation signal",
            problem.n_total.as_f64()
        )));
    }
    Ok(Range { lo, hi })
}

fn candidate<T: Real>(
    problem: &RateProblem<T>,
    x_pe: f64,
    x_pa: f64,
    t: f64,
    floor: f64,
) -> Option<(SecurityBudget<T>, T)> {
    let share = problem.eps_total - problem.eps_ec;
    let f_pe = 10f64.powf(x_pe);
    let f_pa = 10f64.powf(x_pa);
    if 1.0 - f_pe - f_pa < floor {
        return None;
    }
    let eps_pe = share * T::lit(f_pe);
    let eps_pa = share * T::lit(f_pa);
    let budget =
        SecurityBudget::with_remainder(problem.eps_total, problem.eps_ec, eps_pe, eps_pa).ok()?;
    if budget.eps_bar < share * T::lit(floor) {
        return None;
    }
    let q_key = T::one() - T::lit(10f64.powf(t));
    Some((budget, q_key))
}

/// Maximizes the key rate over `(ε_PE, ε_PA, ε̄, q)`.
///
/// The first two budget shares are searched as `log₁₀` fractions of
/// `ε - ε_EC`, `ε̄` takes the remainder, and `q` is searched as
/// `log₁₀(1 - q)`. After a coarse pass each range is shrunk around the
/// incumbent; the earliest candidate in grid order wins ties. `observer`
/// sees every feasible candidate.
pub fn optimize_rate_observed<T: Real>(
    problem: &RateProblem<T>,
    grid: &GridSpec,
    mut observer: impl FnMut(&RateBreakdown<T>),
) -> Result<Optimum<T>> {
    grid.validate()?;
    problem.protocol.validate()?;
    if !(problem.eps_ec > T::zero() && problem.eps_ec < problem.eps_total) {
        return Err(QkdError::Budget(format!(
            "eps_EC = {} must lie in (0, eps = {})",
            problem.eps_ec.as_f64(),
            problem.eps_total.as_f64()
        )));
    }
    if !(problem.eps_total < T::one()) {
        return Err(QkdError::Budget("eps must be below 1".into()));
    }

    let floor = grid.min_fraction / 3.0;
    let eps_outer = Range {
        lo: floor.log10(),
        hi: (1.0 - 2.0 * floor).log10(),
    };
    let q_outer = q_range(problem, grid)?;
    let mut ranges = [eps_outer, eps_outer, q_outer];
    let outer = ranges;

    let mut best: Option<(RateBreakdown<T>, [f64; 3])> = None;
    let mut evaluations = 0usize;
    let mut last_error = None;
    for pass in 0..=grid.refinements {
        if pass > 0 {
            let center = best.as_ref().map(|b| b.1).ok_or_else(|| {
                last_error.clone().unwrap_or_else(|| {
                    QkdError::Constraint("no feasible candidate in the search grid".into())
                })
            })?;
            for k in 0..3 {
                ranges[k] = ranges[k].around(center[k], grid.shrink, &outer[k]);
            }
        }
        let pts = grid.points;
        for i in 0..pts {
            let x_pe = ranges[0].at(i, pts);
            for j in 0..pts {
                let x_pa = ranges[1].at(j, pts);
                for k in 0..pts {
                    let t = ranges[2].at(k, pts);
                    evaluations += 1;
                    let Some((budget, q_key)) = candidate(problem, x_pe, x_pa, t, floor) else {
                        continue;
                    };
                    let r = match key_rate(
                        problem.bound,
                        &problem.protocol,
                        problem.q_err,
                        problem.n_total,
                        &budget,
                        q_key,
                        &problem.options,
                    ) {
                        Ok(r) => r,
                        Err(e) => {
                            last_error = Some(e);
                            continue;
                        }
                    };
                    observer(&r);
                    let better = match &best {
                        None => true,
                        Some((b, _)) => r.rate > b.rate,
                    };
                    if better {
                        best = Some((r, [x_pe, x_pa, t]));
                    }
                }
            }
        }
    }

    let (best, _) = best.ok_or_else(|| {
        last_error.unwrap_or_else(|| {
            QkdError::Constraint("no feasible candidate in the search grid".into())
        })
    })?;
    Ok(Optimum {
        params: OptimalParams {
            eps_pe: best.budget.eps_pe,
            eps_pa: best.budget.eps_pa,
            eps_bar: best.budget.eps_bar,
            q_key: best.q_key,
        },
        best,
        evaluations,
    })
}

pub fn optimize_rate<T: Real>(problem: &RateProblem<T>, grid: &GridSpec) -> Result<Optimum<T>> {
    optimize_rate_observed(problem, grid, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::PeKind;

    fn problem(bound: Bound, protocol: ProtocolSpec, q: f64, n: f64) -> RateProblem<f64> {
        RateProblem {
            bound,
            protocol,
            q_err: q,
            n_total: n,
            eps_total: 1e-9,
            eps_ec: 1e-10,
            options: RateOptions::default(),
        }
    }

    #[test]
    fn deterministic() {
        let p = problem(
            Bound::VonNeumann,
            ProtocolSpec::bb84(PeKind::Cpovm),
            0.03,
            1e6,
        );
        let a = optimize_rate(&p, &GridSpec::default()).unwrap();
        let b = optimize_rate(&p, &GridSpec::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 4 * 15 * 15 * 15);
    }

    #[test]
    fn every_candidate_respects_the_budget_and_bounds() {
        let p = problem(
            Bound::MinEntropy,
            ProtocolSpec::six_state(PeKind::Ipovm),
            0.02,
            1e5,
        );
        let share = 1e-9 - 1e-10;
        let mut seen = 0;
        optimize_rate_observed(&p, &GridSpec::default(), |r| {
            seen += 1;
            assert!(r.budget.validate().is_ok());
            for x in [r.budget.eps_pe, r.budget.eps_pa, r.budget.eps_bar] {
                assert!(x >= share * 1e-3 / 3.0 * (1.0 - 1e-12));
            }
            assert!(r.m >= 1.0 - 1e-9);
            assert!((r.rate - r.recompose()).abs() <= 1e-12);
        })
        .unwrap();
        assert!(seen > 1000);
    }

    #[test]
    fn improves_on_the_coarse_grid() {
        let p = problem(
            Bound::VonNeumann,
            ProtocolSpec::bb84(PeKind::Cpovm),
            0.05,
            1e8,
        );
        let coarse = GridSpec {
            refinements: 0,
            ..GridSpec::default()
        };
        let a = optimize_rate(&p, &coarse).unwrap();
        let b = optimize_rate(&p, &GridSpec::default()).unwrap();
        assert!(b.best.rate >= a.best.rate);
    }

    #[test]
    fn small_n_reports_a_negative_optimum() {
        let p = problem(
            Bound::VonNeumann,
            ProtocolSpec::bb84(PeKind::Cpovm),
            0.05,
            1e3,
        );
        let o = optimize_rate(&p, &GridSpec::default()).unwrap();
        assert!(o.best.rate <= 0.0);
        assert_eq!(o.params.q_key, o.best.q_key);
    }

    #[test]
    fn infeasible_inputs() {
        let mut p = problem(
            Bound::VonNeumann,
            ProtocolSpec::bb84(PeKind::Cpovm),
            0.05,
            1e6,
        );
        p.eps_ec = 1e-9;
        assert!(optimize_rate(&p, &GridSpec::default()).is_err());
        let mut p = problem(
            Bound::VonNeumann,
            ProtocolSpec::bb84(PeKind::Cpovm),
            0.05,
            0.5,
        );
        p.n_total = 0.5;
        assert!(optimize_rate(&p, &GridSpec::default()).is_err());
        let p = problem(
            Bound::VonNeumann,
            ProtocolSpec::bb84(PeKind::Cpovm),
            0.05,
            1e6,
        );
        let bad = GridSpec {
            points: 1,
            ..GridSpec::default()
        };
        assert!(optimize_rate(&p, &bad).is_err());
    }
}
