use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::scalar::Real;

/// Split of the total security parameter
/// `ε = ε_PA + ε_EC + ε_PE + ε̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget<T> {
    pub eps_total: T,
    pub eps_ec: T,
    pub eps_pe: T,
    pub eps_pa: T,
    pub eps_bar: T,
}

impl<T: Real> SecurityBudget<T> {
    /// Assigns the remainder `ε - ε_EC - ε_PE - ε_PA` to `ε̄`.
    pub fn with_remainder(eps_total: T, eps_ec: T, eps_pe: T, eps_pa: T) -> Result<Self> {
        let budget = Self {
            eps_total,
            eps_ec,
            eps_pe,
            eps_pa,
            eps_bar: eps_total - eps_ec - eps_pe - eps_pa,
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn from_parts(eps_total: T, eps_ec: T, eps_pe: T, eps_pa: T, eps_bar: T) -> Result<Self> {
        let budget = Self {
            eps_total,
            eps_ec,
            eps_pe,
            eps_pa,
            eps_bar,
        };
        budget.validate()?;
        Ok(budget)
    }

    /// `ε_PA + ε_EC + ε_PE + ε̄`.
    pub fn sum(&self) -> T {
        self.eps_pa + self.eps_ec + self.eps_pe + self.eps_bar
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [
            ("eps_total", self.eps_total),
            ("eps_EC", self.eps_ec),
            ("eps_PE", self.eps_pe),
            ("eps_PA", self.eps_pa),
            ("eps_bar", self.eps_bar),
        ];
        for (name, x) in parts {
            if !(x > T::zero() && x < T::one()) {
                return Err(QkdError::Budget(format!(
                    "{name} = {} not in (0, 1)",
                    x.as_f64()
                )));
            }
        }
        let drift = (self.sum() - self.eps_total).abs() / self.eps_total;
        if drift > T::lit(1e-15).max(T::epsilon() * T::lit(4.0)) {
            return Err(QkdError::Budget(format!(
                "components sum to {} but eps_total = {}",
                self.sum().as_f64(),
                self.eps_total.as_f64()
            )));
        }
        Ok(())
    }
}
