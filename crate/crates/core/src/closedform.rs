//! Exact erasure thresholds for the linear law `p0 (1 + α (k - 1))` and the
//! power law `p0 k^γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The minimum sits at k = 1 and the threshold is `1 - c`.
    Boundary,
    /// The minimum sits at an interior stationary point.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub branch: Branch,
    pub p_th: f64,
}

fn check_cost(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("closed forms need 0 < c < 1, got {c}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Interior branch of the linear law. `(√(cα) - √(cα-α+1))² / (α-1)²`
/// rewritten as `1 / (√(cα) + √(cα-α+1))²`, which is finite at α = 1.
fn linear_interior(alpha: f64, c: f64) -> f64 {
    let s = (c * alpha).sqrt() + (c * alpha - alpha + 1.0).sqrt();
    1.0 / (s * s)
}

fn power_interior(gamma: f64, c: f64) -> f64 {
    ((gamma / c).ln() * gamma - (gamma + 1.0).ln() * (gamma + 1.0)).exp()
}

pub fn erasure_threshold_linear(alpha: f64, c: f64) -> Result<ClosedForm> {
    check_cost(c)?;
    check_positive("alpha", alpha)?;
    Ok(if alpha >= c / (1.0 - c) {
        ClosedForm {
            branch: Branch::Boundary,
            p_th: 1.0 - c,
        }
    } else {
        ClosedForm {
            branch: Branch::Interior,
            p_th: linear_interior(alpha, c),
        }
    })
}

pub fn erasure_threshold_power(gamma: f64, c: f64) -> Result<ClosedForm> {
    check_cost(c)?;
    check_positive("gamma", gamma)?;
    Ok(if gamma >= c / (1.0 - c) {
        ClosedForm {
            branch: Branch::Boundary,
            p_th: 1.0 - c,
        }
    } else {
        ClosedForm {
            branch: Branch::Interior,
            p_th: power_interior(gamma, c),
        }
    })
}
