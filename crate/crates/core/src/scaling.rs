//! Scale-dependent noise laws `k ↦ min(p(k; p0, θ), 1)`.
//!
//! Three closed families are supported:
//!
//! * `Constant`: `p0`
//! * `Polynomial`: `p0 (1 + α (k - 1))^γ`
//! * `Exponential`: `p0 exp(α (k - 1)^γ)`
//!
//! All are non-decreasing in `k`, `p0`, `α` and `γ` for `k ≥ 1`, and all equal
//! `p0` at `k = 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum ScalingLaw {
    Constant { p0: f64 },
    Polynomial { p0: f64, alpha: f64, gamma: f64 },
    Exponential { p0: f64, alpha: f64, gamma: f64 },
}

/// Largest redundancy before the law saturates at p = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KMax {
    Finite(f64),
    Unbounded,
}

impl KMax {
    pub fn finite(self) -> Option<f64> {
        match self {
            KMax::Finite(k) => Some(k),
            KMax::Unbounded => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, KMax::Finite(_))
    }
}

impl fmt::Display for KMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KMax::Finite(k) => write!(f, "{k}"),
            KMax::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// A family with free `p0`, used by the threshold solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawFamily {
    Polynomial,
    Exponential,
}

impl LawFamily {
    /// Instantiate the family at `p0` with `θ = (alpha, gamma)`, unvalidated.
    pub fn with_p0(self, p0: f64, alpha: f64, gamma: f64) -> ScalingLaw {
        match self {
            LawFamily::Polynomial => ScalingLaw::Polynomial { p0, alpha, gamma },
            LawFamily::Exponential => ScalingLaw::Exponential { p0, alpha, gamma },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LawFamily::Polynomial => "polynomial",
            LawFamily::Exponential => "exponential",
        }
    }
}

impl std::str::FromStr for LawFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "polynomial" | "poly" => Ok(LawFamily::Polynomial),
            "exponential" | "exp" => Ok(LawFamily::Exponential),
            other => Err(Error::domain(format!("unknown law family '{other}'"))),
        }
    }
}

fn check_p0(p0: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p0) {
        Ok(())
    } else {
        Err(Error::domain(format!("p0 = {p0} outside [0, 1]")))
    }
}

fn check_shape(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} = {v} must be a finite non-negative real"
        )))
    }
}

impl ScalingLaw {
    pub fn constant(p0: f64) -> Result<Self> {
        check_p0(p0)?;
        Ok(ScalingLaw::Constant { p0 })
    }

    /// `p0 (1 + α (k-1))^γ`; α = 0 or γ = 0 normalizes to `Constant`.
    pub fn polynomial(p0: f64, alpha: f64, gamma: f64) -> Result<Self> {
        check_p0(p0)?;
        check_shape("alpha", alpha)?;
        check_shape("gamma", gamma)?;
        if alpha == 0.0 || gamma == 0.0 {
            return Ok(ScalingLaw::Constant { p0 });
        }
        Ok(ScalingLaw::Polynomial { p0, alpha, gamma })
    }

    /// `p0 exp(α (k-1)^γ)`; α = 0 normalizes to `Constant`. γ = 0 is rejected
    /// because the law would jump from `p0` to `p0 e^α` just past k = 1.
    pub fn exponential(p0: f64, alpha: f64, gamma: f64) -> Result<Self> {
        check_p0(p0)?;
        check_shape("alpha", alpha)?;
        check_shape("gamma", gamma)?;
        if alpha == 0.0 {
            return Ok(ScalingLaw::Constant { p0 });
        }
        if gamma == 0.0 {
            return Err(Error::domain("exponential law needs gamma > 0"));
        }
        Ok(ScalingLaw::Exponential { p0, alpha, gamma })
    }

    /// Validate a law built directly from its variant, applying the same
    /// normalization as the constructors.
    pub fn validated(self) -> Result<Self> {
        match self {
            ScalingLaw::Constant { p0 } => ScalingLaw::constant(p0),
            ScalingLaw::Polynomial { p0, alpha, gamma } => ScalingLaw::polynomial(p0, alpha, gamma),
            ScalingLaw::Exponential { p0, alpha, gamma } => ScalingLaw::exponential(p0, alpha, gamma),
        }
    }

    pub fn p0(&self) -> f64 {
        match *self {
            ScalingLaw::Constant { p0 } | ScalingLaw::Polynomial { p0, .. } | ScalingLaw::Exponential { p0, .. } => p0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalingLaw::Constant { .. } => "constant",
            ScalingLaw::Polynomial { .. } => "polynomial",
            ScalingLaw::Exponential { .. } => "exponential",
        }
    }

    /// The unclamped law value.
    pub(crate) fn raw(&self, k: f64) -> f64 {
        match *self {
            ScalingLaw::Constant { p0 } => p0,
            ScalingLaw::Polynomial { p0, alpha, gamma } => p0 * (1.0 + alpha * (k - 1.0)).powf(gamma),
            ScalingLaw::Exponential { p0, alpha, gamma } => {
                let u = k - 1.0;
                if u <= 0.0 {
                    p0
                } else {
                    p0 * (alpha * u.powf(gamma)).exp()
                }
            }
        }
    }

    /// Clamped noise `min(p(k), 1)` without the `k ≥ 1` check.
    pub(crate) fn at(&self, k: f64) -> f64 {
        self.raw(k).min(1.0)
    }

    /// Unclamped first and second derivatives in `k`.
    pub(crate) fn raw_derivs(&self, k: f64) -> (f64, f64) {
        match *self {
            ScalingLaw::Constant { .. } => (0.0, 0.0),
            ScalingLaw::Polynomial { p0, alpha, gamma } => {
                let base = 1.0 + alpha * (k - 1.0);
                let d1 = p0 * gamma * alpha * base.powf(gamma - 1.0);
                let d2 = p0 * gamma * (gamma - 1.0) * alpha * alpha * base.powf(gamma - 2.0);
                (d1, d2)
            }
            ScalingLaw::Exponential { p0, alpha, gamma } => {
                let u = k - 1.0;
                if u <= 0.0 {
                    // right-hand limits at k = 1
                    let d1 = if gamma < 1.0 {
                        f64::INFINITY
                    } else if gamma == 1.0 {
                        p0 * alpha
                    } else {
                        0.0
                    };
                    let d2 = if gamma < 1.0 {
                        f64::NEG_INFINITY
                    } else if gamma == 1.0 {
                        p0 * alpha * alpha
                    } else if gamma < 2.0 {
                        f64::INFINITY
                    } else if gamma == 2.0 {
                        2.0 * p0 * alpha
                    } else {
                        0.0
                    };
                    return (d1, d2);
                }
                let p = p0 * (alpha * u.powf(gamma)).exp();
                let e1 = alpha * gamma * u.powf(gamma - 1.0);
                let e2 = alpha * gamma * (gamma - 1.0) * u.powf(gamma - 2.0);
                (p * e1, p * (e1 * e1 + e2))
            }
        }
    }
}

impl fmt::Display for ScalingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScalingLaw::Constant { p0 } => write!(f, "constant(p0={p0})"),
            ScalingLaw::Polynomial { p0, alpha, gamma } => {
                write!(f, "polynomial(p0={p0}, alpha={alpha}, gamma={gamma})")
            }
            ScalingLaw::Exponential { p0, alpha, gamma } => {
                write!(f, "exponential(p0={p0}, alpha={alpha}, gamma={gamma})")
            }
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if k >= 1.0 && !k.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("redundancy k = {k} must be ≥ 1")))
    }
}

/// Noise per physical qubit at redundancy `k`, clamped at 1.
pub fn noise_at(law: &ScalingLaw, k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(law.at(k))
}

/// First and second derivatives of the unclamped law. Fails past `k_max`,
/// where the clamp makes the derivative zero.
pub fn noise_derivs(law: &ScalingLaw, k: f64) -> Result<(f64, f64)> {
    check_k(k)?;
    if let KMax::Finite(km) = k_max(law) {
        if k > km * (1.0 + 1e-12) {
            return Err(Error::ClampedRegion { k, k_max: km });
        }
    }
    Ok(law.raw_derivs(k))
}

/// `max{k | p(k; p0, θ) ≤ 1}`.
pub fn k_max(law: &ScalingLaw) -> KMax {
    let p0 = law.p0();
    if p0 >= 1.0 {
        return KMax::Finite(1.0);
    }
    if p0 <= 0.0 {
        // Polynomial/Constant stay at 0; the exponential law also stays at 0.
        return KMax::Unbounded;
    }
    match *law {
        ScalingLaw::Constant { .. } => KMax::Unbounded,
        ScalingLaw::Polynomial { alpha, gamma, .. } => {
            if alpha <= 0.0 || gamma <= 0.0 {
                KMax::Unbounded
            } else {
                KMax::Finite(1.0 + (p0.powf(-1.0 / gamma) - 1.0) / alpha)
            }
        }
        ScalingLaw::Exponential { alpha, gamma, .. } => {
            if alpha <= 0.0 || gamma <= 0.0 {
                KMax::Unbounded
            } else {
                KMax::Finite(1.0 + ((1.0 / p0).ln() / alpha).powf(1.0 / gamma))
            }
        }
    }
}
