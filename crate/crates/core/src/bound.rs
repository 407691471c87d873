//! Non-asymptotic redundancy lower bound and the objective `g(k, p0)`.
//!
//! For ε-accurate computation of an `n`-bit function with `R_f` distinct
//! outputs through a Holevo-additive channel, the redundancy must satisfy
//! `k > c / χ(N_{p(k)})` with
//! `c = ((1 - ε) log₂ R_f - h₂(ε)) / n`.

use serde::{Deserialize, Serialize};

use crate::channels::{h2, ChannelKind, NoiseLevel};
use crate::error::{Error, Result};
use crate::scaling::{k_max, KMax, ScalingLaw};

/// Accuracy requirement `(ε, log₂ R_f, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySpec {
    pub epsilon: f64,
    pub log2_rf: f64,
    pub n: u32,
}

impl AccuracySpec {
    pub fn new(epsilon: f64, log2_rf: f64, n: u32) -> Result<Self> {
        let spec = AccuracySpec { epsilon, log2_rf, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::domain(format!(
                "epsilon = {} must lie in (0, 0.5)",
                self.epsilon
            )));
        }
        if self.n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if !(self.log2_rf >= 0.0 && self.log2_rf <= self.n as f64) {
            return Err(Error::domain(format!(
                "log2_rf = {} must lie in [0, n = {}]",
                self.log2_rf, self.n
            )));
        }
        Ok(())
    }
}

/// `c(ε, R_f, n)`. Non-positive values mean the bound is vacuous.
pub fn capacity_cost(spec: &AccuracySpec) -> f64 {
    ((1.0 - spec.epsilon) * spec.log2_rf - h2(spec.epsilon)) / spec.n as f64
}

/// `g(k) = c/k - χ(N_{p(k)})` for a fixed channel, law and cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub kind: ChannelKind,
    pub law: ScalingLaw,
    pub c: f64,
    k_max: KMax,
}

impl Objective {
    pub fn new(kind: ChannelKind, law: ScalingLaw, spec: &AccuracySpec) -> Self {
        Self::with_cost(kind, law, capacity_cost(spec))
    }

    pub fn with_cost(kind: ChannelKind, law: ScalingLaw, c: f64) -> Self {
        Objective {
            kind,
            law,
            c,
            k_max: k_max(&law),
        }
    }

    pub fn k_max(&self) -> KMax {
        self.k_max
    }

    pub fn value(&self, k: f64) -> f64 {
        self.c / k - self.kind.chi(self.law.at(k))
    }

    /// ∂g/∂k. Past `k_max` the clamped law is flat and only `-c/k²` remains;
    /// at `k_max` itself the left derivative is returned.
    pub fn slope(&self, k: f64) -> f64 {
        let cost = -self.c / (k * k);
        if let KMax::Finite(km) = self.k_max {
            if k > km * (1.0 + 1e-12) {
                return cost;
            }
        }
        let (dp, _) = self.law.raw_derivs(k);
        if dp == 0.0 {
            return cost;
        }
        cost - self.kind.chi_slope(self.law.at(k)) * dp
    }
}

/// `g(k, p0)`; negative means the pair is not excluded by the bound.
pub fn objective_g(kind: ChannelKind, law: &ScalingLaw, spec: &AccuracySpec, k: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::domain(format!("redundancy k = {k} must be ≥ 1")));
    }
    Ok(Objective::new(kind, *law, spec).value(k))
}

/// Outcome of the `N > n c / χ` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RedundancyBound {
    /// `N` must strictly exceed `n_min`.
    Finite { n_min: f64 },
    /// χ = 0 while c > 0: no finite number of physical qubits suffices.
    Infeasible,
    /// c ≤ 0: the bound carries no information.
    Vacuous,
}

pub fn redundancy_lower_bound(kind: ChannelKind, p: NoiseLevel, spec: &AccuracySpec) -> RedundancyBound {
    let c = capacity_cost(spec);
    if c <= 0.0 {
        return RedundancyBound::Vacuous;
    }
    let chi = kind.chi(p.value());
    if chi <= 0.0 {
        return RedundancyBound::Infeasible;
    }
    RedundancyBound::Finite {
        n_min: spec.n as f64 * c / chi,
    }
}

/// Lower bound on the error probability at redundancy `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBound {
    pub eps: f64,
    /// No root below 1/2; `eps` is then reported as 0.5.
    pub saturated: bool,
}

const ERROR_ROOT_TOL: f64 = 1e-9;
const ERROR_ROOT_MAX_ITERS: usize = 64;

/// Smallest ε in [0, 1/2) with `ε ≥ 1 - (k n χ(N_{p(k)}) + h₂(ε)) / log₂ R_f`.
pub fn error_lower_bound(kind: ChannelKind, law: &ScalingLaw, k: f64, log2_rf: f64, n: u32) -> Result<ErrorBound> {
    if !(log2_rf > 0.0) {
        return Err(Error::domain("log2_rf must be positive for the error bound"));
    }
    if !(k >= 1.0) {
        return Err(Error::domain(format!("redundancy k = {k} must be ≥ 1")));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let info = k * n as f64 * kind.chi(law.at(k));
    Ok(solve_error_root(info, log2_rf))
}

// r(ε) = ε - 1 + (info + h₂(ε))/log₂R_f is strictly increasing on [0, 1/2].
fn solve_error_root(info: f64, log2_rf: f64) -> ErrorBound {
    let residual = |e: f64| e - 1.0 + (info + h2(e)) / log2_rf;
    if residual(0.0) >= 0.0 {
        return ErrorBound {
            eps: 0.0,
            saturated: false,
        };
    }
    if residual(0.5) < 0.0 {
        return ErrorBound {
            eps: 0.5,
            saturated: true,
        };
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..ERROR_ROOT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r >= 0.0 {
            hi = mid;
            if r < ERROR_ROOT_TOL {
                break;
            }
        } else {
            lo = mid;
        }
    }
    ErrorBound {
        eps: hi,
        saturated: false,
    }
}

/// One row of an error-probability curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorCurvePoint {
    pub k: f64,
    pub p_of_k: f64,
    pub chi: f64,
    pub eps_lb: f64,
    pub saturated: bool,
}

/// Evaluate [`error_lower_bound`] on each `k`, sorted ascending.
pub fn error_curve(
    kind: ChannelKind,
    law: &ScalingLaw,
    ks: &[f64],
    log2_rf: f64,
    n: u32,
) -> Result<Vec<ErrorCurvePoint>> {
    let mut ks = ks.to_vec();
    ks.sort_by(f64::total_cmp);
    ks.into_iter()
        .map(|k| {
            let b = error_lower_bound(kind, law, k, log2_rf, n)?;
            let p = law.at(k);
            Ok(ErrorCurvePoint {
                k,
                p_of_k: p,
                chi: kind.chi(p),
                eps_lb: b.eps,
                saturated: b.saturated,
            })
        })
        .collect()
}
