//! Bi-level threshold solver.
//!
//! The outer problem bisects `p0` on [0, 1] for the smallest value with
//! `g*(p0) = min_{k ∈ [1, k_max]} g(k, p0) ≥ 0`. The inner problem is solved by
//! constant-step projected gradient descent when `g` is convex in `k`, and by
//! a traversal that alternates gradient steps with fixed-size perturbations
//! otherwise. Step sizes come from a Lipschitz bound on `∂²g/∂k²`.

use serde::{Deserialize, Serialize};

use crate::bound::{capacity_cost, AccuracySpec, Objective};
use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::scaling::{k_max, KMax, LawFamily, ScalingLaw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Bisection tolerance on `p0`.
    pub delta_p0: f64,
    /// Lower-level accuracy on `g*`.
    pub delta: f64,
    /// Bisection iteration cap.
    pub max_iters: usize,
    /// Cap on gradient and perturbation steps per lower-level solve.
    pub max_inner_iters: usize,
    /// Resolution of the grid oracle on each axis.
    pub grid_points: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            delta_p0: 1e-4,
            delta: 1e-6,
            max_iters: 200,
            max_inner_iters: 1_000_000,
            grid_points: 2001,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_p0 > 0.0) || !(self.delta > 0.0) {
            return Err(Error::domain("delta_p0 and delta must be positive"));
        }
        if self.max_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::domain("iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// Lipschitz constant of `∂g/∂k` on [1, k_max] for a polynomial law.
///
/// A constant law is the polynomial law with α = 0. Exponential laws have no
/// closed form; see [`empirical_lipschitz`].
pub fn lipschitz_constant(kind: ChannelKind, law: &ScalingLaw, c: f64) -> Result<f64> {
    let (p0, alpha, gamma) = match *law {
        ScalingLaw::Constant { p0 } => (p0, 0.0, 0.0),
        ScalingLaw::Polynomial { p0, alpha, gamma } => (p0, alpha, gamma),
        ScalingLaw::Exponential { .. } => return Err(Error::NoClosedFormLipschitz("exponential law")),
    };
    let base = 2.0 * c.abs();
    let a2g = alpha * alpha * gamma;
    let ln2 = std::f64::consts::LN_2;
    let l = match kind {
        ChannelKind::Erasure => {
            let expo = if gamma > 0.0 { (2.0 / gamma).min(1.0) } else { 1.0 };
            base + a2g * (gamma - 1.0).abs() * p0.powf(expo)
        }
        ChannelKind::SymmetricGad => base + a2g / (2.0 * ln2) * ((gamma - 1.0).abs() + gamma / 3.0),
        ChannelKind::Depolarizing => {
            if alpha == 0.0 || gamma == 0.0 {
                base
            } else {
                if p0 <= 0.0 {
                    return Err(Error::domain("depolarizing Lipschitz constant is singular at p0 = 0"));
                }
                base + a2g / (2.0 * ln2)
                    * (2.0 * gamma / (p0 * (2.0 - p0)) + (gamma - 1.0).abs() * ((2.0 - p0) / p0).ln())
            }
        }
    };
    Ok(l)
}

const EMPIRICAL_SCAN_POINTS: usize = 10_000;
const EMPIRICAL_SAFETY: f64 = 1.5;

/// 1.5 × the largest second difference of `g` over a uniform scan of
/// [1, k_max]. Used when no closed-form constant exists.
pub fn empirical_lipschitz(obj: &Objective, k_max: f64) -> f64 {
    let n = EMPIRICAL_SCAN_POINTS;
    let h = (k_max - 1.0) / (n - 1) as f64;
    if !(h > 0.0) {
        return 2.0 * obj.c.abs().max(f64::MIN_POSITIVE);
    }
    let values: Vec<f64> = (0..n).map(|i| obj.value(1.0 + h * i as f64)).collect();
    let peak = values
        .windows(3)
        .map(|w| ((w[2] - 2.0 * w[1] + w[0]) / (h * h)).abs())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    (EMPIRICAL_SAFETY * peak)
        .max(2.0 * obj.c.abs() / (k_max * k_max * k_max))
        .max(1e-12)
}

/// Step direction for [`proj_gd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `k ← k - ξ g'(k)`: true descent, used for convex lower levels.
    Descent,
    /// `k ← k + ξ |g'(k)|`: monotone rightward traversal used inside the
    /// line search, descending or ascending as the slope dictates.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdSettings {
    pub lipschitz: f64,
    pub zeta: f64,
    pub direction: Direction,
    pub max_steps: usize,
    pub record_trace: bool,
}

/// One iterate of a gradient run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GdStep {
    pub k: f64,
    pub g: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjGdOutcome {
    pub g_end: f64,
    pub k_end: f64,
    pub steps: usize,
    /// Lowest objective value among the iterates.
    pub g_best: f64,
    pub k_best: f64,
    pub exhausted: bool,
    pub trace: Vec<GdStep>,
}

/// Stopping threshold `δ² / (2 L k_max²)` for the convex solver.
pub fn convex_stop_threshold(delta: f64, lipschitz: f64, k_max: f64) -> f64 {
    delta * delta / (2.0 * lipschitz * k_max * k_max)
}

fn finite_or_err(v: f64, k: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Solver {
            k,
            reason: format!("non-finite {what} ({v})"),
        })
    }
}

/// Constant-step (ξ = 1/L) projected gradient iteration on [1, k_max],
/// stopped once two consecutive objective values differ by less than ζ.
pub fn proj_gd(obj: &Objective, k_start: f64, k_max: f64, s: &GdSettings) -> Result<ProjGdOutcome> {
    if !(k_start >= 1.0 && k_start <= k_max) {
        return Err(Error::domain(format!("start k = {k_start} outside [1, {k_max}]")));
    }
    if !(s.lipschitz > 0.0) {
        return Err(Error::domain("Lipschitz constant must be positive"));
    }
    let xi = 1.0 / s.lipschitz;
    let mut k = k_start;
    let mut g = finite_or_err(obj.value(k), k, "objective")?;
    let mut out = ProjGdOutcome {
        g_end: g,
        k_end: k,
        steps: 0,
        g_best: g,
        k_best: k,
        exhausted: false,
        trace: Vec::new(),
    };
    let mut change = 2.0 * s.zeta;
    while change >= s.zeta {
        if out.steps >= s.max_steps {
            out.exhausted = true;
            break;
        }
        let d = finite_or_err(obj.slope(k), k, "slope")?;
        if s.record_trace {
            out.trace.push(GdStep { k, g, slope: d });
        }
        let next = match s.direction {
            Direction::Descent => k - xi * d,
            Direction::Sweep => k + xi * d.abs(),
        };
        let next = next.clamp(1.0, k_max);
        let g_next = finite_or_err(obj.value(next), next, "objective")?;
        change = (g - g_next).abs();
        k = next;
        g = g_next;
        out.steps += 1;
        if g < out.g_best {
            out.g_best = g;
            out.k_best = k;
        }
    }
    if s.record_trace {
        out.trace.push(GdStep {
            k,
            g,
            slope: obj.slope(k),
        });
    }
    out.g_end = g;
    out.k_end = k;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchSettings {
    pub lipschitz: f64,
    pub delta: f64,
    /// Cap on gradient/perturbation alternations.
    pub max_iters: usize,
    /// Cap on individual gradient and perturbation steps.
    pub max_steps: usize,
    /// Return as soon as an objective value below this is seen.
    pub stop_below: Option<f64>,
    pub record_traces: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub g_min: f64,
    pub k_min: f64,
    pub iterations: usize,
    pub steps: usize,
    pub exhausted: bool,
    pub stopped_early: bool,
    /// One trace per gradient run, when requested.
    pub gd_traces: Vec<Vec<GdStep>>,
    /// `(ĝ, k̂, k_next)` from each perturbation phase.
    pub perturbations: Vec<(f64, f64, f64)>,
}

struct Perturbation {
    g_hat: f64,
    k_hat: f64,
    k_end: f64,
    steps: usize,
}

// Walk right in steps of Δk while a gradient step would change g by less
// than δ, tracking the smallest value seen.
fn perturb(obj: &Objective, k: f64, k_max: f64, xi: f64, dk: f64, delta: f64, budget: usize) -> Result<Perturbation> {
    let mut k = k;
    let mut gk = finite_or_err(obj.value(k), k, "objective")?;
    let mut best = Perturbation {
        g_hat: gk,
        k_hat: k,
        k_end: k,
        steps: 0,
    };
    let probe = |k: f64| -> Result<f64> {
        let d = finite_or_err(obj.slope(k), k, "slope")?;
        Ok((k + xi * d.abs()).min(k_max))
    };
    let mut k_probe = probe(k)?;
    while (gk - obj.value(k_probe)).abs() < delta && k < k_max && best.steps < budget {
        k = (k + dk).min(k_max);
        gk = finite_or_err(obj.value(k), k, "objective")?;
        k_probe = probe(k)?;
        if gk < best.g_hat {
            best.g_hat = gk;
            best.k_hat = k;
        }
        best.steps += 1;
    }
    best.k_end = k;
    Ok(best)
}

/// Global minimum of `g` on [1, k_max] to within δ for non-convex `g`.
pub fn line_search(obj: &Objective, k_max: f64, s: &LineSearchSettings) -> Result<LineSearchOutcome> {
    if !(k_max >= 1.0) || !k_max.is_finite() {
        return Err(Error::domain(format!(
            "line search needs a finite k_max ≥ 1, got {k_max}"
        )));
    }
    if !(s.lipschitz > 0.0) || !(s.delta > 0.0) {
        return Err(Error::domain("line search needs positive L and δ"));
    }
    let xi = 1.0 / s.lipschitz;
    let dk = (2.0 * s.delta / s.lipschitz).sqrt();

    let g_lo = finite_or_err(obj.value(1.0), 1.0, "objective")?;
    let g_hi = finite_or_err(obj.value(k_max), k_max, "objective")?;
    let (mut g_min, mut k_min) = if g_hi < g_lo { (g_hi, k_max) } else { (g_lo, 1.0) };
    let mut out = LineSearchOutcome {
        g_min,
        k_min,
        iterations: 0,
        steps: 0,
        exhausted: false,
        stopped_early: false,
        gd_traces: Vec::new(),
        perturbations: Vec::new(),
    };
    let below = |g: f64| s.stop_below.is_some_and(|t| g < t);
    if below(g_min) {
        out.stopped_early = true;
        return Ok(out);
    }

    // An unbounded slope at k = 1 (exponential law with γ < 1) would throw
    // the first gradient step to k_max; enter the interior by one Δk instead.
    let mut k = 1.0;
    if !obj.slope(1.0).is_finite() {
        k = (1.0 + dk).min(k_max);
        let g = obj.value(k);
        if g < g_min {
            g_min = g;
            k_min = k;
        }
    }

    let gd = GdSettings {
        lipschitz: s.lipschitz,
        zeta: s.delta,
        direction: Direction::Sweep,
        max_steps: s.max_steps,
        record_trace: s.record_traces,
    };
    while k < k_max {
        if out.iterations >= s.max_iters || out.steps >= s.max_steps {
            out.exhausted = true;
            break;
        }
        let run = proj_gd(
            obj,
            k,
            k_max,
            &GdSettings {
                max_steps: s.max_steps - out.steps,
                ..gd
            },
        )?;
        out.steps += run.steps;
        if run.g_best < g_min {
            g_min = run.g_best;
            k_min = run.k_best;
        }
        if s.record_traces {
            out.gd_traces.push(run.trace);
        }
        if run.exhausted {
            out.exhausted = true;
            break;
        }
        let budget = s.max_steps.saturating_sub(out.steps);
        let p = perturb(obj, run.k_end, k_max, xi, dk, s.delta, budget)?;
        out.steps += p.steps;
        if p.g_hat < g_min {
            g_min = p.g_hat;
            k_min = p.k_hat;
        }
        if s.record_traces {
            out.perturbations.push((p.g_hat, p.k_hat, p.k_end));
        }
        out.iterations += 1;
        if below(g_min) {
            out.stopped_early = true;
            break;
        }
        k = p.k_end;
    }
    out.g_min = g_min;
    out.k_min = k_min;
    Ok(out)
}

/// Erasure is affine in `p`, so `g` is convex in `k` whenever `p(k)` is.
pub fn is_convex_instance(kind: ChannelKind, law: &ScalingLaw) -> bool {
    match (kind, law) {
        (ChannelKind::Erasure, ScalingLaw::Constant { .. }) => true,
        (ChannelKind::Erasure, ScalingLaw::Polynomial { gamma, .. }) => *gamma >= 1.0,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverFlag {
    /// c ≤ 0: the bound excludes nothing; reported as p_th = 0.
    VacuousBound,
    /// g* < 0 even at p0 = 1; reported as p_th = 1.
    NoThreshold,
    /// The law never saturates, so no finite k_max exists; p_th = 1.
    UnboundedRedundancy,
    /// Bisection stopped on `max_iters` before reaching `delta_p0`.
    MaxItersReached,
    /// A lower-level solve ran out of inner steps.
    InnerBudgetExhausted,
}

impl SolverFlag {
    pub fn name(self) -> &'static str {
        match self {
            SolverFlag::VacuousBound => "vacuous_bound",
            SolverFlag::NoThreshold => "no_threshold",
            SolverFlag::UnboundedRedundancy => "unbounded_redundancy",
            SolverFlag::MaxItersReached => "max_iters_reached",
            SolverFlag::InnerBudgetExhausted => "inner_budget_exhausted",
        }
    }
}

/// Minimum of `g(·, p0)` on [1, k_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerLevel {
    pub g_star: f64,
    pub k_star: f64,
    pub k_max: f64,
    pub lipschitz: f64,
    pub convex: bool,
    pub exhausted: bool,
}

/// Solve the lower-level problem for a law with finite `k_max`.
/// With `sign_only`, returns as soon as a negative value is found.
pub fn lower_level(
    kind: ChannelKind,
    law: &ScalingLaw,
    c: f64,
    cfg: &OptimizerConfig,
    sign_only: bool,
) -> Result<LowerLevel> {
    let obj = Objective::with_cost(kind, *law, c);
    let km = match k_max(law) {
        KMax::Finite(km) => km,
        KMax::Unbounded => {
            return Err(Error::domain(format!(
                "{law} has no finite k_max; lower level is unbounded"
            )))
        }
    };
    let lipschitz = match lipschitz_constant(kind, law, c) {
        Ok(l) => l,
        Err(Error::NoClosedFormLipschitz(_)) => empirical_lipschitz(&obj, km),
        Err(e) => return Err(e),
    };
    let convex = is_convex_instance(kind, law);
    let mut res = LowerLevel {
        g_star: obj.value(1.0),
        k_star: 1.0,
        k_max: km,
        lipschitz,
        convex,
        exhausted: false,
    };
    if km <= 1.0 {
        return Ok(res);
    }
    if convex {
        let s = GdSettings {
            lipschitz,
            zeta: convex_stop_threshold(cfg.delta, lipschitz, km),
            direction: Direction::Descent,
            max_steps: cfg.max_inner_iters,
            record_trace: false,
        };
        let run = proj_gd(&obj, 1.0, km, &s)?;
        res.g_star = run.g_end;
        res.k_star = run.k_end;
        res.exhausted = run.exhausted;
    } else {
        let s = LineSearchSettings {
            lipschitz,
            delta: cfg.delta,
            max_iters: cfg.max_inner_iters,
            max_steps: cfg.max_inner_iters,
            stop_below: sign_only.then_some(0.0),
            record_traces: false,
        };
        let run = line_search(&obj, km, &s)?;
        res.g_star = run.g_min;
        res.k_star = run.k_min;
        res.exhausted = run.exhausted;
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub p_th: f64,
    /// Minimizing redundancy of the lower level at `p_th`.
    pub k_star: f64,
    pub g_star: f64,
    pub iterations: usize,
    /// Final `(p0⁻, p0⁺)` with g*(p0⁻) < 0 ≤ g*(p0⁺).
    pub bracket: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<(f64, f64)>>,
    pub flags: Vec<SolverFlag>,
}

impl ThresholdResult {
    fn flagged(p_th: f64, flag: SolverFlag) -> Self {
        ThresholdResult {
            p_th,
            k_star: 1.0,
            g_star: f64::NAN,
            iterations: 0,
            bracket: (p_th, p_th),
            trace: None,
            flags: vec![flag],
        }
    }
}

/// Smallest `p0` with `min_k g(k, p0) ≥ 0`, by bisection on [0, 1].
pub fn threshold_bisection(
    kind: ChannelKind,
    family: LawFamily,
    alpha: f64,
    gamma: f64,
    spec: &AccuracySpec,
    cfg: &OptimizerConfig,
    record_trace: bool,
) -> Result<ThresholdResult> {
    spec.validate()?;
    cfg.validate()?;
    if !(alpha >= 0.0 && gamma >= 0.0) || !alpha.is_finite() || !gamma.is_finite() {
        return Err(Error::domain("alpha and gamma must be finite and non-negative"));
    }
    if family == LawFamily::Exponential && gamma == 0.0 && alpha > 0.0 {
        return Err(Error::domain("exponential law needs gamma > 0"));
    }
    let c = capacity_cost(spec);
    if c <= 0.0 {
        return Ok(ThresholdResult::flagged(0.0, SolverFlag::VacuousBound));
    }
    if !k_max(&family.with_p0(0.5, alpha, gamma)).is_finite() {
        return Ok(ThresholdResult::flagged(1.0, SolverFlag::UnboundedRedundancy));
    }
    let top = lower_level(kind, &family.with_p0(1.0, alpha, gamma), c, cfg, false)?;
    if top.g_star < 0.0 {
        return Ok(ThresholdResult::flagged(1.0, SolverFlag::NoThreshold));
    }

    let mut flags = Vec::new();
    let mut trace = record_trace.then(Vec::new);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut iterations = 0;
    while hi - lo > cfg.delta_p0 {
        if iterations >= cfg.max_iters {
            flags.push(SolverFlag::MaxItersReached);
            break;
        }
        let p0 = 0.5 * (lo + hi);
        let ll = lower_level(kind, &family.with_p0(p0, alpha, gamma), c, cfg, true)?;
        if ll.exhausted && !flags.contains(&SolverFlag::InnerBudgetExhausted) {
            flags.push(SolverFlag::InnerBudgetExhausted);
        }
        if let Some(t) = trace.as_mut() {
            t.push((p0, ll.g_star));
        }
        if ll.g_star >= 0.0 {
            hi = p0;
        } else {
            lo = p0;
        }
        iterations += 1;
    }
    let p_th = 0.5 * (lo + hi);
    let at = lower_level(kind, &family.with_p0(p_th, alpha, gamma), c, cfg, false)?;
    if at.exhausted && !flags.contains(&SolverFlag::InnerBudgetExhausted) {
        flags.push(SolverFlag::InnerBudgetExhausted);
    }
    Ok(ThresholdResult {
        p_th,
        k_star: at.k_star,
        g_star: at.g_star,
        iterations,
        bracket: (lo, hi),
        trace,
        flags,
    })
}

/// Brute-force reference: the smallest `p0` on a uniform grid whose `g`,
/// scanned on a uniform grid of [1, k_max], is nowhere negative.
pub fn grid_oracle(
    kind: ChannelKind,
    family: LawFamily,
    alpha: f64,
    gamma: f64,
    spec: &AccuracySpec,
    grid_points: usize,
) -> Result<f64> {
    spec.validate()?;
    if grid_points < 100 {
        return Err(Error::domain("grid oracle needs at least 100 points per axis"));
    }
    let c = capacity_cost(spec);
    if c <= 0.0 {
        return Ok(0.0);
    }
    let last = (grid_points - 1) as f64;
    for i in 0..grid_points {
        let p0 = i as f64 / last;
        let law = family.with_p0(p0, alpha, gamma);
        let km = match k_max(&law) {
            KMax::Finite(km) => km,
            KMax::Unbounded => continue,
        };
        let obj = Objective::with_cost(kind, law, c);
        let feasible = (0..grid_points).all(|j| obj.value(1.0 + (km - 1.0) * j as f64 / last) >= 0.0);
        if feasible {
            return Ok(p0);
        }
    }
    Ok(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig_spec() -> AccuracySpec {
        AccuracySpec::new(0.1, 128.0, 128).unwrap()
    }

    const C_FIG: f64 = 0.8963359719250837;

    fn grid_min(obj: &Objective, km: f64, step: f64) -> f64 {
        let n = ((km - 1.0) / step).ceil() as usize;
        (0..=n)
            .map(|i| obj.value((1.0 + i as f64 * step).min(km)))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn lipschitz_examples() {
        let any = ScalingLaw::Polynomial {
            p0: 0.37,
            alpha: 2.5,
            gamma: 1.0,
        };
        assert_abs_diff_eq!(
            lipschitz_constant(ChannelKind::Erasure, &any, 0.4).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        let law = ScalingLaw::Polynomial {
            p0: 0.25,
            alpha: 2.0,
            gamma: 2.0,
        };
        assert_abs_diff_eq!(
            lipschitz_constant(ChannelKind::Erasure, &law, 0.5).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        let law = ScalingLaw::Polynomial {
            p0: 0.3,
            alpha: 1.0,
            gamma: 1.0,
        };
        assert_abs_diff_eq!(
            lipschitz_constant(ChannelKind::SymmetricGad, &law, 0.5).unwrap(),
            1.2404492,
            epsilon = 1e-6
        );
    }

    #[test]
    fn lipschitz_error_paths() {
        let e = ScalingLaw::Exponential {
            p0: 0.3,
            alpha: 1.0,
            gamma: 1.0,
        };
        assert!(matches!(
            lipschitz_constant(ChannelKind::Erasure, &e, 0.5),
            Err(Error::NoClosedFormLipschitz(_))
        ));
        let z = ScalingLaw::Polynomial {
            p0: 0.0,
            alpha: 1.0,
            gamma: 1.0,
        };
        assert!(matches!(
            lipschitz_constant(ChannelKind::Depolarizing, &z, 0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn proj_gd_from_stationary_point_stays() {
        let law = ScalingLaw::Polynomial {
            p0: 0.1,
            alpha: 1.0,
            gamma: 1.0,
        };
        let obj = Objective::with_cost(ChannelKind::Erasure, law, C_FIG);
        let k_star = (C_FIG / 0.1).sqrt();
        let s = GdSettings {
            lipschitz: 2.0 * C_FIG,
            zeta: 1e-15,
            direction: Direction::Descent,
            max_steps: 100,
            record_trace: false,
        };
        let run = proj_gd(&obj, k_star, 10.0, &s).unwrap();
        assert_abs_diff_eq!(run.k_end, k_star, epsilon = 1e-9);
        assert!(run.steps <= 2);
    }

    #[test]
    fn proj_gd_finds_erasure_stationary_point() {
        let law = ScalingLaw::Polynomial {
            p0: 0.1,
            alpha: 1.0,
            gamma: 1.0,
        };
        let obj = Objective::with_cost(ChannelKind::Erasure, law, C_FIG);
        let km = k_max(&law).finite().unwrap();
        let l = lipschitz_constant(ChannelKind::Erasure, &law, C_FIG).unwrap();
        let delta = 1e-6;
        let s = GdSettings {
            lipschitz: l,
            zeta: convex_stop_threshold(delta, l, km),
            direction: Direction::Descent,
            max_steps: 1_000_000,
            record_trace: false,
        };
        let run = proj_gd(&obj, 1.0, km, &s).unwrap();
        assert_abs_diff_eq!(run.k_end, 2.9939, epsilon = 1e-3);
        assert!((run.g_end - grid_min(&obj, km, 1e-5)).abs() <= delta);
    }

    #[test]
    fn proj_gd_pins_boundary_minimum() {
        // g'(1) = -c + p0 α > 0: minimum at k = 1
        let law = ScalingLaw::Polynomial {
            p0: 0.5,
            alpha: 4.0,
            gamma: 1.0,
        };
        let obj = Objective::with_cost(ChannelKind::Erasure, law, C_FIG);
        let km = k_max(&law).finite().unwrap();
        let l = lipschitz_constant(ChannelKind::Erasure, &law, C_FIG).unwrap();
        let s = GdSettings {
            lipschitz: l,
            zeta: convex_stop_threshold(1e-6, l, km),
            direction: Direction::Descent,
            max_steps: 1000,
            record_trace: false,
        };
        let run = proj_gd(&obj, 1.0, km, &s).unwrap();
        assert_eq!(run.k_end, 1.0);
    }

    #[test]
    fn proj_gd_rejects_bad_start() {
        let obj = Objective::with_cost(ChannelKind::Erasure, ScalingLaw::Constant { p0: 0.2 }, 0.5);
        let s = GdSettings {
            lipschitz: 1.0,
            zeta: 1e-9,
            direction: Direction::Descent,
            max_steps: 10,
            record_trace: false,
        };
        assert!(proj_gd(&obj, 0.5, 3.0, &s).is_err());
        assert!(proj_gd(&obj, 4.0, 3.0, &s).is_err());
    }

    #[test]
    fn line_search_monotone_returns_left_end() {
        // convex with g'(1) > 0: increasing on [1, k_max]
        let law = ScalingLaw::Polynomial {
            p0: 0.5,
            alpha: 4.0,
            gamma: 1.0,
        };
        let obj = Objective::with_cost(ChannelKind::Erasure, law, C_FIG);
        let km = k_max(&law).finite().unwrap();
        let s = LineSearchSettings {
            lipschitz: 2.0 * C_FIG,
            delta: 1e-6,
            max_iters: 10_000,
            max_steps: 1_000_000,
            stop_below: None,
            record_traces: false,
        };
        let run = line_search(&obj, km, &s).unwrap();
        assert_eq!(run.g_min, obj.value(1.0));
    }

    #[test]
    fn line_search_agrees_with_proj_gd_on_convex_case() {
        let law = ScalingLaw::Polynomial {
            p0: 0.1,
            alpha: 1.0,
            gamma: 1.0,
        };
        let obj = Objective::with_cost(ChannelKind::Erasure, law, C_FIG);
        let km = k_max(&law).finite().unwrap();
        let l = lipschitz_constant(ChannelKind::Erasure, &law, C_FIG).unwrap();
        let delta = 1e-6;
        let ls = line_search(
            &obj,
            km,
            &LineSearchSettings {
                lipschitz: l,
                delta,
                max_iters: 100_000,
                max_steps: 1_000_000,
                stop_below: None,
                record_traces: false,
            },
        )
        .unwrap();
        let gd = proj_gd(
            &obj,
            1.0,
            km,
            &GdSettings {
                lipschitz: l,
                zeta: convex_stop_threshold(delta, l, km),
                direction: Direction::Descent,
                max_steps: 1_000_000,
                record_trace: false,
            },
        )
        .unwrap();
        let reference = grid_min(&obj, km, 1e-5);
        assert!((ls.g_min - gd.g_end).abs() <= delta);
        assert!((ls.g_min - reference).abs() <= delta);
    }

    #[test]
    fn line_search_depolarizing_matches_grid() {
        let law = ScalingLaw::Polynomial {
            p0: 0.2,
            alpha: 0.5,
            gamma: 2.0,
        };
        let obj = Objective::new(ChannelKind::Depolarizing, law, &fig_spec());
        let km = k_max(&law).finite().unwrap();
        let l = lipschitz_constant(ChannelKind::Depolarizing, &law, obj.c).unwrap();
        let delta = 1e-4;
        let run = line_search(
            &obj,
            km,
            &LineSearchSettings {
                lipschitz: l,
                delta,
                max_iters: 100_000,
                max_steps: 1_000_000,
                stop_below: None,
                record_traces: false,
            },
        )
        .unwrap();
        assert!(!run.exhausted);
        assert!((run.g_min - grid_min(&obj, km, 1e-5)).abs() <= delta);
    }

    #[test]
    fn line_search_handles_infinite_slope_at_one() {
        let law = ScalingLaw::Exponential {
            p0: 0.05,
            alpha: 1.0,
            gamma: 0.5,
        };
        let obj = Objective::new(ChannelKind::Depolarizing, law, &fig_spec());
        let km = k_max(&law).finite().unwrap();
        let l = empirical_lipschitz(&obj, km);
        let delta = 1e-5;
        let run = line_search(
            &obj,
            km,
            &LineSearchSettings {
                lipschitz: l,
                delta,
                max_iters: 100_000,
                max_steps: 5_000_000,
                stop_below: None,
                record_traces: false,
            },
        )
        .unwrap();
        assert!(!run.exhausted);
        assert!(run.g_min - grid_min(&obj, km, 1e-4) <= delta);
    }

    #[test]
    fn bisection_matches_first_closed_form_branch() {
        let c = C_FIG;
        let alpha = c / (1.0 - c) * 1.5;
        let r = threshold_bisection(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            alpha,
            1.0,
            &fig_spec(),
            &OptimizerConfig::default(),
            false,
        )
        .unwrap();
        assert!(r.flags.is_empty());
        assert!((r.p_th - (1.0 - c)).abs() <= 1e-4);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-4);
    }

    #[test]
    fn bisection_matches_interior_closed_form() {
        let r = threshold_bisection(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            0.05,
            1.0,
            &fig_spec(),
            &OptimizerConfig::default(),
            true,
        )
        .unwrap();
        assert!((r.p_th - 0.6840251934933516).abs() <= 1e-4);
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), r.iterations);
        assert!(
            r.k_star >= 1.0
                && r.k_star
                    <= k_max(&LawFamily::Polynomial.with_p0(r.p_th, 0.05, 1.0))
                        .finite()
                        .unwrap()
        );
    }

    #[test]
    fn bisection_matches_grid_oracle_for_depolarizing() {
        let cfg = OptimizerConfig::default();
        let r = threshold_bisection(
            ChannelKind::Depolarizing,
            LawFamily::Polynomial,
            1.0,
            1.0,
            &fig_spec(),
            &cfg,
            false,
        )
        .unwrap();
        let grid = grid_oracle(
            ChannelKind::Depolarizing,
            LawFamily::Polynomial,
            1.0,
            1.0,
            &fig_spec(),
            2001,
        )
        .unwrap();
        assert!(
            (r.p_th - grid).abs() <= 1.0 / 2000.0 + cfg.delta_p0,
            "{} vs {}",
            r.p_th,
            grid
        );
    }

    #[test]
    fn degenerate_inputs_are_flagged() {
        let vac = AccuracySpec::new(0.1, 0.0, 128).unwrap();
        let r = threshold_bisection(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            1.0,
            1.0,
            &vac,
            &OptimizerConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!((r.p_th, r.flags.clone()), (0.0, vec![SolverFlag::VacuousBound]));
        assert_eq!(
            grid_oracle(ChannelKind::Erasure, LawFamily::Polynomial, 1.0, 1.0, &vac, 101).unwrap(),
            0.0
        );

        let r = threshold_bisection(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            0.0,
            1.0,
            &fig_spec(),
            &OptimizerConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!((r.p_th, r.flags), (1.0, vec![SolverFlag::UnboundedRedundancy]));
    }

    #[test]
    fn grid_oracle_matches_closed_form() {
        let grid = grid_oracle(
            ChannelKind::Erasure,
            LawFamily::Polynomial,
            0.05,
            1.0,
            &fig_spec(),
            2001,
        )
        .unwrap();
        assert!((grid - 0.6840251934933516).abs() <= 1.0 / 2000.0);
        // only p0 = 1 is infeasible-free when c is close to 1 and alpha is tiny
        let near_one = AccuracySpec::new(1e-9, 128.0, 128).unwrap();
        let top = grid_oracle(
            ChannelKind::Depolarizing,
            LawFamily::Polynomial,
            1.0,
            1.0,
            &near_one,
            101,
        )
        .unwrap();
        assert!(top > 0.0 && top <= 1.0);
        assert!(grid_oracle(ChannelKind::Erasure, LawFamily::Polynomial, 0.05, 1.0, &fig_spec(), 50).is_err());
    }
}
