//! Repetition-coded readout of an `n`-bit phase estimate.
//!
//! Each bit is measured `T` times. Under depolarizing noise a run flips the
//! bit with probability p/2 and the bit is decoded by strict majority; under
//! erasure a run is lost with probability p and the bit is recovered from any
//! surviving run.

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureNoise {
    Depolarizing,
    Erasure,
}

impl MeasureNoise {
    pub fn name(self) -> &'static str {
        match self {
            MeasureNoise::Depolarizing => "depolarizing",
            MeasureNoise::Erasure => "erasure",
        }
    }
}

impl std::str::FromStr for MeasureNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "depolarizing" | "depolarising" | "d" => Ok(MeasureNoise::Depolarizing),
            "erasure" | "e" => Ok(MeasureNoise::Erasure),
            other => Err(Error::domain(format!("unknown measurement noise '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub noise: MeasureNoise,
    pub p: f64,
    pub n: u32,
    #[serde(rename = "T")]
    pub runs: u32,
    pub trials: u64,
    pub seed: u64,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::domain(format!("p = {} outside [0, 1)", self.p)));
        }
        if self.n == 0 || self.runs == 0 {
            return Err(Error::domain("n and T must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::domain("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimResult {
    pub errors: u64,
    pub trials: u64,
    pub empirical_pe: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exact_pe: f64,
    /// `n exp(-2 ((1-p)/2)² T)`, depolarizing only.
    pub hoeffding_bound: Option<f64>,
    /// `n p^T`, erasure only.
    pub union_bound: Option<f64>,
}

/// Smallest `T` meeting the sufficient condition for error below `eps`.
pub fn required_runs(noise: MeasureNoise, p: f64, n: u32, eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("p = {p} outside [0, 1)")));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let t = match noise {
        MeasureNoise::Depolarizing => 2.0 * (n as f64 / eps).ln() / ((1.0 - p) * (1.0 - p)),
        MeasureNoise::Erasure => {
            if p == 0.0 {
                return Ok(1);
            }
            ((eps / n as f64).ln() / p.ln()).abs()
        }
    };
    Ok((t.ceil() as u32).max(1))
}

fn ln_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `P[Binomial(t, f) ≥ m]`, summed in log space.
fn binomial_upper_tail(t: u32, f: f64, m: u32) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m > t || f <= 0.0 {
        return 0.0;
    }
    if f >= 1.0 {
        return 1.0;
    }
    let (lf, lg) = (f.ln(), (-f).ln_1p());
    // ln C(t, m) by accumulation, then successive ratios
    let mut ln_coef = 0.0;
    for i in 0..m {
        ln_coef += ((t - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    let mut acc = f64::NEG_INFINITY;
    for j in m..=t {
        acc = ln_sum_exp(acc, ln_coef + j as f64 * lf + (t - j) as f64 * lg);
        if j < t {
            ln_coef += ((t - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    acc.exp().min(1.0)
}

/// Probability that a single bit is decoded wrongly.
pub fn bit_error(noise: MeasureNoise, p: f64, runs: u32) -> f64 {
    match noise {
        // a tie declares neither value and counts as an error
        MeasureNoise::Depolarizing => binomial_upper_tail(runs, 0.5 * p, runs.div_ceil(2)),
        MeasureNoise::Erasure => p.powi(runs as i32),
    }
}

/// Exact probability that at least one of the `n` bits is wrong.
pub fn exact_error(noise: MeasureNoise, p: f64, n: u32, runs: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p = {p} outside [0, 1]")));
    }
    if n == 0 || runs == 0 {
        return Err(Error::domain("n and T must be at least 1"));
    }
    let q = bit_error(noise, p, runs);
    Ok(-(n as f64 * (-q).ln_1p()).exp_m1())
}

pub fn hoeffding_bound(p: f64, n: u32, runs: u32) -> f64 {
    let gap = 0.5 * (1.0 - p);
    n as f64 * (-2.0 * gap * gap * runs as f64).exp()
}

pub fn union_bound(p: f64, n: u32, runs: u32) -> f64 {
    n as f64 * p.powi(runs as i32)
}

/// Wilson score interval at 95 %.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let nt = trials as f64;
    let phat = errors as f64 / nt;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / nt;
    let centre = (phat + z2 / (2.0 * nt)) / denom;
    let half = Z * (phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt)).sqrt() / denom;
    ((centre - half).max(0.0).min(phat), (centre + half).min(1.0).max(phat))
}

fn trial_errs(spec: &SimSpec, coin: &Bernoulli, trial: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial);
    for _ in 0..spec.n {
        let wrong = match spec.noise {
            MeasureNoise::Depolarizing => {
                let flips = (0..spec.runs).filter(|_| coin.sample(&mut rng)).count() as u32;
                2 * flips >= spec.runs
            }
            MeasureNoise::Erasure => (0..spec.runs).fold(true, |all, _| coin.sample(&mut rng) && all),
        };
        if wrong {
            return true;
        }
    }
    false
}

/// Monte Carlo estimate of the overall error. Trial `i` draws from its own
/// ChaCha stream, so the result is independent of the thread count.
pub fn simulate(spec: &SimSpec) -> Result<SimResult> {
    spec.validate()?;
    let flip = match spec.noise {
        MeasureNoise::Depolarizing => 0.5 * spec.p,
        MeasureNoise::Erasure => spec.p,
    };
    let coin = Bernoulli::new(flip).map_err(|e| Error::domain(e.to_string()))?;
    let errors: u64 = (0..spec.trials)
        .into_par_iter()
        .map(|i| u64::from(trial_errs(spec, &coin, i)))
        .sum();
    let (ci_low, ci_high) = wilson_interval(errors, spec.trials);
    let (hoeffding, union) = match spec.noise {
        MeasureNoise::Depolarizing => (Some(hoeffding_bound(spec.p, spec.n, spec.runs)), None),
        MeasureNoise::Erasure => (None, Some(union_bound(spec.p, spec.n, spec.runs))),
    };
    Ok(SimResult {
        errors,
        trials: spec.trials,
        empirical_pe: errors as f64 / spec.trials as f64,
        ci_low,
        ci_high,
        exact_pe: exact_error(spec.noise, spec.p, spec.n, spec.runs)?,
        hoeffding_bound: hoeffding,
        union_bound: union,
    })
}

/// One row per `T` in `1..=t_max`: exact error and the matching analytic bound.
pub fn error_vs_runs(noise: MeasureNoise, p: f64, n: u32, t_max: u32) -> Result<Vec<(u32, f64, f64)>> {
    (1..=t_max)
        .map(|t| {
            let bound = match noise {
                MeasureNoise::Depolarizing => hoeffding_bound(p, n, t),
                MeasureNoise::Erasure => union_bound(p, n, t),
            };
            Ok((t, exact_error(noise, p, n, t)?, bound))
        })
        .collect()
}
