//! Threshold surfaces over (α, γ) grids, one per channel.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::AccuracySpec;
use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::optimize::{threshold_bisection, OptimizerConfig, SolverFlag};
use crate::scaling::LawFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub channels: Vec<ChannelKind>,
    pub law_family: LawFamily,
    pub spec: AccuracySpec,
    pub cfg: OptimizerConfig,
}

/// 0.1, 0.2, …, 2.0
pub fn default_axis() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 10.0).collect()
}

impl SweepGrid {
    pub fn new(spec: AccuracySpec) -> Self {
        SweepGrid {
            alphas: default_axis(),
            gammas: default_axis(),
            channels: ChannelKind::ALL.to_vec(),
            law_family: LawFamily::Polynomial,
            spec,
            cfg: OptimizerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("alphas", &self.alphas), ("gammas", &self.gammas)] {
            if axis.is_empty() {
                return Err(Error::domain(format!("{name} is empty")));
            }
            if axis.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive and finite")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain(format!("{name} must be strictly increasing")));
            }
        }
        if self.channels.is_empty() {
            return Err(Error::domain("no channels selected"));
        }
        self.spec.validate()?;
        self.cfg.validate()
    }

    /// Grid points in output order: channel, then α, then γ.
    fn points(&self) -> Vec<(ChannelKind, f64, f64)> {
        let mut channels = self.channels.clone();
        channels.sort();
        channels.dedup();
        let mut out = Vec::with_capacity(channels.len() * self.alphas.len() * self.gammas.len());
        for &ch in &channels {
            for &a in &self.alphas {
                for &g in &self.gammas {
                    out.push((ch, a, g));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceEntry {
    pub channel: ChannelKind,
    pub alpha: f64,
    pub gamma: f64,
    pub p_th: Option<f64>,
    pub k_star: Option<f64>,
    pub flags: Vec<SolverFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub grid: SweepGrid,
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceResult {
    pub entries: Vec<SurfaceEntry>,
    pub provenance: Provenance,
}

pub fn sweep(grid: &SweepGrid) -> Result<SurfaceResult> {
    grid.validate()?;
    let entries = grid
        .points()
        .into_par_iter()
        .map(|(channel, alpha, gamma)| {
            match threshold_bisection(channel, grid.law_family, alpha, gamma, &grid.spec, &grid.cfg, false) {
                Ok(r) => SurfaceEntry {
                    channel,
                    alpha,
                    gamma,
                    p_th: Some(r.p_th),
                    k_star: Some(r.k_star),
                    flags: r.flags,
                    error: None,
                },
                Err(e) => SurfaceEntry {
                    channel,
                    alpha,
                    gamma,
                    p_th: None,
                    k_star: None,
                    flags: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SurfaceResult {
        entries,
        provenance: Provenance {
            grid: grid.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// p_th rose from the previous α at fixed γ.
    AlphaTrend,
    /// p_th rose from the previous γ at fixed α.
    GammaTrend,
    /// erasure ≥ gad ≥ depolarizing failed at this point.
    ChannelOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub channel: ChannelKind,
    pub alpha: f64,
    pub gamma: f64,
    pub excess: f64,
}

/// Monotonicity along both axes (tolerance `delta_p0`) and the pointwise
/// channel ordering (tolerance `2 delta_p0`). Entries without a value are
/// skipped.
pub fn validate_surface(result: &SurfaceResult) -> Vec<Violation> {
    let grid = &result.provenance.grid;
    let tol = grid.cfg.delta_p0;
    let (na, ng) = (grid.alphas.len(), grid.gammas.len());
    let mut out = Vec::new();

    let mut by_channel: Vec<(ChannelKind, &[SurfaceEntry])> = Vec::new();
    for chunk in result.entries.chunks(na * ng) {
        by_channel.push((chunk[0].channel, chunk));
    }
    for &(channel, surf) in &by_channel {
        let at = |i: usize, j: usize| surf[i * ng + j].p_th;
        for i in 0..na {
            for j in 0..ng {
                let Some(here) = at(i, j) else { continue };
                let mut check = |prev: Option<f64>, kind| {
                    if let Some(prev) = prev {
                        if here > prev + tol {
                            out.push(Violation {
                                kind,
                                channel,
                                alpha: grid.alphas[i],
                                gamma: grid.gammas[j],
                                excess: here - prev,
                            });
                        }
                    }
                };
                if i > 0 {
                    check(at(i - 1, j), ViolationKind::AlphaTrend);
                }
                if j > 0 {
                    check(at(i, j - 1), ViolationKind::GammaTrend);
                }
            }
        }
    }

    let find = |kind: ChannelKind| by_channel.iter().find(|(c, _)| *c == kind).map(|(_, s)| *s);
    let ordered = [
        ChannelKind::Erasure,
        ChannelKind::SymmetricGad,
        ChannelKind::Depolarizing,
    ];
    for pair in ordered.windows(2) {
        let (Some(hi), Some(lo)) = (find(pair[0]), find(pair[1])) else {
            continue;
        };
        for (a, b) in hi.iter().zip(lo) {
            if let (Some(ph), Some(pl)) = (a.p_th, b.p_th) {
                if pl > ph + 2.0 * tol {
                    out.push(Violation {
                        kind: ViolationKind::ChannelOrder,
                        channel: b.channel,
                        alpha: b.alpha,
                        gamma: b.gamma,
                        excess: pl - ph,
                    });
                }
            }
        }
    }
    out
}

/// Round to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| round_sig(x, 9).to_string()).unwrap_or_default()
}

/// CSV with columns channel, alpha, gamma, p_th, k_star, flags.
pub fn write_csv<W: Write>(result: &SurfaceResult, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["channel", "alpha", "gamma", "p_th", "k_star", "flags"])?;
    for e in &result.entries {
        let mut flags: Vec<&str> = e.flags.iter().map(|f| f.name()).collect();
        if e.error.is_some() {
            flags.push("error");
        }
        w.write_record([
            e.channel.name().to_string(),
            cell(Some(e.alpha)),
            cell(Some(e.gamma)),
            cell(e.p_th),
            cell(e.k_star),
            flags.join("|"),
        ])?;
    }
    w.flush()
}
