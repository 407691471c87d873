//! Holevo information of the single-parameter, Holevo-additive qubit channels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Channel family. The generalized amplitude damping channel is always the
/// symmetric (thermal parameter 1/2) member, the only additive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Erasure,
    Depolarizing,
    SymmetricGad,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::Erasure,
        ChannelKind::Depolarizing,
        ChannelKind::SymmetricGad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Erasure => "erasure",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::SymmetricGad => "symmetric_gad",
        }
    }

    /// Holevo information at noise `p`, clamping `p` into [0, 1].
    pub(crate) fn chi(self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            ChannelKind::Erasure => 1.0 - p,
            ChannelKind::Depolarizing => 1.0 - h2(0.5 * p),
            ChannelKind::SymmetricGad => 1.0 - h2(gad_crossover(p)),
        }
    }

    /// dχ/dp. Infinite at p = 0 for the depolarizing and GAD channels.
    pub(crate) fn chi_slope(self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self {
            ChannelKind::Erasure => -1.0,
            ChannelKind::Depolarizing => {
                if p == 0.0 {
                    return f64::NEG_INFINITY;
                }
                -0.5 * ((2.0 - p) / p).log2()
            }
            ChannelKind::SymmetricGad => {
                // q = (1 - s)/2 with s = sqrt(1 - p); h2'(q) q'(p) = atanh(s) / (2 s ln 2)
                let s = (1.0 - p).sqrt();
                if s >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                let ratio = if s < 1e-4 { 1.0 + s * s / 3.0 } else { s.atanh() / s };
                -ratio / (2.0 * std::f64::consts::LN_2)
            }
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "erasure" | "e" => Ok(ChannelKind::Erasure),
            "depolarizing" | "depolarising" | "d" => Ok(ChannelKind::Depolarizing),
            "symmetric_gad" | "gad" | "gadc" | "g" => Ok(ChannelKind::SymmetricGad),
            other => Err(Error::domain(format!("unknown channel '{other}'"))),
        }
    }
}

/// A noise probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(NoiseLevel(p))
        } else {
            Err(Error::domain(format!("noise level {p} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Binary entropy in bits with 0·log 0 = 0.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("binary entropy argument {q} outside [0, 1]")));
    }
    Ok(h2(q))
}

pub(crate) fn h2(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (-q).ln_1p() / std::f64::consts::LN_2
}

fn gad_crossover(p: f64) -> f64 {
    0.5 * (1.0 - (1.0 - p).sqrt())
}

/// Holevo information χ(N_p) of the given channel.
pub fn holevo(kind: ChannelKind, p: NoiseLevel) -> f64 {
    kind.chi(p.value())
}
