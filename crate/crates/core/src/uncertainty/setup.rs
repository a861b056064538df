use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Receiver-side packet handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Numbered packets: the newest available packet wins, older ones are skipped.
    P1,
    /// No numbering: any of the packets arriving at an instant may be used.
    P3,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::P1 => "p1",
            Protocol::P3 => "p3",
        })
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(Protocol::P1),
            "p3" => Ok(Protocol::P3),
            other => Err(Error::InvalidArgument(format!(
                "unknown protocol '{other}'"
            ))),
        }
    }
}

/// Network delay bounds plus the constant parts of the loop delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub tau_lo: u32,
    pub tau_hi: u32,
    pub d_hat: u32,
    pub tau_a: u32,
}

impl DelaySpec {
    pub fn new(tau_lo: u32, tau_hi: u32, d_hat: u32, tau_a: u32) -> Result<Self> {
        if tau_lo >= tau_hi {
            return Err(Error::DelayBounds {
                lo: tau_lo,
                hi: tau_hi,
            });
        }
        Ok(Self {
            tau_lo,
            tau_hi,
            d_hat,
            tau_a,
        })
    }

    /// Width of the variable part, `tau_hi - tau_lo`.
    pub fn span(&self) -> u32 {
        self.tau_hi - self.tau_lo
    }

    /// Constant delay the nominal design compensates: `d_hat + tau_lo + tau_a`.
    pub fn nominal_delay(&self) -> u32 {
        self.d_hat + self.tau_lo + self.tau_a
    }

    /// Range of the shifted per-packet delay `tau_j - tau_lo - tau_a`.
    pub fn shifted_range(&self) -> (i64, i64) {
        (-(self.tau_a as i64), self.span() as i64 - self.tau_a as i64)
    }

    /// Physical delay of a packet given its shifted delay.
    pub fn to_physical(&self, shifted: i64) -> i64 {
        shifted + self.tau_lo as i64 + self.tau_a as i64
    }
}

/// Analysis setting of the uncertainty block: delay span, acausal shift and
/// truncation index of the constant unit input.
///
/// Packet `j >= 0` carries the running sum `a_j = min(j + 1, T + 1)` and
/// arrives at `j + tau_j` with `tau_j` in `[-tau_a, span - tau_a]`. The output
/// `w_k = c_k - a_k` is evaluated on `k` in `[-tau_a, T + 2 span]`, which
/// contains every instant where it can be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GainWindow {
    pub span: u32,
    pub tau_a: u32,
    pub truncation: u32,
}

impl GainWindow {
    pub fn new(span: u32, tau_a: u32, truncation: u32) -> Result<Self> {
        if span == 0 {
            return Err(Error::InvalidArgument(
                "delay span must be at least 1".into(),
            ));
        }
        if tau_a > span {
            return Err(Error::InvalidArgument(format!(
                "acausal shift {tau_a} exceeds the delay span {span}"
            )));
        }
        Ok(Self {
            span,
            tau_a,
            truncation,
        })
    }

    pub fn input_sum(&self, k: i64) -> i64 {
        if k < 0 {
            0
        } else {
            (k + 1).min(self.truncation as i64 + 1)
        }
    }

    pub fn first_instant(&self) -> i64 {
        -(self.tau_a as i64)
    }

    pub fn last_instant(&self) -> i64 {
        self.truncation as i64 + 2 * self.span as i64
    }

    pub fn instants(&self) -> std::ops::RangeInclusive<i64> {
        self.first_instant()..=self.last_instant()
    }

    pub fn len(&self) -> usize {
        (self.last_instant() - self.first_instant() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_delay(&self) -> i64 {
        -(self.tau_a as i64)
    }

    pub fn max_delay(&self) -> i64 {
        self.span as i64 - self.tau_a as i64
    }

    /// Packets that can arrive inside the evaluation window.
    pub fn packet_count(&self) -> usize {
        (self.last_instant() + self.tau_a as i64 + 1) as usize
    }

    /// Squared 2-norm of the truncated unit input, `T + 1`.
    pub fn input_energy(&self) -> i64 {
        self.truncation as i64 + 1
    }

    pub fn alpha(&self, norm_sq: i64) -> f64 {
        (norm_sq as f64 / self.input_energy() as f64).sqrt()
    }
}
