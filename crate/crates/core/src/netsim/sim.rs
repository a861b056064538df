use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::realize::Recurrence;
use super::receiver::{P3Policy, PacketEvent, Receiver};
use crate::error::{Error, Result};
use crate::format::sig;
use crate::ltisys::{design_fsp, SmithPredictorDesign, TransferFunction};
use crate::uncertainty::Protocol;

/// Default divergence threshold relative to the reference amplitude.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
/// Samples the threshold must be exceeded in a row.
pub const DIVERGENCE_RUN: usize = 50;

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopController {
    /// `u = C (V r - F n - H u)` with `C`, `F`, `H` run as separate recurrences.
    SmithPredictor { design: SmithPredictorDesign },
    /// `u = R (V r - n)`.
    Direct {
        r: TransferFunction,
        v: TransferFunction,
    },
}

impl LoopController {
    /// Smith predictor for `plant` (delay = dead time) designed for `d_hat + tau_lo + tau_a`.
    pub fn smith_predictor(
        plant: &TransferFunction,
        c: &TransferFunction,
        v: &TransferFunction,
        filter_pole: f64,
        tau_lo: u32,
        tau_a: u32,
    ) -> Result<Self> {
        let tau_hat = plant.delay() + tau_lo + tau_a;
        let design =
            design_fsp(c, &plant.without_delay(), tau_hat, filter_pole)?.with_prefilter(v.clone());
        Ok(LoopController::SmithPredictor { design })
    }

    /// Constant channel delay the controller was designed for.
    pub fn nominal_channel_delay(&self, plant: &TransferFunction) -> u32 {
        match self {
            LoopController::SmithPredictor { design } => {
                design.tau_hat.saturating_sub(plant.delay())
            }
            LoopController::Direct { .. } => 0,
        }
    }

    /// Steady output for a unit step, assuming the loop settles with integral action.
    pub fn steady_gain(&self) -> f64 {
        match self {
            LoopController::SmithPredictor { design } => design.v.dc_gain() / design.f.dc_gain(),
            LoopController::Direct { v, .. } => v.dc_gain(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySource {
    Constant {
        delay: u32,
    },
    /// Independent uniform integer delays in `[tau_lo, tau_hi]`.
    Uniform {
        seed: u64,
    },
    /// Physical delay per packet; must cover the horizon.
    Scripted {
        delays: Vec<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub amplitude: f64,
    pub onset: usize,
}

impl Reference {
    pub fn at(&self, k: usize) -> f64 {
        if k >= self.onset {
            self.amplitude
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub plant: TransferFunction,
    pub controller: LoopController,
    pub protocol: Protocol,
    pub p3_policy: P3Policy,
    pub tau_lo: u32,
    pub tau_hi: u32,
    pub delays: DelaySource,
    pub horizon: usize,
    pub reference: Reference,
    pub divergence_factor: f64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if self.tau_lo > self.tau_hi {
            return Err(Error::DelayBounds {
                lo: self.tau_lo,
                hi: self.tau_hi,
            });
        }
        let in_range = |d: u32| (self.tau_lo..=self.tau_hi).contains(&d);
        match &self.delays {
            DelaySource::Constant { delay } if !in_range(*delay) => Err(Error::DelayOutOfRange {
                packet: 0,
                delay: *delay as i64,
                lo: self.tau_lo as i64,
                hi: self.tau_hi as i64,
            }),
            DelaySource::Scripted { delays } => {
                if delays.len() < self.horizon {
                    return Err(Error::InvalidArgument(format!(
                        "scripted delays cover {} packets, horizon is {}",
                        delays.len(),
                        self.horizon
                    )));
                }
                match delays.iter().position(|&d| !in_range(d)) {
                    Some(j) => Err(Error::DelayOutOfRange {
                        packet: j,
                        delay: delays[j] as i64,
                        lo: self.tau_lo as i64,
                        hi: self.tau_hi as i64,
                    }),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub n: Vec<f64>,
    pub selected: Vec<Option<usize>>,
    pub packets: Vec<PacketEvent>,
    pub diverged: bool,
    pub divergence_instant: Option<usize>,
}

impl SimTrace {
    /// Sum of `(y_k - steady)^2` over the last `len` samples.
    pub fn tail_energy(&self, len: usize, steady: f64) -> f64 {
        let start = self.y.len().saturating_sub(len);
        self.y[start..].iter().map(|y| (y - steady).powi(2)).sum()
    }

    /// Columns `k,r,u,y,n,selected`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,r,u,y,n,selected\n");
        for k in 0..self.y.len() {
            let sel = self.selected[k].map(|j| j.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{k},{},{},{},{},{sel}",
                sig(self.r[k]),
                sig(self.u[k]),
                sig(self.y[k]),
                sig(self.n[k])
            );
        }
        s
    }

    /// Columns `packet,sent,delay,arrival,status`.
    pub fn packets_csv(&self) -> String {
        let mut s = String::from("packet,sent,delay,arrival,status\n");
        for e in &self.packets {
            let status = serde_json::to_value(e.status).expect("plain enum");
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                e.packet,
                e.sent,
                e.delay,
                e.arrival,
                status.as_str().unwrap_or_default()
            );
        }
        s
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
enum Ctl {
    Fsp {
        c: Recurrence,
        v: Recurrence,
        f: Recurrence,
        h: Recurrence,
    },
    Direct {
        r: Recurrence,
        v: Recurrence,
    },
}

/// Plant and controller recurrences of the loop without the channel.
#[derive(Debug, Clone)]
pub(crate) struct LoopCore {
    plant: Recurrence,
    ctl: Ctl,
}

impl LoopCore {
    pub(crate) fn new(plant: &TransferFunction, controller: &LoopController) -> Result<Self> {
        let plant = Recurrence::new(plant);
        if plant.lag() == 0 {
            return Err(Error::InvalidArgument(
                "plant must be strictly proper to close the loop".into(),
            ));
        }
        let ctl = match controller {
            LoopController::SmithPredictor { design } => {
                let h = Recurrence::new(&design.h);
                if h.lag() == 0 {
                    return Err(Error::InvalidArgument(
                        "predictor path H must be strictly proper".into(),
                    ));
                }
                Ctl::Fsp {
                    c: Recurrence::new(&design.c),
                    v: Recurrence::new(&design.v),
                    f: Recurrence::new(&design.f),
                    h,
                }
            }
            LoopController::Direct { r, v } => Ctl::Direct {
                r: Recurrence::new(r),
                v: Recurrence::new(v),
            },
        };
        Ok(Self { plant, ctl })
    }

    /// Plant output at the current instant (independent of the current input).
    pub(crate) fn output(&self) -> f64 {
        self.plant.peek(0.0)
    }

    /// Computes the control for reference `r` and received value `n`, then advances.
    pub(crate) fn advance(&mut self, r: f64, n: f64) -> f64 {
        let u = match &mut self.ctl {
            Ctl::Fsp { c, v, f, h } => {
                let e = v.step(r) - f.step(n) - h.peek(0.0);
                let u = c.step(e);
                h.step(u);
                u
            }
            Ctl::Direct { r: rr, v } => {
                let e = v.step(r) - n;
                rr.step(e)
            }
        };
        self.plant.step(u);
        u
    }
}

pub fn simulate(config: &SimConfig) -> Result<SimTrace> {
    config.validate()?;
    let mut core = LoopCore::new(&config.plant, &config.controller)?;
    let mut rx = Receiver::new(config.protocol, config.p3_policy.clone());
    let mut rng = match config.delays {
        DelaySource::Uniform { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let threshold = config.divergence_factor * config.reference.amplitude.abs().max(1.0);

    let n = config.horizon;
    let mut trace = SimTrace {
        r: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        n: Vec::with_capacity(n),
        selected: Vec::with_capacity(n),
        packets: Vec::new(),
        diverged: false,
        divergence_instant: None,
    };
    let mut run = 0;
    for k in 0..n {
        let y = core.output();
        let delay = match &config.delays {
            DelaySource::Constant { delay } => *delay,
            DelaySource::Uniform { .. } => rng
                .as_mut()
                .expect("seeded")
                .random_range(config.tau_lo..=config.tau_hi),
            DelaySource::Scripted { delays } => delays[k],
        };
        rx.send(k, k as i64, delay as i64, y);
        let (sel, received) = rx.receive(k as i64)?;
        let r = config.reference.at(k);
        let u = core.advance(r, received);

        trace.r.push(r);
        trace.u.push(u);
        trace.y.push(y);
        trace.n.push(received);
        trace.selected.push(sel);

        if y.abs() > threshold || !y.is_finite() {
            run += 1;
            if run >= DIVERGENCE_RUN {
                trace.diverged = true;
                trace.divergence_instant = Some(k + 1 - run);
                break;
            }
        } else {
            run = 0;
        }
    }
    trace.packets = rx.into_events();
    Ok(trace)
}
