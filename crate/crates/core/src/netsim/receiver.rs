use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::uncertainty::Protocol;

/// Which packet a P3 receiver takes when several arrive together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum P3Policy {
    Oldest,
    Newest,
    Random {
        seed: u64,
    },
    /// Packet per instant, indexed from the first instant passed to `receive`.
    Scripted {
        choices: Vec<Option<usize>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketStatus {
    InFlight,
    Selected,
    /// P1: older than a packet already taken or taken at the same instant.
    Skipped,
    /// P3: arrived together with the packet that was taken.
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketEvent {
    pub packet: usize,
    pub sent: i64,
    pub delay: i64,
    pub arrival: i64,
    pub status: PacketStatus,
}

/// Protocol receiver with zero-order hold; the initial held value is 0.
#[derive(Debug, Clone)]
pub struct Receiver {
    protocol: Protocol,
    policy: P3Policy,
    rng: Option<ChaCha8Rng>,
    in_flight: BTreeMap<i64, Vec<(usize, f64)>>,
    last: Option<usize>,
    held: f64,
    first_instant: Option<i64>,
    events: Vec<PacketEvent>,
}

impl Receiver {
    pub fn new(protocol: Protocol, policy: P3Policy) -> Self {
        let rng = match policy {
            P3Policy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self {
            protocol,
            policy,
            rng,
            in_flight: BTreeMap::new(),
            last: None,
            held: 0.0,
            first_instant: None,
            events: Vec::new(),
        }
    }

    pub fn held(&self) -> f64 {
        self.held
    }

    pub fn events(&self) -> &[PacketEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<PacketEvent> {
        self.events
    }

    /// Queues packet `packet` sent at `sent` for delivery at `sent + delay`.
    pub fn send(&mut self, packet: usize, sent: i64, delay: i64, value: f64) {
        let arrival = sent + delay;
        self.events.push(PacketEvent {
            packet,
            sent,
            delay,
            arrival,
            status: PacketStatus::InFlight,
        });
        self.in_flight
            .entry(arrival)
            .or_default()
            .push((packet, value));
    }

    /// Delivers everything arriving at `k` and returns the packet taken, if any,
    /// with the held value afterwards. Instants must be visited in order.
    pub fn receive(&mut self, k: i64) -> Result<(Option<usize>, f64)> {
        let offset = (k - *self.first_instant.get_or_insert(k)) as usize;
        let mut arrived = self.in_flight.remove(&k).unwrap_or_default();
        arrived.sort_by_key(|&(j, _)| j);
        if let Some((&early, _)) = self.in_flight.range(..k).next() {
            return Err(Error::Selection {
                instant: k,
                reason: format!("instant {early} was skipped"),
            });
        }

        let chosen =
            match self.protocol {
                Protocol::P1 => arrived
                    .iter()
                    .rev()
                    .find(|&&(j, _)| self.last.is_none_or(|l| j > l))
                    .map(|&(j, _)| j),
                Protocol::P3 if arrived.is_empty() => match &self.policy {
                    P3Policy::Scripted { choices }
                        if choices.get(offset).is_some_and(|c| c.is_some()) =>
                    {
                        return Err(Error::Selection {
                            instant: k,
                            reason: "script takes a packet but none arrives".into(),
                        })
                    }
                    _ => None,
                },
                Protocol::P3 => Some(match &self.policy {
                    P3Policy::Oldest => arrived[0].0,
                    P3Policy::Newest => arrived[arrived.len() - 1].0,
                    P3Policy::Random { .. } => {
                        let rng = self.rng.as_mut().expect("seeded");
                        arrived[rng.random_range(0..arrived.len())].0
                    }
                    P3Policy::Scripted { choices } => {
                        let j = choices.get(offset).copied().flatten().ok_or_else(|| {
                            Error::Selection {
                                instant: k,
                                reason: "packets arrive but the script holds".into(),
                            }
                        })?;
                        if !arrived.iter().any(|&(p, _)| p == j) {
                            return Err(Error::Selection {
                                instant: k,
                                reason: format!("scripted packet {j} does not arrive here"),
                            });
                        }
                        j
                    }
                }),
            };

        for &(j, v) in &arrived {
            let status = if Some(j) == chosen {
                self.held = v;
                PacketStatus::Selected
            } else if self.protocol == Protocol::P1 {
                PacketStatus::Skipped
            } else {
                PacketStatus::Dropped
            };
            if let Some(e) = self
                .events
                .iter_mut()
                .rev()
                .find(|e| e.packet == j && e.status == PacketStatus::InFlight)
            {
                e.status = status;
            }
        }
        if chosen.is_some() {
            self.last = chosen;
        }
        Ok((chosen, self.held))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_skips_stale_packets() {
        let mut r = Receiver::new(Protocol::P1, P3Policy::Oldest);
        r.send(0, 0, 3, 10.0);
        r.send(1, 1, 1, 11.0);
        assert_eq!(r.receive(0).unwrap(), (None, 0.0));
        assert_eq!(r.receive(1).unwrap(), (None, 0.0));
        assert_eq!(r.receive(2).unwrap(), (Some(1), 11.0));
        assert_eq!(r.receive(3).unwrap(), (None, 11.0));
        assert_eq!(r.events()[0].status, PacketStatus::Skipped);
        assert_eq!(r.events()[1].status, PacketStatus::Selected);
    }

    #[test]
    fn p3_policies() {
        for (policy, want) in [(P3Policy::Oldest, 0), (P3Policy::Newest, 2)] {
            let mut r = Receiver::new(Protocol::P3, policy);
            r.send(0, 0, 2, 1.0);
            r.send(1, 1, 1, 2.0);
            r.send(2, 2, 0, 3.0);
            assert_eq!(r.receive(2).unwrap().0, Some(want));
            let dropped = r
                .events()
                .iter()
                .filter(|e| e.status == PacketStatus::Dropped)
                .count();
            assert_eq!(dropped, 2);
        }
    }

    #[test]
    fn seeded_random_is_reproducible() {
        let run = || {
            let mut r = Receiver::new(Protocol::P3, P3Policy::Random { seed: 7 });
            (0..50)
                .map(|k| {
                    r.send(2 * k, k as i64, 1, 0.0);
                    r.send(2 * k + 1, k as i64, 1, 0.0);
                    r.receive(k as i64).unwrap().0
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
