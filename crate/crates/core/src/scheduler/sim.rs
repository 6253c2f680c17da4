//! Slot-by-slot simulation and delivery accounting.

use std::collections::BTreeSet;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{edf_contenders, ldp_contenders, local_demand, local_density, partition_bounds, LinkRuntimeState};
use super::protocol::{contend, ScheduleSlot};
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId, LinkSet};
use crate::oracle::{all_feasible_supersets, DEFAULT_ORACLE_CAP};
use crate::rational::{self, Rational};
use crate::traffic::{Slot, TrafficSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// A packet succeeds once it has received all `X` transmissions.
    #[serde(alias = "det")]
    Deterministic,
    /// Each transmission succeeds with the link's reliability `p`.
    #[serde(alias = "bern")]
    Bernoulli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    Ldp,
    EdfBaseline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub channels: u32,
    pub horizon: Slot,
    pub mode: Mode,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    /// Check independence and maximality of every slot's schedule.
    pub check_invariants: bool,
    /// Keep a per-slot record of ACTIVE counts and rounds.
    pub record_slots: bool,
    /// On each miss, compare the missing link's feasible-set densities at
    /// the previous slot against `N + 1`. Small graphs only.
    pub record_miss_forensics: bool,
}

impl SimulationConfig {
    pub fn new(channels: u32, horizon: Slot) -> Self {
        SimulationConfig {
            channels,
            horizon,
            mode: Mode::Deterministic,
            scheduler: SchedulerKind::Ldp,
            seed: 0,
            check_invariants: true,
            record_slots: false,
            record_miss_forensics: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub link: LinkId,
    /// Packets whose deadline fell within the horizon.
    pub packets: u64,
    pub misses: u64,
    /// `(packets - misses) / packets`; absent without packets.
    pub success_ratio: Option<f64>,
    /// Largest delivery delay among delivered packets, in slots.
    pub max_delay: Option<Slot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: Slot,
    pub active_per_channel: Vec<u32>,
    pub rounds: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissEvent {
    pub link: LinkId,
    /// The absolute deadline that was missed.
    pub slot: Slot,
    pub grants: u32,
    pub feasible_sets: usize,
    /// Smallest local-density sum over those sets at the previous slot.
    #[serde(with = "opt_rational")]
    pub min_density_sum: Option<Rational>,
    /// `min_density_sum >= N + 1`.
    pub bound_holds: Option<bool>,
}

mod opt_rational {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{self, Rational};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(rational::format).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| rational::parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad rational {t:?}"))))
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub links: Vec<LinkReport>,
    pub total_packets: u64,
    pub total_misses: u64,
    pub max_rounds: u32,
    pub mean_rounds: f64,
    /// Share of links with zero misses.
    pub schedulable_link_ratio: f64,
    /// Slots whose schedule passed the independence and maximality check.
    pub checked_slots: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slots: Vec<SlotRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub miss_events: Vec<MissEvent>,
}

impl SimulationReport {
    pub fn link(&self, id: LinkId) -> Option<&LinkReport> {
        self.links.iter().find(|l| l.link == id)
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    packets: u64,
    misses: u64,
    max_delay: Option<Slot>,
}

/// Stepwise simulator. Call [`Simulator::step`] until it returns `None`, or
/// use [`run_simulation`].
pub struct Simulator<'a> {
    g: &'a ConflictGraph,
    config: SimulationConfig,
    states: Vec<LinkRuntimeState>,
    /// Graph indices of each link's closed neighborhood.
    closed: Vec<Vec<usize>>,
    tallies: Vec<Tally>,
    rng: ChaCha8Rng,
    t: Slot,
    rounds_total: u64,
    max_rounds: u32,
    checked_slots: u64,
    slots: Vec<SlotRecord>,
    miss_events: Vec<MissEvent>,
    /// Every feasible set through each link, for miss forensics.
    feasible: Option<Vec<Vec<LinkSet>>>,
    prev_density: Vec<Rational>,
}

impl<'a> Simulator<'a> {
    pub fn new(g: &'a ConflictGraph, traffic: &TrafficSet, config: SimulationConfig) -> Result<Self> {
        traffic.covers(g)?;
        if config.channels == 0 {
            return Err(Error::input("at least one channel is required"));
        }
        if config.horizon < traffic.max_period() {
            return Err(Error::input(format!(
                "horizon {} is shorter than the longest period {}",
                config.horizon,
                traffic.max_period()
            )));
        }
        let states = g
            .link_ids()
            .iter()
            .map(|&id| LinkRuntimeState::new(traffic.require(id).cloned().expect("covered"), config.channels))
            .collect();
        let closed = (0..g.len())
            .map(|i| {
                let mut c = g.neighbor_indices(i).to_vec();
                c.push(i);
                c
            })
            .collect();
        let feasible = if config.record_miss_forensics && g.len() <= DEFAULT_ORACLE_CAP {
            Some(
                g.link_ids()
                    .iter()
                    .map(|&id| feasible_sets_through(g, id))
                    .collect::<Result<_>>()?,
            )
        } else {
            None
        };
        Ok(Simulator {
            g,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            tallies: vec![Tally::default(); g.len()],
            prev_density: vec![Rational::zero(); g.len()],
            config,
            states,
            closed,
            t: 0,
            rounds_total: 0,
            max_rounds: 0,
            checked_slots: 0,
            slots: Vec::new(),
            miss_events: Vec::new(),
            feasible,
        })
    }

    pub fn now(&self) -> Slot {
        self.t
    }

    pub fn states(&self) -> &[LinkRuntimeState] {
        &self.states
    }

    /// Simulates slot `now()`; `None` once the horizon is reached.
    pub fn step(&mut self) -> Result<Option<ScheduleSlot>> {
        let t = self.t;
        if t >= self.config.horizon {
            return Ok(None);
        }
        self.judge_deadlines(t);
        self.admit_arrivals(t);
        self.refresh_partitions(t)?;
        for s in &mut self.states {
            s.local_demand = local_demand(s, t);
            s.local_density = match s.partition {
                Some(p) if p.contains(t) => local_density(s, t)?,
                _ => Rational::zero(),
            };
        }

        let contenders = match self.config.scheduler {
            SchedulerKind::Ldp => ldp_contenders(self.g, &self.states, t)?,
            SchedulerKind::EdfBaseline => edf_contenders(self.g, &self.states, t)?,
        };
        let outcome = contend(self.g, &contenders, self.config.channels, t)?;
        if self.config.check_invariants {
            outcome.check_maximal_independent(self.g)?;
            self.checked_slots += 1;
        }
        let schedule = outcome.schedule;
        self.rounds_total += schedule.rounds as u64;
        self.max_rounds = self.max_rounds.max(schedule.rounds);
        if self.config.record_slots {
            self.slots.push(SlotRecord {
                slot: t,
                active_per_channel: schedule.active.iter().map(|c| c.len() as u32).collect(),
                rounds: schedule.rounds,
            });
        }
        self.apply_grants(&schedule, t)?;
        for (i, s) in self.states.iter().enumerate() {
            self.prev_density[i] = s.local_density;
        }
        self.t += 1;
        if self.t == self.config.horizon {
            self.judge_deadlines(self.t);
        }
        Ok(Some(schedule))
    }

    fn judge_deadlines(&mut self, t: Slot) {
        for i in 0..self.states.len() {
            let s = &self.states[i];
            if !s.packet_open || s.current_deadline() != Some(t) {
                continue;
            }
            let ok = match self.config.mode {
                Mode::Deterministic => s.grants >= s.traffic.work_demand(),
                Mode::Bernoulli => s.delivered,
            };
            let grants = s.grants;
            self.tallies[i].packets += 1;
            if !ok {
                self.tallies[i].misses += 1;
                self.record_miss(i, t, grants);
            }
            self.states[i].packet_open = false;
        }
    }

    fn record_miss(&mut self, i: usize, t: Slot, grants: u32) {
        let Some(feasible) = &self.feasible else {
            if self.config.record_miss_forensics {
                self.miss_events.push(MissEvent {
                    link: self.g.id_at(i),
                    slot: t,
                    grants,
                    feasible_sets: 0,
                    min_density_sum: None,
                    bound_holds: None,
                });
            }
            return;
        };
        let g = self.g;
        let min_sum = feasible[i]
            .iter()
            .map(|s| {
                s.iter()
                    .map(|&l| self.prev_density[g.index_of(l).expect("member of graph")])
                    .sum::<Rational>()
            })
            .min();
        let bound = rational::int(self.config.channels as i128 + 1);
        self.miss_events.push(MissEvent {
            link: g.id_at(i),
            slot: t,
            grants,
            feasible_sets: feasible[i].len(),
            min_density_sum: min_sum,
            bound_holds: min_sum.map(|m| m >= bound),
        });
    }

    fn admit_arrivals(&mut self, t: Slot) {
        for s in &mut self.states {
            if s.traffic.arrival_at_or_before(t) == Some(t) {
                s.on_arrival();
            }
        }
    }

    fn refresh_partitions(&mut self, t: Slot) -> Result<()> {
        for i in 0..self.states.len() {
            if matches!(self.states[i].partition, Some(p) if p.contains(t)) {
                continue;
            }
            let p = partition_bounds(self.closed[i].iter().map(|&k| &self.states[k].traffic), t);
            match p {
                Ok(p) => self.states[i].begin_partition(p),
                // Nothing has arrived around this link yet.
                Err(_) if self.closed[i].iter().all(|&k| self.states[k].traffic.first_arrival > t) => {
                    self.states[i].partition = None
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    fn apply_grants(&mut self, schedule: &ScheduleSlot, t: Slot) -> Result<()> {
        for (i, s) in self.states.iter_mut().enumerate() {
            let n = schedule.grants_for(s.traffic.link);
            if n == 0 {
                continue;
            }
            if n > s.remaining() {
                return Err(Error::invariant(format!(
                    "slot {t}: link {} granted {n} transmissions with {} outstanding",
                    s.traffic.link,
                    s.remaining()
                )));
            }
            let was_done = s.delivered;
            if self.config.mode == Mode::Bernoulli {
                s.delivered = (0..n).any(|_| self.rng.gen::<f64>() < s.traffic.link_reliability);
            }
            s.record_grants(n);
            let completed = match self.config.mode {
                Mode::Deterministic => s.grants == s.traffic.work_demand(),
                Mode::Bernoulli => s.delivered && !was_done,
            };
            if completed {
                let arrival = s.current_arrival().expect("granted packets have arrived");
                let delay = t + 1 - arrival;
                let m = &mut self.tallies[i].max_delay;
                *m = Some(m.map_or(delay, |d| d.max(delay)));
            }
        }
        Ok(())
    }

    /// Runs to the horizon and returns the report.
    pub fn finish(mut self) -> Result<SimulationReport> {
        while self.step()?.is_some() {}
        let links: Vec<LinkReport> = self
            .tallies
            .iter()
            .enumerate()
            .map(|(i, tally)| LinkReport {
                link: self.g.id_at(i),
                packets: tally.packets,
                misses: tally.misses,
                success_ratio: (tally.packets > 0)
                    .then(|| (tally.packets - tally.misses) as f64 / tally.packets as f64),
                max_delay: tally.max_delay,
            })
            .collect();
        let clean = links.iter().filter(|l| l.misses == 0).count();
        Ok(SimulationReport {
            total_packets: links.iter().map(|l| l.packets).sum(),
            total_misses: links.iter().map(|l| l.misses).sum(),
            schedulable_link_ratio: if links.is_empty() { 1.0 } else { clean as f64 / links.len() as f64 },
            links,
            max_rounds: self.max_rounds,
            mean_rounds: if self.t == 0 { 0.0 } else { self.rounds_total as f64 / self.t as f64 },
            checked_slots: self.checked_slots,
            slots: self.slots,
            miss_events: self.miss_events,
            config: self.config,
        })
    }
}

/// Every feasible set through `id`, over all maximal cliques containing it.
fn feasible_sets_through(g: &ConflictGraph, id: LinkId) -> Result<Vec<LinkSet>> {
    let mut all = BTreeSet::new();
    for k in g.cliques_containing(id)?.cliques {
        all.extend(all_feasible_supersets(g, id, &k, DEFAULT_ORACLE_CAP)?);
    }
    Ok(all.into_iter().collect())
}

/// Simulates `traffic` on `g` for `config.horizon` slots.
pub fn run_simulation(g: &ConflictGraph, traffic: &TrafficSet, config: SimulationConfig) -> Result<SimulationReport> {
    Simulator::new(g, traffic, config)?.finish()
}
