//! Local-deadline-partition (LDP) scheduling.
//!
//! Every link splits time at the arrivals and absolute deadlines of itself
//! and its one-hop conflict neighbors. Inside such a partition the link owes
//! a proportional share of its remaining per-packet demand, and contends for
//! channels with priority `min(local density, 1)`.

mod protocol;
mod sim;

pub use protocol::{contend, ChannelState, Contender, ContentionOutcome, PriorityRule, ScheduleSlot};
pub use sim::{
    run_simulation, LinkReport, MissEvent, Mode, SchedulerKind, SimulationConfig, SimulationReport, Simulator,
    SlotRecord,
};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::rational::{clamp_non_negative, int, ratio, Rational};
use crate::traffic::{LinkTraffic, Slot};

/// The slice `[start, end)` of a local deadline partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub start: Slot,
    pub end: Slot,
}

impl Partition {
    pub fn len(&self) -> Slot {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: Slot) -> bool {
        self.start <= t && t < self.end
    }
}

/// Partition around `t` induced by the arrivals and absolute deadlines of
/// `links` (a link together with its conflict neighbors).
///
/// Fails when no event lies at or before `t`, which the simulator never asks for.
pub fn partition_bounds<'a>(links: impl IntoIterator<Item = &'a LinkTraffic>, t: Slot) -> Result<Partition> {
    let mut start: Option<Slot> = None;
    let mut end = Slot::MAX;
    for l in links {
        for past in [l.arrival_at_or_before(t), l.deadline_at_or_before(t)].into_iter().flatten() {
            start = Some(start.map_or(past, |s| s.max(past)));
        }
        end = end.min(l.next_arrival_after(t)).min(l.next_deadline_after(t));
    }
    match start {
        Some(start) if end != Slot::MAX => Ok(Partition { start, end }),
        _ => Err(Error::invariant(format!("no partition events bound slot {t}"))),
    }
}

/// Per-channel decision state of one link within a slot.
pub type ChannelStates = Vec<ChannelState>;

/// Scheduler-side state of one link.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkRuntimeState {
    pub traffic: LinkTraffic,
    /// Index of the current packet; 0 before the first arrival.
    pub period_index: u64,
    /// `X'`: transmissions granted to the current packet.
    pub grants: u32,
    pub partition: Option<Partition>,
    /// `X'` at the start of the current partition.
    pub grants_at_partition_start: u32,
    /// Local demand fixed at the start of the current partition.
    pub demand_at_partition_start: Rational,
    /// Local demand `X_{i,t}` for the current slot.
    pub local_demand: Rational,
    /// Local density `ρ_{i,t}` for the current slot.
    pub local_density: Rational,
    pub channel_states: ChannelStates,
    /// Bernoulli mode: the current packet already got through.
    pub delivered: bool,
    /// The current packet has arrived and not yet been judged at its deadline.
    pub packet_open: bool,
}

impl LinkRuntimeState {
    pub fn new(traffic: LinkTraffic, channels: u32) -> Self {
        LinkRuntimeState {
            traffic,
            period_index: 0,
            grants: 0,
            partition: None,
            grants_at_partition_start: 0,
            demand_at_partition_start: Rational::zero(),
            local_demand: Rational::zero(),
            local_density: Rational::zero(),
            channel_states: vec![ChannelState::Undecided; channels as usize],
            delivered: false,
            packet_open: false,
        }
    }

    /// Arrival slot of the current packet.
    pub fn current_arrival(&self) -> Option<Slot> {
        (self.period_index > 0)
            .then(|| self.traffic.first_arrival + (self.period_index - 1) * self.traffic.period)
    }

    /// Absolute deadline of the current packet.
    pub fn current_deadline(&self) -> Option<Slot> {
        self.current_arrival().map(|a| a + self.traffic.deadline)
    }

    /// `X'' = X - X'`, or 0 once the packet is delivered or closed.
    pub fn remaining(&self) -> u32 {
        if !self.packet_open || self.delivered {
            0
        } else {
            self.traffic.work_demand().saturating_sub(self.grants)
        }
    }

    /// Starts the packet arriving at the current slot.
    pub fn on_arrival(&mut self) {
        self.period_index += 1;
        self.grants = 0;
        self.delivered = false;
        self.packet_open = true;
    }

    /// Enters partition `p` at its first slot and fixes its demand share.
    pub fn begin_partition(&mut self, p: Partition) {
        self.partition = Some(p);
        self.grants_at_partition_start = self.grants;
        self.demand_at_partition_start = local_demand(self, p.start);
    }

    pub fn record_grants(&mut self, n: u32) {
        self.grants += n;
    }
}

/// Local traffic demand `X_{i,t}`.
///
/// At the first slot of a partition it is the remaining demand scaled by the
/// partition's share of the time left to the packet deadline; later in the
/// partition it is that share minus grants since, clamped at zero. A packet
/// whose deadline is at or before the partition start owes nothing.
pub fn local_demand(state: &LinkRuntimeState, t: Slot) -> Rational {
    let (Some(p), Some(deadline)) = (state.partition, state.current_deadline()) else {
        return Rational::zero();
    };
    if deadline <= p.start || state.remaining() == 0 {
        return Rational::zero();
    }
    if t == p.start {
        ratio(state.remaining() as i128 * p.len() as i128, (deadline - p.start) as i128)
    } else {
        let since = state.grants.saturating_sub(state.grants_at_partition_start);
        clamp_non_negative(state.demand_at_partition_start - int(since as i128))
    }
}

/// `ρ_{i,t} = X_{i,t} / (d'' - t)`.
pub fn local_density(state: &LinkRuntimeState, t: Slot) -> Result<Rational> {
    let p = state
        .partition
        .ok_or_else(|| Error::invariant("local density requested without a partition"))?;
    if t >= p.end {
        return Err(Error::invariant(format!("slot {t} is past the local deadline {}", p.end)));
    }
    Ok(local_demand(state, t) / int((p.end - t) as i128))
}

/// `min(ρ, 1)`, never negative.
pub fn clamp_priority(density: Rational) -> Rational {
    clamp_non_negative(density).min(Rational::one())
}

/// One LDP slot over `states` (one per link, in graph order), which must
/// already hold the partition and local demand for slot `t`.
pub fn schedule_slot(g: &ConflictGraph, states: &[LinkRuntimeState], channels: u32, t: Slot) -> Result<ScheduleSlot> {
    let contenders = ldp_contenders(g, states, t)?;
    Ok(contend(g, &contenders, channels, t)?.schedule)
}

/// Earliest-deadline-first baseline: same contention protocol, priority by
/// the absolute deadline of the current packet, demand `X''`.
pub fn edf_baseline_slot(g: &ConflictGraph, states: &[LinkRuntimeState], channels: u32, t: Slot) -> Result<ScheduleSlot> {
    let contenders = edf_contenders(g, states, t)?;
    Ok(contend(g, &contenders, channels, t)?.schedule)
}

fn check_alignment(g: &ConflictGraph, states: &[LinkRuntimeState]) -> Result<()> {
    if states.len() != g.len() || states.iter().zip(g.link_ids()).any(|(s, &id)| s.traffic.link != id) {
        return Err(Error::input("runtime states must follow the graph's link order"));
    }
    Ok(())
}

pub(crate) fn ldp_contenders(g: &ConflictGraph, states: &[LinkRuntimeState], t: Slot) -> Result<Vec<Contender>> {
    check_alignment(g, states)?;
    Ok(states
        .iter()
        .map(|s| match s.partition {
            Some(p) if p.contains(t) => Contender {
                link: s.traffic.link,
                demand: s.local_demand,
                rule: PriorityRule::LocalDensity {
                    until_local_deadline: p.end - t,
                },
            },
            _ => Contender {
                link: s.traffic.link,
                demand: Rational::zero(),
                rule: PriorityRule::LocalDensity { until_local_deadline: 1 },
            },
        })
        .collect())
}

pub(crate) fn edf_contenders(g: &ConflictGraph, states: &[LinkRuntimeState], t: Slot) -> Result<Vec<Contender>> {
    check_alignment(g, states)?;
    Ok(states
        .iter()
        .map(|s| {
            let deadline = s.current_deadline().unwrap_or(Slot::MAX);
            let live = deadline > t;
            Contender {
                link: s.traffic.link,
                demand: if live { int(s.remaining() as i128) } else { Rational::zero() },
                rule: PriorityRule::EarliestDeadline { absolute: deadline },
            }
        })
        .collect())
}
