//! Per-slot multi-channel contention, simulated as synchronous rounds.
//!
//! Each round every link decides using its own live state and a snapshot of
//! its neighbors' states taken at the end of the previous round. A link that
//! turns ACTIVE on a channel keeps the priority it won with on that channel;
//! priorities only fall as demand is consumed, so two neighbors can never win
//! the same channel.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId};
use crate::rational::{int, Rational};
use crate::traffic::Slot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelState {
    Undecided,
    Active,
    Inactive,
}

/// How a contender's priority follows from its demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorityRule {
    /// `min(demand / slots_to_local_deadline, 1)`, recomputed per grant.
    LocalDensity { until_local_deadline: Slot },
    /// Fixed: the earlier absolute deadline wins.
    EarliestDeadline { absolute: Slot },
}

impl PriorityRule {
    /// Priority once `grants` units of `demand` have been granted.
    fn level(&self, demand: Rational, grants: i128) -> Level {
        match *self {
            PriorityRule::LocalDensity { until_local_deadline } => {
                let num = (demand.numer() - grants * demand.denom()).max(0);
                let den = demand.denom() * until_local_deadline.max(1) as i128;
                if num >= den {
                    Level::ONE
                } else {
                    Level { num, den }
                }
            }
            PriorityRule::EarliestDeadline { absolute } => Level {
                num: -(absolute as i128),
                den: 1,
            },
        }
    }
}

/// Exact priority as an unreduced fraction with positive denominator.
/// Compared by cross-multiplication, which avoids gcd work.
#[derive(Clone, Copy, Debug)]
struct Level {
    num: i128,
    den: i128,
}

impl Level {
    const ONE: Level = Level { num: 1, den: 1 };

    fn to_rational(self) -> Rational {
        Rational::new(self.num, self.den)
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Level {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Level {}

/// One link's input to a contention slot.
#[derive(Clone, Debug, PartialEq)]
pub struct Contender {
    pub link: LinkId,
    pub demand: Rational,
    pub rule: PriorityRule,
}

/// Per-channel ACTIVE sets for one slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSlot {
    pub slot: Slot,
    /// Sorted link ids, one list per channel in ascending channel id.
    pub active: Vec<Vec<LinkId>>,
    pub rounds: u32,
}

impl ScheduleSlot {
    pub fn grants_for(&self, link: LinkId) -> u32 {
        self.active.iter().filter(|ch| ch.binary_search(&link).is_ok()).count() as u32
    }
}

/// Everything `contend` learned, indexed like the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ContentionOutcome {
    pub schedule: ScheduleSlot,
    pub states: Vec<Vec<ChannelState>>,
    /// Priority each link entered the slot with.
    pub initial_priority: Vec<Rational>,
    /// Demand left after the slot's grants.
    pub final_demand: Vec<Rational>,
}

impl ContentionOutcome {
    /// Every channel's ACTIVE set is independent, and every link still
    /// holding positive demand is blocked by an ACTIVE neighbor wherever it
    /// is not ACTIVE itself.
    pub fn check_maximal_independent(&self, g: &ConflictGraph) -> Result<()> {
        let n = g.len();
        for (ch, _) in self.schedule.active.iter().enumerate() {
            for i in 0..n {
                let active = self.states[i][ch] == ChannelState::Active;
                let blocked = g
                    .neighbor_indices(i)
                    .iter()
                    .any(|&l| self.states[l][ch] == ChannelState::Active);
                if active && blocked {
                    return Err(Error::invariant(format!(
                        "slot {}: link {} shares channel {ch} with a conflicting link",
                        self.schedule.slot,
                        g.id_at(i)
                    )));
                }
                if !active && !blocked && self.final_demand[i] > Rational::zero() {
                    return Err(Error::invariant(format!(
                        "slot {}: link {} has demand but idles on free channel {ch}",
                        self.schedule.slot,
                        g.id_at(i)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Runs the round protocol over `contenders` (one per link, graph order).
pub fn contend(g: &ConflictGraph, contenders: &[Contender], channels: u32, t: Slot) -> Result<ContentionOutcome> {
    let n = g.len();
    if contenders.len() != n || contenders.iter().enumerate().any(|(i, c)| c.link != g.id_at(i)) {
        return Err(Error::input("contenders must follow the graph's link order"));
    }
    if channels == 0 {
        return Err(Error::input("at least one channel is required"));
    }
    let nc = channels as usize;
    // A link's priority after k grants is known up front.
    let levels: Vec<Vec<Level>> = contenders
        .iter()
        .map(|c| (0..=nc).map(|k| c.rule.level(c.demand, k as i128)).collect())
        .collect();
    let has_demand: Vec<Vec<bool>> = contenders
        .iter()
        .map(|c| (0..=nc).map(|k| *c.demand.numer() > k as i128 * c.demand.denom()).collect())
        .collect();
    let ids: Vec<LinkId> = (0..n).map(|i| g.id_at(i)).collect();
    // Ranking every level of the slot once turns each (priority, id)
    // comparison of the round loop into a single integer comparison.
    let mut sorted: Vec<Level> = levels.iter().flatten().copied().collect();
    sorted.sort_unstable();
    sorted.dedup();
    let key: Vec<Vec<u64>> = levels
        .iter()
        .zip(&ids)
        .map(|(l, &id)| {
            l.iter()
                .map(|p| (sorted.binary_search(p).expect("collected above") as u64) << 32 | id as u64)
                .collect()
        })
        .collect();

    let mut grants = vec![0usize; n];
    let mut state = vec![ChannelState::Undecided; n * nc];
    let mut seen_state = state.clone();
    let mut seen_key = vec![0u64; n];
    // Key a link held when it turned ACTIVE on a channel.
    let mut won_with = vec![0u64; n * nc];

    let guard = n * nc + 1;
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > guard {
            return Err(Error::invariant(format!("slot {t}: contention did not settle in {guard} rounds")));
        }
        seen_state.copy_from_slice(&state);
        for i in 0..n {
            seen_key[i] = key[i][grants[i]];
        }
        let mut done = true;
        for i in 0..n {
            let nbrs = g.neighbor_indices(i);
            for ch in 0..nc {
                let at = i * nc + ch;
                if state[at] == ChannelState::Undecided && has_demand[i][grants[i]] {
                    let mine = key[i][grants[i]];
                    let wins = nbrs.iter().all(|&l| match seen_state[l * nc + ch] {
                        ChannelState::Inactive => true,
                        ChannelState::Active => mine > won_with[l * nc + ch],
                        ChannelState::Undecided => mine > seen_key[l],
                    });
                    if wins {
                        state[at] = ChannelState::Active;
                        won_with[at] = mine;
                        grants[i] += 1;
                    }
                }
                if state[at] == ChannelState::Undecided {
                    let mine = key[i][grants[i]];
                    let beaten = nbrs
                        .iter()
                        .any(|&l| seen_state[l * nc + ch] == ChannelState::Active && won_with[l * nc + ch] > mine);
                    if beaten || !has_demand[i][grants[i]] {
                        state[at] = ChannelState::Inactive;
                    } else {
                        done = false;
                    }
                }
            }
        }
        if done {
            break;
        }
    }

    let state: Vec<Vec<ChannelState>> = state.chunks(nc).map(|c| c.to_vec()).collect();
    let initial_priority = levels.iter().map(|l| l[0].to_rational()).collect();
    let demand = contenders
        .iter()
        .zip(&grants)
        .map(|(c, &k)| c.demand - int(k as i128))
        .collect();
    let active = (0..nc)
        .map(|ch| (0..n).filter(|&i| state[i][ch] == ChannelState::Active).map(|i| ids[i]).collect())
        .collect();
    Ok(ContentionOutcome {
        schedule: ScheduleSlot {
            slot: t,
            active,
            rounds: rounds as u32,
        },
        states: state,
        initial_priority,
        final_demand: demand,
    })
}
