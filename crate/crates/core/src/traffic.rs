//! Periodic URLLC traffic: per-link tuples, the reliability-to-demand
//! transformation, and the random traffic generator with its reduction loop.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId};
use crate::par::{self, Execution};
use crate::rational::{ratio, Rational};

/// Slot index or slot count.
pub type Slot = u64;

/// Traffic of one link. `work_demand` is authoritative once set; when read
/// from a file without it, it is derived from the two reliabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkTraffic {
    pub link: LinkId,
    #[serde(rename = "T")]
    pub period: Slot,
    #[serde(rename = "D")]
    pub deadline: Slot,
    /// Required per-packet delivery probability.
    #[serde(rename = "P")]
    pub reliability_req: f64,
    /// Per-transmission success probability of the link.
    #[serde(rename = "p")]
    pub link_reliability: f64,
    #[serde(rename = "A1", default)]
    pub first_arrival: Slot,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    work_demand: Option<u32>,
}

impl LinkTraffic {
    /// Builds a tuple with its work demand derived from `p` and `P`.
    pub fn new(
        link: LinkId,
        period: Slot,
        deadline: Slot,
        reliability_req: f64,
        link_reliability: f64,
        first_arrival: Slot,
    ) -> Result<Self> {
        let x = required_transmissions(link_reliability, reliability_req)?;
        let t = LinkTraffic {
            link,
            period,
            deadline,
            reliability_req,
            link_reliability,
            first_arrival,
            work_demand: Some(x),
        };
        t.validate()?;
        Ok(t)
    }

    /// Builds a tuple with an explicit work demand. The reliability target is
    /// set to what `x` transmissions at reliability `p` achieve.
    pub fn with_demand(link: LinkId, period: Slot, deadline: Slot, x: u32, p: f64, first_arrival: Slot) -> Result<Self> {
        let t = LinkTraffic {
            link,
            period,
            deadline,
            reliability_req: achieved_reliability(p, x),
            link_reliability: p,
            first_arrival,
            work_demand: Some(x),
        };
        t.validate()?;
        Ok(t)
    }

    /// Per-packet transmission opportunities `X`.
    pub fn work_demand(&self) -> u32 {
        self.work_demand
            .expect("work demand is resolved on construction and load")
    }

    pub fn set_work_demand(&mut self, x: u32) {
        self.work_demand = Some(x);
        self.reliability_req = achieved_reliability(self.link_reliability, x);
    }

    /// `X / D`.
    pub fn density(&self) -> Rational {
        ratio(self.work_demand() as i128, self.deadline as i128)
    }

    /// `X / T`.
    pub fn utilization(&self) -> Rational {
        ratio(self.work_demand() as i128, self.period as i128)
    }

    /// Fills a missing work demand and checks every field.
    pub fn resolve(mut self) -> Result<Self> {
        if self.work_demand.is_none() {
            self.work_demand = Some(required_transmissions(self.link_reliability, self.reliability_req)?);
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.link == 0 {
            return Err(Error::input("link ids must be positive"));
        }
        if self.deadline == 0 || self.deadline > self.period {
            return Err(Error::input(format!(
                "link {}: need 0 < D <= T, got D={} T={}",
                self.link, self.deadline, self.period
            )));
        }
        for (name, v) in [("p", self.link_reliability), ("P", self.reliability_req)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("link {}: {name}={v} outside (0,1)", self.link)));
            }
        }
        if self.work_demand == Some(0) {
            return Err(Error::input(format!("link {}: X must be at least 1", self.link)));
        }
        Ok(())
    }

    /// Arrival slot and absolute deadline of the `j`-th packet (`j >= 1`).
    pub fn arrival_and_deadline(&self, j: u64) -> Result<(Slot, Slot)> {
        if j < 1 {
            return Err(Error::input("packet index starts at 1"));
        }
        let arrival = self.first_arrival + (j - 1) * self.period;
        Ok((arrival, arrival + self.deadline))
    }

    /// Latest arrival at or before `t`, if any.
    pub fn arrival_at_or_before(&self, t: Slot) -> Option<Slot> {
        (t >= self.first_arrival).then(|| t - (t - self.first_arrival) % self.period)
    }

    pub fn next_arrival_after(&self, t: Slot) -> Slot {
        match self.arrival_at_or_before(t) {
            Some(a) => a + self.period,
            None => self.first_arrival,
        }
    }

    /// Latest absolute deadline at or before `t`, if any.
    pub fn deadline_at_or_before(&self, t: Slot) -> Option<Slot> {
        let first = self.first_arrival + self.deadline;
        (t >= first).then(|| t - (t - first) % self.period)
    }

    pub fn next_deadline_after(&self, t: Slot) -> Slot {
        match self.deadline_at_or_before(t) {
            Some(d) => d + self.period,
            None => self.first_arrival + self.deadline,
        }
    }
}

/// Smallest `X >= 1` with `1 - (1-p)^X >= P`.
///
/// A logarithm ratio within `1e-9` of an integer is snapped to it, so that
/// exact cases such as `p = 0.9, P = 0.999` do not round up to the next count.
pub fn required_transmissions(p: f64, reliability_req: f64) -> Result<u32> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("link reliability {p} outside (0,1)")));
    }
    if !(reliability_req > 0.0 && reliability_req < 1.0) {
        return Err(Error::Domain(format!("reliability requirement {reliability_req} outside (0,1)")));
    }
    let exact = (1.0 - reliability_req).ln() / (1.0 - p).ln();
    let nearest = exact.round();
    let x = if (exact - nearest).abs() < 1e-9 { nearest } else { exact.ceil() };
    Ok(x.max(1.0) as u32)
}

/// `1 - (1-p)^x`.
pub fn achieved_reliability(p: f64, x: u32) -> f64 {
    1.0 - (1.0 - p).powi(x as i32)
}

/// Traffic keyed by link id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrafficSet {
    links: BTreeMap<LinkId, LinkTraffic>,
}

impl TrafficSet {
    pub fn new(items: impl IntoIterator<Item = LinkTraffic>) -> Result<Self> {
        let mut links = BTreeMap::new();
        for t in items {
            let t = t.resolve()?;
            if links.insert(t.link, t).is_some() {
                return Err(Error::input("duplicate traffic entry"));
            }
        }
        Ok(TrafficSet { links })
    }

    pub fn get(&self, link: LinkId) -> Option<&LinkTraffic> {
        self.links.get(&link)
    }

    pub(crate) fn require(&self, link: LinkId) -> Result<&LinkTraffic> {
        self.get(link)
            .ok_or_else(|| Error::input(format!("no traffic for link {link}")))
    }

    pub fn get_mut(&mut self, link: LinkId) -> Option<&mut LinkTraffic> {
        self.links.get_mut(&link)
    }

    pub fn iter(&self) -> impl Iterator<Item = &LinkTraffic> {
        self.links.values()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn to_vec(&self) -> Vec<LinkTraffic> {
        self.links.values().cloned().collect()
    }

    /// Traffic must exist for every link of `g`.
    pub fn covers(&self, g: &ConflictGraph) -> Result<()> {
        for &id in g.link_ids() {
            self.require(id)?;
        }
        Ok(())
    }

    pub fn max_period(&self) -> Slot {
        self.iter().map(|t| t.period).max().unwrap_or(0)
    }

    pub fn densities(&self) -> BTreeMap<LinkId, Rational> {
        self.links.iter().map(|(&id, t)| (id, t.density())).collect()
    }
}

/// Knobs of the random traffic draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficParams {
    /// Inclusive range of relative deadlines.
    pub deadline_range: (Slot, Slot),
    /// `T - D` is drawn from `0..=floor(D / slack_divisor)`.
    pub slack_divisor: Slot,
    /// `X` is drawn from `ceil(D·lo)..=floor(D·hi)`, fractions as `(num, den)`.
    pub demand_low: (u64, u64),
    pub demand_high: (u64, u64),
    /// Per-transmission reliability assigned to every generated link.
    pub link_reliability: f64,
    /// Draw `A1` uniformly from `0..T` instead of starting every link at slot 0.
    pub random_phase: bool,
    /// When a failing link is already at `X = 1`, lower its densest
    /// conflicting neighbor instead of giving up on it.
    pub relieve_neighbors: bool,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            deadline_range: (10, 40),
            slack_divisor: 6,
            demand_low: (1, 6),
            demand_high: (5, 6),
            link_reliability: 0.5,
            random_phase: false,
            relieve_neighbors: true,
        }
    }
}

impl TrafficParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.deadline_range;
        if lo == 0 || lo > hi {
            return Err(Error::input("deadline range must be non-empty and positive"));
        }
        if self.slack_divisor == 0 || self.demand_low.1 == 0 || self.demand_high.1 == 0 {
            return Err(Error::input("zero divisor in traffic parameters"));
        }
        for d in lo..=hi {
            let (xl, xh) = self.demand_bounds(d);
            if xl > xh || xh as u64 >= d {
                return Err(Error::input(format!(
                    "demand range empty or density >= 1 at D={d}"
                )));
            }
        }
        if !(self.link_reliability > 0.0 && self.link_reliability < 1.0) {
            return Err(Error::Domain("link reliability outside (0,1)".into()));
        }
        Ok(())
    }

    fn demand_bounds(&self, d: Slot) -> (u32, u32) {
        let (ln, ld) = self.demand_low;
        let (hn, hd) = self.demand_high;
        let lo = (d * ln).div_ceil(ld).max(1);
        let hi = d * hn / hd;
        (lo as u32, hi as u32)
    }
}

/// Outcome of [`generate_traffic`].
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedTraffic {
    pub traffic: TrafficSet,
    /// Links that still fail the test with `X = 1`.
    pub unschedulable: Vec<LinkId>,
    /// Number of unit decrements applied by the reduction loop.
    pub reductions: u64,
}

/// Draws traffic for every link, then lowers `X` on failing links until each
/// passes `test` or bottoms out at 1.
///
/// `test(g, traffic, link, channels)` decides one link. Links are visited in
/// ascending id; after a decrement only the closed neighborhood of the
/// changed link is re-tested, since only those tests read its density.
pub fn generate_traffic<R, F>(
    g: &ConflictGraph,
    channels: u32,
    params: &TrafficParams,
    rng: &mut R,
    test: F,
) -> Result<GeneratedTraffic>
where
    R: Rng + ?Sized,
    F: Fn(&ConflictGraph, &TrafficSet, LinkId, u32) -> bool + Sync,
{
    if g.is_empty() {
        return Err(Error::input("cannot generate traffic for an empty graph"));
    }
    if channels == 0 {
        return Err(Error::input("channel count must be at least 1"));
    }
    params.validate()?;
    let mut items = Vec::with_capacity(g.len());
    for &id in g.link_ids() {
        let d = rng.gen_range(params.deadline_range.0..=params.deadline_range.1);
        let t = d + rng.gen_range(0..=d / params.slack_divisor);
        let (xl, xh) = params.demand_bounds(d);
        let x = rng.gen_range(xl..=xh);
        let a1 = if params.random_phase { rng.gen_range(0..t) } else { 0 };
        items.push(LinkTraffic::with_demand(id, t, d, x, params.link_reliability, a1)?);
    }
    let mut traffic = TrafficSet::new(items)?;
    let (unschedulable, reductions) = reduce_until_schedulable(g, &mut traffic, channels, params.relieve_neighbors, Execution::Parallel, &test)?;
    Ok(GeneratedTraffic {
        traffic,
        unschedulable,
        reductions,
    })
}

/// The reduction loop of [`generate_traffic`], usable on any traffic set.
pub fn reduce_until_schedulable<F>(
    g: &ConflictGraph,
    traffic: &mut TrafficSet,
    channels: u32,
    relieve_neighbors: bool,
    exec: Execution,
    test: &F,
) -> Result<(Vec<LinkId>, u64)>
where
    F: Fn(&ConflictGraph, &TrafficSet, LinkId, u32) -> bool + Sync,
{
    traffic.covers(g)?;
    let mut dirty: BTreeSet<LinkId> = g.link_ids().iter().copied().collect();
    let mut bottomed: BTreeSet<LinkId> = BTreeSet::new();
    let mut reductions = 0u64;
    loop {
        let candidates: Vec<LinkId> = dirty.iter().copied().collect();
        let snapshot = &*traffic;
        let verdicts = par::map(exec, &candidates, |&id| test(g, snapshot, id, channels));
        dirty.clear();
        let failing: Vec<LinkId> = candidates
            .iter()
            .zip(verdicts)
            .filter_map(|(&id, ok)| (!ok).then_some(id))
            .collect();
        let mut changed = false;
        for id in failing {
            let victim = if traffic.require(id)?.work_demand() > 1 {
                Some(id)
            } else if relieve_neighbors {
                densest_reducible_neighbor(g, traffic, id)?
            } else {
                None
            };
            match victim {
                Some(v) => {
                    let t = traffic.get_mut(v).expect("covered");
                    t.set_work_demand(t.work_demand() - 1);
                    reductions += 1;
                    changed = true;
                    dirty.extend(g.closed_neighborhood(v)?);
                    bottomed.remove(&id);
                }
                None => {
                    bottomed.insert(id);
                }
            }
        }
        if !changed {
            break;
        }
        // A bottomed link whose neighborhood just got lighter is retested.
        bottomed.retain(|id| !dirty.contains(id));
    }
    Ok((bottomed.into_iter().collect(), reductions))
}

/// Neighbor of `id` with `X > 1` and the largest density; ties go to the
/// smaller id.
fn densest_reducible_neighbor(g: &ConflictGraph, traffic: &TrafficSet, id: LinkId) -> Result<Option<LinkId>> {
    let mut best: Option<(Rational, LinkId)> = None;
    for l in g.neighbors(id)? {
        let t = traffic.require(l)?;
        if t.work_demand() > 1 && best.is_none_or(|(d, _)| t.density() > d) {
            best = Some((t.density(), l));
        }
    }
    Ok(best.map(|(_, l)| l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedulability::link_passes;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn required_transmissions_examples() {
        assert_eq!(required_transmissions(0.9, 0.999).unwrap(), 3);
        assert_eq!(required_transmissions(0.5, 0.984375).unwrap(), 6);
        assert_eq!(required_transmissions(0.95, 0.9).unwrap(), 1);
        assert_eq!(required_transmissions(0.9, 0.9).unwrap(), 1);
        assert!(matches!(required_transmissions(1.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(required_transmissions(0.5, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn arrival_and_deadline_examples() {
        let a = LinkTraffic::with_demand(1, 4, 4, 1, 0.5, 0).unwrap();
        assert_eq!(a.arrival_and_deadline(1).unwrap(), (0, 4));
        let b = LinkTraffic::with_demand(1, 6, 4, 1, 0.5, 2).unwrap();
        assert_eq!(b.arrival_and_deadline(3).unwrap(), (14, 18));
        let c = LinkTraffic::with_demand(1, 5, 5, 1, 0.5, 0).unwrap();
        assert_eq!(c.arrival_and_deadline(2).unwrap(), (5, 10));
        assert!(c.arrival_and_deadline(0).is_err());
    }

    #[test]
    fn event_lookups() {
        let t = LinkTraffic::with_demand(1, 6, 4, 1, 0.5, 2).unwrap();
        assert_eq!(t.arrival_at_or_before(1), None);
        assert_eq!(t.next_arrival_after(1), 2);
        assert_eq!(t.arrival_at_or_before(9), Some(8));
        assert_eq!(t.next_arrival_after(8), 14);
        assert_eq!(t.deadline_at_or_before(5), None);
        assert_eq!(t.deadline_at_or_before(6), Some(6));
        assert_eq!(t.next_deadline_after(6), 12);
        assert_eq!(t.next_deadline_after(0), 6);
    }

    #[test]
    fn rejects_bad_tuples() {
        assert!(LinkTraffic::with_demand(1, 4, 5, 1, 0.5, 0).is_err());
        assert!(LinkTraffic::with_demand(1, 4, 0, 1, 0.5, 0).is_err());
        assert!(LinkTraffic::with_demand(1, 4, 4, 0, 0.5, 0).is_err());
        assert!(LinkTraffic::new(1, 4, 4, 1.2, 0.5, 0).is_err());
    }

    #[test]
    fn derived_demand_on_load() {
        let json = r#"[{"link":3,"T":10,"D":10,"P":0.999,"p":0.9,"A1":0}]"#;
        let items: Vec<LinkTraffic> = serde_json::from_str(json).unwrap();
        let set = TrafficSet::new(items).unwrap();
        assert_eq!(set.get(3).unwrap().work_demand(), 3);
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let g = crate::graph::example_graph();
        let params = TrafficParams::default();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate_traffic(&g, 2, &params, &mut rng, link_passes).unwrap()
        };
        let a = run(7);
        assert_eq!(a, run(7));
        for t in a.traffic.iter() {
            assert!(t.deadline <= t.period);
            assert!((10..=40).contains(&t.deadline));
            assert!(t.period - t.deadline <= t.deadline / 6);
            assert!(t.density() < ratio(1, 1));
        }
        for &id in g.link_ids() {
            assert!(a.unschedulable.contains(&id) || link_passes(&g, &a.traffic, id, 2));
        }
    }

    #[test]
    fn isolated_link_keeps_its_demand() {
        let g = ConflictGraph::new([1], []).unwrap();
        let params = TrafficParams {
            deadline_range: (10, 10),
            ..TrafficParams::default()
        };
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = generate_traffic(&g, 1, &params, &mut rng, link_passes).unwrap();
            assert_eq!(out.reductions, 0);
            assert!(out.unschedulable.is_empty());
        }
    }

    #[test]
    fn clique_reduction_respects_channel_budget() {
        let g = ConflictGraph::new([1, 2, 3], [(1, 2), (1, 3), (2, 3)]).unwrap();
        let mut traffic =
            TrafficSet::new((1..=3).map(|id| LinkTraffic::with_demand(id, 10, 10, 8, 0.5, 0).unwrap())).unwrap();
        let (bottomed, _) = reduce_until_schedulable(&g, &mut traffic, 1, false, Execution::Sequential, &link_passes).unwrap();
        assert!(bottomed.is_empty());
        let total: Rational = traffic.iter().map(|t| t.density()).sum();
        assert!(total <= ratio(1, 1));
        for id in 1..=3 {
            assert!(link_passes(&g, &traffic, id, 1));
        }
    }

    #[test]
    fn relief_clears_every_failure_on_the_example() {
        let g = crate::graph::example_graph();
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = generate_traffic(&g, 1, &TrafficParams::default(), &mut rng, link_passes).unwrap();
            assert!(out.unschedulable.is_empty());
            assert!(g.link_ids().iter().all(|&id| link_passes(&g, &out.traffic, id, 1)));
        }
    }
}
