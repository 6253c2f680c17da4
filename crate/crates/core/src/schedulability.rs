//! Feasible sets and the per-link schedulability test.
//!
//! A link `i` is tested against every maximal clique `K` through it: some
//! superset `S` of `K` inside `M_i ∪ {i}` must be *feasible* (every maximal
//! independent set of the whole graph meets `S`) and carry a work-density sum
//! of at most `N`. Feasibility is decided locally, on the subgraph induced by
//! the links within two hops of `i`.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::cliques::BitGraph;
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId, LinkSet};
use crate::par::{self, Execution};
use crate::rational::{self, int, Rational};
use crate::traffic::TrafficSet;

/// A feasible set for one link and clique, with its work-density sum `U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibleSetResult {
    pub owner: LinkId,
    pub members: LinkSet,
    #[serde(with = "rational::as_string")]
    pub sum_density: Rational,
}

/// Per-clique detail of a schedulability verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueAnalysis {
    pub clique: LinkSet,
    /// Minimum-density feasible set found for this clique.
    pub feasible_set: LinkSet,
    #[serde(with = "rational::as_string")]
    pub min_density: Rational,
    /// `Σ X/T` over the clique.
    #[serde(with = "rational::as_string")]
    pub utilization: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulabilityVerdict {
    pub link: LinkId,
    pub schedulable: bool,
    pub cliques: Vec<CliqueAnalysis>,
    /// Necessary condition: no clique through the link has utilization above `N`.
    pub necessary_ok: bool,
    /// Lower bound on the approximation ratio.
    #[serde(with = "rational::as_string")]
    pub delta: Rational,
    /// Topology approximation ratio.
    #[serde(with = "rational::as_string")]
    pub delta_prime: Rational,
    /// Feasibility evaluations spent on this link.
    pub feasibility_checks: u64,
}

impl SchedulabilityVerdict {
    pub fn delta_f64(&self) -> f64 {
        rational::to_f64(&self.delta)
    }

    pub fn delta_prime_f64(&self) -> f64 {
        rational::to_f64(&self.delta_prime)
    }

    pub fn max_min_density(&self) -> Rational {
        self.cliques
            .iter()
            .map(|c| c.min_density)
            .max()
            .unwrap_or_else(|| int(0))
    }
}

/// The subgraph induced by `{i} ∪ M_i ∪ M_{i,2}`, re-indexed so that local
/// index order matches link-id order.
#[derive(Clone, Debug)]
pub(crate) struct LocalView {
    pub ids: Vec<LinkId>,
    pub adj: BitGraph,
    /// `M_i ∪ {i}` as a local mask.
    pub closed: FixedBitSet,
}

impl LocalView {
    pub fn new(g: &ConflictGraph, id: LinkId) -> Result<Self> {
        let mut ball = g.closed_neighborhood(id)?;
        ball.extend(g.two_hop_set(id)?);
        let ids: Vec<LinkId> = ball.into_iter().collect();
        let n = ids.len();
        let mut adj = BitGraph::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                if g.adjacent(ids[a], ids[b]) {
                    adj.add_edge(a, b);
                }
            }
        }
        let owner = ids.binary_search(&id).expect("owner is in its own ball");
        let mut closed = adj.row(owner).clone();
        closed.insert(owner);
        Ok(LocalView { ids, adj, closed })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn local(&self, id: LinkId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn mask(&self, set: &LinkSet) -> Option<FixedBitSet> {
        let mut m = FixedBitSet::with_capacity(self.len());
        for &id in set {
            m.insert(self.local(id)?);
        }
        Some(m)
    }

    pub fn to_ids(&self, mask: &FixedBitSet) -> LinkSet {
        mask.ones().map(|k| self.ids[k]).collect()
    }

    /// Decides feasibility of `s` (with `i ∈ s ⊆ M_i ∪ {i}`).
    ///
    /// `s` is infeasible exactly when some maximal independent set of the
    /// subgraph on `M'_i = ball \ s` has every member of `s` adjacent to it.
    /// Any independent subset of `M'_i` dominating `s` extends to such a
    /// maximal set, so this searches for an independent dominating set
    /// among the `M'_i`-neighbors of `s` instead of enumerating.
    pub fn is_feasible(&self, s: &FixedBitSet) -> bool {
        let mut allowed = FixedBitSet::with_capacity(self.len());
        for v in s.ones() {
            allowed.union_with(self.adj.row(v));
        }
        allowed.difference_with(s);
        !self.dominated_by_independent(s.clone(), allowed)
    }

    fn dominated_by_independent(&self, undominated: FixedBitSet, mut allowed: FixedBitSet) -> bool {
        // Branch on the member with the fewest remaining dominators.
        let mut target = None;
        let mut fewest = usize::MAX;
        for v in undominated.ones() {
            let options = self.adj.row(v).intersection(&allowed).count();
            if options < fewest {
                fewest = options;
                target = Some(v);
                if options == 0 {
                    break;
                }
            }
        }
        let Some(target) = target else {
            return true;
        };
        if fewest == 0 {
            return false;
        }
        let mut options = self.adj.row(target).clone();
        options.intersect_with(&allowed);
        for u in options.ones() {
            let mut rest = undominated.clone();
            rest.difference_with(self.adj.row(u));
            let mut next = allowed.clone();
            next.difference_with(self.adj.row(u));
            next.set(u, false);
            if self.dominated_by_independent(rest, next) {
                return true;
            }
            allowed.set(u, false);
        }
        false
    }

    /// Literal form of the two-hop test: enumerate every maximal independent
    /// set of `M'_i` and look for a member of `s` with no neighbor in it.
    pub fn is_feasible_enumerated(&self, s: &FixedBitSet) -> bool {
        let mut rest = FixedBitSet::with_capacity(self.len());
        rest.insert_range(..);
        rest.difference_with(s);
        if rest.is_clear() {
            return true;
        }
        self.adj
            .maximal_independent_sets(&rest)
            .iter()
            .all(|mis| s.ones().any(|l| self.adj.row(l).is_disjoint(mis)))
    }
}

/// The clique search of the schedulability test for one link.
pub(crate) struct LinkAnalysis {
    pub view: LocalView,
    pub cliques: Vec<FixedBitSet>,
    densities: Vec<Rational>,
    checks: Cell<u64>,
    /// Feasibility depends on the topology only, so verdicts are reused
    /// across density changes.
    memo: RefCell<HashMap<FixedBitSet, bool>>,
}

struct Best {
    members: FixedBitSet,
    sum: Rational,
}

impl LinkAnalysis {
    /// `densities` must cover `M_i ∪ {i}`.
    pub fn new(g: &ConflictGraph, id: LinkId, densities: &BTreeMap<LinkId, Rational>) -> Result<Self> {
        let mut analysis = Self::structure(g, id)?;
        analysis.load_densities(|l| {
            densities
                .get(&l)
                .copied()
                .ok_or_else(|| Error::input(format!("no density for link {l}")))
        })?;
        Ok(analysis)
    }

    /// The density-free part: local view and cliques.
    pub fn structure(g: &ConflictGraph, id: LinkId) -> Result<Self> {
        let view = LocalView::new(g, id)?;
        let cliques = g
            .cliques_containing(id)?
            .cliques
            .iter()
            .map(|c| view.mask(c).expect("cliques lie in the closed neighborhood"))
            .collect();
        Ok(LinkAnalysis {
            densities: vec![int(0); view.len()],
            view,
            cliques,
            checks: Cell::new(0),
            memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn load_densities(&mut self, mut density: impl FnMut(LinkId) -> Result<Rational>) -> Result<()> {
        for k in self.view.closed.ones() {
            self.densities[k] = density(self.view.ids[k])?;
        }
        Ok(())
    }

    /// Whether every clique has a feasible set with density sum at most `n`.
    pub fn passes(&self, n: Rational) -> bool {
        // The closed neighborhood bounds every clique's result from above.
        if self.sum(&self.view.closed) <= n {
            return true;
        }
        (0..self.cliques.len()).all(|j| self.search(j, Some(n)).1 <= n)
    }

    pub fn checks(&self) -> u64 {
        self.checks.get()
    }

    pub fn sum(&self, set: &FixedBitSet) -> Rational {
        set.ones().map(|k| self.densities[k]).sum()
    }

    fn feasible(&self, set: &FixedBitSet) -> bool {
        self.checks.set(self.checks.get() + 1);
        if let Some(&known) = self.memo.borrow().get(set) {
            return known;
        }
        let verdict = self.view.is_feasible(set);
        self.memo.borrow_mut().insert(set.clone(), verdict);
        verdict
    }

    fn union(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
        let mut u = a.clone();
        u.union_with(b);
        u
    }

    /// Minimum-density feasible superset of clique `j` found by the
    /// fix/waiting-list reduction search. Falls back to `M_i ∪ {i}`, which is
    /// always feasible.
    pub fn min_density_for_clique(&self, j: usize) -> (FixedBitSet, Rational) {
        self.search(j, None)
    }

    /// The search behind [`Self::min_density_for_clique`]; with `enough`, it
    /// stops as soon as a set at or below that sum is found.
    fn search(&self, j: usize, enough: Option<Rational>) -> (FixedBitSet, Rational) {
        let base = &self.cliques[j];
        if self.feasible(base) {
            return (base.clone(), self.sum(base));
        }
        let mut best = Best {
            members: self.view.closed.clone(),
            sum: self.sum(&self.view.closed),
        };
        let m = self.cliques.len();
        for x in (0..m).filter(|&x| x != j) {
            if enough.is_some_and(|e| best.sum <= e) {
                break;
            }
            let fix = Self::union(base, &self.cliques[x]);
            let waiting: Vec<usize> = (x + 1..m).chain(0..x).filter(|&p| p != j).collect();
            self.reduce(fix, &waiting, &mut best);
        }
        (best.members, best.sum)
    }

    fn reduce(&self, fix: FixedBitSet, waiting: &[usize], best: &mut Best) {
        let mut choice = Vec::new();
        let mut local_waiting = Vec::new();
        let mut pending = fix.clone();
        for &p in waiting {
            let candidate = Self::union(&pending, &self.cliques[p]);
            if self.feasible(&candidate) {
                choice.push(p);
            } else {
                local_waiting.push(p);
                pending = candidate;
            }
        }
        if !local_waiting.is_empty() {
            if let Some(c) = self.cheapest_choice(&fix, &choice) {
                let next = Self::union(&fix, &self.cliques[c]);
                self.reduce(next, &local_waiting, best);
            }
        } else if self.feasible(&fix) {
            self.consider(fix, best);
        } else if let Some(c) = self.cheapest_choice(&fix, &choice) {
            let set = Self::union(&fix, &self.cliques[c]);
            self.consider(set, best);
        }
    }

    // Ties on the density sum go to the clique with the smaller member-id vector.
    fn cheapest_choice(&self, fix: &FixedBitSet, choice: &[usize]) -> Option<usize> {
        choice.iter().copied().min_by(|&a, &b| {
            let sa = self.sum(&Self::union(fix, &self.cliques[a]));
            let sb = self.sum(&Self::union(fix, &self.cliques[b]));
            sa.cmp(&sb)
                .then_with(|| self.cliques[a].ones().cmp(self.cliques[b].ones()))
        })
    }

    fn consider(&self, set: FixedBitSet, best: &mut Best) {
        let sum = self.sum(&set);
        let better = match sum.cmp(&best.sum) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                let (a, b) = (set.count_ones(..), best.members.count_ones(..));
                a < b || (a == b && set.ones().lt(best.members.ones()))
            }
        };
        if better {
            best.members = set;
            best.sum = sum;
        }
    }
}

fn check_subset(g: &ConflictGraph, id: LinkId, s: &LinkSet) -> Result<()> {
    let closed = g.closed_neighborhood(id)?;
    if !s.contains(&id) {
        return Err(Error::input(format!("set must contain link {id}")));
    }
    if !s.is_subset(&closed) {
        return Err(Error::input(format!(
            "set must lie within the closed neighborhood of link {id}"
        )));
    }
    Ok(())
}

/// Two-hop feasibility test for `s`, where `i ∈ s ⊆ M_i ∪ {i}`.
pub fn is_feasible_set(g: &ConflictGraph, id: LinkId, s: &LinkSet) -> Result<bool> {
    check_subset(g, id, s)?;
    let view = LocalView::new(g, id)?;
    Ok(view.is_feasible(&view.mask(s).expect("checked subset")))
}

/// Same decision as [`is_feasible_set`], by explicit enumeration of the
/// maximal independent sets of `M'_i`.
pub fn is_feasible_set_enumerated(g: &ConflictGraph, id: LinkId, s: &LinkSet) -> Result<bool> {
    check_subset(g, id, s)?;
    let view = LocalView::new(g, id)?;
    Ok(view.is_feasible_enumerated(&view.mask(s).expect("checked subset")))
}

/// Minimum-density feasible set containing clique `k` of link `id`.
pub fn min_density_feasible_set(
    g: &ConflictGraph,
    id: LinkId,
    k: &LinkSet,
    densities: &BTreeMap<LinkId, Rational>,
) -> Result<FeasibleSetResult> {
    let analysis = LinkAnalysis::new(g, id, densities)?;
    let target = analysis.view.mask(k);
    let j = analysis
        .cliques
        .iter()
        .position(|c| Some(c) == target.as_ref())
        .ok_or_else(|| Error::input(format!("{k:?} is not a maximal clique through link {id}")))?;
    let (members, sum) = analysis.min_density_for_clique(j);
    Ok(FeasibleSetResult {
        owner: id,
        members: analysis.view.to_ids(&members),
        sum_density: sum,
    })
}

/// Full verdict for one link with `channels` channels.
pub fn schedulability_test(
    g: &ConflictGraph,
    id: LinkId,
    traffic: &TrafficSet,
    channels: u32,
) -> Result<SchedulabilityVerdict> {
    let closed = g.closed_neighborhood(id)?;
    let mut densities = BTreeMap::new();
    for &l in &closed {
        densities.insert(l, traffic.require(l)?.density());
    }
    let analysis = LinkAnalysis::new(g, id, &densities)?;
    let n = int(channels as i128);
    let mut cliques = Vec::with_capacity(analysis.cliques.len());
    for (j, mask) in analysis.cliques.iter().enumerate() {
        let (members, min_density) = analysis.min_density_for_clique(j);
        let utilization = mask
            .ones()
            .map(|k| traffic.require(analysis.view.ids[k]).map(|t| t.utilization()))
            .sum::<Result<Rational>>()?;
        cliques.push(CliqueAnalysis {
            clique: analysis.view.to_ids(mask),
            feasible_set: analysis.view.to_ids(&members),
            min_density,
            utilization,
        });
    }
    let schedulable = cliques.iter().all(|c| c.min_density <= n);
    let max_utilization = cliques.iter().map(|c| c.utilization).max().expect("at least one clique");
    let max_density = cliques.iter().map(|c| c.min_density).max().expect("at least one clique");
    let largest_clique = cliques.iter().map(|c| c.clique.len()).max().expect("at least one clique");
    let largest_set = cliques
        .iter()
        .map(|c| c.feasible_set.len())
        .max()
        .expect("at least one clique");
    Ok(SchedulabilityVerdict {
        link: id,
        schedulable,
        necessary_ok: max_utilization <= n,
        delta: max_utilization / max_density,
        delta_prime: Rational::new(largest_clique as i128, largest_set as i128),
        feasibility_checks: analysis.checks(),
        cliques,
    })
}

/// Boolean form of [`schedulability_test`], shaped for the traffic generator.
pub fn link_passes(g: &ConflictGraph, traffic: &TrafficSet, id: LinkId, channels: u32) -> bool {
    let Ok(mut analysis) = LinkAnalysis::structure(g, id) else {
        return false;
    };
    analysis.load_densities(|l| traffic.require(l).map(|t| t.density())).is_ok()
        && analysis.passes(int(channels as i128))
}

/// Pass/fail tester for repeated queries on one graph, as issued by the
/// traffic reduction loop. Each link's local structure and feasibility
/// verdicts are built once and kept.
pub struct CachedTester {
    analyses: Vec<Mutex<Option<LinkAnalysis>>>,
}

impl CachedTester {
    pub fn new(g: &ConflictGraph) -> Self {
        CachedTester {
            analyses: (0..g.len()).map(|_| Mutex::new(None)).collect(),
        }
    }

    /// Same answer as [`link_passes`].
    pub fn passes(&self, g: &ConflictGraph, traffic: &TrafficSet, id: LinkId, channels: u32) -> bool {
        let Some(k) = g.index_of(id) else {
            return false;
        };
        let Some(slot) = self.analyses.get(k) else {
            return false;
        };
        let mut slot = slot.lock().unwrap_or_else(|e| e.into_inner());
        if slot.is_none() {
            match LinkAnalysis::structure(g, id) {
                Ok(a) => *slot = Some(a),
                Err(_) => return false,
            }
        }
        let analysis = slot.as_mut().expect("just filled");
        analysis.load_densities(|l| traffic.require(l).map(|t| t.density())).is_ok()
            && analysis.passes(int(channels as i128))
    }
}

/// `max_K Σ_{l∈K} X_l/T_l <= N` over the cliques through `id`.
pub fn necessary_condition(g: &ConflictGraph, id: LinkId, traffic: &TrafficSet, channels: u32) -> Result<bool> {
    let mut worst = int(0);
    for clique in g.cliques_containing(id)?.cliques {
        let u = clique
            .iter()
            .map(|&l| traffic.require(l).map(|t| t.utilization()))
            .sum::<Result<Rational>>()?;
        worst = worst.max(u);
    }
    Ok(worst <= int(channels as i128))
}

/// `(δ, δ')` for one link.
pub fn approximation_ratios(g: &ConflictGraph, id: LinkId, traffic: &TrafficSet) -> Result<(Rational, Rational)> {
    // Neither ratio depends on the channel count.
    let v = schedulability_test(g, id, traffic, 1)?;
    Ok((v.delta, v.delta_prime))
}

/// Verdicts for every link, in link-id order.
pub fn test_network(
    g: &ConflictGraph,
    traffic: &TrafficSet,
    channels: u32,
    exec: Execution,
) -> Result<Vec<SchedulabilityVerdict>> {
    traffic.covers(g)?;
    par::map(exec, g.link_ids(), |&id| schedulability_test(g, id, traffic, channels))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use crate::rational::ratio;
    use crate::traffic::LinkTraffic;

    fn set(ids: &[LinkId]) -> LinkSet {
        ids.iter().copied().collect()
    }

    fn uniform(g: &ConflictGraph, x: u32, t: u64, d: u64) -> TrafficSet {
        TrafficSet::new(
            g.link_ids()
                .iter()
                .map(|&id| LinkTraffic::with_demand(id, t, d, x, 0.5, 0).unwrap()),
        )
        .unwrap()
    }

    fn quarter(g: &ConflictGraph) -> BTreeMap<LinkId, Rational> {
        g.link_ids().iter().map(|&id| (id, ratio(1, 4))).collect()
    }

    fn triangle() -> ConflictGraph {
        ConflictGraph::new([1, 2, 3], [(1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn feasibility_on_example() {
        let g = example_graph();
        assert!(is_feasible_set(&g, 1, &set(&[1, 3, 4, 5])).unwrap());
        assert!(!is_feasible_set(&g, 1, &set(&[1, 3, 4])).unwrap());
        assert!(is_feasible_set(&g, 1, &set(&[1, 2, 3])).unwrap());
        assert!(is_feasible_set(&g, 1, &set(&[1, 2, 3, 4])).unwrap());
        assert!(!is_feasible_set(&g, 1, &set(&[1, 4, 5])).unwrap());
        for id in 1..=8 {
            let closed = g.closed_neighborhood(id).unwrap();
            assert!(is_feasible_set(&g, id, &closed).unwrap());
        }
    }

    #[test]
    fn both_feasibility_routes_agree_on_example() {
        let g = example_graph();
        for id in 1..=8 {
            let closed: Vec<LinkId> = g.closed_neighborhood(id).unwrap().into_iter().collect();
            for bits in 0u32..(1 << closed.len()) {
                let s: LinkSet = closed
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| bits & (1 << k) != 0)
                    .map(|(_, &l)| l)
                    .collect();
                if !s.contains(&id) {
                    continue;
                }
                assert_eq!(
                    is_feasible_set(&g, id, &s).unwrap(),
                    is_feasible_set_enumerated(&g, id, &s).unwrap(),
                    "link {id}, set {s:?}"
                );
            }
        }
    }

    #[test]
    fn feasibility_rejects_bad_sets() {
        let g = example_graph();
        assert!(is_feasible_set(&g, 1, &set(&[3, 4])).is_err());
        assert!(is_feasible_set(&g, 1, &set(&[1, 6])).is_err());
    }

    #[test]
    fn min_density_examples() {
        let g = example_graph();
        let d = quarter(&g);
        let r = min_density_feasible_set(&g, 1, &set(&[1, 2, 3]), &d).unwrap();
        assert_eq!(r.members, set(&[1, 2, 3]));
        assert_eq!(r.sum_density, ratio(3, 4));
        let r = min_density_feasible_set(&g, 1, &set(&[1, 3, 4]), &d).unwrap();
        assert_eq!(r.sum_density, ratio(1, 1));
        assert!(r.members == set(&[1, 2, 3, 4]) || r.members == set(&[1, 3, 4, 5]));
        assert!(min_density_feasible_set(&g, 1, &set(&[1, 3]), &d).is_err());

        let lone = ConflictGraph::new([5], []).unwrap();
        let d: BTreeMap<_, _> = [(5, ratio(4, 5))].into();
        let r = min_density_feasible_set(&lone, 5, &set(&[5]), &d).unwrap();
        assert_eq!((r.members, r.sum_density), (set(&[5]), ratio(4, 5)));
    }

    #[test]
    fn verdict_examples() {
        let lone = ConflictGraph::new([1], []).unwrap();
        let t = TrafficSet::new([LinkTraffic::with_demand(1, 10, 10, 8, 0.5, 0).unwrap()]).unwrap();
        let v = schedulability_test(&lone, 1, &t, 1).unwrap();
        assert!(v.schedulable && v.necessary_ok);
        assert_eq!((v.delta, v.delta_prime), (int(1), int(1)));

        let g = example_graph();
        let t = uniform(&g, 1, 4, 4);
        let v = schedulability_test(&g, 1, &t, 1).unwrap();
        assert!(v.schedulable);
        assert_eq!(v.max_min_density(), int(1));
        assert!(necessary_condition(&g, 1, &t, 1).unwrap());
        assert_eq!(approximation_ratios(&g, 1, &t).unwrap(), (ratio(3, 4), ratio(3, 4)));

        let tri = triangle();
        let t = uniform(&tri, 1, 2, 2);
        let v = schedulability_test(&tri, 1, &t, 1).unwrap();
        assert!(!v.schedulable);
        assert!(!v.necessary_ok);
        assert!(!necessary_condition(&tri, 1, &t, 1).unwrap());
    }

    #[test]
    fn missing_traffic_is_an_input_error() {
        let g = example_graph();
        let t = TrafficSet::new([LinkTraffic::with_demand(1, 4, 4, 1, 0.5, 0).unwrap()]).unwrap();
        assert!(matches!(schedulability_test(&g, 1, &t, 1), Err(Error::Input(_))));
        assert!(test_network(&g, &t, 1, Execution::Sequential).is_err());
    }

    #[test]
    fn network_test_is_ordered_and_mode_independent() {
        let g = example_graph();
        let t = uniform(&g, 1, 4, 4);
        let a = test_network(&g, &t, 1, Execution::Sequential).unwrap();
        let b = test_network(&g, &t, 1, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|v| v.link).collect::<Vec<_>>(), g.link_ids());
    }
}
