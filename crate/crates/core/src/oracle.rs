//! Exhaustive reference routines. They work on the whole conflict graph and
//! exist to cross-check the local, search-based machinery on small inputs.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId, LinkSet};
use crate::rational::{int, Rational};
use crate::schedulability::FeasibleSetResult;

/// Default node cap for the exhaustive routines.
pub const DEFAULT_ORACLE_CAP: usize = 14;

fn check_cap(g: &ConflictGraph, cap: usize) -> Result<()> {
    if g.len() > cap {
        return Err(Error::Capacity(format!(
            "graph has {} links, exhaustive oracle is capped at {cap}",
            g.len()
        )));
    }
    Ok(())
}

fn whole_graph_mis(g: &ConflictGraph) -> Vec<FixedBitSet> {
    let mut all = FixedBitSet::with_capacity(g.len());
    all.insert_range(..);
    g.bit_graph().maximal_independent_sets(&all)
}

fn min_intersection(mis: &[FixedBitSet], s: &FixedBitSet) -> usize {
    mis.iter()
        .map(|m| m.intersection(s).count())
        .min()
        .unwrap_or(0)
}

/// `N · min_{mis} |mis ∩ S|` over every maximal independent set of `g`.
pub fn min_scheduling_rate(g: &ConflictGraph, s: &LinkSet, channels: u32, cap: usize) -> Result<u32> {
    check_cap(g, cap)?;
    let mask = g.mask(s)?;
    Ok(channels * min_intersection(&whole_graph_mis(g), &mask) as u32)
}

/// Feasibility straight from the definition: the minimum scheduling rate of
/// `s` equals `N` (for `i ∈ s ⊆ M_i ∪ {i}` the minimum is 0 or 1).
pub fn is_feasible_by_definition(g: &ConflictGraph, id: LinkId, s: &LinkSet, cap: usize) -> Result<bool> {
    let closed = g.closed_neighborhood(id)?;
    if !s.contains(&id) || !s.is_subset(&closed) {
        return Err(Error::input("set must contain the link and lie in its closed neighborhood"));
    }
    Ok(min_scheduling_rate(g, s, 1, cap)? == 1)
}

/// Exact minimum-density feasible set with `k ⊆ S ⊆ M_i ∪ {i}`, by trying
/// every such `S` against the whole-graph independent sets.
///
/// Ties go to fewer members, then the smaller member-id vector.
pub fn feasible_set_bruteforce(
    g: &ConflictGraph,
    id: LinkId,
    k: &LinkSet,
    densities: &BTreeMap<LinkId, Rational>,
    cap: usize,
) -> Result<FeasibleSetResult> {
    check_cap(g, cap)?;
    let closed = g.closed_neighborhood(id)?;
    if !k.contains(&id) || !k.is_subset(&closed) || !g.is_clique(k) {
        return Err(Error::input(format!("{k:?} is not a clique through link {id}")));
    }
    let mis = whole_graph_mis(g);
    let optional: Vec<LinkId> = closed.difference(k).copied().collect();
    let mut best: Option<(Rational, LinkSet)> = None;
    for bits in 0u64..(1u64 << optional.len()) {
        let mut s = k.clone();
        s.extend(
            optional
                .iter()
                .enumerate()
                .filter(|(b, _)| bits & (1 << b) != 0)
                .map(|(_, &l)| l),
        );
        if min_intersection(&mis, &g.mask(&s)?) == 0 {
            continue;
        }
        let sum = s
            .iter()
            .map(|l| {
                densities
                    .get(l)
                    .copied()
                    .ok_or_else(|| Error::input(format!("no density for link {l}")))
            })
            .sum::<Result<Rational>>()?;
        let better = match &best {
            None => true,
            Some((bs, bm)) => (sum, s.len(), &s) < (*bs, bm.len(), bm),
        };
        if better {
            best = Some((sum, s));
        }
    }
    let (sum_density, members) = best.expect("the closed neighborhood is always feasible");
    Ok(FeasibleSetResult {
        owner: id,
        members,
        sum_density,
    })
}

/// Exhaustive list of every feasible `S` with `k ⊆ S ⊆ M_i ∪ {i}`.
pub fn all_feasible_supersets(g: &ConflictGraph, id: LinkId, k: &LinkSet, cap: usize) -> Result<Vec<LinkSet>> {
    let unit: BTreeMap<LinkId, Rational> = g.link_ids().iter().map(|&l| (l, int(1))).collect();
    // Validates the arguments the same way.
    feasible_set_bruteforce(g, id, k, &unit, cap)?;
    let mis = whole_graph_mis(g);
    let closed = g.closed_neighborhood(id)?;
    let optional: Vec<LinkId> = closed.difference(k).copied().collect();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << optional.len()) {
        let mut s = k.clone();
        s.extend(
            optional
                .iter()
                .enumerate()
                .filter(|(b, _)| bits & (1 << b) != 0)
                .map(|(_, &l)| l),
        );
        if min_intersection(&mis, &g.mask(&s)?) > 0 {
            out.push(s);
        }
    }
    out.sort();
    Ok(out)
}

/// Every maximal independent set of an induced subgraph, by checking all
/// `2^n` subsets. Independent of the Bron–Kerbosch enumeration.
pub fn naive_maximal_independent_sets(g: &ConflictGraph, subset: &LinkSet, cap: usize) -> Result<Vec<LinkSet>> {
    if subset.len() > cap {
        return Err(Error::Capacity(format!("{} nodes exceed cap {cap}", subset.len())));
    }
    let nodes: Vec<LinkId> = subset.iter().copied().collect();
    let n = nodes.len();
    let mut out = Vec::new();
    for bits in 0u64..(1u64 << n) {
        let chosen: Vec<LinkId> = (0..n).filter(|b| bits & (1 << b) != 0).map(|b| nodes[b]).collect();
        let independent = chosen
            .iter()
            .enumerate()
            .all(|(a, &x)| chosen[a + 1..].iter().all(|&y| !g.adjacent(x, y)));
        if !independent {
            continue;
        }
        let maximal = (0..n)
            .filter(|b| bits & (1 << b) == 0)
            .all(|b| chosen.iter().any(|&c| g.adjacent(c, nodes[b])));
        if maximal {
            out.push(chosen.into_iter().collect());
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use crate::rational::ratio;

    fn set(ids: &[LinkId]) -> LinkSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn scheduling_rate_examples() {
        let g = example_graph();
        assert_eq!(min_scheduling_rate(&g, &set(&[1, 3, 4]), 2, 14).unwrap(), 0);
        assert_eq!(min_scheduling_rate(&g, &set(&[1, 2, 3, 4, 5, 6, 7, 8]), 1, 14).unwrap(), 2);
        let lone = ConflictGraph::new([9], []).unwrap();
        assert_eq!(min_scheduling_rate(&lone, &set(&[9]), 5, 14).unwrap(), 5);
        assert!(matches!(
            min_scheduling_rate(&g, &set(&[1]), 1, 4),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn bruteforce_examples() {
        let g = example_graph();
        let d: BTreeMap<_, _> = (1..=8).map(|l| (l, ratio(1, 4))).collect();
        let r = feasible_set_bruteforce(&g, 1, &set(&[1, 3, 4]), &d, 14).unwrap();
        assert_eq!(r.sum_density, ratio(1, 1));
        assert_eq!(r.members, set(&[1, 2, 3, 4]));
        let r = feasible_set_bruteforce(&g, 1, &set(&[1, 2, 3]), &d, 14).unwrap();
        assert_eq!(r.sum_density, ratio(3, 4));
        let closed = g.closed_neighborhood(6).unwrap();
        let tri = ConflictGraph::new([1, 2, 3], [(1, 2), (1, 3), (2, 3)]).unwrap();
        let dd: BTreeMap<_, _> = (1..=3).map(|l| (l, ratio(1, 2))).collect();
        let r = feasible_set_bruteforce(&tri, 1, &set(&[1, 2, 3]), &dd, 14).unwrap();
        assert_eq!(r.members, set(&[1, 2, 3]));
        assert!(feasible_set_bruteforce(&g, 6, &closed, &d, 14).is_err());
    }

    #[test]
    fn feasible_family_for_middle_clique() {
        let g = example_graph();
        assert_eq!(
            all_feasible_supersets(&g, 1, &set(&[1, 3, 4]), 14).unwrap(),
            vec![set(&[1, 2, 3, 4]), set(&[1, 2, 3, 4, 5]), set(&[1, 3, 4, 5])]
        );
    }

    #[test]
    fn naive_matches_known_sets() {
        let g = example_graph();
        assert_eq!(
            naive_maximal_independent_sets(&g, &set(&[2, 6, 7, 8]), 14).unwrap(),
            vec![set(&[2, 6]), set(&[2, 7]), set(&[2, 8])]
        );
    }
}
