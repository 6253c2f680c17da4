//! Conflict graph over wireless links and the combinatorial queries built on it.

use std::collections::{BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::cliques::BitGraph;
use crate::error::{Error, Result};

/// Identifier of a link (a node of the conflict graph). Always positive.
pub type LinkId = u32;

pub type LinkSet = BTreeSet<LinkId>;

/// Undirected interference graph: nodes are links, edges join links that may
/// not share a channel in the same slot.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    ids: Vec<LinkId>,
    index: HashMap<LinkId, usize>,
    neighbors: Vec<Vec<usize>>,
    bits: BitGraph,
}

impl PartialEq for ConflictGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.neighbors == other.neighbors
    }
}

impl Eq for ConflictGraph {}

/// The maximal cliques through one link, restricted to its closed neighborhood.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueFamily {
    pub owner: LinkId,
    pub cliques: Vec<LinkSet>,
}

impl ConflictGraph {
    /// Builds a graph, rejecting zero or duplicate ids, self-loops, unknown
    /// endpoints, and repeated edges.
    pub fn new(
        links: impl IntoIterator<Item = LinkId>,
        conflicts: impl IntoIterator<Item = (LinkId, LinkId)>,
    ) -> Result<Self> {
        let mut ids: Vec<LinkId> = links.into_iter().collect();
        let given = ids.len();
        if ids.contains(&0) {
            return Err(Error::input("link ids must be positive"));
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != given {
            return Err(Error::input("duplicate link id"));
        }
        let index: HashMap<LinkId, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let mut bits = BitGraph::empty(ids.len());
        let mut neighbors = vec![Vec::new(); ids.len()];
        for (a, b) in conflicts {
            if a == b {
                return Err(Error::input(format!("self-loop on link {a}")));
            }
            let (&ia, &ib) = match (index.get(&a), index.get(&b)) {
                (Some(ia), Some(ib)) => (ia, ib),
                _ => return Err(Error::input(format!("conflict ({a},{b}) names an unknown link"))),
            };
            if bits.adjacent(ia, ib) {
                return Err(Error::input(format!("duplicate conflict ({a},{b})")));
            }
            bits.add_edge(ia, ib);
            neighbors[ia].push(ib);
            neighbors[ib].push(ia);
        }
        for row in &mut neighbors {
            row.sort_unstable();
        }
        Ok(ConflictGraph {
            ids,
            index,
            neighbors,
            bits,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Link ids in ascending order.
    pub fn link_ids(&self) -> &[LinkId] {
        &self.ids
    }

    pub fn contains(&self, id: LinkId) -> bool {
        self.index.contains_key(&id)
    }

    /// Dense position of `id` in [`Self::link_ids`].
    pub fn index_of(&self, id: LinkId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn id_at(&self, index: usize) -> LinkId {
        self.ids[index]
    }

    pub(crate) fn require(&self, id: LinkId) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::input(format!("unknown link id {id}")))
    }

    pub fn adjacent(&self, a: LinkId, b: LinkId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(ia), Some(ib)) => self.bits.adjacent(ia, ib),
            _ => false,
        }
    }

    /// Neighbor positions of the link at dense position `index`, ascending.
    pub fn neighbor_indices(&self, index: usize) -> &[usize] {
        &self.neighbors[index]
    }

    pub(crate) fn bit_graph(&self) -> &BitGraph {
        &self.bits
    }

    pub fn degree(&self, id: LinkId) -> Result<usize> {
        Ok(self.neighbors[self.require(id)?].len())
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Every conflict as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(LinkId, LinkId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (ia, row) in self.neighbors.iter().enumerate() {
            for &ib in row {
                if ia < ib {
                    out.push((self.ids[ia], self.ids[ib]));
                }
            }
        }
        out
    }

    /// `M_i`: links interfering with `id`.
    pub fn neighbors(&self, id: LinkId) -> Result<LinkSet> {
        let i = self.require(id)?;
        Ok(self.neighbors[i].iter().map(|&k| self.ids[k]).collect())
    }

    /// `M_i ∪ {i}`.
    pub fn closed_neighborhood(&self, id: LinkId) -> Result<LinkSet> {
        let mut set = self.neighbors(id)?;
        set.insert(id);
        Ok(set)
    }

    /// Links at hop distance exactly two from `id`.
    pub fn two_hop_set(&self, id: LinkId) -> Result<LinkSet> {
        let start = self.require(id)?;
        let mut dist = vec![usize::MAX; self.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut out = LinkSet::new();
        while let Some(v) = queue.pop_front() {
            if dist[v] == 2 {
                out.insert(self.ids[v]);
                continue;
            }
            for &w in &self.neighbors[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(out)
    }

    /// Maximal cliques of the subgraph induced by `M_i ∪ {i}` (all of which
    /// contain `i`), in lexicographic order of their sorted members.
    pub fn cliques_containing(&self, id: LinkId) -> Result<CliqueFamily> {
        let i = self.require(id)?;
        let mut within = FixedBitSet::with_capacity(self.len());
        for &k in &self.neighbors[i] {
            within.insert(k);
        }
        let mut cliques: Vec<LinkSet> = self
            .bits
            .maximal_cliques(&within)
            .into_iter()
            .map(|c| {
                let mut set: LinkSet = c.ones().map(|k| self.ids[k]).collect();
                set.insert(id);
                set
            })
            .collect();
        cliques.sort();
        Ok(CliqueFamily { owner: id, cliques })
    }

    /// All maximal independent sets of the subgraph induced by `subset`,
    /// sorted. The empty subset yields a single empty set.
    pub fn maximal_independent_sets(&self, subset: &LinkSet) -> Result<Vec<LinkSet>> {
        let within = self.mask(subset)?;
        let mut sets: Vec<LinkSet> = self
            .bits
            .maximal_independent_sets(&within)
            .into_iter()
            .map(|s| s.ones().map(|k| self.ids[k]).collect())
            .collect();
        sets.sort();
        Ok(sets)
    }

    /// True when no two members of `set` conflict.
    pub fn is_independent(&self, set: &LinkSet) -> bool {
        let members: Vec<_> = set.iter().filter_map(|&id| self.index_of(id)).collect();
        members
            .iter()
            .enumerate()
            .all(|(k, &a)| members[k + 1..].iter().all(|&b| !self.bits.adjacent(a, b)))
    }

    pub fn is_clique(&self, set: &LinkSet) -> bool {
        let members: Vec<_> = set.iter().filter_map(|&id| self.index_of(id)).collect();
        members
            .iter()
            .enumerate()
            .all(|(k, &a)| members[k + 1..].iter().all(|&b| self.bits.adjacent(a, b)))
    }

    pub(crate) fn mask(&self, subset: &LinkSet) -> Result<FixedBitSet> {
        let mut within = FixedBitSet::with_capacity(self.len());
        for &id in subset {
            within.insert(self.require(id)?);
        }
        Ok(within)
    }

    /// Connected-component count; an empty graph has none.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// The eight-link example graph used throughout the tests.
pub fn example_graph() -> ConflictGraph {
    ConflictGraph::new(
        1..=8,
        [
            (1, 2),
            (1, 3),
            (1, 4),
            (1, 5),
            (2, 3),
            (3, 4),
            (4, 5),
            (3, 8),
            (4, 7),
            (5, 6),
            (6, 7),
            (6, 8),
            (7, 8),
        ],
    )
    .expect("example graph is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[LinkId]) -> LinkSet {
        ids.iter().copied().collect()
    }

    fn complete(n: LinkId) -> ConflictGraph {
        let edges: Vec<_> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        ConflictGraph::new(1..=n, edges).unwrap()
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(ConflictGraph::new([1, 1], []), Err(Error::Input(_))));
        assert!(matches!(ConflictGraph::new([1, 2], [(1, 1)]), Err(Error::Input(_))));
        assert!(matches!(ConflictGraph::new([1, 2], [(1, 3)]), Err(Error::Input(_))));
        assert!(matches!(ConflictGraph::new([1, 2], [(1, 2), (2, 1)]), Err(Error::Input(_))));
        assert!(matches!(ConflictGraph::new([0], []), Err(Error::Input(_))));
    }

    #[test]
    fn neighbors_on_example() {
        let g = example_graph();
        assert_eq!(g.neighbors(1).unwrap(), set(&[2, 3, 4, 5]));
        assert_eq!(g.neighbors(6).unwrap(), set(&[5, 7, 8]));
        assert!(matches!(g.neighbors(9), Err(Error::Input(_))));
    }

    #[test]
    fn isolated_node() {
        let g = ConflictGraph::new([4, 7], []).unwrap();
        assert!(g.neighbors(7).unwrap().is_empty());
        assert!(g.two_hop_set(7).unwrap().is_empty());
        assert_eq!(g.cliques_containing(7).unwrap().cliques, vec![set(&[7])]);
    }

    #[test]
    fn two_hop_sets() {
        let g = example_graph();
        assert_eq!(g.two_hop_set(1).unwrap(), set(&[6, 7, 8]));
        assert_eq!(g.two_hop_set(4).unwrap(), set(&[2, 6, 8]));
        let k4 = complete(4);
        for i in 1..=4 {
            assert!(k4.two_hop_set(i).unwrap().is_empty());
        }
    }

    #[test]
    fn cliques_on_example() {
        let g = example_graph();
        assert_eq!(
            g.cliques_containing(1).unwrap().cliques,
            vec![set(&[1, 2, 3]), set(&[1, 3, 4]), set(&[1, 4, 5])]
        );
        assert_eq!(
            g.cliques_containing(6).unwrap().cliques,
            vec![set(&[5, 6]), set(&[6, 7, 8])]
        );
    }

    #[test]
    fn independent_sets_on_example() {
        let g = example_graph();
        assert_eq!(
            g.maximal_independent_sets(&set(&[2, 6, 7, 8])).unwrap(),
            vec![set(&[2, 6]), set(&[2, 7]), set(&[2, 8])]
        );
        let all = g.maximal_independent_sets(&set(&[1, 2, 3, 4, 5, 6, 7, 8])).unwrap();
        assert!(all.contains(&set(&[2, 5, 8])));
        assert!(all.contains(&set(&[1, 6])));
        assert_eq!(g.maximal_independent_sets(&LinkSet::new()).unwrap(), vec![LinkSet::new()]);
        assert!(g.maximal_independent_sets(&set(&[42])).is_err());
    }

    #[test]
    fn triangle_independent_sets_are_singletons() {
        let g = complete(3);
        assert_eq!(
            g.maximal_independent_sets(&set(&[1, 2, 3])).unwrap(),
            vec![set(&[1]), set(&[2]), set(&[3])]
        );
    }

    #[test]
    fn edges_round_trip() {
        let g = example_graph();
        let again = ConflictGraph::new(g.link_ids().to_vec(), g.edges()).unwrap();
        assert_eq!(g, again);
        assert_eq!(g.edge_count(), 13);
        assert_eq!(g.component_count(), 1);
    }
}
