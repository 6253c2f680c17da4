//! Bron–Kerbosch maximal-clique enumeration over dense bitset adjacency.
//!
//! Vertices are local indices `0..n`; callers translate to link ids. Maximal
//! independent sets are enumerated as maximal cliques of the complement.

use fixedbitset::FixedBitSet;

/// Dense symmetric adjacency over `0..n` with no self-loops.
#[derive(Clone, Debug)]
pub struct BitGraph {
    rows: Vec<FixedBitSet>,
}

impl BitGraph {
    pub fn empty(n: usize) -> Self {
        BitGraph {
            rows: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        self.rows[a].insert(b);
        self.rows[b].insert(a);
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn row(&self, v: usize) -> &FixedBitSet {
        &self.rows[v]
    }

    /// Complement graph, restricted to vertices in `within` (others keep empty rows).
    pub fn complement_within(&self, within: &FixedBitSet) -> BitGraph {
        let n = self.len();
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        for v in within.ones() {
            let mut row = within.clone();
            row.difference_with(&self.rows[v]);
            row.set(v, false);
            rows[v] = row;
        }
        BitGraph { rows }
    }

    /// All maximal cliques of the subgraph induced by `within`.
    ///
    /// An empty `within` yields one empty clique.
    pub fn maximal_cliques(&self, within: &FixedBitSet) -> Vec<FixedBitSet> {
        let mut out = Vec::new();
        let r = FixedBitSet::with_capacity(self.len());
        let x = FixedBitSet::with_capacity(self.len());
        self.expand(r, within.clone(), x, &mut out);
        out
    }

    /// All maximal independent sets of the subgraph induced by `within`.
    pub fn maximal_independent_sets(&self, within: &FixedBitSet) -> Vec<FixedBitSet> {
        self.complement_within(within).maximal_cliques(within)
    }

    // Tomita pivoting: branch only on candidates outside the pivot's neighborhood.
    fn expand(&self, r: FixedBitSet, mut p: FixedBitSet, mut x: FixedBitSet, out: &mut Vec<FixedBitSet>) {
        if p.is_clear() {
            if x.is_clear() {
                out.push(r);
            }
            return;
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by_key(|&u| self.rows[u].intersection(&p).count())
            .expect("p is non-empty");
        let mut branch = p.clone();
        branch.difference_with(&self.rows[pivot]);
        for v in branch.ones().collect::<Vec<_>>() {
            let mut next_r = r.clone();
            next_r.insert(v);
            let mut next_p = p.clone();
            next_p.intersect_with(&self.rows[v]);
            let mut next_x = x.clone();
            next_x.intersect_with(&self.rows[v]);
            self.expand(next_r, next_p, next_x, out);
            p.set(v, false);
            x.insert(v);
        }
    }
}
