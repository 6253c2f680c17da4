//! Random multi-cell deployments: base stations on a cell grid, uniformly
//! scattered user equipment, cellular and D2D links, and the conflict graph
//! induced by per-link exclusion discs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Bs,
    Ue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkClass {
    Uplink,
    Downlink,
    D2d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: u32,
    pub kind: NodeKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub id: LinkId,
    pub class: LinkClass,
    pub tx: u32,
    pub rx: u32,
    pub length: f64,
    /// Exclusion radius over link length.
    pub exclusion_ratio: f64,
}

impl LinkGeometry {
    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_ratio * self.length
    }
}

/// Closed length range in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeploymentParams {
    pub width: f64,
    pub height: f64,
    pub rows: u32,
    pub cols: u32,
    /// Base stations plus user equipment.
    pub nodes: u32,
    /// Links to draw; the generator retries until it can place them all.
    pub links: u32,
    pub uplink_length: Range,
    pub downlink_length: Range,
    pub d2d_length: Range,
    pub exclusion_ratio: Range,
    /// Relative weights of uplink, downlink and D2D when drawing a link.
    pub class_weights: [f64; 3],
    /// Cellular links only join a UE to its nearest BS; otherwise to any BS
    /// at a suitable distance.
    pub nearest_bs_only: bool,
    pub max_retries: u32,
}

impl Default for DeploymentParams {
    fn default() -> Self {
        DeploymentParams::network1()
    }
}

impl DeploymentParams {
    /// 91 nodes on 1200 x 1200 m, 3 x 3 cells, 83 links.
    pub fn network1() -> Self {
        DeploymentParams {
            width: 1200.0,
            height: 1200.0,
            rows: 3,
            cols: 3,
            nodes: 91,
            links: 83,
            uplink_length: Range::new(50.0, 100.0),
            downlink_length: Range::new(100.0, 200.0),
            d2d_length: Range::new(50.0, 100.0),
            exclusion_ratio: Range::new(1.5, 2.0),
            class_weights: [1.0, 2.0, 1.0],
            nearest_bs_only: true,
            max_retries: 64,
        }
    }

    /// 151 nodes on 1200 x 1500 m, 3 x 4 cells, 163 links.
    pub fn network2() -> Self {
        DeploymentParams {
            width: 1200.0,
            height: 1500.0,
            rows: 4,
            cols: 3,
            nodes: 151,
            links: 163,
            ..DeploymentParams::network1()
        }
    }

    pub fn cells(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::input("region dimensions must be positive"));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::input("the cell grid needs at least one row and column"));
        }
        if self.nodes <= self.cells() {
            return Err(Error::input(format!(
                "{} nodes leave no user equipment beside {} base stations",
                self.nodes,
                self.cells()
            )));
        }
        for (name, r) in [
            ("uplink", self.uplink_length),
            ("downlink", self.downlink_length),
            ("d2d", self.d2d_length),
        ] {
            if !(r.min > 0.0 && r.min <= r.max) {
                return Err(Error::input(format!("{name} length range {r:?} is empty or non-positive")));
            }
        }
        let r = self.exclusion_ratio;
        if !(r.min >= 1.0 && r.min <= r.max) {
            return Err(Error::input(format!("exclusion ratio range {r:?} must satisfy 1 <= lo <= hi")));
        }
        if self.class_weights.iter().any(|w| w.is_nan() || *w < 0.0) || self.class_weights.iter().all(|w| *w == 0.0) {
            return Err(Error::input("class weights must be non-negative and not all zero"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub links: Vec<LinkGeometry>,
    pub graph: ConflictGraph,
}

impl Topology {
    /// Builds the conflict graph for given nodes and links: two links
    /// conflict when they share a node or either transmitter lies inside
    /// the other's exclusion disc.
    pub fn from_parts(nodes: Vec<Node>, links: Vec<LinkGeometry>) -> Result<Self> {
        let pos = |id: u32| {
            nodes
                .iter()
                .find(|n| n.id == id)
                .map(|n| (n.x, n.y))
                .ok_or_else(|| Error::input(format!("link endpoint {id} is not a node")))
        };
        let mut ends = Vec::with_capacity(links.len());
        for l in &links {
            ends.push((pos(l.tx)?, pos(l.rx)?));
        }
        let inside = |a: usize, b: usize| {
            // Transmitter of b inside the exclusion disc of a.
            let (_, rx) = ends[a];
            let (tx, _) = ends[b];
            dist(rx, tx) <= links[a].exclusion_radius()
        };
        let mut conflicts = Vec::new();
        for a in 0..links.len() {
            for b in a + 1..links.len() {
                let (la, lb) = (&links[a], &links[b]);
                let shared = la.tx == lb.tx || la.tx == lb.rx || la.rx == lb.tx || la.rx == lb.rx;
                if shared || inside(a, b) || inside(b, a) {
                    conflicts.push((la.id, lb.id));
                }
            }
        }
        let graph = ConflictGraph::new(links.iter().map(|l| l.id), conflicts)?;
        Ok(Topology { nodes, links, graph })
    }

    pub fn mean_degree(&self) -> f64 {
        if self.graph.is_empty() {
            0.0
        } else {
            2.0 * self.graph.edge_count() as f64 / self.graph.len() as f64
        }
    }

    pub fn max_degree(&self) -> usize {
        self.graph
            .link_ids()
            .iter()
            .map(|&l| self.graph.degree(l).expect("own link"))
            .max()
            .unwrap_or(0)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Draws a deployment. Base stations get ids `1..=cells` (one uniformly
/// inside each cell, row-major), user equipment the ids after them. Links
/// are numbered from 1 in drawing order.
///
/// Uplinks and downlinks join a UE to a BS (its nearest one by default); D2D links join two
/// UEs. A placement that cannot supply `params.links` distinct links in the
/// required length ranges is redrawn, up to `max_retries` times.
pub fn generate_topology<R: Rng>(params: &DeploymentParams, rng: &mut R) -> Result<Topology> {
    params.validate()?;
    let mut best = 0usize;
    for _ in 0..=params.max_retries {
        let nodes = place_nodes(params, rng);
        let mut pools = candidates(params, &nodes);
        let available: usize = pools.iter().map(|p| p.len()).sum();
        best = best.max(available);
        if available < params.links as usize {
            continue;
        }
        for p in &mut pools {
            p.shuffle(rng);
        }
        let mut used = vec![false; nodes.len() * nodes.len()];
        let mut links = Vec::with_capacity(params.links as usize);
        while links.len() < params.links as usize {
            let weights: Vec<f64> = (0..3)
                .map(|c| if pools[c].is_empty() { 0.0 } else { params.class_weights[c] })
                .collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut pick = rng.gen::<f64>() * total;
            let class = (0..3)
                .find(|&c| {
                    pick -= weights[c];
                    pick < 0.0 && weights[c] > 0.0
                })
                .unwrap_or_else(|| (0..3).rev().find(|&c| weights[c] > 0.0).expect("positive total"));
            let (tx, rx, length) = pools[class].pop().expect("non-empty pool");
            let key = |a: u32, b: u32| (a.min(b) as usize - 1) * nodes.len() + (a.max(b) as usize - 1);
            if used[key(tx, rx)] {
                continue;
            }
            used[key(tx, rx)] = true;
            links.push(LinkGeometry {
                id: links.len() as LinkId + 1,
                class: [LinkClass::Uplink, LinkClass::Downlink, LinkClass::D2d][class],
                tx,
                rx,
                length,
                exclusion_ratio: rng.gen_range(params.exclusion_ratio.min..=params.exclusion_ratio.max),
            });
        }
        if links.len() == params.links as usize {
            return Topology::from_parts(nodes, links);
        }
    }
    Err(Error::Generation(format!(
        "no placement supplied {} links in {} attempts (best had {best} candidates); \
         widen the length ranges or add nodes",
        params.links,
        params.max_retries + 1
    )))
}

fn place_nodes<R: Rng>(params: &DeploymentParams, rng: &mut R) -> Vec<Node> {
    let cw = params.width / params.cols as f64;
    let ch = params.height / params.rows as f64;
    let mut nodes = Vec::with_capacity(params.nodes as usize);
    for r in 0..params.rows {
        for c in 0..params.cols {
            nodes.push(Node {
                id: nodes.len() as u32 + 1,
                kind: NodeKind::Bs,
                x: rng.gen_range(c as f64 * cw..(c + 1) as f64 * cw),
                y: rng.gen_range(r as f64 * ch..(r + 1) as f64 * ch),
            });
        }
    }
    while nodes.len() < params.nodes as usize {
        nodes.push(Node {
            id: nodes.len() as u32 + 1,
            kind: NodeKind::Ue,
            x: rng.gen_range(0.0..params.width),
            y: rng.gen_range(0.0..params.height),
        });
    }
    nodes
}

/// Candidate `(tx, rx, length)` triples per class, in id order.
fn candidates(params: &DeploymentParams, nodes: &[Node]) -> [Vec<(u32, u32, f64)>; 3] {
    let bs: Vec<&Node> = nodes.iter().filter(|n| n.kind == NodeKind::Bs).collect();
    let ue: Vec<&Node> = nodes.iter().filter(|n| n.kind == NodeKind::Ue).collect();
    let at = |n: &Node| (n.x, n.y);
    let mut up = Vec::new();
    let mut down = Vec::new();
    let mut d2d = Vec::new();
    for u in &ue {
        let mut reach: Vec<(u32, f64)> = bs.iter().map(|b| (b.id, dist(at(u), at(b)))).collect();
        if params.nearest_bs_only {
            let nearest = *reach
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one cell");
            reach = vec![nearest];
        }
        for (b, d) in reach {
            if params.uplink_length.contains(d) {
                up.push((u.id, b, d));
            }
            if params.downlink_length.contains(d) {
                down.push((b, u.id, d));
            }
        }
    }
    for (a, u) in ue.iter().enumerate() {
        for v in &ue[a + 1..] {
            let d = dist(at(u), at(v));
            if params.d2d_length.contains(d) {
                d2d.push((u.id, v.id, d));
            }
        }
    }
    [up, down, d2d]
}
