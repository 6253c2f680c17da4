//! JSON and CSV persistence.
//!
//! * Graph: `{"links": [ids], "conflicts": [[a, b], ...]}` with `a < b`.
//! * Topology: `{"nodes": [...], "links": [...], "conflict_graph": <graph>}`.
//! * Traffic: `[{"link", "T", "D", "P", "p", "A1", "X"?}, ...]`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, LinkId};
use crate::topology::{LinkGeometry, Node, Topology};
use crate::traffic::{LinkTraffic, TrafficSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub links: Vec<LinkId>,
    pub conflicts: Vec<(LinkId, LinkId)>,
}

impl GraphFile {
    pub fn from_graph(g: &ConflictGraph) -> Self {
        GraphFile {
            links: g.link_ids().to_vec(),
            conflicts: g.edges(),
        }
    }

    pub fn into_graph(self) -> Result<ConflictGraph> {
        if let Some(&(a, b)) = self.conflicts.iter().find(|(a, b)| a >= b) {
            return Err(Error::input(format!("conflict [{a}, {b}] must list the smaller id first")));
        }
        ConflictGraph::new(self.links, self.conflicts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub nodes: Vec<Node>,
    pub links: Vec<LinkGeometry>,
    pub conflict_graph: GraphFile,
}

impl TopologyFile {
    pub fn from_topology(t: &Topology) -> Self {
        TopologyFile {
            nodes: t.nodes.clone(),
            links: t.links.clone(),
            conflict_graph: GraphFile::from_graph(&t.graph),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline. Creates parent directories.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Reads a conflict graph from either a topology file or a bare graph file.
pub fn load_graph(path: &Path) -> Result<ConflictGraph> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either {
        Topology { conflict_graph: GraphFile },
        Graph(GraphFile),
    }
    match read_json::<Either>(path)? {
        Either::Topology { conflict_graph } | Either::Graph(conflict_graph) => conflict_graph.into_graph(),
    }
}

pub fn save_topology(path: &Path, t: &Topology) -> Result<()> {
    write_json(path, &TopologyFile::from_topology(t))
}

/// Traffic array; missing `X` values are derived from `p` and `P`.
pub fn load_traffic(path: &Path) -> Result<TrafficSet> {
    TrafficSet::new(read_json::<Vec<LinkTraffic>>(path)?)
}

pub fn save_traffic(path: &Path, traffic: &TrafficSet) -> Result<()> {
    write_json(path, &traffic.to_vec())
}
