//! Pose graph over communicating agents and its JSON interchange format.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se2::Pose;

pub type NodeId = usize;
/// Directed edge `(from, to)`, i.e. `j -> i` is `(j, i)`.
pub type EdgeKey = (NodeId, NodeId);
pub type PoseMap = BTreeMap<NodeId, Pose>;

pub const DEFAULT_MAX_NODES: usize = 7;

/// Smallest overlap used as a prior mean.
pub const OVERLAP_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Weak,
    Strong,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    /// Ground truth, held out from synchronization.
    pub true_pose: Option<Pose>,
    pub noisy_pose: Pose,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    /// Predicted pose of `from` in the frame of `to`.
    pub predicted: Pose,
    /// Overlap fraction, floored at [`OVERLAP_FLOOR`].
    pub overlap: f64,
    pub weight: f64,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        (self.from, self.to)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: BTreeMap<NodeId, usize>,
    edge_index: BTreeMap<EdgeKey, usize>,
    max_nodes: usize,
}

impl PoseGraph {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        Self::with_max_nodes(nodes, DEFAULT_MAX_NODES)
    }

    pub fn with_max_nodes(nodes: Vec<Node>, max_nodes: usize) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() > max_nodes {
            return Err(Error::InvalidGraph(format!(
                "node count {} outside 2..={max_nodes}",
                nodes.len()
            )));
        }
        let mut node_index = BTreeMap::new();
        for (k, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id, k).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id {}", n.id)));
            }
        }
        Ok(PoseGraph {
            nodes,
            edges: Vec::new(),
            node_index,
            edge_index: BTreeMap::new(),
            max_nodes,
        })
    }

    /// Adds the directed edge `from -> to` with unit weight.
    pub fn add_edge(&mut self, from: NodeId, to: NodeId, predicted: Pose, overlap: f64) -> Result<()> {
        if from == to {
            return Err(Error::InvalidGraph(format!("self loop on node {from}")));
        }
        for id in [from, to] {
            if !self.node_index.contains_key(&id) {
                return Err(Error::UnknownNode(id));
            }
        }
        if !(0.0..=1.0).contains(&overlap) {
            return Err(Error::InvalidGraph(format!(
                "overlap {overlap} on edge {from}->{to} outside [0, 1]"
            )));
        }
        if self.edge_index.contains_key(&(from, to)) {
            return Err(Error::InvalidGraph(format!("duplicate edge {from}->{to}")));
        }
        self.edge_index.insert((from, to), self.edges.len());
        self.edges.push(Edge {
            from,
            to,
            predicted,
            overlap: overlap.max(OVERLAP_FLOOR),
            weight: 1.0,
        });
        Ok(())
    }

    /// Checks that every edge has its reverse.
    pub fn validate(&self) -> Result<()> {
        for e in &self.edges {
            if !self.edge_index.contains_key(&(e.to, e.from)) {
                return Err(Error::InvalidGraph(format!(
                    "edge {}->{} has no reverse edge",
                    e.from, e.to
                )));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub(crate) fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.node_index
            .get(&id)
            .map(|&k| &self.nodes[k])
            .ok_or(Error::UnknownNode(id))
    }

    pub fn edge(&self, from: NodeId, to: NodeId) -> Option<&Edge> {
        self.edge_index.get(&(from, to)).map(|&k| &self.edges[k])
    }

    /// Sorted neighbor ids of `id` (nodes with an edge into `id`).
    pub fn neighbors(&self, id: NodeId) -> Vec<NodeId> {
        self.edge_index
            .keys()
            .filter(|(_, to)| *to == id)
            .map(|(from, _)| *from)
            .collect()
    }

    pub fn noisy_poses(&self) -> PoseMap {
        self.nodes.iter().map(|n| (n.id, n.noisy_pose)).collect()
    }

    pub fn true_poses(&self) -> Option<PoseMap> {
        self.nodes
            .iter()
            .map(|n| n.true_pose.map(|p| (n.id, p)))
            .collect()
    }

    /// Connected components over the undirected edge set, each sorted.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> =
            self.nodes.iter().map(|n| (n.id, BTreeSet::new())).collect();
        for e in &self.edges {
            adj.get_mut(&e.from).unwrap().insert(e.to);
            adj.get_mut(&e.to).unwrap().insert(e.from);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[&u] {
                    if seen.insert(v) {
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn ensure_connected(&self) -> Result<()> {
        let comps = self.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected(comps));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        doc.into_graph()
    }
}

/// `[x, y, theta_deg]`.
type PoseTriple = [f64; 3];

fn to_triple(p: &Pose) -> PoseTriple {
    [p.x, p.y, p.theta.to_degrees()]
}

fn from_triple(t: &PoseTriple) -> Pose {
    Pose::from_degrees(t[0], t[1], t[2])
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: NodeId,
    #[serde(rename = "true", default, skip_serializing_if = "Option::is_none")]
    true_pose: Option<PoseTriple>,
    noisy: PoseTriple,
    #[serde(default)]
    provenance: Provenance,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeDoc {
    from: NodeId,
    to: NodeId,
    predicted: PoseTriple,
    overlap: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
}

impl From<&PoseGraph> for GraphDoc {
    fn from(g: &PoseGraph) -> Self {
        GraphDoc {
            nodes: g
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id,
                    true_pose: n.true_pose.as_ref().map(to_triple),
                    noisy: to_triple(&n.noisy_pose),
                    provenance: n.provenance,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: e.from,
                    to: e.to,
                    predicted: to_triple(&e.predicted),
                    overlap: e.overlap,
                })
                .collect(),
        }
    }
}

impl GraphDoc {
    fn into_graph(self) -> Result<PoseGraph> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id,
                true_pose: n.true_pose.as_ref().map(from_triple),
                noisy_pose: from_triple(&n.noisy),
                provenance: n.provenance,
            })
            .collect();
        let mut g = PoseGraph::new(nodes)?;
        for e in &self.edges {
            g.add_edge(e.from, e.to, from_triple(&e.predicted), e.overlap)?;
        }
        g.validate()?;
        Ok(g)
    }
}
