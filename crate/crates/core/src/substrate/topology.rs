use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::icn::Name;

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

string_id!(NodeId);
string_id!(LinkId);
string_id!(UeId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    IcnBs,
    IcnSr,
    CoreRouter,
    Cloud,
}

impl NodeRole {
    /// Base stations and service routers are points of attachment for UEs.
    pub fn is_poa(self) -> bool {
        matches!(self, NodeRole::IcnBs | NodeRole::IcnSr)
    }
}

/// Radio side of a point of attachment. Modeled as an ordinary link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessProfile {
    pub latency_us: u64,
    pub bandwidth_bps: u64,
    pub queue_capacity: usize,
}

impl Default for AccessProfile {
    fn default() -> Self {
        AccessProfile {
            latency_us: 1_000,
            bandwidth_bps: 100_000_000,
            queue_capacity: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysNode {
    pub id: NodeId,
    pub role: NodeRole,
    pub cpu_capacity: u64,
    pub storage_capacity: u64,
    pub locator_prefix: Name,
    pub access: AccessProfile,
}

impl PhysNode {
    pub fn new(id: NodeId, role: NodeRole, cpu_capacity: u64, storage_capacity: u64) -> Self {
        let locator_prefix = Name::from_components(["poa", id.as_str()]).expect("node ids are valid components");
        PhysNode {
            id,
            role,
            cpu_capacity,
            storage_capacity,
            locator_prefix,
            access: AccessProfile::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysLink {
    pub id: LinkId,
    pub endpoints: (NodeId, NodeId),
    pub latency_us: u64,
    pub bandwidth_bps: u64,
    pub queue_capacity: usize,
}

/// One traversal of a physical link. `forward` means endpoints.0 → endpoints.1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hop {
    pub link: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub hops: Vec<Hop>,
    pub latency_us: u64,
    /// Bottleneck bandwidth; `u64::MAX` for the empty path.
    pub min_bandwidth_bps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate link {0}")]
    DuplicateLink(LinkId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("link {0}: {1}")]
    InvalidLink(LinkId, &'static str),
    #[error("node {0}: {1}")]
    InvalidNode(NodeId, &'static str),
}

/// Static physical graph with precomputed latency-shortest paths.
#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<PhysNode>,
    index: BTreeMap<NodeId, usize>,
    links: Vec<PhysLink>,
    // paths[src][dst]
    paths: Vec<Vec<Option<Path>>>,
}

impl Topology {
    pub fn new(nodes: Vec<PhysNode>, links: Vec<PhysLink>) -> Result<Self, TopologyError> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(TopologyError::DuplicateNode(n.id.clone()));
            }
            if n.access.latency_us == 0 || n.access.bandwidth_bps == 0 || n.access.queue_capacity == 0 {
                return Err(TopologyError::InvalidNode(n.id.clone(), "access latency, bandwidth and queue must be positive"));
            }
        }
        let mut seen = BTreeMap::new();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
        let mut ends = Vec::with_capacity(links.len());
        for (li, l) in links.iter().enumerate() {
            if seen.insert(l.id.clone(), li).is_some() {
                return Err(TopologyError::DuplicateLink(l.id.clone()));
            }
            let a = *index
                .get(&l.endpoints.0)
                .ok_or_else(|| TopologyError::UnknownNode(l.endpoints.0.clone()))?;
            let b = *index
                .get(&l.endpoints.1)
                .ok_or_else(|| TopologyError::UnknownNode(l.endpoints.1.clone()))?;
            if a == b {
                return Err(TopologyError::InvalidLink(l.id.clone(), "self loop"));
            }
            if l.latency_us == 0 {
                return Err(TopologyError::InvalidLink(l.id.clone(), "latency must be positive"));
            }
            if l.bandwidth_bps == 0 {
                return Err(TopologyError::InvalidLink(l.id.clone(), "bandwidth must be positive"));
            }
            if l.queue_capacity == 0 {
                return Err(TopologyError::InvalidLink(l.id.clone(), "queue capacity must be positive"));
            }
            ends.push((a, b));
            adj[a].push((b, li));
            adj[b].push((a, li));
        }
        let paths = (0..nodes.len()).map(|s| shortest_paths(s, &adj, &ends, &links)).collect();
        Ok(Topology {
            nodes,
            index,
            links,
            paths,
        })
    }

    pub fn nodes(&self) -> &[PhysNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[PhysLink] {
        &self.links
    }

    pub fn node(&self, id: &NodeId) -> Option<&PhysNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn link(&self, index: usize) -> &PhysLink {
        &self.links[index]
    }

    /// Points of attachment in node-id order.
    pub fn poas(&self) -> Vec<&PhysNode> {
        let mut v: Vec<&PhysNode> = self.nodes.iter().filter(|n| n.role.is_poa()).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn node_by_locator(&self, locator: &Name) -> Option<&PhysNode> {
        self.nodes.iter().find(|n| &n.locator_prefix == locator)
    }

    /// Latency-shortest path; ties go to fewer hops. `None` if disconnected.
    pub fn path(&self, from: &NodeId, to: &NodeId) -> Option<&Path> {
        let s = *self.index.get(from)?;
        let d = *self.index.get(to)?;
        self.paths[s][d].as_ref()
    }

    pub fn latency(&self, from: &NodeId, to: &NodeId) -> Option<u64> {
        self.path(from, to).map(|p| p.latency_us)
    }

    /// Node a hop leaves from.
    pub fn hop_source(&self, hop: Hop) -> &NodeId {
        let l = &self.links[hop.link];
        if hop.forward {
            &l.endpoints.0
        } else {
            &l.endpoints.1
        }
    }

    /// Node a hop arrives at.
    pub fn hop_target(&self, hop: Hop) -> &NodeId {
        let l = &self.links[hop.link];
        if hop.forward {
            &l.endpoints.1
        } else {
            &l.endpoints.0
        }
    }
}

fn shortest_paths(src: usize, adj: &[Vec<(usize, usize)>], ends: &[(usize, usize)], links: &[PhysLink]) -> Vec<Option<Path>> {
    let n = adj.len();
    let mut best: Vec<Option<(u64, u32)>> = vec![None; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    best[src] = Some((0, 0));
    heap.push(Reverse((0u64, 0u32, src)));
    while let Some(Reverse((lat, hops, u))) = heap.pop() {
        if best[u] != Some((lat, hops)) {
            continue;
        }
        for &(v, li) in &adj[u] {
            let cand = (lat + links[li].latency_us, hops + 1);
            if best[v].is_none_or(|b| cand < b) {
                best[v] = Some(cand);
                pred[v] = Some((u, li));
                heap.push(Reverse((cand.0, cand.1, v)));
            }
        }
    }
    (0..n)
        .map(|dst| {
            let (latency_us, _) = best[dst]?;
            let mut hops = Vec::new();
            let mut cur = dst;
            let mut min_bw = u64::MAX;
            while let Some((prev, li)) = pred[cur] {
                hops.push(Hop {
                    link: li,
                    forward: ends[li].0 == prev,
                });
                min_bw = min_bw.min(links[li].bandwidth_bps);
                cur = prev;
            }
            hops.reverse();
            Some(Path {
                hops,
                latency_us,
                min_bandwidth_bps: min_bw,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, role: NodeRole) -> PhysNode {
        PhysNode::new(NodeId::from(id), role, 4, 1000)
    }

    fn link(id: &str, a: &str, b: &str, latency_us: u64) -> PhysLink {
        PhysLink {
            id: LinkId::from(id),
            endpoints: (NodeId::from(a), NodeId::from(b)),
            latency_us,
            bandwidth_bps: 1_000_000,
            queue_capacity: 8,
        }
    }

    #[test]
    fn shortest_path_prefers_latency_then_hops() {
        let t = Topology::new(
            vec![node("A", NodeRole::IcnBs), node("B", NodeRole::IcnBs), node("R", NodeRole::CoreRouter)],
            vec![link("ar", "A", "R", 1), link("rb", "R", "B", 1), link("ab", "B", "A", 5)],
        )
        .unwrap();
        let p = t.path(&"A".into(), &"B".into()).unwrap();
        assert_eq!(p.latency_us, 2);
        assert_eq!(p.hops.len(), 2);
        assert_eq!(t.hop_source(p.hops[0]), &NodeId::from("A"));
        assert_eq!(t.hop_target(p.hops[1]), &NodeId::from("B"));

        let back = t.path(&"B".into(), &"A".into()).unwrap();
        assert!(!back.hops[0].forward);
        assert_eq!(t.hop_target(back.hops[1]), &NodeId::from("A"));
        assert!(t.path(&"A".into(), &"A".into()).unwrap().hops.is_empty());
        assert_eq!(t.poas().len(), 2);
        assert_eq!(t.node_by_locator(&Name::parse("/poa/B").unwrap()).unwrap().id, NodeId::from("B"));
    }

    #[test]
    fn validation() {
        let a = node("A", NodeRole::IcnBs);
        assert_eq!(
            Topology::new(vec![a.clone(), a.clone()], vec![]).unwrap_err(),
            TopologyError::DuplicateNode("A".into())
        );
        assert!(matches!(
            Topology::new(vec![a.clone()], vec![link("l", "A", "Z", 1)]),
            Err(TopologyError::UnknownNode(_))
        ));
        assert!(matches!(
            Topology::new(vec![a.clone(), node("B", NodeRole::Cloud)], vec![link("l", "A", "B", 0)]),
            Err(TopologyError::InvalidLink(..))
        ));
    }

    #[test]
    fn disconnected_nodes_have_no_path() {
        let t = Topology::new(vec![node("A", NodeRole::IcnBs), node("B", NodeRole::IcnBs)], vec![]).unwrap();
        assert!(t.path(&"A".into(), &"B".into()).is_none());
    }
}
