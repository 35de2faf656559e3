use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::substrate::{Alloc, NodeId, ResourceLedger, Topology};

use super::intent::{PlacementConstraint, ResourceRequest};
use super::types::VnfKind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot place {vnf_kind} (request #{index}): {reason}")]
pub struct InsufficientResources {
    pub vnf_kind: VnfKind,
    pub index: usize,
    pub reason: String,
}

/// Free capacity per node plus the static topology used for latency checks.
#[derive(Debug, Clone)]
pub struct SubstrateSnapshot<'a> {
    topology: &'a Topology,
    free: BTreeMap<NodeId, (u64, u64)>,
}

impl<'a> SubstrateSnapshot<'a> {
    pub fn capture(topology: &'a Topology, ledger: &ResourceLedger) -> Self {
        let free = ledger
            .iter()
            .map(|(id, u)| (id.clone(), (u.free_cpu(), u.free_storage())))
            .collect();
        SubstrateSnapshot { topology, free }
    }

    /// Every node at full capacity.
    pub fn empty(topology: &'a Topology) -> Self {
        Self::capture(topology, &ResourceLedger::new(topology))
    }

    pub fn topology(&self) -> &Topology {
        self.topology
    }

    pub fn free(&self, node: &NodeId) -> Option<(u64, u64)> {
        self.free.get(node).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.free.keys()
    }

    /// Whether `node` satisfies the constraint, ignoring capacity.
    pub fn admits(&self, node: &NodeId, constraint: &PlacementConstraint) -> Result<(), String> {
        match constraint {
            PlacementConstraint::Anywhere => Ok(()),
            PlacementConstraint::OnNode(n) if n == node => Ok(()),
            PlacementConstraint::OnNode(n) => Err(format!("pinned to {n}")),
            PlacementConstraint::PathBound {
                from,
                max_latency_us,
                min_bandwidth_bps,
            } => {
                let origin = self
                    .topology
                    .node(from)
                    .ok_or_else(|| format!("unknown region {from}"))?;
                let path = self
                    .topology
                    .path(from, node)
                    .ok_or_else(|| format!("no path from {from}"))?;
                let latency = origin.access.latency_us + path.latency_us;
                let bandwidth = origin.access.bandwidth_bps.min(path.min_bandwidth_bps);
                if latency > *max_latency_us {
                    Err(format!("path latency {latency} us from {from} exceeds {max_latency_us} us"))
                } else if bandwidth < *min_bandwidth_bps {
                    Err(format!("bandwidth {bandwidth} bps from {from} below {min_bandwidth_bps} bps"))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn take(&mut self, node: &NodeId, alloc: &Alloc) {
        if let Some((cpu, storage)) = self.free.get_mut(node) {
            *cpu -= alloc.cpu;
            *storage -= alloc.storage;
        }
    }

    fn fits(&self, node: &NodeId, alloc: &Alloc) -> bool {
        self.free
            .get(node)
            .is_some_and(|&(cpu, storage)| alloc.cpu <= cpu && alloc.storage <= storage)
    }
}

/// Node chosen for each request entry, in request order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub nodes: Vec<NodeId>,
}

/// Greedy first fit: among nodes meeting the constraint and the allocation,
/// take the one with the most free cpu, ties by node id.
pub fn place(request: &ResourceRequest, snapshot: &SubstrateSnapshot<'_>) -> Result<Placement, InsufficientResources> {
    let mut snap = snapshot.clone();
    let mut nodes = Vec::with_capacity(request.vnfs.len());
    for (index, vnf) in request.vnfs.iter().enumerate() {
        let mut reason = String::from("no nodes");
        let mut best: Option<(u64, &NodeId)> = None;
        for node in snapshot.nodes() {
            if let Err(r) = snap.admits(node, &vnf.constraint) {
                reason = r;
                continue;
            }
            if !snap.fits(node, &vnf.alloc) {
                reason = format!(
                    "needs cpu {} storage {}, no admissible node has room",
                    vnf.alloc.cpu, vnf.alloc.storage
                );
                continue;
            }
            let cpu = snap.free(node).map_or(0, |f| f.0);
            if best.is_none_or(|(b, _)| cpu > b) {
                best = Some((cpu, node));
            }
        }
        let Some((_, node)) = best else {
            return Err(InsufficientResources {
                vnf_kind: vnf.kind,
                index,
                reason,
            });
        };
        let node = node.clone();
        snap.take(&node, &vnf.alloc);
        nodes.push(node);
    }
    Ok(Placement { nodes })
}

/// Independent feasibility check of a placement against a snapshot.
pub fn validate_placement(
    request: &ResourceRequest,
    snapshot: &SubstrateSnapshot<'_>,
    placement: &Placement,
) -> Result<(), String> {
    if placement.nodes.len() != request.vnfs.len() {
        return Err(format!(
            "{} nodes for {} vnfs",
            placement.nodes.len(),
            request.vnfs.len()
        ));
    }
    let mut used: BTreeMap<&NodeId, (u64, u64)> = BTreeMap::new();
    for (vnf, node) in request.vnfs.iter().zip(&placement.nodes) {
        snapshot.admits(node, &vnf.constraint)?;
        let u = used.entry(node).or_default();
        u.0 += vnf.alloc.cpu;
        u.1 += vnf.alloc.storage;
    }
    for (node, (cpu, storage)) in used {
        let (fc, fs) = snapshot.free(node).ok_or_else(|| format!("unknown node {node}"))?;
        if cpu > fc || storage > fs {
            return Err(format!("{node} over capacity: cpu {cpu}/{fc} storage {storage}/{fs}"));
        }
    }
    Ok(())
}
