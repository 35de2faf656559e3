use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::topology::{NodeId, Topology};

/// Resources held by one VNF. For forwarders `storage` includes the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alloc {
    pub cpu: u64,
    pub storage: u64,
    pub cs_capacity: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeUsage {
    pub cpu_capacity: u64,
    pub storage_capacity: u64,
    pub cpu_used: u64,
    pub storage_used: u64,
}

impl NodeUsage {
    pub fn free_cpu(&self) -> u64 {
        self.cpu_capacity.saturating_sub(self.cpu_used)
    }

    pub fn free_storage(&self) -> u64 {
        self.storage_capacity.saturating_sub(self.storage_used)
    }

    pub fn fits(&self, alloc: &Alloc) -> bool {
        alloc.cpu <= self.free_cpu() && alloc.storage <= self.free_storage()
    }

    pub fn within_capacity(&self) -> bool {
        self.cpu_used <= self.cpu_capacity && self.storage_used <= self.storage_capacity
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {node} cannot fit cpu {} storage {}", alloc.cpu, alloc.storage)]
    Exceeded { node: NodeId, alloc: Alloc },
}

/// Per-node accounting of VNF allocations. Admission never overcommits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceLedger {
    nodes: BTreeMap<NodeId, NodeUsage>,
}

impl ResourceLedger {
    pub fn new(topology: &Topology) -> Self {
        let nodes = topology
            .nodes()
            .iter()
            .map(|n| {
                (
                    n.id.clone(),
                    NodeUsage {
                        cpu_capacity: n.cpu_capacity,
                        storage_capacity: n.storage_capacity,
                        cpu_used: 0,
                        storage_used: 0,
                    },
                )
            })
            .collect();
        ResourceLedger { nodes }
    }

    pub fn usage(&self, node: &NodeId) -> Option<&NodeUsage> {
        self.nodes.get(node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &NodeUsage)> {
        self.nodes.iter()
    }

    pub fn allocate(&mut self, node: &NodeId, alloc: &Alloc) -> Result<(), ResourceError> {
        let usage = self
            .nodes
            .get_mut(node)
            .ok_or_else(|| ResourceError::UnknownNode(node.clone()))?;
        if !usage.fits(alloc) {
            return Err(ResourceError::Exceeded {
                node: node.clone(),
                alloc: *alloc,
            });
        }
        usage.cpu_used += alloc.cpu;
        usage.storage_used += alloc.storage;
        Ok(())
    }

    pub fn release(&mut self, node: &NodeId, alloc: &Alloc) {
        if let Some(usage) = self.nodes.get_mut(node) {
            usage.cpu_used = usage.cpu_used.saturating_sub(alloc.cpu);
            usage.storage_used = usage.storage_used.saturating_sub(alloc.storage);
        }
    }

    /// First node whose allocations exceed capacity, if any.
    pub fn violation(&self) -> Option<&NodeId> {
        self.nodes
            .iter()
            .find(|(_, u)| !u.within_capacity())
            .map(|(id, _)| id)
    }
}
