//! Physical substrate: topology, node resources, link queues, the event
//! queue and user-equipment attachment state.

mod event;
mod link;
mod resources;
mod topology;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::icn::Name;

pub use event::{EventQueue, PastEvent};
pub use link::{serialization_delay_us, Delivery, LinkQueue};
pub use resources::{Alloc, NodeUsage, ResourceError, ResourceLedger};
pub use topology::{
    AccessProfile, Hop, LinkId, NodeId, NodeRole, Path, PhysLink, PhysNode, Topology, TopologyError, UeId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidTransition {
    #[error("{ue} is already attached to {poa}")]
    AlreadyAttached { ue: UeId, poa: NodeId },
    #[error("{0} is not attached")]
    NotAttached(UeId),
}

/// A user device. Attached to at most one point of attachment at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ue {
    pub id: UeId,
    pub attached_poa: Option<NodeId>,
    pub app_names: BTreeSet<Name>,
}

impl Ue {
    pub fn new(id: UeId) -> Self {
        Ue {
            id,
            attached_poa: None,
            app_names: BTreeSet::new(),
        }
    }

    pub fn attach(&mut self, poa: NodeId) -> Result<(), InvalidTransition> {
        if let Some(cur) = &self.attached_poa {
            return Err(InvalidTransition::AlreadyAttached {
                ue: self.id.clone(),
                poa: cur.clone(),
            });
        }
        self.attached_poa = Some(poa);
        Ok(())
    }

    /// Returns the point of attachment that was left.
    pub fn detach(&mut self) -> Result<NodeId, InvalidTransition> {
        self.attached_poa
            .take()
            .ok_or_else(|| InvalidTransition::NotAttached(self.id.clone()))
    }
}
