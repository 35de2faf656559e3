use std::fmt;

use serde::{Deserialize, Serialize};

use crate::icn::Name;
use crate::substrate::{Alloc, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VnfId(pub u32);

impl fmt::Display for VnfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vnf{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SliceId(pub u32);

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slice{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VnfKind {
    IcnForwarder,
    Msa,
    Nrs,
    ConfServiceFn,
    DiscoveryFn,
}

impl VnfKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VnfKind::IcnForwarder => "icn_forwarder",
            VnfKind::Msa => "msa",
            VnfKind::Nrs => "nrs",
            VnfKind::ConfServiceFn => "conf_service_fn",
            VnfKind::DiscoveryFn => "discovery_fn",
        }
    }
}

impl fmt::Display for VnfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceType {
    Base,
    Mobility,
    Conference,
}

impl ServiceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceType::Base => "base",
            ServiceType::Mobility => "mobility",
            ServiceType::Conference => "conference",
        }
    }
}

/// A placed virtual function as the orchestrator records it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VnfInstance {
    pub id: VnfId,
    pub kind: VnfKind,
    pub node: NodeId,
    pub alloc: Alloc,
    pub slice: SliceId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceStatus {
    Provisioning,
    Active,
    TornDown,
}

/// Conference-specific wiring kept alongside the generic slice record.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConferenceLayout {
    pub gateways: Vec<VnfId>,
    /// Point of attachment → gateway that serves it (lowest path latency).
    pub serving: std::collections::BTreeMap<NodeId, VnfId>,
    pub conf_service: Option<VnfId>,
    /// (a, b) → face on forwarder a leading to forwarder b.
    pub faces: std::collections::BTreeMap<(VnfId, VnfId), crate::forwarder::FaceId>,
    /// participant id → (ue, producer prefix)
    pub participants: std::collections::BTreeMap<String, crate::conference::ParticipantRecord>,
    pub slice_key: Option<Name>,
}

impl ConferenceLayout {
    pub fn face(&self, from: VnfId, to: VnfId) -> Option<crate::forwarder::FaceId> {
        self.faces.get(&(from, to)).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice {
    pub id: SliceId,
    pub kind: ServiceType,
    pub vnfs: Vec<VnfInstance>,
    /// Virtual links between VNFs; each maps onto a shortest physical path.
    pub vlinks: Vec<(VnfId, VnfId)>,
    pub gateway: Option<VnfId>,
    pub name_space: Name,
    pub status: SliceStatus,
    pub conference: Option<ConferenceLayout>,
}

impl Slice {
    pub fn is_active(&self) -> bool {
        self.status == SliceStatus::Active
    }

    pub fn vnf_ids(&self) -> impl Iterator<Item = VnfId> + '_ {
        self.vnfs.iter().map(|v| v.id)
    }
}
