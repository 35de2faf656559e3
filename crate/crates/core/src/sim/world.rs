use std::collections::BTreeMap;

use thiserror::Error;

use crate::forwarder::{FaceId, FaceRemoval, Forwarder, ForwarderConfig, ForwarderError, NextHop};
use crate::icn::Name;
use crate::mobility::{Msa, Nrs};
use crate::orchestration::{SliceId, VnfId, VnfKind};
use crate::substrate::{
    Alloc, Hop, InvalidTransition, LinkQueue, NodeId, ResourceError, ResourceLedger, Topology, Ue, UeId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("unknown vnf {0}")]
    UnknownVnf(VnfId),
    #[error("{0} is not a forwarder")]
    NotAForwarder(VnfId),
    #[error("no path from {0} to {1}")]
    NoPath(NodeId, NodeId),
    #[error("no base-slice forwarder at {0}")]
    NoBaseForwarder(NodeId),
    #[error("{0} is not a point of attachment")]
    NotPoa(NodeId),
    #[error("unknown ue {0}")]
    UnknownUe(UeId),
    #[error(transparent)]
    Transition(#[from] InvalidTransition),
    #[error(transparent)]
    Forwarder(#[from] ForwarderError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

/// One link traversal: a physical hop or the radio link of an attached UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkRef {
    Phys(Hop),
    Access { up: bool },
}

/// What sits on the far side of a forwarder face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Peer {
    Forwarder { vnf: VnfId, face: FaceId },
    Service(VnfId),
    Ue { ue: UeId, epoch: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacePeer {
    pub peer: Peer,
    /// Links from this forwarder's node towards the peer.
    pub path: Vec<LinkRef>,
}

/// Resolution agent state: MSA counters plus requests waiting for the NRS.
#[derive(Debug, Clone, Default)]
pub struct MsaState {
    pub msa: Msa,
    /// signal id → (requesting forwarder, target name)
    pub pending: BTreeMap<u64, (VnfId, Name)>,
}

#[derive(Debug, Clone)]
pub enum VnfState {
    Forwarder(Box<Forwarder>),
    Discovery,
    ConfService,
    Msa(MsaState),
    Nrs(Nrs),
}

#[derive(Debug, Clone)]
pub struct Vnf {
    pub id: VnfId,
    pub kind: VnfKind,
    pub node: NodeId,
    pub slice: SliceId,
    pub alloc: Alloc,
    pub state: VnfState,
}

impl Vnf {
    pub fn forwarder(&self) -> Option<&Forwarder> {
        match &self.state {
            VnfState::Forwarder(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UeState {
    pub ue: Ue,
    /// Bumped on every attach so packets addressed to an old attachment die.
    pub epoch: u64,
    pub face: Option<(VnfId, FaceId)>,
    pub uplink: Option<LinkQueue>,
    pub downlink: Option<LinkQueue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attached {
    pub vnf: VnfId,
    pub face: FaceId,
    pub installed: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detached {
    pub poa: NodeId,
    pub vnf: VnfId,
    pub removal: FaceRemoval,
}

/// Everything that exists at runtime: substrate, hosted VNFs, faces, UEs.
#[derive(Debug, Clone)]
pub struct World {
    topology: Topology,
    resources: ResourceLedger,
    vnfs: BTreeMap<VnfId, Vnf>,
    next_vnf: u32,
    faces: BTreeMap<(VnfId, FaceId), FacePeer>,
    ues: BTreeMap<UeId, UeState>,
    links: BTreeMap<Hop, LinkQueue>,
    base_forwarders: BTreeMap<NodeId, VnfId>,
}

impl World {
    pub fn new(topology: Topology) -> Self {
        let resources = ResourceLedger::new(&topology);
        World {
            topology,
            resources,
            vnfs: BTreeMap::new(),
            next_vnf: 1,
            faces: BTreeMap::new(),
            ues: BTreeMap::new(),
            links: BTreeMap::new(),
            base_forwarders: BTreeMap::new(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn resources(&self) -> &ResourceLedger {
        &self.resources
    }

    pub fn spawn_vnf(&mut self, kind: VnfKind, node: &NodeId, slice: SliceId, alloc: Alloc) -> Result<VnfId, WorldError> {
        self.resources.allocate(node, &alloc)?;
        let id = VnfId(self.next_vnf);
        self.next_vnf += 1;
        let state = match kind {
            VnfKind::IcnForwarder => VnfState::Forwarder(Box::new(Forwarder::new(ForwarderConfig {
                cs_capacity_bytes: alloc.cs_capacity,
                ..ForwarderConfig::default()
            }))),
            VnfKind::DiscoveryFn => VnfState::Discovery,
            VnfKind::ConfServiceFn => VnfState::ConfService,
            VnfKind::Msa => VnfState::Msa(MsaState::default()),
            VnfKind::Nrs => VnfState::Nrs(Nrs::new()),
        };
        self.vnfs.insert(
            id,
            Vnf {
                id,
                kind,
                node: node.clone(),
                slice,
                alloc,
                state,
            },
        );
        Ok(id)
    }

    /// Releases the VNF's resources and removes every face that points at it.
    pub fn remove_vnf(&mut self, id: VnfId) -> Option<Vnf> {
        let vnf = self.vnfs.remove(&id)?;
        self.resources.release(&vnf.node, &vnf.alloc);
        self.faces.retain(|(owner, _), _| *owner != id);
        let dangling: Vec<(VnfId, FaceId)> = self
            .faces
            .iter()
            .filter(|(_, p)| matches!(p.peer, Peer::Forwarder { vnf, .. } | Peer::Service(vnf) if vnf == id))
            .map(|(k, _)| *k)
            .collect();
        for (owner, face) in dangling {
            let _ = self.remove_face(owner, face);
        }
        self.base_forwarders.retain(|_, v| *v != id);
        Some(vnf)
    }

    pub fn vnf(&self, id: VnfId) -> Option<&Vnf> {
        self.vnfs.get(&id)
    }

    pub fn vnf_mut(&mut self, id: VnfId) -> Option<&mut Vnf> {
        self.vnfs.get_mut(&id)
    }

    pub fn vnfs(&self) -> impl Iterator<Item = &Vnf> {
        self.vnfs.values()
    }

    pub fn forwarder(&self, id: VnfId) -> Option<&Forwarder> {
        self.vnfs.get(&id).and_then(|v| v.forwarder())
    }

    pub fn forwarder_mut(&mut self, id: VnfId) -> Result<&mut Forwarder, WorldError> {
        match self.vnfs.get_mut(&id) {
            Some(Vnf {
                state: VnfState::Forwarder(f),
                ..
            }) => Ok(f),
            Some(_) => Err(WorldError::NotAForwarder(id)),
            None => Err(WorldError::UnknownVnf(id)),
        }
    }

    pub fn forwarders(&self) -> impl Iterator<Item = (VnfId, &Forwarder)> {
        self.vnfs.values().filter_map(|v| v.forwarder().map(|f| (v.id, f)))
    }

    pub fn node_of(&self, id: VnfId) -> Result<&NodeId, WorldError> {
        self.vnfs.get(&id).map(|v| &v.node).ok_or(WorldError::UnknownVnf(id))
    }

    /// Physical route between two nodes as link traversals.
    pub fn route(&self, from: &NodeId, to: &NodeId) -> Result<Vec<LinkRef>, WorldError> {
        self.topology
            .path(from, to)
            .map(|p| p.hops.iter().map(|h| LinkRef::Phys(*h)).collect())
            .ok_or_else(|| WorldError::NoPath(from.clone(), to.clone()))
    }

    /// Creates a face on each forwarder pointing at the other (one vlink).
    pub fn connect_forwarders(&mut self, a: VnfId, b: VnfId) -> Result<(FaceId, FaceId), WorldError> {
        let (na, nb) = (self.node_of(a)?.clone(), self.node_of(b)?.clone());
        let ab = self.route(&na, &nb)?;
        let ba = self.route(&nb, &na)?;
        self.forwarder_mut(b)?;
        let fa = self.forwarder_mut(a)?.add_face();
        let fb = self.forwarder_mut(b)?.add_face();
        self.faces.insert(
            (a, fa),
            FacePeer {
                peer: Peer::Forwarder { vnf: b, face: fb },
                path: ab,
            },
        );
        self.faces.insert(
            (b, fb),
            FacePeer {
                peer: Peer::Forwarder { vnf: a, face: fa },
                path: ba,
            },
        );
        Ok((fa, fb))
    }

    /// Face on `fwd` leading to a service function.
    pub fn connect_service(&mut self, fwd: VnfId, svc: VnfId) -> Result<FaceId, WorldError> {
        let (nf, ns) = (self.node_of(fwd)?.clone(), self.node_of(svc)?.clone());
        let path = self.route(&nf, &ns)?;
        let face = self.forwarder_mut(fwd)?.add_face();
        self.faces.insert(
            (fwd, face),
            FacePeer {
                peer: Peer::Service(svc),
                path,
            },
        );
        Ok(face)
    }

    pub fn face_peer(&self, vnf: VnfId, face: FaceId) -> Option<&FacePeer> {
        self.faces.get(&(vnf, face))
    }

    /// Faces of `vnf` whose peer is `other`.
    pub fn faces_towards(&self, vnf: VnfId, other: VnfId) -> Vec<FaceId> {
        self.faces
            .range((vnf, FaceId(0))..=(vnf, FaceId(u32::MAX)))
            .filter(|(_, p)| matches!(p.peer, Peer::Forwarder { vnf, .. } | Peer::Service(vnf) if vnf == other))
            .map(|((_, f), _)| *f)
            .collect()
    }

    /// Removes a face and, for forwarder-to-forwarder vlinks, the opposite face.
    pub fn remove_face(&mut self, vnf: VnfId, face: FaceId) -> Result<FaceRemoval, WorldError> {
        let peer = self.faces.remove(&(vnf, face));
        let removal = match self.forwarder_mut(vnf) {
            Ok(f) => f.remove_face(face)?,
            Err(WorldError::UnknownVnf(_)) => FaceRemoval::default(),
            Err(e) => return Err(e),
        };
        if let Some(FacePeer {
            peer: Peer::Forwarder { vnf: pv, face: pf },
            ..
        }) = peer
        {
            if self.faces.remove(&(pv, pf)).is_some() {
                if let Ok(f) = self.forwarder_mut(pv) {
                    let _ = f.remove_face(pf);
                }
            }
        }
        Ok(removal)
    }

    pub fn set_base_forwarder(&mut self, poa: NodeId, vnf: VnfId) {
        self.base_forwarders.insert(poa, vnf);
    }

    pub fn base_forwarder_at(&self, poa: &NodeId) -> Option<VnfId> {
        self.base_forwarders.get(poa).copied()
    }

    pub fn base_forwarders(&self) -> impl Iterator<Item = (&NodeId, VnfId)> {
        self.base_forwarders.iter().map(|(n, v)| (n, *v))
    }

    pub fn add_ue(&mut self, id: UeId) {
        self.ues.entry(id.clone()).or_insert_with(|| UeState {
            ue: Ue::new(id),
            epoch: 0,
            face: None,
            uplink: None,
            downlink: None,
        });
    }

    pub fn ue(&self, id: &UeId) -> Option<&UeState> {
        self.ues.get(id)
    }

    pub fn ue_mut(&mut self, id: &UeId) -> Result<&mut UeState, WorldError> {
        self.ues.get_mut(id).ok_or_else(|| WorldError::UnknownUe(id.clone()))
    }

    pub fn ues(&self) -> impl Iterator<Item = &UeState> {
        self.ues.values()
    }

    /// Attaches to the PoA's base forwarder and routes the UE's names to it.
    pub fn attach_ue(&mut self, id: &UeId, poa: &NodeId) -> Result<Attached, WorldError> {
        let node = self.topology.node(poa).ok_or_else(|| WorldError::NotPoa(poa.clone()))?;
        if !node.role.is_poa() {
            return Err(WorldError::NotPoa(poa.clone()));
        }
        let access = node.access;
        let vnf = self
            .base_forwarder_at(poa)
            .ok_or_else(|| WorldError::NoBaseForwarder(poa.clone()))?;
        let state = self.ues.get_mut(id).ok_or_else(|| WorldError::UnknownUe(id.clone()))?;
        state.ue.attach(poa.clone())?;
        state.epoch += 1;
        let epoch = state.epoch;
        let names: Vec<Name> = state.ue.app_names.iter().cloned().collect();
        state.uplink = Some(LinkQueue::new(access.latency_us, access.bandwidth_bps, access.queue_capacity));
        state.downlink = Some(LinkQueue::new(access.latency_us, access.bandwidth_bps, access.queue_capacity));

        let fwd = self.forwarder_mut(vnf)?;
        let face = fwd.add_face();
        for name in &names {
            fwd.install_fib(name.clone(), vec![NextHop { face, cost: 0 }])?;
            fwd.remove_redirects_under(name);
        }
        self.faces.insert(
            (vnf, face),
            FacePeer {
                peer: Peer::Ue { ue: id.clone(), epoch },
                path: vec![LinkRef::Access { up: false }],
            },
        );
        self.ues.get_mut(id).expect("checked").face = Some((vnf, face));
        Ok(Attached {
            vnf,
            face,
            installed: names,
        })
    }

    pub fn detach_ue(&mut self, id: &UeId) -> Result<Detached, WorldError> {
        let state = self.ues.get_mut(id).ok_or_else(|| WorldError::UnknownUe(id.clone()))?;
        let poa = state.ue.detach()?;
        let face = state.face.take();
        state.uplink = None;
        state.downlink = None;
        let Some((vnf, face)) = face else {
            return Ok(Detached {
                poa: poa.clone(),
                vnf: self.base_forwarder_at(&poa).unwrap_or(VnfId(0)),
                removal: FaceRemoval::default(),
            });
        };
        let removal = self.remove_face(vnf, face)?;
        Ok(Detached { poa, vnf, removal })
    }

    /// Adds a producer name to an attached UE and routes it at its PoA.
    pub fn add_app_name(&mut self, id: &UeId, name: Name) -> Result<Option<VnfId>, WorldError> {
        let state = self.ues.get_mut(id).ok_or_else(|| WorldError::UnknownUe(id.clone()))?;
        state.ue.app_names.insert(name.clone());
        let Some((vnf, face)) = state.face else {
            return Ok(None);
        };
        self.forwarder_mut(vnf)?.install_fib(name, vec![NextHop { face, cost: 0 }])?;
        Ok(Some(vnf))
    }

    pub fn remove_app_names_under(&mut self, prefix: &Name) {
        for state in self.ues.values_mut() {
            state.ue.app_names.retain(|n| !prefix.is_prefix_of(n));
        }
    }

    pub fn link_queue(&mut self, hop: Hop) -> &mut LinkQueue {
        let l = self.topology.link(hop.link);
        let (lat, bw, cap) = (l.latency_us, l.bandwidth_bps, l.queue_capacity);
        self.links.entry(hop).or_insert_with(|| LinkQueue::new(lat, bw, cap))
    }

    /// Node a sequence of link traversals starting at `from` ends at.
    pub fn route_end(&self, from: &NodeId, path: &[LinkRef]) -> NodeId {
        path.iter()
            .rev()
            .find_map(|l| match l {
                LinkRef::Phys(h) => Some(self.topology.hop_target(*h).clone()),
                LinkRef::Access { .. } => None,
            })
            .unwrap_or_else(|| from.clone())
    }
}

/// The same links walked in the opposite direction.
pub fn reverse_route(path: &[LinkRef]) -> Vec<LinkRef> {
    path.iter()
        .rev()
        .map(|l| match *l {
            LinkRef::Phys(h) => LinkRef::Phys(Hop {
                link: h.link,
                forward: !h.forward,
            }),
            LinkRef::Access { up } => LinkRef::Access { up: !up },
        })
        .collect()
}
