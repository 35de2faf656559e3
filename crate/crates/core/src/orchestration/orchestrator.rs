use std::collections::BTreeMap;

use thiserror::Error;

use crate::conference::{self, DiscoveryResponse, ParticipantRecord};
use crate::icn::Name;
use crate::mobility::{mobility_prefix, Nrs, NrsOutcome};
use crate::sim::{VnfState, World, WorldError};
use crate::substrate::{Alloc, NodeId, UeId};

use super::context::{DomainController, Rule, SliceContext};
use super::intent::{base_request, translate_intent, Intent, IntentError, ResourceRequest};
use super::placement::{place, InsufficientResources, Placement, SubstrateSnapshot};
use super::types::{ConferenceLayout, ServiceType, Slice, SliceId, SliceStatus, VnfId, VnfInstance, VnfKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrchestrationError {
    #[error("{0} is already active")]
    AlreadyActive(&'static str),
    #[error("the base slice is not active")]
    NoBaseSlice,
    #[error(transparent)]
    Intent(#[from] IntentError),
    #[error(transparent)]
    InsufficientResources(#[from] InsufficientResources),
    #[error("name space {requested} overlaps {existing}")]
    NamespaceConflict { requested: Name, existing: Name },
    #[error("no active slice {0}")]
    NotFound(SliceId),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

type Result<T> = std::result::Result<T, OrchestrationError>;

/// Name spaces owned by the platform itself.
pub fn reserved_prefixes() -> [Name; 4] {
    [
        conference::discovery_prefix(),
        conference::trust_prefix(),
        Name::from_components(["poa"]).expect("static name"),
        mobility_prefix(),
    ]
}

/// A mobile name and who it belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobileBinding {
    pub slice: SliceId,
    pub ue: UeId,
    /// The prefix whose resolution rule covers this name.
    pub rule_prefix: Name,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnableOutcome {
    pub created_mobility_slice: Option<SliceId>,
    /// (name, locator, seq) registered now; names of detached UEs wait for attach.
    pub registered: Vec<(Name, Name, u64)>,
}

/// Global orchestrator: slices, their contexts and the mobility service API.
#[derive(Debug, Clone, Default)]
pub struct Orchestrator {
    slices: BTreeMap<SliceId, Slice>,
    contexts: BTreeMap<SliceId, SliceContext>,
    next_slice: u32,
    base: Option<SliceId>,
    mobility: Option<SliceId>,
    bindings: BTreeMap<Name, MobileBinding>,
    resolution_prefixes: BTreeMap<Name, SliceId>,
    // per-name sequence counters held on the registering side
    seq_counters: BTreeMap<Name, u64>,
}

impl Orchestrator {
    pub fn new() -> Self {
        Orchestrator::default()
    }

    pub fn slice(&self, id: SliceId) -> Option<&Slice> {
        self.slices.get(&id)
    }

    pub fn slices(&self) -> impl Iterator<Item = &Slice> {
        self.slices.values()
    }

    pub fn active_slices(&self) -> impl Iterator<Item = &Slice> {
        self.slices.values().filter(|s| s.is_active())
    }

    pub fn context(&self, id: SliceId) -> Option<&SliceContext> {
        self.contexts.get(&id)
    }

    pub fn base_slice(&self) -> Option<SliceId> {
        self.base.filter(|id| self.slices[id].is_active())
    }

    pub fn mobility_slice(&self) -> Option<SliceId> {
        self.mobility.filter(|id| self.slices[id].is_active())
    }

    pub fn bindings(&self) -> &BTreeMap<Name, MobileBinding> {
        &self.bindings
    }

    /// Active slice whose name space is exactly `name_space`.
    pub fn slice_by_namespace(&self, name_space: &Name) -> Option<&Slice> {
        self.active_slices().find(|s| &s.name_space == name_space)
    }

    /// Active conference slice whose name space covers `name`.
    pub fn slice_covering(&self, name: &Name) -> Option<&Slice> {
        self.active_slices()
            .find(|s| s.kind == ServiceType::Conference && s.name_space.is_prefix_of(name))
    }

    fn service_vnf(&self, kind: VnfKind) -> Option<VnfId> {
        let slice = self.slices.get(&self.mobility_slice()?)?;
        slice.vnfs.iter().find(|v| v.kind == kind).map(|v| v.id)
    }

    pub fn nrs_vnf(&self) -> Option<VnfId> {
        self.service_vnf(VnfKind::Nrs)
    }

    pub fn msa_vnf(&self) -> Option<VnfId> {
        self.service_vnf(VnfKind::Msa)
    }

    /// Mobile names owned by `ue`.
    pub fn mobile_names_of(&self, ue: &UeId) -> Vec<Name> {
        self.bindings
            .iter()
            .filter(|(_, b)| &b.ue == ue)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Next registration sequence number for `name`, seeded from the NRS.
    pub fn next_seq(&mut self, nrs: &Nrs, name: &Name) -> u64 {
        let cur = self
            .seq_counters
            .get(name)
            .copied()
            .or_else(|| nrs.current_seq(name))
            .unwrap_or(0);
        let next = cur.max(nrs.current_seq(name).unwrap_or(0)) + 1;
        self.seq_counters.insert(name.clone(), next);
        next
    }

    fn new_slice(&mut self, kind: ServiceType, name_space: Name) -> SliceId {
        self.next_slice += 1;
        let id = SliceId(self.next_slice);
        self.slices.insert(
            id,
            Slice {
                id,
                kind,
                vnfs: Vec::new(),
                vlinks: Vec::new(),
                gateway: None,
                name_space,
                status: SliceStatus::Provisioning,
                conference: None,
            },
        );
        self.contexts.insert(id, SliceContext::new(id));
        id
    }

    fn admit(world: &World, request: &ResourceRequest) -> Result<Placement> {
        let snapshot = SubstrateSnapshot::capture(world.topology(), world.resources());
        Ok(place(request, &snapshot)?)
    }

    fn instantiate(&mut self, world: &mut World, slice: SliceId, request: &ResourceRequest, placement: &Placement) -> Result<Vec<VnfId>> {
        let mut ids = Vec::with_capacity(request.vnfs.len());
        for (req, node) in request.vnfs.iter().zip(&placement.nodes) {
            let id = world.spawn_vnf(req.kind, node, slice, req.alloc)?;
            self.record_vnf(slice, id, req.kind, node.clone(), req.alloc);
            ids.push(id);
        }
        Ok(ids)
    }

    fn record_vnf(&mut self, slice: SliceId, id: VnfId, kind: VnfKind, node: NodeId, alloc: Alloc) {
        if let Some(s) = self.slices.get_mut(&slice) {
            s.vnfs.push(VnfInstance {
                id,
                kind,
                node,
                alloc,
                slice,
            });
        }
    }

    fn controller<'a>(&'a mut self, world: &'a mut World, slice: SliceId) -> DomainController<'a> {
        DomainController::new(world, self.contexts.get_mut(&slice).expect("context exists"))
    }

    /// One forwarder per point of attachment plus the discovery function.
    pub fn bootstrap_base_slice(&mut self, world: &mut World) -> Result<SliceId> {
        if self.base_slice().is_some() {
            return Err(OrchestrationError::AlreadyActive("base slice"));
        }
        let poas: Vec<NodeId> = world.topology().poas().iter().map(|n| n.id.clone()).collect();
        let request = base_request(&poas);
        let placement = Self::admit(world, &request)?;
        let id = self.new_slice(ServiceType::Base, conference::discovery_prefix());
        let vnfs = self.instantiate(world, id, &request, &placement)?;
        let (forwarders, discovery) = vnfs.split_at(poas.len());
        let discovery = discovery[0];

        let mut vlinks = Vec::new();
        let mut ctl = self.controller(world, id);
        for (poa, &fwd) in poas.iter().zip(forwarders) {
            ctl.world.set_base_forwarder(poa.clone(), fwd);
            let locator = ctl.world.topology().node(poa).expect("poa exists").locator_prefix.clone();
            ctl.world.forwarder_mut(fwd)?.add_local_locator(locator);
            ctl.push_anchor(fwd, conference::base_key())?;
            let face = ctl.world.connect_service(fwd, discovery)?;
            ctl.push_fib(fwd, conference::discovery_prefix(), face)?;
            ctl.push_fib(fwd, conference::trust_prefix(), face)?;
            vlinks.push((fwd, discovery));
        }
        for i in 0..forwarders.len() {
            for j in i + 1..forwarders.len() {
                let (a, b) = (forwarders[i], forwarders[j]);
                let (fa, fb) = ctl.world.connect_forwarders(a, b)?;
                let la = ctl.world.topology().node(&poas[i]).expect("poa").locator_prefix.clone();
                let lb = ctl.world.topology().node(&poas[j]).expect("poa").locator_prefix.clone();
                ctl.push_fib(a, lb, fa)?;
                ctl.push_fib(b, la, fb)?;
                vlinks.push((a, b));
            }
        }
        let slice = self.slices.get_mut(&id).expect("slice exists");
        slice.vlinks = vlinks;
        slice.status = SliceStatus::Active;
        self.base = Some(id);
        Ok(id)
    }

    /// Routes an intent: base bootstraps, mobility and conference are translated and placed.
    pub fn create_slice(&mut self, world: &mut World, intent: &Intent) -> Result<SliceId> {
        match intent.service_type {
            ServiceType::Base => self.bootstrap_base_slice(world),
            ServiceType::Mobility => {
                self.require_base()?;
                self.create_mobility_slice(world, intent)
            }
            ServiceType::Conference => {
                self.require_base()?;
                self.create_conference_slice(world, intent)
            }
        }
    }

    fn require_base(&self) -> Result<()> {
        self.base_slice().map(|_| ()).ok_or(OrchestrationError::NoBaseSlice)
    }

    fn create_mobility_slice(&mut self, world: &mut World, intent: &Intent) -> Result<SliceId> {
        if self.mobility_slice().is_some() {
            return Err(OrchestrationError::AlreadyActive("mobility slice"));
        }
        let request = translate_intent(intent)?;
        let placement = Self::admit(world, &request)?;
        let id = self.new_slice(ServiceType::Mobility, mobility_prefix());
        let vnfs = self.instantiate(world, id, &request, &placement)?;
        let ctx = self.contexts.get_mut(&id).expect("context exists");
        // NRS policy and MSA policy
        ctx.control_messages += 2;
        let slice = self.slices.get_mut(&id).expect("slice exists");
        slice.vlinks = vec![(vnfs[1], vnfs[0])];
        slice.status = SliceStatus::Active;
        self.mobility = Some(id);
        Ok(id)
    }

    fn check_namespace(&self, ns: &Name) -> Result<()> {
        let active = self.active_slices().map(|s| s.name_space.clone());
        for existing in reserved_prefixes().into_iter().chain(active) {
            if existing.is_prefix_of(ns) || ns.is_prefix_of(&existing) {
                return Err(OrchestrationError::NamespaceConflict {
                    requested: ns.clone(),
                    existing,
                });
            }
        }
        Ok(())
    }

    fn create_conference_slice(&mut self, world: &mut World, intent: &Intent) -> Result<SliceId> {
        let request = translate_intent(intent)?;
        let ns = intent.name_space.clone().expect("validated by translate_intent");
        self.check_namespace(&ns)?;
        let placement = Self::admit(world, &request)?;
        let id = self.new_slice(ServiceType::Conference, ns.clone());
        let vnfs = self.instantiate(world, id, &request, &placement)?;
        let (gateways, service) = vnfs.split_at(vnfs.len() - 1);
        let service = service[0];
        let gateways = gateways.to_vec();
        let key = conference::slice_key(&ns);

        let base: Vec<(NodeId, VnfId)> = world.base_forwarders().map(|(n, v)| (n.clone(), v)).collect();
        let mut serving = BTreeMap::new();
        for (poa, _) in &base {
            let best = gateways
                .iter()
                .filter_map(|&g| {
                    let node = world.node_of(g).ok()?;
                    world.topology().latency(poa, node).map(|lat| (lat, g))
                })
                .min();
            if let Some((_, g)) = best {
                serving.insert(poa.clone(), g);
            }
        }

        let mut layout = ConferenceLayout {
            gateways: gateways.clone(),
            serving: serving.clone(),
            conf_service: Some(service),
            slice_key: Some(key.clone()),
            ..ConferenceLayout::default()
        };
        let mut vlinks = Vec::new();
        let mut ctl = self.controller(world, id);

        for i in 0..gateways.len() {
            for j in i + 1..gateways.len() {
                let (a, b) = (gateways[i], gateways[j]);
                let (fa, fb) = ctl.world.connect_forwarders(a, b)?;
                layout.faces.insert((a, b), fa);
                layout.faces.insert((b, a), fb);
                vlinks.push((a, b));
            }
        }
        for (poa, bfwd) in &base {
            let Some(&g) = serving.get(poa) else { continue };
            let (fb, fg) = ctl.world.connect_forwarders(*bfwd, g)?;
            ctl.ctx.foreign_faces.push((*bfwd, fb));
            layout.faces.insert((*bfwd, g), fb);
            layout.faces.insert((g, *bfwd), fg);
            vlinks.push((*bfwd, g));
            ctl.push_fib(*bfwd, ns.clone(), fb)?;
            ctl.push_anchor(*bfwd, key.clone())?;
        }
        for &g in &gateways {
            ctl.push_anchor(g, key.clone())?;
            for (poa, bfwd) in &base {
                let Some(&sg) = serving.get(poa) else { continue };
                let locator = ctl.world.topology().node(poa).expect("poa").locator_prefix.clone();
                let face = if sg == g {
                    layout.faces[&(g, *bfwd)]
                } else {
                    layout.faces[&(g, sg)]
                };
                ctl.push_fib(g, locator, face)?;
            }
            let face = ctl.world.connect_service(g, service)?;
            ctl.push_fib(g, conference::roster_name(&ns), face)?;
            vlinks.push((g, service));
        }

        let slice = self.slices.get_mut(&id).expect("slice exists");
        slice.vlinks = vlinks;
        slice.gateway = gateways.first().copied();
        slice.conference = Some(layout);
        slice.status = SliceStatus::Active;
        Ok(id)
    }

    fn active_conference(&self, id: SliceId) -> Result<&Slice> {
        match self.slices.get(&id) {
            Some(s) if s.is_active() && s.kind == ServiceType::Conference => Ok(s),
            Some(s) if s.is_active() => Err(OrchestrationError::Rejected(format!("{id} is a {} slice", s.kind.as_str()))),
            _ => Err(OrchestrationError::NotFound(id)),
        }
    }

    /// What discovery answers for `name_space` to a UE attached at `poa`.
    pub fn discovery_response(&self, world: &World, name_space: &Name, poa: &NodeId) -> Option<DiscoveryResponse> {
        let slice = self.slice_by_namespace(name_space)?;
        let layout = slice.conference.as_ref()?;
        let gw = layout.serving.get(poa).copied().or_else(|| {
            layout
                .gateways
                .iter()
                .filter_map(|&g| world.topology().latency(poa, world.node_of(g).ok()?).map(|l| (l, g)))
                .min()
                .map(|(_, g)| g)
        })?;
        let mut trust_anchors: std::collections::BTreeSet<Name> = layout.slice_key.iter().cloned().collect();
        trust_anchors.extend(layout.participants.values().map(|p| p.key_id.clone()));
        Some(DiscoveryResponse {
            gateway_locator: conference::gateway_locator(name_space, gw),
            name_space: name_space.clone(),
            trust_anchors,
        })
    }

    /// Routes `<ns>/<participant>` to the UE through its serving gateway and
    /// distributes the participant key.
    pub fn join_participant(&mut self, world: &mut World, slice: SliceId, ue: &UeId, participant: &str) -> Result<ParticipantRecord> {
        let s = self.active_conference(slice)?;
        let layout = s.conference.clone().expect("conference layout");
        let prefix = s
            .name_space
            .try_child(participant)
            .map_err(|e| OrchestrationError::Rejected(format!("participant id {participant:?}: {e}")))?;
        if let Some(p) = layout.participants.get(participant) {
            if &p.ue != ue {
                return Err(OrchestrationError::Rejected(format!("{prefix} already belongs to {}", p.ue)));
            }
        }
        let poa = world
            .ue(ue)
            .ok_or_else(|| WorldError::UnknownUe(ue.clone()))?
            .ue
            .attached_poa
            .clone()
            .ok_or_else(|| OrchestrationError::Rejected(format!("{ue} is not attached")))?;
        let serving = *layout
            .serving
            .get(&poa)
            .ok_or_else(|| OrchestrationError::Rejected(format!("{poa} has no serving gateway")))?;
        let base_fwd = world.base_forwarder_at(&poa).ok_or(WorldError::NoBaseForwarder(poa.clone()))?;
        let key = prefix.child("KEY");

        let mut ctl = self.controller(world, slice);
        if let Some(vnf) = ctl.world.add_app_name(ue, prefix.clone())? {
            ctl.ctx.rules.insert(Rule::Fib {
                vnf,
                prefix: prefix.clone(),
            });
            ctl.ctx.control_messages += 1;
        }
        for &g in &layout.gateways {
            let face = if g == serving {
                layout.face(g, base_fwd)
            } else {
                layout.face(g, serving)
            }
            .expect("gateway faces exist");
            ctl.push_fib(g, prefix.clone(), face)?;
            ctl.push_anchor(g, key.clone())?;
        }
        let bases: Vec<VnfId> = ctl.world.base_forwarders().map(|(_, v)| v).collect();
        for b in bases {
            ctl.push_anchor(b, key.clone())?;
        }
        let record = ParticipantRecord {
            ue: ue.clone(),
            producer_prefix: prefix,
            key_id: key,
        };
        let s = self.slices.get_mut(&slice).expect("slice exists");
        s.conference
            .as_mut()
            .expect("conference layout")
            .participants
            .insert(participant.to_string(), record.clone());
        Ok(record)
    }

    /// Records FIB entries a UE attach installed for names owned by a slice.
    pub fn note_attach(&mut self, vnf: VnfId, installed: &[Name]) {
        for name in installed {
            let Some(slice) = self.slice_covering(name).map(|s| s.id) else {
                continue;
            };
            let ctx = self.contexts.get_mut(&slice).expect("context exists");
            ctx.rules.insert(Rule::Fib {
                vnf,
                prefix: name.clone(),
            });
            ctx.control_messages += 1;
        }
    }

    fn nrs_mut<'w>(&self, world: &'w mut World) -> Option<&'w mut Nrs> {
        match &mut world.vnf_mut(self.nrs_vnf()?)?.state {
            VnfState::Nrs(nrs) => Some(nrs),
            _ => None,
        }
    }

    /// Registers `name` at the UE's current locator through the control path.
    fn register_now(&mut self, world: &mut World, name: &Name, ue: &UeId) -> Option<(Name, u64)> {
        let poa = world.ue(ue)?.ue.attached_poa.clone()?;
        let locator = world.topology().node(&poa)?.locator_prefix.clone();
        let mut counters = std::mem::take(&mut self.seq_counters);
        let nrs = self.nrs_mut(world)?;
        let cur = counters.get(name).copied().or_else(|| nrs.current_seq(name)).unwrap_or(0);
        let seq = cur.max(nrs.current_seq(name).unwrap_or(0)) + 1;
        let outcome = nrs.register(name.clone(), locator.clone(), seq);
        counters.insert(name.clone(), seq);
        self.seq_counters = counters;
        (outcome == NrsOutcome::Accepted).then_some((locator, seq))
    }

    fn deregister_now(&mut self, world: &mut World, name: &Name) {
        let mut counters = std::mem::take(&mut self.seq_counters);
        if let Some(nrs) = self.nrs_mut(world) {
            if nrs.record(name).is_some_and(|r| r.registered) {
                let seq = counters
                    .get(name)
                    .copied()
                    .unwrap_or(0)
                    .max(nrs.current_seq(name).unwrap_or(0))
                    + 1;
                nrs.deregister(name, seq);
                counters.insert(name.clone(), seq);
            }
        }
        self.seq_counters = counters;
    }

    /// Turns on late-binding resolution for `prefixes` of a conference slice.
    pub fn enable_mobility(&mut self, world: &mut World, slice: SliceId, prefixes: &[Name]) -> Result<EnableOutcome> {
        let s = self.active_conference(slice)?;
        let ns = s.name_space.clone();
        let layout = s.conference.clone().expect("conference layout");
        for p in prefixes {
            if !ns.is_prefix_of(p) {
                return Err(OrchestrationError::Rejected(format!("{p} is outside {ns}")));
            }
        }
        let mut targets: Vec<(Name, Name, UeId)> = Vec::new();
        for p in prefixes {
            let before = targets.len();
            for rec in layout.participants.values() {
                if rec.producer_prefix.is_prefix_of(p) {
                    targets.push((p.clone(), p.clone(), rec.ue.clone()));
                } else if p.is_prefix_of(&rec.producer_prefix) {
                    targets.push((p.clone(), rec.producer_prefix.clone(), rec.ue.clone()));
                }
            }
            if targets.len() == before {
                return Err(OrchestrationError::Rejected(format!("no participant under {p}")));
            }
        }

        let mut outcome = EnableOutcome::default();
        if self.mobility_slice().is_none() {
            outcome.created_mobility_slice = Some(self.create_mobility_slice(world, &Intent::mobility())?);
        }
        let mobility = self.mobility_slice().expect("mobility slice active");
        for (rule_prefix, name, ue) in targets {
            self.bindings.insert(
                name.clone(),
                MobileBinding {
                    slice,
                    ue: ue.clone(),
                    rule_prefix,
                },
            );
            if let Some((locator, seq)) = self.register_now(world, &name, &ue) {
                outcome.registered.push((name, locator, seq));
            }
            self.contexts.get_mut(&mobility).expect("context").control_messages += 1;
        }
        let mut ctl = self.controller(world, slice);
        for p in prefixes {
            for &g in &layout.gateways {
                ctl.push_resolution(g, p.clone())?;
            }
        }
        for p in prefixes {
            self.resolution_prefixes.insert(p.clone(), slice);
        }
        Ok(outcome)
    }

    /// Withdraws resolution rules and NRS registrations for `prefixes`.
    pub fn disable_mobility(&mut self, world: &mut World, slice: SliceId, prefixes: &[Name]) -> Result<Vec<Name>> {
        self.active_conference(slice)?;
        for p in prefixes {
            if self.resolution_prefixes.get(p) != Some(&slice) {
                return Err(OrchestrationError::Rejected(format!("mobility is not enabled for {p}")));
            }
        }
        let mut deregistered = Vec::new();
        for p in prefixes {
            self.withdraw_resolution(world, slice, p);
            let names: Vec<Name> = self
                .bindings
                .iter()
                .filter(|(_, b)| &b.rule_prefix == p)
                .map(|(n, _)| n.clone())
                .collect();
            for name in names {
                self.bindings.remove(&name);
                self.deregister_now(world, &name);
                if let Some(m) = self.mobility_slice() {
                    self.contexts.get_mut(&m).expect("context").control_messages += 1;
                }
                let bases: Vec<VnfId> = world.base_forwarders().map(|(_, v)| v).collect();
                for b in bases {
                    if let Ok(f) = world.forwarder_mut(b) {
                        f.remove_redirects_under(&name);
                    }
                }
                deregistered.push(name);
            }
        }
        Ok(deregistered)
    }

    fn withdraw_resolution(&mut self, world: &mut World, slice: SliceId, prefix: &Name) {
        self.resolution_prefixes.remove(prefix);
        let rules: Vec<Rule> = self.contexts[&slice]
            .rules
            .iter()
            .filter(|r| matches!(r, Rule::Resolution { prefix: p, .. } if p == prefix))
            .cloned()
            .collect();
        let mut ctl = self.controller(world, slice);
        for r in &rules {
            ctl.withdraw(r);
        }
    }

    /// Removes every rule, face and VNF of the slice and returns its resources.
    pub fn teardown_slice(&mut self, world: &mut World, id: SliceId) -> Result<()> {
        let slice = match self.slices.get(&id) {
            Some(s) if s.is_active() => s.clone(),
            _ => return Err(OrchestrationError::NotFound(id)),
        };
        match slice.kind {
            ServiceType::Base => {
                if self.active_slices().any(|s| s.id != id) {
                    return Err(OrchestrationError::Rejected("other slices depend on the base slice".into()));
                }
                let attached: Vec<UeId> = world
                    .ues()
                    .filter(|u| u.ue.attached_poa.is_some())
                    .map(|u| u.ue.id.clone())
                    .collect();
                for ue in attached {
                    world.detach_ue(&ue)?;
                }
            }
            ServiceType::Mobility => {
                let enabled: Vec<(Name, SliceId)> =
                    self.resolution_prefixes.iter().map(|(p, s)| (p.clone(), *s)).collect();
                for (p, s) in enabled {
                    self.withdraw_resolution(world, s, &p);
                }
                self.bindings.clear();
            }
            ServiceType::Conference => {
                let ns = slice.name_space.clone();
                let enabled: Vec<Name> = self
                    .resolution_prefixes
                    .iter()
                    .filter(|(_, s)| **s == id)
                    .map(|(p, _)| p.clone())
                    .collect();
                for p in enabled {
                    self.withdraw_resolution(world, id, &p);
                }
                self.bindings.retain(|_, b| b.slice != id);
                if let Some(nrs) = self.nrs_mut(world) {
                    nrs.deregister_under(&ns);
                }
                let ids: Vec<VnfId> = world.forwarders().map(|(v, _)| v).collect();
                for v in ids {
                    let f = world.forwarder_mut(v)?;
                    let stale: Vec<Name> = f
                        .fib()
                        .entries()
                        .map(|e| e.prefix.clone())
                        .filter(|p| ns.is_prefix_of(p))
                        .collect();
                    for p in stale {
                        let _ = f.remove_fib(&p);
                    }
                    f.remove_redirects_under(&ns);
                }
                world.remove_app_names_under(&ns);
            }
        }
        let mut ctl = self.controller(world, id);
        ctl.withdraw_all();
        let faces = std::mem::take(&mut ctl.ctx.foreign_faces);
        for (vnf, face) in faces {
            let _ = ctl.world.remove_face(vnf, face);
        }
        for v in &slice.vnfs {
            world.remove_vnf(v.id);
        }
        let s = self.slices.get_mut(&id).expect("slice exists");
        s.status = SliceStatus::TornDown;
        if self.base == Some(id) {
            self.base = None;
        }
        if self.mobility == Some(id) {
            self.mobility = None;
        }
        Ok(())
    }
}
