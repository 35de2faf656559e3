use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conference::{
    self, discovery_name, encode_roster, roster_name, DiscoveryResponse, FetchFlow, Participant, TimeoutOutcome, UeApp,
    DISCOVERY_FRESHNESS_US,
};
use crate::forwarder::{Disposition, DropReason, FaceId, ForwardAction};
use crate::icn::{Data, Interest, Name, Packet};
use crate::mobility::{NrsOutcome, RedirectEntry, SignalMessage};
use crate::orchestration::{OrchestrationError, Orchestrator, ServiceType, SliceId, VnfId};
use crate::sim::{LinkRef, Peer, VnfState, World};
use crate::substrate::{Delivery, EventQueue, NodeId, UeId};
use crate::SimTime;

use super::report::MetricsReport;
use super::scenario::{Action, Params, Scenario};
use super::trace::{TraceEvent, TraceRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Stop before `duration_us` if set.
    pub until: Option<SimTime>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub report: MetricsReport,
    /// Set when the run aborted on an internal invariant violation.
    pub violation: Option<String>,
}

#[derive(Debug, Clone)]
enum Dest {
    Face { vnf: VnfId, face: FaceId },
    Service { vnf: VnfId, reply: (VnfId, FaceId) },
    Ue { ue: UeId, epoch: u64 },
    Control { vnf: VnfId, from: VnfId },
}

#[derive(Debug, Clone)]
struct Transit {
    packet: Packet,
    at: NodeId,
    remaining: VecDeque<LinkRef>,
    dest: Dest,
    /// UE whose radio link the path crosses.
    ue: Option<UeId>,
}

#[derive(Debug)]
enum Event {
    Action(usize),
    Arrive(Box<Transit>),
    Timeout { ue: UeId, flow: usize, seq: u64, attempt: u32 },
    FetchNext { ue: UeId, flow: usize },
    Attach { ue: UeId, poa: NodeId },
}

const STEP_LABELS: [&str; 6] = [
    "base slice bootstrap",
    "mobility slice bootstrap",
    "conference slice creation",
    "ue app bootstrap",
    "mobility enabled",
    "producer handover",
];

fn drop_reason(r: DropReason) -> &'static str {
    match r {
        DropReason::HopLimitExceeded => "hop_limit_exceeded",
        DropReason::DuplicateNonce => "duplicate_nonce",
        DropReason::NoRoute => "no_route",
        DropReason::ProvenanceFailed => "provenance_failed",
        DropReason::Unsolicited => "unsolicited",
    }
}

fn signal_label(m: &SignalMessage) -> &'static str {
    match m {
        SignalMessage::ResolveRequest { .. } => "resolve_request",
        SignalMessage::NrsQuery { .. } => "nrs_query",
        SignalMessage::NrsAnswer { .. } => "nrs_answer",
        SignalMessage::ResolveAnswer { .. } => "resolve_answer",
        SignalMessage::Register { .. } => "register",
        SignalMessage::RegisterAck { .. } => "register_ack",
        SignalMessage::RedirectNotify { .. } => "redirect_notify",
    }
}

fn opt_name(n: &Option<Name>) -> Option<String> {
    n.as_ref().map(|n| n.to_string())
}

/// The discrete-event engine driving one scenario.
pub struct Simulation<'s> {
    scenario: &'s Scenario,
    params: Params,
    world: World,
    orch: Orchestrator,
    queue: EventQueue<Event>,
    rng: ChaCha8Rng,
    trace: Vec<TraceRecord>,
    apps: BTreeMap<UeId, UeApp>,
    /// signal id → (forwarder, in_face, Interest awaiting a locator)
    pending_resolutions: BTreeMap<u64, (VnfId, FaceId, Interest)>,
    next_signal: u64,
    steps_done: [bool; 6],
    violation: Option<String>,
}

impl<'s> Simulation<'s> {
    pub fn new(scenario: &'s Scenario, opts: RunOptions) -> Result<Self, crate::substrate::TopologyError> {
        let mut world = World::new(scenario.topology()?);
        let mut apps = BTreeMap::new();
        for ue in &scenario.ues {
            world.add_ue(ue.clone());
            apps.insert(ue.clone(), UeApp::default());
        }
        let mut queue = EventQueue::new();
        for (i, entry) in scenario.timeline.iter().enumerate() {
            queue.schedule(entry.at, Event::Action(i)).expect("queue starts at zero");
        }
        Ok(Simulation {
            scenario,
            params: scenario.params,
            world,
            orch: Orchestrator::new(),
            queue,
            rng: ChaCha8Rng::seed_from_u64(opts.seed.unwrap_or(scenario.seed)),
            trace: Vec::new(),
            apps,
            pending_resolutions: BTreeMap::new(),
            next_signal: 1,
            steps_done: [false; 6],
            violation: None,
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn orchestrator(&self) -> &Orchestrator {
        &self.orch
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// Processes events up to and including `until`.
    pub fn run_until(&mut self, until: SimTime) {
        while self.violation.is_none() {
            let Some((_, event)) = self.queue.pop_until(until) else {
                break;
            };
            self.handle(event);
            self.check_invariants();
        }
    }

    pub fn finish(self) -> RunOutput {
        let report = MetricsReport::from_trace(&self.trace);
        RunOutput {
            trace: self.trace,
            report,
            violation: self.violation,
        }
    }

    fn now(&self) -> SimTime {
        self.queue.now()
    }

    fn emit(&mut self, node: impl Into<String>, event: TraceEvent) {
        log::debug!("{} {}", self.now(), event.kind());
        self.trace.push(TraceRecord {
            t: self.now(),
            node: node.into(),
            event,
        });
    }

    fn vnf_node(&self, vnf: VnfId) -> String {
        self.world.node_of(vnf).map(|n| n.to_string()).unwrap_or_else(|_| "-".into())
    }

    fn schedule(&mut self, at: SimTime, event: Event) {
        self.queue.schedule(at, event).expect("events are never scheduled in the past");
    }

    fn nonce(&mut self) -> u32 {
        self.rng.random()
    }

    fn step(&mut self, n: u8) {
        let i = n as usize - 1;
        if !self.steps_done[i] {
            self.steps_done[i] = true;
            self.emit(
                "orchestrator",
                TraceEvent::Step {
                    step: n,
                    label: STEP_LABELS[i].into(),
                },
            );
        }
    }

    fn violate(&mut self, what: String) {
        if self.violation.is_none() {
            self.emit("orchestrator", TraceEvent::InvariantViolation { what: what.clone() });
            self.violation = Some(what);
        }
    }

    fn check_invariants(&mut self) {
        if let Some(node) = self.world.resources().violation() {
            let what = format!("resource capacity exceeded at {node}");
            self.violate(what);
            return;
        }
        let over = self
            .world
            .forwarders()
            .find(|(_, f)| f.cs().used_bytes() > f.cs().capacity())
            .map(|(v, _)| v);
        if let Some(v) = over {
            self.violate(format!("content store of {v} exceeds its capacity"));
        }
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::Action(i) => self.action(i),
            Event::Arrive(t) => self.arrive(*t),
            Event::Timeout { ue, flow, seq, attempt } => self.on_timeout(&ue, flow, seq, attempt),
            Event::FetchNext { ue, flow } => self.fetch_next(&ue, flow),
            Event::Attach { ue, poa } => self.attach(&ue, &poa, "ue_move"),
        }
    }

    // ---- packet transport ----

    fn launch(&mut self, t: Transit) {
        let now = self.now();
        if t.remaining.is_empty() {
            self.schedule(now, Event::Arrive(Box::new(t)));
        } else {
            self.advance(t);
        }
    }

    fn advance(&mut self, mut t: Transit) {
        let now = self.now();
        let Some(link) = t.remaining.pop_front() else {
            self.dispatch(t);
            return;
        };
        let delivery = match link {
            LinkRef::Phys(h) => {
                let next = self.world.topology().hop_target(h).clone();
                let d = self.world.link_queue(h).deliver(&t.packet, now);
                t.at = next;
                d
            }
            LinkRef::Access { up } => {
                let queue = t
                    .ue
                    .as_ref()
                    .and_then(|u| self.world.ue_mut(u).ok())
                    .and_then(|s| if up { s.uplink.as_mut() } else { s.downlink.as_mut() });
                match queue {
                    Some(q) => q.deliver(&t.packet, now),
                    None => {
                        let name = t.packet.name().to_string();
                        self.emit(
                            t.at.to_string(),
                            TraceEvent::Drop {
                                vnf: None,
                                reason: "detached".into(),
                                name,
                            },
                        );
                        return;
                    }
                }
            }
        };
        match delivery {
            Ok(Delivery::Arrives(at)) => self.schedule(at, Event::Arrive(Box::new(t))),
            Ok(Delivery::DropTail) => {
                let name = t.packet.name().to_string();
                self.emit(
                    t.at.to_string(),
                    TraceEvent::Drop {
                        vnf: None,
                        reason: "queue_full".into(),
                        name,
                    },
                );
            }
            Err(e) => {
                let name = t.packet.name().to_string();
                self.emit(
                    t.at.to_string(),
                    TraceEvent::Drop {
                        vnf: None,
                        reason: format!("encoding: {e}"),
                        name,
                    },
                );
            }
        }
    }

    fn arrive(&mut self, t: Transit) {
        if t.remaining.is_empty() {
            self.dispatch(t);
        } else {
            self.advance(t);
        }
    }

    fn dispatch(&mut self, t: Transit) {
        match t.dest {
            Dest::Face { vnf, face } => self.forwarder_receive(vnf, face, t.packet),
            Dest::Service { vnf, reply } => self.service_receive(vnf, reply, t.packet),
            Dest::Ue { ue, epoch } => self.ue_receive(&ue, epoch, t.packet),
            Dest::Control { vnf, from } => self.control_receive(vnf, from, t.packet),
        }
    }

    fn send_on_face(&mut self, vnf: VnfId, face: FaceId, packet: Packet) {
        let Some(peer) = self.world.face_peer(vnf, face).cloned() else {
            let name = packet.name().to_string();
            self.emit(
                self.vnf_node(vnf),
                TraceEvent::Drop {
                    vnf: Some(vnf.0),
                    reason: "no_face".into(),
                    name,
                },
            );
            return;
        };
        let (dest, ue) = match peer.peer {
            Peer::Forwarder { vnf: other, face } => (Dest::Face { vnf: other, face }, None),
            Peer::Service(svc) => (
                Dest::Service {
                    vnf: svc,
                    reply: (vnf, face),
                },
                None,
            ),
            Peer::Ue { ue, epoch } => (Dest::Ue { ue: ue.clone(), epoch }, Some(ue)),
        };
        let at = self.world.node_of(vnf).expect("sender exists").clone();
        self.launch(Transit {
            packet,
            at,
            remaining: peer.path.into(),
            dest,
            ue,
        });
    }

    /// Uplink transmission from an attached UE to its PoA forwarder.
    fn ue_send(&mut self, ue: &UeId, packet: Packet) {
        let state = self.world.ue(ue);
        let Some((vnf, face)) = state.and_then(|s| s.face) else {
            let name = packet.name().to_string();
            self.emit(
                ue.to_string(),
                TraceEvent::Drop {
                    vnf: None,
                    reason: "detached".into(),
                    name,
                },
            );
            return;
        };
        let at = self.world.node_of(vnf).expect("poa forwarder exists").clone();
        self.launch(Transit {
            packet,
            at,
            remaining: [LinkRef::Access { up: true }].into(),
            dest: Dest::Face { vnf, face },
            ue: Some(ue.clone()),
        });
    }

    fn send_signal(&mut self, from: VnfId, to: VnfId, id: u64, msg: SignalMessage) {
        let nrs = self.orch.nrs_vnf();
        self.emit(
            self.vnf_node(from),
            TraceEvent::Signal {
                msg: signal_label(&msg).into(),
                id,
                from: from.0,
                to: to.0,
                nrs: nrs == Some(from) || nrs == Some(to),
            },
        );
        let nonce = self.nonce();
        let packet = msg.to_packet(id, nonce);
        let (Ok(a), Ok(b)) = (self.world.node_of(from), self.world.node_of(to)) else {
            return;
        };
        let (a, b) = (a.clone(), b.clone());
        let Ok(route) = self.world.route(&a, &b) else {
            return;
        };
        self.launch(Transit {
            packet,
            at: a,
            remaining: route.into(),
            dest: Dest::Control { vnf: to, from },
            ue: None,
        });
    }

    fn fresh_signal_id(&mut self) -> u64 {
        let id = self.next_signal;
        self.next_signal += 1;
        id
    }

    // ---- forwarders ----

    fn forwarder_receive(&mut self, vnf: VnfId, face: FaceId, packet: Packet) {
        let node = self.vnf_node(vnf);
        let alive = self.world.forwarder(vnf).is_some_and(|f| f.has_face(face));
        if !alive {
            let name = packet.name().to_string();
            self.emit(
                node,
                TraceEvent::Drop {
                    vnf: Some(vnf.0),
                    reason: "face_gone".into(),
                    name,
                },
            );
            return;
        }
        if let Some(v) = self.world.vnf(vnf) {
            let slice = v.slice;
            if let Some(s) = self.orch.slice(slice) {
                if s.kind == ServiceType::Conference && !s.name_space.is_prefix_of(packet.name()) {
                    let what = format!("{} reached {vnf} outside slice {}", packet.name(), s.name_space);
                    self.violate(what);
                    return;
                }
            }
        }
        let now = self.now();
        let expired = self.world.forwarder_mut(vnf).expect("checked").expire_pit(now);
        for name in expired {
            self.emit(
                node.clone(),
                TraceEvent::PitExpired {
                    vnf: vnf.0,
                    name: name.to_string(),
                },
            );
        }
        match packet {
            Packet::Interest(i) => self.forwarder_interest(vnf, face, i),
            Packet::Data(d) => {
                let actions = match self.world.forwarder_mut(vnf).expect("checked").on_data(face, d, now) {
                    Ok(a) => a,
                    Err(_) => return,
                };
                self.execute(vnf, face, actions, false);
            }
        }
    }

    fn forwarder_interest(&mut self, vnf: VnfId, face: FaceId, interest: Interest) {
        let now = self.now();
        let node = self.vnf_node(vnf);
        let name = interest.name.to_string();
        let outcome = match self.world.forwarder_mut(vnf).and_then(|f| Ok(f.process_interest(face, interest, now)?)) {
            Ok(o) => o,
            Err(_) => {
                self.emit(
                    node,
                    TraceEvent::Drop {
                        vnf: Some(vnf.0),
                        reason: "face_gone".into(),
                        name,
                    },
                );
                return;
            }
        };
        let mut redirected = false;
        match outcome.disposition {
            Disposition::CacheHit => self.emit(node, TraceEvent::CacheHit { vnf: vnf.0, name }),
            Disposition::Aggregated => self.emit(node, TraceEvent::Aggregated { vnf: vnf.0, name }),
            Disposition::Resolution => self.emit(node, TraceEvent::ResolutionInvoked { vnf: vnf.0, name }),
            Disposition::Forwarded { redirected: r } => redirected = r,
            Disposition::Dropped(_) => {}
        }
        self.execute(vnf, face, outcome.actions, redirected);
    }

    fn execute(&mut self, vnf: VnfId, in_face: FaceId, actions: Vec<ForwardAction>, redirected: bool) {
        let node = self.vnf_node(vnf);
        for action in actions {
            match action {
                ForwardAction::SendInterest { face, interest } => {
                    self.emit(
                        node.clone(),
                        TraceEvent::Forward {
                            vnf: vnf.0,
                            in_face: in_face.0,
                            out_face: face.0,
                            name: interest.name.to_string(),
                            hint: opt_name(&interest.forwarding_hint),
                            redirected,
                        },
                    );
                    self.send_on_face(vnf, face, Packet::Interest(interest));
                }
                ForwardAction::SendData { face, data } => {
                    self.emit(
                        node.clone(),
                        TraceEvent::DataSent {
                            vnf: vnf.0,
                            face: face.0,
                            name: data.name.to_string(),
                        },
                    );
                    self.send_on_face(vnf, face, Packet::Data(data));
                }
                ForwardAction::InvokeResolution { in_face, interest } => match self.orch.msa_vnf() {
                    Some(msa) => {
                        let id = self.fresh_signal_id();
                        let target = interest.name.clone();
                        self.pending_resolutions.insert(id, (vnf, in_face, interest));
                        self.send_signal(vnf, msa, id, SignalMessage::ResolveRequest { target });
                    }
                    None => self.emit(
                        node.clone(),
                        TraceEvent::Drop {
                            vnf: Some(vnf.0),
                            reason: "no_resolver".into(),
                            name: interest.name.to_string(),
                        },
                    ),
                },
                ForwardAction::Drop { reason, name } => self.emit(
                    node.clone(),
                    TraceEvent::Drop {
                        vnf: Some(vnf.0),
                        reason: drop_reason(reason).into(),
                        name: name.to_string(),
                    },
                ),
            }
        }
    }

    // ---- service functions ----

    fn service_receive(&mut self, svc: VnfId, reply: (VnfId, FaceId), packet: Packet) {
        let Packet::Interest(interest) = packet else {
            return;
        };
        let Some(v) = self.world.vnf(svc) else {
            return;
        };
        let node = v.node.to_string();
        let data = match &v.state {
            VnfState::Discovery => {
                let Some(ns) = conference::discovery_target(&interest.name) else {
                    self.emit(
                        node,
                        TraceEvent::Drop {
                            vnf: Some(svc.0),
                            reason: "unknown_service_name".into(),
                            name: interest.name.to_string(),
                        },
                    );
                    return;
                };
                let poa = self.world.node_of(reply.0).cloned();
                let response = poa.ok().and_then(|p| self.orch.discovery_response(&self.world, &ns, &p));
                let payload = response
                    .as_ref()
                    .map(DiscoveryResponse::encode)
                    .transpose()
                    .ok()
                    .flatten()
                    .unwrap_or_default();
                self.emit(
                    node,
                    TraceEvent::ServiceAnswer {
                        vnf: svc.0,
                        name: interest.name.to_string(),
                        found: response.is_some(),
                    },
                );
                Data::signed(interest.name, payload, DISCOVERY_FRESHNESS_US, conference::base_key())
            }
            VnfState::ConfService => {
                let slice = self.orch.slice(v.slice).filter(|s| s.is_active());
                let Some((ns, layout)) = slice.and_then(|s| Some((s.name_space.clone(), s.conference.as_ref()?))) else {
                    return;
                };
                if interest.name != roster_name(&ns) {
                    self.emit(
                        node,
                        TraceEvent::Drop {
                            vnf: Some(svc.0),
                            reason: "unknown_service_name".into(),
                            name: interest.name.to_string(),
                        },
                    );
                    return;
                }
                let payload = encode_roster(layout.participants.values().map(|p| &p.producer_prefix)).unwrap_or_default();
                self.emit(
                    node,
                    TraceEvent::ServiceAnswer {
                        vnf: svc.0,
                        name: interest.name.to_string(),
                        found: true,
                    },
                );
                Data::signed(interest.name, payload, DISCOVERY_FRESHNESS_US, conference::slice_key(&ns))
            }
            _ => return,
        };
        let (fwd, face) = reply;
        let (Ok(a), Ok(b)) = (self.world.node_of(svc), self.world.node_of(fwd)) else {
            return;
        };
        let (a, b) = (a.clone(), b.clone());
        let Ok(route) = self.world.route(&a, &b) else {
            return;
        };
        self.launch(Transit {
            packet: Packet::Data(data),
            at: a,
            remaining: route.into(),
            dest: Dest::Face { vnf: fwd, face },
            ue: None,
        });
    }

    // ---- mobility signaling ----

    fn control_receive(&mut self, vnf: VnfId, from: VnfId, packet: Packet) {
        let Some((id, msg)) = SignalMessage::from_packet(&packet) else {
            return;
        };
        let now = self.now();
        let node = self.vnf_node(vnf);
        let Some(v) = self.world.vnf_mut(vnf) else {
            self.emit(
                node,
                TraceEvent::Drop {
                    vnf: Some(vnf.0),
                    reason: "vnf_gone".into(),
                    name: packet.name().to_string(),
                },
            );
            return;
        };
        match (&mut v.state, msg) {
            (VnfState::Msa(state), SignalMessage::ResolveRequest { target }) => {
                let probe = Interest::new(target.clone(), 0);
                let _ = state.msa.begin(&probe);
                state.pending.insert(id, (from, target.clone()));
                self.emit(
                    node,
                    TraceEvent::MsaResolve {
                        name: target.to_string(),
                    },
                );
                match self.orch.nrs_vnf() {
                    Some(nrs) => self.send_signal(vnf, nrs, id, SignalMessage::NrsQuery { target }),
                    None => self.send_signal(vnf, from, id, SignalMessage::ResolveAnswer { locator: None }),
                }
            }
            (VnfState::Nrs(nrs), SignalMessage::NrsQuery { target }) => {
                let locator = nrs.resolve(&target).ok().cloned();
                self.emit(
                    node,
                    TraceEvent::NrsResolve {
                        name: target.to_string(),
                        locator: opt_name(&locator),
                    },
                );
                self.send_signal(vnf, from, id, SignalMessage::NrsAnswer { locator });
            }
            (VnfState::Msa(state), SignalMessage::NrsAnswer { locator }) => {
                if let Some((requester, _)) = state.pending.remove(&id) {
                    self.send_signal(vnf, requester, id, SignalMessage::ResolveAnswer { locator });
                }
            }
            (VnfState::Forwarder(_), SignalMessage::ResolveAnswer { locator }) => {
                let Some((fwd, in_face, interest)) = self.pending_resolutions.remove(&id) else {
                    return;
                };
                self.emit(
                    node.clone(),
                    TraceEvent::ResolutionAnswer {
                        vnf: fwd.0,
                        name: interest.name.to_string(),
                        locator: opt_name(&locator),
                    },
                );
                match locator {
                    Some(l) => self.forwarder_interest(fwd, in_face, interest.with_hint(l)),
                    None => self.emit(
                        node,
                        TraceEvent::Drop {
                            vnf: Some(fwd.0),
                            reason: drop_reason(DropReason::NoRoute).into(),
                            name: interest.name.to_string(),
                        },
                    ),
                }
            }
            (VnfState::Nrs(nrs), SignalMessage::Register { name, locator, seq }) => {
                let old = nrs.record(&name).filter(|r| r.registered).map(|r| r.locator.clone());
                let outcome = nrs.register(name.clone(), locator.clone(), seq);
                let accepted = outcome == NrsOutcome::Accepted;
                self.emit(
                    node,
                    TraceEvent::NrsRegister {
                        name: name.to_string(),
                        locator: locator.to_string(),
                        seq,
                        accepted,
                    },
                );
                self.send_signal(vnf, from, id, SignalMessage::RegisterAck { outcome });
                let stale = old.filter(|o| accepted && *o != locator);
                let stale_fwd = stale
                    .and_then(|o| self.world.topology().node_by_locator(&o).map(|n| n.id.clone()))
                    .and_then(|n| self.world.base_forwarder_at(&n));
                if let Some(target) = stale_fwd {
                    let nid = self.fresh_signal_id();
                    self.send_signal(vnf, target, nid, SignalMessage::RedirectNotify { name, locator });
                }
            }
            (VnfState::Forwarder(f), SignalMessage::RedirectNotify { name, locator }) => {
                let expiry = now + self.params.grace_us;
                f.install_redirect(RedirectEntry {
                    name: name.clone(),
                    new_locator: locator.clone(),
                    expiry,
                });
                self.emit(
                    node,
                    TraceEvent::RedirectInstalled {
                        vnf: vnf.0,
                        name: name.to_string(),
                        locator: locator.to_string(),
                        expiry,
                    },
                );
            }
            (VnfState::Forwarder(_), SignalMessage::RegisterAck { .. }) => {}
            _ => self.emit(
                node,
                TraceEvent::Drop {
                    vnf: Some(vnf.0),
                    reason: "unexpected_signal".into(),
                    name: packet.name().to_string(),
                },
            ),
        }
    }

    // ---- UE applications ----

    fn ue_receive(&mut self, ue: &UeId, epoch: u64, packet: Packet) {
        let current = self.world.ue(ue).map(|s| s.epoch);
        if current != Some(epoch) || self.world.ue(ue).is_some_and(|s| s.face.is_none()) {
            self.emit(
                ue.to_string(),
                TraceEvent::Drop {
                    vnf: None,
                    reason: "detached".into(),
                    name: packet.name().to_string(),
                },
            );
            return;
        }
        match packet {
            Packet::Interest(i) => {
                let data = self
                    .apps
                    .get(ue)
                    .and_then(|a| a.participant.as_ref())
                    .and_then(|p| p.serve(&i.name));
                match data {
                    Some(d) => {
                        self.emit(
                            ue.to_string(),
                            TraceEvent::ProducerServe {
                                ue: ue.to_string(),
                                name: d.name.to_string(),
                            },
                        );
                        self.ue_send(ue, Packet::Data(d));
                    }
                    None => self.emit(
                        ue.to_string(),
                        TraceEvent::Drop {
                            vnf: None,
                            reason: "no_producer".into(),
                            name: i.name.to_string(),
                        },
                    ),
                }
            }
            Packet::Data(d) => self.ue_data(ue, d),
        }
    }

    fn ue_data(&mut self, ue: &UeId, data: Data) {
        let now = self.now();
        let app = self.apps.get_mut(ue).expect("apps exist for every ue");
        if let Some((ns, pid)) = app.pending_join.clone() {
            if data.name == discovery_name(&ns) {
                app.pending_join = None;
                self.bootstrap(ue, &ns, &pid, &data);
                return;
            }
        }
        let hits: Vec<_> = app
            .flows
            .iter_mut()
            .enumerate()
            .filter_map(|(i, f)| f.on_data(&data.name, now).map(|r| (i, f.id.clone(), r)))
            .collect();
        if hits.is_empty() {
            self.emit(
                ue.to_string(),
                TraceEvent::LateData {
                    ue: ue.to_string(),
                    name: data.name.to_string(),
                },
            );
        }
        for (idx, flow, r) in hits {
            self.emit(
                ue.to_string(),
                TraceEvent::ConsumerData {
                    flow,
                    seq: r.seq,
                    latency_us: r.latency_us,
                },
            );
            self.schedule(now, Event::FetchNext { ue: ue.clone(), flow: idx });
        }
    }

    fn bootstrap(&mut self, ue: &UeId, ns: &Name, pid: &str, data: &Data) {
        let response = match DiscoveryResponse::decode(&data.payload) {
            Ok(Some(r)) => r,
            Ok(None) => return self.app_error(ue, format!("no conference slice {ns}")),
            Err(e) => return self.app_error(ue, format!("bad discovery response: {e}")),
        };
        let app = self.apps.get_mut(ue).expect("apps exist for every ue");
        app.trust_anchors = response.trust_anchors.clone();
        app.gateway = Some(response.gateway_locator.clone());
        self.emit(
            ue.to_string(),
            TraceEvent::AppBootstrapped {
                ue: ue.to_string(),
                name_space: ns.to_string(),
                gateway: response.gateway_locator.to_string(),
            },
        );
        self.step(4);
        let Some(slice) = self.orch.slice_by_namespace(ns).map(|s| s.id) else {
            return self.app_error(ue, format!("no conference slice {ns}"));
        };
        match self.orch.join_participant(&mut self.world, slice, ue, pid) {
            Ok(record) => {
                let p = Participant::new(
                    ue.clone(),
                    record.producer_prefix.clone(),
                    self.params.chunk_size,
                    self.params.publish_rate,
                );
                self.apps.get_mut(ue).expect("exists").participant = Some(p);
                self.emit(
                    ue.to_string(),
                    TraceEvent::ParticipantJoined {
                        ue: ue.to_string(),
                        prefix: record.producer_prefix.to_string(),
                    },
                );
                self.slice_rules(slice);
            }
            Err(e) => self.app_error(ue, e.to_string()),
        }
    }

    fn app_error(&mut self, ue: &UeId, reason: String) {
        self.emit(
            ue.to_string(),
            TraceEvent::AppError {
                ue: ue.to_string(),
                reason,
            },
        );
    }

    fn fetch_next(&mut self, ue: &UeId, idx: usize) {
        let now = self.now();
        let nonce = self.nonce();
        let flow = &mut self.apps.get_mut(ue).expect("exists").flows[idx];
        let Some(due) = flow.next_due(now) else {
            return;
        };
        if due > now {
            self.schedule(due, Event::FetchNext { ue: ue.clone(), flow: idx });
            return;
        }
        let Some(interest) = flow.send_next(now, nonce) else {
            return;
        };
        let (id, seq, lifetime) = (flow.id.clone(), flow.outstanding().expect("just sent").seq, flow.lifetime_us);
        self.emit(
            ue.to_string(),
            TraceEvent::ConsumerSend {
                flow: id,
                seq,
                attempt: 0,
                name: interest.name.to_string(),
            },
        );
        self.ue_send(ue, Packet::Interest(interest));
        self.schedule(
            now + lifetime,
            Event::Timeout {
                ue: ue.clone(),
                flow: idx,
                seq,
                attempt: 0,
            },
        );
    }

    fn on_timeout(&mut self, ue: &UeId, idx: usize, seq: u64, attempt: u32) {
        let now = self.now();
        let nonce = self.nonce();
        let flow = &mut self.apps.get_mut(ue).expect("exists").flows[idx];
        let (id, lifetime) = (flow.id.clone(), flow.lifetime_us);
        match flow.on_timeout(seq, attempt, nonce) {
            TimeoutOutcome::Stale => {}
            TimeoutOutcome::Retransmit(interest) => {
                self.emit(
                    ue.to_string(),
                    TraceEvent::ConsumerTimeout {
                        flow: id.clone(),
                        seq,
                        attempt,
                    },
                );
                self.emit(
                    ue.to_string(),
                    TraceEvent::ConsumerSend {
                        flow: id,
                        seq,
                        attempt: attempt + 1,
                        name: interest.name.to_string(),
                    },
                );
                self.ue_send(ue, Packet::Interest(interest));
                self.schedule(
                    now + lifetime,
                    Event::Timeout {
                        ue: ue.clone(),
                        flow: idx,
                        seq,
                        attempt: attempt + 1,
                    },
                );
            }
            TimeoutOutcome::Lost { seq } => {
                self.emit(
                    ue.to_string(),
                    TraceEvent::ConsumerTimeout {
                        flow: id.clone(),
                        seq,
                        attempt,
                    },
                );
                self.emit(ue.to_string(), TraceEvent::ChunkLost { flow: id, seq });
                self.schedule(now, Event::FetchNext { ue: ue.clone(), flow: idx });
            }
        }
    }

    // ---- timeline actions ----

    fn action(&mut self, i: usize) {
        let action = self.scenario.timeline[i].action.clone();
        let label = action.label();
        let node = match &action {
            Action::UeAttach { ue, .. }
            | Action::UeDetach { ue }
            | Action::UeMove { ue, .. }
            | Action::JoinConference { ue, .. }
            | Action::StartFetch { ue, .. } => ue.to_string(),
            _ => "orchestrator".to_string(),
        };
        if let Err(reason) = self.try_action(action) {
            self.emit(
                node,
                TraceEvent::ActionFailed {
                    action: label.into(),
                    reason,
                },
            );
        }
    }

    fn try_action(&mut self, action: Action) -> Result<(), String> {
        let now = self.now();
        match action {
            Action::SubmitIntent { intent } => {
                let id = self
                    .orch
                    .create_slice(&mut self.world, &intent)
                    .map_err(|e| e.to_string())?;
                self.slice_created(id);
            }
            Action::UeAttach { ue, poa } => self.try_attach(&ue, &poa)?,
            Action::UeDetach { ue } => self.detach(&ue)?,
            Action::UeMove { ue, to, gap_us } => {
                self.step(6);
                self.detach(&ue)?;
                let gap = gap_us.unwrap_or(self.params.gap_us);
                self.schedule(now + gap, Event::Attach { ue, poa: to });
            }
            Action::JoinConference { ue, slice, participant } => {
                if self.world.ue(&ue).and_then(|s| s.face).is_none() {
                    return Err(format!("{ue} is not attached"));
                }
                let nonce = self.nonce();
                let interest = Interest::new(discovery_name(&slice), nonce)
                    .with_lifetime(self.params.interest_lifetime_us)
                    .with_hop_limit(self.params.hop_limit);
                self.apps.get_mut(&ue).expect("exists").pending_join = Some((slice, participant));
                self.ue_send(&ue, Packet::Interest(interest));
            }
            Action::StartFetch {
                ue,
                target,
                media,
                rate,
                chunks,
            } => {
                let app = self.apps.get_mut(&ue).expect("exists");
                let base = format!("{ue}>{target}");
                let n = app.flows.iter().filter(|f| f.id == base || f.id.starts_with(&format!("{base}#"))).count();
                let id = if n == 0 { base } else { format!("{base}#{n}") };
                let mut flow = FetchFlow::new(
                    id.clone(),
                    target.clone(),
                    media,
                    rate.unwrap_or(self.params.publish_rate),
                    chunks,
                    now,
                );
                flow.lifetime_us = self.params.interest_lifetime_us;
                flow.hop_limit = self.params.hop_limit;
                app.flows.push(flow);
                let idx = app.flows.len() - 1;
                self.emit(
                    ue.to_string(),
                    TraceEvent::FlowStarted {
                        flow: id,
                        target: target.to_string(),
                    },
                );
                self.schedule(now, Event::FetchNext { ue, flow: idx });
            }
            Action::EnableMobility { slice, prefixes } => {
                let id = self.conference_id(&slice)?;
                let outcome = self
                    .orch
                    .enable_mobility(&mut self.world, id, &prefixes)
                    .map_err(|e| e.to_string())?;
                if let Some(m) = outcome.created_mobility_slice {
                    self.slice_created(m);
                }
                for p in &prefixes {
                    self.emit(
                        "orchestrator",
                        TraceEvent::MobilityEnabled {
                            slice: id.0,
                            prefix: p.to_string(),
                        },
                    );
                }
                let nrs_node = self.orch.nrs_vnf().map(|v| self.vnf_node(v)).unwrap_or_default();
                for (name, locator, seq) in outcome.registered {
                    self.emit(
                        nrs_node.clone(),
                        TraceEvent::NrsRegister {
                            name: name.to_string(),
                            locator: locator.to_string(),
                            seq,
                            accepted: true,
                        },
                    );
                }
                self.step(5);
                self.slice_rules(id);
                if let Some(m) = self.orch.mobility_slice() {
                    self.slice_rules(m);
                }
            }
            Action::DisableMobility { slice, prefixes } => {
                let id = self.conference_id(&slice)?;
                let names = self
                    .orch
                    .disable_mobility(&mut self.world, id, &prefixes)
                    .map_err(|e| e.to_string())?;
                for p in &prefixes {
                    self.emit(
                        "orchestrator",
                        TraceEvent::MobilityDisabled {
                            slice: id.0,
                            prefix: p.to_string(),
                        },
                    );
                }
                let nrs_node = self.orch.nrs_vnf().map(|v| self.vnf_node(v)).unwrap_or_default();
                for name in names {
                    self.emit(nrs_node.clone(), TraceEvent::NrsDeregister { name: name.to_string() });
                }
                self.slice_rules(id);
                if let Some(m) = self.orch.mobility_slice() {
                    self.slice_rules(m);
                }
            }
            Action::TeardownSlice { slice } => {
                let id = match slice.as_str() {
                    "base" => self.orch.base_slice(),
                    "mobility" => self.orch.mobility_slice(),
                    ns => Name::parse(ns)
                        .ok()
                        .and_then(|n| self.orch.slice_by_namespace(&n).map(|s| s.id)),
                }
                .ok_or_else(|| format!("no active slice {slice}"))?;
                let vnfs: Vec<(VnfId, NodeId)> = self
                    .orch
                    .slice(id)
                    .map(|s| s.vnfs.iter().map(|v| (v.id, v.node.clone())).collect())
                    .unwrap_or_default();
                self.orch
                    .teardown_slice(&mut self.world, id)
                    .map_err(|e: OrchestrationError| e.to_string())?;
                self.pending_resolutions.retain(|_, (v, _, _)| vnfs.iter().all(|(r, _)| r != v));
                for (vnf, node) in vnfs {
                    let usage = *self.world.resources().usage(&node).expect("node exists");
                    self.emit(
                        node.to_string(),
                        TraceEvent::VnfRemoved {
                            slice: id.0,
                            vnf: vnf.0,
                            cpu_used: usage.cpu_used,
                            storage_used: usage.storage_used,
                        },
                    );
                }
                let ns = self.orch.slice(id).map(|s| s.name_space.to_string()).unwrap_or_default();
                self.emit("orchestrator", TraceEvent::SliceTornDown { slice: id.0, name_space: ns });
                self.slice_rules(id);
            }
        }
        Ok(())
    }

    fn conference_id(&self, ns: &Name) -> Result<SliceId, String> {
        self.orch
            .slice_by_namespace(ns)
            .filter(|s| s.kind == ServiceType::Conference)
            .map(|s| s.id)
            .ok_or_else(|| format!("no active conference slice {ns}"))
    }

    fn slice_created(&mut self, id: SliceId) {
        let slice = self.orch.slice(id).expect("just created").clone();
        for v in &slice.vnfs {
            let usage = *self.world.resources().usage(&v.node).expect("node exists");
            self.emit(
                v.node.to_string(),
                TraceEvent::VnfPlaced {
                    slice: id.0,
                    vnf: v.id.0,
                    vnf_kind: v.kind.as_str().into(),
                    cpu: v.alloc.cpu,
                    storage: v.alloc.storage,
                    cs_capacity: v.alloc.cs_capacity,
                    cpu_used: usage.cpu_used,
                    cpu_capacity: usage.cpu_capacity,
                    storage_used: usage.storage_used,
                    storage_capacity: usage.storage_capacity,
                },
            );
        }
        self.emit(
            "orchestrator",
            TraceEvent::SliceActive {
                slice: id.0,
                service: slice.kind.as_str().into(),
                name_space: slice.name_space.to_string(),
                vnfs: slice.vnfs.len(),
            },
        );
        self.slice_rules(id);
        self.step(match slice.kind {
            ServiceType::Base => 1,
            ServiceType::Mobility => 2,
            ServiceType::Conference => 3,
        });
    }

    fn slice_rules(&mut self, id: SliceId) {
        let Some(ctx) = self.orch.context(id) else {
            return;
        };
        let event = TraceEvent::SliceRules {
            slice: id.0,
            fib_rules: ctx.fib_rules(),
            resolution_rules: ctx.resolution_rules(),
            control_messages: ctx.control_messages,
        };
        self.emit("orchestrator", event);
    }

    fn attach(&mut self, ue: &UeId, poa: &NodeId, label: &str) {
        if let Err(reason) = self.try_attach(ue, poa) {
            self.emit(
                ue.to_string(),
                TraceEvent::ActionFailed {
                    action: label.into(),
                    reason,
                },
            );
        }
    }

    fn try_attach(&mut self, ue: &UeId, poa: &NodeId) -> Result<(), String> {
        let attached = self.world.attach_ue(ue, poa).map_err(|e| e.to_string())?;
        self.orch.note_attach(attached.vnf, &attached.installed);
        self.emit(
            ue.to_string(),
            TraceEvent::UeAttach {
                ue: ue.to_string(),
                poa: poa.to_string(),
            },
        );
        let (Some(nrs), Some(node)) = (self.orch.nrs_vnf(), self.world.topology().node(poa)) else {
            return Ok(());
        };
        let locator = node.locator_prefix.clone();
        for name in self.orch.mobile_names_of(ue) {
            let seq = match &self.world.vnf(nrs).expect("nrs exists").state {
                VnfState::Nrs(n) => self.orch.next_seq(n, &name),
                _ => continue,
            };
            let id = self.fresh_signal_id();
            self.send_signal(
                attached.vnf,
                nrs,
                id,
                SignalMessage::Register {
                    name,
                    locator: locator.clone(),
                    seq,
                },
            );
        }
        Ok(())
    }

    fn detach(&mut self, ue: &UeId) -> Result<(), String> {
        let d = self.world.detach_ue(ue).map_err(|e| e.to_string())?;
        self.emit(
            ue.to_string(),
            TraceEvent::UeDetach {
                ue: ue.to_string(),
                poa: d.poa.to_string(),
                pit_pruned: d.removal.pit_entries_dropped.len(),
            },
        );
        Ok(())
    }
}

/// Runs a validated scenario to completion.
pub fn run(scenario: &Scenario, opts: RunOptions) -> RunOutput {
    let until = opts.until.map_or(scenario.duration_us, |u| u.min(scenario.duration_us));
    let mut sim = match Simulation::new(scenario, opts) {
        Ok(s) => s,
        Err(e) => {
            let trace = vec![TraceRecord {
                t: 0,
                node: "orchestrator".into(),
                event: TraceEvent::InvariantViolation { what: e.to_string() },
            }];
            let report = MetricsReport::from_trace(&trace);
            return RunOutput {
                trace,
                report,
                violation: Some(e.to_string()),
            };
        }
    };
    sim.run_until(until);
    sim.finish()
}
