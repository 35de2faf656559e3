//! Conference slice application: discovery, participants publishing named
//! media chunks on demand, and consumers fetching them.

mod discovery;
mod fetch;

use std::collections::BTreeSet;

use crate::icn::{Data, Name};
use crate::substrate::UeId;

pub use discovery::{decode_roster, encode_roster, DiscoveryResponse, T_GATEWAY_LOCATOR, T_NAME_SPACE, T_TRUST_ANCHOR};
pub use fetch::{chunk_name, parse_chunk_name, FetchFlow, Outstanding, Received, TimeoutOutcome, MAX_RETRANSMISSIONS};

pub const DEFAULT_CHUNK_SIZE: usize = 1_200;
pub const DEFAULT_PUBLISH_RATE: u64 = 50;
pub const CONTENT_FRESHNESS_US: u64 = 10_000_000;
pub const DISCOVERY_FRESHNESS_US: u64 = 1_000_000;

pub fn discovery_prefix() -> Name {
    Name::from_components(["discovery"]).expect("static name")
}

pub fn trust_prefix() -> Name {
    Name::from_components(["trust"]).expect("static name")
}

/// Signer of base-slice service answers; trusted by every base forwarder.
pub fn base_key() -> Name {
    trust_prefix().child("base").child("KEY")
}

/// `/discovery/conf/<name_space components>`
pub fn discovery_name(name_space: &Name) -> Name {
    let mut n = discovery_prefix().child("conf");
    for c in name_space.components() {
        n = n.child(c.clone());
    }
    n
}

/// Inverse of [`discovery_name`].
pub fn discovery_target(name: &Name) -> Option<Name> {
    let c = name.components();
    if c.len() < 3 || c[0] != "discovery" || c[1] != "conf" {
        return None;
    }
    Name::from_components(c[2..].iter().cloned()).ok()
}

pub fn roster_name(name_space: &Name) -> Name {
    name_space.child("roster")
}

pub fn gateway_locator(name_space: &Name, gateway: crate::orchestration::VnfId) -> Name {
    name_space.child("gw").child(gateway.0.to_string())
}

pub fn slice_key(name_space: &Name) -> Name {
    name_space.child("KEY")
}

/// Orchestrator-side record of a joined participant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticipantRecord {
    pub ue: UeId,
    pub producer_prefix: Name,
    pub key_id: Name,
}

/// Application-side producer state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant {
    pub id: UeId,
    pub producer_prefix: Name,
    pub key_id: Name,
    pub publish_rate: u64,
    pub chunk_size: usize,
}

impl Participant {
    pub fn new(id: UeId, producer_prefix: Name, chunk_size: usize, publish_rate: u64) -> Self {
        let key_id = producer_prefix.child("KEY");
        Participant {
            id,
            producer_prefix,
            key_id,
            publish_rate,
            chunk_size,
        }
    }

    /// The chunk `<prefix>/<media>/<seq>`, signed with the participant key.
    pub fn publish(&self, media: &str, seq: u64) -> Data {
        let mut payload = vec![0u8; self.chunk_size];
        let stamp = seq.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        for (i, b) in payload.iter_mut().enumerate() {
            *b = (stamp >> ((i % 8) * 8)) as u8;
        }
        Data::signed(
            chunk_name(&self.producer_prefix, media, seq),
            payload,
            CONTENT_FRESHNESS_US,
            self.key_id.clone(),
        )
    }

    /// Serves any `<prefix>/<media>/<seq>` Interest on demand.
    pub fn serve(&self, name: &Name) -> Option<Data> {
        let (media, seq) = parse_chunk_name(&self.producer_prefix, name)?;
        Some(self.publish(&media, seq))
    }
}

/// Conference application state of one UE.
#[derive(Debug, Clone, Default)]
pub struct UeApp {
    pub trust_anchors: BTreeSet<Name>,
    pub gateway: Option<Name>,
    pub participant: Option<Participant>,
    pub flows: Vec<FetchFlow>,
    /// (slice name_space, participant id) awaiting the discovery answer.
    pub pending_join: Option<(Name, String)>,
}
