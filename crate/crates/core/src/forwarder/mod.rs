//! Virtual ICN forwarder: faces, FIB, PIT, content store and the
//! Interest/Data pipelines.
//!
//! The forwarder is a pure state machine. It never schedules anything itself;
//! every decision comes back as a list of [`ForwardAction`]s for the engine.

mod cs;
mod fib;
mod pit;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::icn::{verify_provenance, Data, Interest, Name};
use crate::mobility::{RedirectEntry, RedirectTable};
use crate::SimTime;

pub use cs::{ContentStore, CsEntry};
pub use fib::{Fib, FibEntry, NextHop};
pub use pit::{DeadNonceLog, InRecord, Pit, PitEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FaceId(pub u32);

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "face{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    HopLimitExceeded,
    DuplicateNonce,
    NoRoute,
    ProvenanceFailed,
    Unsolicited,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForwardAction {
    SendData { face: FaceId, data: Data },
    SendInterest { face: FaceId, interest: Interest },
    /// Hand the Interest to the resolution service; the answer is re-injected
    /// on `in_face` with a forwarding hint.
    InvokeResolution { in_face: FaceId, interest: Interest },
    Drop { reason: DropReason, name: Name },
}

/// What the Interest pipeline did, beyond the raw actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Dropped(DropReason),
    CacheHit,
    Aggregated,
    Resolution,
    Forwarded { redirected: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterestOutcome {
    pub disposition: Disposition,
    pub actions: Vec<ForwardAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForwarderError {
    #[error("unknown face {0}")]
    UnknownFace(FaceId),
    #[error("no entry for {0}")]
    NotFound(Name),
    #[error("route for {0} needs at least one nexthop and no duplicate faces")]
    InvalidRoute(Name),
}

#[derive(Debug, Clone)]
pub struct ForwarderConfig {
    pub cs_capacity_bytes: u64,
    pub dead_nonce_capacity: usize,
}

impl Default for ForwarderConfig {
    fn default() -> Self {
        ForwarderConfig {
            cs_capacity_bytes: 1 << 20,
            dead_nonce_capacity: DeadNonceLog::DEFAULT_CAPACITY,
        }
    }
}

/// Side effects of removing a face.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaceRemoval {
    pub routes_dropped: Vec<Name>,
    pub pit_entries_dropped: Vec<Name>,
}

#[derive(Debug, Clone)]
pub struct Forwarder {
    faces: BTreeSet<FaceId>,
    next_face: u32,
    fib: Fib,
    pit: Pit,
    cs: ContentStore,
    dead_nonces: DeadNonceLog,
    resolution_rules: BTreeSet<Name>,
    trust_anchors: BTreeSet<Name>,
    local_locators: BTreeSet<Name>,
    redirects: RedirectTable,
}

impl Forwarder {
    pub fn new(config: ForwarderConfig) -> Self {
        Forwarder {
            faces: BTreeSet::new(),
            next_face: 1,
            fib: Fib::new(),
            pit: Pit::default(),
            cs: ContentStore::new(config.cs_capacity_bytes),
            dead_nonces: DeadNonceLog::new(config.dead_nonce_capacity),
            resolution_rules: BTreeSet::new(),
            trust_anchors: BTreeSet::new(),
            local_locators: BTreeSet::new(),
            redirects: RedirectTable::default(),
        }
    }

    pub fn add_face(&mut self) -> FaceId {
        let id = FaceId(self.next_face);
        self.next_face += 1;
        self.faces.insert(id);
        id
    }

    pub fn has_face(&self, face: FaceId) -> bool {
        self.faces.contains(&face)
    }

    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        self.faces.iter().copied()
    }

    /// Removes the face, its routes and every PIT in-record that references it.
    pub fn remove_face(&mut self, face: FaceId) -> Result<FaceRemoval, ForwarderError> {
        if !self.faces.remove(&face) {
            return Err(ForwarderError::UnknownFace(face));
        }
        let routes_dropped = self.fib.remove_face(face);
        let emptied = self.pit.prune_face(face);
        let pit_entries_dropped = emptied.into_iter().map(|e| e.name).collect();
        Ok(FaceRemoval {
            routes_dropped,
            pit_entries_dropped,
        })
    }

    pub fn fib(&self) -> &Fib {
        &self.fib
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    pub fn resolution_rules(&self) -> &BTreeSet<Name> {
        &self.resolution_rules
    }

    pub fn trust_anchors(&self) -> &BTreeSet<Name> {
        &self.trust_anchors
    }

    pub fn redirects(&self) -> &RedirectTable {
        &self.redirects
    }

    pub fn fib_lookup(&self, name: &Name) -> Option<&FibEntry> {
        self.fib.lookup(name)
    }

    /// Installs (or replaces) the route for `prefix`.
    pub fn install_fib(&mut self, prefix: Name, nexthops: Vec<NextHop>) -> Result<(), ForwarderError> {
        if let Some(h) = nexthops.iter().find(|h| !self.faces.contains(&h.face)) {
            return Err(ForwarderError::UnknownFace(h.face));
        }
        let entry = FibEntry::new(prefix.clone(), nexthops).ok_or(ForwarderError::InvalidRoute(prefix))?;
        self.fib.insert(entry);
        Ok(())
    }

    pub fn remove_fib(&mut self, prefix: &Name) -> Result<FibEntry, ForwarderError> {
        self.fib
            .remove(prefix)
            .ok_or_else(|| ForwarderError::NotFound(prefix.clone()))
    }

    pub fn set_resolution_rule(&mut self, prefix: Name) {
        self.resolution_rules.insert(prefix);
    }

    pub fn unset_resolution_rule(&mut self, prefix: &Name) -> Result<(), ForwarderError> {
        if self.resolution_rules.remove(prefix) {
            Ok(())
        } else {
            Err(ForwarderError::NotFound(prefix.clone()))
        }
    }

    pub fn add_trust_anchor(&mut self, key: Name) {
        self.trust_anchors.insert(key);
    }

    pub fn remove_trust_anchor(&mut self, key: &Name) -> bool {
        self.trust_anchors.remove(key)
    }

    /// Marks `locator` as this forwarder's own: a hint naming it is consumed
    /// and the Interest is routed by its name.
    pub fn add_local_locator(&mut self, locator: Name) {
        self.local_locators.insert(locator);
    }

    pub fn install_redirect(&mut self, entry: RedirectEntry) {
        self.redirects.install(entry);
    }

    pub fn remove_redirects_under(&mut self, prefix: &Name) -> usize {
        self.redirects.remove_under(prefix)
    }

    /// Removes every PIT entry with `expiry <= now` and returns their names.
    pub fn expire_pit(&mut self, now: SimTime) -> Vec<Name> {
        self.redirects.expire(now);
        let expired = self.pit.expire(now);
        let mut names = Vec::with_capacity(expired.len());
        for entry in expired {
            for r in &entry.in_records {
                self.dead_nonces.insert(entry.name.clone(), r.nonce);
            }
            names.push(entry.name);
        }
        names
    }

    fn is_local_hint(&self, hint: &Name) -> bool {
        self.local_locators.iter().any(|l| l.is_prefix_of(hint))
    }

    fn matches_resolution_rule(&self, name: &Name) -> bool {
        self.resolution_rules.iter().any(|r| r.is_prefix_of(name))
    }

    pub fn on_interest(
        &mut self,
        in_face: FaceId,
        interest: Interest,
        now: SimTime,
    ) -> Result<Vec<ForwardAction>, ForwarderError> {
        self.process_interest(in_face, interest, now).map(|o| o.actions)
    }

    /// Interest pipeline: hop limit, loop check, CS, PIT aggregation,
    /// redirect, resolution trigger, FIB. Each stage may end the pipeline.
    pub fn process_interest(
        &mut self,
        in_face: FaceId,
        mut interest: Interest,
        now: SimTime,
    ) -> Result<InterestOutcome, ForwarderError> {
        if !self.faces.contains(&in_face) {
            return Err(ForwarderError::UnknownFace(in_face));
        }
        self.expire_pit(now);

        let drop = |reason: DropReason, name: &Name| InterestOutcome {
            disposition: Disposition::Dropped(reason),
            actions: vec![ForwardAction::Drop {
                reason,
                name: name.clone(),
            }],
        };

        interest.hop_limit = interest.hop_limit.saturating_sub(1);
        if interest.hop_limit == 0 {
            return Ok(drop(DropReason::HopLimitExceeded, &interest.name));
        }

        if self.pit.seen_nonce(&interest.name, interest.nonce)
            || self.dead_nonces.contains(&interest.name, interest.nonce)
        {
            return Ok(drop(DropReason::DuplicateNonce, &interest.name));
        }

        if let Some(data) = self.cs.lookup(&interest.name, now) {
            return Ok(InterestOutcome {
                disposition: Disposition::CacheHit,
                actions: vec![ForwardAction::SendData { face: in_face, data }],
            });
        }

        // A new downstream face joins the pending entry and nothing goes
        // upstream. The same face asking again with a fresh nonce is a
        // consumer retransmission and continues down the pipeline.
        if let Some(entry) = self.pit.get_mut(&interest.name) {
            if !entry.has_face(in_face) {
                entry.in_records.push(InRecord {
                    face: in_face,
                    nonce: interest.nonce,
                });
                entry.expiry = entry.expiry.max(now.saturating_add(interest.lifetime_us));
                return Ok(InterestOutcome {
                    disposition: Disposition::Aggregated,
                    actions: Vec::new(),
                });
            }
        }

        let mut redirected = false;
        let hint_is_stale_or_absent = match &interest.forwarding_hint {
            None => true,
            Some(h) => self.is_local_hint(h),
        };
        if hint_is_stale_or_absent {
            if let Some(locator) = self.redirects.lookup(&interest.name, now) {
                interest.forwarding_hint = Some(locator.clone());
                redirected = true;
            }
        }

        if interest.forwarding_hint.is_none() && self.matches_resolution_rule(&interest.name) {
            return Ok(InterestOutcome {
                disposition: Disposition::Resolution,
                actions: vec![ForwardAction::InvokeResolution { in_face, interest }],
            });
        }

        let route_key = match &interest.forwarding_hint {
            Some(h) if !self.is_local_hint(h) => h,
            _ => &interest.name,
        };
        let Some(nexthop) = self
            .fib
            .lookup(route_key)
            .and_then(|e| e.best_nexthop(in_face))
        else {
            return Ok(drop(DropReason::NoRoute, &interest.name));
        };

        let expiry = now.saturating_add(interest.lifetime_us);
        match self.pit.get_mut(&interest.name) {
            Some(entry) => {
                // retransmission from an existing downstream face
                if let Some(r) = entry.in_records.iter_mut().find(|r| r.face == in_face) {
                    r.nonce = interest.nonce;
                }
                entry.out_faces.insert(nexthop.face);
                entry.expiry = entry.expiry.max(expiry);
            }
            None => self.pit.insert(PitEntry {
                name: interest.name.clone(),
                in_records: vec![InRecord {
                    face: in_face,
                    nonce: interest.nonce,
                }],
                out_faces: [nexthop.face].into(),
                expiry,
            }),
        }
        Ok(InterestOutcome {
            disposition: Disposition::Forwarded { redirected },
            actions: vec![ForwardAction::SendInterest {
                face: nexthop.face,
                interest,
            }],
        })
    }

    /// Data pipeline: provenance, PIT match, cache insert, fan-out.
    pub fn on_data(
        &mut self,
        in_face: FaceId,
        data: Data,
        now: SimTime,
    ) -> Result<Vec<ForwardAction>, ForwarderError> {
        if !self.faces.contains(&in_face) {
            return Err(ForwarderError::UnknownFace(in_face));
        }
        self.expire_pit(now);

        if !verify_provenance(&data, &self.trust_anchors) {
            return Ok(vec![ForwardAction::Drop {
                reason: DropReason::ProvenanceFailed,
                name: data.name,
            }]);
        }
        let matched = self.pit.matching(&data.name);
        if matched.is_empty() {
            return Ok(vec![ForwardAction::Drop {
                reason: DropReason::Unsolicited,
                name: data.name,
            }]);
        }
        self.cs.insert(data.clone(), now);

        let mut downstream: Vec<FaceId> = Vec::new();
        for name in matched {
            let Some(entry) = self.pit.remove(&name) else {
                continue;
            };
            for r in entry.in_records {
                self.dead_nonces.insert(entry.name.clone(), r.nonce);
                if r.face != in_face && !downstream.contains(&r.face) {
                    downstream.push(r.face);
                }
            }
        }
        Ok(downstream
            .into_iter()
            .map(|face| ForwardAction::SendData {
                face,
                data: data.clone(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests;
