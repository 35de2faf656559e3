use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::icn::Name;
use crate::SimTime;

use super::FaceId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InRecord {
    pub face: FaceId,
    pub nonce: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    pub in_records: Vec<InRecord>,
    pub out_faces: BTreeSet<FaceId>,
    pub expiry: SimTime,
}

impl PitEntry {
    pub fn has_face(&self, face: FaceId) -> bool {
        self.in_records.iter().any(|r| r.face == face)
    }

    pub fn has_nonce(&self, nonce: u32) -> bool {
        self.in_records.iter().any(|r| r.nonce == nonce)
    }
}

/// Pending Interest Table: at most one entry per exact name.
#[derive(Debug, Clone, Default)]
pub struct Pit {
    entries: BTreeMap<Name, PitEntry>,
}

impl Pit {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub(crate) fn get_mut(&mut self, name: &Name) -> Option<&mut PitEntry> {
        self.entries.get_mut(name)
    }

    pub(crate) fn insert(&mut self, entry: PitEntry) {
        debug_assert!(!entry.in_records.is_empty());
        self.entries.insert(entry.name.clone(), entry);
    }

    pub(crate) fn remove(&mut self, name: &Name) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    pub fn entries(&self) -> impl Iterator<Item = &PitEntry> {
        self.entries.values()
    }

    pub fn seen_nonce(&self, name: &Name, nonce: u32) -> bool {
        self.entries.get(name).is_some_and(|e| e.has_nonce(nonce))
    }

    /// Names of pending entries that `data_name` satisfies, shortest first.
    pub fn matching(&self, data_name: &Name) -> Vec<Name> {
        let mut found: Vec<Name> = data_name
            .prefixes_longest_first()
            .filter(|p| self.entries.contains_key(p))
            .collect();
        found.reverse();
        found
    }

    /// Removes and returns every entry with `expiry <= now`.
    pub(crate) fn expire(&mut self, now: SimTime) -> Vec<PitEntry> {
        let expired: Vec<Name> = self
            .entries
            .values()
            .filter(|e| e.expiry <= now)
            .map(|e| e.name.clone())
            .collect();
        expired
            .iter()
            .filter_map(|n| self.entries.remove(n))
            .collect()
    }

    /// Drops in-records on `face`; entries left empty are removed and returned.
    pub(crate) fn prune_face(&mut self, face: FaceId) -> Vec<PitEntry> {
        let mut emptied = Vec::new();
        for entry in self.entries.values_mut() {
            entry.in_records.retain(|r| r.face != face);
            entry.out_faces.remove(&face);
            if entry.in_records.is_empty() {
                emptied.push(entry.name.clone());
            }
        }
        emptied
            .iter()
            .filter_map(|n| self.entries.remove(n))
            .collect()
    }
}

/// Bounded FIFO memory of (name, nonce) pairs whose PIT entries are gone.
#[derive(Debug, Clone)]
pub struct DeadNonceLog {
    capacity: usize,
    order: VecDeque<(Name, u32)>,
    counts: HashMap<(Name, u32), usize>,
}

impl DeadNonceLog {
    pub const DEFAULT_CAPACITY: usize = 1024;

    pub fn new(capacity: usize) -> Self {
        DeadNonceLog {
            capacity,
            order: VecDeque::new(),
            counts: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, name: &Name, nonce: u32) -> bool {
        self.counts.contains_key(&(name.clone(), nonce))
    }

    pub fn insert(&mut self, name: Name, nonce: u32) {
        if self.capacity == 0 {
            return;
        }
        while self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                if let Some(c) = self.counts.get_mut(&old) {
                    *c -= 1;
                    if *c == 0 {
                        self.counts.remove(&old);
                    }
                }
            }
        }
        *self.counts.entry((name.clone(), nonce)).or_default() += 1;
        self.order.push_back((name, nonce));
    }
}

impl Default for DeadNonceLog {
    fn default() -> Self {
        DeadNonceLog::new(Self::DEFAULT_CAPACITY)
    }
}
