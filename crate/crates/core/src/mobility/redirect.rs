use std::collections::BTreeMap;

use crate::icn::Name;
use crate::SimTime;

/// Held at a stale point of attachment: Interests for `name` get the new
/// locator as forwarding hint until `expiry`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedirectEntry {
    pub name: Name,
    pub new_locator: Name,
    pub expiry: SimTime,
}

#[derive(Debug, Clone, Default)]
pub struct RedirectTable {
    entries: BTreeMap<Name, RedirectEntry>,
}

impl RedirectTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn install(&mut self, entry: RedirectEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }

    /// Locator of the longest live entry covering `name`.
    pub fn lookup(&self, name: &Name, now: SimTime) -> Option<&Name> {
        name.prefixes_longest_first()
            .find_map(|p| self.entries.get(&p).filter(|e| e.expiry > now))
            .map(|e| &e.new_locator)
    }

    pub fn expire(&mut self, now: SimTime) -> Vec<RedirectEntry> {
        let dead: Vec<Name> = self
            .entries
            .values()
            .filter(|e| e.expiry <= now)
            .map(|e| e.name.clone())
            .collect();
        dead.iter().filter_map(|n| self.entries.remove(n)).collect()
    }

    /// Removes entries whose name lies under `prefix`.
    pub fn remove_under(&mut self, prefix: &Name) -> usize {
        let before = self.entries.len();
        self.entries.retain(|n, _| !prefix.is_prefix_of(n));
        before - self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = &RedirectEntry> {
        self.entries.values()
    }
}
