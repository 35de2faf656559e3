use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::icn::Name;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NrsRecord {
    pub name: Name,
    pub locator: Name,
    pub seq: u64,
    pub previous_locator: Option<Name>,
    pub registered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NrsOutcome {
    Accepted,
    StaleSeq,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0} is not registered")]
pub struct NotRegistered(pub Name);

/// Authoritative name → locator bindings, ordered per name by sequence number.
#[derive(Debug, Clone, Default)]
pub struct Nrs {
    records: BTreeMap<Name, NrsRecord>,
    // deregistrations of names that never had a record
    tombstones: BTreeMap<Name, u64>,
}

impl Nrs {
    pub fn new() -> Self {
        Nrs::default()
    }

    /// Highest sequence number seen for exactly `name`.
    pub fn current_seq(&self, name: &Name) -> Option<u64> {
        self.records
            .get(name)
            .map(|r| r.seq)
            .or_else(|| self.tombstones.get(name).copied())
    }

    pub fn record(&self, name: &Name) -> Option<&NrsRecord> {
        self.records.get(name)
    }

    pub fn records(&self) -> impl Iterator<Item = &NrsRecord> {
        self.records.values()
    }

    fn is_stale(&self, name: &Name, seq: u64) -> bool {
        self.current_seq(name).is_some_and(|cur| seq <= cur)
    }

    pub fn register(&mut self, name: Name, locator: Name, seq: u64) -> NrsOutcome {
        if self.is_stale(&name, seq) {
            return NrsOutcome::StaleSeq;
        }
        self.tombstones.remove(&name);
        let previous_locator = match self.records.get(&name) {
            Some(old) if old.locator != locator => Some(old.locator.clone()),
            Some(old) => old.previous_locator.clone(),
            None => None,
        };
        self.records.insert(
            name.clone(),
            NrsRecord {
                name,
                locator,
                seq,
                previous_locator,
                registered: true,
            },
        );
        NrsOutcome::Accepted
    }

    /// Unknown names are accepted and leave a tombstone at `seq`.
    pub fn deregister(&mut self, name: &Name, seq: u64) -> NrsOutcome {
        if self.is_stale(name, seq) {
            return NrsOutcome::StaleSeq;
        }
        match self.records.get_mut(name) {
            Some(r) => {
                r.seq = seq;
                r.registered = false;
            }
            None => {
                self.tombstones.insert(name.clone(), seq);
            }
        }
        NrsOutcome::Accepted
    }

    /// Locator of the longest registered prefix of `name`.
    pub fn resolve(&self, name: &Name) -> Result<&Name, NotRegistered> {
        name.prefixes_longest_first()
            .find_map(|p| self.records.get(&p).filter(|r| r.registered))
            .map(|r| &r.locator)
            .ok_or_else(|| NotRegistered(name.clone()))
    }

    /// Deregisters every registered name under `prefix`, bumping each seq by one.
    pub fn deregister_under(&mut self, prefix: &Name) -> Vec<Name> {
        let names: Vec<(Name, u64)> = self
            .records
            .values()
            .filter(|r| r.registered && prefix.is_prefix_of(&r.name))
            .map(|r| (r.name.clone(), r.seq))
            .collect();
        for (name, seq) in &names {
            self.deregister(name, seq + 1);
        }
        names.into_iter().map(|(n, _)| n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn ordered_updates() {
        let mut nrs = Nrs::new();
        assert_eq!(nrs.register(n("/conf/alice"), n("/poa/A"), 1), NrsOutcome::Accepted);
        assert_eq!(nrs.resolve(&n("/conf/alice")), Ok(&n("/poa/A")));

        assert_eq!(nrs.register(n("/conf/alice"), n("/poa/B"), 2), NrsOutcome::Accepted);
        assert_eq!(nrs.record(&n("/conf/alice")).unwrap().previous_locator, Some(n("/poa/A")));

        assert_eq!(nrs.register(n("/conf/alice"), n("/poa/A"), 1), NrsOutcome::StaleSeq);
        assert_eq!(nrs.resolve(&n("/conf/alice")), Ok(&n("/poa/B")));
        assert_eq!(nrs.record(&n("/conf/alice")).unwrap().seq, 2);
    }

    #[test]
    fn prefix_resolution() {
        let mut nrs = Nrs::new();
        nrs.register(n("/conf/alice"), n("/poa/B"), 1);
        assert_eq!(nrs.resolve(&n("/conf/alice/video/seg9")), Ok(&n("/poa/B")));
        assert_eq!(nrs.resolve(&n("/conf/carol")), Err(NotRegistered(n("/conf/carol"))));
    }

    #[test]
    fn deregistration() {
        let mut nrs = Nrs::new();
        nrs.register(n("/conf/alice"), n("/poa/A"), 2);
        assert_eq!(nrs.deregister(&n("/conf/alice"), 2), NrsOutcome::StaleSeq);
        assert_eq!(nrs.deregister(&n("/conf/alice"), 3), NrsOutcome::Accepted);
        assert!(nrs.resolve(&n("/conf/alice")).is_err());

        assert_eq!(nrs.deregister(&n("/conf/nobody"), 4), NrsOutcome::Accepted);
        assert_eq!(nrs.register(n("/conf/nobody"), n("/poa/A"), 4), NrsOutcome::StaleSeq);
        assert_eq!(nrs.register(n("/conf/nobody"), n("/poa/A"), 5), NrsOutcome::Accepted);
    }

    #[test]
    fn previous_locator_never_equals_locator() {
        let mut nrs = Nrs::new();
        nrs.register(n("/x"), n("/poa/A"), 1);
        nrs.register(n("/x"), n("/poa/B"), 2);
        nrs.register(n("/x"), n("/poa/B"), 3);
        let r = nrs.record(&n("/x")).unwrap();
        assert_eq!(r.previous_locator, Some(n("/poa/A")));
        assert_ne!(r.previous_locator.as_ref(), Some(&r.locator));
    }

    #[test]
    fn shorter_registered_prefix_covers_deregistered_longer_one() {
        let mut nrs = Nrs::new();
        nrs.register(n("/c"), n("/poa/A"), 1);
        nrs.register(n("/c/a"), n("/poa/B"), 1);
        nrs.deregister(&n("/c/a"), 2);
        assert_eq!(nrs.resolve(&n("/c/a/1")), Ok(&n("/poa/A")));
        assert_eq!(nrs.deregister_under(&n("/c")), vec![n("/c")]);
        assert!(nrs.resolve(&n("/c/a/1")).is_err());
    }
}
