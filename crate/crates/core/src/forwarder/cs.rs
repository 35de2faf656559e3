use std::collections::BTreeMap;

use crate::icn::{Data, Name};
use crate::SimTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsEntry {
    pub data: Data,
    pub inserted_at: SimTime,
}

impl CsEntry {
    pub fn is_fresh(&self, now: SimTime) -> bool {
        self.inserted_at.saturating_add(self.data.freshness_us) > now
    }
}

/// LRU content store bounded by total payload bytes.
#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: u64,
    used: u64,
    clock: u64,
    entries: BTreeMap<Name, (CsEntry, u64)>,
    recency: BTreeMap<u64, Name>,
}

impl ContentStore {
    pub fn new(capacity_bytes: u64) -> Self {
        ContentStore {
            capacity: capacity_bytes,
            used: 0,
            clock: 0,
            entries: BTreeMap::new(),
            recency: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used_bytes(&self) -> u64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.entries.contains_key(name)
    }

    /// Names from least to most recently used.
    pub fn lru_order(&self) -> Vec<Name> {
        self.recency.values().cloned().collect()
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// First fresh entry whose name extends `prefix`; refreshes its recency.
    /// Stale entries met along the way are evicted.
    pub fn lookup(&mut self, prefix: &Name, now: SimTime) -> Option<Data> {
        let candidates: Vec<Name> = self
            .entries
            .range(prefix.clone()..)
            .take_while(|(n, _)| prefix.is_prefix_of(n))
            .map(|(n, _)| n.clone())
            .collect();
        for name in candidates {
            let fresh = self.entries[&name].0.is_fresh(now);
            if !fresh {
                self.remove(&name);
                continue;
            }
            let t = self.tick();
            let (entry, stamp) = self.entries.get_mut(&name).expect("present");
            self.recency.remove(stamp);
            *stamp = t;
            self.recency.insert(t, name);
            return Some(entry.data.clone());
        }
        None
    }

    pub fn insert(&mut self, data: Data, now: SimTime) {
        let size = data.payload.len() as u64;
        if size > self.capacity {
            return;
        }
        self.remove(&data.name);
        while self.used + size > self.capacity {
            let Some((_, victim)) = self.recency.pop_first() else {
                break;
            };
            if let Some((e, _)) = self.entries.remove(&victim) {
                self.used -= e.data.payload.len() as u64;
            }
        }
        let t = self.tick();
        self.used += size;
        self.recency.insert(t, data.name.clone());
        self.entries.insert(
            data.name.clone(),
            (
                CsEntry {
                    data,
                    inserted_at: now,
                },
                t,
            ),
        );
    }

    pub fn remove(&mut self, name: &Name) -> Option<CsEntry> {
        let (entry, stamp) = self.entries.remove(name)?;
        self.recency.remove(&stamp);
        self.used -= entry.data.payload.len() as u64;
        Some(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    fn data(name: &str, size: usize, freshness: u64) -> Data {
        Data::signed(n(name), vec![0; size], freshness, n("/k"))
    }

    #[test]
    fn evicts_least_recently_used_to_fit() {
        let mut cs = ContentStore::new(300);
        cs.insert(data("/a", 100, 1000), 0);
        cs.insert(data("/b", 100, 1000), 0);
        cs.insert(data("/c", 100, 1000), 0);
        assert!(cs.lookup(&n("/a"), 1).is_some()); // a becomes most recent
        cs.insert(data("/d", 100, 1000), 2);
        assert!(!cs.contains(&n("/b")));
        assert_eq!(cs.lru_order(), vec![n("/c"), n("/a"), n("/d")]);
        assert_eq!(cs.used_bytes(), 300);
    }

    #[test]
    fn stale_entries_are_not_served() {
        let mut cs = ContentStore::new(1000);
        cs.insert(data("/a", 10, 5), 100);
        assert!(cs.lookup(&n("/a"), 104).is_some());
        assert!(cs.lookup(&n("/a"), 105).is_none());
        assert!(cs.is_empty());
    }

    #[test]
    fn prefix_lookup_and_oversized_items() {
        let mut cs = ContentStore::new(50);
        cs.insert(data("/a/b/1", 10, 100), 0);
        assert_eq!(cs.lookup(&n("/a/b"), 0).unwrap().name, n("/a/b/1"));
        assert!(cs.lookup(&n("/a/c"), 0).is_none());
        cs.insert(data("/huge", 51, 100), 0);
        assert!(!cs.contains(&n("/huge")));
    }

    #[test]
    fn reinsert_replaces_without_double_counting() {
        let mut cs = ContentStore::new(100);
        cs.insert(data("/a", 40, 100), 0);
        cs.insert(data("/a", 60, 100), 1);
        assert_eq!(cs.used_bytes(), 60);
        assert_eq!(cs.len(), 1);
    }
}
