use std::collections::BTreeMap;

use crate::icn::Name;

use super::FaceId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NextHop {
    pub face: FaceId,
    pub cost: u32,
}

/// A route. Nexthops are kept sorted by (cost, face) so the preferred one is first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    nexthops: Vec<NextHop>,
}

impl FibEntry {
    /// `None` when `nexthops` is empty or names a face twice.
    pub fn new(prefix: Name, mut nexthops: Vec<NextHop>) -> Option<Self> {
        if nexthops.is_empty() {
            return None;
        }
        nexthops.sort_by_key(|h| (h.cost, h.face));
        let mut faces: Vec<FaceId> = nexthops.iter().map(|h| h.face).collect();
        faces.sort();
        faces.dedup();
        if faces.len() != nexthops.len() {
            return None;
        }
        Some(FibEntry { prefix, nexthops })
    }

    pub fn nexthops(&self) -> &[NextHop] {
        &self.nexthops
    }

    /// Lowest-cost nexthop, lowest face id on ties, skipping `exclude`.
    pub fn best_nexthop(&self, exclude: FaceId) -> Option<NextHop> {
        self.nexthops.iter().copied().find(|h| h.face != exclude)
    }
}

/// Exact-prefix route table with longest-prefix lookup.
#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: BTreeMap<Name, FibEntry>,
}

impl Fib {
    pub fn new() -> Self {
        Fib::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Replaces any entry with the same prefix.
    pub fn insert(&mut self, entry: FibEntry) -> Option<FibEntry> {
        self.entries.insert(entry.prefix.clone(), entry)
    }

    pub fn remove(&mut self, prefix: &Name) -> Option<FibEntry> {
        self.entries.remove(prefix)
    }

    pub fn get(&self, prefix: &Name) -> Option<&FibEntry> {
        self.entries.get(prefix)
    }

    /// Probes every prefix of `name`, longest first. At most `name.len()` map lookups.
    pub fn lookup(&self, name: &Name) -> Option<&FibEntry> {
        name.prefixes_longest_first().find_map(|p| self.entries.get(&p))
    }

    pub fn entries(&self) -> impl Iterator<Item = &FibEntry> {
        self.entries.values()
    }

    /// Strips `face` from every entry; entries left without nexthops are dropped.
    /// Returns the prefixes that were dropped.
    pub fn remove_face(&mut self, face: FaceId) -> Vec<Name> {
        let mut emptied = Vec::new();
        for entry in self.entries.values_mut() {
            entry.nexthops.retain(|h| h.face != face);
            if entry.nexthops.is_empty() {
                emptied.push(entry.prefix.clone());
            }
        }
        for p in &emptied {
            self.entries.remove(p);
        }
        emptied
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    fn route(prefix: &str, face: u32) -> FibEntry {
        FibEntry::new(n(prefix), vec![NextHop { face: FaceId(face), cost: 0 }]).unwrap()
    }

    #[test]
    fn longest_prefix_wins() {
        let mut fib = Fib::new();
        fib.insert(route("/a", 1));
        fib.insert(route("/a/b", 2));
        assert_eq!(fib.lookup(&n("/a/b/c")).unwrap().prefix, n("/a/b"));
        assert_eq!(fib.lookup(&n("/a/x")).unwrap().prefix, n("/a"));
        assert!(fib.lookup(&n("/x")).is_none());
    }

    #[test]
    fn entry_validation_and_ordering() {
        assert!(FibEntry::new(n("/a"), vec![]).is_none());
        let dup = vec![NextHop { face: FaceId(1), cost: 0 }, NextHop { face: FaceId(1), cost: 5 }];
        assert!(FibEntry::new(n("/a"), dup).is_none());

        let e = FibEntry::new(
            n("/a"),
            vec![
                NextHop { face: FaceId(9), cost: 1 },
                NextHop { face: FaceId(4), cost: 2 },
                NextHop { face: FaceId(3), cost: 1 },
            ],
        )
        .unwrap();
        assert_eq!(e.best_nexthop(FaceId(0)).unwrap().face, FaceId(3));
        assert_eq!(e.best_nexthop(FaceId(3)).unwrap().face, FaceId(9));
    }

    #[test]
    fn removing_face_drops_emptied_entries() {
        let mut fib = Fib::new();
        fib.insert(route("/a", 1));
        fib.insert(
            FibEntry::new(
                n("/b"),
                vec![NextHop { face: FaceId(1), cost: 0 }, NextHop { face: FaceId(2), cost: 0 }],
            )
            .unwrap(),
        );
        assert_eq!(fib.remove_face(FaceId(1)), vec![n("/a")]);
        assert_eq!(fib.len(), 1);
        assert_eq!(fib.get(&n("/b")).unwrap().nexthops().len(), 1);
    }
}
