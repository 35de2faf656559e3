use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use super::name::Name;

pub const DEFAULT_INTEREST_LIFETIME_US: u64 = 4_000_000;
pub const DEFAULT_HOP_LIMIT: u8 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interest {
    pub name: Name,
    pub nonce: u32,
    pub lifetime_us: u64,
    pub hop_limit: u8,
    /// Locator prefix used for late binding. The name itself is never rewritten.
    pub forwarding_hint: Option<Name>,
    /// Opaque key/value metadata for service functions.
    pub context: Vec<(String, String)>,
}

impl Interest {
    pub fn new(name: Name, nonce: u32) -> Self {
        Interest {
            name,
            nonce,
            lifetime_us: DEFAULT_INTEREST_LIFETIME_US,
            hop_limit: DEFAULT_HOP_LIMIT,
            forwarding_hint: None,
            context: Vec::new(),
        }
    }

    pub fn with_lifetime(mut self, lifetime_us: u64) -> Self {
        self.lifetime_us = lifetime_us;
        self
    }

    pub fn with_hop_limit(mut self, hop_limit: u8) -> Self {
        self.hop_limit = hop_limit;
        self
    }

    pub fn with_hint(mut self, hint: Name) -> Self {
        self.forwarding_hint = Some(hint);
        self
    }

    pub fn with_context(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.context.push((key.into(), value.into()));
        self
    }

    pub fn context_value(&self, key: &str) -> Option<&str> {
        self.context
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Data {
    pub name: Name,
    pub payload: Vec<u8>,
    pub freshness_us: u64,
    pub key_id: Name,
    pub signature_tag: Vec<u8>,
}

impl Data {
    /// Builds a Data whose tag is computed with [`signature_tag_of`].
    pub fn signed(name: Name, payload: Vec<u8>, freshness_us: u64, key_id: Name) -> Self {
        let signature_tag = signature_tag_of(&name, &payload, &key_id);
        Data {
            name,
            payload,
            freshness_us,
            key_id,
            signature_tag,
        }
    }

    pub fn satisfies(&self, interest: &Interest) -> bool {
        interest.name.is_prefix_of(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Interest(Interest),
    Data(Data),
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
        }
    }
}

impl From<Interest> for Packet {
    fn from(i: Interest) -> Self {
        Packet::Interest(i)
    }
}

impl From<Data> for Packet {
    fn from(d: Data) -> Self {
        Packet::Data(d)
    }
}

/// SHA-256 over the length-prefixed concatenation of name text, payload and
/// signer identity. Stands in for a signature: binding, not secrecy.
pub fn signature_tag_of(name: &Name, payload: &[u8], key_id: &Name) -> Vec<u8> {
    let mut hasher = Sha256::new();
    for part in [name.to_string().as_bytes(), payload, key_id.to_string().as_bytes()] {
        hasher.update((part.len() as u64).to_be_bytes());
        hasher.update(part);
    }
    hasher.finalize().to_vec()
}

/// Provenance check: signer is a trust anchor and the tag matches.
pub fn verify_provenance(data: &Data, trust_anchors: &BTreeSet<Name>) -> bool {
    trust_anchors.contains(&data.key_id)
        && data.signature_tag == signature_tag_of(&data.name, &data.payload, &data.key_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn tag_is_deterministic_and_payload_sensitive() {
        let a = signature_tag_of(&n("/a"), b"x", &n("/k"));
        assert_eq!(a, signature_tag_of(&n("/a"), b"x", &n("/k")));
        assert_ne!(a, signature_tag_of(&n("/a"), b"y", &n("/k")));
        assert_ne!(a, signature_tag_of(&n("/a"), b"x", &n("/k2")));
        // length prefixes keep field boundaries unambiguous
        assert_ne!(
            signature_tag_of(&n("/a"), b"/b", &n("/k")),
            signature_tag_of(&n("/a/b"), b"", &n("/k"))
        );
    }

    #[test]
    fn provenance_requires_anchor_and_valid_tag() {
        let anchors: BTreeSet<Name> = [n("/k")].into();
        let good = Data::signed(n("/a"), b"x".to_vec(), 0, n("/k"));
        assert!(verify_provenance(&good, &anchors));

        let stranger = Data::signed(n("/a"), b"x".to_vec(), 0, n("/other"));
        assert!(!verify_provenance(&stranger, &anchors));

        let mut forged = good.clone();
        forged.payload = b"evil".to_vec();
        assert!(!verify_provenance(&forged, &anchors));
    }

    #[test]
    fn satisfaction_is_prefix_match() {
        let d = Data::signed(n("/a/b/c"), vec![], 0, n("/k"));
        assert!(d.satisfies(&Interest::new(n("/a/b"), 1)));
        assert!(d.satisfies(&Interest::new(n("/a/b/c"), 1)));
        assert!(!d.satisfies(&Interest::new(n("/a/b/c/d"), 1)));
    }
}
