use std::collections::BTreeSet;

use crate::icn::codec::{decode_nested_name, put_name, EncodingError, MalformedPacket, Reader, T_NAME};
use crate::icn::Name;

pub const T_GATEWAY_LOCATOR: u8 = 0x30;
pub const T_NAME_SPACE: u8 = 0x31;
pub const T_TRUST_ANCHOR: u8 = 0x32;

/// What a UE application learns when it discovers a conference slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscoveryResponse {
    pub gateway_locator: Name,
    pub name_space: Name,
    pub trust_anchors: BTreeSet<Name>,
}

impl DiscoveryResponse {
    pub fn encode(&self) -> Result<Vec<u8>, EncodingError> {
        let mut out = Vec::new();
        put_name(&mut out, T_GATEWAY_LOCATOR, &self.gateway_locator)?;
        put_name(&mut out, T_NAME_SPACE, &self.name_space)?;
        for anchor in &self.trust_anchors {
            put_name(&mut out, T_TRUST_ANCHOR, anchor)?;
        }
        Ok(out)
    }

    /// An empty payload is the NotFound answer and decodes to `None`.
    pub fn decode(payload: &[u8]) -> Result<Option<DiscoveryResponse>, MalformedPacket> {
        if payload.is_empty() {
            return Ok(None);
        }
        let mut r = Reader::new(payload);
        let gateway_locator = decode_nested_name(r.required(T_GATEWAY_LOCATOR)?)?;
        let name_space = decode_nested_name(r.required(T_NAME_SPACE)?)?;
        let mut trust_anchors = BTreeSet::new();
        while let Some(v) = r.optional(T_TRUST_ANCHOR)? {
            trust_anchors.insert(decode_nested_name(v)?);
        }
        r.finish()?;
        Ok(Some(DiscoveryResponse {
            gateway_locator,
            name_space,
            trust_anchors,
        }))
    }
}

/// Roster payload: the producer prefixes of current participants as Name elements.
pub fn encode_roster<'a>(prefixes: impl IntoIterator<Item = &'a Name>) -> Result<Vec<u8>, EncodingError> {
    let mut out = Vec::new();
    for p in prefixes {
        put_name(&mut out, T_NAME, p)?;
    }
    Ok(out)
}

pub fn decode_roster(payload: &[u8]) -> Result<Vec<Name>, MalformedPacket> {
    let mut r = Reader::new(payload);
    let mut out = Vec::new();
    while let Some(v) = r.optional(T_NAME)? {
        out.push(crate::icn::codec::decode_name_value(v)?);
    }
    r.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn layout_is_nested_tlv() {
        let r = DiscoveryResponse {
            gateway_locator: n("/c/gw/3"),
            name_space: n("/c"),
            trust_anchors: [n("/c/KEY")].into_iter().collect(),
        };
        let bytes = r.encode().unwrap();
        assert_eq!(bytes[0], T_GATEWAY_LOCATOR);
        // 0x30 len | 0x10 len | 0x11 00 01 'c' ...
        assert_eq!(bytes[3], T_NAME);
        assert_eq!(DiscoveryResponse::decode(&bytes).unwrap(), Some(r));
        assert_eq!(DiscoveryResponse::decode(&[]).unwrap(), None);
    }

    #[test]
    fn missing_namespace_is_malformed() {
        let mut out = Vec::new();
        put_name(&mut out, T_GATEWAY_LOCATOR, &n("/g")).unwrap();
        assert!(DiscoveryResponse::decode(&out).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(
            gw in prop::collection::vec("[a-z0-9]{1,6}", 1..4),
            ns in prop::collection::vec("[a-z0-9]{1,6}", 1..3),
            anchors in prop::collection::btree_set(prop::collection::vec("[A-Za-z]{1,5}", 1..3), 0..4),
        ) {
            let r = DiscoveryResponse {
                gateway_locator: Name::from_components(gw).unwrap(),
                name_space: Name::from_components(ns).unwrap(),
                trust_anchors: anchors.into_iter().map(|a| Name::from_components(a).unwrap()).collect(),
            };
            prop_assert_eq!(DiscoveryResponse::decode(&r.encode().unwrap()).unwrap(), Some(r));
        }

        #[test]
        fn roster_round_trip(names in prop::collection::vec(prop::collection::vec("[a-z]{1,4}", 1..3), 0..5)) {
            let names: Vec<Name> = names.into_iter().map(|c| Name::from_components(c).unwrap()).collect();
            prop_assert_eq!(decode_roster(&encode_roster(&names).unwrap()).unwrap(), names);
        }
    }
}
