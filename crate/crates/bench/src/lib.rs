//! Shared fixtures for the criterion benches.

use icnsim::forwarder::{FaceId, Forwarder, ForwarderConfig, NextHop};
use icnsim::harness::{parse_scenario, Format, Scenario};
use icnsim::icn::{Data, Interest, Name, Packet};

pub const MAAS_DEMO: &str = include_str!("../../core/scenarios/maas_demo.toml");
pub const CONFERENCE_STATIC: &str = include_str!("../../core/scenarios/conference_static.toml");

pub fn scenario(text: &str) -> Scenario {
    parse_scenario(text, Format::Toml).expect("corpus scenario parses")
}

pub fn key() -> Name {
    Name::parse("/bench/KEY").unwrap()
}

/// `/bench/p<i % prefixes>/video/<i>`
pub fn chunk_name(i: u64, prefixes: u64) -> Name {
    Name::parse(&format!("/bench/p{}/video/{i}", i % prefixes)).unwrap()
}

pub fn interest(i: u64, prefixes: u64) -> Interest {
    Interest::new(chunk_name(i, prefixes), i as u32)
}

pub fn data(i: u64, prefixes: u64) -> Data {
    Data::signed(chunk_name(i, prefixes), vec![0xab; 1200], 1_000_000, key())
}

pub fn packets(n: u64) -> Vec<Packet> {
    (0..n)
        .flat_map(|i| [Packet::Interest(interest(i, 16)), Packet::Data(data(i, 16))])
        .collect()
}

/// A forwarder with one downstream face, one upstream face and `routes`
/// prefixes pointing upstream.
pub struct Bed {
    pub forwarder: Forwarder,
    pub down: FaceId,
    pub up: FaceId,
}

pub fn bed(routes: u64, cs_capacity_bytes: u64) -> Bed {
    let mut forwarder = Forwarder::new(ForwarderConfig {
        cs_capacity_bytes,
        ..ForwarderConfig::default()
    });
    let down = forwarder.add_face();
    let up = forwarder.add_face();
    for p in 0..routes {
        let prefix = Name::parse(&format!("/bench/p{p}")).unwrap();
        forwarder.install_fib(prefix, vec![NextHop { face: up, cost: 0 }]).unwrap();
    }
    forwarder.add_trust_anchor(key());
    Bed { forwarder, down, up }
}
