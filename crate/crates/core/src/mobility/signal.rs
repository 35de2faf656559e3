//! Mobility signaling carried as Interest/Data under `/mobility`.
//!
//! | message          | packet   | name                               | body                          |
//! |------------------|----------|------------------------------------|-------------------------------|
//! | ResolveRequest   | Interest | /mobility/msa/resolve/<id>         | context `target`              |
//! | NrsQuery         | Interest | /mobility/nrs/query/<id>           | context `target`              |
//! | NrsAnswer        | Data     | /mobility/nrs/query/<id>           | payload = locator or empty    |
//! | ResolveAnswer    | Data     | /mobility/msa/resolve/<id>         | payload = locator or empty    |
//! | Register         | Interest | /mobility/nrs/register/<id>        | context `name` `locator` `seq`|
//! | RegisterAck      | Data     | /mobility/nrs/register/<id>        | payload `accepted` / `stale`  |
//! | RedirectNotify   | Interest | /mobility/poa/redirect/<id>        | context `name` `locator`      |

use crate::icn::{Data, Interest, Name, Packet};

use super::nrs::NrsOutcome;

pub fn mobility_prefix() -> Name {
    Name::from_components(["mobility"]).expect("static name")
}

/// Signer identity of mobility service functions.
pub fn mobility_key() -> Name {
    mobility_prefix().child("KEY")
}

const SIGNAL_FRESHNESS_US: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignalMessage {
    ResolveRequest { target: Name },
    NrsQuery { target: Name },
    NrsAnswer { locator: Option<Name> },
    ResolveAnswer { locator: Option<Name> },
    Register { name: Name, locator: Name, seq: u64 },
    RegisterAck { outcome: NrsOutcome },
    RedirectNotify { name: Name, locator: Name },
}

fn base(path: &[&str], id: u64) -> Name {
    let mut name = mobility_prefix();
    for p in path {
        name = name.child(*p);
    }
    name.child(id.to_string())
}

fn locator_payload(locator: &Option<Name>) -> Vec<u8> {
    locator.as_ref().map(|l| l.to_string().into_bytes()).unwrap_or_default()
}

impl SignalMessage {
    pub fn to_packet(&self, id: u64, nonce: u32) -> Packet {
        let data = |path: &[&str], payload: Vec<u8>| {
            Packet::Data(Data::signed(base(path, id), payload, SIGNAL_FRESHNESS_US, mobility_key()))
        };
        match self {
            SignalMessage::ResolveRequest { target } => Packet::Interest(
                Interest::new(base(&["msa", "resolve"], id), nonce).with_context("target", target.to_string()),
            ),
            SignalMessage::NrsQuery { target } => Packet::Interest(
                Interest::new(base(&["nrs", "query"], id), nonce).with_context("target", target.to_string()),
            ),
            SignalMessage::NrsAnswer { locator } => data(&["nrs", "query"], locator_payload(locator)),
            SignalMessage::ResolveAnswer { locator } => data(&["msa", "resolve"], locator_payload(locator)),
            SignalMessage::Register { name, locator, seq } => Packet::Interest(
                Interest::new(base(&["nrs", "register"], id), nonce)
                    .with_context("name", name.to_string())
                    .with_context("locator", locator.to_string())
                    .with_context("seq", seq.to_string()),
            ),
            SignalMessage::RegisterAck { outcome } => {
                let body = match outcome {
                    NrsOutcome::Accepted => "accepted",
                    NrsOutcome::StaleSeq => "stale",
                };
                data(&["nrs", "register"], body.as_bytes().to_vec())
            }
            SignalMessage::RedirectNotify { name, locator } => Packet::Interest(
                Interest::new(base(&["poa", "redirect"], id), nonce)
                    .with_context("name", name.to_string())
                    .with_context("locator", locator.to_string()),
            ),
        }
    }

    /// Inverse of [`SignalMessage::to_packet`]; `None` for anything else.
    pub fn from_packet(packet: &Packet) -> Option<(u64, SignalMessage)> {
        let name = packet.name();
        let c = name.components();
        if c.len() != 4 || c[0] != "mobility" {
            return None;
        }
        let id: u64 = c[3].parse().ok()?;
        let kind = (c[1].as_str(), c[2].as_str());
        let msg = match packet {
            Packet::Interest(i) => {
                let ctx_name = |k: &str| i.context_value(k).and_then(|v| Name::parse(v).ok());
                match kind {
                    ("msa", "resolve") => SignalMessage::ResolveRequest { target: ctx_name("target")? },
                    ("nrs", "query") => SignalMessage::NrsQuery { target: ctx_name("target")? },
                    ("nrs", "register") => SignalMessage::Register {
                        name: ctx_name("name")?,
                        locator: ctx_name("locator")?,
                        seq: i.context_value("seq")?.parse().ok()?,
                    },
                    ("poa", "redirect") => SignalMessage::RedirectNotify {
                        name: ctx_name("name")?,
                        locator: ctx_name("locator")?,
                    },
                    _ => return None,
                }
            }
            Packet::Data(d) => {
                let locator = || -> Option<Option<Name>> {
                    if d.payload.is_empty() {
                        Some(None)
                    } else {
                        let text = std::str::from_utf8(&d.payload).ok()?;
                        Some(Some(Name::parse(text).ok()?))
                    }
                };
                match kind {
                    ("nrs", "query") => SignalMessage::NrsAnswer { locator: locator()? },
                    ("msa", "resolve") => SignalMessage::ResolveAnswer { locator: locator()? },
                    ("nrs", "register") => SignalMessage::RegisterAck {
                        outcome: match d.payload.as_slice() {
                            b"accepted" => NrsOutcome::Accepted,
                            b"stale" => NrsOutcome::StaleSeq,
                            _ => return None,
                        },
                    },
                    _ => return None,
                }
            }
        };
        Some((id, msg))
    }
}
