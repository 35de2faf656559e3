//! Type-length-value wire codec.
//!
//! Every element is `type (1 byte) | length (2 bytes, big endian) | value`.
//! Sub-elements appear in ascending type order and optional ones are omitted
//! when absent, so encoding is canonical: one packet, one byte string.

use thiserror::Error;

use super::name::Name;
use super::packet::{Data, Interest, Packet};

pub const T_INTEREST: u8 = 0x01;
pub const T_DATA: u8 = 0x02;
pub const T_NAME: u8 = 0x10;
pub const T_COMPONENT: u8 = 0x11;
pub const T_NONCE: u8 = 0x12;
pub const T_LIFETIME: u8 = 0x13;
pub const T_HOP_LIMIT: u8 = 0x14;
pub const T_FORWARDING_HINT: u8 = 0x15;
pub const T_CONTEXT_ENTRY: u8 = 0x16;
pub const T_STRING: u8 = 0x17;
pub const T_PAYLOAD: u8 = 0x20;
pub const T_FRESHNESS: u8 = 0x21;
pub const T_KEY_ID: u8 = 0x22;
pub const T_SIGNATURE_TAG: u8 = 0x23;

const MAX_VALUE_LEN: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("name component of {0} bytes exceeds 65535")]
    ComponentTooLong(usize),
    #[error("element 0x{typ:02x} value of {len} bytes exceeds 65535")]
    ValueTooLong { typ: u8, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedPacket {
    #[error("truncated element")]
    Truncated,
    #[error("unknown top-level type 0x{0:02x}")]
    UnknownType(u8),
    #[error("{0} trailing bytes after packet")]
    TrailingBytes(usize),
    #[error("unexpected element 0x{0:02x}")]
    UnexpectedElement(u8),
    #[error("missing required element 0x{0:02x}")]
    MissingElement(u8),
    #[error("element 0x{typ:02x} has invalid length {len}")]
    BadLength { typ: u8, len: usize },
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("invalid utf-8 in element 0x{0:02x}")]
    InvalidUtf8(u8),
}

pub fn encode(packet: &Packet) -> Result<Vec<u8>, EncodingError> {
    let mut out = Vec::new();
    match packet {
        Packet::Interest(i) => put_tlv(&mut out, T_INTEREST, &interest_value(i)?)?,
        Packet::Data(d) => put_tlv(&mut out, T_DATA, &data_value(d)?)?,
    }
    Ok(out)
}

/// Encoded size in bytes. Used by links for serialization delay.
pub fn encoded_len(packet: &Packet) -> Result<usize, EncodingError> {
    encode(packet).map(|b| b.len())
}

pub(crate) fn put_tlv(out: &mut Vec<u8>, typ: u8, value: &[u8]) -> Result<(), EncodingError> {
    if value.len() > MAX_VALUE_LEN {
        return Err(EncodingError::ValueTooLong {
            typ,
            len: value.len(),
        });
    }
    out.push(typ);
    out.extend_from_slice(&(value.len() as u16).to_be_bytes());
    out.extend_from_slice(value);
    Ok(())
}

pub(crate) fn put_name(out: &mut Vec<u8>, typ: u8, name: &Name) -> Result<(), EncodingError> {
    let mut value = Vec::new();
    for c in name.components() {
        if c.len() > MAX_VALUE_LEN {
            return Err(EncodingError::ComponentTooLong(c.len()));
        }
        put_tlv(&mut value, T_COMPONENT, c.as_bytes())?;
    }
    if typ == T_NAME {
        put_tlv(out, T_NAME, &value)
    } else {
        // hint and key id wrap a nested Name element
        let mut nested = Vec::new();
        put_tlv(&mut nested, T_NAME, &value)?;
        put_tlv(out, typ, &nested)
    }
}

fn interest_value(i: &Interest) -> Result<Vec<u8>, EncodingError> {
    let mut v = Vec::new();
    put_name(&mut v, T_NAME, &i.name)?;
    put_tlv(&mut v, T_NONCE, &i.nonce.to_be_bytes())?;
    put_tlv(&mut v, T_LIFETIME, &i.lifetime_us.to_be_bytes())?;
    put_tlv(&mut v, T_HOP_LIMIT, &[i.hop_limit])?;
    if let Some(hint) = &i.forwarding_hint {
        put_name(&mut v, T_FORWARDING_HINT, hint)?;
    }
    for (key, value) in &i.context {
        let mut entry = Vec::new();
        put_tlv(&mut entry, T_STRING, key.as_bytes())?;
        put_tlv(&mut entry, T_STRING, value.as_bytes())?;
        put_tlv(&mut v, T_CONTEXT_ENTRY, &entry)?;
    }
    Ok(v)
}

fn data_value(d: &Data) -> Result<Vec<u8>, EncodingError> {
    let mut v = Vec::new();
    put_name(&mut v, T_NAME, &d.name)?;
    put_tlv(&mut v, T_PAYLOAD, &d.payload)?;
    put_tlv(&mut v, T_FRESHNESS, &d.freshness_us.to_be_bytes())?;
    put_name(&mut v, T_KEY_ID, &d.key_id)?;
    put_tlv(&mut v, T_SIGNATURE_TAG, &d.signature_tag)?;
    Ok(v)
}

pub fn decode(bytes: &[u8]) -> Result<Packet, MalformedPacket> {
    let mut reader = Reader::new(bytes);
    let (typ, value) = reader.next_tlv()?.ok_or(MalformedPacket::Truncated)?;
    if !reader.is_empty() {
        return Err(MalformedPacket::TrailingBytes(reader.remaining()));
    }
    match typ {
        T_INTEREST => decode_interest(value).map(Packet::Interest),
        T_DATA => decode_data(value).map(Packet::Data),
        other => Err(MalformedPacket::UnknownType(other)),
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub(crate) fn peek_type(&self) -> Option<u8> {
        self.buf.first().copied()
    }

    /// `Ok(None)` at end of input.
    pub(crate) fn next_tlv(&mut self) -> Result<Option<(u8, &'a [u8])>, MalformedPacket> {
        if self.buf.is_empty() {
            return Ok(None);
        }
        if self.buf.len() < 3 {
            return Err(MalformedPacket::Truncated);
        }
        let typ = self.buf[0];
        let len = u16::from_be_bytes([self.buf[1], self.buf[2]]) as usize;
        let rest = &self.buf[3..];
        if rest.len() < len {
            return Err(MalformedPacket::Truncated);
        }
        let (value, tail) = rest.split_at(len);
        self.buf = tail;
        Ok(Some((typ, value)))
    }

    /// Reads the next element only if it has type `typ`.
    pub(crate) fn optional(&mut self, typ: u8) -> Result<Option<&'a [u8]>, MalformedPacket> {
        if self.peek_type() == Some(typ) {
            Ok(self.next_tlv()?.map(|(_, v)| v))
        } else {
            Ok(None)
        }
    }

    pub(crate) fn required(&mut self, typ: u8) -> Result<&'a [u8], MalformedPacket> {
        match self.peek_type() {
            Some(t) if t == typ => Ok(self.next_tlv()?.map(|(_, v)| v).unwrap_or_default()),
            Some(_) => {
                // distinguish "wrong order / unknown" from "truncated"
                let (t, _) = self.next_tlv()?.ok_or(MalformedPacket::Truncated)?;
                if t < typ {
                    Err(MalformedPacket::UnexpectedElement(t))
                } else {
                    Err(MalformedPacket::MissingElement(typ))
                }
            }
            None => Err(MalformedPacket::MissingElement(typ)),
        }
    }

    pub(crate) fn finish(mut self) -> Result<(), MalformedPacket> {
        match self.next_tlv()? {
            None => Ok(()),
            Some((t, _)) => Err(MalformedPacket::UnexpectedElement(t)),
        }
    }
}

fn fixed<const N: usize>(typ: u8, value: &[u8]) -> Result<[u8; N], MalformedPacket> {
    value.try_into().map_err(|_| MalformedPacket::BadLength {
        typ,
        len: value.len(),
    })
}

fn utf8(typ: u8, value: &[u8]) -> Result<String, MalformedPacket> {
    String::from_utf8(value.to_vec()).map_err(|_| MalformedPacket::InvalidUtf8(typ))
}

/// Decodes the value of a Name element (a run of Component elements).
pub(crate) fn decode_name_value(value: &[u8]) -> Result<Name, MalformedPacket> {
    let mut r = Reader::new(value);
    let mut components = Vec::new();
    while let Some((t, v)) = r.next_tlv()? {
        if t != T_COMPONENT {
            return Err(MalformedPacket::UnexpectedElement(t));
        }
        components.push(utf8(T_COMPONENT, v)?);
    }
    Name::from_components(components).map_err(|e| MalformedPacket::InvalidName(e.to_string()))
}

/// Decodes a wrapper whose whole value is exactly one nested Name element.
pub(crate) fn decode_nested_name(value: &[u8]) -> Result<Name, MalformedPacket> {
    let mut r = Reader::new(value);
    let inner = r.required(T_NAME)?;
    r.finish()?;
    decode_name_value(inner)
}

fn decode_interest(value: &[u8]) -> Result<Interest, MalformedPacket> {
    let mut r = Reader::new(value);
    let name = decode_name_value(r.required(T_NAME)?)?;
    let nonce = u32::from_be_bytes(fixed(T_NONCE, r.required(T_NONCE)?)?);
    let lifetime_us = u64::from_be_bytes(fixed(T_LIFETIME, r.required(T_LIFETIME)?)?);
    let [hop_limit] = fixed(T_HOP_LIMIT, r.required(T_HOP_LIMIT)?)?;
    let forwarding_hint = match r.optional(T_FORWARDING_HINT)? {
        Some(v) => Some(decode_nested_name(v)?),
        None => None,
    };
    let mut context = Vec::new();
    while let Some(entry) = r.optional(T_CONTEXT_ENTRY)? {
        let mut er = Reader::new(entry);
        let key = utf8(T_STRING, er.required(T_STRING)?)?;
        let val = utf8(T_STRING, er.required(T_STRING)?)?;
        er.finish()?;
        context.push((key, val));
    }
    r.finish()?;
    Ok(Interest {
        name,
        nonce,
        lifetime_us,
        hop_limit,
        forwarding_hint,
        context,
    })
}

fn decode_data(value: &[u8]) -> Result<Data, MalformedPacket> {
    let mut r = Reader::new(value);
    let name = decode_name_value(r.required(T_NAME)?)?;
    let payload = r.required(T_PAYLOAD)?.to_vec();
    let freshness_us = u64::from_be_bytes(fixed(T_FRESHNESS, r.required(T_FRESHNESS)?)?);
    let key_id = decode_nested_name(r.required(T_KEY_ID)?)?;
    let signature_tag = r.required(T_SIGNATURE_TAG)?.to_vec();
    r.finish()?;
    Ok(Data {
        name,
        payload,
        freshness_us,
        key_id,
        signature_tag,
    })
}
