//! Names, Interest/Data packets and their wire codec.

pub mod codec;
pub mod name;
pub mod packet;

pub use codec::{decode, encode, encoded_len, EncodingError, MalformedPacket};
pub use name::{name_is_prefix, Name, NameError};
pub use packet::{
    signature_tag_of, verify_provenance, Data, Interest, Packet, DEFAULT_HOP_LIMIT,
    DEFAULT_INTEREST_LIFETIME_US,
};
