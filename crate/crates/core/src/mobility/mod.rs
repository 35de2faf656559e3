//! Mobility slice functions: the name resolution service, the resolution
//! front-end, stale-PoA redirects and the signaling that links them.

mod msa;
mod nrs;
mod redirect;
pub mod signal;

pub use msa::{msa_resolve, Msa, ResolutionFailed};
pub use nrs::{NotRegistered, Nrs, NrsOutcome, NrsRecord};
pub use redirect::{RedirectEntry, RedirectTable};
pub use signal::{mobility_key, mobility_prefix, SignalMessage};

/// Grace period a stale point of attachment keeps redirecting, in µs.
pub const DEFAULT_REDIRECT_GRACE_US: u64 = 500_000;
