use thiserror::Error;

use crate::icn::{Interest, Name};

use super::nrs::Nrs;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolutionFailed {
    #[error("{0} is not registered")]
    NotRegistered(Name),
    #[error("{0} already carries a forwarding hint")]
    AlreadyBound(Name),
}

/// Mobility service agent: the resolution front-end other slices call.
#[derive(Debug, Clone, Default)]
pub struct Msa {
    resolutions: u64,
    signaling_pairs: u64,
}

impl Msa {
    pub fn new() -> Self {
        Msa::default()
    }

    /// Resolution calls handled so far.
    pub fn resolutions(&self) -> u64 {
        self.resolutions
    }

    /// Request/response pairs exchanged with callers.
    pub fn signaling_pairs(&self) -> u64 {
        self.signaling_pairs
    }

    /// Counts one incoming resolution request.
    pub fn begin(&mut self, interest: &Interest) -> Result<(), ResolutionFailed> {
        if interest.forwarding_hint.is_some() {
            return Err(ResolutionFailed::AlreadyBound(interest.name.clone()));
        }
        self.resolutions += 1;
        self.signaling_pairs += 1;
        Ok(())
    }

    /// Binds the answer from the NRS onto the Interest. The name is untouched.
    pub fn complete(&self, interest: &Interest, locator: Option<Name>) -> Result<Interest, ResolutionFailed> {
        match locator {
            Some(l) => Ok(interest.clone().with_hint(l)),
            None => Err(ResolutionFailed::NotRegistered(interest.name.clone())),
        }
    }

    /// Local form of the request path: begin, query the NRS, complete.
    pub fn resolve(&mut self, nrs: &Nrs, interest: &Interest) -> Result<Interest, ResolutionFailed> {
        self.begin(interest)?;
        let locator = nrs.resolve(&interest.name).ok().cloned();
        self.complete(interest, locator)
    }
}

pub fn msa_resolve(msa: &mut Msa, nrs: &Nrs, interest: &Interest) -> Result<Interest, ResolutionFailed> {
    msa.resolve(nrs, interest)
}
