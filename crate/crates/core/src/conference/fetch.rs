use crate::icn::{Interest, Name};
use crate::SimTime;

/// Retransmissions of one chunk before it is declared lost.
pub const MAX_RETRANSMISSIONS: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outstanding {
    pub seq: u64,
    pub name: Name,
    /// 0 for the first transmission.
    pub attempt: u32,
    pub first_sent: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeoutOutcome {
    /// The timer belongs to an attempt that already finished.
    Stale,
    Retransmit(Interest),
    Lost { seq: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Received {
    pub seq: u64,
    pub latency_us: u64,
}

/// Consumer side of one stream: sequential, paced, one Interest in flight.
#[derive(Debug, Clone)]
pub struct FetchFlow {
    pub id: String,
    pub target: Name,
    pub media: String,
    pub rate: u64,
    pub limit: Option<u64>,
    pub start: SimTime,
    pub lifetime_us: u64,
    pub hop_limit: u8,
    next_seq: u64,
    outstanding: Option<Outstanding>,
}

impl FetchFlow {
    pub fn new(id: String, target: Name, media: String, rate: u64, limit: Option<u64>, start: SimTime) -> Self {
        FetchFlow {
            id,
            target,
            media,
            rate: rate.max(1),
            limit,
            start,
            lifetime_us: crate::icn::DEFAULT_INTEREST_LIFETIME_US,
            hop_limit: crate::icn::DEFAULT_HOP_LIMIT,
            next_seq: 0,
            outstanding: None,
        }
    }

    pub fn chunk_name(&self, seq: u64) -> Name {
        chunk_name(&self.target, &self.media, seq)
    }

    pub fn outstanding(&self) -> Option<&Outstanding> {
        self.outstanding.as_ref()
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn finished(&self) -> bool {
        self.outstanding.is_none() && self.limit.is_some_and(|l| self.next_seq >= l)
    }

    /// Earliest time the next chunk may be requested, if any remain.
    pub fn next_due(&self, now: SimTime) -> Option<SimTime> {
        if self.outstanding.is_some() || self.finished() {
            return None;
        }
        let paced = self.start + self.next_seq.saturating_mul(1_000_000) / self.rate;
        Some(paced.max(now))
    }

    fn interest(&self, name: Name, nonce: u32) -> Interest {
        Interest::new(name, nonce)
            .with_lifetime(self.lifetime_us)
            .with_hop_limit(self.hop_limit)
    }

    /// First transmission of the next chunk. `None` when one is in flight or the stream ended.
    pub fn send_next(&mut self, now: SimTime, nonce: u32) -> Option<Interest> {
        if self.outstanding.is_some() || self.finished() {
            return None;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let name = self.chunk_name(seq);
        self.outstanding = Some(Outstanding {
            seq,
            name: name.clone(),
            attempt: 0,
            first_sent: now,
        });
        Some(self.interest(name, nonce))
    }

    /// Latency counts from the first transmission of the chunk.
    pub fn on_data(&mut self, name: &Name, now: SimTime) -> Option<Received> {
        match &self.outstanding {
            Some(o) if &o.name == name => {
                let r = Received {
                    seq: o.seq,
                    latency_us: now - o.first_sent,
                };
                self.outstanding = None;
                Some(r)
            }
            _ => None,
        }
    }

    pub fn on_timeout(&mut self, seq: u64, attempt: u32, nonce: u32) -> TimeoutOutcome {
        let Some(o) = &mut self.outstanding else {
            return TimeoutOutcome::Stale;
        };
        if o.seq != seq || o.attempt != attempt {
            return TimeoutOutcome::Stale;
        }
        if o.attempt >= MAX_RETRANSMISSIONS {
            self.outstanding = None;
            return TimeoutOutcome::Lost { seq };
        }
        o.attempt += 1;
        let name = o.name.clone();
        TimeoutOutcome::Retransmit(self.interest(name, nonce))
    }
}

pub fn chunk_name(prefix: &Name, media: &str, seq: u64) -> Name {
    prefix.child(media).child(seq.to_string())
}

/// Splits `<prefix>/<media>/<seq>` into media and seq.
pub fn parse_chunk_name(prefix: &Name, name: &Name) -> Option<(String, u64)> {
    if !prefix.is_prefix_of(name) || name.len() != prefix.len() + 2 {
        return None;
    }
    let c = name.components();
    let seq = c[prefix.len() + 1].parse().ok()?;
    Some((c[prefix.len()].clone(), seq))
}
