use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::SimTime;

/// One line of the JSONL trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: SimTime,
    pub node: String,
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    Step {
        step: u8,
        label: String,
    },
    ActionFailed {
        action: String,
        reason: String,
    },
    SliceActive {
        slice: u32,
        service: String,
        name_space: String,
        vnfs: usize,
    },
    SliceRules {
        slice: u32,
        fib_rules: usize,
        resolution_rules: usize,
        control_messages: u64,
    },
    SliceTornDown {
        slice: u32,
        name_space: String,
    },
    VnfPlaced {
        slice: u32,
        vnf: u32,
        vnf_kind: String,
        cpu: u64,
        storage: u64,
        cs_capacity: u64,
        cpu_used: u64,
        cpu_capacity: u64,
        storage_used: u64,
        storage_capacity: u64,
    },
    VnfRemoved {
        slice: u32,
        vnf: u32,
        cpu_used: u64,
        storage_used: u64,
    },
    UeAttach {
        ue: String,
        poa: String,
    },
    UeDetach {
        ue: String,
        poa: String,
        pit_pruned: usize,
    },
    Forward {
        vnf: u32,
        in_face: u32,
        out_face: u32,
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hint: Option<String>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        redirected: bool,
    },
    DataSent {
        vnf: u32,
        face: u32,
        name: String,
    },
    CacheHit {
        vnf: u32,
        name: String,
    },
    Aggregated {
        vnf: u32,
        name: String,
    },
    ResolutionInvoked {
        vnf: u32,
        name: String,
    },
    ResolutionAnswer {
        vnf: u32,
        name: String,
        locator: Option<String>,
    },
    PitExpired {
        vnf: u32,
        name: String,
    },
    Drop {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vnf: Option<u32>,
        reason: String,
        name: String,
    },
    Signal {
        msg: String,
        id: u64,
        from: u32,
        to: u32,
        nrs: bool,
    },
    MsaResolve {
        name: String,
    },
    NrsResolve {
        name: String,
        locator: Option<String>,
    },
    NrsRegister {
        name: String,
        locator: String,
        seq: u64,
        accepted: bool,
    },
    NrsDeregister {
        name: String,
    },
    RedirectInstalled {
        vnf: u32,
        name: String,
        locator: String,
        expiry: SimTime,
    },
    MobilityEnabled {
        slice: u32,
        prefix: String,
    },
    MobilityDisabled {
        slice: u32,
        prefix: String,
    },
    ServiceAnswer {
        vnf: u32,
        name: String,
        found: bool,
    },
    AppBootstrapped {
        ue: String,
        name_space: String,
        gateway: String,
    },
    AppError {
        ue: String,
        reason: String,
    },
    ParticipantJoined {
        ue: String,
        prefix: String,
    },
    ProducerServe {
        ue: String,
        name: String,
    },
    FlowStarted {
        flow: String,
        target: String,
    },
    ConsumerSend {
        flow: String,
        seq: u64,
        attempt: u32,
        name: String,
    },
    ConsumerData {
        flow: String,
        seq: u64,
        latency_us: u64,
    },
    ConsumerTimeout {
        flow: String,
        seq: u64,
        attempt: u32,
    },
    ChunkLost {
        flow: String,
        seq: u64,
    },
    LateData {
        ue: String,
        name: String,
    },
    InvariantViolation {
        what: String,
    },
}

impl TraceEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            TraceEvent::Step { .. } => "step",
            TraceEvent::ActionFailed { .. } => "action_failed",
            TraceEvent::SliceActive { .. } => "slice_active",
            TraceEvent::SliceRules { .. } => "slice_rules",
            TraceEvent::SliceTornDown { .. } => "slice_torn_down",
            TraceEvent::VnfPlaced { .. } => "vnf_placed",
            TraceEvent::VnfRemoved { .. } => "vnf_removed",
            TraceEvent::UeAttach { .. } => "ue_attach",
            TraceEvent::UeDetach { .. } => "ue_detach",
            TraceEvent::Forward { .. } => "forward",
            TraceEvent::DataSent { .. } => "data_sent",
            TraceEvent::CacheHit { .. } => "cache_hit",
            TraceEvent::Aggregated { .. } => "aggregated",
            TraceEvent::ResolutionInvoked { .. } => "resolution_invoked",
            TraceEvent::ResolutionAnswer { .. } => "resolution_answer",
            TraceEvent::PitExpired { .. } => "pit_expired",
            TraceEvent::Drop { .. } => "drop",
            TraceEvent::Signal { .. } => "signal",
            TraceEvent::MsaResolve { .. } => "msa_resolve",
            TraceEvent::NrsResolve { .. } => "nrs_resolve",
            TraceEvent::NrsRegister { .. } => "nrs_register",
            TraceEvent::NrsDeregister { .. } => "nrs_deregister",
            TraceEvent::RedirectInstalled { .. } => "redirect_installed",
            TraceEvent::MobilityEnabled { .. } => "mobility_enabled",
            TraceEvent::MobilityDisabled { .. } => "mobility_disabled",
            TraceEvent::ServiceAnswer { .. } => "service_answer",
            TraceEvent::AppBootstrapped { .. } => "app_bootstrapped",
            TraceEvent::AppError { .. } => "app_error",
            TraceEvent::ParticipantJoined { .. } => "participant_joined",
            TraceEvent::ProducerServe { .. } => "producer_serve",
            TraceEvent::FlowStarted { .. } => "flow_started",
            TraceEvent::ConsumerSend { .. } => "consumer_send",
            TraceEvent::ConsumerData { .. } => "consumer_data",
            TraceEvent::ConsumerTimeout { .. } => "consumer_timeout",
            TraceEvent::ChunkLost { .. } => "chunk_lost",
            TraceEvent::LateData { .. } => "late_data",
            TraceEvent::InvariantViolation { .. } => "invariant_violation",
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_trace(mut out: impl Write, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn trace_to_string(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_trace(input: impl BufRead) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| TraceError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let records = vec![
            TraceRecord {
                t: 5,
                node: "A".into(),
                event: TraceEvent::Forward {
                    vnf: 1,
                    in_face: 2,
                    out_face: 3,
                    name: "/c/a/v/0".into(),
                    hint: None,
                    redirected: false,
                },
            },
            TraceRecord {
                t: 9,
                node: "K".into(),
                event: TraceEvent::NrsResolve {
                    name: "/c/a".into(),
                    locator: Some("/poa/B".into()),
                },
            },
        ];
        let text = trace_to_string(&records);
        assert!(text.starts_with(r#"{"t":5,"node":"A","event":{"kind":"forward","#));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(read_trace(text.as_bytes()).unwrap(), records);
    }

    #[test]
    fn bad_line_is_located() {
        let err = read_trace("\n{\"t\":1}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceError::Parse { line: 2, .. }));
    }
}
