use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trace::{TraceEvent, TraceRecord};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowReport {
    pub sent: u64,
    pub received: u64,
    pub lost: u64,
    pub timeouts: u64,
    pub mean_latency_us: u64,
    pub p95_latency_us: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceReport {
    pub service: String,
    pub name_space: String,
    pub vnfs: usize,
    pub control_messages: u64,
    pub fib_rules: usize,
    pub resolution_rules: usize,
    pub torn_down: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkReport {
    pub interests_forwarded: u64,
    pub data_sent: u64,
    pub cache_hits: u64,
    pub aggregated_interests: u64,
    pub redirected_interests: u64,
    pub dropped_packets: u64,
    pub nrs_messages: u64,
    pub msa_resolutions: u64,
    pub nrs_resolutions: u64,
}

/// Consumer Interests: sent = satisfied + timed_out + in_flight.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conservation {
    pub sent: u64,
    pub satisfied: u64,
    pub timed_out: u64,
    pub in_flight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub flows: BTreeMap<String, FlowReport>,
    pub slices: BTreeMap<u32, SliceReport>,
    pub network: NetworkReport,
    pub interests: Conservation,
    pub steps: Vec<u8>,
    pub failed_actions: u64,
    pub invariant_violations: u64,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[u64], pct: u64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (pct as usize * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

impl MetricsReport {
    /// Pure fold over the trace.
    pub fn from_trace(trace: &[TraceRecord]) -> MetricsReport {
        let mut r = MetricsReport::default();
        let mut latencies: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for rec in trace {
            match &rec.event {
                TraceEvent::Step { step, .. } => r.steps.push(*step),
                TraceEvent::ActionFailed { .. } => r.failed_actions += 1,
                TraceEvent::SliceActive {
                    slice,
                    service,
                    name_space,
                    vnfs,
                } => {
                    let s = r.slices.entry(*slice).or_default();
                    s.service = service.clone();
                    s.name_space = name_space.clone();
                    s.vnfs = *vnfs;
                }
                TraceEvent::SliceRules {
                    slice,
                    fib_rules,
                    resolution_rules,
                    control_messages,
                } => {
                    let s = r.slices.entry(*slice).or_default();
                    s.fib_rules = *fib_rules;
                    s.resolution_rules = *resolution_rules;
                    s.control_messages = *control_messages;
                }
                TraceEvent::SliceTornDown { slice, .. } => {
                    r.slices.entry(*slice).or_default().torn_down = true;
                }
                TraceEvent::Forward { redirected, .. } => {
                    r.network.interests_forwarded += 1;
                    if *redirected {
                        r.network.redirected_interests += 1;
                    }
                }
                TraceEvent::DataSent { .. } => r.network.data_sent += 1,
                TraceEvent::CacheHit { .. } => r.network.cache_hits += 1,
                TraceEvent::Aggregated { .. } => r.network.aggregated_interests += 1,
                TraceEvent::Drop { .. } => r.network.dropped_packets += 1,
                TraceEvent::Signal { nrs: true, .. } => r.network.nrs_messages += 1,
                TraceEvent::MsaResolve { .. } => r.network.msa_resolutions += 1,
                TraceEvent::NrsResolve { .. } => r.network.nrs_resolutions += 1,
                TraceEvent::FlowStarted { flow, .. } => {
                    r.flows.entry(flow.clone()).or_default();
                }
                TraceEvent::ConsumerSend { flow, .. } => {
                    r.flows.entry(flow.clone()).or_default().sent += 1;
                    r.interests.sent += 1;
                }
                TraceEvent::ConsumerData { flow, latency_us, .. } => {
                    r.flows.entry(flow.clone()).or_default().received += 1;
                    latencies.entry(flow.clone()).or_default().push(*latency_us);
                    r.interests.satisfied += 1;
                }
                TraceEvent::ConsumerTimeout { flow, .. } => {
                    r.flows.entry(flow.clone()).or_default().timeouts += 1;
                    r.interests.timed_out += 1;
                }
                TraceEvent::ChunkLost { flow, .. } => r.flows.entry(flow.clone()).or_default().lost += 1,
                TraceEvent::InvariantViolation { .. } => r.invariant_violations += 1,
                _ => {}
            }
        }
        for (flow, mut l) in latencies {
            l.sort_unstable();
            let f = r.flows.get_mut(&flow).expect("flow exists");
            f.mean_latency_us = l.iter().sum::<u64>() / l.len() as u64;
            f.p95_latency_us = percentile(&l, 95);
        }
        r.interests.in_flight = r
            .interests
            .sent
            .saturating_sub(r.interests.satisfied + r.interests.timed_out);
        r
    }

    /// Violated report invariants; empty when the report is consistent.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let c = &self.interests;
        if c.satisfied + c.timed_out + c.in_flight != c.sent {
            out.push(format!(
                "interest conservation: sent {} != satisfied {} + timed out {} + in flight {}",
                c.sent, c.satisfied, c.timed_out, c.in_flight
            ));
        }
        for (id, f) in &self.flows {
            let settled = f.received + f.timeouts;
            if settled > f.sent || f.sent - settled > 1 {
                out.push(format!("flow {id}: {} sent, {} received, {} timeouts", f.sent, f.received, f.timeouts));
            }
        }
        if self.invariant_violations > 0 {
            out.push(format!("{} invariant violations traced", self.invariant_violations));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(event: TraceEvent) -> TraceRecord {
        TraceRecord {
            t: 0,
            node: "-".into(),
            event,
        }
    }

    #[test]
    fn empty_trace_is_zeroed() {
        let r = MetricsReport::from_trace(&[]);
        assert_eq!(r, MetricsReport::default());
        assert!(r.check().is_empty());
    }

    #[test]
    fn percentile_nearest_rank() {
        assert_eq!(percentile(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10], 95), 10);
        assert_eq!(percentile(&(1..=100).collect::<Vec<_>>(), 95), 95);
        assert_eq!(percentile(&[7], 95), 7);
    }

    #[test]
    fn flow_accounting() {
        let f = || "u>/c/a".to_string();
        let send = |seq, attempt| {
            rec(TraceEvent::ConsumerSend {
                flow: f(),
                seq,
                attempt,
                name: String::new(),
            })
        };
        let trace = vec![
            send(0, 0),
            rec(TraceEvent::ConsumerData {
                flow: f(),
                seq: 0,
                latency_us: 10,
            }),
            send(1, 0),
            rec(TraceEvent::ConsumerTimeout {
                flow: f(),
                seq: 1,
                attempt: 0,
            }),
            send(1, 1),
            rec(TraceEvent::ConsumerData {
                flow: f(),
                seq: 1,
                latency_us: 31,
            }),
            send(2, 0),
        ];
        let r = MetricsReport::from_trace(&trace);
        let flow = &r.flows[&f()];
        assert_eq!((flow.sent, flow.received, flow.timeouts), (4, 2, 1));
        assert_eq!(flow.mean_latency_us, 20);
        assert_eq!(flow.p95_latency_us, 31);
        assert_eq!(r.interests.in_flight, 1);
        assert!(r.check().is_empty());
    }
}
