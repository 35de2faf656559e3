#![allow(dead_code)]

use std::path::PathBuf;

use icnsim::harness::{load_scenario, parse_scenario, Format, Scenario, TraceEvent, TraceRecord};
use icnsim::SimTime;

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn scenario(file: &str) -> Scenario {
    load_scenario(scenario_dir().join(file)).expect("corpus scenario loads")
}

pub fn corpus() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .expect("scenario dir")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml" || e == "json"))
        .collect();
    files.sort();
    files
}

/// Five-node substrate: PoAs A, B, C on a core router R, cloud K behind R.
pub const SUBSTRATE: &str = r#"
[[nodes]]
id = "A"
role = "icn_bs"
cpu = 8
storage = 8000000
access_latency_us = 1000

[[nodes]]
id = "B"
role = "icn_bs"
cpu = 8
storage = 8000000
access_latency_us = 1000

[[nodes]]
id = "C"
role = "icn_sr"
cpu = 8
storage = 8000000
access_latency_us = 1000

[[nodes]]
id = "R"
role = "core_router"
cpu = 2
storage = 1000000

[[nodes]]
id = "K"
role = "cloud"
cpu = 32
storage = 64000000

[[links]]
id = "A-R"
a = "A"
b = "R"
latency_us = 1000
bandwidth_bps = 1000000000

[[links]]
id = "B-R"
a = "B"
b = "R"
latency_us = 1000
bandwidth_bps = 1000000000

[[links]]
id = "C-R"
a = "C"
b = "R"
latency_us = 1000
bandwidth_bps = 1000000000

[[links]]
id = "R-K"
a = "R"
b = "K"
latency_us = 2000
bandwidth_bps = 10000000000
"#;

/// Base slice plus a `/conf1` conference with gateways at A and C.
pub fn conference_intents(cache_bytes: Option<u64>) -> String {
    let cache = cache_bytes.map(|c| format!("cache_bytes = {c}\n")).unwrap_or_default();
    format!(
        r#"
[[timeline]]
at = 0
action = "submit_intent"
[timeline.intent]
service_type = "base"

[[timeline]]
at = 2000
action = "submit_intent"
[timeline.intent]
service_type = "conference"
name_space = "/conf1"
demand_rps = 50
participants = [{{ location = "A", count = 1 }}, {{ location = "C", count = 1 }}]
sla = {{ latency_bound_us = 1500, bandwidth_floor_bps = 10000000 }}
{cache}"#
    )
}

pub fn attach(at: SimTime, ue: &str, poa: &str) -> String {
    format!("\n[[timeline]]\nat = {at}\naction = \"ue_attach\"\nue = \"{ue}\"\npoa = \"{poa}\"\n")
}

pub fn join(at: SimTime, ue: &str) -> String {
    format!("\n[[timeline]]\nat = {at}\naction = \"join_conference\"\nue = \"{ue}\"\nslice = \"/conf1\"\nparticipant = \"{ue}\"\n")
}

pub fn fetch(at: SimTime, ue: &str, target: &str, chunks: u64) -> String {
    format!("\n[[timeline]]\nat = {at}\naction = \"start_fetch\"\nue = \"{ue}\"\ntarget = \"{target}\"\nchunks = {chunks}\n")
}

pub fn build(seed: u64, duration_us: SimTime, ues: &[String], timeline: &str) -> Scenario {
    let ues = ues.iter().map(|u| format!("{u:?}")).collect::<Vec<_>>().join(", ");
    let text = format!("seed = {seed}\nduration_us = {duration_us}\nues = [{ues}]\n{SUBSTRATE}{timeline}");
    parse_scenario(&text, Format::Toml).expect("generated scenario is valid")
}

/// Id of the conference forwarder placed on `node`.
pub fn gateway_at(trace: &[TraceRecord], node: &str) -> Option<u32> {
    let conf = trace.iter().find_map(|r| match &r.event {
        TraceEvent::SliceActive { slice, service, .. } if service == "conference" => Some(*slice),
        _ => None,
    })?;
    trace.iter().find_map(|r| match &r.event {
        TraceEvent::VnfPlaced {
            slice, vnf, vnf_kind, ..
        } if *slice == conf && vnf_kind == "icn_forwarder" && r.node == node => Some(*vnf),
        _ => None,
    })
}

pub fn count(trace: &[TraceRecord], pred: impl Fn(&TraceRecord) -> bool) -> usize {
    trace.iter().filter(|r| pred(r)).count()
}
