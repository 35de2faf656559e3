use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::icn::Name;
use crate::orchestration::{Intent, ServiceType};
use crate::substrate::{AccessProfile, LinkId, NodeId, NodeRole, PhysLink, PhysNode, Topology, TopologyError, UeId};
use crate::SimTime;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl ScenarioError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ScenarioError::Invalid { line, .. } => Some(*line),
            ScenarioError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub interest_lifetime_us: u64,
    pub grace_us: u64,
    pub chunk_size: usize,
    pub publish_rate: u64,
    pub hop_limit: u8,
    pub gap_us: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            interest_lifetime_us: crate::icn::DEFAULT_INTEREST_LIFETIME_US,
            grace_us: crate::mobility::DEFAULT_REDIRECT_GRACE_US,
            chunk_size: crate::conference::DEFAULT_CHUNK_SIZE,
            publish_rate: crate::conference::DEFAULT_PUBLISH_RATE,
            hop_limit: crate::icn::DEFAULT_HOP_LIMIT,
            gap_us: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: NodeId,
    pub role: NodeRole,
    pub cpu: u64,
    pub storage: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_latency_us: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_bandwidth_bps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub access_queue: Option<usize>,
}

fn default_queue() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub latency_us: u64,
    pub bandwidth_bps: u64,
    #[serde(default = "default_queue")]
    pub queue_capacity: usize,
}

fn default_media() -> String {
    "video".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    SubmitIntent {
        intent: Intent,
    },
    UeAttach {
        ue: UeId,
        poa: NodeId,
    },
    UeDetach {
        ue: UeId,
    },
    UeMove {
        ue: UeId,
        to: NodeId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gap_us: Option<u64>,
    },
    JoinConference {
        ue: UeId,
        slice: Name,
        participant: String,
    },
    StartFetch {
        ue: UeId,
        target: Name,
        #[serde(default = "default_media")]
        media: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chunks: Option<u64>,
    },
    EnableMobility {
        slice: Name,
        prefixes: Vec<Name>,
    },
    DisableMobility {
        slice: Name,
        prefixes: Vec<Name>,
    },
    /// `base`, `mobility`, or a slice name space.
    TeardownSlice {
        slice: String,
    },
}

impl Action {
    pub fn label(&self) -> &'static str {
        match self {
            Action::SubmitIntent { .. } => "submit_intent",
            Action::UeAttach { .. } => "ue_attach",
            Action::UeDetach { .. } => "ue_detach",
            Action::UeMove { .. } => "ue_move",
            Action::JoinConference { .. } => "join_conference",
            Action::StartFetch { .. } => "start_fetch",
            Action::EnableMobility { .. } => "enable_mobility",
            Action::DisableMobility { .. } => "disable_mobility",
            Action::TeardownSlice { .. } => "teardown_slice",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub at: SimTime,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub duration_us: SimTime,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub ues: Vec<UeId>,
    #[serde(default)]
    pub timeline: Vec<TimelineEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn detect(path: &Path, text: &str) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            Some("toml") => Format::Toml,
            _ if text.trim_start().starts_with('{') => Format::Json,
            _ => Format::Toml,
        }
    }
}

impl Scenario {
    pub fn topology(&self) -> Result<Topology, TopologyError> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mut p = PhysNode::new(n.id.clone(), n.role, n.cpu, n.storage);
                let d = AccessProfile::default();
                p.access = AccessProfile {
                    latency_us: n.access_latency_us.unwrap_or(d.latency_us),
                    bandwidth_bps: n.access_bandwidth_bps.unwrap_or(d.bandwidth_bps),
                    queue_capacity: n.access_queue.unwrap_or(d.queue_capacity),
                };
                p
            })
            .collect();
        let links = self
            .links
            .iter()
            .map(|l| PhysLink {
                id: l.id.clone(),
                endpoints: (l.a.clone(), l.b.clone()),
                latency_us: l.latency_us,
                bandwidth_bps: l.bandwidth_bps,
                queue_capacity: l.queue_capacity,
            })
            .collect();
        Topology::new(nodes, links)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text, Format::detect(path, &text))
}

pub fn parse_scenario(text: &str, format: Format) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = match format {
        Format::Toml => toml::from_str(text).map_err(|e| ScenarioError::Invalid {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?,
        Format::Json => serde_json::from_str(text).map_err(|e| ScenarioError::Invalid {
            line: e.line().max(1),
            message: e.to_string(),
        })?,
    };
    validate(&scenario).map_err(|(section, index, message)| ScenarioError::Invalid {
        line: locate(text, format, section, index),
        message,
    })?;
    Ok(scenario)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the `index`-th element of a top-level array section.
fn locate(text: &str, format: Format, section: Section, index: usize) -> usize {
    let (key, probe) = match section {
        Section::Top => return 1,
        Section::Nodes => ("nodes", "\"id\""),
        Section::Links => ("links", "\"id\""),
        Section::Ues => ("ues", ""),
        Section::Timeline => ("timeline", "\"at\""),
    };
    match format {
        Format::Toml => {
            let header = format!("[[{key}]]");
            let mut seen = 0;
            for (i, line) in text.lines().enumerate() {
                if line.trim() == header {
                    if seen == index {
                        return i + 1;
                    }
                    seen += 1;
                }
            }
            text.lines()
                .position(|l| l.trim_start().starts_with(key))
                .map_or(1, |i| i + 1)
        }
        Format::Json => {
            let Some(start) = text.find(&format!("\"{key}\"")) else {
                return 1;
            };
            if probe.is_empty() {
                return line_of(text, start);
            }
            text[start..]
                .match_indices(probe)
                .nth(index)
                .map_or_else(|| line_of(text, start), |(off, _)| line_of(text, start + off))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Top,
    Nodes,
    Links,
    Ues,
    Timeline,
}

type Invalid = (Section, usize, String);

/// Static checks: sorted timeline, defined ids, and a replay of attach state.
fn validate(s: &Scenario) -> Result<(), Invalid> {
    let mut nodes: BTreeMap<&NodeId, NodeRole> = BTreeMap::new();
    for (i, n) in s.nodes.iter().enumerate() {
        if nodes.insert(&n.id, n.role).is_some() {
            return Err((Section::Nodes, i, format!("duplicate node {}", n.id)));
        }
        Name::from_components([n.id.as_str()]).map_err(|e| (Section::Nodes, i, format!("node id {}: {e}", n.id)))?;
    }
    for (i, l) in s.links.iter().enumerate() {
        for end in [&l.a, &l.b] {
            if !nodes.contains_key(end) {
                return Err((Section::Links, i, format!("link {} references undefined node {end}", l.id)));
            }
        }
    }
    if let Err(e) = s.topology() {
        let (section, index) = match &e {
            TopologyError::DuplicateLink(id) | TopologyError::InvalidLink(id, _) => {
                (Section::Links, s.links.iter().position(|l| &l.id == id).unwrap_or(0))
            }
            TopologyError::DuplicateNode(id) | TopologyError::InvalidNode(id, _) | TopologyError::UnknownNode(id) => {
                (Section::Nodes, s.nodes.iter().position(|n| &n.id == id).unwrap_or(0))
            }
        };
        return Err((section, index, e.to_string()));
    }
    let mut ues = BTreeSet::new();
    for (i, u) in s.ues.iter().enumerate() {
        if !ues.insert(u) {
            return Err((Section::Ues, i, format!("duplicate ue {u}")));
        }
    }
    if s.params.interest_lifetime_us == 0 || s.params.chunk_size == 0 || s.params.publish_rate == 0 || s.params.hop_limit == 0 {
        return Err((Section::Top, 0, "params must be positive".into()));
    }

    let mut attached: BTreeMap<&UeId, &NodeId> = BTreeMap::new();
    let mut prev = 0;
    for (i, entry) in s.timeline.iter().enumerate() {
        let fail = |m: String| (Section::Timeline, i, m);
        if entry.at < prev {
            return Err(fail(format!("timeline not sorted: {} after {prev}", entry.at)));
        }
        prev = entry.at;
        let ue_known = |u: &UeId| {
            if ues.contains(u) {
                Ok(())
            } else {
                Err(fail(format!("undefined ue {u}")))
            }
        };
        let poa_known = |n: &NodeId| match nodes.get(n) {
            Some(role) if role.is_poa() => Ok(()),
            Some(_) => Err(fail(format!("{n} is not a point of attachment"))),
            None => Err(fail(format!("undefined node {n}"))),
        };
        let must_attach = |u: &UeId, attached: &BTreeMap<&UeId, &NodeId>| {
            if attached.contains_key(u) {
                Ok(())
            } else {
                Err(fail(format!("{u} is not attached at {}", entry.at)))
            }
        };
        match &entry.action {
            Action::SubmitIntent { intent } => {
                if intent.service_type != ServiceType::Base {
                    intent.validate().map_err(|e| fail(e.to_string()))?;
                }
                for g in &intent.participants {
                    if !nodes.contains_key(&g.location) {
                        return Err(fail(format!("undefined node {}", g.location)));
                    }
                }
            }
            Action::UeAttach { ue, poa } => {
                ue_known(ue)?;
                poa_known(poa)?;
                if let Some(at) = attached.get(ue) {
                    return Err(fail(format!("{ue} is already attached to {at}")));
                }
                attached.insert(ue, poa);
            }
            Action::UeDetach { ue } => {
                ue_known(ue)?;
                must_attach(ue, &attached)?;
                attached.remove(ue);
            }
            Action::UeMove { ue, to, .. } => {
                ue_known(ue)?;
                poa_known(to)?;
                must_attach(ue, &attached)?;
                attached.insert(ue, to);
            }
            Action::JoinConference { ue, participant, .. } => {
                ue_known(ue)?;
                must_attach(ue, &attached)?;
                Name::from_components([participant.as_str()])
                    .map_err(|e| fail(format!("participant id {participant:?}: {e}")))?;
            }
            Action::StartFetch { ue, rate, chunks, .. } => {
                ue_known(ue)?;
                must_attach(ue, &attached)?;
                if *rate == Some(0) || *chunks == Some(0) {
                    return Err(fail("rate and chunks must be positive".into()));
                }
            }
            Action::EnableMobility { slice, prefixes } | Action::DisableMobility { slice, prefixes } => {
                if prefixes.is_empty() {
                    return Err(fail("no prefixes".into()));
                }
                if let Some(p) = prefixes.iter().find(|p| !slice.is_prefix_of(p)) {
                    return Err(fail(format!("{p} is outside {slice}")));
                }
            }
            Action::TeardownSlice { slice } => {
                if slice != "base" && slice != "mobility" {
                    Name::parse(slice).map_err(|e| fail(format!("slice {slice:?}: {e}")))?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
seed = 7
duration_us = 1000000

[[nodes]]
id = "A"
role = "icn_bs"
cpu = 4
storage = 1000000

[[nodes]]
id = "R"
role = "core_router"
cpu = 4
storage = 1000000

[[links]]
id = "ar"
a = "A"
b = "R"
latency_us = 1000
bandwidth_bps = 1000000000

ues = []
"#;

    fn with_timeline(extra: &str) -> String {
        let mut s = MINI.replace("ues = []\n", "");
        s = s.replace("seed = 7\n", "seed = 7\nues = [\"u\"]\n");
        s.push_str(extra);
        s
    }

    #[test]
    fn minimal_parses() {
        let s = parse_scenario(&with_timeline(""), Format::Toml).unwrap();
        assert_eq!(s.nodes.len(), 2);
        assert_eq!(s.params, Params::default());
        assert_eq!(s.links[0].queue_capacity, 64);
    }

    #[test]
    fn unsorted_timeline_is_located() {
        let text = with_timeline(
            r#"
[[timeline]]
at = 10
action = "ue_attach"
ue = "u"
poa = "A"

[[timeline]]
at = 5
action = "ue_detach"
ue = "u"
"#,
        );
        let err = parse_scenario(&text, Format::Toml).unwrap_err();
        let header = text.lines().enumerate().filter(|(_, l)| l.trim() == "[[timeline]]").nth(1).unwrap().0 + 1;
        assert_eq!(err.line(), Some(header));
        assert!(err.to_string().contains("not sorted"));
    }

    #[test]
    fn undefined_node_is_an_error() {
        let text = with_timeline("\n[[timeline]]\nat = 0\naction = \"ue_attach\"\nue = \"u\"\npoa = \"Z\"\n");
        let err = parse_scenario(&text, Format::Toml).unwrap_err();
        assert!(err.to_string().contains("undefined node Z"), "{err}");
    }

    #[test]
    fn join_before_attach_is_an_error() {
        let text = with_timeline(
            "\n[[timeline]]\nat = 0\naction = \"join_conference\"\nue = \"u\"\nslice = \"/c\"\nparticipant = \"u\"\n",
        );
        assert!(parse_scenario(&text, Format::Toml).unwrap_err().to_string().contains("not attached"));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_scenario("seed = 1\nduration_us = \"x\"\n", Format::Toml).unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = parse_scenario("{\n \"seed\": 1,\n \"duration_us\": true\n}", Format::Json).unwrap_err();
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn json_and_toml_are_equivalent() {
        let text = with_timeline(
            r#"
[[timeline]]
at = 0
action = "submit_intent"
[timeline.intent]
service_type = "conference"
name_space = "/c"
participants = [{ location = "A", count = 2 }]
sla = { latency_bound_us = 10000, bandwidth_floor_bps = 1000 }
network_services = ["mobility", "multicast"]
"#,
        );
        let s = parse_scenario(&text, Format::Toml).unwrap();
        let back = parse_scenario(&s.to_json(), Format::Json).unwrap();
        assert_eq!(s, back);
        assert_eq!(parse_scenario(&s.to_toml(), Format::Toml).unwrap(), s);
    }
}
