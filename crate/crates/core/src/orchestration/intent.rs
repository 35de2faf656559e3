use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::icn::Name;
use crate::substrate::{Alloc, NodeId};

use super::types::{ServiceType, VnfKind};

pub const DEFAULT_GATEWAY_CACHE_BYTES: u64 = 1 << 20;
/// Requests per second one gateway cpu unit absorbs.
pub const REQUESTS_PER_CPU: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkService {
    Reachability,
    Security,
    Mobility,
    Multicast,
    Storage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantGroup {
    pub location: NodeId,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sla {
    pub latency_bound_us: u64,
    pub bandwidth_floor_bps: u64,
}

impl Default for Sla {
    /// Effectively unconstrained.
    fn default() -> Self {
        Sla {
            latency_bound_us: 1_000_000_000,
            bandwidth_floor_bps: 1,
        }
    }
}

/// A declarative service request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub service_type: ServiceType,
    #[serde(default)]
    pub name_space: Option<Name>,
    #[serde(default)]
    pub participants: Vec<ParticipantGroup>,
    #[serde(default)]
    pub sla: Sla,
    #[serde(default)]
    pub network_services: BTreeSet<NetworkService>,
    #[serde(default)]
    pub demand_rps: u64,
    #[serde(default)]
    pub cache_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentError {
    #[error("sla bounds must be positive")]
    NonPositiveSla,
    #[error("conference intents need at least one participant group")]
    NoParticipants,
    #[error("participant group at {0} has zero count")]
    EmptyGroup(NodeId),
    #[error("conference intents need a name_space")]
    MissingNameSpace,
    #[error("cache_bytes must be positive")]
    ZeroCache,
    #[error("{0} intents are not translated; the base slice is bootstrapped from the substrate")]
    Unsupported(&'static str),
}

impl Intent {
    pub fn mobility() -> Self {
        Intent {
            service_type: ServiceType::Mobility,
            name_space: None,
            participants: Vec::new(),
            sla: Sla {
                latency_bound_us: u64::MAX,
                bandwidth_floor_bps: 1,
            },
            network_services: [NetworkService::Mobility].into_iter().collect(),
            demand_rps: 0,
            cache_bytes: None,
        }
    }

    pub fn validate(&self) -> Result<(), IntentError> {
        if self.sla.latency_bound_us == 0 || self.sla.bandwidth_floor_bps == 0 {
            return Err(IntentError::NonPositiveSla);
        }
        if self.cache_bytes == Some(0) {
            return Err(IntentError::ZeroCache);
        }
        if let Some(g) = self.participants.iter().find(|g| g.count == 0) {
            return Err(IntentError::EmptyGroup(g.location.clone()));
        }
        if self.service_type == ServiceType::Conference {
            if self.participants.is_empty() {
                return Err(IntentError::NoParticipants);
            }
            if self.name_space.is_none() {
                return Err(IntentError::MissingNameSpace);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementConstraint {
    Anywhere,
    OnNode(NodeId),
    /// Access latency at `from` plus path latency must stay within the bound,
    /// and the bottleneck bandwidth must reach the floor.
    PathBound {
        from: NodeId,
        max_latency_us: u64,
        min_bandwidth_bps: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VnfRequest {
    pub kind: VnfKind,
    pub alloc: Alloc,
    pub constraint: PlacementConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceRequest {
    pub service_type: ServiceType,
    pub vnfs: Vec<VnfRequest>,
    /// Prefixes the slice's domain controllers will route.
    pub routes: Vec<Name>,
}

impl ResourceRequest {
    pub fn count(&self, kind: VnfKind) -> usize {
        self.vnfs.iter().filter(|v| v.kind == kind).count()
    }
}

pub const BASE_FORWARDER_ALLOC: Alloc = Alloc {
    cpu: 1,
    storage: 262_144,
    cs_capacity: 262_144,
};
pub const DISCOVERY_ALLOC: Alloc = Alloc {
    cpu: 1,
    storage: 4_096,
    cs_capacity: 4_096,
};
pub const NRS_ALLOC: Alloc = Alloc {
    cpu: 2,
    storage: 65_536,
    cs_capacity: 4_096,
};
pub const MSA_ALLOC: Alloc = Alloc {
    cpu: 1,
    storage: 4_096,
    cs_capacity: 4_096,
};
pub const CONF_SERVICE_ALLOC: Alloc = Alloc {
    cpu: 1,
    storage: 4_096,
    cs_capacity: 4_096,
};

/// Participant groups merged per region, in region order.
pub fn regions(intent: &Intent) -> BTreeMap<NodeId, u64> {
    let mut out = BTreeMap::new();
    for g in &intent.participants {
        *out.entry(g.location.clone()).or_insert(0) += u64::from(g.count);
    }
    out
}

/// Gateway allocation for a region with `participants` users.
pub fn gateway_alloc(participants: u64, demand_rps: u64, cache_bytes: u64) -> Alloc {
    let load = participants.saturating_mul(demand_rps);
    Alloc {
        cpu: load.div_ceil(REQUESTS_PER_CPU).max(1),
        storage: cache_bytes,
        cs_capacity: cache_bytes,
    }
}

/// Maps an intent onto VNF kinds, allocations and placement constraints.
pub fn translate_intent(intent: &Intent) -> Result<ResourceRequest, IntentError> {
    intent.validate()?;
    match intent.service_type {
        ServiceType::Base => Err(IntentError::Unsupported("base")),
        ServiceType::Mobility => Ok(ResourceRequest {
            service_type: ServiceType::Mobility,
            vnfs: vec![
                VnfRequest {
                    kind: VnfKind::Nrs,
                    alloc: NRS_ALLOC,
                    constraint: PlacementConstraint::Anywhere,
                },
                VnfRequest {
                    kind: VnfKind::Msa,
                    alloc: MSA_ALLOC,
                    constraint: PlacementConstraint::Anywhere,
                },
            ],
            routes: vec![crate::mobility::mobility_prefix()],
        }),
        ServiceType::Conference => {
            let cache = intent.cache_bytes.unwrap_or(DEFAULT_GATEWAY_CACHE_BYTES);
            let mut vnfs: Vec<VnfRequest> = regions(intent)
                .into_iter()
                .map(|(region, count)| VnfRequest {
                    kind: VnfKind::IcnForwarder,
                    alloc: gateway_alloc(count, intent.demand_rps, cache),
                    constraint: PlacementConstraint::PathBound {
                        from: region,
                        max_latency_us: intent.sla.latency_bound_us,
                        min_bandwidth_bps: intent.sla.bandwidth_floor_bps,
                    },
                })
                .collect();
            vnfs.push(VnfRequest {
                kind: VnfKind::ConfServiceFn,
                alloc: CONF_SERVICE_ALLOC,
                constraint: PlacementConstraint::Anywhere,
            });
            Ok(ResourceRequest {
                service_type: ServiceType::Conference,
                vnfs,
                routes: intent.name_space.iter().cloned().collect(),
            })
        }
    }
}

/// One forwarder pinned to every point of attachment plus a discovery function.
pub fn base_request(poas: &[NodeId]) -> ResourceRequest {
    let mut vnfs: Vec<VnfRequest> = poas
        .iter()
        .map(|p| VnfRequest {
            kind: VnfKind::IcnForwarder,
            alloc: BASE_FORWARDER_ALLOC,
            constraint: PlacementConstraint::OnNode(p.clone()),
        })
        .collect();
    vnfs.push(VnfRequest {
        kind: VnfKind::DiscoveryFn,
        alloc: DISCOVERY_ALLOC,
        constraint: PlacementConstraint::Anywhere,
    });
    ResourceRequest {
        service_type: ServiceType::Base,
        vnfs,
        routes: vec![crate::conference::discovery_prefix(), crate::conference::trust_prefix()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conference(groups: &[(&str, u32)]) -> Intent {
        Intent {
            service_type: ServiceType::Conference,
            name_space: Some(Name::parse("/conf1").unwrap()),
            participants: groups
                .iter()
                .map(|(l, c)| ParticipantGroup {
                    location: NodeId::from(*l),
                    count: *c,
                })
                .collect(),
            sla: Sla {
                latency_bound_us: 10_000,
                bandwidth_floor_bps: 1_000_000,
            },
            network_services: BTreeSet::new(),
            demand_rps: 50,
            cache_bytes: None,
        }
    }

    #[test]
    fn mobility_intent_yields_nrs_and_msa() {
        let r = translate_intent(&Intent::mobility()).unwrap();
        assert_eq!(r.vnfs.len(), 2);
        assert_eq!(r.count(VnfKind::Nrs), 1);
        assert_eq!(r.count(VnfKind::Msa), 1);
    }

    #[test]
    fn conference_two_regions_of_five() {
        let r = translate_intent(&conference(&[("A", 5), ("C", 5)])).unwrap();
        assert_eq!(r.count(VnfKind::IcnForwarder), 2);
        assert_eq!(r.count(VnfKind::ConfServiceFn), 1);
        assert_eq!(
            r.vnfs[0].constraint,
            PlacementConstraint::PathBound {
                from: "A".into(),
                max_latency_us: 10_000,
                min_bandwidth_bps: 1_000_000
            }
        );
    }

    type Row = (&'static [(&'static str, u32)], u64, usize, &'static [u64]);

    #[test]
    fn gateway_table_oracle() {
        // (regions, demand) → gateways and cpu per gateway, enumerated by hand
        let table: [Row; 5] = [
            (&[("A", 1)], 0, 1, &[1]),
            (&[("A", 5), ("C", 5)], 50, 2, &[1, 1]),
            (&[("A", 20), ("A", 30)], 50, 1, &[3]),
            (&[("B", 1), ("A", 1000)], 2, 2, &[2, 1]),
            (&[("A", 1), ("B", 1), ("C", 1)], 1001, 3, &[2, 2, 2]),
        ];
        for (groups, demand, gateways, cpus) in table {
            let mut intent = conference(groups);
            intent.demand_rps = demand;
            let r = translate_intent(&intent).unwrap();
            assert_eq!(r.count(VnfKind::IcnForwarder), gateways);
            let got: Vec<u64> = r
                .vnfs
                .iter()
                .filter(|v| v.kind == VnfKind::IcnForwarder)
                .map(|v| v.alloc.cpu)
                .collect();
            assert_eq!(got, cpus);
            assert_eq!(r.vnfs.last().unwrap().kind, VnfKind::ConfServiceFn);
        }
    }

    #[test]
    fn invalid_intents() {
        let mut i = conference(&[]);
        assert_eq!(translate_intent(&i), Err(IntentError::NoParticipants));
        i = conference(&[("A", 1)]);
        i.sla.latency_bound_us = 0;
        assert_eq!(translate_intent(&i), Err(IntentError::NonPositiveSla));
        i = conference(&[("A", 1)]);
        i.service_type = ServiceType::Base;
        assert!(matches!(translate_intent(&i), Err(IntentError::Unsupported(_))));
    }

    #[test]
    fn translation_is_deterministic() {
        let i = conference(&[("C", 2), ("A", 7), ("B", 1)]);
        assert_eq!(translate_intent(&i), translate_intent(&i));
    }
}
