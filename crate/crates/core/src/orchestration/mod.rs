//! Intent intake, translation to resource requests, greedy placement, slice
//! lifecycle and the domain controllers that push rules into forwarders.

mod context;
mod intent;
mod orchestrator;
mod placement;
mod types;

pub use context::{DomainController, Rule, SliceContext};
pub use intent::{
    base_request, gateway_alloc, regions, translate_intent, Intent, IntentError, NetworkService, ParticipantGroup,
    PlacementConstraint, ResourceRequest, Sla, VnfRequest, BASE_FORWARDER_ALLOC, CONF_SERVICE_ALLOC,
    DEFAULT_GATEWAY_CACHE_BYTES, DISCOVERY_ALLOC, MSA_ALLOC, NRS_ALLOC, REQUESTS_PER_CPU,
};
pub use orchestrator::{reserved_prefixes, EnableOutcome, MobileBinding, OrchestrationError, Orchestrator};
pub use placement::{place, validate_placement, InsufficientResources, Placement, SubstrateSnapshot};
pub use types::{ConferenceLayout, ServiceType, Slice, SliceId, SliceStatus, VnfId, VnfInstance, VnfKind};
