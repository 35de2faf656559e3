pub mod conference;
pub mod forwarder;
pub mod harness;
pub mod icn;
pub mod mobility;
pub mod orchestration;
pub mod sim;
pub mod substrate;

/// Simulation time in integer microseconds.
pub type SimTime = u64;
