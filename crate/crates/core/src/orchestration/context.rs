use std::collections::BTreeSet;

use crate::forwarder::{FaceId, NextHop};
use crate::icn::Name;
use crate::sim::{World, WorldError};

use super::types::{SliceId, VnfId};

/// One piece of forwarder state a domain controller installed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    Fib { vnf: VnfId, prefix: Name },
    Resolution { vnf: VnfId, prefix: Name },
    TrustAnchor { vnf: VnfId, key: Name },
}

/// Everything a slice installed, so teardown can remove exactly that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceContext {
    pub slice: SliceId,
    pub rules: BTreeSet<Rule>,
    /// Faces created on forwarders owned by other slices.
    pub foreign_faces: Vec<(VnfId, FaceId)>,
    /// Logged stand-in for controller-to-forwarder signaling.
    pub control_messages: u64,
}

impl SliceContext {
    pub fn new(slice: SliceId) -> Self {
        SliceContext {
            slice,
            rules: BTreeSet::new(),
            foreign_faces: Vec::new(),
            control_messages: 0,
        }
    }

    pub fn fib_rules(&self) -> usize {
        self.rules.iter().filter(|r| matches!(r, Rule::Fib { .. })).count()
    }

    pub fn resolution_rules(&self) -> usize {
        self.rules.iter().filter(|r| matches!(r, Rule::Resolution { .. })).count()
    }
}

/// Rule-pushing layer between the orchestrator and the forwarders.
pub struct DomainController<'a> {
    pub world: &'a mut World,
    pub ctx: &'a mut SliceContext,
}

impl<'a> DomainController<'a> {
    pub fn new(world: &'a mut World, ctx: &'a mut SliceContext) -> Self {
        DomainController { world, ctx }
    }

    pub fn push_fib(&mut self, vnf: VnfId, prefix: Name, face: FaceId) -> Result<(), WorldError> {
        self.world
            .forwarder_mut(vnf)?
            .install_fib(prefix.clone(), vec![NextHop { face, cost: 0 }])?;
        self.ctx.rules.insert(Rule::Fib { vnf, prefix });
        self.ctx.control_messages += 1;
        Ok(())
    }

    pub fn push_resolution(&mut self, vnf: VnfId, prefix: Name) -> Result<(), WorldError> {
        self.world.forwarder_mut(vnf)?.set_resolution_rule(prefix.clone());
        self.ctx.rules.insert(Rule::Resolution { vnf, prefix });
        self.ctx.control_messages += 1;
        Ok(())
    }

    pub fn push_anchor(&mut self, vnf: VnfId, key: Name) -> Result<(), WorldError> {
        self.world.forwarder_mut(vnf)?.add_trust_anchor(key.clone());
        self.ctx.rules.insert(Rule::TrustAnchor { vnf, key });
        self.ctx.control_messages += 1;
        Ok(())
    }

    /// Removes one recorded rule. State already gone (e.g. with a face) is fine.
    pub fn withdraw(&mut self, rule: &Rule) {
        if !self.ctx.rules.remove(rule) {
            return;
        }
        self.ctx.control_messages += 1;
        let vnf = match rule {
            Rule::Fib { vnf, .. } | Rule::Resolution { vnf, .. } | Rule::TrustAnchor { vnf, .. } => *vnf,
        };
        let Ok(f) = self.world.forwarder_mut(vnf) else {
            return;
        };
        match rule {
            Rule::Fib { prefix, .. } => {
                let _ = f.remove_fib(prefix);
            }
            Rule::Resolution { prefix, .. } => {
                let _ = f.unset_resolution_rule(prefix);
            }
            Rule::TrustAnchor { key, .. } => {
                f.remove_trust_anchor(key);
            }
        }
    }

    pub fn withdraw_all(&mut self) {
        let rules: Vec<Rule> = self.ctx.rules.iter().cloned().collect();
        for r in &rules {
            self.withdraw(r);
        }
    }
}
