use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::binder::StorageKind;
use crate::optimizer::OptimizedArchitecture;
use crate::schedule::{max_live, AccessSchedule};

/// Relative costs in arbitrary units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub reg_slot: f64,
    pub fifo_slot: f64,
    pub lifo_slot: f64,
    pub control: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            reg_slot: 2.0,
            fifo_slot: 1.0,
            lifo_slot: 1.0,
            control: 3.0,
        }
    }
}

impl CostModel {
    pub fn slot_cost(&self, kind: StorageKind) -> f64 {
        match kind {
            StorageKind::Reg => self.reg_slot,
            StorageKind::Fifo => self.fifo_slot,
            StorageKind::Lifo => self.lifo_slot,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.reg_slot, self.fifo_slot, self.lifo_slot, self.control]
            .iter()
            .all(|c| c.is_finite() && *c >= 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureStats {
    pub id: String,
    pub kind: StorageKind,
    pub depth: usize,
    pub members: usize,
    pub segments: usize,
    /// Mean occupancy over the busy segments divided by depth.
    pub fill: f64,
    pub input_ports: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub slots: usize,
    /// Slots saved against one register per token.
    pub saved: i64,
    pub ctrl: usize,
    pub max_live: usize,
    pub cost: f64,
    pub structures: Vec<StructureStats>,
}

impl Metrics {
    pub fn summary(&self) -> String {
        format!(
            "n={} slots={} saved={} ctrl={} max_live={} cost={:.2}",
            self.n, self.slots, self.saved, self.ctrl, self.max_live, self.cost
        )
    }
}

pub fn report(arch: &OptimizedArchitecture, s: &AccessSchedule, cost: &CostModel) -> Metrics {
    let lifetimes: HashMap<&str, u64> = s
        .tokens
        .iter()
        .map(|t| (t.id.as_str(), u64::from(t.lifetime().len())))
        .collect();
    let ports: HashMap<&str, &str> = s
        .tokens
        .iter()
        .map(|t| (t.id.as_str(), t.write.port.as_str()))
        .collect();
    let structures: Vec<StructureStats> = arch
        .structures
        .iter()
        .map(|st| {
            let busy: u64 = st.members().filter_map(|m| lifetimes.get(m)).sum();
            let span: u64 = st
                .segments
                .iter()
                .map(|seg| u64::from(seg.interval.len()))
                .sum();
            let fill = if span == 0 || st.depth == 0 {
                0.0
            } else {
                busy as f64 / span as f64 / st.depth as f64
            };
            let mut feeding: Vec<&str> =
                st.members().filter_map(|m| ports.get(m).copied()).collect();
            feeding.sort_unstable();
            feeding.dedup();
            StructureStats {
                id: st.id.clone(),
                kind: st.kind,
                depth: st.depth,
                members: st.member_count(),
                segments: st.segments.len(),
                fill,
                input_ports: feeding.len(),
            }
        })
        .collect();
    let slots = arch.total_depth();
    let ctrl = arch.structures.len();
    let slot_cost: f64 = arch
        .structures
        .iter()
        .map(|st| st.depth as f64 * cost.slot_cost(st.kind))
        .sum();
    Metrics {
        n: s.tokens.len(),
        slots,
        saved: s.tokens.len() as i64 - slots as i64,
        ctrl,
        max_live: max_live(s),
        cost: slot_cost + ctrl as f64 * cost.control,
        structures,
    }
}
