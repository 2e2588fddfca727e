//! The emitted design: storage elements with routing tables, and the
//! per-cycle micro-operations that drive them.

mod emit;
mod report;

pub use emit::{emit_dot, emit_json, emit_rtl_text, parse_design, Design};
pub use report::{report, CostModel, Metrics, StructureStats};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binder::StorageKind;
use crate::optimizer::OptimizedArchitecture;
use crate::schedule::{AccessSchedule, Cycle, DEFAULT_WIDTH_BITS};
use crate::simulator::ElementState;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub kind: StorageKind,
    pub depth: usize,
    pub width_bits: u32,
    /// Input ports that write into this element.
    pub input_ports: Vec<String>,
    /// Output ports this element feeds.
    pub output_ports: Vec<String>,
}

/// One routed access: `(port, cycle)` is served by `element` and carries
/// `token`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub port: String,
    pub cycle: Cycle,
    pub element: String,
    pub token: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureNetlist {
    pub elements: Vec<Element>,
    pub input_routing: Vec<Route>,
    pub output_routing: Vec<Route>,
    /// token id → element id
    pub placement: BTreeMap<String, String>,
}

impl ArchitectureNetlist {
    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpCode {
    Push,
    Pop,
    Peek,
    RegWrite,
    RegRead,
}

impl OpCode {
    pub fn name(self) -> &'static str {
        match self {
            OpCode::Push => "PUSH",
            OpCode::Pop => "POP",
            OpCode::Peek => "PEEK",
            OpCode::RegWrite => "REG_WRITE",
            OpCode::RegRead => "REG_READ",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroOp {
    pub op: OpCode,
    pub element: String,
    pub token: String,
    /// Source input port for writes, destination output port for reads.
    pub port: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlStep {
    pub cycle: Cycle,
    pub ops: Vec<MicroOp>,
}

/// One step per cycle from 0 to the last scheduled event.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub steps: Vec<ControlStep>,
}

impl ControlSchedule {
    pub fn ops(&self) -> impl Iterator<Item = (Cycle, &MicroOp)> {
        self.steps
            .iter()
            .flat_map(|s| s.ops.iter().map(move |op| (s.cycle, op)))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArchError {
    #[error("token '{0}' is not placed in any structure")]
    Unplaced(String),
    #[error("structure member '{0}' is not a scheduled token")]
    UnknownToken(String),
    #[error("token '{0}' is placed in more than one structure")]
    DuplicatePlacement(String),
    #[error("netlist has no element '{element}' for token '{token}'")]
    MissingElement { element: String, token: String },
    #[error("discipline violation at cycle {cycle} on {element}: {detail}")]
    Discipline {
        cycle: Cycle,
        element: String,
        detail: String,
    },
}

/// One element per structure plus routing derived from the schedule.
pub fn build_netlist(
    arch: &OptimizedArchitecture,
    s: &AccessSchedule,
) -> Result<ArchitectureNetlist, ArchError> {
    let tokens: HashMap<&str, usize> = s
        .tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    let mut placement = BTreeMap::new();
    let mut elements = Vec::with_capacity(arch.structures.len());
    for st in &arch.structures {
        let mut width = 0;
        let mut inputs: Vec<usize> = Vec::new();
        let mut outputs: Vec<usize> = Vec::new();
        for m in st.members() {
            let &i = tokens
                .get(m)
                .ok_or_else(|| ArchError::UnknownToken(m.to_string()))?;
            if placement.insert(m.to_string(), st.id.clone()).is_some() {
                return Err(ArchError::DuplicatePlacement(m.to_string()));
            }
            let t = &s.tokens[i];
            width = width.max(t.width);
            inputs.extend(s.input_index(&t.write.port));
            outputs.extend(t.reads.iter().filter_map(|r| s.output_index(&r.port)));
        }
        inputs.sort_unstable();
        inputs.dedup();
        outputs.sort_unstable();
        outputs.dedup();
        elements.push(Element {
            id: st.id.clone(),
            kind: st.kind,
            depth: st.depth,
            width_bits: if width == 0 {
                DEFAULT_WIDTH_BITS
            } else {
                width
            },
            input_ports: inputs
                .into_iter()
                .map(|i| s.ports.inputs[i].clone())
                .collect(),
            output_ports: outputs
                .into_iter()
                .map(|i| s.ports.outputs[i].clone())
                .collect(),
        });
    }
    let mut input_routing = Vec::with_capacity(s.tokens.len());
    let mut output_routing = Vec::new();
    for t in &s.tokens {
        let element = placement
            .get(&t.id)
            .ok_or_else(|| ArchError::Unplaced(t.id.clone()))?;
        input_routing.push(Route {
            port: t.write.port.clone(),
            cycle: t.write.cycle,
            element: element.clone(),
            token: t.id.clone(),
        });
        for r in &t.reads {
            output_routing.push(Route {
                port: r.port.clone(),
                cycle: r.cycle,
                element: element.clone(),
                token: t.id.clone(),
            });
        }
    }
    input_routing.sort_by_key(|r| (r.cycle, s.input_index(&r.port)));
    output_routing.sort_by_key(|r| (r.cycle, s.output_index(&r.port)));
    Ok(ArchitectureNetlist {
        elements,
        input_routing,
        output_routing,
        placement,
    })
}

/// Micro-operations for every scheduled access, reads before writes in each
/// cycle. Fails if an access would reach past a FIFO head or LIFO top, or
/// overfill an element: the binding it came from is unsound.
pub fn build_control(
    n: &ArchitectureNetlist,
    s: &AccessSchedule,
) -> Result<ControlSchedule, ArchError> {
    let Some(last) = s.last_cycle() else {
        return Ok(ControlSchedule::default());
    };
    let kinds: HashMap<&str, StorageKind> =
        n.elements.iter().map(|e| (e.id.as_str(), e.kind)).collect();
    let mut steps: Vec<ControlStep> = (0..=last)
        .map(|cycle| ControlStep {
            cycle,
            ops: Vec::new(),
        })
        .collect();
    let mut writes: Vec<Vec<(usize, MicroOp)>> = vec![Vec::new(); steps.len()];
    let mut reads: Vec<Vec<(usize, MicroOp)>> = vec![Vec::new(); steps.len()];
    for t in &s.tokens {
        let element = n
            .placement
            .get(&t.id)
            .ok_or_else(|| ArchError::Unplaced(t.id.clone()))?;
        let &kind = kinds
            .get(element.as_str())
            .ok_or_else(|| ArchError::MissingElement {
                element: element.clone(),
                token: t.id.clone(),
            })?;
        let op = if kind == StorageKind::Reg {
            OpCode::RegWrite
        } else {
            OpCode::Push
        };
        writes[t.write.cycle as usize].push((
            s.input_index(&t.write.port).unwrap_or(usize::MAX),
            MicroOp {
                op,
                element: element.clone(),
                token: t.id.clone(),
                port: t.write.port.clone(),
            },
        ));
        for (i, r) in t.reads.iter().enumerate() {
            let op = match (i + 1 == t.reads.len(), kind) {
                (false, _) => OpCode::Peek,
                (true, StorageKind::Reg) => OpCode::RegRead,
                (true, _) => OpCode::Pop,
            };
            reads[r.cycle as usize].push((
                s.output_index(&r.port).unwrap_or(usize::MAX),
                MicroOp {
                    op,
                    element: element.clone(),
                    token: t.id.clone(),
                    port: r.port.clone(),
                },
            ));
        }
    }
    let mut states: HashMap<&str, ElementState> = n
        .elements
        .iter()
        .map(|e| (e.id.as_str(), ElementState::new(e.kind, e.depth)))
        .collect();
    for (step, (mut rd, mut wr)) in steps.iter_mut().zip(reads.into_iter().zip(writes)) {
        rd.sort_by_key(|(p, _)| *p);
        wr.sort_by_key(|(p, _)| *p);
        for (_, op) in rd.into_iter().chain(wr) {
            let state = states
                .get_mut(op.element.as_str())
                .expect("element registered");
            if let Some(detail) = state.apply(op.op, &op.token) {
                return Err(ArchError::Discipline {
                    cycle: step.cycle,
                    element: op.element,
                    detail,
                });
            }
            step.ops.push(op);
        }
    }
    Ok(ControlSchedule { steps })
}
