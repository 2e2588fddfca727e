//! Cycle-accurate replay of a control schedule against a netlist.
//!
//! Each storage element is modelled by its access discipline: a FIFO only
//! exposes its head, a LIFO its top, a register bank any held token. Every
//! breach is recorded and the run continues, so one replay catalogues all
//! failures of a design.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{ArchitectureNetlist, ControlSchedule, MicroOp, OpCode};
use crate::binder::StorageKind;
use crate::schedule::{AccessSchedule, Cycle};

#[derive(Debug, Clone)]
enum Store {
    Queue(VecDeque<String>),
    Stack(Vec<String>),
    Bank(Vec<String>),
}

/// Runtime state of one storage element.
#[derive(Debug, Clone)]
pub struct ElementState {
    kind: StorageKind,
    depth: usize,
    store: Store,
}

impl ElementState {
    pub fn new(kind: StorageKind, depth: usize) -> Self {
        let store = match kind {
            StorageKind::Fifo => Store::Queue(VecDeque::new()),
            StorageKind::Lifo => Store::Stack(Vec::new()),
            StorageKind::Reg => Store::Bank(Vec::new()),
        };
        ElementState { kind, depth, store }
    }

    pub fn occupancy(&self) -> usize {
        match &self.store {
            Store::Queue(q) => q.len(),
            Store::Stack(s) | Store::Bank(s) => s.len(),
        }
    }

    /// Token at the accessible position, if the discipline has one.
    fn exposed(&self) -> Option<&str> {
        match &self.store {
            Store::Queue(q) => q.front().map(String::as_str),
            Store::Stack(s) => s.last().map(String::as_str),
            Store::Bank(_) => None,
        }
    }

    fn holds(&self, token: &str) -> bool {
        match &self.store {
            Store::Queue(q) => q.iter().any(|t| t == token),
            Store::Stack(s) | Store::Bank(s) => s.iter().any(|t| t == token),
        }
    }

    fn remove(&mut self, token: &str) {
        match &mut self.store {
            Store::Queue(q) => {
                if let Some(i) = q.iter().position(|t| t == token) {
                    q.remove(i);
                }
            }
            Store::Stack(s) | Store::Bank(s) => {
                if let Some(i) = s.iter().position(|t| t == token) {
                    s.remove(i);
                }
            }
        }
    }

    fn op_allowed(&self, op: OpCode) -> bool {
        matches!(
            (self.kind, op),
            (
                StorageKind::Fifo | StorageKind::Lifo,
                OpCode::Push | OpCode::Pop | OpCode::Peek
            ) | (
                StorageKind::Reg,
                OpCode::RegWrite | OpCode::RegRead | OpCode::Peek
            )
        )
    }

    /// Execute one micro-operation. Returns a description of the breach, if
    /// any; the state is still updated so replay can continue.
    pub fn apply(&mut self, op: OpCode, token: &str) -> Option<String> {
        if !self.op_allowed(op) {
            return Some(format!(
                "{} is not a {} operation",
                op.name(),
                self.kind.name()
            ));
        }
        match op {
            OpCode::Push | OpCode::RegWrite => {
                let full = self.occupancy() >= self.depth;
                match &mut self.store {
                    Store::Queue(q) => q.push_back(token.to_string()),
                    Store::Stack(s) | Store::Bank(s) => s.push(token.to_string()),
                }
                full.then(|| match self.kind {
                    StorageKind::Reg => format!("register overwrite writing {token}"),
                    _ => format!("overflow pushing {token} beyond depth {}", self.depth),
                })
            }
            OpCode::Pop | OpCode::Peek | OpCode::RegRead => {
                let consume = op != OpCode::Peek;
                if !self.holds(token) {
                    return Some(format!(
                        "{} of {token}, which is not stored",
                        op.name().to_lowercase()
                    ));
                }
                let breach = match self.exposed() {
                    Some(head) if head != token => {
                        let place = if self.kind == StorageKind::Fifo {
                            "head"
                        } else {
                            "top"
                        };
                        Some(format!(
                            "non-{place} {} of {token} ({place} is {head})",
                            op.name().to_lowercase()
                        ))
                    }
                    _ => None,
                };
                if consume {
                    self.remove(token);
                }
                breach
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub cycle: Cycle,
    pub token: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimViolation {
    pub cycle: Cycle,
    pub element: String,
    pub description: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    /// Reads seen on each output port, in cycle order.
    pub observed: BTreeMap<String, Vec<Observation>>,
    /// Occupancy of each element at the end of every cycle.
    pub occupancy: BTreeMap<String, Vec<usize>>,
    pub violations: Vec<SimViolation>,
}

impl SimResult {
    pub fn cycles(&self) -> usize {
        self.occupancy.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sim result serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("unknown element '{0}'")]
    UnknownElement(String),
}

fn is_read(op: OpCode) -> bool {
    matches!(op, OpCode::Pop | OpCode::Peek | OpCode::RegRead)
}

/// Replay `c` on `n`. Within a cycle all reads must precede all writes;
/// each element takes at most one read and one write per cycle, and every
/// access must match the netlist's routing tables.
pub fn simulate(n: &ArchitectureNetlist, c: &ControlSchedule, s: &AccessSchedule) -> SimResult {
    let mut states: BTreeMap<&str, ElementState> = n
        .elements
        .iter()
        .map(|e| (e.id.as_str(), ElementState::new(e.kind, e.depth)))
        .collect();
    let in_routes: HashMap<(&str, Cycle), (&str, &str)> = n
        .input_routing
        .iter()
        .map(|r| {
            (
                (r.port.as_str(), r.cycle),
                (r.element.as_str(), r.token.as_str()),
            )
        })
        .collect();
    let out_routes: HashMap<(&str, Cycle), (&str, &str)> = n
        .output_routing
        .iter()
        .map(|r| {
            (
                (r.port.as_str(), r.cycle),
                (r.element.as_str(), r.token.as_str()),
            )
        })
        .collect();

    let mut result = SimResult::default();
    for port in &s.ports.outputs {
        result.observed.insert(port.clone(), Vec::new());
    }
    let last = [s.last_cycle(), c.steps.last().map(|st| st.cycle)]
        .into_iter()
        .flatten()
        .max();
    let Some(last) = last else {
        for e in &n.elements {
            result.occupancy.insert(e.id.clone(), Vec::new());
        }
        return result;
    };
    let mut steps = c.steps.iter().peekable();
    let mut trace: BTreeMap<&str, Vec<usize>> = states.keys().map(|&k| (k, Vec::new())).collect();
    let empty: Vec<MicroOp> = Vec::new();
    for cycle in 0..=last {
        let ops = match steps.peek() {
            Some(st) if st.cycle == cycle => &steps.next().expect("peeked").ops,
            Some(st) if st.cycle < cycle => {
                result.violations.push(SimViolation {
                    cycle: st.cycle,
                    element: String::new(),
                    description: "control steps out of cycle order".into(),
                });
                steps.next();
                &empty
            }
            _ => &empty,
        };
        let mut wrote = false;
        let mut reads_on: HashMap<&str, usize> = HashMap::new();
        let mut writes_on: HashMap<&str, usize> = HashMap::new();
        for op in ops {
            let mut flag = |description: String| {
                result.violations.push(SimViolation {
                    cycle,
                    element: op.element.clone(),
                    description,
                })
            };
            let read = is_read(op.op);
            if read && wrote {
                flag(format!(
                    "{} of {} after a write in the same cycle",
                    op.op.name(),
                    op.token
                ));
            }
            wrote |= !read;
            let routes = if read { &out_routes } else { &in_routes };
            match routes.get(&(op.port.as_str(), cycle)) {
                Some(&(el, tok)) if el == op.element && tok == op.token => {}
                _ => flag(format!(
                    "unrouted {} of {} via port {}",
                    op.op.name(),
                    op.token,
                    op.port
                )),
            }
            let Some(state) = states.get_mut(op.element.as_str()) else {
                flag("unknown element".into());
                continue;
            };
            let counter = if read { &mut reads_on } else { &mut writes_on };
            let count = counter.entry(op.element.as_str()).or_default();
            *count += 1;
            if *count > 1 {
                flag(format!(
                    "second {} access in one cycle",
                    if read { "read" } else { "write" }
                ));
            }
            if let Some(breach) = state.apply(op.op, &op.token) {
                flag(breach);
            }
            if read {
                result
                    .observed
                    .entry(op.port.clone())
                    .or_default()
                    .push(Observation {
                        cycle,
                        token: op.token.clone(),
                    });
            }
        }
        for (state, t) in states.values().zip(trace.values_mut()) {
            t.push(state.occupancy());
        }
    }
    for st in steps {
        result.violations.push(SimViolation {
            cycle: st.cycle,
            element: String::new(),
            description: "control step beyond the simulated range".into(),
        });
    }
    result.occupancy = trace.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    result
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub port: String,
    pub cycle: Cycle,
    pub expected: Option<String>,
    pub observed: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyFailure {
    /// First divergence on each diverging port.
    pub mismatches: Vec<Mismatch>,
    pub violations: usize,
}

/// Compare observed reads with the scheduled ones, port by port.
pub fn verify(r: &SimResult, s: &AccessSchedule) -> Result<(), VerifyFailure> {
    let mut expected: BTreeMap<&str, Vec<(Cycle, &str)>> = BTreeMap::new();
    for port in &s.ports.outputs {
        expected.insert(port.as_str(), Vec::new());
    }
    for t in &s.tokens {
        for rd in &t.reads {
            expected
                .entry(rd.port.as_str())
                .or_default()
                .push((rd.cycle, t.id.as_str()));
        }
    }
    for list in expected.values_mut() {
        list.sort();
    }
    let mut ports: Vec<&str> = expected.keys().copied().collect();
    ports.extend(
        r.observed
            .keys()
            .map(String::as_str)
            .filter(|p| !expected.contains_key(p)),
    );
    ports.sort();
    let mut mismatches = Vec::new();
    for port in ports {
        let exp = expected.get(port).map(Vec::as_slice).unwrap_or(&[]);
        let obs = r.observed.get(port).map(Vec::as_slice).unwrap_or(&[]);
        let len = exp.len().max(obs.len());
        for i in 0..len {
            let e = exp.get(i);
            let o = obs.get(i);
            let same =
                matches!((e, o), (Some(&(ec, et)), Some(ob)) if ec == ob.cycle && et == ob.token);
            if !same {
                let cycle = match (e, o) {
                    (Some(&(ec, _)), Some(ob)) => ec.min(ob.cycle),
                    (Some(&(ec, _)), None) => ec,
                    (None, Some(ob)) => ob.cycle,
                    (None, None) => unreachable!(),
                };
                mismatches.push(Mismatch {
                    port: port.to_string(),
                    cycle,
                    expected: e.map(|&(_, t)| t.to_string()),
                    observed: o.map(|ob| ob.token.clone()),
                });
                break;
            }
        }
    }
    if mismatches.is_empty() && r.violations.is_empty() {
        Ok(())
    } else {
        Err(VerifyFailure {
            mismatches,
            violations: r.violations.len(),
        })
    }
}

pub fn occupancy_max(r: &SimResult, element: &str) -> Result<usize, SimError> {
    r.occupancy
        .get(element)
        .map(|t| t.iter().copied().max().unwrap_or(0))
        .ok_or_else(|| SimError::UnknownElement(element.to_string()))
}

/// `cycle,element,count` rows, cycle-major.
pub fn occupancy_csv(r: &SimResult) -> String {
    let mut out = String::from("cycle,element,count\n");
    for cycle in 0..r.cycles() {
        for (el, trace) in &r.occupancy {
            if let Some(count) = trace.get(cycle) {
                let _ = writeln!(out, "{cycle},{el},{count}");
            }
        }
    }
    out
}
