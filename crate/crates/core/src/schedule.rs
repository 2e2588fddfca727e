//! I/O access schedules: the design constraint the synthesizer consumes.
//!
//! A schedule lists every datum (token) crossing the adapter together with
//! the cycle and port on which it is written and the ordered cycles and
//! ports on which it is read back. Lifetimes and the max-live lower bound
//! are derived here; the generators build the synthetic workloads used by
//! the CLI and the test suites.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unitless clock cycle.
pub type Cycle = u32;

pub const DEFAULT_WIDTH_BITS: u32 = 8;

fn default_width() -> u32 {
    DEFAULT_WIDTH_BITS
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortSpec {
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
    #[serde(rename = "out")]
    pub outputs: Vec<String>,
}

impl PortSpec {
    /// `P0..P{inputs-1}` and `Q0..Q{outputs-1}`.
    pub fn numbered(inputs: usize, outputs: usize) -> Self {
        PortSpec {
            inputs: (0..inputs).map(|i| format!("P{i}")).collect(),
            outputs: (0..outputs).map(|i| format!("Q{i}")).collect(),
        }
    }
}

/// One write or read event: a port and the cycle it fires on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessEvent {
    pub port: String,
    pub cycle: Cycle,
}

impl AccessEvent {
    pub fn new(port: impl Into<String>, cycle: Cycle) -> Self {
        AccessEvent {
            port: port.into(),
            cycle,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataToken {
    pub id: String,
    pub write: AccessEvent,
    pub reads: Vec<AccessEvent>,
    #[serde(default = "default_width")]
    pub width: u32,
}

impl DataToken {
    pub fn new(id: impl Into<String>, write: AccessEvent, reads: Vec<AccessEvent>) -> Self {
        DataToken {
            id: id.into(),
            write,
            reads,
            width: DEFAULT_WIDTH_BITS,
        }
    }

    /// Write cycle (τ_min).
    pub fn tau_min(&self) -> Cycle {
        self.write.cycle
    }

    /// First read cycle. Falls back to the write cycle for a token without
    /// reads, which `validate` reports anyway.
    pub fn tau_first(&self) -> Cycle {
        self.reads.first().map_or(self.write.cycle, |r| r.cycle)
    }

    /// Last read cycle (τ_max).
    pub fn tau_max(&self) -> Cycle {
        self.reads.last().map_or(self.write.cycle, |r| r.cycle)
    }

    pub fn lifetime(&self) -> Interval {
        lifetime(self)
    }
}

/// Closed cycle interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: Cycle,
    pub end: Cycle,
}

impl Interval {
    pub fn new(start: Cycle, end: Cycle) -> Self {
        debug_assert!(start <= end);
        Interval { start, end }
    }

    /// Overlap that is more than a shared boundary cycle. Touching intervals
    /// (`[0,3]` and `[3,7]`) do not overlap: the slot is handed off within
    /// the boundary cycle.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn len(&self) -> Cycle {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessSchedule {
    pub ports: PortSpec,
    pub tokens: Vec<DataToken>,
}

impl AccessSchedule {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, id: &str) -> Option<&DataToken> {
        self.tokens.iter().find(|t| t.id == id)
    }

    /// Last cycle carrying any event, `None` for an empty schedule.
    pub fn last_cycle(&self) -> Option<Cycle> {
        self.tokens.iter().map(DataToken::tau_max).max()
    }

    pub fn input_index(&self, port: &str) -> Option<usize> {
        self.ports.inputs.iter().position(|p| p == port)
    }

    pub fn output_index(&self, port: &str) -> Option<usize> {
        self.ports.outputs.iter().position(|p| p == port)
    }

    /// Pretty JSON schedule document.
    pub fn to_document(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("schedule serializes");
        text.push('\n');
        text
    }
}

/// An invariant breach found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    NoInputPorts,
    NoOutputPorts,
    DuplicatePort {
        port: String,
    },
    DuplicateId {
        id: String,
    },
    UnknownInputPort {
        token: String,
        port: String,
    },
    UnknownOutputPort {
        token: String,
        port: String,
    },
    NoReads {
        token: String,
    },
    ZeroWidth {
        token: String,
    },
    ReadBeforeWrite {
        token: String,
        write: Cycle,
        read: Cycle,
    },
    ReadsNotIncreasing {
        token: String,
        cycle: Cycle,
    },
    PortWriteConflict {
        port: String,
        cycle: Cycle,
        tokens: Vec<String>,
    },
    PortReadConflict {
        port: String,
        cycle: Cycle,
        tokens: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoInputPorts => write!(f, "no input ports declared"),
            NoOutputPorts => write!(f, "no output ports declared"),
            DuplicatePort { port } => write!(f, "duplicate port name '{port}'"),
            DuplicateId { id } => write!(f, "duplicate id '{id}'"),
            UnknownInputPort { token, port } => {
                write!(
                    f,
                    "token '{token}' writes on undeclared input port '{port}'"
                )
            }
            UnknownOutputPort { token, port } => {
                write!(
                    f,
                    "token '{token}' reads on undeclared output port '{port}'"
                )
            }
            NoReads { token } => write!(f, "token '{token}' is never read"),
            ZeroWidth { token } => write!(f, "token '{token}' has zero width"),
            ReadBeforeWrite { token, write, read } => write!(
                f,
                "read before write: token '{token}' written @{write}, read @{read}"
            ),
            ReadsNotIncreasing { token, cycle } => write!(
                f,
                "token '{token}' read cycles not strictly increasing at @{cycle}"
            ),
            PortWriteConflict {
                port,
                cycle,
                tokens,
            } => write!(
                f,
                "port write conflict on '{port}' @{cycle}: {}",
                tokens.join(", ")
            ),
            PortReadConflict {
                port,
                cycle,
                tokens,
            } => write!(
                f,
                "port read conflict on '{port}' @{cycle}: {}",
                tokens.join(", ")
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid schedule: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("invalid generator parameters: {0}")]
    Generator(String),
}

/// Parse and validate a schedule document.
pub fn parse_schedule(text: &str) -> Result<AccessSchedule, ScheduleError> {
    let schedule: AccessSchedule =
        serde_json::from_str(text).map_err(|e| ScheduleError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let violations = validate(&schedule);
    if violations.is_empty() {
        Ok(schedule)
    } else {
        Err(ScheduleError::Invalid(violations))
    }
}

/// Every invariant breach in `s`, sorted. An empty list means valid.
pub fn validate(s: &AccessSchedule) -> Vec<Violation> {
    let mut out = Vec::new();
    if s.ports.inputs.is_empty() {
        out.push(Violation::NoInputPorts);
    }
    if s.ports.outputs.is_empty() {
        out.push(Violation::NoOutputPorts);
    }
    let mut names = HashSet::new();
    for port in s.ports.inputs.iter().chain(&s.ports.outputs) {
        if !names.insert(port.as_str()) {
            out.push(Violation::DuplicatePort { port: port.clone() });
        }
    }
    let inputs: HashSet<&str> = s.ports.inputs.iter().map(String::as_str).collect();
    let outputs: HashSet<&str> = s.ports.outputs.iter().map(String::as_str).collect();

    let mut ids = HashSet::new();
    let mut writes: BTreeMap<(&str, Cycle), Vec<String>> = BTreeMap::new();
    let mut reads: BTreeMap<(&str, Cycle), Vec<String>> = BTreeMap::new();
    for t in &s.tokens {
        if !ids.insert(t.id.as_str()) {
            out.push(Violation::DuplicateId { id: t.id.clone() });
        }
        if t.width == 0 {
            out.push(Violation::ZeroWidth {
                token: t.id.clone(),
            });
        }
        if !inputs.contains(t.write.port.as_str()) {
            out.push(Violation::UnknownInputPort {
                token: t.id.clone(),
                port: t.write.port.clone(),
            });
        }
        writes
            .entry((t.write.port.as_str(), t.write.cycle))
            .or_default()
            .push(t.id.clone());
        if t.reads.is_empty() {
            out.push(Violation::NoReads {
                token: t.id.clone(),
            });
        }
        let mut prev: Option<Cycle> = None;
        for r in &t.reads {
            if !outputs.contains(r.port.as_str()) {
                out.push(Violation::UnknownOutputPort {
                    token: t.id.clone(),
                    port: r.port.clone(),
                });
            }
            if r.cycle <= t.write.cycle {
                out.push(Violation::ReadBeforeWrite {
                    token: t.id.clone(),
                    write: t.write.cycle,
                    read: r.cycle,
                });
            }
            if prev.is_some_and(|p| r.cycle <= p) {
                out.push(Violation::ReadsNotIncreasing {
                    token: t.id.clone(),
                    cycle: r.cycle,
                });
            }
            prev = Some(r.cycle);
            reads
                .entry((r.port.as_str(), r.cycle))
                .or_default()
                .push(t.id.clone());
        }
    }
    for ((port, cycle), mut tokens) in writes {
        if tokens.len() > 1 {
            tokens.sort();
            out.push(Violation::PortWriteConflict {
                port: port.to_string(),
                cycle,
                tokens,
            });
        }
    }
    for ((port, cycle), mut tokens) in reads {
        if tokens.len() > 1 {
            tokens.sort();
            out.push(Violation::PortReadConflict {
                port: port.to_string(),
                cycle,
                tokens,
            });
        }
    }
    out.sort();
    out
}

/// `[write cycle, last read cycle]`.
pub fn lifetime(t: &DataToken) -> Interval {
    Interval::new(t.tau_min(), t.tau_max())
}

/// Largest number of tokens simultaneously live at any half-integer time
/// point, i.e. tokens whose open lifetime `(τ_min, τ_max)` contains it.
pub fn max_live(s: &AccessSchedule) -> usize {
    // (cycle, delta): a token is live on [τ_min, τ_max); ends sort before
    // starts at the same cycle so hand-offs do not count twice.
    let mut events: Vec<(Cycle, i32)> = Vec::with_capacity(2 * s.tokens.len());
    for t in &s.tokens {
        events.push((t.tau_min(), 1));
        events.push((t.tau_max(), -1));
    }
    events.sort();
    let mut live = 0i64;
    let mut best = 0i64;
    for (_, delta) in events {
        live += i64::from(delta);
        best = best.max(live);
    }
    best as usize
}

fn token_ids(n: usize) -> Vec<String> {
    let digits = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("d{i:0digits$}")).collect()
}

/// Single-port streaming workload: token `i` written at `i`, read once at
/// `read_offset + i`.
pub fn gen_linear(n: usize, read_offset: Cycle) -> Result<AccessSchedule, ScheduleError> {
    if n == 0 {
        return Err(ScheduleError::Generator("n must be at least 1".into()));
    }
    if (read_offset as usize) < n {
        return Err(ScheduleError::Generator(format!(
            "read offset {read_offset} < n = {n} would read before all data are stored"
        )));
    }
    let identity: Vec<usize> = (0..n).collect();
    gen_from_permutation(&identity, 1, 1, Some(read_offset))
}

/// Write tokens `0..n` in index order across `p_in` ports, read them in
/// `perm` order across `p_out` ports. `read_offset = None` picks the
/// smallest offset that keeps every read after its write.
pub fn gen_from_permutation(
    perm: &[usize],
    p_in: usize,
    p_out: usize,
    read_offset: Option<Cycle>,
) -> Result<AccessSchedule, ScheduleError> {
    if p_in == 0 || p_out == 0 {
        return Err(ScheduleError::Generator(
            "port counts must be at least 1".into(),
        ));
    }
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(ScheduleError::Generator(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    let write_cycle = |i: usize| (i / p_in) as Cycle;
    // read position of each token
    let mut position = vec![0usize; n];
    for (j, &tok) in perm.iter().enumerate() {
        position[tok] = j;
    }
    let min_offset = (0..n)
        .map(|i| (write_cycle(i) + 1).saturating_sub((position[i] / p_out) as Cycle))
        .max()
        .unwrap_or(0);
    let offset = match read_offset {
        Some(o) if o < min_offset => {
            return Err(ScheduleError::Generator(format!(
                "read offset {o} infeasible, needs at least {min_offset}"
            )))
        }
        Some(o) => o,
        None => min_offset,
    };
    let ports = PortSpec::numbered(p_in, p_out);
    let ids = token_ids(n);
    let tokens = (0..n)
        .map(|i| {
            let j = position[i];
            DataToken::new(
                ids[i].clone(),
                AccessEvent::new(ports.inputs[i % p_in].clone(), write_cycle(i)),
                vec![AccessEvent::new(
                    ports.outputs[j % p_out].clone(),
                    offset + (j / p_out) as Cycle,
                )],
            )
        })
        .collect();
    Ok(AccessSchedule { ports, tokens })
}

/// Row/column block interleaver: `rows × cols` tokens written row-major,
/// read column-major.
pub fn gen_block_interleaver(
    rows: usize,
    cols: usize,
    p_in: usize,
    p_out: usize,
    read_offset: Option<Cycle>,
) -> Result<AccessSchedule, ScheduleError> {
    if rows == 0 || cols == 0 {
        return Err(ScheduleError::Generator(
            "rows and cols must be at least 1".into(),
        ));
    }
    let perm: Vec<usize> = (0..cols)
        .flat_map(|c| (0..rows).map(move |r| r * cols + c))
        .collect();
    gen_from_permutation(&perm, p_in, p_out, read_offset)
}

/// Knobs for [`gen_random`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub tokens: usize,
    pub max_cycle: Cycle,
    pub inputs: usize,
    pub outputs: usize,
    pub max_reads: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            tokens: 16,
            max_cycle: 48,
            inputs: 2,
            outputs: 2,
            max_reads: 2,
        }
    }
}

/// Seeded random valid schedule. Tokens that cannot be placed (port slots
/// exhausted) are dropped, so the result may hold fewer than
/// `spec.tokens` tokens.
pub fn gen_random(spec: RandomSpec, seed: u64) -> Result<AccessSchedule, ScheduleError> {
    if spec.inputs == 0 || spec.outputs == 0 || spec.max_reads == 0 {
        return Err(ScheduleError::Generator(
            "ports and max_reads must be at least 1".into(),
        ));
    }
    if spec.max_cycle < 1 {
        return Err(ScheduleError::Generator(
            "max_cycle must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ports = PortSpec::numbered(spec.inputs, spec.outputs);
    let mut used_w: BTreeSet<(usize, Cycle)> = BTreeSet::new();
    let mut used_r: BTreeSet<(usize, Cycle)> = BTreeSet::new();
    let ids = token_ids(spec.tokens);
    let mut tokens = Vec::new();
    for id in ids {
        let mut placed = None;
        for _ in 0..32 {
            let port = rng.gen_range(0..spec.inputs);
            let cycle = rng.gen_range(0..spec.max_cycle);
            if !used_w.contains(&(port, cycle)) {
                placed = Some((port, cycle));
                break;
            }
        }
        let Some((wport, wcycle)) = placed else {
            continue;
        };
        let want = rng.gen_range(1..=spec.max_reads);
        let mut cycles: Vec<Cycle> = (wcycle + 1..=spec.max_cycle).collect();
        cycles.shuffle(&mut rng);
        let mut reads: Vec<(Cycle, usize)> = Vec::new();
        for c in cycles {
            if reads.len() == want {
                break;
            }
            let free: Vec<usize> = (0..spec.outputs)
                .filter(|&p| !used_r.contains(&(p, c)))
                .collect();
            if let Some(&p) = free.choose(&mut rng) {
                reads.push((c, p));
            }
        }
        if reads.is_empty() {
            continue;
        }
        reads.sort();
        used_w.insert((wport, wcycle));
        for &(c, p) in &reads {
            used_r.insert((p, c));
        }
        tokens.push(DataToken::new(
            id,
            AccessEvent::new(ports.inputs[wport].clone(), wcycle),
            reads
                .into_iter()
                .map(|(c, p)| AccessEvent::new(ports.outputs[p].clone(), c))
                .collect(),
        ));
    }
    Ok(AccessSchedule { ports, tokens })
}
