//! Shared fixtures and brute-force oracles. Nothing here calls into the
//! binder or the rule predicates.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use star_forge::schedule::{parse_schedule, AccessEvent, AccessSchedule, DataToken, PortSpec};

pub const SIX_TOKEN: &str = include_str!("../fixtures/six_token.json");

pub fn six_token() -> AccessSchedule {
    parse_schedule(SIX_TOKEN).expect("fixture parses")
}

/// Storage discipline replayed by [`replay`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discipline {
    /// Any held token is readable.
    Slots,
    Queue,
    Stack,
}

/// A bare token: write cycle and strictly increasing read cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bare {
    pub write: u32,
    pub reads: Vec<u32>,
}

/// Replay `tokens` (push order = slice order on equal write cycles) through
/// one single-ported element of `capacity` slots. Each cycle performs its
/// reads before its writes; a token is pushed at its write, peeked at
/// earlier reads and removed at its last read. Returns whether every access
/// is legal.
pub fn replay(tokens: &[Bare], discipline: Discipline, capacity: usize) -> bool {
    let last = tokens
        .iter()
        .flat_map(|t| t.reads.iter().copied())
        .max()
        .unwrap_or(0);
    let mut held: Vec<usize> = Vec::new(); // push order
    for cycle in 0..=last {
        let readers: Vec<usize> = (0..tokens.len())
            .filter(|&i| tokens[i].reads.contains(&cycle))
            .collect();
        let writers: Vec<usize> = (0..tokens.len())
            .filter(|&i| tokens[i].write == cycle)
            .collect();
        if readers.len() > 1 || writers.len() > 1 {
            return false;
        }
        if let Some(&i) = readers.first() {
            let Some(pos) = held.iter().position(|&h| h == i) else {
                return false;
            };
            let accessible = match discipline {
                Discipline::Slots => true,
                Discipline::Queue => pos == 0,
                Discipline::Stack => pos + 1 == held.len(),
            };
            if !accessible {
                return false;
            }
            if tokens[i].reads.last() == Some(&cycle) {
                held.remove(pos);
            }
        }
        if let Some(&i) = writers.first() {
            if held.len() == capacity {
                return false;
            }
            held.push(i);
        }
    }
    held.is_empty()
}

/// Every token with a write in `0..=max` and one or two later reads.
pub fn all_bare_tokens(max: u32) -> Vec<Bare> {
    let mut out = Vec::new();
    for w in 0..=max {
        for r1 in w + 1..=max {
            out.push(Bare {
                write: w,
                reads: vec![r1],
            });
            for r2 in r1 + 1..=max {
                out.push(Bare {
                    write: w,
                    reads: vec![r1, r2],
                });
            }
        }
    }
    out
}

pub fn to_token(id: &str, b: &Bare) -> DataToken {
    DataToken::new(
        id,
        AccessEvent::new("P0", b.write),
        b.reads.iter().map(|&c| AccessEvent::new("Q0", c)).collect(),
    )
}

/// Random valid schedule with up to `max_tokens` tokens and cycles below
/// `max_cycle`, built independently of the library's generators.
pub fn random_schedule(rng: &mut ChaCha8Rng, max_tokens: usize, max_cycle: u32) -> AccessSchedule {
    let inputs = rng.gen_range(1..=3);
    let outputs = rng.gen_range(1..=3);
    let ports = PortSpec {
        inputs: (0..inputs).map(|i| format!("in{i}")).collect(),
        outputs: (0..outputs).map(|i| format!("out{i}")).collect(),
    };
    let n = rng.gen_range(1..=max_tokens);
    let mut write_busy = vec![vec![false; max_cycle as usize]; inputs];
    let mut read_busy = vec![vec![false; max_cycle as usize]; outputs];
    let mut tokens = Vec::new();
    for k in 0..n {
        // bias towards short spans so that compatible pairs are common
        let span = rng.gen_range(1..=max_cycle / 2);
        let w = rng.gen_range(0..max_cycle - 1);
        let p = rng.gen_range(0..inputs);
        if write_busy[p][w as usize] {
            continue;
        }
        let nreads = rng.gen_range(1..=3);
        let mut reads = Vec::new();
        let mut c = w;
        for _ in 0..nreads {
            c += rng.gen_range(1..=span.max(1));
            if c >= max_cycle {
                break;
            }
            let q = rng.gen_range(0..outputs);
            if read_busy[q][c as usize] {
                continue;
            }
            reads.push((q, c));
        }
        if reads.is_empty() {
            continue;
        }
        write_busy[p][w as usize] = true;
        for &(q, c) in &reads {
            read_busy[q][c as usize] = true;
        }
        tokens.push(DataToken::new(
            format!("t{k:02}"),
            AccessEvent::new(ports.inputs[p].clone(), w),
            reads
                .into_iter()
                .map(|(q, c)| AccessEvent::new(ports.outputs[q].clone(), c))
                .collect(),
        ));
    }
    AccessSchedule { ports, tokens }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Max-live by sweeping every half-integer time point.
pub fn brute_max_live(s: &AccessSchedule) -> usize {
    let last = s.tokens.iter().map(|t| t.tau_max()).max().unwrap_or(0);
    (0..=last)
        .map(|t| {
            s.tokens
                .iter()
                .filter(|k| k.tau_min() <= t && t < k.tau_max())
                .count()
        })
        .max()
        .unwrap_or(0)
}
