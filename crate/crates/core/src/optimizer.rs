//! Merging of bound structures that are never busy at the same time.
//!
//! Two structures of the same kind are register compatible when no
//! lifetime segment of one strictly overlaps a segment of the other. A
//! chain of pairwise compatible structures collapses into one element whose
//! lifetime is the union of the chain's segments; the segment gaps stay
//! open for later merges.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::binder::{BindingResult, Segment, StorageKind, StorageStructure};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub survivor: String,
    pub absorbed: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizedArchitecture {
    pub structures: Vec<StorageStructure>,
    pub merges: Vec<MergeRecord>,
}

impl OptimizedArchitecture {
    /// The binding as-is, without merging.
    pub fn unmerged(b: &BindingResult) -> Self {
        OptimizedArchitecture {
            structures: b.structures.clone(),
            merges: Vec::new(),
        }
    }

    pub fn total_depth(&self) -> usize {
        self.structures.iter().map(|s| s.depth).sum()
    }

    pub fn to_binding(&self) -> BindingResult {
        BindingResult {
            residual: self
                .structures
                .iter()
                .filter(|s| s.kind == StorageKind::Reg)
                .flat_map(|s| s.members().map(str::to_string))
                .collect(),
            structures: self.structures.clone(),
        }
    }
}

pub fn structure_compatible(s1: &StorageStructure, s2: &StorageStructure) -> bool {
    s1.kind == s2.kind
        && s1.segments.iter().all(|a| {
            s2.segments
                .iter()
                .all(|b| !a.interval.overlaps(&b.interval))
        })
}

/// Longest chain of pairwise compatible structures among the `alive`
/// entries of a pool sorted by start. Ties: earliest start, then position.
fn longest_chain(compat: &[Vec<bool>], alive: &[bool]) -> Vec<usize> {
    let n = compat.len();
    let mut chains: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in (0..n).filter(|&v| alive[v]) {
        let mut best: Option<usize> = None;
        for u in (0..v).filter(|&u| alive[u] && compat[u][v]) {
            if let Some(b) = best {
                let (cu, cb) = (&chains[u], &chains[b]);
                if cu.len() < cb.len() || (cu.len() == cb.len() && cu >= cb) {
                    continue;
                }
            }
            if chains[u].iter().all(|&w| compat[w][v]) {
                best = Some(u);
            }
        }
        let mut chain = best.map(|u| chains[u].clone()).unwrap_or_default();
        chain.push(v);
        chains[v] = chain;
    }
    let mut best: Option<&Vec<usize>> = None;
    for chain in chains.iter().filter(|c| c.len() >= 2) {
        let better = match best {
            None => true,
            Some(b) => match chain.len().cmp(&b.len()) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => chain < b,
            },
        };
        if better {
            best = Some(chain);
        }
    }
    best.cloned().unwrap_or_default()
}

fn merge(chain: &[&StorageStructure]) -> StorageStructure {
    let mut segments: Vec<Segment> = chain
        .iter()
        .flat_map(|s| s.segments.iter().cloned())
        .collect();
    segments.sort_by_key(|s| s.interval);
    StorageStructure {
        id: chain[0].id.clone(),
        kind: chain[0].kind,
        depth: chain.iter().map(|s| s.depth).max().unwrap_or(1),
        segments,
    }
}

fn optimize_kind(
    mut pool: Vec<(usize, StorageStructure)>,
    merges: &mut Vec<MergeRecord>,
) -> Vec<(usize, StorageStructure)> {
    // start order, binding order on ties; the tag keeps binding order. A
    // merged structure starts with its first member, so it keeps that slot.
    pool.sort_by_key(|(pos, s)| (s.start().unwrap_or(0), *pos));
    let n = pool.len();
    let mut compat = vec![vec![false; n]; n];
    for u in 0..n {
        for v in u + 1..n {
            let ok = structure_compatible(&pool[u].1, &pool[v].1);
            compat[u][v] = ok;
            compat[v][u] = ok;
        }
    }
    let mut alive = vec![true; n];
    loop {
        let chain = longest_chain(&compat, &alive);
        if chain.len() < 2 {
            break;
        }
        let members: Vec<&StorageStructure> = chain.iter().map(|&i| &pool[i].1).collect();
        let merged = merge(&members);
        merges.push(MergeRecord {
            survivor: merged.id.clone(),
            absorbed: members[1..].iter().map(|s| s.id.clone()).collect(),
        });
        let head = chain[0];
        pool[head].1 = merged;
        for &i in &chain[1..] {
            alive[i] = false;
        }
        for x in 0..n {
            let ok = x != head && alive[x] && chain.iter().all(|&c| compat[c][x]);
            compat[head][x] = ok;
            compat[x][head] = ok;
        }
    }
    pool.into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(p, _)| p)
        .collect()
}

/// Merge register-compatible structures of the same kind until no
/// compatible pair remains. Never increases structure count or total depth.
pub fn optimize(b: &BindingResult) -> OptimizedArchitecture {
    let mut merges = Vec::new();
    let mut out: Vec<(usize, StorageStructure)> = Vec::new();
    for kind in [StorageKind::Fifo, StorageKind::Lifo, StorageKind::Reg] {
        let pool: Vec<(usize, StorageStructure)> = b
            .structures
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == kind)
            .map(|(i, s)| (i, s.clone()))
            .collect();
        out.extend(optimize_kind(pool, &mut merges));
    }
    out.sort_by_key(|(pos, _)| *pos);
    OptimizedArchitecture {
        structures: out.into_iter().map(|(_, s)| s).collect(),
        merges,
    }
}
