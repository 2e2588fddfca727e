//! Storage identification, sizing and greedy binding.
//!
//! FIFO and LIFO candidates are paths in the F- and L-tagged subgraphs of
//! the compatibility graph. Both subgraphs are DAGs over the chronological
//! vertex order, so the longest path falls out of one forward pass. The
//! binder repeatedly takes the best accepted candidate, turns it into a
//! storage structure and removes its tokens; whatever is left becomes one
//! register per token.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rcg::{CompatTag, CompatibilityGraph};
use crate::schedule::Interval;

/// Alternative paths retained per vertex for tie-breaking.
const BEAM_WIDTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StorageKind {
    Fifo,
    Lifo,
    Reg,
}

impl StorageKind {
    pub fn name(self) -> &'static str {
        match self {
            StorageKind::Fifo => "FIFO",
            StorageKind::Lifo => "LIFO",
            StorageKind::Reg => "REG",
        }
    }
}

/// Edge family a path travels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathKind {
    Fifo,
    Lifo,
}

impl PathKind {
    pub fn tag(self) -> CompatTag {
        match self {
            PathKind::Fifo => CompatTag::Fifo,
            PathKind::Lifo => CompatTag::Lifo,
        }
    }

    pub fn storage(self) -> StorageKind {
        match self {
            PathKind::Fifo => StorageKind::Fifo,
            PathKind::Lifo => StorageKind::Lifo,
        }
    }
}

/// Tokens that occupied a structure during one lifetime segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub interval: Interval,
    /// Chronological (write order) member ids.
    pub members: Vec<String>,
}

/// A bound storage element. Freshly bound structures carry one segment;
/// merged ones carry one segment per absorbed structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageStructure {
    pub id: String,
    pub kind: StorageKind,
    pub depth: usize,
    pub segments: Vec<Segment>,
}

impl StorageStructure {
    /// Member ids, chronological across segments.
    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.segments
            .iter()
            .flat_map(|s| s.members.iter().map(String::as_str))
    }

    pub fn member_count(&self) -> usize {
        self.segments.iter().map(|s| s.members.len()).sum()
    }

    pub fn lifetime(&self) -> Vec<Interval> {
        self.segments.iter().map(|s| s.interval).collect()
    }

    /// `[first start, last end]`.
    pub fn envelope(&self) -> Option<Interval> {
        let start = self.segments.iter().map(|s| s.interval.start).min()?;
        let end = self.segments.iter().map(|s| s.interval.end).max()?;
        Some(Interval::new(start, end))
    }

    pub fn start(&self) -> Option<u32> {
        self.segments.first().map(|s| s.interval.start)
    }
}

/// Lifetime segments of a structure: the member envelope for fresh
/// structures, the union of absorbed envelopes for merged ones.
pub fn structure_lifetime(st: &StorageStructure) -> Vec<Interval> {
    st.lifetime()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindPriority {
    #[default]
    Fifo,
    Lifo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingConfig {
    pub min_fifo_len: usize,
    pub min_lifo_len: usize,
    /// Minimum mean occupancy / depth over the structure's envelope.
    pub fill_threshold: f64,
    pub kind_priority: KindPriority,
    pub enable_fifo: bool,
    pub enable_lifo: bool,
}

impl Default for BindingConfig {
    fn default() -> Self {
        BindingConfig {
            min_fifo_len: 2,
            min_lifo_len: 2,
            fill_threshold: 0.0,
            kind_priority: KindPriority::Fifo,
            enable_fifo: true,
            enable_lifo: true,
        }
    }
}

impl BindingConfig {
    pub fn registers_only() -> Self {
        BindingConfig {
            enable_fifo: false,
            enable_lifo: false,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), BindError> {
        if self.min_fifo_len < 2 || self.min_lifo_len < 2 {
            return Err(BindError::Config(
                "minimum FIFO/LIFO length must be at least 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.fill_threshold) {
            return Err(BindError::Config(format!(
                "fill threshold {} outside [0, 1]",
                self.fill_threshold
            )));
        }
        Ok(())
    }

    fn min_len(&self, kind: PathKind) -> usize {
        match kind {
            PathKind::Fifo => self.min_fifo_len,
            PathKind::Lifo => self.min_lifo_len,
        }
    }

    fn enabled(&self, kind: PathKind) -> bool {
        match kind {
            PathKind::Fifo => self.enable_fifo,
            PathKind::Lifo => self.enable_lifo,
        }
    }

    fn preferred(&self, kind: PathKind) -> bool {
        matches!(
            (self.kind_priority, kind),
            (KindPriority::Fifo, PathKind::Fifo) | (KindPriority::Lifo, PathKind::Lifo)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingResult {
    /// FIFO/LIFO structures in binding order, then one register per
    /// residual token.
    pub structures: Vec<StorageStructure>,
    /// Tokens that ended up in registers.
    pub residual: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BindError {
    #[error("empty path")]
    EmptyPath,
    #[error("path is not connected by {tag:?} edges between '{from}' and '{to}'")]
    Disconnected {
        tag: CompatTag,
        from: String,
        to: String,
    },
    #[error("invalid binding configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PathState {
    len: usize,
    depth: usize,
    first: usize,
    pred: Option<(usize, usize)>,
}

fn reconstruct(beams: &[Vec<PathState>], mut v: usize, mut k: usize) -> Vec<usize> {
    let mut path = Vec::with_capacity(beams[v][k].len);
    loop {
        path.push(v);
        match beams[v][k].pred {
            Some((u, j)) => {
                v = u;
                k = j;
            }
            None => break,
        }
    }
    path.reverse();
    path
}

fn cmp_ids(g: &CompatibilityGraph, a: &[usize], b: &[usize]) -> Ordering {
    a.iter()
        .map(|&v| g.vertex(v).id.as_str())
        .cmp(b.iter().map(|&v| g.vertex(v).id.as_str()))
}

/// Longer, then shallower (more savings), then earlier start, then ids.
fn cmp_paths(
    g: &CompatibilityGraph,
    (sa, pa): (&PathState, &[usize]),
    (sb, pb): (&PathState, &[usize]),
) -> Ordering {
    sb.len
        .cmp(&sa.len)
        .then(sa.depth.cmp(&sb.depth))
        .then(sa.first.cmp(&sb.first))
        .then_with(|| cmp_ids(g, pa, pb))
}

/// Number of `kind`-tagged edges into `v` from vertices of `path`.
fn incoming_from(g: &CompatibilityGraph, path: &[usize], v: usize, tag: CompatTag) -> usize {
    path.iter().filter(|&&u| g.tag(u, v) == tag).count()
}

/// Path members with an F-edge into `v`, for a path ending at state
/// `(u, k)` that `v` extends. Last-read cycles increase along a FIFO chain,
/// so these are the trailing members still live when `v` is written.
fn live_tail(
    g: &CompatibilityGraph,
    beams: &[Vec<PathState>],
    (mut u, mut k): (usize, usize),
    v: usize,
) -> usize {
    let write = g.vertex(v).tau_min;
    let mut count = 0;
    while g.vertex(u).tau_max > write {
        count += 1;
        match beams[u][k].pred {
            Some((pu, pk)) => (u, k) = (pu, pk),
            None => break,
        }
    }
    count
}

fn cheap_key(st: &PathState) -> (std::cmp::Reverse<usize>, usize, usize) {
    (std::cmp::Reverse(st.len), st.depth, st.first)
}

/// Best `BEAM_WIDTH` candidates ending at one vertex, best first. Id
/// sequences are only built for candidates tying on every cheaper key.
fn select_beam(
    g: &CompatibilityGraph,
    beams: &[Vec<PathState>],
    mut cands: Vec<PathState>,
) -> Vec<PathState> {
    if cands.len() > BEAM_WIDTH {
        cands.select_nth_unstable_by_key(BEAM_WIDTH - 1, cheap_key);
        let cutoff = cheap_key(&cands[BEAM_WIDTH - 1]);
        cands.retain(|st| cheap_key(st) <= cutoff);
    }
    let path_of = |st: &PathState| match st.pred {
        Some((u, k)) => reconstruct(beams, u, k),
        None => Vec::new(),
    };
    let mut keyed: Vec<_> = cands.into_iter().map(|st| (cheap_key(&st), st)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.pred.cmp(&b.1.pred)));
    let mut i = 0;
    while i < keyed.len().min(BEAM_WIDTH) {
        let mut j = i + 1;
        while j < keyed.len() && keyed[j].0 == keyed[i].0 {
            j += 1;
        }
        if j - i > 1 {
            let mut group: Vec<(Vec<usize>, PathState)> = keyed[i..j]
                .iter()
                .map(|(_, st)| (path_of(st), *st))
                .collect();
            group.sort_by(|a, b| cmp_ids(g, &a.0, &b.0));
            for (slot, (_, st)) in keyed[i..j].iter_mut().zip(group) {
                slot.1 = st;
            }
        }
        i = j;
    }
    keyed.truncate(BEAM_WIDTH);
    keyed.into_iter().map(|(_, st)| st).collect()
}

/// Forward-pass state over the `kind` subgraph: the best few paths ending
/// at each vertex, kept up to date as vertices are taken out.
struct Beams {
    kind: PathKind,
    states: Vec<Vec<PathState>>,
    // best accepted candidate among each vertex's beam
    best: Vec<Option<Candidate>>,
}

impl Beams {
    fn new(g: &CompatibilityGraph, kind: PathKind) -> Self {
        let n = g.len();
        Beams {
            kind,
            states: vec![Vec::new(); n],
            best: (0..n).map(|_| None).collect(),
        }
    }

    fn preds<'g>(&self, g: &'g CompatibilityGraph, v: usize) -> &'g [usize] {
        match self.kind {
            PathKind::Fifo => g.fifo_predecessors(v),
            PathKind::Lifo => g.lifo_predecessors(v),
        }
    }

    fn compute(&self, g: &CompatibilityGraph, available: &[bool], v: usize) -> Vec<PathState> {
        let preds = self.preds(g, v);
        let mut cands = vec![PathState {
            len: 1,
            depth: 1,
            first: v,
            pred: None,
        }];
        for &u in preds {
            if !available[u] {
                continue;
            }
            for (k, st) in self.states[u].iter().enumerate() {
                cands.push(PathState {
                    len: st.len + 1,
                    depth: st.depth,
                    first: st.first,
                    pred: Some((u, k)),
                });
            }
        }
        // length ranks first, so only paths as long as the BEAM_WIDTH-th
        // longest can make the beam
        if cands.len() > BEAM_WIDTH {
            let (_, nth, _) =
                cands.select_nth_unstable_by(BEAM_WIDTH - 1, |a, b| b.len.cmp(&a.len));
            let floor = nth.len;
            cands.retain(|st| st.len >= floor);
        }
        for st in cands.iter_mut() {
            if let Some((u, k)) = st.pred {
                st.depth = match self.kind {
                    PathKind::Fifo => st.depth.max(1 + live_tail(g, &self.states, (u, k), v)),
                    PathKind::Lifo => st.len,
                };
            }
        }
        select_beam(g, &self.states, cands)
    }

    /// Bring every vertex up to date with `available`. `removed` marks the
    /// vertices taken out since the last call; `None` recomputes everything.
    fn refresh(
        &mut self,
        g: &CompatibilityGraph,
        available: &[bool],
        removed: Option<&[bool]>,
        cfg: Option<&BindingConfig>,
    ) {
        let n = g.len();
        let mut changed = vec![false; n];
        for v in 0..n {
            let dirty = match removed {
                None => true,
                Some(removed) => {
                    removed[v]
                        || self.preds(g, v).iter().any(|&u| changed[u])
                        || self.states[v]
                            .iter()
                            .any(|st| st.pred.is_some_and(|(u, _)| removed[u]))
                }
            };
            if !dirty {
                continue;
            }
            let kept = if available[v] {
                self.compute(g, available, v)
            } else {
                Vec::new()
            };
            changed[v] = removed.is_none()
                || kept != self.states[v]
                || kept
                    .iter()
                    .any(|st| st.pred.is_some_and(|(u, _)| changed[u]));
            if !changed[v] {
                continue;
            }
            self.states[v] = kept;
            if let Some(cfg) = cfg {
                self.best[v] = self.best_at(g, v, cfg);
            }
        }
    }

    fn best_at(&self, g: &CompatibilityGraph, v: usize, cfg: &BindingConfig) -> Option<Candidate> {
        let min = cfg.min_len(self.kind);
        let mut best: Option<Candidate> = None;
        for (k, st) in self.states[v].iter().enumerate() {
            if st.len < min || best.as_ref().is_some_and(|b| st.len < b.score.members) {
                continue;
            }
            let path = reconstruct(&self.states, v, k);
            let Verdict::Accepted(score) = score_structure(g, &path, self.kind, st.depth, cfg)
            else {
                continue;
            };
            let cand = Candidate {
                kind: self.kind,
                score,
                depth: st.depth,
                path,
            };
            if best
                .as_ref()
                .is_none_or(|b| cmp_candidates(g, &cand, b) == Ordering::Less)
            {
                best = Some(cand);
            }
        }
        best
    }

    fn best_candidate(&self, g: &CompatibilityGraph) -> Option<&Candidate> {
        self.best
            .iter()
            .flatten()
            .min_by(|a, b| cmp_candidates(g, a, b))
    }
}

fn path_beams(g: &CompatibilityGraph, kind: PathKind, available: &[bool]) -> Vec<Vec<PathState>> {
    let mut beams = Beams::new(g, kind);
    beams.refresh(g, available, None, None);
    beams.states
}

/// Longest `kind`-tagged path among `available` vertices (by vertex index),
/// empty when no such edge exists.
///
/// Length is exact. Among equally long paths the one with the largest
/// savings (members − depth) wins, then the earliest first write, then the
/// lexicographically smallest id sequence; the savings comparison only
/// sees the paths retained in a per-vertex beam.
pub fn longest_path(g: &CompatibilityGraph, kind: PathKind, available: &[bool]) -> Vec<usize> {
    let beams = path_beams(g, kind, available);
    let mut best: Option<(PathState, Vec<usize>)> = None;
    for (v, beam) in beams.iter().enumerate() {
        let Some(st) = beam.first() else { continue };
        let path = reconstruct(&beams, v, 0);
        let better = match &best {
            None => true,
            Some((bs, bp)) => cmp_paths(g, (st, &path), (bs, bp)) == Ordering::Less,
        };
        if better {
            best = Some((*st, path));
        }
    }
    best.map(|(_, p)| p)
        .filter(|p| p.len() > 1)
        .unwrap_or_default()
}

/// Slots needed by a FIFO holding `path`: one more than the largest number
/// of F-edges entering a path vertex from earlier path vertices.
pub fn fifo_size(path: &[usize], g: &CompatibilityGraph) -> Result<usize, BindError> {
    if path.is_empty() {
        return Err(BindError::EmptyPath);
    }
    for w in path.windows(2) {
        if w[0] >= w[1] || g.tag(w[0], w[1]) != CompatTag::Fifo {
            return Err(BindError::Disconnected {
                tag: CompatTag::Fifo,
                from: g.vertex(w[0]).id.clone(),
                to: g.vertex(w[1]).id.clone(),
            });
        }
    }
    let widest = (1..path.len())
        .map(|i| incoming_from(g, &path[..i], path[i], CompatTag::Fifo))
        .max()
        .unwrap_or(0);
    Ok(1 + widest)
}

/// Nested lifetimes are all live at once: one slot per member.
pub fn lifo_size(path: &[usize]) -> usize {
    path.len()
}

/// Mean occupancy over the envelope divided by depth.
pub fn fill_factor(g: &CompatibilityGraph, path: &[usize], depth: usize) -> f64 {
    if path.is_empty() || depth == 0 {
        return 0.0;
    }
    let start = path.iter().map(|&v| g.vertex(v).tau_min).min().unwrap_or(0);
    let end = path.iter().map(|&v| g.vertex(v).tau_max).max().unwrap_or(0);
    if end <= start {
        return 0.0;
    }
    let busy: u64 = path
        .iter()
        .map(|&v| u64::from(g.vertex(v).lifetime().len()))
        .sum();
    busy as f64 / f64::from(end - start) / depth as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Score {
    pub members: usize,
    pub savings: usize,
    pub preferred: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Accepted(Score),
    TooShort { members: usize, min: usize },
    Underfilled { fill: f64, threshold: f64 },
}

impl Verdict {
    pub fn score(&self) -> Option<Score> {
        match self {
            Verdict::Accepted(s) => Some(*s),
            _ => None,
        }
    }
}

pub fn score_structure(
    g: &CompatibilityGraph,
    path: &[usize],
    kind: PathKind,
    depth: usize,
    cfg: &BindingConfig,
) -> Verdict {
    let min = cfg.min_len(kind);
    if path.len() < min {
        return Verdict::TooShort {
            members: path.len(),
            min,
        };
    }
    let fill = fill_factor(g, path, depth);
    if fill < cfg.fill_threshold {
        return Verdict::Underfilled {
            fill,
            threshold: cfg.fill_threshold,
        };
    }
    Verdict::Accepted(Score {
        members: path.len(),
        savings: path.len() - depth,
        preferred: cfg.preferred(kind),
    })
}

struct Candidate {
    kind: PathKind,
    score: Score,
    depth: usize,
    path: Vec<usize>,
}

fn cmp_candidates(g: &CompatibilityGraph, a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .cmp(&a.score)
        .then(a.path[0].cmp(&b.path[0]))
        .then_with(|| cmp_ids(g, &a.path, &b.path))
}

fn make_structure(
    g: &CompatibilityGraph,
    id: String,
    kind: StorageKind,
    depth: usize,
    path: &[usize],
) -> StorageStructure {
    let start = path.iter().map(|&v| g.vertex(v).tau_min).min().unwrap_or(0);
    let end = path.iter().map(|&v| g.vertex(v).tau_max).max().unwrap_or(0);
    StorageStructure {
        id,
        kind,
        depth,
        segments: vec![Segment {
            interval: Interval::new(start, end),
            members: path.iter().map(|&v| g.vertex(v).id.clone()).collect(),
        }],
    }
}

/// Greedy binding: take the best accepted FIFO or LIFO path, collapse it,
/// repeat on the remaining tokens, then give every leftover token its own
/// register.
pub fn bind(g: &CompatibilityGraph, cfg: &BindingConfig) -> BindingResult {
    let n = g.len();
    let mut available = vec![true; n];
    let mut structures = Vec::new();
    let mut beams: Vec<Beams> = [PathKind::Fifo, PathKind::Lifo]
        .into_iter()
        .filter(|&k| cfg.enabled(k))
        .map(|k| Beams::new(g, k))
        .collect();
    let mut removed: Option<Vec<bool>> = None;
    loop {
        for b in beams.iter_mut() {
            b.refresh(g, &available, removed.as_deref(), Some(cfg));
        }
        let win = beams
            .iter()
            .filter_map(|b| b.best_candidate(g))
            .min_by(|a, b| cmp_candidates(g, a, b));
        let Some(win) = win else { break };
        let mut gone = vec![false; n];
        for &v in &win.path {
            available[v] = false;
            gone[v] = true;
        }
        let id = format!("S{}", structures.len());
        structures.push(make_structure(
            g,
            id,
            win.kind.storage(),
            win.depth,
            &win.path,
        ));
        removed = Some(gone);
    }
    let mut residual = Vec::new();
    for v in (0..n).filter(|&v| available[v]) {
        let id = format!("S{}", structures.len());
        structures.push(make_structure(g, id, StorageKind::Reg, 1, &[v]));
        residual.push(g.vertex(v).id.clone());
    }
    BindingResult {
        structures,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcg::build_rcg;
    use crate::schedule::{gen_from_permutation, gen_linear, Cycle};

    #[test]
    fn empty_available_set_gives_empty_path() {
        let g = build_rcg(&gen_linear(5, 5).unwrap());
        assert!(longest_path(&g, PathKind::Fifo, &[false; 5]).is_empty());
        assert!(longest_path(&g, PathKind::Lifo, &[true; 5]).is_empty());
    }

    #[test]
    fn linear_binds_one_full_fifo() {
        let g = build_rcg(&gen_linear(8, 8).unwrap());
        let b = bind(&g, &BindingConfig::default());
        assert_eq!(b.structures.len(), 1);
        assert_eq!(b.structures[0].kind, StorageKind::Fifo);
        assert_eq!(b.structures[0].depth, 8);
        assert_eq!(b.structures[0].member_count(), 8);
        assert!(b.residual.is_empty());
    }

    #[test]
    fn reversal_is_one_lifo_chain() {
        let perm: Vec<usize> = (0..5).rev().collect();
        let g = build_rcg(&gen_from_permutation(&perm, 1, 1, None).unwrap());
        let path = longest_path(&g, PathKind::Lifo, &[true; 5]);
        assert_eq!(path, vec![0, 1, 2, 3, 4]);
        assert_eq!(lifo_size(&path), 5);
        let b = bind(&g, &BindingConfig::default());
        assert_eq!(b.structures.len(), 1);
        assert_eq!(b.structures[0].kind, StorageKind::Lifo);
        assert_eq!(b.structures[0].depth, 5);
    }

    #[test]
    fn disabled_kinds_give_registers() {
        let g = build_rcg(&gen_linear(6, 6).unwrap());
        let b = bind(&g, &BindingConfig::registers_only());
        assert_eq!(b.structures.len(), 6);
        assert!(b
            .structures
            .iter()
            .all(|s| s.kind == StorageKind::Reg && s.depth == 1));
        assert_eq!(b.residual.len(), 6);
    }

    #[test]
    fn min_length_rejects_short_paths() {
        let g = build_rcg(&gen_linear(3, 3).unwrap());
        let cfg = BindingConfig {
            min_fifo_len: 7,
            ..BindingConfig::default()
        };
        let path = longest_path(&g, PathKind::Fifo, &[true; 3]);
        assert_eq!(
            score_structure(&g, &path, PathKind::Fifo, 3, &cfg),
            Verdict::TooShort { members: 3, min: 7 }
        );
        assert_eq!(bind(&g, &cfg).residual.len(), 3);
    }

    #[test]
    fn fill_threshold_rejects_sparse_fifo() {
        // token i lives [i, n+i]: mean occupancy n²/(2n-1) over depth n.
        let n = 6usize;
        let g = build_rcg(&gen_linear(n, n as Cycle).unwrap());
        let path: Vec<usize> = (0..n).collect();
        let fill = fill_factor(&g, &path, n);
        assert!((fill - 6.0 / 11.0).abs() < 1e-12);
        let cfg = BindingConfig {
            fill_threshold: 0.6,
            ..BindingConfig::default()
        };
        assert!(matches!(
            score_structure(&g, &path, PathKind::Fifo, n, &cfg),
            Verdict::Underfilled { .. }
        ));
    }

    #[test]
    fn fifo_size_rejects_broken_path() {
        let perm: Vec<usize> = (0..3).rev().collect();
        let g = build_rcg(&gen_from_permutation(&perm, 1, 1, None).unwrap());
        assert!(matches!(
            fifo_size(&[0, 1], &g),
            Err(BindError::Disconnected { .. })
        ));
        assert_eq!(fifo_size(&[], &g), Err(BindError::EmptyPath));
        assert_eq!(fifo_size(&[2], &g), Ok(1));
    }

    #[test]
    fn incremental_refresh_matches_recompute() {
        use crate::schedule::{gen_random, RandomSpec};
        let spec = RandomSpec {
            tokens: 28,
            max_cycle: 40,
            inputs: 2,
            outputs: 2,
            max_reads: 3,
        };
        let mut passes = 0;
        for seed in 0..60 {
            let g = build_rcg(&gen_random(spec, seed).unwrap());
            let n = g.len();
            let cfg = BindingConfig {
                min_lifo_len: 2 + (seed as usize % 3),
                ..BindingConfig::default()
            };
            let mut inc: Vec<Beams> = [PathKind::Fifo, PathKind::Lifo]
                .into_iter()
                .map(|k| Beams::new(&g, k))
                .collect();
            let mut available = vec![true; n];
            let mut removed: Option<Vec<bool>> = None;
            loop {
                for b in inc.iter_mut() {
                    b.refresh(&g, &available, removed.as_deref(), Some(&cfg));
                    let mut fresh = Beams::new(&g, b.kind);
                    fresh.refresh(&g, &available, None, Some(&cfg));
                    assert_eq!(b.states, fresh.states, "seed {seed}");
                    for v in 0..n {
                        for (k, st) in b.states[v].iter().enumerate() {
                            let path = reconstruct(&b.states, v, k);
                            let size = match b.kind {
                                PathKind::Fifo => fifo_size(&path, &g).unwrap(),
                                PathKind::Lifo => lifo_size(&path),
                            };
                            assert_eq!(st.depth, size, "seed {seed}");
                        }
                    }
                }
                let Some(win) = inc
                    .iter()
                    .filter_map(|b| b.best_candidate(&g))
                    .min_by(|a, b| cmp_candidates(&g, a, b))
                else {
                    break;
                };
                let mut gone = vec![false; n];
                for &v in &win.path {
                    available[v] = false;
                    gone[v] = true;
                }
                removed = Some(gone);
                passes += 1;
            }
        }
        assert!(passes > 120, "{passes}");
    }

    #[test]
    fn config_check() {
        assert!(BindingConfig::default().check().is_ok());
        assert!(BindingConfig {
            min_fifo_len: 1,
            ..BindingConfig::default()
        }
        .check()
        .is_err());
        assert!(BindingConfig {
            fill_threshold: 1.5,
            ..BindingConfig::default()
        }
        .check()
        .is_err());
    }
}
