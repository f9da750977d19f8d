//! Paths whose square is already present: every pair of vertices at
//! distance one or two along the sequence is an edge. The sequence is
//! organized into segments, each either a matched pillar (two vertices)
//! or the odd-order gadget (five vertices), and the search operations
//! below all act at segment boundaries.

use crate::graph::{Graph, VertexId};
use crate::matching::{FreeSet, Matching, PairId};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seg {
    Pillar(PairId),
    Gadget,
}

// Segments are never empty; len is 2 or 5.
#[allow(clippy::len_without_is_empty)]
impl Seg {
    /// Vertices the segment contributes to the sequence.
    pub fn len(&self) -> usize {
        match self {
            Seg::Pillar(_) => 2,
            Seg::Gadget => 5,
        }
    }

    /// Pillar-equivalents for split accounting. The gadget spans what two
    /// pillars would otherwise cover.
    pub fn weight(&self) -> usize {
        match self {
            Seg::Pillar(_) => 1,
            Seg::Gadget => 2,
        }
    }
}

/// Five extra vertices that absorb the leftover vertex of an odd order.
/// The traversal (d, a, c, b, e) and its reverse are both supported by the
/// same seven edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gadget {
    pub a: VertexId,
    pub b: VertexId,
    pub c: VertexId,
    pub d: VertexId,
    pub e: VertexId,
}

impl Gadget {
    pub fn run(&self) -> [VertexId; 5] {
        [self.d, self.a, self.c, self.b, self.e]
    }

    pub fn vertices(&self) -> [VertexId; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }

    pub fn edges(&self) -> [(VertexId, VertexId); 7] {
        [
            (self.a, self.b),
            (self.a, self.c),
            (self.b, self.c),
            (self.a, self.d),
            (self.c, self.d),
            (self.b, self.e),
            (self.c, self.e),
        ]
    }

    pub fn holds_in(&self, g: &Graph) -> bool {
        let vs = self.vertices();
        for i in 0..5 {
            if vs[i] as usize >= g.n() {
                return false;
            }
            for j in (i + 1)..5 {
                if vs[i] == vs[j] {
                    return false;
                }
            }
        }
        self.edges().iter().all(|&(u, v)| g.has_edge(u, v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPath {
    seq: Vec<VertexId>,
    segs: Vec<Seg>,
}

impl TwoPath {
    pub fn from_parts(seq: Vec<VertexId>, segs: Vec<Seg>) -> TwoPath {
        let expect: usize = segs.iter().map(|s| s.len()).sum();
        assert_eq!(seq.len(), expect, "segment layout does not cover the sequence");
        TwoPath { seq, segs }
    }

    pub fn single_pillar(m: &Matching, pid: PairId) -> TwoPath {
        let (u, v) = m.pair(pid);
        TwoPath {
            seq: vec![u, v],
            segs: vec![Seg::Pillar(pid)],
        }
    }

    pub fn gadget_seed(g: &Gadget) -> TwoPath {
        TwoPath {
            seq: g.run().to_vec(),
            segs: vec![Seg::Gadget],
        }
    }

    pub fn seq(&self) -> &[VertexId] {
        &self.seq
    }

    pub fn segs(&self) -> &[Seg] {
        &self.segs
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Pillar-equivalents covered by the whole path.
    pub fn pillar_weight(&self) -> usize {
        self.segs.iter().map(|s| s.weight()).sum()
    }

    /// Vertices preceding segment j.
    pub fn prefix_len(&self, j: usize) -> usize {
        self.segs[..j].iter().map(|s| s.len()).sum()
    }

    pub fn reversed(&self) -> TwoPath {
        let mut seq = self.seq.clone();
        seq.reverse();
        let mut segs = self.segs.clone();
        segs.reverse();
        TwoPath { seq, segs }
    }

    /// Segment boundaries where a rotation may act: the suffix must still
    /// carry at least two pillar-equivalents, and the prefix must be
    /// nonempty.
    pub fn split_candidates(&self) -> impl Iterator<Item = usize> + '_ {
        let mut suffix_weight: Vec<usize> = vec![0; self.segs.len() + 1];
        for j in (0..self.segs.len()).rev() {
            suffix_weight[j] = suffix_weight[j + 1] + self.segs[j].weight();
        }
        (1..self.segs.len()).filter(move |&j| suffix_weight[j] >= 2)
    }

    /// Dedup keys for the two ends: the pillar index, or a sentinel above
    /// the pillar range that identifies which gadget side is exposed.
    pub fn end_keys(&self, m_len: usize) -> (u64, u64) {
        let key = |seg: &Seg, end_vertex: VertexId| match seg {
            Seg::Pillar(pid) => *pid as u64,
            Seg::Gadget => m_len as u64 + 1 + end_vertex as u64,
        };
        (
            key(self.segs.first().unwrap(), self.seq[0]),
            key(self.segs.last().unwrap(), *self.seq.last().unwrap()),
        )
    }
}

/// Total validity check: segment layout, vertex distinctness, pillar and
/// gadget shape, and every distance-1 and distance-2 pair an edge of gamma.
/// Never panics, whatever the input.
pub fn validate(p: &TwoPath, gamma: &Graph, m: &Matching, gadget: Option<&Gadget>) -> bool {
    if p.segs.is_empty() || m.n() != gamma.n() {
        return false;
    }
    let expect: usize = p.segs.iter().map(|s| s.len()).sum();
    if p.seq.len() != expect {
        return false;
    }
    let n = gamma.n();
    let mut seen = vec![false; n];
    for &v in &p.seq {
        if v as usize >= n || seen[v as usize] {
            return false;
        }
        seen[v as usize] = true;
    }
    let mut used_pid = vec![false; m.len()];
    let mut gadget_segs = 0;
    let mut off = 0;
    for seg in &p.segs {
        match seg {
            Seg::Pillar(pid) => {
                if *pid as usize >= m.len() || used_pid[*pid as usize] {
                    return false;
                }
                used_pid[*pid as usize] = true;
                let (a, b) = m.pair(*pid);
                let (x, y) = (p.seq[off], p.seq[off + 1]);
                if (x, y) != (a, b) && (x, y) != (b, a) {
                    return false;
                }
            }
            Seg::Gadget => {
                gadget_segs += 1;
                if gadget_segs > 1 {
                    return false;
                }
                let Some(g) = gadget else { return false };
                let run = g.run();
                let slice = &p.seq[off..off + 5];
                let fwd = slice == run;
                let rev = slice.iter().rev().eq(run.iter());
                if !fwd && !rev {
                    return false;
                }
            }
        }
        off += seg.len();
    }
    for i in 0..p.seq.len().saturating_sub(1) {
        if !gamma.has_edge(p.seq[i], p.seq[i + 1]) {
            return false;
        }
    }
    for i in 0..p.seq.len().saturating_sub(2) {
        if !gamma.has_edge(p.seq[i], p.seq[i + 2]) {
            return false;
        }
    }
    true
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RotateError {
    #[error("split {split} is not a rotation boundary (segments: {segments})")]
    InvalidSplit { split: usize, segments: usize },
    #[error("a required junction edge is missing")]
    MissingEdge,
}

/// Reverses the suffix starting at segment `split`. With (w1, w2) the last
/// two vertices before the split and (z1, z2) the last two of the path, the
/// junction needs edges {w1, z2}, {w2, z1}, {w2, z2}; everything else is
/// inherited from the input, so the output is again valid whenever the
/// input was.
pub fn rotate(p: &TwoPath, split: usize, g: &Graph) -> Result<TwoPath, RotateError> {
    let t = p.segs.len();
    let suffix_weight: usize = p.segs.get(split..).map_or(0, |s| {
        s.iter().map(|x| x.weight()).sum()
    });
    if split == 0 || split >= t || suffix_weight < 2 {
        return Err(RotateError::InvalidSplit { split, segments: t });
    }
    let pos = p.prefix_len(split);
    let (w1, w2) = (p.seq[pos - 2], p.seq[pos - 1]);
    let len = p.seq.len();
    let (z1, z2) = (p.seq[len - 2], p.seq[len - 1]);
    if !(g.has_edge(w1, z2) && g.has_edge(w2, z1) && g.has_edge(w2, z2)) {
        return Err(RotateError::MissingEdge);
    }
    let mut seq = Vec::with_capacity(len);
    seq.extend_from_slice(&p.seq[..pos]);
    seq.extend(p.seq[pos..].iter().rev());
    let mut segs = Vec::with_capacity(t);
    segs.extend_from_slice(&p.segs[..split]);
    segs.extend(p.segs[split..].iter().rev());
    Ok(TwoPath { seq, segs })
}

/// Appends the free pillar `pid` in the given orientation (u, v) when the
/// three attachment edges and the pillar edge itself are present.
fn try_append(p: &TwoPath, u: VertexId, v: VertexId, pid: PairId, g: &Graph) -> Option<TwoPath> {
    let len = p.seq.len();
    let (z1, z2) = (p.seq[len - 2], p.seq[len - 1]);
    if g.has_edge(z2, u) && g.has_edge(z1, u) && g.has_edge(z2, v) && g.has_edge(u, v) {
        let mut seq = p.seq.clone();
        seq.push(u);
        seq.push(v);
        let mut segs = p.segs.clone();
        segs.push(Seg::Pillar(pid));
        Some(TwoPath { seq, segs })
    } else {
        None
    }
}

pub fn apply_extension(p: &TwoPath, pid: PairId, g: &Graph, m: &Matching) -> Option<TwoPath> {
    let (a, b) = m.pair(pid);
    try_append(p, a, b, pid, g).or_else(|| try_append(p, b, a, pid, g))
}

/// First free pillar (ascending index, (min, max) orientation first) that
/// extends the path.
pub fn try_simple_extension(
    p: &TwoPath,
    g: &Graph,
    m: &Matching,
    free: &FreeSet,
) -> Option<(TwoPath, Move)> {
    for pid in free.iter() {
        if let Some(q) = apply_extension(p, pid, g, m) {
            return Some((q, Move::Ext { pair: pid }));
        }
    }
    None
}

/// A path whose two ends have been joined: all three wrap pairs are edges,
/// so every pair at cyclic distance one or two around the sequence is an
/// edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedCycle {
    path: TwoPath,
}

impl ClosedCycle {
    pub fn path(&self) -> &TwoPath {
        &self.path
    }

    pub fn wrap_edges_hold(&self, g: &Graph) -> bool {
        let seq = self.path.seq();
        let len = seq.len();
        let (y1, y2) = (seq[0], seq[1]);
        let (z1, z2) = (seq[len - 2], seq[len - 1]);
        g.has_edge(z1, y1) && g.has_edge(y1, z2) && g.has_edge(z2, y2)
    }
}

pub fn validate_closed(c: &ClosedCycle, gamma: &Graph, m: &Matching, gadget: Option<&Gadget>) -> bool {
    validate(&c.path, gamma, m, gadget) && c.wrap_edges_hold(gamma)
}

/// Joins the ends when the path spans at least three pillar-equivalents and
/// the three wrap edges exist.
pub fn try_close(p: &TwoPath, g: &Graph) -> Option<ClosedCycle> {
    if p.pillar_weight() < 3 {
        return None;
    }
    let c = ClosedCycle { path: p.clone() };
    if c.wrap_edges_hold(g) {
        Some(c)
    } else {
        None
    }
}

/// Reopens the cycle at a segment boundary and extends the reopened path.
/// Cutting at boundary `cut` makes segment `cut` the new head; every pair
/// needed by the reopened traversal is a cyclic pair of the cycle, so the
/// traversal is valid without further checks. Boundary 0 reproduces the
/// path whose extension already failed, so cuts start at 1.
pub fn try_cycle_extension(
    c: &ClosedCycle,
    g: &Graph,
    m: &Matching,
    free: &FreeSet,
) -> Option<(TwoPath, Move)> {
    let t = c.path.segs.len();
    for cut in 1..t {
        for pid in free.iter() {
            if let Some(q) = apply_cycle_extension(c, cut, pid, g, m) {
                return Some((q, Move::CycleExt { cut, pair: pid }));
            }
        }
    }
    None
}

pub fn apply_cycle_extension(
    c: &ClosedCycle,
    cut: usize,
    pid: PairId,
    g: &Graph,
    m: &Matching,
) -> Option<TwoPath> {
    let t = c.path.segs.len();
    if cut == 0 || cut >= t {
        return None;
    }
    let pos = c.path.prefix_len(cut);
    let mut seq = Vec::with_capacity(c.path.seq.len());
    seq.extend_from_slice(&c.path.seq[pos..]);
    seq.extend_from_slice(&c.path.seq[..pos]);
    let mut segs = Vec::with_capacity(t);
    segs.extend_from_slice(&c.path.segs[cut..]);
    segs.extend_from_slice(&c.path.segs[..cut]);
    let reopened = TwoPath { seq, segs };
    apply_extension(&reopened, pid, g, m)
}

/// One step of a replayable search transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Reverse the suffix from segment boundary `split`.
    Rot { split: usize },
    /// Reverse the whole path.
    Rev,
    /// Append a free pillar at the tail.
    Ext { pair: PairId },
    /// Join the two ends.
    Close,
    /// Reopen the closed cycle at `cut` and append a free pillar.
    CycleExt { cut: usize, pair: PairId },
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Rot { split } => write!(f, "ROT {split}"),
            Move::Rev => write!(f, "REV"),
            Move::Ext { pair } => write!(f, "EXT {pair}"),
            Move::Close => write!(f, "CLOSE"),
            Move::CycleExt { cut, pair } => write!(f, "CEXT {cut} {pair}"),
        }
    }
}

impl FromStr for Move {
    type Err = String;

    fn from_str(s: &str) -> Result<Move, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let num = |t: &str| -> Result<usize, String> {
            t.parse().map_err(|_| format!("bad number `{t}` in move `{s}`"))
        };
        match toks.as_slice() {
            ["ROT", a] => Ok(Move::Rot { split: num(a)? }),
            ["REV"] => Ok(Move::Rev),
            ["EXT", a] => Ok(Move::Ext {
                pair: num(a)? as PairId,
            }),
            ["CLOSE"] => Ok(Move::Close),
            ["CEXT", a, b] => Ok(Move::CycleExt {
                cut: num(a)?,
                pair: num(b)? as PairId,
            }),
            _ => Err(format!("unrecognized move `{s}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn graph_of(n: usize, edges: &[(VertexId, VertexId)]) -> Graph {
        let mut b = GraphBuilder::new(n);
        for &(u, v) in edges {
            b.add_edge(u, v);
        }
        b.freeze()
    }

    /// Pillars (0,1), (2,3), ..., path 0..2k in order.
    fn ladder(k: usize) -> (Matching, TwoPath) {
        let pairs: Vec<(VertexId, VertexId)> = (0..k)
            .map(|i| (2 * i as VertexId, 2 * i as VertexId + 1))
            .collect();
        let m = Matching::from_pairs(2 * k, &pairs).unwrap();
        let seq: Vec<VertexId> = (0..2 * k as VertexId).collect();
        let segs: Vec<Seg> = (0..k as PairId).map(Seg::Pillar).collect();
        (m, TwoPath::from_parts(seq, segs))
    }

    fn path_edges(seq: &[VertexId]) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for i in 0..seq.len() - 1 {
            out.push((seq[i], seq[i + 1]));
        }
        for i in 0..seq.len() - 2 {
            out.push((seq[i], seq[i + 2]));
        }
        out
    }

    #[test]
    fn ladder_is_valid() {
        let (m, p) = ladder(7);
        let g = graph_of(14, &path_edges(p.seq()));
        assert_eq!(g.edge_count(), 25);
        assert!(validate(&p, &g, &m, None));
        assert!(validate(&p.reversed(), &g, &m, None));
    }

    #[test]
    fn validate_rejects_garbage() {
        let (m, p) = ladder(3);
        let g = graph_of(6, &path_edges(p.seq()));
        assert!(validate(&p, &g, &m, None));
        // Duplicate vertex.
        let bad = TwoPath::from_parts(vec![0, 1, 2, 3, 0, 5], p.segs().to_vec());
        assert!(!validate(&bad, &g, &m, None));
        // Out of range.
        let bad = TwoPath::from_parts(vec![0, 1, 2, 3, 4, 9], p.segs().to_vec());
        assert!(!validate(&bad, &g, &m, None));
        // Pillar vertices not the matched pair.
        let bad = TwoPath::from_parts(vec![0, 1, 2, 4, 3, 5], p.segs().to_vec());
        assert!(!validate(&bad, &g, &m, None));
        // Same pillar twice.
        let segs = vec![Seg::Pillar(0), Seg::Pillar(1), Seg::Pillar(1)];
        let bad = TwoPath::from_parts(vec![0, 1, 2, 3, 4, 5], segs);
        assert!(!validate(&bad, &g, &m, None));
        // Bad pillar id.
        let segs = vec![Seg::Pillar(0), Seg::Pillar(1), Seg::Pillar(7)];
        let bad = TwoPath::from_parts(vec![0, 1, 2, 3, 4, 5], segs);
        assert!(!validate(&bad, &g, &m, None));
        // Gadget segment but no gadget supplied.
        let segs = vec![Seg::Pillar(0), Seg::Gadget];
        let bad = TwoPath::from_parts(vec![0, 1, 2, 3, 4, 5, 10], segs);
        assert!(!validate(&bad, &g, &m, None));
        // Missing skip edge.
        let g2 = graph_of(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (1, 3), (2, 4)]);
        assert!(!validate(&p, &g2, &m, None));
    }

    #[test]
    fn rotation_exact_shape() {
        // Seven pillars, split after the third: prefix 0..=5 stays, the
        // rest flips. Junction vertices w = (4, 5), z = (12, 13).
        let (m, p) = ladder(7);
        let mut edges = path_edges(p.seq());
        edges.extend_from_slice(&[(4, 13), (5, 12), (5, 13)]);
        let g = graph_of(14, &edges);
        let q = rotate(&p, 3, &g).unwrap();
        assert_eq!(
            q.seq(),
            &[0, 1, 2, 3, 4, 5, 13, 12, 11, 10, 9, 8, 7, 6]
        );
        assert_eq!(
            q.segs(),
            &[
                Seg::Pillar(0),
                Seg::Pillar(1),
                Seg::Pillar(2),
                Seg::Pillar(6),
                Seg::Pillar(5),
                Seg::Pillar(4),
                Seg::Pillar(3)
            ]
        );
        assert!(validate(&q, &g, &m, None));
    }

    #[test]
    fn rotation_missing_any_junction_edge_fails() {
        let (_, p) = ladder(7);
        let base = path_edges(p.seq());
        let junction = [(4u32, 13u32), (5, 12), (5, 13)];
        for skip in 0..3 {
            let mut edges = base.clone();
            for (i, &e) in junction.iter().enumerate() {
                if i != skip {
                    edges.push(e);
                }
            }
            let g = graph_of(14, &edges);
            assert_eq!(rotate(&p, 3, &g), Err(RotateError::MissingEdge));
        }
    }

    #[test]
    fn rotation_split_bounds() {
        let (_, p) = ladder(4);
        let g = Graph::complete(8);
        assert!(matches!(
            rotate(&p, 0, &g),
            Err(RotateError::InvalidSplit { .. })
        ));
        assert!(matches!(
            rotate(&p, 4, &g),
            Err(RotateError::InvalidSplit { .. })
        ));
        // Suffix of one pillar is too light.
        assert!(matches!(
            rotate(&p, 3, &g),
            Err(RotateError::InvalidSplit { .. })
        ));
        assert!(rotate(&p, 2, &g).is_ok());
        let splits: Vec<usize> = p.split_candidates().collect();
        assert_eq!(splits, vec![1, 2]);
    }

    #[test]
    fn double_rotation_restores_without_extra_edges() {
        // The edges needed to undo a rotation are already pairs of the
        // original path, so the inverse works even in the minimal graph.
        let (m, p) = ladder(7);
        for split in p.split_candidates().collect::<Vec<_>>() {
            let pos = p.prefix_len(split);
            let len = p.len();
            let mut edges = path_edges(p.seq());
            edges.push((p.seq()[pos - 2], p.seq()[len - 1]));
            edges.push((p.seq()[pos - 1], p.seq()[len - 2]));
            edges.push((p.seq()[pos - 1], p.seq()[len - 1]));
            let g = graph_of(14, &edges);
            let once = rotate(&p, split, &g).unwrap();
            assert!(validate(&once, &g, &m, None));
            let twice = rotate(&once, split, &g).unwrap();
            assert_eq!(twice, p);
        }
    }

    fn arb_pairs_and_split() -> impl proptest::strategy::Strategy<Value = (usize, usize)> {
        use proptest::prelude::*;
        (3usize..=14).prop_flat_map(|p| (Just(p), 1..=p - 2))
    }

    proptest::proptest! {
        #[test]
        fn double_rotation_restores_at_any_size((pairs, split) in arb_pairs_and_split()) {
            let inst = crate::testkit::rotation_instance(pairs, split);
            let once = rotate(&inst.path, split, &inst.gamma).unwrap();
            proptest::prop_assert!(validate(&once, &inst.gamma, &inst.m, None));
            let twice = rotate(&once, split, &inst.gamma).unwrap();
            proptest::prop_assert_eq!(&twice, &inst.path);
        }
    }

    #[test]
    fn extension_exact_shape_and_mutations() {
        let (m, _) = ladder(3);
        let p = TwoPath::from_parts(vec![0, 1, 2, 3], vec![Seg::Pillar(0), Seg::Pillar(1)]);
        let mut free = FreeSet::all(3);
        free.take(0);
        free.take(1);
        let attach = [(2u32, 4u32), (3, 4), (3, 5), (4, 5)];
        let mut edges = path_edges(p.seq());
        edges.extend_from_slice(&attach);
        let g = graph_of(6, &edges);
        let (q, mv) = try_simple_extension(&p, &g, &m, &free).unwrap();
        assert_eq!(q.seq(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(mv, Move::Ext { pair: 2 });
        assert!(validate(&q, &g, &m, None));
        for skip in 0..4 {
            let mut edges = path_edges(p.seq());
            for (i, &e) in attach.iter().enumerate() {
                if i != skip {
                    edges.push(e);
                }
            }
            let g = graph_of(6, &edges);
            assert!(try_simple_extension(&p, &g, &m, &free).is_none());
        }
    }

    #[test]
    fn extension_orientation_fallback() {
        // Only the flipped orientation of pillar (4, 5) attaches.
        let (m, _) = ladder(3);
        let p = TwoPath::from_parts(vec![0, 1, 2, 3], vec![Seg::Pillar(0), Seg::Pillar(1)]);
        let mut free = FreeSet::all(3);
        free.take(0);
        free.take(1);
        let mut edges = path_edges(p.seq());
        edges.extend_from_slice(&[(2, 5), (3, 5), (3, 4), (4, 5)]);
        let g = graph_of(6, &edges);
        let (q, _) = try_simple_extension(&p, &g, &m, &free).unwrap();
        assert_eq!(q.seq(), &[0, 1, 2, 3, 5, 4]);
        assert!(validate(&q, &g, &m, None));
    }

    #[test]
    fn extension_prefers_lowest_free_pillar() {
        let (m, _) = ladder(4);
        let p = TwoPath::from_parts(vec![0, 1, 2, 3], vec![Seg::Pillar(0), Seg::Pillar(1)]);
        let mut free = FreeSet::all(4);
        free.take(0);
        free.take(1);
        let g = Graph::complete(8);
        let (_, mv) = try_simple_extension(&p, &g, &m, &free).unwrap();
        assert_eq!(mv, Move::Ext { pair: 2 });
        free.take(2);
        let (_, mv) = try_simple_extension(&p, &g, &m, &free).unwrap();
        assert_eq!(mv, Move::Ext { pair: 3 });
    }

    #[test]
    fn close_exact_and_mutations() {
        let (m, p) = ladder(3);
        let wrap = [(4u32, 0u32), (0, 5), (5, 1)];
        let mut edges = path_edges(p.seq());
        edges.extend_from_slice(&wrap);
        let g = graph_of(6, &edges);
        let c = try_close(&p, &g).unwrap();
        assert!(validate_closed(&c, &g, &m, None));
        for skip in 0..3 {
            let mut edges = path_edges(p.seq());
            for (i, &e) in wrap.iter().enumerate() {
                if i != skip {
                    edges.push(e);
                }
            }
            let g = graph_of(6, &edges);
            assert!(try_close(&p, &g).is_none());
        }
    }

    #[test]
    fn close_needs_three_pillars() {
        let (m, _) = ladder(2);
        let p = TwoPath::from_parts(vec![0, 1, 2, 3], vec![Seg::Pillar(0), Seg::Pillar(1)]);
        assert!(validate(&p, &Graph::complete(4), &m, None));
        assert!(try_close(&p, &Graph::complete(4)).is_none());
    }

    #[test]
    fn cycle_extension_exact_shape() {
        // Cycle on pillars (0,1),(2,3),(4,5); the free pillar (6,7)
        // attaches only to the traversal reopened at boundary 1, which
        // ends with (0, 1).
        let (m, _) = ladder(4);
        let p3 = TwoPath::from_parts(
            vec![0, 1, 2, 3, 4, 5],
            vec![Seg::Pillar(0), Seg::Pillar(1), Seg::Pillar(2)],
        );
        let mut free = FreeSet::all(4);
        free.take(0);
        free.take(1);
        free.take(2);
        let mut edges = path_edges(p3.seq());
        edges.extend_from_slice(&[(4, 0), (0, 5), (5, 1)]);
        // Attachment after reopening at cut 1: traversal 2,3,4,5,0,1 ends
        // (0, 1); pillar (6, 7) needs {1,6},{0,6},{1,7},{6,7}.
        edges.extend_from_slice(&[(1, 6), (0, 6), (1, 7), (6, 7)]);
        let g = graph_of(8, &edges);
        let c = try_close(&p3, &g).unwrap();
        // The closed traversal itself must not extend: its end is (4, 5)
        // and 6 is not adjacent to 5.
        assert!(try_simple_extension(&p3, &g, &m, &free).is_none());
        let (q, mv) = try_cycle_extension(&c, &g, &m, &free).unwrap();
        assert_eq!(mv, Move::CycleExt { cut: 1, pair: 3 });
        assert_eq!(q.seq(), &[2, 3, 4, 5, 0, 1, 6, 7]);
        assert_eq!(
            q.segs(),
            &[
                Seg::Pillar(1),
                Seg::Pillar(2),
                Seg::Pillar(0),
                Seg::Pillar(3)
            ]
        );
        assert!(validate(&q, &g, &m, None));
    }

    #[test]
    fn cycle_extension_mutations() {
        let (m, _) = ladder(4);
        let p3 = TwoPath::from_parts(
            vec![0, 1, 2, 3, 4, 5],
            vec![Seg::Pillar(0), Seg::Pillar(1), Seg::Pillar(2)],
        );
        let mut free = FreeSet::all(4);
        free.take(0);
        free.take(1);
        free.take(2);
        let attach = [(1u32, 6u32), (0, 6), (1, 7), (6, 7)];
        for skip in 0..4 {
            let mut edges = path_edges(p3.seq());
            edges.extend_from_slice(&[(4, 0), (0, 5), (5, 1)]);
            for (i, &e) in attach.iter().enumerate() {
                if i != skip {
                    edges.push(e);
                }
            }
            let g = graph_of(8, &edges);
            let c = try_close(&p3, &g).unwrap();
            // Orientation (7, 6) needs {0,7},{1,7},{1,6},{7,6}; {0,7} is
            // never present, so killing any listed edge kills both.
            assert!(try_cycle_extension(&c, &g, &m, &free).is_none());
        }
    }

    #[test]
    fn cycle_extension_skips_boundary_zero() {
        let (m, _) = ladder(4);
        let p3 = TwoPath::from_parts(
            vec![0, 1, 2, 3, 4, 5],
            vec![Seg::Pillar(0), Seg::Pillar(1), Seg::Pillar(2)],
        );
        let g = Graph::complete(8);
        let c = try_close(&p3, &g).unwrap();
        assert_eq!(apply_cycle_extension(&c, 0, 3, &g, &m), None);
        assert_eq!(apply_cycle_extension(&c, 3, 3, &g, &m), None);
        assert!(apply_cycle_extension(&c, 2, 3, &g, &m).is_some());
    }

    #[test]
    fn gadget_shape() {
        let g5 = Gadget {
            a: 1,
            b: 3,
            c: 2,
            d: 0,
            e: 4,
        };
        assert_eq!(g5.run(), [0, 1, 2, 3, 4]);
        let g = graph_of(5, &g5.edges());
        assert_eq!(g.edge_count(), 7);
        assert!(g5.holds_in(&g));
        let m = Matching::from_pairs(5, &[]).unwrap();
        let p = TwoPath::gadget_seed(&g5);
        assert!(validate(&p, &g, &m, Some(&g5)));
        assert!(validate(&p.reversed(), &g, &m, Some(&g5)));
        // Any single missing edge breaks it.
        for skip in 0..7 {
            let edges: Vec<_> = g5
                .edges()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, &e)| e)
                .collect();
            let g = graph_of(5, &edges);
            assert!(!g5.holds_in(&g));
            assert!(!validate(&p, &g, &m, Some(&g5)));
        }
    }

    #[test]
    fn gadget_counts_as_two_pillars_for_splits() {
        // Gadget at the tail: a split isolating just the gadget is allowed.
        let g5 = Gadget {
            a: 7,
            b: 9,
            c: 8,
            d: 6,
            e: 10,
        };
        let m = Matching::from_pairs(11, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let p = TwoPath::from_parts(
            vec![0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
            vec![
                Seg::Pillar(0),
                Seg::Pillar(1),
                Seg::Pillar(2),
                Seg::Gadget,
            ],
        );
        let splits: Vec<usize> = p.split_candidates().collect();
        assert_eq!(splits, vec![1, 2, 3]);
        assert_eq!(p.pillar_weight(), 5);
        let g = Graph::complete(11);
        let q = rotate(&p, 3, &g).unwrap();
        assert_eq!(q.seq(), &[0, 1, 2, 3, 4, 5, 10, 9, 8, 7, 6]);
        assert!(validate(&q, &g, &m, Some(&g5)));
    }

    #[test]
    fn end_keys_distinguish_gadget_sides() {
        // Gadget run [6, 7, 8, 9, 10]: head side exposes 6, tail side 10.
        let m = Matching::from_pairs(11, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let p = TwoPath::from_parts(
            vec![0, 1, 6, 7, 8, 9, 10],
            vec![Seg::Pillar(0), Seg::Gadget],
        );
        let (h, t) = p.end_keys(m.len());
        assert_eq!(h, 0);
        assert_eq!(t, 3 + 1 + 10);
        let (h2, t2) = p.reversed().end_keys(m.len());
        assert_eq!(h2, t);
        assert_eq!(t2, h);
        let q = TwoPath::from_parts(
            vec![10, 9, 8, 7, 6, 0, 1],
            vec![Seg::Gadget, Seg::Pillar(0)],
        );
        let (h3, _) = q.end_keys(m.len());
        assert_eq!(h3, 3 + 1 + 10);
    }

    #[test]
    fn move_text_round_trip() {
        let moves = [
            Move::Rot { split: 3 },
            Move::Rev,
            Move::Ext { pair: 17 },
            Move::Close,
            Move::CycleExt { cut: 2, pair: 19 },
        ];
        for mv in moves {
            let s = mv.to_string();
            let back: Move = s.parse().unwrap();
            assert_eq!(mv, back);
        }
        assert!("ROT".parse::<Move>().is_err());
        assert!("WAT 3".parse::<Move>().is_err());
        assert!("CEXT 1".parse::<Move>().is_err());
        assert!("EXT x".parse::<Move>().is_err());
    }
}
