//! Planted-instance builders shared by integration tests and benches.
//!
//! Each builder hands back a minimal graph in which one specific move is
//! available, together with the exact non-path edges that enable it, so a
//! caller can check both directions: the move succeeds as planted, and
//! removing any single planted edge kills it.

use crate::graph::{Graph, GraphBuilder, VertexId};
use crate::matching::{FreeSet, Matching, PairId};
use crate::twopath::{try_close, ClosedCycle, Seg, TwoPath};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Matching with pairs (0,1), (2,3), ... and the path that threads them
/// in index order.
pub fn ladder(pairs: usize) -> (Matching, TwoPath) {
    let (m, p, _) = ladder_with_spares(pairs, pairs);
    (m, p)
}

/// Matching with `total` pairs of which the path uses the first `used`;
/// the rest stay in the returned free set.
pub fn ladder_with_spares(total: usize, used: usize) -> (Matching, TwoPath, FreeSet) {
    assert!(1 <= used && used <= total);
    let raw: Vec<(VertexId, VertexId)> = (0..total)
        .map(|i| ((2 * i) as VertexId, (2 * i + 1) as VertexId))
        .collect();
    let m = Matching::from_pairs(2 * total, &raw).expect("pairs are disjoint");
    let seq: Vec<VertexId> = (0..2 * used as VertexId).collect();
    let segs: Vec<Seg> = (0..used as PairId).map(Seg::Pillar).collect();
    let mut free = FreeSet::all(total);
    for pid in 0..used as PairId {
        free.take(pid);
    }
    (m, TwoPath::from_parts(seq, segs), free)
}

/// Every vertex pair the path requires: consecutive and skip positions.
pub fn path_pair_edges(p: &TwoPath) -> Vec<(VertexId, VertexId)> {
    let s = p.seq();
    let mut out = Vec::new();
    for i in 0..s.len() {
        for d in 1..=2 {
            if i + d < s.len() {
                out.push((s[i], s[i + d]));
            }
        }
    }
    out
}

/// Builds a graph from an edge list, ignoring duplicates.
pub fn graph_from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Graph {
    let mut b = GraphBuilder::new(n);
    for &(u, v) in edges {
        b.add_edge(u, v);
    }
    b.freeze()
}

/// Copy of `g` without the edge {u, v}, which must be present.
pub fn graph_minus(g: &Graph, u: VertexId, v: VertexId) -> Graph {
    assert!(g.has_edge(u, v), "removing an absent edge");
    let key = (u.min(v), u.max(v));
    let mut b = GraphBuilder::new(g.n());
    for (a, c) in g.edges() {
        if (a, c) != key {
            b.add_edge(a, c);
        }
    }
    b.freeze()
}

pub struct PlantedRotation {
    pub m: Matching,
    pub path: TwoPath,
    pub split: usize,
    pub gamma: Graph,
    /// The three junction edges; none of them is a path edge.
    pub junction: [(VertexId, VertexId); 3],
}

pub fn rotation_instance(pairs: usize, split: usize) -> PlantedRotation {
    assert!(pairs >= 3 && 1 <= split && split <= pairs - 2);
    let (m, path) = ladder(pairs);
    let s = path.seq();
    let j = path.prefix_len(split);
    let (w1, w2) = (s[j - 2], s[j - 1]);
    let (z1, z2) = (s[s.len() - 2], s[s.len() - 1]);
    let junction = [(w1, z2), (w2, z1), (w2, z2)];
    let mut edges = path_pair_edges(&path);
    edges.extend_from_slice(&junction);
    let gamma = graph_from_edges(m.n(), &edges);
    PlantedRotation {
        m,
        path,
        split,
        gamma,
        junction,
    }
}

pub fn random_rotation_instance(rng: &mut impl Rng) -> PlantedRotation {
    let pairs = rng.random_range(3..=10);
    let split = rng.random_range(1..=pairs - 2);
    rotation_instance(pairs, split)
}

pub struct PlantedExtension {
    pub m: Matching,
    pub path: TwoPath,
    pub free: FreeSet,
    pub pid: PairId,
    pub gamma: Graph,
    /// The four edges the (min, max) orientation needs. The flipped
    /// orientation additionally needs an edge that is never planted, so
    /// removing any one of these kills the extension outright.
    pub needed: [(VertexId, VertexId); 4],
}

pub fn extension_instance(used: usize) -> PlantedExtension {
    assert!(used >= 2);
    let (m, path, free) = ladder_with_spares(used + 1, used);
    let pid = used as PairId;
    let (u, v) = m.pair(pid);
    let s = path.seq();
    let (z1, z2) = (s[s.len() - 2], s[s.len() - 1]);
    let needed = [(z2, u), (z1, u), (z2, v), (u, v)];
    let mut edges = path_pair_edges(&path);
    edges.extend_from_slice(&needed);
    let gamma = graph_from_edges(m.n(), &edges);
    PlantedExtension {
        m,
        path,
        free,
        pid,
        gamma,
        needed,
    }
}

pub fn random_extension_instance(rng: &mut impl Rng) -> PlantedExtension {
    extension_instance(rng.random_range(2..=9))
}

pub struct PlantedClose {
    pub m: Matching,
    pub path: TwoPath,
    pub gamma: Graph,
    pub wrap: [(VertexId, VertexId); 3],
}

pub fn close_instance(pairs: usize) -> PlantedClose {
    assert!(pairs >= 3);
    let (m, path) = ladder(pairs);
    let s = path.seq();
    let (y1, y2) = (s[0], s[1]);
    let (z1, z2) = (s[s.len() - 2], s[s.len() - 1]);
    let wrap = [(z2, y1), (z2, y2), (z1, y1)];
    let mut edges = path_pair_edges(&path);
    edges.extend_from_slice(&wrap);
    let gamma = graph_from_edges(m.n(), &edges);
    PlantedClose {
        m,
        path,
        gamma,
        wrap,
    }
}

pub fn random_close_instance(rng: &mut impl Rng) -> PlantedClose {
    close_instance(rng.random_range(3..=10))
}

pub struct PlantedCycleExtension {
    pub m: Matching,
    pub cycle: ClosedCycle,
    pub cut: usize,
    pub pid: PairId,
    pub free: FreeSet,
    pub gamma: Graph,
    /// Extension edges for the traversal reopened at `cut`; no other cut
    /// can use them, so the planted cut is the unique one that works.
    pub needed: [(VertexId, VertexId); 4],
}

pub fn cycle_extension_instance(used: usize, cut: usize) -> PlantedCycleExtension {
    assert!(used >= 3 && 1 <= cut && cut < used);
    let (m, path, free) = ladder_with_spares(used + 1, used);
    let pid = used as PairId;
    let (u, v) = m.pair(pid);
    let s = path.seq();
    let (y1, y2) = (s[0], s[1]);
    let (z1, z2) = (s[s.len() - 2], s[s.len() - 1]);
    let wrap = [(z2, y1), (z2, y2), (z1, y1)];
    let pos = path.prefix_len(cut);
    let (z1p, z2p) = (s[pos - 2], s[pos - 1]);
    let needed = [(z2p, u), (z1p, u), (z2p, v), (u, v)];
    let mut edges = path_pair_edges(&path);
    edges.extend_from_slice(&wrap);
    edges.extend_from_slice(&needed);
    let gamma = graph_from_edges(m.n(), &edges);
    let cycle = try_close(&path, &gamma).expect("wrap edges are planted");
    PlantedCycleExtension {
        m,
        cycle,
        cut,
        pid,
        free,
        gamma,
        needed,
    }
}

pub fn random_cycle_extension_instance(rng: &mut impl Rng) -> PlantedCycleExtension {
    let used = rng.random_range(3..=9);
    let cut = rng.random_range(1..used);
    cycle_extension_instance(used, cut)
}

pub struct PlantedStepThree {
    pub m: Matching,
    pub path: TwoPath,
    pub free: FreeSet,
    pub gamma: Graph,
    pub cut: usize,
    pub pid: PairId,
}

/// An open path whose round can only advance by closing and reopening:
/// no rotation has its junction edges, neither the path nor its reversal
/// can take the spare pillar directly, but the wrap edges plus the
/// reopened-at-`cut` extension edges are all present.
pub fn step_three_instance(used: usize, cut: usize) -> PlantedStepThree {
    let inst = cycle_extension_instance(used, cut);
    let (m, path, free) = ladder_with_spares(used + 1, used);
    debug_assert_eq!(m.pairs(), inst.m.pairs());
    PlantedStepThree {
        m,
        path,
        free,
        gamma: inst.gamma,
        cut,
        pid: inst.pid,
    }
}

pub fn random_step_three_instance(rng: &mut impl Rng) -> PlantedStepThree {
    let used = rng.random_range(3..=9);
    let cut = rng.random_range(1..used);
    step_three_instance(used, cut)
}

/// Convenience choice helper for tests that want an arbitrary valid split.
pub fn random_split(p: &TwoPath, rng: &mut impl Rng) -> Option<usize> {
    let splits: Vec<usize> = p.split_candidates().collect();
    splits.choose(rng).copied()
}
