//! Perfect matchings over the first booster graph, the pool of pillars they
//! induce, and the contracted graph whose vertices are matched pairs.

use crate::graph::{Graph, VertexId};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use std::io::{self, BufRead, Write};

pub type PairId = u32;

/// A matching over a subset of 0..n. Pairs are stored as (min, max),
/// sorted; `pair_of` maps each matched vertex to its pair index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(VertexId, VertexId)>,
    pair_of: Vec<Option<PairId>>,
    n: usize,
}

impl Matching {
    pub fn from_pairs(n: usize, raw: &[(VertexId, VertexId)]) -> Result<Matching, String> {
        let mut pairs: Vec<(VertexId, VertexId)> = raw
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        pairs.sort_unstable();
        let mut pair_of = vec![None; n];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if u == v {
                return Err(format!("pair {i} matches {u} with itself"));
            }
            if v as usize >= n {
                return Err(format!("pair {i} endpoint {v} out of range"));
            }
            for w in [u, v] {
                if pair_of[w as usize].is_some() {
                    return Err(format!("vertex {w} appears in two pairs"));
                }
                pair_of[w as usize] = Some(i as PairId);
            }
        }
        Ok(Matching { pairs, pair_of, n })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pair(&self, id: PairId) -> (VertexId, VertexId) {
        self.pairs[id as usize]
    }

    pub fn pair_of(&self, v: VertexId) -> Option<PairId> {
        self.pair_of[v as usize]
    }

    pub fn partner(&self, v: VertexId) -> Option<VertexId> {
        self.pair_of(v).map(|id| {
            let (a, b) = self.pairs[id as usize];
            if a == v {
                b
            } else {
                a
            }
        })
    }

    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }

    /// Every pair must be an edge of g and the matched set must be exactly
    /// the complement of `excluded`.
    pub fn validate_against(&self, g: &Graph, excluded: &[VertexId]) -> bool {
        if self.n != g.n() {
            return false;
        }
        let mut out = vec![false; self.n];
        for &v in excluded {
            out[v as usize] = true;
        }
        for &(u, v) in &self.pairs {
            if !g.has_edge(u, v) {
                return false;
            }
        }
        (0..self.n).all(|v| out[v] != self.pair_of[v].is_some())
    }

    /// One `u v` line per pair, sorted.
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for &(u, v) in &self.pairs {
            writeln!(w, "{} {}", u, v)?;
        }
        Ok(())
    }

    pub fn parse<R: BufRead>(n: usize, r: R) -> io::Result<Matching> {
        let mut raw = Vec::new();
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut parts = t.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(u), Some(v), None) => {
                    let u = u.parse().map_err(|_| bad_data("bad vertex"))?;
                    let v = v.parse().map_err(|_| bad_data("bad vertex"))?;
                    raw.push((u, v));
                }
                _ => return Err(bad_data("expected `u v`")),
            }
        }
        Matching::from_pairs(n, &raw).map_err(|e| bad_data(&e))
    }
}

fn bad_data(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

#[derive(Debug, thiserror::Error)]
#[error("no perfect matching found over {active} vertices after {restarts} restarts")]
pub struct MatchingFailure {
    pub active: usize,
    pub restarts: u32,
}

/// Perfect matching on g restricted to the vertices outside `excluded`.
///
/// Randomized greedy, then repeated repair along augmenting paths of length
/// three, then a fresh restart; `effort` bounds the restarts. The booster
/// graphs this runs on are far above the matching threshold, so failures
/// are rare and reported rather than retried forever.
pub fn find_perfect_matching<R: Rng + ?Sized>(
    g: &Graph,
    excluded: &[VertexId],
    effort: u32,
    rng: &mut R,
) -> Result<Matching, MatchingFailure> {
    let n = g.n();
    let mut active = vec![true; n];
    for &v in excluded {
        active[v as usize] = false;
    }
    let domain: Vec<VertexId> = (0..n as VertexId).filter(|&v| active[v as usize]).collect();
    assert!(
        domain.len().is_multiple_of(2),
        "matching domain must have even size"
    );
    if domain.is_empty() {
        return Ok(Matching::from_pairs(n, &[]).unwrap());
    }

    let effort = effort.max(1);
    for _ in 0..effort {
        let mut mate: Vec<Option<VertexId>> = vec![None; n];
        let mut order = domain.clone();
        order.shuffle(rng);

        for &v in &order {
            if mate[v as usize].is_some() {
                continue;
            }
            let cands: Vec<VertexId> = g
                .neighbors(v)
                .filter(|&u| active[u as usize] && mate[u as usize].is_none())
                .collect();
            if let Some(&u) = cands.choose(rng) {
                mate[v as usize] = Some(u);
                mate[u as usize] = Some(v);
            }
        }

        // Repair: for exposed v, find a neighbor u whose mate w has another
        // exposed neighbor x. Rematching (v,u) and (w,x) augments by one.
        let mut progressed = true;
        while progressed {
            progressed = false;
            let mut exposed: Vec<VertexId> = domain
                .iter()
                .copied()
                .filter(|&v| mate[v as usize].is_none())
                .collect();
            if exposed.is_empty() {
                break;
            }
            exposed.shuffle(rng);
            'outer: for &v in &exposed {
                if mate[v as usize].is_some() {
                    continue;
                }
                for u in g.neighbors(v) {
                    if !active[u as usize] {
                        continue;
                    }
                    let Some(w) = mate[u as usize] else {
                        mate[v as usize] = Some(u);
                        mate[u as usize] = Some(v);
                        progressed = true;
                        continue 'outer;
                    };
                    for x in g.neighbors(w) {
                        if x != v
                            && x != u
                            && active[x as usize]
                            && mate[x as usize].is_none()
                        {
                            mate[v as usize] = Some(u);
                            mate[u as usize] = Some(v);
                            mate[w as usize] = Some(x);
                            mate[x as usize] = Some(w);
                            progressed = true;
                            continue 'outer;
                        }
                    }
                }
            }
        }

        if domain.iter().all(|&v| mate[v as usize].is_some()) {
            let mut raw = Vec::with_capacity(domain.len() / 2);
            for &v in &domain {
                let u = mate[v as usize].unwrap();
                if v < u {
                    raw.push((v, u));
                }
            }
            let m = Matching::from_pairs(n, &raw).unwrap();
            debug_assert!(m.validate_against(g, excluded));
            return Ok(m);
        }
    }
    Err(MatchingFailure {
        active: domain.len(),
        restarts: effort,
    })
}

/// Pillars not yet absorbed into the path, by pair index.
#[derive(Debug, Clone)]
pub struct FreeSet {
    free: Vec<bool>,
    remaining: usize,
}

impl FreeSet {
    pub fn all(count: usize) -> FreeSet {
        FreeSet {
            free: vec![true; count],
            remaining: count,
        }
    }

    pub fn take(&mut self, id: PairId) {
        assert!(self.free[id as usize], "pillar {id} taken twice");
        self.free[id as usize] = false;
        self.remaining -= 1;
    }

    pub fn is_free(&self, id: PairId) -> bool {
        self.free[id as usize]
    }

    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn iter(&self) -> impl Iterator<Item = PairId> + '_ {
        self.free
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i as PairId)
    }
}

/// Contraction of a matching: one vertex per pair, joined when the four
/// endpoints induce a complete subgraph of the stage graph. An edge here
/// certifies that either pair can sit next to the other in a path in any
/// orientation, which is why rotation candidates can be read off it.
#[derive(Debug, Clone)]
pub struct PiGraph {
    base: Graph,
    host_n: usize,
}

impl PiGraph {
    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn host_n(&self) -> usize {
        self.host_n
    }

    pub fn is_connected(&self) -> bool {
        self.base.is_connected()
    }
}

pub fn build_pi_graph(h: &Graph, m: &Matching) -> PiGraph {
    let k = m.len();
    let mut b = crate::graph::GraphBuilder::new(k);
    for i in 0..k {
        let (a1, a2) = m.pair(i as PairId);
        for j in (i + 1)..k {
            let (b1, b2) = m.pair(j as PairId);
            if h.is_k4(a1, a2, b1, b2) {
                b.add_edge(i as PairId, j as PairId);
            }
        }
    }
    PiGraph {
        base: b.freeze(),
        host_n: h.n(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiDegreeReport {
    pub beta1: f64,
    pub beta1_n: f64,
    pub min_degree: usize,
    pub pass: bool,
}

/// Compares the contracted graph's min degree against beta1 * n with
/// beta1 = (2 alpha - 1)^3 / 2 and n = 2m the matched vertex count (the
/// gadget vertices of an odd order do not count). Diagnostic only: the
/// run does not gate on it, the harness just records it.
pub fn pi_degree_diagnostic(pi: &PiGraph, alpha: f64) -> PiDegreeReport {
    assert!(0.5 < alpha && alpha <= 1.0, "alpha out of (1/2, 1]");
    assert!(pi.base.n() >= 1, "empty contraction");
    let beta1 = (2.0 * alpha - 1.0).powi(3) / 2.0;
    let beta1_n = beta1 * (2 * pi.base.n()) as f64;
    let min_degree = pi.base.min_degree();
    PiDegreeReport {
        beta1,
        beta1_n,
        min_degree,
        pass: min_degree as f64 >= beta1_n,
    }
}
