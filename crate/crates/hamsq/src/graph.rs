//! Undirected simple graphs on a fixed vertex set 0..n, stored as bit-packed
//! adjacency rows (one u64 word per 64 vertices, row-major).
//!
//! Representation invariants:
//! - the adjacency matrix is symmetric and has an empty diagonal,
//! - bits at column positions >= n are zero in every row,
//! - `m` equals the number of set bits / 2.
//!
//! A frozen `Graph` is immutable; build with `GraphBuilder`, mutate nothing
//! afterwards. Frozen graphs are cheap to share across threads.

use std::io::{self, BufRead, Write};

pub type VertexId = u32;

#[inline(always)]
fn word_of(v: usize) -> usize {
    v >> 6
}

#[inline(always)]
fn bit_of(v: usize) -> u64 {
    1u64 << (v & 63)
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    m: usize,
}

pub struct GraphBuilder {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    m: usize,
}

impl GraphBuilder {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        GraphBuilder {
            n,
            words,
            bits: vec![0u64; n * words],
            m: 0,
        }
    }

    /// Adds {u, v}. Returns false if the edge was already present.
    /// Self-loops and out-of-range endpoints are contract violations.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        let (u, v) = (u as usize, v as usize);
        assert!(u < self.n && v < self.n, "vertex out of range");
        assert_ne!(u, v, "self-loop");
        let slot = u * self.words + word_of(v);
        if self.bits[slot] & bit_of(v) != 0 {
            return false;
        }
        self.bits[slot] |= bit_of(v);
        self.bits[v * self.words + word_of(u)] |= bit_of(u);
        self.m += 1;
        true
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (u, v) = (u as usize, v as usize);
        assert!(u < self.n && v < self.n, "vertex out of range");
        u != v && self.bits[u * self.words + word_of(v)] & bit_of(v) != 0
    }

    pub fn freeze(self) -> Graph {
        let g = Graph {
            n: self.n,
            words: self.words,
            bits: self.bits,
            m: self.m,
        };
        debug_assert!(g.check_rep());
        g
    }
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        GraphBuilder::new(n).freeze()
    }

    pub fn complete(n: usize) -> Graph {
        let mut b = GraphBuilder::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                b.add_edge(u as VertexId, v as VertexId);
            }
        }
        b.freeze()
    }

    #[inline(always)]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline(always)]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline(always)]
    fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    #[inline(always)]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (u, v) = (u as usize, v as usize);
        assert!(u < self.n && v < self.n, "vertex out of range");
        u != v && self.bits[u * self.words + word_of(v)] & bit_of(v) != 0
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.row(v as usize).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn min_degree(&self) -> usize {
        assert!(self.n > 0, "min_degree of an empty graph");
        (0..self.n as VertexId).map(|v| self.degree(v)).min().unwrap()
    }

    /// Edge-set union with another graph on the same vertex set.
    pub fn union(&self, other: &Graph) -> Graph {
        assert_eq!(self.n, other.n, "union of graphs of different order");
        let bits: Vec<u64> = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a | b)
            .collect();
        let ones: usize = bits.iter().map(|w| w.count_ones() as usize).sum();
        Graph {
            n: self.n,
            words: self.words,
            bits,
            m: ones / 2,
        }
    }

    /// True iff the four (distinct) vertices induce a complete subgraph.
    pub fn is_k4(&self, a: VertexId, b: VertexId, c: VertexId, d: VertexId) -> bool {
        debug_assert!(a != b && a != c && a != d && b != c && b != d && c != d);
        self.has_edge(a, b)
            && self.has_edge(a, c)
            && self.has_edge(a, d)
            && self.has_edge(b, c)
            && self.has_edge(b, d)
            && self.has_edge(c, d)
    }

    /// Vertices adjacent to both u and v, ascending. Word-parallel AND over rows.
    pub fn common_neighbors(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let ru = self.row(u as usize);
        let rv = self.row(v as usize);
        let mut out = Vec::new();
        for w in 0..self.words {
            let mut word = ru[w] & rv[w];
            while word != 0 {
                let b = word.trailing_zeros();
                word &= word - 1;
                out.push((w * 64) as VertexId + b);
            }
        }
        out
    }

    pub fn neighbors(&self, v: VertexId) -> Neighbors<'_> {
        Neighbors {
            row: self.row(v as usize),
            word_idx: 0,
            current: 0,
        }
    }

    /// Component label per vertex plus the component count. Labels are
    /// assigned in order of the smallest vertex in each component.
    pub fn connected_components(&self) -> (usize, Vec<u32>) {
        let mut label = vec![u32::MAX; self.n];
        let mut count = 0u32;
        let mut stack: Vec<VertexId> = Vec::new();
        for s in 0..self.n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s as VertexId);
            while let Some(v) = stack.pop() {
                for u in self.neighbors(v) {
                    if label[u as usize] == u32::MAX {
                        label[u as usize] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (count as usize, label)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.connected_components().0 == 1
    }

    /// Edges as (u, v) with u < v, ascending lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Text form: a `n m` header line, then one `u v` line per edge with
    /// 0-based endpoints and u < v.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.n, self.m)?;
        for (u, v) in self.edges() {
            writeln!(w, "{} {}", u, v)?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph, EdgeListError> {
        let mut lines = r.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((idx, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break (idx + 1, line);
                    }
                }
                None => {
                    return Err(EdgeListError::Malformed {
                        line: 1,
                        expected: "n m",
                    })
                }
            }
        };
        let mut parts = header.1.split_whitespace();
        let (n, m) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(m), None) => {
                let n: usize = n.parse().map_err(|_| EdgeListError::Malformed {
                    line: header.0,
                    expected: "n m",
                })?;
                let m: usize = m.parse().map_err(|_| EdgeListError::Malformed {
                    line: header.0,
                    expected: "n m",
                })?;
                (n, m)
            }
            _ => {
                return Err(EdgeListError::Malformed {
                    line: header.0,
                    expected: "n m",
                })
            }
        };
        let mut b = GraphBuilder::new(n);
        let mut found = 0usize;
        for (idx, line) in lines {
            let line = line?;
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                (Some(u), Some(v), None) => {
                    let u: u64 = u.parse().map_err(|_| EdgeListError::Malformed {
                        line: line_no,
                        expected: "u v",
                    })?;
                    let v: u64 = v.parse().map_err(|_| EdgeListError::Malformed {
                        line: line_no,
                        expected: "u v",
                    })?;
                    (u, v)
                }
                _ => {
                    return Err(EdgeListError::Malformed {
                        line: line_no,
                        expected: "u v",
                    })
                }
            };
            if u >= n as u64 || v >= n as u64 {
                return Err(EdgeListError::Range { line: line_no });
            }
            if u >= v {
                return Err(EdgeListError::Order { line: line_no });
            }
            if !b.add_edge(u as VertexId, v as VertexId) {
                return Err(EdgeListError::Duplicate { line: line_no });
            }
            found += 1;
        }
        if found != m {
            return Err(EdgeListError::Count {
                expected: m,
                found,
            });
        }
        Ok(b.freeze())
    }

    fn check_rep(&self) -> bool {
        let tail_mask = if self.n.is_multiple_of(64) {
            u64::MAX
        } else {
            (1u64 << (self.n % 64)) - 1
        };
        for v in 0..self.n {
            let row = self.row(v);
            if row[word_of(v)] & bit_of(v) != 0 {
                return false;
            }
            if self.words > 0 && row[self.words - 1] & !tail_mask != 0 {
                return false;
            }
        }
        let ones: usize = self.bits.iter().map(|w| w.count_ones() as usize).sum();
        ones == 2 * self.m
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.m)
    }
}

pub struct Neighbors<'a> {
    row: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl<'a> Iterator for Neighbors<'a> {
    type Item = VertexId;

    #[inline]
    fn next(&mut self) -> Option<VertexId> {
        loop {
            if self.current != 0 {
                let b = self.current.trailing_zeros();
                self.current &= self.current - 1;
                return Some(((self.word_idx - 1) * 64) as VertexId + b);
            }
            if self.word_idx == self.row.len() {
                return None;
            }
            self.current = self.row[self.word_idx];
            self.word_idx += 1;
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EdgeListError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: expected `{expected}`")]
    Malformed { line: usize, expected: &'static str },
    #[error("line {line}: vertex out of range")]
    Range { line: usize },
    #[error("line {line}: endpoints must satisfy u < v")]
    Order { line: usize },
    #[error("line {line}: duplicate edge")]
    Duplicate { line: usize },
    #[error("header announced {expected} edges, found {found}")]
    Count { expected: usize, found: usize },
}
