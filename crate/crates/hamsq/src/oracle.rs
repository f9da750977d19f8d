//! Ground-truth checks that are independent of the search machinery: a
//! direct verifier for cycle powers, an exponential-time exact search for
//! small instances, and a cross-edge counter for complete bipartite hosts.

use crate::graph::{Graph, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, BufRead, Write};

/// A cyclic vertex order claimed to be the k-th power of a Hamilton cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareHamCycle(pub Vec<VertexId>);

impl SquareHamCycle {
    /// One line: the n vertices in cyclic order, space-separated.
    pub fn write_witness<W: Write>(&self, mut w: W) -> io::Result<()> {
        let line: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" "))
    }

    pub fn read_witness<R: BufRead>(r: R) -> io::Result<SquareHamCycle> {
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut out = Vec::new();
            for tok in t.split_whitespace() {
                let v: VertexId = tok.parse().map_err(|_| {
                    io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("bad vertex token `{tok}`"),
                    )
                })?;
                out.push(v);
            }
            return Ok(SquareHamCycle(out));
        }
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "no witness line found",
        ))
    }
}

/// Checks that `order` visits every vertex of g exactly once and that every
/// pair at cyclic distance <= k along it is an edge.
pub fn verify_square_ham(g: &Graph, order: &[VertexId], k: usize) -> bool {
    assert!(k >= 1, "power must be >= 1");
    let n = g.n();
    if order.len() != n || n < 2 * k + 1 {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v as usize >= n || seen[v as usize] {
            return false;
        }
        seen[v as usize] = true;
    }
    for i in 0..n {
        for d in 1..=k {
            if !g.has_edge(order[i], order[(i + d) % n]) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("exact search capped at n = {max}, instance has n = {n}")]
    TooLarge { n: usize, max: usize },
    #[error("the k-th power of a cycle needs n >= 2k + 1 (n = {n}, k = {k})")]
    TooSmall { n: usize, k: usize },
}

const BRUTE_FORCE_MAX_N: usize = 14;

/// Exhaustive search for the k-th power of a Hamilton cycle. Fixes
/// order[0] = 0 to factor out rotation; reflections are still explored.
/// Returns the lexicographically least witness under that normalization.
pub fn brute_force_square_ham(
    g: &Graph,
    k: usize,
) -> Result<Option<SquareHamCycle>, OracleError> {
    assert!(k >= 1, "power must be >= 1");
    let n = g.n();
    if n < 2 * k + 1 {
        return Err(OracleError::TooSmall { n, k });
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(OracleError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut order: Vec<VertexId> = vec![0];
    let mut used = vec![false; n];
    used[0] = true;
    if dfs(g, k, n, &mut order, &mut used) {
        debug_assert!(verify_square_ham(g, &order, k));
        Ok(Some(SquareHamCycle(order)))
    } else {
        Ok(None)
    }
}

fn dfs(g: &Graph, k: usize, n: usize, order: &mut Vec<VertexId>, used: &mut [bool]) -> bool {
    let pos = order.len();
    if pos == n {
        // Wrap pairs: positions n-d .. n-1 against the first entries.
        for d in 1..=k {
            for i in (n - d)..n {
                if !g.has_edge(order[i], order[i + d - n]) {
                    return false;
                }
            }
        }
        return true;
    }
    for cand in 1..n as VertexId {
        if used[cand as usize] {
            continue;
        }
        let lo = pos.saturating_sub(k);
        if (lo..pos).any(|i| !g.has_edge(order[i], cand)) {
            continue;
        }
        order.push(cand);
        used[cand as usize] = true;
        if dfs(g, k, n, order, used) {
            return true;
        }
        order.pop();
        used[cand as usize] = false;
    }
    false
}

/// How cyclic orders of a complete bipartite instance are enumerated.
#[derive(Debug, Clone, Copy)]
pub enum KstMode {
    /// All C(s+t, s) placements of the small side among the positions.
    /// The cross-edge counts depend only on which positions hold small-side
    /// vertices, so this covers every cyclic order exactly.
    Exhaustive,
    /// Uniformly random placements.
    Sampled { trials: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct KstReport {
    pub s: usize,
    pub t: usize,
    pub k: usize,
    pub cases: usize,
    /// Largest number of cross pairs at cyclic distance <= k seen.
    pub max_power_cross: usize,
    /// Largest number of cross pairs at cyclic distance exactly 1 seen.
    pub max_cycle_cross: usize,
    /// The ceiling 2ks that no placement may exceed in power cross pairs.
    pub bound: usize,
    pub violations: usize,
}

/// Counts cross pairs over placements of side A among the n cyclic
/// positions and checks each against the 2ks ceiling. The ceiling is
/// what makes t > (2k-1)s + binom-slack hosts unwinnable: a k-th power
/// needs kn pairs, at most 2ks of which can cross, but a bipartite host
/// has only cross pairs. Whenever kn > 2ks, i.e. t > s, no placement
/// can realize the power, and the counter exhibits the gap.
pub fn bipartite_square_edge_bound_check(s: usize, t: usize, k: usize, mode: KstMode) -> KstReport {
    assert!(s >= 1 && t >= 1 && k >= 1);
    let n = s + t;
    let bound = 2 * k * s;
    let mut report = KstReport {
        s,
        t,
        k,
        cases: 0,
        max_power_cross: 0,
        max_cycle_cross: 0,
        bound,
        violations: 0,
    };
    let mut is_a = vec![false; n];
    match mode {
        KstMode::Exhaustive => {
            let mut positions: Vec<usize> = (0..s).collect();
            loop {
                for f in is_a.iter_mut() {
                    *f = false;
                }
                for &p in &positions {
                    is_a[p] = true;
                }
                tally(&is_a, k, &mut report);
                // Next s-subset of 0..n in lexicographic order.
                let mut i = s;
                loop {
                    if i == 0 {
                        return report;
                    }
                    i -= 1;
                    if positions[i] != i + n - s {
                        break;
                    }
                }
                positions[i] += 1;
                for j in (i + 1)..s {
                    positions[j] = positions[j - 1] + 1;
                }
            }
        }
        KstMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool: Vec<usize> = (0..n).collect();
            for _ in 0..trials {
                // Partial Fisher-Yates: the first s entries become side A.
                for i in 0..s {
                    let j = rng.random_range(i..n);
                    pool.swap(i, j);
                }
                for f in is_a.iter_mut() {
                    *f = false;
                }
                for &p in &pool[..s] {
                    is_a[p] = true;
                }
                tally(&is_a, k, &mut report);
            }
            report
        }
    }
}

fn tally(is_a: &[bool], k: usize, report: &mut KstReport) {
    let n = is_a.len();
    let mut power_cross = 0usize;
    let mut cycle_cross = 0usize;
    for pos in 0..n {
        for d in 1..=k {
            if is_a[pos] != is_a[(pos + d) % n] {
                power_cross += 1;
                if d == 1 {
                    cycle_cross += 1;
                }
            }
        }
    }
    report.cases += 1;
    report.max_power_cross = report.max_power_cross.max(power_cross);
    report.max_cycle_cross = report.max_cycle_cross.max(cycle_cross);
    if power_cross > report.bound {
        report.violations += 1;
    }
}

/// Shuffles `order` in place until it stops being a valid witness, up to
/// `attempts` tries. Used to refute "no witness exists" claims cheaply.
pub fn random_orders_all_fail<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    attempts: usize,
    rng: &mut R,
) -> bool {
    let mut order: Vec<VertexId> = (0..g.n() as VertexId).collect();
    for _ in 0..attempts {
        order.shuffle(rng);
        if verify_square_ham(g, &order, k) {
            return false;
        }
    }
    true
}
