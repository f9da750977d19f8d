//! Random and structured input graphs: sparse binomial sprinkles, dense hosts
//! with a guaranteed minimum degree, and complete bipartite instances.

use crate::graph::{Graph, GraphBuilder, VertexId};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

/// Edge probability schedule for the random boosters: p = K * (ln n)^(1/3) / n^(2/3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SprinkleParams {
    pub n: usize,
    pub k_const: f64,
    pub p: f64,
}

impl SprinkleParams {
    pub fn new(n: usize, k_const: f64) -> Result<SprinkleParams, GenError> {
        if n < 2 {
            return Err(GenError::BadParam(format!("n must be >= 2, got {n}")));
        }
        if !k_const.is_finite() || k_const <= 0.0 {
            return Err(GenError::BadParam(format!(
                "K must be a positive finite number, got {k_const}"
            )));
        }
        let nf = n as f64;
        let p = k_const * nf.ln().cbrt() / nf.powf(2.0 / 3.0);
        if !(0.0 < p && p < 1.0) {
            return Err(GenError::BadParam(format!(
                "edge probability p = {p} out of (0, 1) for n = {n}, K = {k_const}"
            )));
        }
        Ok(SprinkleParams { n, k_const, p })
    }

    /// How many independent boosters a run of order n consumes.
    pub fn count_for(n: usize) -> usize {
        if n.is_multiple_of(2) {
            3
        } else {
            4
        }
    }
}

/// Maps a linear index t in 0..n(n-1)/2 to the t-th pair (u, v), u < v,
/// in lexicographic order.
fn pair_at(n: usize, t: usize) -> (VertexId, VertexId) {
    // Row u starts at offset u*n - u*(u+1)/2; invert with the quadratic
    // formula, then fix up float error by stepping at most one row.
    let tf = t as f64;
    let nf = n as f64;
    let mut u = ((2.0 * nf - 1.0 - ((2.0 * nf - 1.0).powi(2) - 8.0 * tf).sqrt()) / 2.0) as usize;
    let start = |u: usize| u * n - u * (u + 1) / 2;
    while start(u + 1) <= t {
        u += 1;
    }
    while start(u) > t {
        u -= 1;
    }
    let v = u + 1 + (t - start(u));
    debug_assert!(v < n);
    (u as VertexId, v as VertexId)
}

/// Binomial random graph: each of the n(n-1)/2 pairs is an edge
/// independently with probability p. Runs in O(n + m) expected time by
/// skipping geometrically between successive edges.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    assert!((0.0..=1.0).contains(&p), "p out of [0, 1]");
    if p <= 0.0 || n < 2 {
        return Graph::empty(n);
    }
    if p >= 1.0 {
        return Graph::complete(n);
    }
    let total = n * (n - 1) / 2;
    let log_q = (1.0 - p).ln();
    let mut b = GraphBuilder::new(n);
    let mut t: usize = 0;
    loop {
        // U in (0, 1]; skip = floor(ln U / ln(1-p)) pairs before the next edge.
        let u = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - t) as f64 {
            break;
        }
        t += skip as usize;
        let (x, y) = pair_at(n, t);
        b.add_edge(x, y);
        t += 1;
        if t >= total {
            break;
        }
    }
    b.freeze()
}

/// Draws the independent boosters for one trial. `count` must match
/// `SprinkleParams::count_for` for the run's order.
pub fn sample_sprinkles<R: Rng + ?Sized>(
    params: SprinkleParams,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Graph>, GenError> {
    let expected = SprinkleParams::count_for(params.n);
    if count != expected {
        return Err(GenError::BadParam(format!(
            "order {} needs {} boosters, requested {}",
            params.n, expected, count
        )));
    }
    Ok((0..count).map(|_| gnp(params.n, params.p, rng)).collect())
}

/// Dense host with min degree >= ceil(alpha * n): sample G(n, q) at
/// q = alpha + margin and resample until the degree floor holds.
/// The margin keeps the failure probability per attempt tiny without
/// pushing q to 1 for the n this tool actually runs at.
pub fn min_degree_host<R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Graph, GenError> {
    if !(0.5 < alpha && alpha < 1.0) {
        return Err(GenError::BadParam(format!(
            "alpha must lie in (1/2, 1), got {alpha}"
        )));
    }
    if n < 3 {
        return Err(GenError::BadParam(format!("host needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    let margin = (3.0 * (nf.ln() / nf).sqrt()).min((1.0 - alpha) / 2.0);
    let q = alpha + margin;
    let need = (alpha * nf).ceil() as usize;
    if need > n - 1 {
        return Err(GenError::HostBudget {
            n,
            alpha,
            attempts: 0,
        });
    }
    const ATTEMPTS: usize = 64;
    for _ in 0..ATTEMPTS {
        let g = gnp(n, q.min(1.0), rng);
        if g.min_degree() >= need {
            return Ok(g);
        }
    }
    Err(GenError::HostBudget {
        n,
        alpha,
        attempts: ATTEMPTS,
    })
}

/// Complete bipartite graph with sides A = [0, s) and B = [s, s + t).
pub fn complete_bipartite(s: usize, t: usize) -> Graph {
    let mut b = GraphBuilder::new(s + t);
    for u in 0..s {
        for v in s..(s + t) {
            b.add_edge(u as VertexId, v as VertexId);
        }
    }
    b.freeze()
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("{0}")]
    BadParam(String),
    #[error("no host with the required degree floor after {attempts} draws (n = {n}, alpha = {alpha})")]
    HostBudget {
        n: usize,
        alpha: f64,
        attempts: usize,
    },
}

/// Where the host graph of a trial comes from.
///
/// Text forms (also accepted by the CLI):
///   gnp:n=400,alpha=0.75   random dense host, fixed order
///   gnp:alpha=0.75         random dense host, order supplied per sweep cell
///   complete:n=12          complete graph, fixed order
///   complete               complete graph, order supplied per sweep cell
///   kst:s=40,t=360         complete bipartite host
///   file:PATH              edge list read from disk
#[derive(Debug, Clone, PartialEq)]
pub enum HostSpec {
    Gnp { n: Option<usize>, alpha: f64 },
    Complete { n: Option<usize> },
    Kst { s: usize, t: usize },
    File { path: String },
}

impl HostSpec {
    /// The order the host spec itself pins down, if any. File hosts report None
    /// here; their order is known only after reading.
    pub fn intrinsic_n(&self) -> Option<usize> {
        match self {
            HostSpec::Gnp { n, .. } => *n,
            HostSpec::Complete { n } => *n,
            HostSpec::Kst { s, t } => Some(s + t),
            HostSpec::File { .. } => None,
        }
    }
}

fn parse_kv(fields: &str, spec: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for field in fields.split(',') {
        let field = field.trim();
        if field.is_empty() {
            continue;
        }
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| format!("bad host spec `{spec}`: field `{field}` is not key=value"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl FromStr for HostSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<HostSpec, String> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k.trim(), r),
            None => (s.trim(), ""),
        };
        match kind {
            "gnp" => {
                let mut n = None;
                let mut alpha = None;
                for (k, v) in parse_kv(rest, s)? {
                    match k.as_str() {
                        "n" => n = Some(v.parse().map_err(|_| format!("bad n in `{s}`"))?),
                        "alpha" => {
                            alpha = Some(v.parse().map_err(|_| format!("bad alpha in `{s}`"))?)
                        }
                        _ => return Err(format!("unknown field `{k}` in `{s}`")),
                    }
                }
                let alpha = alpha.ok_or_else(|| format!("`{s}` is missing alpha"))?;
                Ok(HostSpec::Gnp { n, alpha })
            }
            "complete" => {
                let mut n = None;
                for (k, v) in parse_kv(rest, s)? {
                    match k.as_str() {
                        "n" => n = Some(v.parse().map_err(|_| format!("bad n in `{s}`"))?),
                        _ => return Err(format!("unknown field `{k}` in `{s}`")),
                    }
                }
                Ok(HostSpec::Complete { n })
            }
            "kst" => {
                let mut s_side = None;
                let mut t_side = None;
                for (k, v) in parse_kv(rest, s)? {
                    match k.as_str() {
                        "s" => s_side = Some(v.parse().map_err(|_| format!("bad s in `{s}`"))?),
                        "t" => t_side = Some(v.parse().map_err(|_| format!("bad t in `{s}`"))?),
                        _ => return Err(format!("unknown field `{k}` in `{s}`")),
                    }
                }
                match (s_side, t_side) {
                    (Some(a), Some(b)) => Ok(HostSpec::Kst { s: a, t: b }),
                    _ => Err(format!("`{s}` needs both s and t")),
                }
            }
            "file" => {
                if rest.is_empty() {
                    Err(format!("`{s}` is missing a path"))
                } else {
                    Ok(HostSpec::File {
                        path: rest.to_string(),
                    })
                }
            }
            _ => Err(format!(
                "unknown host kind `{kind}` (expected gnp, complete, kst, or file)"
            )),
        }
    }
}

impl fmt::Display for HostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HostSpec::Gnp { n: Some(n), alpha } => write!(f, "gnp:n={n},alpha={alpha}"),
            HostSpec::Gnp { n: None, alpha } => write!(f, "gnp:alpha={alpha}"),
            HostSpec::Complete { n: Some(n) } => write!(f, "complete:n={n}"),
            HostSpec::Complete { n: None } => write!(f, "complete"),
            HostSpec::Kst { s, t } => write!(f, "kst:s={s},t={t}"),
            HostSpec::File { path } => write!(f, "file:{path}"),
        }
    }
}
