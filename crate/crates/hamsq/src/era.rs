//! The round-based search: grow one path by a pillar per round using
//! rotations to expose fresh ends, extensions to absorb free pillars, and
//! cycle reopening when the current end is exhausted; finish by joining
//! the ends once every pillar is used.

use crate::generators::{sample_sprinkles, GenError, SprinkleParams};
use crate::graph::{Graph, VertexId};
use crate::matching::{
    build_pi_graph, find_perfect_matching, pi_degree_diagnostic, FreeSet, Matching,
    PiDegreeReport, PiGraph,
};
use crate::oracle::{verify_square_ham, SquareHamCycle};
use crate::twopath::{
    apply_cycle_extension, apply_extension, rotate, try_close, try_cycle_extension,
    try_simple_extension, validate, ClosedCycle, Gadget, Move, Seg, TwoPath,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

/// Which edges may justify a rotation. Restricted follows the staged
/// discipline: first-pass rotations need the two pillars joined in the
/// contraction of host+X1, second-pass rotations in the contraction of
/// host+X1+X2. AllEdges lets any edge of the full union justify any move.
/// Extensions, closings, and gadget-end junctions always use the full
/// union in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMode {
    Restricted,
    AllEdges,
}

impl fmt::Display for EdgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeMode::Restricted => write!(f, "restricted"),
            EdgeMode::AllEdges => write!(f, "all-edges"),
        }
    }
}

impl FromStr for EdgeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<EdgeMode, String> {
        match s {
            "restricted" => Ok(EdgeMode::Restricted),
            "all-edges" => Ok(EdgeMode::AllEdges),
            _ => Err(format!("unknown mode `{s}` (restricted or all-edges)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EraConfig {
    /// Declared host density floor; diagnostics only, never gates the run.
    pub alpha: f64,
    pub seed: u64,
    pub mode: EdgeMode,
    /// None means 4n.
    pub max_rotations_per_round: Option<usize>,
    pub matching_effort: u32,
    /// Re-validate every pooled path. Expensive; for tests.
    pub debug_validate: bool,
}

impl EraConfig {
    pub fn new(alpha: f64, seed: u64) -> EraConfig {
        EraConfig {
            alpha,
            seed,
            mode: EdgeMode::Restricted,
            max_rotations_per_round: None,
            matching_effort: 64,
            debug_validate: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    Matching,
    Gadget,
    StuckRound,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::Matching => write!(f, "matching"),
            FailureReason::Gadget => write!(f, "gadget"),
            FailureReason::StuckRound => write!(f, "stuck_round"),
        }
    }
}

impl FromStr for FailureReason {
    type Err = String;

    fn from_str(s: &str) -> Result<FailureReason, String> {
        match s {
            "matching" => Ok(FailureReason::Matching),
            "gadget" => Ok(FailureReason::Gadget),
            "stuck_round" => Ok(FailureReason::StuckRound),
            _ => Err(format!("unknown failure reason `{s}`")),
        }
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub const SPRINKLE_STREAM: u64 = 1;
pub const MATCHING_STREAM: u64 = 2;
pub const HOST_STREAM: u64 = 3;

/// Independent 64-bit stream seed derived from a master seed. Distinct
/// streams get unrelated generators so adding a consumer never shifts the
/// draws of another.
pub fn sub_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ stream)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub rotations: usize,
    pub pool_size: usize,
    pub cap_hit: bool,
    /// The winning chain of moves, relative to the round's input path.
    /// Empty when the round got stuck.
    pub moves: Vec<Move>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EraTrace {
    pub rounds: Vec<RoundLog>,
}

impl EraTrace {
    pub fn flat_moves(&self) -> Vec<Move> {
        self.rounds.iter().flat_map(|r| r.moves.clone()).collect()
    }

    /// Text form: `# key=value` header lines, then per round one
    /// `# round ...` marker followed by its move lines.
    pub fn write<W: Write>(&self, mut w: W, headers: &[(&str, String)]) -> io::Result<()> {
        writeln!(w, "# era-trace v1")?;
        for (k, v) in headers {
            writeln!(w, "# {k}={v}")?;
        }
        for (i, r) in self.rounds.iter().enumerate() {
            writeln!(
                w,
                "# round {} rotations={} pool={} cap_hit={}",
                i + 1,
                r.rotations,
                r.pool_size,
                r.cap_hit as u8
            )?;
            for mv in &r.moves {
                writeln!(w, "{mv}")?;
            }
        }
        Ok(())
    }

    pub fn parse<R: BufRead>(r: R) -> io::Result<EraTrace> {
        let mut rounds: Vec<RoundLog> = Vec::new();
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix("# round ") {
                let mut log = RoundLog {
                    rotations: 0,
                    pool_size: 0,
                    cap_hit: false,
                    moves: Vec::new(),
                };
                for tok in rest.split_whitespace().skip(1) {
                    if let Some((k, v)) = tok.split_once('=') {
                        match k {
                            "rotations" => log.rotations = v.parse().map_err(bad)?,
                            "pool" => log.pool_size = v.parse().map_err(bad)?,
                            "cap_hit" => log.cap_hit = v == "1",
                            _ => {}
                        }
                    }
                }
                rounds.push(log);
            } else if t.starts_with('#') {
                continue;
            } else {
                let mv: Move = t
                    .parse()
                    .map_err(|e: String| io::Error::new(io::ErrorKind::InvalidData, e))?;
                let Some(current) = rounds.last_mut() else {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidData,
                        "move line before the first round marker",
                    ));
                };
                current.moves.push(mv);
            }
        }
        Ok(EraTrace { rounds })
    }
}

fn bad<E: fmt::Display>(e: E) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, e.to_string())
}

#[derive(Debug, Clone, Default)]
pub struct EraDiagnostics {
    /// Edges contributed by the boosters alone (union, host excluded).
    pub realized_x_edges: usize,
    pub host_min_degree: usize,
    pub pi1_min_degree: Option<usize>,
    pub pi_report: Option<PiDegreeReport>,
    /// Connectivity of the contraction at the second stage.
    pub gamma2_connected: Option<bool>,
    pub cap_hits: usize,
}

#[derive(Debug, Clone)]
pub struct EraOutcome {
    pub result: Result<SquareHamCycle, FailureReason>,
    pub rounds: u32,
    pub trace: EraTrace,
    pub diag: EraDiagnostics,
}

/// Figure-shaped five-vertex patch for odd orders. Deterministic scan:
/// centers c by degree descending (index ascending on ties), then the
/// first ordered adjacent pair (a, b) in N(c), then the first
/// d in N(a) ∩ N(c) and e in N(b) ∩ N(c) keeping all five distinct.
pub fn find_gadget(g: &Graph) -> Option<Gadget> {
    let n = g.n();
    let mut centers: Vec<VertexId> = (0..n as VertexId).collect();
    centers.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    for &c in &centers {
        let nc: Vec<VertexId> = g.neighbors(c).collect();
        for &a in &nc {
            for &b in &nc {
                if a == b || !g.has_edge(a, b) {
                    continue;
                }
                let Some(d) = g.common_neighbors(a, c).into_iter().find(|&d| d != b) else {
                    continue;
                };
                let Some(e) = g
                    .common_neighbors(b, c)
                    .into_iter()
                    .find(|&e| e != a && e != d)
                else {
                    continue;
                };
                let g5 = Gadget { a, b, c, d, e };
                debug_assert!(g5.holds_in(g));
                return Some(g5);
            }
        }
    }
    None
}

struct Stages {
    stage1: Graph,
    stage2: Graph,
    gamma: Graph,
    realized_x_edges: usize,
}

fn era_stages(host: &Graph, xs: &[Graph]) -> Stages {
    let n = host.n();
    let odd = n % 2 == 1;
    assert_eq!(
        xs.len(),
        3 + odd as usize,
        "order {n} takes {} boosters",
        3 + odd as usize
    );
    for x in xs {
        assert_eq!(x.n(), n, "booster order mismatch");
    }
    let stage1 = host.union(&xs[0]);
    let stage2 = stage1.union(&xs[1]);
    let mut gamma = stage2.union(&xs[2]);
    if odd {
        gamma = gamma.union(&xs[3]);
    }
    let mut x_union = xs[0].clone();
    for x in &xs[1..] {
        x_union = x_union.union(x);
    }
    Stages {
        stage1,
        stage2,
        gamma,
        realized_x_edges: x_union.edge_count(),
    }
}

/// Boosters a trial at (n, K, seed) would draw; the runner and the replay
/// tooling share this so transcripts stay reproducible from the seed alone.
pub fn sample_trial_sprinkles(n: usize, k_const: f64, seed: u64) -> Result<Vec<Graph>, GenError> {
    let params = SprinkleParams::new(n, k_const)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, SPRINKLE_STREAM));
    sample_sprinkles(params, SprinkleParams::count_for(n), &mut rng)
}

/// Full pipeline: draw boosters from the seed, then search.
pub fn run_era(host: &Graph, k_const: f64, cfg: &EraConfig) -> Result<EraOutcome, GenError> {
    let xs = sample_trial_sprinkles(host.n(), k_const, cfg.seed)?;
    Ok(run_era_with(host, &xs, cfg))
}

/// Search with the boosters already drawn. The matching comes from the
/// first booster (gadget vertices excluded first for odd orders), seeded
/// from cfg.seed on its own stream.
pub fn run_era_with(host: &Graph, xs: &[Graph], cfg: &EraConfig) -> EraOutcome {
    let stages = era_stages(host, xs);
    let mut diag = EraDiagnostics {
        realized_x_edges: stages.realized_x_edges,
        host_min_degree: host.min_degree(),
        ..EraDiagnostics::default()
    };
    let gadget = if host.n() % 2 == 1 {
        match find_gadget(&stages.gamma) {
            Some(g5) => Some(g5),
            None => {
                return EraOutcome {
                    result: Err(FailureReason::Gadget),
                    rounds: 0,
                    trace: EraTrace::default(),
                    diag,
                }
            }
        }
    } else {
        None
    };
    let excluded: Vec<VertexId> = gadget.map(|g5| g5.vertices().to_vec()).unwrap_or_default();
    let mut rng_m = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, MATCHING_STREAM));
    let m = match find_perfect_matching(&xs[0], &excluded, cfg.matching_effort, &mut rng_m) {
        Ok(m) => m,
        Err(_) => {
            return EraOutcome {
                result: Err(FailureReason::Matching),
                rounds: 0,
                trace: EraTrace::default(),
                diag,
            }
        }
    };
    era_search(&stages, &m, gadget, cfg, &mut diag)
}

/// Search with a supplied matching and gadget; for planted instances and
/// replaying. Pairs must be edges of host+X1 and cover exactly the
/// vertices outside the gadget.
pub fn run_era_planted(
    host: &Graph,
    xs: &[Graph],
    m: &Matching,
    gadget: Option<Gadget>,
    cfg: &EraConfig,
) -> EraOutcome {
    let stages = era_stages(host, xs);
    let excluded: Vec<VertexId> = gadget.map(|g5| g5.vertices().to_vec()).unwrap_or_default();
    assert!(
        m.validate_against(&stages.stage1, &excluded),
        "planted matching invalid for this instance"
    );
    if let Some(g5) = &gadget {
        assert!(g5.holds_in(&stages.gamma), "planted gadget edges missing");
    }
    let mut diag = EraDiagnostics {
        realized_x_edges: stages.realized_x_edges,
        host_min_degree: host.min_degree(),
        ..EraDiagnostics::default()
    };
    era_search(&stages, m, gadget, cfg, &mut diag)
}

pub enum RoundOutcome {
    Extended(TwoPath),
    Closed(ClosedCycle),
    Stuck,
}

/// Everything a round needs that stays fixed across rounds. `pi1` gates
/// first-pass rotations, `pi2` the second pass; extensions and closings
/// read `gamma` directly.
pub struct RoundCtx<'a> {
    pub gamma: &'a Graph,
    pub pi1: &'a PiGraph,
    pub pi2: &'a PiGraph,
    pub m: &'a Matching,
    pub gadget: Option<&'a Gadget>,
    pub mode: EdgeMode,
    pub cap: usize,
    pub debug_validate: bool,
}

fn era_search(
    stages: &Stages,
    m: &Matching,
    gadget: Option<Gadget>,
    cfg: &EraConfig,
    diag: &mut EraDiagnostics,
) -> EraOutcome {
    let n = stages.gamma.n();
    let pi1 = build_pi_graph(&stages.stage1, m);
    let pi2 = build_pi_graph(&stages.stage2, m);
    if !m.is_empty() {
        diag.pi1_min_degree = Some(pi1.base().min_degree());
        diag.gamma2_connected = Some(pi2.is_connected());
        if 0.5 < cfg.alpha && cfg.alpha <= 1.0 {
            diag.pi_report = Some(pi_degree_diagnostic(&pi1, cfg.alpha));
        }
    }
    let ctx = RoundCtx {
        gamma: &stages.gamma,
        pi1: &pi1,
        pi2: &pi2,
        m,
        gadget: gadget.as_ref(),
        mode: cfg.mode,
        cap: cfg.max_rotations_per_round.unwrap_or(4 * n),
        debug_validate: cfg.debug_validate,
    };
    let mut free = FreeSet::all(m.len());
    let mut path = match &gadget {
        Some(g5) => TwoPath::gadget_seed(g5),
        None => {
            free.take(0);
            TwoPath::single_pillar(m, 0)
        }
    };
    let mut trace = EraTrace::default();
    let mut rounds: u32 = 0;
    loop {
        let close_goal = free.remaining() == 0;
        rounds += 1;
        assert!(
            rounds as usize <= n.div_ceil(2),
            "round count exceeded the pillar budget"
        );
        let (outcome, log) = run_round(&path, &ctx, &free, close_goal);
        diag.cap_hits += log.cap_hit as usize;
        trace.rounds.push(log);
        match outcome {
            RoundOutcome::Extended(q) => {
                let Seg::Pillar(pid) = *q.segs().last().unwrap() else {
                    unreachable!("extensions always append a pillar");
                };
                free.take(pid);
                if cfg.debug_validate {
                    assert!(validate(&q, &stages.gamma, m, gadget.as_ref()));
                    let used: usize = q.segs().iter().filter(|s| matches!(s, Seg::Pillar(_))).count();
                    assert_eq!(used + free.remaining(), m.len());
                }
                path = q;
            }
            RoundOutcome::Closed(c) => {
                let out = assemble_output(&c, n);
                assert!(
                    verify_square_ham(&stages.gamma, &out.0, 2),
                    "closed cycle failed final verification"
                );
                return EraOutcome {
                    result: Ok(out),
                    rounds,
                    trace,
                    diag: diag.clone(),
                };
            }
            RoundOutcome::Stuck => {
                return EraOutcome {
                    result: Err(FailureReason::StuckRound),
                    rounds,
                    trace,
                    diag: diag.clone(),
                }
            }
        }
    }
}

pub fn assemble_output(c: &ClosedCycle, n: usize) -> SquareHamCycle {
    let seq = c.path().seq();
    assert_eq!(seq.len(), n, "final cycle does not cover every vertex");
    SquareHamCycle(seq.to_vec())
}

struct PoolEntry {
    path: TwoPath,
    parent: Option<usize>,
    mv: Option<Move>,
}

struct RoundState<'a> {
    ctx: &'a RoundCtx<'a>,
    free: &'a FreeSet,
    close_goal: bool,
    pool: Vec<PoolEntry>,
    seen: HashSet<(u64, u64)>,
    rotations: usize,
    cap_hit: bool,
}

enum Admit {
    Win(RoundOutcome, Vec<Move>),
    Pooled(usize),
    Dup,
}

impl<'a> RoundState<'a> {
    /// Pools the path unless its (head, tail) end pair was already seen
    /// (`force` skips that filter but still records the keys), then checks
    /// the round goal on it: a simple extension mid-search, a closing in
    /// the final round.
    fn admit(&mut self, path: TwoPath, parent: Option<usize>, mv: Option<Move>, force: bool) -> Admit {
        let keys = path.end_keys(self.ctx.m.len());
        if !self.seen.insert(keys) && !force {
            return Admit::Dup;
        }
        if self.ctx.debug_validate {
            assert!(validate(&path, self.ctx.gamma, self.ctx.m, self.ctx.gadget));
        }
        let idx = self.pool.len();
        self.pool.push(PoolEntry { path, parent, mv });
        let path = &self.pool[idx].path;
        if self.close_goal {
            if let Some(c) = try_close(path, self.ctx.gamma) {
                let mut moves = self.chain(idx);
                moves.push(Move::Close);
                return Admit::Win(RoundOutcome::Closed(c), moves);
            }
        } else if let Some((q, ext)) =
            try_simple_extension(path, self.ctx.gamma, self.ctx.m, self.free)
        {
            let mut moves = self.chain(idx);
            moves.push(ext);
            return Admit::Win(RoundOutcome::Extended(q), moves);
        }
        Admit::Pooled(idx)
    }

    fn chain(&self, idx: usize) -> Vec<Move> {
        let mut moves = Vec::new();
        let mut at = Some(idx);
        while let Some(i) = at {
            if let Some(mv) = self.pool[i].mv {
                moves.push(mv);
            }
            at = self.pool[i].parent;
        }
        moves.reverse();
        moves
    }

    fn log(&self, moves: Vec<Move>) -> RoundLog {
        RoundLog {
            rotations: self.rotations,
            pool_size: self.pool.len(),
            cap_hit: self.cap_hit,
            moves,
        }
    }
}

/// Whether the restricted discipline lets this split rotate: pillar ends
/// must be joined in the stage's contraction; junctions involving the
/// gadget have no contraction vertex and are settled directly by the
/// rotation's own edge checks.
fn rotation_allowed(p: &TwoPath, split: usize, pi: Option<&PiGraph>) -> bool {
    let Some(pi) = pi else { return true };
    match (p.segs()[split - 1], *p.segs().last().unwrap()) {
        (Seg::Pillar(pa), Seg::Pillar(pb)) => pi.base().has_edge(pa, pb),
        _ => true,
    }
}

/// One search round. Mid-search (close_goal false) it hunts a simple
/// extension, falling back to close-and-reopen; in the final round
/// (close_goal true) it hunts a closing. First pass rotates the input
/// path, second pass rotates the reversal of each first-pass result so
/// its fresh end becomes the fixed one. Every new path is checked against
/// the goal the moment it is pooled.
pub fn run_round(
    p0: &TwoPath,
    ctx: &RoundCtx,
    free: &FreeSet,
    close_goal: bool,
) -> (RoundOutcome, RoundLog) {
    let mut st = RoundState {
        ctx,
        free,
        close_goal,
        pool: Vec::new(),
        seen: HashSet::new(),
        rotations: 0,
        cap_hit: false,
    };
    if let Admit::Win(o, moves) = st.admit(p0.clone(), None, None, true) {
        let log = st.log(moves);
        return (o, log);
    }

    let pi_step1 = match ctx.mode {
        EdgeMode::Restricted => Some(ctx.pi1),
        EdgeMode::AllEdges => None,
    };
    let splits: Vec<usize> = p0.split_candidates().collect();
    'step1: for split in splits {
        if st.rotations >= ctx.cap {
            st.cap_hit = true;
            break 'step1;
        }
        if !rotation_allowed(p0, split, pi_step1) {
            continue;
        }
        let Ok(q) = rotate(p0, split, ctx.gamma) else {
            continue;
        };
        st.rotations += 1;
        if let Admit::Win(o, moves) = st.admit(q, Some(0), Some(Move::Rot { split }), false) {
            let log = st.log(moves);
            return (o, log);
        }
    }

    let step1_end = st.pool.len();
    let pi_step2 = match ctx.mode {
        EdgeMode::Restricted => Some(ctx.pi2),
        EdgeMode::AllEdges => None,
    };
    'step2: for i in 0..step1_end {
        let r = st.pool[i].path.reversed();
        let r_idx = match st.admit(r, Some(i), Some(Move::Rev), true) {
            Admit::Win(o, moves) => {
                let log = st.log(moves);
                return (o, log);
            }
            Admit::Pooled(idx) => idx,
            Admit::Dup => continue,
        };
        if i == 0 {
            // The reversal of the input path only contributes its own goal
            // check; rotations on it would explore pairs the first pass
            // already owns.
            continue;
        }
        let splits: Vec<usize> = st.pool[r_idx].path.split_candidates().collect();
        for split in splits {
            if st.rotations >= ctx.cap {
                st.cap_hit = true;
                break 'step2;
            }
            let rp = &st.pool[r_idx].path;
            if !rotation_allowed(rp, split, pi_step2) {
                continue;
            }
            let Ok(q) = rotate(rp, split, ctx.gamma) else {
                continue;
            };
            st.rotations += 1;
            if let Admit::Win(o, moves) =
                st.admit(q, Some(r_idx), Some(Move::Rot { split }), false)
            {
                let log = st.log(moves);
                return (o, log);
            }
        }
    }

    if !close_goal {
        for idx in 0..st.pool.len() {
            let Some(c) = try_close(&st.pool[idx].path, ctx.gamma) else {
                continue;
            };
            if let Some((q, mv)) = try_cycle_extension(&c, ctx.gamma, ctx.m, free) {
                let mut moves = st.chain(idx);
                moves.push(Move::Close);
                moves.push(mv);
                let log = st.log(moves);
                return (RoundOutcome::Extended(q), log);
            }
        }
    }
    let log = st.log(Vec::new());
    (RoundOutcome::Stuck, log)
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("setup failed: {reason}")]
    Setup { reason: FailureReason },
    #[error("move {index} ({mv}): not applicable in the current state")]
    WrongState { index: usize, mv: Move },
    #[error("move {index} ({mv}): pillar not free")]
    PillarUnavailable { index: usize, mv: Move },
    #[error("move {index} ({mv}): required edges missing")]
    MoveFailed { index: usize, mv: Move },
    #[error("move {index} ({mv}): resulting path fails validation")]
    InvalidPath { index: usize, mv: Move },
    #[error("transcript ended without a verified closed cycle")]
    Incomplete,
}

enum ReplayState {
    Open(TwoPath),
    Closed(ClosedCycle),
}

/// Re-derives matching and gadget from the seed exactly as run_era_with
/// does, then applies a move transcript with full validation after every
/// step. Returns the witness only if the transcript ends in a closed
/// cycle covering the whole vertex set that the verifier accepts.
pub fn replay_era(
    host: &Graph,
    xs: &[Graph],
    cfg: &EraConfig,
    moves: &[Move],
) -> Result<SquareHamCycle, ReplayError> {
    let stages = era_stages(host, xs);
    let gadget = if host.n() % 2 == 1 {
        match find_gadget(&stages.gamma) {
            Some(g5) => Some(g5),
            None => {
                return Err(ReplayError::Setup {
                    reason: FailureReason::Gadget,
                })
            }
        }
    } else {
        None
    };
    let excluded: Vec<VertexId> = gadget.map(|g5| g5.vertices().to_vec()).unwrap_or_default();
    let mut rng_m = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, MATCHING_STREAM));
    let m = find_perfect_matching(&xs[0], &excluded, cfg.matching_effort, &mut rng_m)
        .map_err(|_| ReplayError::Setup {
            reason: FailureReason::Matching,
        })?;
    replay_moves(&stages.gamma, &m, gadget, moves)
}

/// Transcript application against a fixed full graph, matching, and
/// gadget; used directly by planted-instance tests.
pub fn replay_moves(
    gamma: &Graph,
    m: &Matching,
    gadget: Option<Gadget>,
    moves: &[Move],
) -> Result<SquareHamCycle, ReplayError> {
    let n = gamma.n();
    let mut free = FreeSet::all(m.len());
    let mut state = match &gadget {
        Some(g5) => ReplayState::Open(TwoPath::gadget_seed(g5)),
        None => {
            free.take(0);
            ReplayState::Open(TwoPath::single_pillar(m, 0))
        }
    };
    for (index, &mv) in moves.iter().enumerate() {
        state = match (state, mv) {
            (ReplayState::Open(p), Move::Rot { split }) => {
                let q = rotate(&p, split, gamma)
                    .map_err(|_| ReplayError::MoveFailed { index, mv })?;
                ReplayState::Open(q)
            }
            (ReplayState::Open(p), Move::Rev) => ReplayState::Open(p.reversed()),
            (ReplayState::Open(p), Move::Ext { pair }) => {
                if pair as usize >= m.len() || !free.is_free(pair) {
                    return Err(ReplayError::PillarUnavailable { index, mv });
                }
                let q = apply_extension(&p, pair, gamma, m)
                    .ok_or(ReplayError::MoveFailed { index, mv })?;
                free.take(pair);
                ReplayState::Open(q)
            }
            (ReplayState::Open(p), Move::Close) => {
                let c = try_close(&p, gamma).ok_or(ReplayError::MoveFailed { index, mv })?;
                ReplayState::Closed(c)
            }
            (ReplayState::Closed(c), Move::CycleExt { cut, pair }) => {
                if pair as usize >= m.len() || !free.is_free(pair) {
                    return Err(ReplayError::PillarUnavailable { index, mv });
                }
                let q = apply_cycle_extension(&c, cut, pair, gamma, m)
                    .ok_or(ReplayError::MoveFailed { index, mv })?;
                free.take(pair);
                ReplayState::Open(q)
            }
            (_, mv) => return Err(ReplayError::WrongState { index, mv }),
        };
        let ok = match &state {
            ReplayState::Open(p) => validate(p, gamma, m, gadget.as_ref()),
            ReplayState::Closed(c) => {
                crate::twopath::validate_closed(c, gamma, m, gadget.as_ref())
            }
        };
        if !ok {
            return Err(ReplayError::InvalidPath { index, mv });
        }
    }
    let ReplayState::Closed(c) = state else {
        return Err(ReplayError::Incomplete);
    };
    if free.remaining() != 0 || c.path().len() != n {
        return Err(ReplayError::Incomplete);
    }
    let out = assemble_output(&c, n);
    if !verify_square_ham(gamma, &out.0, 2) {
        return Err(ReplayError::Incomplete);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::testkit::step_three_instance;

    fn empty_xs(n: usize) -> Vec<Graph> {
        let count = 3 + (n % 2);
        (0..count).map(|_| Graph::empty(n)).collect()
    }

    #[test]
    fn round_escapes_through_close_and_reopen() {
        for (used, cut) in [(3, 1), (5, 2), (7, 6)] {
            let inst = step_three_instance(used, cut);
            let pi1 = build_pi_graph(&inst.gamma, &inst.m);
            let pi2 = build_pi_graph(&inst.gamma, &inst.m);
            for mode in [EdgeMode::AllEdges, EdgeMode::Restricted] {
                let ctx = RoundCtx {
                    gamma: &inst.gamma,
                    pi1: &pi1,
                    pi2: &pi2,
                    m: &inst.m,
                    gadget: None,
                    mode,
                    cap: 1000,
                    debug_validate: true,
                };
                let (outcome, log) = run_round(&inst.path, &ctx, &inst.free, false);
                let RoundOutcome::Extended(q) = outcome else {
                    panic!("round should advance via close and reopen");
                };
                assert_eq!(
                    log.moves,
                    vec![
                        Move::Close,
                        Move::CycleExt {
                            cut: inst.cut,
                            pair: inst.pid
                        }
                    ]
                );
                assert_eq!(q.segs().len(), used + 1);
                assert!(validate(&q, &inst.gamma, &inst.m, None));
                assert!(!log.cap_hit);
            }
        }
    }

    #[test]
    fn splitmix_reference_value() {
        // First output of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220A8397B1DCDAF);
    }

    #[test]
    fn sub_seed_streams_are_distinct() {
        let a = sub_seed(42, SPRINKLE_STREAM);
        let b = sub_seed(42, MATCHING_STREAM);
        let c = sub_seed(42, HOST_STREAM);
        assert_ne!(a, b);
        assert_ne!(b, c);
        assert_ne!(a, c);
        assert_eq!(a, sub_seed(42, SPRINKLE_STREAM));
        assert_ne!(a, sub_seed(43, SPRINKLE_STREAM));
    }

    #[test]
    fn gadget_found_in_k5_and_k13() {
        let g5 = find_gadget(&Graph::complete(5)).unwrap();
        assert!(g5.holds_in(&Graph::complete(5)));
        let g13 = find_gadget(&Graph::complete(13)).unwrap();
        assert!(g13.holds_in(&Graph::complete(13)));
        assert_eq!((g13.c, g13.a, g13.b, g13.d, g13.e), (0, 1, 2, 3, 4));
    }

    #[test]
    fn gadget_on_exact_shape_only() {
        // Exactly the seven edges on five vertices: the scan must recover
        // a working labeling.
        let proto = Gadget { a: 1, b: 3, c: 2, d: 0, e: 4 };
        let mut b = GraphBuilder::new(5);
        for (u, v) in proto.edges() {
            b.add_edge(u, v);
        }
        let g = b.freeze();
        let found = find_gadget(&g).unwrap();
        assert!(found.holds_in(&g));
    }

    #[test]
    fn gadget_absent_in_triangle_free_graphs() {
        // A 5-cycle has no triangles, and the patch needs one.
        let mut b = GraphBuilder::new(5);
        for i in 0..5u32 {
            b.add_edge(i, (i + 1) % 5);
        }
        assert!(find_gadget(&b.freeze()).is_none());
        assert!(find_gadget(&Graph::empty(7)).is_none());
    }

    #[test]
    fn planted_even_complete_host() {
        let host = Graph::complete(12);
        let xs = empty_xs(12);
        let pairs: Vec<(VertexId, VertexId)> = (0..6).map(|i| (2 * i, 2 * i + 1)).collect();
        let m = Matching::from_pairs(12, &pairs).unwrap();
        let mut cfg = EraConfig::new(0.75, 1);
        cfg.debug_validate = true;
        let out = run_era_planted(&host, &xs, &m, None, &cfg);
        let w = out.result.expect("complete host always succeeds");
        assert!(verify_square_ham(&host, &w.0, 2));
        assert_eq!(out.rounds, 6);
        assert_eq!(out.trace.rounds.len(), 6);
    }

    #[test]
    fn planted_square_of_six_cycle() {
        // The squared 6-cycle with no boosters and the alternate-edge
        // matching: the search must find the cycle's own square.
        let mut b = GraphBuilder::new(6);
        for i in 0..6usize {
            for d in 1..=2usize {
                let j = (i + d) % 6;
                if i != j && !b.has_edge(i as VertexId, j as VertexId) {
                    b.add_edge(i as VertexId, j as VertexId);
                }
            }
        }
        let host = b.freeze();
        let m = Matching::from_pairs(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let mut cfg = EraConfig::new(0.75, 7);
        cfg.debug_validate = true;
        let out = run_era_planted(&host, &empty_xs(6), &m, None, &cfg);
        let w = out.result.expect("square of C6 contains its own witness");
        assert!(verify_square_ham(&host, &w.0, 2));
    }

    #[test]
    fn planted_odd_complete_host_uses_gadget() {
        let host = Graph::complete(13);
        let xs = empty_xs(13);
        let g5 = find_gadget(&host).unwrap();
        let pairs: Vec<(VertexId, VertexId)> =
            vec![(5, 6), (7, 8), (9, 10), (11, 12)];
        let m = Matching::from_pairs(13, &pairs).unwrap();
        let mut cfg = EraConfig::new(0.75, 3);
        cfg.debug_validate = true;
        let out = run_era_planted(&host, &xs, &m, Some(g5), &cfg);
        let w = out.result.expect("complete host always succeeds");
        assert!(verify_square_ham(&host, &w.0, 2));
        // The gadget run sits at the start of the assembled order.
        assert_eq!(&w.0[..5], &g5.run());
        assert_eq!(out.rounds, 5);
    }

    #[test]
    fn stuck_on_disconnected_host() {
        // Two disjoint complete halves: pillars of the far half can never
        // attach, so the trial must report a stuck round, not hang.
        let mut b = GraphBuilder::new(12);
        for base in [0u32, 6] {
            for u in 0..6 {
                for v in (u + 1)..6 {
                    b.add_edge(base + u, base + v);
                }
            }
        }
        let host = b.freeze();
        let pairs: Vec<(VertexId, VertexId)> = (0..6).map(|i| (2 * i, 2 * i + 1)).collect();
        let m = Matching::from_pairs(12, &pairs).unwrap();
        let cfg = EraConfig::new(0.75, 5);
        let out = run_era_planted(&host, &empty_xs(12), &m, None, &cfg);
        assert_eq!(out.result.unwrap_err(), FailureReason::StuckRound);
        assert_eq!(out.rounds, 3);
    }

    #[test]
    fn full_pipeline_on_complete_hosts() {
        for n in [12usize, 13] {
            for seed in 0..5u64 {
                let host = Graph::complete(n);
                let mut cfg = EraConfig::new(0.75, seed);
                cfg.debug_validate = true;
                let out = run_era(&host, 3.5, &cfg).unwrap();
                match out.result {
                    Ok(w) => assert_eq!(w.0.len(), n),
                    Err(e) => panic!("n={n} seed={seed}: {e}"),
                }
            }
        }
    }

    #[test]
    fn all_edges_mode_runs() {
        let host = Graph::complete(12);
        let mut cfg = EraConfig::new(0.75, 11);
        cfg.mode = EdgeMode::AllEdges;
        let out = run_era(&host, 3.5, &cfg).unwrap();
        assert!(out.result.is_ok());
    }

    #[test]
    fn identical_seed_identical_outcome() {
        let host = Graph::complete(12);
        let cfg = EraConfig::new(0.75, 9);
        let a = run_era(&host, 3.5, &cfg).unwrap();
        let b = run_era(&host, 3.5, &cfg).unwrap();
        assert_eq!(a.result.as_ref().unwrap(), b.result.as_ref().unwrap());
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.rounds, b.rounds);
    }

    #[test]
    fn matching_failure_reported() {
        // Empty first booster on an even order: no matching can exist.
        let host = Graph::complete(8);
        let xs = vec![Graph::empty(8), Graph::empty(8), Graph::empty(8)];
        let cfg = EraConfig::new(0.75, 1);
        let out = run_era_with(&host, &xs, &cfg);
        assert_eq!(out.result.unwrap_err(), FailureReason::Matching);
    }

    #[test]
    fn gadget_failure_reported() {
        // Odd order, triangle-free full union: no gadget anywhere.
        let mut b = GraphBuilder::new(9);
        for i in 0..9u32 {
            b.add_edge(i, (i + 1) % 9);
        }
        let host = b.freeze();
        let xs = empty_xs(9);
        let cfg = EraConfig::new(0.75, 1);
        let out = run_era_with(&host, &xs, &cfg);
        assert_eq!(out.result.unwrap_err(), FailureReason::Gadget);
    }

    #[test]
    fn zero_cap_still_extends_on_complete_host() {
        let host = Graph::complete(12);
        let mut cfg = EraConfig::new(0.75, 2);
        cfg.max_rotations_per_round = Some(0);
        let out = run_era(&host, 3.5, &cfg).unwrap();
        assert!(out.result.is_ok());
        // Every round extended straight off the input path: no rotations,
        // and the cap was never the binding constraint.
        for r in &out.trace.rounds {
            assert_eq!(r.rotations, 0);
            assert!(!r.cap_hit);
        }
    }

    #[test]
    fn trace_round_trip() {
        let trace = EraTrace {
            rounds: vec![
                RoundLog {
                    rotations: 0,
                    pool_size: 1,
                    cap_hit: false,
                    moves: vec![Move::Ext { pair: 4 }],
                },
                RoundLog {
                    rotations: 7,
                    pool_size: 13,
                    cap_hit: true,
                    moves: vec![
                        Move::Rot { split: 2 },
                        Move::Rev,
                        Move::Rot { split: 5 },
                        Move::Close,
                        Move::CycleExt { cut: 1, pair: 9 },
                    ],
                },
            ],
        };
        let mut buf = Vec::new();
        trace
            .write(&mut buf, &[("n", "12".into()), ("seed", "9".into())])
            .unwrap();
        let back = EraTrace::parse(buf.as_slice()).unwrap();
        assert_eq!(trace, back);
        assert_eq!(trace.flat_moves().len(), 6);
    }

    #[test]
    fn replay_reproduces_run() {
        for n in [12usize, 13] {
            let host = Graph::complete(n);
            let cfg = EraConfig::new(0.75, 17);
            let xs = sample_trial_sprinkles(n, 3.5, cfg.seed).unwrap();
            let out = run_era_with(&host, &xs, &cfg);
            let w = out.result.expect("complete host succeeds");
            let moves = out.trace.flat_moves();
            let replayed = replay_era(&host, &xs, &cfg, &moves).unwrap();
            assert_eq!(w, replayed);
        }
    }

    #[test]
    fn replay_rejects_corrupted_transcripts() {
        let host = Graph::complete(12);
        let cfg = EraConfig::new(0.75, 23);
        let xs = sample_trial_sprinkles(12, 3.5, cfg.seed).unwrap();
        let out = run_era_with(&host, &xs, &cfg);
        let moves = out.trace.flat_moves();
        assert!(out.result.is_ok());
        // Truncated: no closed cycle at the end.
        let err = replay_era(&host, &xs, &cfg, &moves[..moves.len() - 1]).unwrap_err();
        assert!(matches!(err, ReplayError::Incomplete));
        // Same pillar twice.
        let mut dup = moves.clone();
        if let Some(first_ext) = moves.iter().find(|m| matches!(m, Move::Ext { .. })) {
            dup.insert(0, *first_ext);
            let err = replay_era(&host, &xs, &cfg, &dup).unwrap_err();
            assert!(matches!(
                err,
                ReplayError::PillarUnavailable { .. } | ReplayError::MoveFailed { .. }
            ));
        }
        // A cycle extension before any closing is a state error.
        let mut wrong = vec![Move::CycleExt { cut: 1, pair: 1 }];
        wrong.extend_from_slice(&moves);
        let err = replay_era(&host, &xs, &cfg, &wrong).unwrap_err();
        assert!(matches!(err, ReplayError::WrongState { .. }));
    }

    #[test]
    fn mode_text_round_trip() {
        for mode in [EdgeMode::Restricted, EdgeMode::AllEdges] {
            let s = mode.to_string();
            assert_eq!(s.parse::<EdgeMode>().unwrap(), mode);
        }
        assert!("full".parse::<EdgeMode>().is_err());
    }

    #[test]
    fn failure_reason_text_round_trip() {
        for r in [
            FailureReason::Matching,
            FailureReason::Gadget,
            FailureReason::StuckRound,
        ] {
            assert_eq!(r.to_string().parse::<FailureReason>().unwrap(), r);
        }
    }
}
