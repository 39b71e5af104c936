//! Exact search for small directed tile sets assembling a pattern.
//!
//! Cells are processed row-major. A cell's inputs come from the seed or its
//! neighbors; an input pair either selects an existing tile (whose color
//! must match) or forces a new tile of the cell's color. New output glues
//! and seed glues range over the glues introduced so far plus one fresh
//! glue, numbered in order of introduction, so tile sets are enumerated up
//! to glue renaming.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;

use crate::assembly::verify_stream;
use crate::model::{Color, HGlue, Seed, TileSet, TileType, VGlue};
use crate::pattern::{DensePattern, Pattern};

/// Patterns larger than this are refused with `BudgetExceeded`.
pub const AREA_GUARD: usize = 4096;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_total_tiles: Option<usize>,
    /// Colors missing from the map are unbounded.
    pub per_color_bounds: BTreeMap<Color, usize>,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl SearchBudget {
    pub fn total(m: usize) -> Self {
        SearchBudget {
            max_total_tiles: Some(m),
            ..Self::default()
        }
    }

    pub fn per_color(bounds: impl IntoIterator<Item = (Color, usize)>) -> Self {
        SearchBudget {
            per_color_bounds: bounds.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn with_node_limit(mut self, nodes: u64) -> Self {
        self.node_limit = Some(nodes);
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn has_bound(&self) -> bool {
        self.max_total_tiles.is_some()
            || !self.per_color_bounds.is_empty()
            || self.node_limit.is_some()
            || self.time_limit.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Found(TileSet),
    Infeasible,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub status: Status,
    pub nodes_explored: u64,
}

impl SearchResult {
    pub fn found(&self) -> Option<&TileSet> {
        match &self.status {
            Status::Found(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flow {
    Found,
    Exhausted,
    Budget,
}

#[derive(Clone, Copy, Debug)]
enum Branch {
    North(usize),
    East(usize),
    NewTile,
}

const UNSET: u32 = u32::MAX;

/// Counters shared by parallel workers.
struct Shared {
    stop: AtomicBool,
    nodes: AtomicU64,
}

#[derive(Clone)]
struct Search<'a> {
    w: usize,
    colors: &'a [u32],
    /// Distinct colors at positions `>= pos`, per position.
    suffix: &'a [Vec<u32>],
    color_bound: &'a [usize],
    total_bound: usize,
    node_limit: u64,
    deadline: Option<Instant>,

    tiles: Vec<[u32; 5]>,
    lookup: FxHashMap<u64, u32>,
    per_color: Vec<usize>,
    h_count: u32,
    v_count: u32,
    north: Vec<u32>,
    east: Vec<u32>,
    grid: Vec<u32>,
    nodes: u64,
}

fn key(s: u32, w: u32) -> u64 {
    (u64::from(s) << 32) | u64::from(w)
}

enum Advance {
    Found,
    Dead,
    Branch(usize, Branch),
}

impl Search<'_> {
    /// Fills forced cells from `pos` on and stops at the next choice.
    fn advance(&mut self, mut pos: usize) -> Advance {
        while pos < self.colors.len() {
            let (x, y) = (pos % self.w, pos / self.w);
            let s = if y == 0 {
                self.north[x]
            } else {
                self.tiles[self.grid[pos - self.w] as usize][1]
            };
            if s == UNSET {
                return Advance::Branch(pos, Branch::North(x));
            }
            let w = if x == 0 {
                self.east[y]
            } else {
                self.tiles[self.grid[pos - 1] as usize][2]
            };
            if w == UNSET {
                return Advance::Branch(pos, Branch::East(y));
            }
            match self.lookup.get(&key(s, w)) {
                Some(&t) if self.tiles[t as usize][0] == self.colors[pos] => {
                    self.grid[pos] = t;
                    pos += 1;
                }
                Some(_) => return Advance::Dead,
                None => return Advance::Branch(pos, Branch::NewTile),
            }
        }
        Advance::Found
    }

    /// Whether a new tile may be created at `pos`.
    fn room_for_tile(&self, pos: usize) -> bool {
        let c = self.colors[pos] as usize;
        if self.per_color[c] >= self.color_bound[c] || self.tiles.len() >= self.total_bound {
            return false;
        }
        let later_missing = self.suffix.get(pos + 1).map_or(0, |cs| {
            cs.iter()
                .filter(|&&d| d as usize != c && self.per_color[d as usize] == 0)
                .count()
        });
        self.tiles.len() + 1 + later_missing <= self.total_bound
    }

    fn choices(&self, pos: usize, branch: Branch) -> Vec<(u32, u32)> {
        match branch {
            Branch::North(_) => (0..=self.h_count).map(|g| (g, 0)).collect(),
            Branch::East(_) => (0..=self.v_count).map(|g| (g, 0)).collect(),
            Branch::NewTile if !self.room_for_tile(pos) => Vec::new(),
            Branch::NewTile => (0..=self.h_count)
                .flat_map(|n| (0..=self.v_count).map(move |e| (n, e)))
                .collect(),
        }
    }

    /// Applies a choice; returns the glue counts to restore.
    fn apply(&mut self, pos: usize, branch: Branch, (a, b): (u32, u32)) -> (u32, u32) {
        let saved = (self.h_count, self.v_count);
        match branch {
            Branch::North(x) => {
                self.north[x] = a;
                self.h_count = self.h_count.max(a + 1);
            }
            Branch::East(y) => {
                self.east[y] = a;
                self.v_count = self.v_count.max(a + 1);
            }
            Branch::NewTile => {
                let (x, y) = (pos % self.w, pos / self.w);
                let s = if y == 0 {
                    self.north[x]
                } else {
                    self.tiles[self.grid[pos - self.w] as usize][1]
                };
                let w = if x == 0 {
                    self.east[y]
                } else {
                    self.tiles[self.grid[pos - 1] as usize][2]
                };
                let c = self.colors[pos];
                self.lookup.insert(key(s, w), self.tiles.len() as u32);
                self.tiles.push([c, a, b, s, w]);
                self.per_color[c as usize] += 1;
                self.h_count = self.h_count.max(a + 1);
                self.v_count = self.v_count.max(b + 1);
            }
        }
        saved
    }

    fn revert(&mut self, branch: Branch, saved: (u32, u32)) {
        match branch {
            Branch::North(x) => self.north[x] = UNSET,
            Branch::East(y) => self.east[y] = UNSET,
            Branch::NewTile => {
                let [c, _, _, s, w] = self.tiles.pop().expect("tile to revert");
                self.lookup.remove(&key(s, w));
                self.per_color[c as usize] -= 1;
            }
        }
        (self.h_count, self.v_count) = saved;
    }

    fn over_budget(&mut self, shared: Option<&Shared>) -> bool {
        self.nodes += 1;
        let total = match shared {
            Some(sh) => {
                if sh.stop.load(Ordering::Relaxed) {
                    return true;
                }
                sh.nodes.fetch_add(1, Ordering::Relaxed) + 1
            }
            None => self.nodes,
        };
        if total > self.node_limit {
            return true;
        }
        total % 1024 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn dfs(&mut self, pos: usize, shared: Option<&Shared>) -> Flow {
        let (pos, branch) = match self.advance(pos) {
            Advance::Found => return Flow::Found,
            Advance::Dead => return Flow::Exhausted,
            Advance::Branch(p, b) => (p, b),
        };
        for choice in self.choices(pos, branch) {
            if self.over_budget(shared) {
                return Flow::Budget;
            }
            let saved = self.apply(pos, branch, choice);
            match self.dfs(pos, shared) {
                Flow::Exhausted => self.revert(branch, saved),
                done => return done,
            }
        }
        Flow::Exhausted
    }

    fn tileset(&self, palette: &[Color]) -> TileSet {
        let h = |g: u32| HGlue::new(format!("h{g}"));
        let v = |g: u32| VGlue::new(format!("v{g}"));
        let tiles = self.tiles.iter().map(|&[c, n, e, s, w]| TileType {
            color: palette[c as usize].clone(),
            n: h(n),
            e: v(e),
            s: h(s),
            w: v(w),
        });
        let seed = Seed::new(
            self.north.iter().map(|&g| h(g)).collect(),
            self.east.iter().map(|&g| v(g)).collect(),
        );
        TileSet::new(tiles.collect::<Vec<_>>(), seed)
    }
}

/// Immutable per-instance data borrowed by every search state.
struct Problem {
    dense: DensePattern,
    colors: Vec<u32>,
    suffix: Vec<Vec<u32>>,
    color_bound: Vec<usize>,
    total_bound: usize,
    node_limit: u64,
    deadline: Option<Instant>,
}

impl Problem {
    fn new(p: &dyn Pattern, budget: &SearchBudget) -> Self {
        let dense = DensePattern::from_pattern(p);
        let (w, h) = (dense.width(), dense.height());
        let colors: Vec<u32> = (1..=h)
            .flat_map(|y| (1..=w).map(move |x| (x, y)))
            .map(|(x, y)| dense.color_index(x, y))
            .collect();
        let k = dense.palette().len();
        let mut suffix = vec![Vec::new(); colors.len()];
        let mut seen = vec![false; k];
        let mut acc = Vec::new();
        for pos in (0..colors.len()).rev() {
            let c = colors[pos];
            if !seen[c as usize] {
                seen[c as usize] = true;
                acc.push(c);
            }
            suffix[pos] = acc.clone();
        }
        let color_bound = dense
            .palette()
            .iter()
            .map(|c| {
                budget
                    .per_color_bounds
                    .get(c)
                    .copied()
                    .unwrap_or(usize::MAX)
            })
            .collect();
        Problem {
            total_bound: budget.max_total_tiles.unwrap_or(colors.len()),
            node_limit: budget.node_limit.unwrap_or(u64::MAX),
            deadline: budget.time_limit.map(|d| Instant::now() + d),
            dense,
            colors,
            suffix,
            color_bound,
        }
    }

    fn root(&self) -> Search<'_> {
        let (w, h) = (self.dense.width(), self.dense.height());
        Search {
            w,
            colors: &self.colors,
            suffix: &self.suffix,
            color_bound: &self.color_bound,
            total_bound: self.total_bound,
            node_limit: self.node_limit,
            deadline: self.deadline,
            tiles: Vec::new(),
            lookup: FxHashMap::default(),
            per_color: vec![0; self.dense.palette().len()],
            h_count: 0,
            v_count: 0,
            north: vec![UNSET; w],
            east: vec![UNSET; h],
            grid: vec![0; self.colors.len()],
            nodes: 0,
        }
    }

    fn finish(&self, state: &Search<'_>) -> TileSet {
        let ts = state.tileset(self.dense.palette());
        assert_eq!(
            verify_stream(&ts, &self.dense),
            Ok(()),
            "search produced a tile set that does not assemble the pattern"
        );
        ts
    }
}

fn guarded(p: &dyn Pattern) -> Option<SearchResult> {
    (p.area() > AREA_GUARD as u64).then_some(SearchResult {
        status: Status::BudgetExceeded,
        nodes_explored: 0,
    })
}

/// Searches for a directed tile set within `budget` that assembles `p`.
/// Without a tile bound the search is capped at one tile per cell. The
/// first witness in canonical order is returned.
pub fn solve_exact(p: &dyn Pattern, budget: &SearchBudget) -> SearchResult {
    if let Some(r) = guarded(p) {
        return r;
    }
    let problem = Problem::new(p, budget);
    let mut state = problem.root();
    let flow = state.dfs(0, None);
    SearchResult {
        status: match flow {
            Flow::Found => Status::Found(problem.finish(&state)),
            Flow::Exhausted => Status::Infeasible,
            Flow::Budget => Status::BudgetExceeded,
        },
        nodes_explored: state.nodes,
    }
}

/// Like [`solve_exact`] but explores branches on all threads and returns
/// whichever witness is found first. Only the status is deterministic.
pub fn solve_any(p: &dyn Pattern, budget: &SearchBudget) -> SearchResult {
    if let Some(r) = guarded(p) {
        return r;
    }
    let problem = Problem::new(p, budget);
    #[cfg(feature = "parallel")]
    let target = 8 * rayon::current_num_threads();
    #[cfg(not(feature = "parallel"))]
    let target = 1;
    // Expand the search tree breadth-first into independent subproblems.
    let mut frontier = vec![(problem.root(), 0usize)];
    let mut leaves = Vec::new();
    let mut expansions = 0u64;
    while !frontier.is_empty() && frontier.len() + leaves.len() < target {
        let mut next = Vec::new();
        for (mut state, pos) in frontier {
            match state.advance(pos) {
                Advance::Found => {
                    let ts = problem.finish(&state);
                    return SearchResult {
                        status: Status::Found(ts),
                        nodes_explored: expansions,
                    };
                }
                Advance::Dead => {}
                Advance::Branch(p, b) => {
                    for choice in state.choices(p, b) {
                        expansions += 1;
                        let mut child = state.clone();
                        child.apply(p, b, choice);
                        next.push((child, p));
                    }
                }
            }
        }
        frontier = next;
        if expansions > problem.node_limit {
            return SearchResult {
                status: Status::BudgetExceeded,
                nodes_explored: expansions,
            };
        }
    }
    leaves.extend(frontier);
    if leaves.is_empty() {
        return SearchResult {
            status: Status::Infeasible,
            nodes_explored: expansions,
        };
    }
    let shared = Shared {
        stop: AtomicBool::new(false),
        nodes: AtomicU64::new(expansions),
    };
    let run = |(mut state, pos): (Search<'_>, usize)| {
        let flow = state.dfs(pos, Some(&shared));
        let found = (flow == Flow::Found).then(|| {
            shared.stop.store(true, Ordering::Relaxed);
            problem.finish(&state)
        });
        (flow, found)
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<(Flow, Option<TileSet>)> = {
        use rayon::prelude::*;
        leaves.into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<(Flow, Option<TileSet>)> = leaves.into_iter().map(run).collect();
    let nodes_explored = shared.nodes.load(Ordering::Relaxed);
    let mut status = Status::Infeasible;
    for (flow, found) in outcomes {
        match (flow, found) {
            (_, Some(ts)) => {
                status = Status::Found(ts);
                break;
            }
            // Workers stopped early by a sibling's success also report Budget.
            (Flow::Budget, _) => status = Status::BudgetExceeded,
            _ => {}
        }
    }
    SearchResult {
        status,
        nodes_explored,
    }
}

/// Solves with per-color bounds; `limits` may add node or time limits.
pub fn solve_mbpats(
    p: &dyn Pattern,
    per_color_bounds: impl IntoIterator<Item = (Color, usize)>,
    limits: &SearchBudget,
) -> SearchResult {
    let mut budget = limits.clone();
    budget.per_color_bounds.extend(per_color_bounds);
    solve_exact(p, &budget)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("search budget exhausted while testing {tiles} tile types ({nodes} nodes)")]
pub struct BudgetExceeded {
    pub tiles: usize,
    pub nodes: u64,
}

/// Smallest tile count that assembles `p`, found by iterative deepening
/// from the number of colors up to `cap`. `limits` applies per step.
pub fn minimize(
    p: &dyn Pattern,
    cap: Option<usize>,
    limits: &SearchBudget,
) -> Result<(usize, TileSet), BudgetExceeded> {
    let k = crate::pattern::color_census(p).num_colors();
    let cap = cap.unwrap_or(p.area() as usize);
    let mut nodes = 0;
    for m in k..=cap {
        let mut budget = limits.clone();
        budget.max_total_tiles = Some(m);
        let r = solve_exact(p, &budget);
        nodes += r.nodes_explored;
        match r.status {
            Status::Found(ts) => return Ok((m, ts)),
            Status::Infeasible => {}
            Status::BudgetExceeded => return Err(BudgetExceeded { tiles: m, nodes }),
        }
    }
    Err(BudgetExceeded { tiles: cap, nodes })
}
