//! Deterministic rectilinear assembly and streaming verification.
//!
//! A directed tile set has at most one tile per input pair, so assembly is a
//! single row-major sweep. Verification keeps one row of north glues and
//! never materializes the assignment, so memory is O(width).

use std::ops::Range;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::model::{Color, HGlue, Seed, TileSet, TileType, VGlue};
use crate::pattern::{DensePattern, Pattern};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("tile set is not directed")]
    NotDirected,
    #[error("seed covers {seed_width}x{seed_height} but the target is {width}x{height}")]
    SeedMismatch {
        seed_width: usize,
        seed_height: usize,
        width: usize,
        height: usize,
    },
    #[error("no tile fits at ({x},{y}): need S={s} W={w}")]
    NoTileFits {
        x: usize,
        y: usize,
        s: HGlue,
        w: VGlue,
    },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("color mismatch at ({x},{y}): pattern has {expected}, tile has {got}")]
    ColorMismatch {
        x: usize,
        y: usize,
        expected: Color,
        got: Color,
    },
}

impl VerifyError {
    /// The failing cell, if the error has one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            VerifyError::ColorMismatch { x, y, .. }
            | VerifyError::Assembly(AssemblyError::NoTileFits { x, y, .. }) => Some((*x, *y)),
            _ => None,
        }
    }
}

const NONE: u32 = u32::MAX;

#[inline]
fn key(s: u32, w: u32) -> u64 {
    (u64::from(s) << 32) | u64::from(w)
}

struct Interner<'a> {
    ids: FxHashMap<&'a str, u32>,
    names: Vec<&'a str>,
}

impl<'a> Interner<'a> {
    fn new() -> Self {
        Interner {
            ids: FxHashMap::default(),
            names: Vec::new(),
        }
    }

    fn intern(&mut self, s: &'a str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s);
        self.ids.insert(s, id);
        id
    }
}

/// A directed tile set with glues interned to integers.
pub struct CompiledTileSet<'a> {
    ts: &'a TileSet,
    h_names: Vec<&'a str>,
    v_names: Vec<&'a str>,
    lookup: FxHashMap<u64, u32>,
    n_out: Vec<u32>,
    e_out: Vec<u32>,
    seed_n: Vec<u32>,
    seed_e: Vec<u32>,
}

/// A cell where the sweep stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Failure {
    x: usize,
    y: usize,
    kind: FailureKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FailureKind {
    NoTile { s: u32, w: u32 },
    Mismatch { tile: u32, expected: u32 },
}

impl<'a> CompiledTileSet<'a> {
    pub fn new(ts: &'a TileSet) -> Result<Self, AssemblyError> {
        if !ts.is_directed() {
            return Err(AssemblyError::NotDirected);
        }
        let mut h = Interner::new();
        let mut v = Interner::new();
        let mut lookup = FxHashMap::default();
        let mut n_out = Vec::with_capacity(ts.len());
        let mut e_out = Vec::with_capacity(ts.len());
        for (i, t) in ts.tiles().iter().enumerate() {
            let s = h.intern(t.s.as_str());
            let w = v.intern(t.w.as_str());
            lookup.insert(key(s, w), i as u32);
            n_out.push(h.intern(t.n.as_str()));
            e_out.push(v.intern(t.e.as_str()));
        }
        let seed_n = ts.seed.north.iter().map(|g| h.intern(g.as_str())).collect();
        let seed_e = ts.seed.east.iter().map(|g| v.intern(g.as_str())).collect();
        Ok(CompiledTileSet {
            ts,
            h_names: h.names,
            v_names: v.names,
            lookup,
            n_out,
            e_out,
            seed_n,
            seed_e,
        })
    }

    pub fn tileset(&self) -> &'a TileSet {
        self.ts
    }

    pub fn tile(&self, idx: u32) -> &'a TileType {
        &self.ts.tiles()[idx as usize]
    }

    fn check_seed(&self, width: usize, height: usize) -> Result<(), AssemblyError> {
        if self.seed_n.len() != width || self.seed_e.len() != height {
            return Err(AssemblyError::SeedMismatch {
                seed_width: self.seed_n.len(),
                seed_height: self.seed_e.len(),
                width,
                height,
            });
        }
        Ok(())
    }

    fn no_tile(&self, x: usize, y: usize, s: u32, w: u32) -> AssemblyError {
        AssemblyError::NoTileFits {
            x,
            y,
            s: HGlue::new(self.h_names[s as usize]),
            w: VGlue::new(self.v_names[w as usize]),
        }
    }

    /// Streams the assembly row by row, handing each row's tile indices to
    /// `on_row`. Only one row is held in memory.
    pub fn stream_tiles<E>(
        &self,
        width: usize,
        height: usize,
        mut on_row: impl FnMut(usize, &[u32]) -> Result<(), E>,
    ) -> Result<(), E>
    where
        E: From<AssemblyError>,
    {
        self.check_seed(width, height)?;
        let mut row = vec![NONE; width];
        let mut last = (u64::MAX, NONE);
        for y in 1..=height {
            let mut w_in = self.seed_e[y - 1];
            for (x, slot) in row.iter_mut().enumerate() {
                let s_in = if y == 1 {
                    self.seed_n[x]
                } else {
                    self.n_out[*slot as usize]
                };
                let k = key(s_in, w_in);
                let t = if k == last.0 {
                    last.1
                } else {
                    match self.lookup.get(&k) {
                        Some(&t) => {
                            last = (k, t);
                            t
                        }
                        None => return Err(self.no_tile(x + 1, y, s_in, w_in).into()),
                    }
                };
                *slot = t;
                w_in = self.e_out[t as usize];
            }
            on_row(y, &row)?;
        }
        Ok(())
    }

    /// Palette index (in `p`) of each tile's color, or `NONE`.
    fn tile_colors(&self, p: &dyn Pattern) -> Vec<u32> {
        let index: FxHashMap<&Color, u32> = p
            .palette()
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i as u32))
            .collect();
        self.ts
            .tiles()
            .iter()
            .map(|t| index.get(&t.color).copied().unwrap_or(NONE))
            .collect()
    }

    /// Sweeps one row of the columns `xs`. `glues` holds the incoming south
    /// glues and is overwritten with the north outputs. Returns the east
    /// output of the last column.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    fn verify_row(
        &self,
        y: usize,
        xs: Range<usize>,
        glues: &mut [u32],
        pattern_row: &[u32],
        tile_color: &[u32],
        mut w_in: u32,
        last: &mut (u64, u32),
    ) -> Result<u32, Failure> {
        let x0 = xs.start;
        for (i, (g, &expected)) in glues.iter_mut().zip(pattern_row).enumerate() {
            let k = key(*g, w_in);
            let t = if k == last.0 {
                last.1
            } else {
                match self.lookup.get(&k) {
                    Some(&t) => {
                        *last = (k, t);
                        t
                    }
                    None => {
                        return Err(Failure {
                            x: x0 + i,
                            y,
                            kind: FailureKind::NoTile { s: *g, w: w_in },
                        })
                    }
                }
            };
            if tile_color[t as usize] != expected {
                return Err(Failure {
                    x: x0 + i,
                    y,
                    kind: FailureKind::Mismatch { tile: t, expected },
                });
            }
            *g = self.n_out[t as usize];
            w_in = self.e_out[t as usize];
        }
        Ok(w_in)
    }

    fn failure_to_error(&self, f: Failure, p: &dyn Pattern) -> VerifyError {
        match f.kind {
            FailureKind::NoTile { s, w } => self.no_tile(f.x, f.y, s, w).into(),
            FailureKind::Mismatch { tile, expected } => VerifyError::ColorMismatch {
                x: f.x,
                y: f.y,
                expected: p.palette()[expected as usize].clone(),
                got: self.tile(tile).color.clone(),
            },
        }
    }

    /// Sequential streaming verification.
    pub fn verify_stream(&self, p: &dyn Pattern) -> Result<(), VerifyError> {
        let (w, h) = (p.width(), p.height());
        self.check_seed(w, h)?;
        let tile_color = self.tile_colors(p);
        let mut glues = self.seed_n.clone();
        let mut prow = vec![0u32; w];
        let mut last = (u64::MAX, NONE);
        for y in 1..=h {
            p.fill_row(y, 1, &mut prow);
            self.verify_row(
                y,
                1..w + 1,
                &mut glues,
                &prow,
                &tile_color,
                self.seed_e[y - 1],
                &mut last,
            )
            .map_err(|f| self.failure_to_error(f, p))?;
        }
        Ok(())
    }

    /// Pipelined verification over vertical strips, one thread per strip.
    ///
    /// Strip `i` consumes the east outputs of strip `i-1` in chunks of rows,
    /// so the row dependency is respected while strips overlap in time. The
    /// reported error is the row-major first failure, identical to
    /// [`CompiledTileSet::verify_stream`].
    pub fn verify_stream_pipelined(
        &self,
        p: &dyn Pattern,
        strips: usize,
    ) -> Result<(), VerifyError> {
        use std::sync::atomic::{AtomicUsize, Ordering};
        use std::sync::mpsc;

        const CHUNK: usize = 256;
        let (w, h) = (p.width(), p.height());
        let strips = strips.clamp(1, w.max(1));
        if strips == 1 {
            return self.verify_stream(p);
        }
        self.check_seed(w, h)?;
        let tile_color = self.tile_colors(p);
        let bounds: Vec<Range<usize>> = (0..strips)
            .map(|i| (1 + i * w / strips)..(1 + (i + 1) * w / strips))
            .collect();
        // Row of the earliest failure seen so far; rows after it are moot.
        let fail_row = AtomicUsize::new(usize::MAX);

        let mut failures: Vec<Option<Failure>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            let mut upstream: Option<mpsc::Receiver<Vec<u32>>> = None;
            for (i, xs) in bounds.iter().cloned().enumerate() {
                let (tx, rx) = if i + 1 < strips {
                    let (tx, rx) = mpsc::sync_channel::<Vec<u32>>(8);
                    (Some(tx), Some(rx))
                } else {
                    (None, None)
                };
                let input = upstream.take();
                upstream = rx;
                let tile_color = &tile_color;
                let fail_row = &fail_row;
                handles.push(scope.spawn(move || -> Option<Failure> {
                    let mut glues: Vec<u32> = self.seed_n[xs.start - 1..xs.end - 1].to_vec();
                    let mut prow = vec![0u32; xs.len()];
                    let mut last = (u64::MAX, NONE);
                    let mut y = 1;
                    while y <= h {
                        let rows = CHUNK.min(h - y + 1);
                        let west: Vec<u32> = match &input {
                            None => self.seed_e[y - 1..y - 1 + rows].to_vec(),
                            Some(rx) => match rx.recv() {
                                Ok(v) => v,
                                Err(_) => return None,
                            },
                        };
                        let mut east = Vec::with_capacity(west.len());
                        for (r, &w_in) in west.iter().enumerate() {
                            let yy = y + r;
                            if yy > fail_row.load(Ordering::Relaxed) {
                                break;
                            }
                            p.fill_row(yy, xs.start, &mut prow);
                            match self.verify_row(
                                yy,
                                xs.clone(),
                                &mut glues,
                                &prow,
                                tile_color,
                                w_in,
                                &mut last,
                            ) {
                                Ok(e) => east.push(e),
                                Err(f) => {
                                    fail_row.fetch_min(yy, Ordering::Relaxed);
                                    if let Some(tx) = &tx {
                                        let _ = tx.send(east);
                                    }
                                    return Some(f);
                                }
                            }
                        }
                        let short = east.len() < west.len();
                        if let Some(tx) = &tx {
                            if tx.send(east).is_err() {
                                return None;
                            }
                        }
                        if short || west.len() < rows {
                            return None;
                        }
                        y += rows;
                    }
                    None
                }));
            }
            failures = handles
                .into_iter()
                .map(|h| h.join().expect("verification worker panicked"))
                .collect();
        });
        match failures.into_iter().flatten().min_by_key(|f| (f.y, f.x)) {
            Some(f) => Err(self.failure_to_error(f, p)),
            None => Ok(()),
        }
    }
}

/// A complete tile assignment referring to the tile types of `tileset`.
#[derive(Clone)]
pub struct Assignment<'a> {
    tileset: &'a TileSet,
    width: usize,
    height: usize,
    /// Row-major from (1,1).
    at: Vec<u32>,
}

impl<'a> Assignment<'a> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tileset(&self) -> &'a TileSet {
        self.tileset
    }

    pub fn index_at(&self, x: usize, y: usize) -> usize {
        self.at[(y - 1) * self.width + x - 1] as usize
    }

    pub fn at(&self, x: usize, y: usize) -> &'a TileType {
        &self.tileset.tiles()[self.index_at(x, y)]
    }

    /// Glue matching holds at every cell, with seed glues on the boundary.
    pub fn is_consistent(&self) -> bool {
        let seed = &self.tileset.seed;
        (1..=self.height).all(|y| {
            (1..=self.width).all(|x| {
                let t = self.at(x, y);
                let w_ok = if x == 1 {
                    seed.east.get(y - 1) == Some(&t.w)
                } else {
                    self.at(x - 1, y).e == t.w
                };
                let s_ok = if y == 1 {
                    seed.north.get(x - 1) == Some(&t.s)
                } else {
                    self.at(x, y - 1).n == t.s
                };
                w_ok && s_ok
            })
        })
    }

    /// Tile types used at least once.
    pub fn used_tiles(&self) -> Vec<&'a TileType> {
        let mut used = vec![false; self.tileset.len()];
        for &i in &self.at {
            used[i as usize] = true;
        }
        self.tileset
            .tiles()
            .iter()
            .zip(used)
            .filter_map(|(t, u)| u.then_some(t))
            .collect()
    }
}

impl std::fmt::Debug for Assignment<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Assignment {}x{} over {} tiles",
            self.width,
            self.height,
            self.tileset.len()
        )
    }
}

/// Runs the deterministic row-major assembly of a directed tile set.
pub fn assemble(
    ts: &TileSet,
    width: usize,
    height: usize,
) -> Result<Assignment<'_>, AssemblyError> {
    let compiled = CompiledTileSet::new(ts)?;
    let mut at = Vec::with_capacity(width * height);
    compiled.stream_tiles::<AssemblyError>(width, height, |_, row| {
        at.extend_from_slice(row);
        Ok(())
    })?;
    Ok(Assignment {
        tileset: ts,
        width,
        height,
        at,
    })
}

/// The pattern an assignment portrays.
pub fn pattern_of(a: &Assignment<'_>) -> DensePattern {
    DensePattern::from_fn(a.width, a.height, |x, y| a.at(x, y).color.clone())
}

/// One tile per cell with glues named after the cell, so it assembles `p`
/// trivially. Every glue is used at exactly one edge.
pub fn cell_tileset(p: &dyn Pattern) -> TileSet {
    let (w, h) = (p.width(), p.height());
    let hg = |x: usize, y: usize| HGlue::new(format!("n{x}_{y}"));
    let vg = |x: usize, y: usize| VGlue::new(format!("e{x}_{y}"));
    let tiles = (1..=h).flat_map(|y| {
        (1..=w).map(move |x| TileType {
            color: p.cell(x, y).clone(),
            n: hg(x, y),
            e: vg(x, y),
            s: hg(x, y - 1),
            w: vg(x - 1, y),
        })
    });
    let seed = Seed::new(
        (1..=w).map(|x| hg(x, 0)).collect(),
        (1..=h).map(|y| vg(0, y)).collect(),
    );
    TileSet::new(tiles.collect::<Vec<_>>(), seed)
}

/// Verifies that `ts` assembles exactly `p`, using O(width) memory.
pub fn verify_stream(ts: &TileSet, p: &dyn Pattern) -> Result<(), VerifyError> {
    CompiledTileSet::new(ts)?.verify_stream(p)
}

/// Like [`verify_stream`], split over worker threads when the `parallel`
/// feature is on. Falls back to the sequential sweep otherwise or for
/// narrow patterns.
pub fn verify_stream_parallel(ts: &TileSet, p: &dyn Pattern) -> Result<(), VerifyError> {
    let compiled = CompiledTileSet::new(ts)?;
    #[cfg(feature = "parallel")]
    {
        let threads = rayon::current_num_threads();
        let strips = threads.min(p.width() / 512).max(1);
        compiled.verify_stream_pipelined(p, strips)
    }
    #[cfg(not(feature = "parallel"))]
    compiled.verify_stream(p)
}
