//! Tile sets up to independent renaming of horizontal and vertical glues.

use rustc_hash::FxHashMap;

use crate::model::{Color, HGlue, Seed, TileSet, TileType, VGlue};

/// Applies one map to every horizontal glue and another to every vertical
/// glue, seed included.
pub fn rename_glues(
    ts: &TileSet,
    h: impl Fn(&HGlue) -> HGlue,
    v: impl Fn(&VGlue) -> VGlue,
) -> TileSet {
    let tiles = ts.tiles().iter().map(|t| TileType {
        color: t.color.clone(),
        n: h(&t.n),
        e: v(&t.e),
        s: h(&t.s),
        w: v(&t.w),
    });
    let seed = Seed::new(
        ts.seed.north.iter().map(&h).collect(),
        ts.seed.east.iter().map(&v).collect(),
    );
    TileSet::new(tiles.collect::<Vec<_>>(), seed)
}

/// Integer view of a tile set: glues interned per namespace.
struct Indexed {
    colors: Vec<u32>,
    /// `[n, e, s, w]` per tile; n/s index horizontal glues, e/w vertical.
    glues: Vec<[u32; 4]>,
    north: Vec<u32>,
    east: Vec<u32>,
    h_count: usize,
    v_count: usize,
    /// Per tile: color plus, for each side, how often that glue occurs in
    /// each role across the whole set. Equal signatures are necessary for
    /// two tiles to correspond.
    sig: Vec<[u32; 11]>,
}

fn index(ts: &TileSet, colors: &mut FxHashMap<Color, u32>, include_seeds: bool) -> Indexed {
    let mut h: FxHashMap<&str, u32> = FxHashMap::default();
    let mut v: FxHashMap<&str, u32> = FxHashMap::default();
    fn id<'a>(m: &mut FxHashMap<&'a str, u32>, s: &'a str) -> u32 {
        let n = m.len() as u32;
        *m.entry(s).or_insert(n)
    }
    let mut out_colors = Vec::new();
    let mut glues = Vec::new();
    for t in ts.tiles() {
        let n = colors.len() as u32;
        out_colors.push(*colors.entry(t.color.clone()).or_insert(n));
        glues.push([
            id(&mut h, t.n.as_str()),
            id(&mut v, t.e.as_str()),
            id(&mut h, t.s.as_str()),
            id(&mut v, t.w.as_str()),
        ]);
    }
    let (north, east) = if include_seeds {
        (
            ts.seed
                .north
                .iter()
                .map(|g| id(&mut h, g.as_str()))
                .collect(),
            ts.seed
                .east
                .iter()
                .map(|g| id(&mut v, g.as_str()))
                .collect(),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    // Role counts: horizontal glues as (N, S, seed), vertical as (E, W, seed).
    let mut hc = vec![[0u32; 3]; h.len()];
    let mut vc = vec![[0u32; 3]; v.len()];
    for g in &glues {
        hc[g[0] as usize][0] += 1;
        vc[g[1] as usize][0] += 1;
        hc[g[2] as usize][1] += 1;
        vc[g[3] as usize][1] += 1;
    }
    for &g in &north {
        hc[g as usize][2] += 1;
    }
    for &g in &east {
        vc[g as usize][2] += 1;
    }
    let sig = glues
        .iter()
        .zip(&out_colors)
        .map(|(g, &c)| {
            let [n, e, s, w] = *g;
            let (n, e, s, w) = (
                hc[n as usize],
                vc[e as usize],
                hc[s as usize],
                vc[w as usize],
            );
            let flags = u32::from(g[0] == g[2]) | u32::from(g[1] == g[3]) << 1;
            [
                c,
                n[0],
                n[1] + (n[2] << 16),
                e[0],
                e[1] + (e[2] << 16),
                s[0],
                s[1] + (s[2] << 16),
                w[0],
                w[1] + (w[2] << 16),
                flags,
                0,
            ]
        })
        .collect();
    Indexed {
        colors: out_colors,
        glues,
        north,
        east,
        h_count: h.len(),
        v_count: v.len(),
        sig,
    }
}

const UNSET: u32 = u32::MAX;

struct Search<'a> {
    a: &'a Indexed,
    b: &'a Indexed,
    /// Candidate b tiles per a tile (matching signature).
    cands: Vec<Vec<u32>>,
    h_fwd: Vec<u32>,
    h_bwd: Vec<u32>,
    v_fwd: Vec<u32>,
    v_bwd: Vec<u32>,
    a_done: Vec<bool>,
    b_used: Vec<bool>,
}

/// Undo log entry: (namespace is vertical, a-glue).
type Trail = Vec<(bool, u32)>;

impl Search<'_> {
    fn bind(&mut self, vertical: bool, ga: u32, gb: u32, trail: &mut Trail) -> bool {
        let (fwd, bwd) = if vertical {
            (&mut self.v_fwd, &mut self.v_bwd)
        } else {
            (&mut self.h_fwd, &mut self.h_bwd)
        };
        match fwd[ga as usize] {
            UNSET if bwd[gb as usize] == UNSET => {
                fwd[ga as usize] = gb;
                bwd[gb as usize] = ga;
                trail.push((vertical, ga));
                true
            }
            x => x == gb,
        }
    }

    fn undo(&mut self, trail: &mut Trail, to: usize) {
        while trail.len() > to {
            let (vertical, ga) = trail.pop().unwrap();
            let (fwd, bwd) = if vertical {
                (&mut self.v_fwd, &mut self.v_bwd)
            } else {
                (&mut self.h_fwd, &mut self.h_bwd)
            };
            bwd[fwd[ga as usize] as usize] = UNSET;
            fwd[ga as usize] = UNSET;
        }
    }

    fn consistent(&self, ta: usize, tb: usize) -> bool {
        let (ga, gb) = (self.a.glues[ta], self.b.glues[tb]);
        (0..4).all(|i| {
            let vertical = i % 2 == 1;
            let (fwd, bwd) = if vertical {
                (&self.v_fwd, &self.v_bwd)
            } else {
                (&self.h_fwd, &self.h_bwd)
            };
            let (x, y) = (ga[i], gb[i]);
            match fwd[x as usize] {
                UNSET => bwd[y as usize] == UNSET,
                m => m == y,
            }
        }) && !self.b_used[tb]
    }

    fn try_map(&mut self, ta: usize, tb: usize, trail: &mut Trail) -> bool {
        let (ga, gb) = (self.a.glues[ta], self.b.glues[tb]);
        (0..4).all(|i| self.bind(i % 2 == 1, ga[i], gb[i], trail))
    }

    fn run(&mut self, remaining: usize, trail: &mut Trail) -> bool {
        if remaining == 0 {
            return true;
        }
        // Most-constrained a tile first.
        let mut best: Option<(usize, Vec<u32>)> = None;
        for ta in 0..self.a.glues.len() {
            if self.a_done[ta] {
                continue;
            }
            let live: Vec<u32> = self.cands[ta]
                .iter()
                .copied()
                .filter(|&tb| self.consistent(ta, tb as usize))
                .collect();
            if live.is_empty() {
                return false;
            }
            if best.as_ref().is_none_or(|(_, b)| live.len() < b.len()) {
                let one = live.len() == 1;
                best = Some((ta, live));
                if one {
                    break;
                }
            }
        }
        let (ta, live) = best.expect("remaining > 0");
        self.a_done[ta] = true;
        for tb in live {
            let mark = trail.len();
            if self.try_map(ta, tb as usize, trail) {
                self.b_used[tb as usize] = true;
                if self.run(remaining - 1, trail) {
                    return true;
                }
                self.b_used[tb as usize] = false;
            }
            self.undo(trail, mark);
        }
        self.a_done[ta] = false;
        false
    }
}

/// True iff a pair of namespace-respecting glue bijections maps `a`'s tiles
/// (and seed, when `include_seeds`) exactly onto `b`'s.
pub fn glue_isomorphic(a: &TileSet, b: &TileSet, include_seeds: bool) -> bool {
    if a.len() != b.len()
        || (include_seeds
            && (a.seed.width() != b.seed.width() || a.seed.height() != b.seed.height()))
    {
        return false;
    }
    let mut colors = FxHashMap::default();
    let ia = index(a, &mut colors, include_seeds);
    let ib = index(b, &mut colors, include_seeds);
    if ia.h_count != ib.h_count || ia.v_count != ib.v_count {
        return false;
    }
    let mut sa: Vec<_> = ia.sig.clone();
    let mut sb: Vec<_> = ib.sig.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }
    let mut by_sig: FxHashMap<[u32; 11], Vec<u32>> = FxHashMap::default();
    for (i, s) in ib.sig.iter().enumerate() {
        by_sig.entry(*s).or_default().push(i as u32);
    }
    let cands = ia.sig.iter().map(|s| by_sig[s].clone()).collect();
    let mut search = Search {
        a: &ia,
        b: &ib,
        cands,
        h_fwd: vec![UNSET; ia.h_count],
        h_bwd: vec![UNSET; ib.h_count],
        v_fwd: vec![UNSET; ia.v_count],
        v_bwd: vec![UNSET; ib.v_count],
        a_done: vec![false; ia.glues.len()],
        b_used: vec![false; ib.glues.len()],
    };
    let mut trail = Trail::new();
    // Seeds are positional, so they pin glues before any tile is matched.
    for (&x, &y) in ia.north.iter().zip(&ib.north) {
        if !search.bind(false, x, y, &mut trail) {
            return false;
        }
    }
    for (&x, &y) in ia.east.iter().zip(&ib.east) {
        if !search.bind(true, x, y, &mut trail) {
            return false;
        }
    }
    debug_assert_eq!(ia.colors.len(), ib.colors.len());
    search.run(ia.glues.len(), &mut trail)
}
