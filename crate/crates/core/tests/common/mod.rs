//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pats::assembly::CompiledTileSet;
use pats::sat::{Cnf3, Literal, VarAssignment};
use pats::superreduce::{MbpatsInstance, Role};
use pats::{Color, DensePattern, HGlue, Pattern, Seed, TileSet, TileType, VGlue};
use rand::rngs::StdRng;
use rand::Rng;

/// The 5x3 three-color diagonal pattern and its three-tile set.
pub fn diagonal_pattern() -> DensePattern {
    DensePattern::from_fn(5, 3, |x, y| {
        Color::new(((x - 1 + y - 1) % 3 + 1).to_string())
    })
}

pub fn diagonal_tiles() -> TileSet {
    TileSet::new(
        vec![
            TileType::new("1", "dia", "dia", "bul", "bul"),
            TileType::new("2", "str", "str", "dia", "dia"),
            TileType::new("3", "bul", "bul", "str", "str"),
        ],
        Seed::new(
            ["bul", "dia", "str", "bul", "dia"].map(HGlue::new).to_vec(),
            ["bul", "dia", "str"].map(VGlue::new).to_vec(),
        ),
    )
}

/// Exhaustive reference search: every seed and every output choice over
/// `glues` labels per namespace, with no symmetry reduction. `bound`
/// gives the tile budget per palette color; `total` caps the sum.
pub fn naive_feasible(p: &DensePattern, total: usize, bound: &[usize]) -> bool {
    let glues = total.max(1) as u8;
    let (w, h) = (p.width(), p.height());
    let colors: Vec<u32> = (1..=h)
        .flat_map(|y| (1..=w).map(move |x| (x, y)))
        .map(|(x, y)| p.color_index(x, y))
        .collect();
    let seeds = (glues as usize).pow((w + h) as u32);
    (0..seeds).any(|mut code| {
        let mut north = vec![0u8; w];
        let mut east = vec![0u8; h];
        for g in north.iter_mut().chain(east.iter_mut()) {
            *g = (code % glues as usize) as u8;
            code /= glues as usize;
        }
        let mut table: BTreeMap<(u8, u8), (u32, u8, u8)> = BTreeMap::new();
        let mut grid = vec![(0u8, 0u8); w * h];
        naive_cells(
            0, w, &colors, &north, &east, glues, total, bound, &mut table, &mut grid,
        )
    })
}

#[allow(clippy::too_many_arguments)]
fn naive_cells(
    pos: usize,
    w: usize,
    colors: &[u32],
    north: &[u8],
    east: &[u8],
    glues: u8,
    total: usize,
    bound: &[usize],
    table: &mut BTreeMap<(u8, u8), (u32, u8, u8)>,
    grid: &mut Vec<(u8, u8)>,
) -> bool {
    if pos == colors.len() {
        return true;
    }
    let (x, y) = (pos % w, pos / w);
    let s = if y == 0 { north[x] } else { grid[pos - w].0 };
    let wi = if x == 0 { east[y] } else { grid[pos - 1].1 };
    if let Some(&(c, n, e)) = table.get(&(s, wi)) {
        if c != colors[pos] {
            return false;
        }
        grid[pos] = (n, e);
        return naive_cells(
            pos + 1,
            w,
            colors,
            north,
            east,
            glues,
            total,
            bound,
            table,
            grid,
        );
    }
    let c = colors[pos];
    let used = table.values().filter(|t| t.0 == c).count();
    if table.len() >= total || used >= bound[c as usize] {
        return false;
    }
    for n in 0..glues {
        for e in 0..glues {
            table.insert((s, wi), (c, n, e));
            grid[pos] = (n, e);
            if naive_cells(
                pos + 1,
                w,
                colors,
                north,
                east,
                glues,
                total,
                bound,
                table,
                grid,
            ) {
                return true;
            }
            table.remove(&(s, wi));
        }
    }
    false
}

/// All patterns of the given size over at most `k` colors, one per
/// color-renaming class (colors numbered by first appearance).
pub fn all_patterns(w: usize, h: usize, k: u32) -> Vec<DensePattern> {
    let cells = w * h;
    let mut out = Vec::new();
    let mut labels = vec![0u32; cells];
    fn rec(i: usize, max: u32, k: u32, labels: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == labels.len() {
            out.push(labels.clone());
            return;
        }
        for c in 0..=max.min(k - 1) {
            labels[i] = c;
            rec(i + 1, max.max(c + 1), k, labels, out);
        }
    }
    let mut all = Vec::new();
    rec(0, 0, k, &mut labels, &mut all);
    for l in all {
        out.push(DensePattern::from_fn(w, h, |x, y| {
            Color::new(format!("k{}", l[(y - 1) * w + x - 1]))
        }));
    }
    out
}

pub fn random_cnf(rng: &mut StdRng, vars: usize, clauses: usize) -> Cnf3 {
    let clauses = (0..clauses)
        .map(|_| {
            [(); 3].map(|_| {
                let v = rng.gen_range(0..vars);
                if rng.gen_bool(0.5) {
                    Literal::neg(v)
                } else {
                    Literal::pos(v)
                }
            })
        })
        .collect();
    Cnf3::numbered(vars, clauses)
}

/// Truth-table satisfiability, independent of the library's solvers.
pub fn truth_table(f: &Cnf3) -> Vec<VarAssignment> {
    let n = f.variables().len();
    (0u32..1 << n)
        .map(|bits| {
            f.variables()
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), bits >> i & 1 == 1))
                .collect::<VarAssignment>()
        })
        .filter(|a| {
            f.clauses()
                .iter()
                .all(|c| c.iter().any(|l| a[&f.variables()[l.var]] != l.negated))
        })
        .collect()
}

/// A random satisfiable formula with one of its satisfying assignments.
pub fn random_satisfiable(
    rng: &mut StdRng,
    max_vars: usize,
    max_clauses: usize,
) -> (Cnf3, VarAssignment) {
    loop {
        let vars = rng.gen_range(1..=max_vars);
        let clauses = rng.gen_range(1..=max_clauses);
        let f = random_cnf(rng, vars, clauses);
        let sols = truth_table(&f);
        if !sols.is_empty() {
            let a = sols[rng.gen_range(0..sols.len())].clone();
            return (f, a);
        }
    }
}

/// Renames glues by a random injective map per namespace.
pub fn scramble_glues(ts: &TileSet, rng: &mut StdRng) -> TileSet {
    let salt: u64 = rng.gen();
    pats::rename_glues(
        ts,
        |g| HGlue::new(format!("h{salt:x}:{}", g.as_str())),
        |g| VGlue::new(format!("v{:x}:{}", salt.rotate_left(7), g.as_str())),
    )
}

/// An all-distinct toy source pattern with random color tokens.
pub fn distinct_pattern(w: usize, h: usize, rng: &mut StdRng) -> DensePattern {
    let tag: u32 = rng.gen();
    DensePattern::from_fn(w, h, |x, y| Color::new(format!("t{tag:x}_{x}_{y}")))
}

/// Unique border colors and a few repeated interior colors.
pub fn bordered_pattern(w: usize, h: usize, interior: u32, rng: &mut StdRng) -> DensePattern {
    let cells: Vec<u32> = (0..w * h).map(|_| rng.gen_range(0..interior)).collect();
    DensePattern::from_fn(w, h, |x, y| {
        if x == 1 || y == 1 || x == w || y == h {
            Color::new(format!("b{x}_{y}"))
        } else {
            Color::new(format!("i{}", cells[(y - 1) * w + x - 1]))
        }
    })
}

/// Renames, to fresh matching glues, every edge the blowup cannot carry:
/// the unread top and right outputs and the edges along the bottom row and
/// left column, seeds included. Assembly is unchanged. Needs unique
/// border colors, so each border tile sits at exactly one cell.
pub fn freshen_undefined_edges(ts: &TileSet, p: &dyn Pattern) -> TileSet {
    let (w, h) = (p.width(), p.height());
    let mut at: BTreeMap<Color, (usize, usize)> = BTreeMap::new();
    for y in 1..=h {
        for x in 1..=w {
            if x == 1 || y == 1 || x == w || y == h {
                at.insert(p.cell(x, y).clone(), (x, y));
            }
        }
    }
    let hn = |x: usize, y: usize| HGlue::new(format!("fn@{x}_{y}"));
    let ve = |x: usize, y: usize| VGlue::new(format!("fe@{x}_{y}"));
    let tiles = ts.tiles().iter().map(|t| {
        let mut t = t.clone();
        if let Some(&(x, y)) = at.get(&t.color) {
            if x == 1 || y == h {
                t.n = hn(x, y);
            }
            if y == 1 || x == w {
                t.e = ve(x, y);
            }
            if x == 1 || y == 1 {
                t.s = hn(x, y - 1);
                t.w = ve(x - 1, y);
            }
        }
        t
    });
    let seed = Seed::new(
        (1..=w).map(|x| hn(x, 0)).collect(),
        (1..=h).map(|y| ve(0, y)).collect(),
    );
    TileSet::new(tiles.collect::<Vec<_>>(), seed)
}

/// What a witness assembly of Q places where.
pub struct RoleScan {
    /// Roles each tile index is used in.
    pub roles: Vec<BTreeSet<Role>>,
    /// Per block, row-major from (1,1).
    pub blocks: Vec<BlockScan>,
}

#[derive(Clone, Debug, Default)]
pub struct BlockScan {
    pub color: usize,
    pub a: Option<u32>,
    pub b1_star: Option<u32>,
    pub b2_star: Option<u32>,
    pub c1: Option<u32>,
    pub c2: Option<u32>,
    pub east: Option<VGlue>,
    pub north: Option<HGlue>,
    /// Tile indices of the whole block, conceptual row-major; `None` for
    /// trimmed positions.
    pub grid: Vec<Option<u32>>,
}

pub fn scan_roles(theta: &TileSet, inst: &MbpatsInstance, keep_grids: bool) -> RoleScan {
    let q = &inst.q;
    let ell = inst.ell;
    let (wp, hp) = inst.source_dims;
    let compiled = CompiledTileSet::new(theta).expect("directed");
    let mut roles = vec![BTreeSet::new(); theta.len()];
    let mut blocks: Vec<BlockScan> = (0..wp * hp)
        .map(|i| BlockScan {
            color: q.block_color(i % wp + 1, i / wp + 1),
            grid: if keep_grids {
                vec![None; ell * ell]
            } else {
                Vec::new()
            },
            ..BlockScan::default()
        })
        .collect();
    compiled
        .stream_tiles::<pats::AssemblyError>(q.width(), q.height(), |y, row| {
            for (x0, &t) in row.iter().enumerate() {
                let x = x0 + 1;
                let role = q.role(x, y);
                roles[t as usize].insert(role);
                let Some(((bx, by), (j, i))) = q.locate(x, y) else {
                    continue;
                };
                let b = &mut blocks[(by - 1) * wp + bx - 1];
                if keep_grids {
                    b.grid[(i - 1) * ell + j - 1] = Some(t);
                }
                let tile = compiled.tile(t);
                match (j, i) {
                    (1, 1) => b.a = Some(t),
                    (j, 1) if j == ell - 1 => b.b1_star = Some(t),
                    (1, i) if i == ell - 1 => b.b2_star = Some(t),
                    (j, 1) if j == ell => {
                        b.c1 = Some(t);
                        b.east = Some(tile.e.clone());
                    }
                    (1, i) if i == ell => {
                        b.c2 = Some(t);
                        b.north = Some(tile.n.clone());
                    }
                    _ => {}
                }
            }
            Ok(())
        })
        .expect("witness assembles Q");
    RoleScan { roles, blocks }
}

pub const WHITE_ROLES: [Role; 7] = [
    Role::A,
    Role::B1,
    Role::B2,
    Role::C1,
    Role::C2,
    Role::D1,
    Role::D2,
];

/// Tiles used in more than one of the white roles.
pub fn white_role_clashes(scan: &RoleScan) -> Vec<(usize, Vec<Role>)> {
    scan.roles
        .iter()
        .enumerate()
        .filter_map(|(i, rs)| {
            let white: Vec<Role> = rs
                .iter()
                .copied()
                .filter(|r| WHITE_ROLES.contains(r))
                .collect();
            (white.len() > 1).then_some((i, white))
        })
        .collect()
}

/// Violations of the sharing rules between supertiles: a tile in the
/// control/carry positions shared by blocks with different colors, or by
/// blocks with different east (north) outputs along the east (north)
/// carrying positions.
pub fn sharing_violations(scan: &RoleScan) -> Vec<String> {
    let mut out = Vec::new();
    let mut by_tile: BTreeMap<u32, Vec<(usize, &'static str)>> = BTreeMap::new();
    for (bi, b) in scan.blocks.iter().enumerate() {
        for (pos, t) in [
            ("A", b.a),
            ("B1*", b.b1_star),
            ("B2*", b.b2_star),
            ("C1", b.c1),
            ("C2", b.c2),
        ] {
            if let Some(t) = t {
                by_tile.entry(t).or_default().push((bi, pos));
            }
        }
    }
    for (t, uses) in by_tile {
        for (i, &(b1, p1)) in uses.iter().enumerate() {
            for &(b2, _) in &uses[i + 1..] {
                let (s1, s2) = (&scan.blocks[b1], &scan.blocks[b2]);
                if s1.color != s2.color {
                    out.push(format!("tile {t} shared across colors at {p1}"));
                }
                if matches!(p1, "A" | "B1*" | "C1") && s1.east != s2.east {
                    out.push(format!("tile {t} shared across east outputs at {p1}"));
                }
                if matches!(p1, "A" | "B2*" | "C2") && s1.north != s2.north {
                    out.push(format!("tile {t} shared across north outputs at {p1}"));
                }
            }
        }
    }
    out
}

/// Checks the black and gray tiles against the expected shapes up to
/// renaming: one black tile with equal opposite glues; gray tiles F1, F2,
/// G and two counter chains of length k ending in the D1/D2 tiles; and
/// the glues bul, dia, 0..k pairwise distinct.
pub fn gray_shape_errors(theta: &TileSet, k: usize) -> Vec<String> {
    let mut errs = Vec::new();
    let black: Vec<&TileType> = theta.tiles_of_color(&Color::new("black")).collect();
    let gray: Vec<&TileType> = theta.tiles_of_color(&Color::new("gray")).collect();
    let white: Vec<&TileType> = theta.tiles_of_color(&Color::new("white")).collect();
    let [b] = black.as_slice() else {
        return vec![format!("expected one black tile, found {}", black.len())];
    };
    if b.n.as_str() != b.s.as_str() || b.e.as_str() != b.w.as_str() {
        errs.push("black tile has unequal opposite glues".into());
    }
    if gray.len() != 2 * k + 3 {
        errs.push(format!(
            "expected {} gray tiles, found {}",
            2 * k + 3,
            gray.len()
        ));
    }
    let (hb, vb) = (b.n.as_str(), b.e.as_str());
    let g = gray
        .iter()
        .find(|t| t.n == t.s && t.e == t.w && t.n.as_str() != hb && t.e.as_str() != vb);
    let Some(g) = g else {
        errs.push("no G tile".into());
        return errs;
    };
    let (hd, vd) = (g.n.as_str(), g.e.as_str());
    let shaped = |n: &str, e: &str, s: &str, w: &str| {
        gray.iter()
            .filter(|t| (t.n.as_str(), t.e.as_str(), t.s.as_str(), t.w.as_str()) == (n, e, s, w))
            .count()
    };
    if shaped(hd, vb, hd, vb) != 1 {
        errs.push("no F1 tile".into());
    }
    if shaped(hb, vd, hb, vd) != 1 {
        errs.push("no F2 tile".into());
    }
    // Vertical counter: follow D1's south glue down the chain.
    let d1 = white
        .iter()
        .find(|t| t.n.as_str() == hd && t.e.as_str() == vb && t.w.as_str() == vb);
    let d2 = white
        .iter()
        .find(|t| t.e.as_str() == vd && t.n.as_str() == hb && t.s.as_str() == hb);
    let mut h_glues = BTreeSet::from([hb.to_owned(), hd.to_owned()]);
    let mut v_glues = BTreeSet::from([vb.to_owned(), vd.to_owned()]);
    match d1 {
        Some(d1) => {
            let mut want = d1.s.as_str().to_owned();
            h_glues.insert(want.clone());
            for step in 0..k {
                let next = gray
                    .iter()
                    .find(|t| t.n.as_str() == want && t.e.as_str() == vb && t.w.as_str() == vb);
                match next {
                    Some(t) if h_glues.insert(t.s.as_str().to_owned()) => {
                        want = t.s.as_str().to_owned()
                    }
                    _ => {
                        errs.push(format!("vertical counter broken after {step} steps"));
                        break;
                    }
                }
            }
        }
        None => errs.push("no D1 tile".into()),
    }
    match d2 {
        Some(d2) => {
            let mut want = d2.w.as_str().to_owned();
            v_glues.insert(want.clone());
            for step in 0..k {
                let next = gray
                    .iter()
                    .find(|t| t.e.as_str() == want && t.n.as_str() == hb && t.s.as_str() == hb);
                match next {
                    Some(t) if v_glues.insert(t.w.as_str().to_owned()) => {
                        want = t.w.as_str().to_owned()
                    }
                    _ => {
                        errs.push(format!("horizontal counter broken after {step} steps"));
                        break;
                    }
                }
            }
        }
        None => errs.push("no D2 tile".into()),
    }
    if h_glues.len() != k + 3 || v_glues.len() != k + 3 {
        errs.push("counter glues are not pairwise distinct".into());
    }
    errs
}
