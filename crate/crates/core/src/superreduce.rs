//! Three-color blowup: every cell of a pattern `P` becomes an `ell x ell`
//! supertile (`ell = 5k + 8`) of black, white and gray cells, plus three
//! gadget rows on top and three gadget columns on the right.
//!
//! Supertile positions use conceptual coordinates `(j, i)`, both `1..=ell`,
//! with `(1,1)` bottom left. Row 1 and column 1 are white (`A` at the
//! corner, `B1` along the row, `C1` at its end, `B2` up the column, `C2` at
//! its top). The top row holds a gray counter of length `c` followed by the
//! white `D2`; the right column holds the matching counter and `D1`. The
//! rest of the top row and right column is gray (`F2`, `F1`, `G` at the
//! corner) and the interior is black. Supertiles in the bottom row of `P`
//! lack row 1, and those in the left column lack column 1.
//!
//! In `Q`, block `(X, Y)` covers columns `x` with `x / ell + 1 == X`
//! (1-based `x`), so its column `j` sits at `x = (X-1)*ell + j - 1`.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::assembly::{assemble, CompiledTileSet, VerifyError};
use crate::model::{Color, HGlue, Seed, TileSet, TileType, VGlue};
use crate::pattern::{color_census, DensePattern, Pattern};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BlowupError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("color {c} out of range 1..={k}")]
    Range { c: usize, k: usize },
    #[error("tile set does not have the required structure: {0}")]
    Structure(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("malformed supertile at block ({x},{y}): {detail}")]
    MalformedSupertile { x: usize, y: usize, detail: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

impl From<crate::assembly::AssemblyError> for BlowupError {
    fn from(e: crate::assembly::AssemblyError) -> Self {
        BlowupError::Verify(e.into())
    }
}

pub const BLACK: &str = "black";
pub const WHITE: &str = "white";
pub const GRAY: &str = "gray";

const IB: u32 = 0;
const IW: u32 = 1;
const IG: u32 = 2;

fn palette() -> Vec<Color> {
    vec![Color::new(BLACK), Color::new(WHITE), Color::new(GRAY)]
}

pub fn ell_for(k: usize) -> usize {
    5 * k + 8
}

/// Tile budgets per color.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub m_b: usize,
    pub m_w: usize,
    pub m_g: usize,
    pub ell: usize,
}

fn bounds_for(k: usize, w: usize, h: usize) -> Result<Bounds, BlowupError> {
    let m_w = (5 * k + 14) as i64 - 3 * (w + h) as i64;
    if m_w <= 0 {
        return Err(BlowupError::Precondition(format!(
            "white bound 5k-3(w+h)+14 = {m_w} is not positive"
        )));
    }
    Ok(Bounds {
        m_b: 1,
        m_w: m_w as usize,
        m_g: 2 * k + 3,
        ell: ell_for(k),
    })
}

/// Checks that every color on the border of `p` is unique and that the
/// white bound is positive.
pub fn validate_source(p: &dyn Pattern) -> Result<(), BlowupError> {
    let census = color_census(p);
    let (w, h) = (p.width(), p.height());
    let border = (1..=w)
        .flat_map(|x| [(x, 1), (x, h)])
        .chain((1..=h).flat_map(|y| [(1, y), (w, y)]));
    for (x, y) in border {
        let c = p.cell(x, y);
        if !census.is_unique(c) {
            return Err(BlowupError::Precondition(format!(
                "border cell ({x},{y}) has color {c}, which is not unique"
            )));
        }
    }
    bounds_for(census.num_colors(), w, h).map(|_| ())
}

/// Like [`validate_source`], and additionally requires `p` to be exactly
/// the reduction pattern of `f`.
pub fn validate_source_strict(p: &dyn Pattern, f: &crate::sat::Cnf3) -> Result<(), BlowupError> {
    validate_source(p)?;
    let expected = crate::satreduce::build_pattern(f).pattern;
    if !crate::pattern::same_cells(p, &expected) {
        return Err(BlowupError::Precondition(
            "pattern differs from the reduction pattern of the formula".into(),
        ));
    }
    Ok(())
}

pub fn bounds(p: &dyn Pattern) -> Result<Bounds, BlowupError> {
    validate_source(p)?;
    bounds_for(color_census(p).num_colors(), p.width(), p.height())
}

/// Color of supertile cell `(j, i)` portraying color `c`, for `ell > c + 2`.
#[inline]
fn supertile_cell(ell: usize, c: usize, j: usize, i: usize) -> u32 {
    if i == 1 || j == 1 {
        IW
    } else if i == ell {
        if j != ell && j == c + 2 {
            IW
        } else {
            IG
        }
    } else if j == ell {
        if i == c + 2 {
            IW
        } else {
            IG
        }
    } else {
        IB
    }
}

/// The supertile portraying `c` on its own, trimmed as requested.
pub fn supertile_pattern(
    c: usize,
    k: usize,
    has_bottom_row: bool,
    has_left_column: bool,
) -> Result<DensePattern, BlowupError> {
    if c == 0 || c > k {
        return Err(BlowupError::Range { c, k });
    }
    let ell = ell_for(k);
    let (dj, di) = (usize::from(!has_left_column), usize::from(!has_bottom_row));
    let pal = palette();
    Ok(DensePattern::from_fn(ell - dj, ell - di, |x, y| {
        pal[supertile_cell(ell, c, x + dj, y + di) as usize].clone()
    }))
}

/// What a position of `Q` is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    A,
    B1,
    C1,
    B2,
    C2,
    D1,
    D2,
    E,
    /// Right-column counter cell; the value is the south glue it reads.
    VCounter(usize),
    /// Top-row counter cell; the value is the west glue it reads.
    HCounter(usize),
    F1,
    F2,
    G,
    /// A cell of the gadget rows or columns.
    Gadget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    /// Block index and position within the block, both 1-based.
    Block(usize, usize),
    /// Gadget row/column 0, 1 or 2.
    Gadget(usize),
}

/// The procedural blowup of a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPattern {
    ell: usize,
    k: usize,
    wp: usize,
    hp: usize,
    /// 1-based color index per block, row-major from (1,1).
    blocks: Vec<u32>,
    palette: Vec<Color>,
}

impl QPattern {
    pub fn new(ell: usize, k: usize, wp: usize, hp: usize, blocks: Vec<u32>) -> Self {
        assert_eq!(blocks.len(), wp * hp, "one color index per block");
        assert!(blocks.iter().all(|&c| c >= 1 && c as usize <= k));
        assert!(ell > k + 2, "supertile too small for its counters");
        QPattern {
            ell,
            k,
            wp,
            hp,
            blocks,
            palette: palette(),
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.wp, self.hp)
    }

    /// Color index portrayed by block `(bx, by)`.
    pub fn block_color(&self, bx: usize, by: usize) -> usize {
        self.blocks[(by - 1) * self.wp + bx - 1] as usize
    }

    fn axis(&self, v: usize, blocks: usize) -> Axis {
        let edge = blocks * self.ell;
        if v >= edge {
            Axis::Gadget(v - edge)
        } else {
            Axis::Block(v / self.ell + 1, v % self.ell + 1)
        }
    }

    #[inline]
    fn color_at(&self, x: usize, col: Axis, y: usize, row: Axis) -> u32 {
        let ell = self.ell;
        match (row, col) {
            (Axis::Gadget(gr), Axis::Gadget(gc)) => {
                if gr == 1 || gc == 1 {
                    IG
                } else {
                    IB
                }
            }
            (Axis::Gadget(gr), Axis::Block(_, j)) => match (gr, x == self.k + 1) {
                (1, true) => IW,
                (1, false) => IG,
                _ if j == ell => IG,
                _ => IB,
            },
            (Axis::Block(_, i), Axis::Gadget(gc)) => match (gc, y == self.k + 1) {
                (1, true) => IW,
                (1, false) => IG,
                _ if i == ell => IG,
                _ => IB,
            },
            (Axis::Block(by, i), Axis::Block(bx, j)) => {
                supertile_cell(ell, self.block_color(bx, by), j, i)
            }
        }
    }

    /// The purpose of position `(x, y)`.
    pub fn role(&self, x: usize, y: usize) -> Role {
        let (Axis::Block(bx, j), Axis::Block(by, i)) =
            (self.axis(x, self.wp), self.axis(y, self.hp))
        else {
            return Role::Gadget;
        };
        let c = self.block_color(bx, by);
        let ell = self.ell;
        match (j, i) {
            (1, 1) => Role::A,
            (1, i) if i == ell => Role::C2,
            (1, _) => Role::B2,
            (j, 1) if j == ell => Role::C1,
            (_, 1) => Role::B1,
            (j, i) if j == ell && i == ell => Role::G,
            (j, i) if i == ell => match j.cmp(&(c + 2)) {
                std::cmp::Ordering::Less => Role::HCounter(c + 2 - j),
                std::cmp::Ordering::Equal => Role::D2,
                std::cmp::Ordering::Greater => Role::F2,
            },
            (j, i) if j == ell => match i.cmp(&(c + 2)) {
                std::cmp::Ordering::Less => Role::VCounter(c + 2 - i),
                std::cmp::Ordering::Equal => Role::D1,
                std::cmp::Ordering::Greater => Role::F1,
            },
            _ => Role::E,
        }
    }

    /// Block containing `(x, y)` and the conceptual position within it.
    pub fn locate(&self, x: usize, y: usize) -> Option<((usize, usize), (usize, usize))> {
        match (self.axis(x, self.wp), self.axis(y, self.hp)) {
            (Axis::Block(bx, j), Axis::Block(by, i)) => Some(((bx, by), (j, i))),
            _ => None,
        }
    }

    /// Q coordinates of conceptual position `(j, i)` in block `(bx, by)`.
    pub fn position(&self, bx: usize, by: usize, j: usize, i: usize) -> (usize, usize) {
        ((bx - 1) * self.ell + j - 1, (by - 1) * self.ell + i - 1)
    }
}

impl Pattern for QPattern {
    fn width(&self) -> usize {
        self.ell * self.wp + 2
    }

    fn height(&self) -> usize {
        self.ell * self.hp + 2
    }

    fn palette(&self) -> &[Color] {
        &self.palette
    }

    fn color_index(&self, x: usize, y: usize) -> u32 {
        self.color_at(x, self.axis(x, self.wp), y, self.axis(y, self.hp))
    }

    fn fill_row(&self, y: usize, x0: usize, out: &mut [u32]) {
        let row = self.axis(y, self.hp);
        let edge = self.wp * self.ell;
        let mut col = self.axis(x0, self.wp);
        for (x, slot) in (x0..).zip(out.iter_mut()) {
            *slot = self.color_at(x, col, y, row);
            col = match col {
                Axis::Block(..) if x + 1 >= edge => Axis::Gadget(0),
                Axis::Block(bx, j) if j == self.ell => Axis::Block(bx + 1, 1),
                Axis::Block(bx, j) => Axis::Block(bx, j + 1),
                Axis::Gadget(g) => Axis::Gadget(g + 1),
            };
        }
    }
}

/// A blown-up instance with its budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MbpatsInstance {
    pub q: QPattern,
    pub m_b: usize,
    pub m_w: usize,
    pub m_g: usize,
    pub ell: usize,
    pub source_dims: (usize, usize),
    /// `colors[i]` is the source color with index `i + 1`.
    pub colors: Vec<Color>,
}

impl MbpatsInstance {
    pub fn k(&self) -> usize {
        self.colors.len()
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            m_b: self.m_b,
            m_w: self.m_w,
            m_g: self.m_g,
            ell: self.ell,
        }
    }

    /// Per-color bounds keyed by the three colors of `Q`.
    pub fn color_bounds(&self) -> Vec<(Color, usize)> {
        vec![
            (Color::new(BLACK), self.m_b),
            (Color::new(WHITE), self.m_w),
            (Color::new(GRAY), self.m_g),
        ]
    }

    pub fn supertile(&self, bx: usize, by: usize) -> SupertileView {
        let (has_left_column, has_bottom_row) = (bx > 1, by > 1);
        let (dj, di) = (usize::from(!has_left_column), usize::from(!has_bottom_row));
        let size = self.ell;
        let pattern = DensePattern::from_fn(size - dj, size - di, |lx, ly| {
            let (x, y) = self.q.position(bx, by, lx + dj, ly + di);
            self.q.cell(x, y).clone()
        });
        SupertileView {
            x: bx,
            y: by,
            has_bottom_row,
            has_left_column,
            pattern,
        }
    }
}

/// Source color indices by first appearance, scanning rows from (1,1).
fn color_indices(p: &dyn Pattern) -> (Vec<Color>, Vec<u32>) {
    let mut colors = Vec::new();
    let mut index: FxHashMap<Color, u32> = FxHashMap::default();
    let mut blocks = Vec::with_capacity(p.width() * p.height());
    for y in 1..=p.height() {
        for x in 1..=p.width() {
            let c = p.cell(x, y);
            let id = *index.entry(c.clone()).or_insert_with(|| {
                colors.push(c.clone());
                colors.len() as u32
            });
            blocks.push(id);
        }
    }
    (colors, blocks)
}

pub fn build_q(p: &dyn Pattern) -> Result<MbpatsInstance, BlowupError> {
    validate_source(p)?;
    let (colors, blocks) = color_indices(p);
    let b = bounds_for(colors.len(), p.width(), p.height())?;
    Ok(MbpatsInstance {
        q: QPattern::new(b.ell, colors.len(), p.width(), p.height(), blocks),
        m_b: b.m_b,
        m_w: b.m_w,
        m_g: b.m_g,
        ell: b.ell,
        source_dims: (p.width(), p.height()),
        colors,
    })
}

/// One supertile cut out of `Q`, trimmed like in `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupertileView {
    pub x: usize,
    pub y: usize,
    pub has_bottom_row: bool,
    pub has_left_column: bool,
    pub pattern: DensePattern,
}

/// Reads the portrayed color from both counters of a supertile.
pub fn portrayed_color(view: &SupertileView) -> Result<usize, BlowupError> {
    let p = &view.pattern;
    let (w, h) = (p.width(), p.height());
    let malformed = |detail: String| BlowupError::MalformedSupertile {
        x: view.x,
        y: view.y,
        detail,
    };
    let white = Color::new(WHITE);
    let dj = usize::from(!view.has_left_column);
    let di = usize::from(!view.has_bottom_row);
    // Skip column 1 / row 1 of a complete supertile and the corner.
    let top: Vec<usize> = (1 + usize::from(view.has_left_column)..w)
        .filter(|&x| p.cell(x, h) == &white)
        .collect();
    let right: Vec<usize> = (1 + usize::from(view.has_bottom_row)..h)
        .filter(|&y| p.cell(w, y) == &white)
        .collect();
    let (&[d2], &[d1]) = (top.as_slice(), right.as_slice()) else {
        return Err(malformed(format!(
            "expected one white counter end per counter, found {} in the top row and {} in the right column",
            top.len(),
            right.len()
        )));
    };
    let c_top = (d2 + dj).checked_sub(2).filter(|&c| c > 0);
    let c_right = (d1 + di).checked_sub(2).filter(|&c| c > 0);
    match (c_top, c_right) {
        (Some(a), Some(b)) if a == b => Ok(a),
        _ => Err(malformed(format!(
            "counters disagree: top row gives {c_top:?}, right column gives {c_right:?}"
        ))),
    }
}

const BUL: &str = "bul";
const DIA: &str = "dia";

fn wrap(g: &str) -> String {
    format!("t:{g}")
}

fn unwrap(g: &str) -> &str {
    g.strip_prefix("t:").unwrap_or(g)
}

fn pair(g: &str, c: usize) -> String {
    format!("pair({g},{c})")
}

fn tile(color: &str, n: &str, e: &str, s: &str, w: &str) -> TileType {
    TileType::new(color, n, e, s, w)
}

/// The black, gray, `D1` and `D2` tiles shared by every supertile.
pub fn theta_base_tiles(k: usize) -> Vec<TileType> {
    let mut out = vec![tile(BLACK, BUL, BUL, BUL, BUL)];
    for i in 1..=k {
        let (lo, hi) = ((i - 1).to_string(), i.to_string());
        out.push(tile(GRAY, &lo, BUL, &hi, BUL));
        out.push(tile(GRAY, BUL, &lo, BUL, &hi));
    }
    out.push(tile(GRAY, DIA, BUL, DIA, BUL));
    out.push(tile(GRAY, BUL, DIA, BUL, DIA));
    out.push(tile(GRAY, DIA, DIA, DIA, DIA));
    out.push(tile(WHITE, DIA, BUL, "0", BUL));
    out.push(tile(WHITE, BUL, DIA, BUL, "0"));
    out
}

/// Builds the three-color tile set assembling the blowup of `p` from a
/// tile set `t` assembling `p`.
pub fn witness_theta(t: &TileSet, p: &dyn Pattern) -> Result<TileSet, BlowupError> {
    let inst = build_q(p)?;
    let (wp, hp) = inst.source_dims;
    let k = inst.k();
    let compiled = CompiledTileSet::new(t).map_err(VerifyError::from)?;
    compiled.verify_stream(p)?;
    let a = assemble(t, wp, hp).map_err(VerifyError::from)?;

    let mut white = Vec::new();
    let mut north = vec![String::new(); inst.q.width()];
    let mut east = vec![String::new(); inst.q.height()];
    let ell = inst.ell;
    for by in 1..=hp {
        for bx in 1..=wp {
            let src = a.at(bx, by);
            let c = inst.q.block_color(bx, by);
            let n = if by == hp {
                BUL.to_owned()
            } else {
                wrap(src.n.as_str())
            };
            let e = if bx == wp {
                BUL.to_owned()
            } else {
                wrap(src.e.as_str())
            };
            let (pn, pe) = (pair(&n, c), pair(&e, c));
            let cs = c.to_string();
            if bx > 1 && by > 1 {
                white.push(tile(
                    WHITE,
                    &pn,
                    &pe,
                    &wrap(src.s.as_str()),
                    &wrap(src.w.as_str()),
                ));
            }
            if by > 1 {
                white.push(tile(WHITE, BUL, &pe, BUL, &pe));
                white.push(tile(WHITE, &cs, &e, DIA, &pe));
            } else {
                // Bottom-row supertiles start at conceptual row 2.
                let (x, _) = inst.q.position(bx, by, 1, 2);
                if bx > 1 {
                    north[x - 1] = pn.clone();
                }
                for j in 2..ell {
                    north[x + j - 2] = BUL.to_owned();
                }
                north[x + ell - 2] = cs.clone();
            }
            if bx > 1 {
                white.push(tile(WHITE, &pn, BUL, &pn, BUL));
                white.push(tile(WHITE, &n, &cs, &pn, DIA));
            } else {
                let (_, y) = inst.q.position(bx, by, 2, 1);
                if by > 1 {
                    east[y - 1] = pe.clone();
                }
                for i in 2..ell {
                    east[y + i - 2] = BUL.to_owned();
                }
                east[y + ell - 2] = cs.clone();
            }
        }
    }
    // Gadget columns and rows start from the seed: bul, k, bul.
    let (qw, qh) = (inst.q.width(), inst.q.height());
    for (i, g) in [BUL.to_owned(), k.to_string(), BUL.to_owned()]
        .into_iter()
        .enumerate()
    {
        north[qw - 3 + i] = g.clone();
        east[qh - 3 + i] = g;
    }
    debug_assert!(north.iter().chain(&east).all(|g| !g.is_empty()));

    let mut tiles = theta_base_tiles(k);
    tiles.extend(white);
    let theta = TileSet::new(
        tiles,
        Seed::new(
            north.into_iter().map(HGlue::new).collect(),
            east.into_iter().map(VGlue::new).collect(),
        ),
    );
    if !theta.is_directed() {
        return Err(BlowupError::Structure(
            "blown-up tile set is not directed".into(),
        ));
    }
    let whites = theta.tiles_of_color(&Color::new(WHITE)).count();
    if whites > inst.m_w {
        return Err(BlowupError::Structure(format!(
            "{whites} white tile types exceed the bound {}",
            inst.m_w
        )));
    }
    Ok(theta)
}

/// Per-block interface glues captured while assembling `Q`.
#[derive(Clone, Debug, Default)]
struct Interface {
    a_inputs: Option<(HGlue, VGlue)>,
    c1_east: Option<VGlue>,
    c2_north: Option<HGlue>,
    d2_col: Option<usize>,
    d1_row: Option<usize>,
}

/// Recovers a tile set for the source pattern from a tile set assembling
/// `Q`: one tile per distinct supertile.
pub fn decode_supertiles(theta: &TileSet, inst: &MbpatsInstance) -> Result<TileSet, BlowupError> {
    let q = &inst.q;
    let (wp, hp) = inst.source_dims;
    let compiled = CompiledTileSet::new(theta).map_err(VerifyError::from)?;
    let white = Color::new(WHITE);
    let mut faces: Vec<Interface> = vec![Interface::default(); wp * hp];
    let mut qrow = vec![0u32; q.width()];
    compiled.stream_tiles::<BlowupError>(q.width(), q.height(), |y, row| {
        q.fill_row(y, 1, &mut qrow);
        for (x0, (&ti, &want)) in row.iter().zip(&qrow).enumerate() {
            let x = x0 + 1;
            let t = compiled.tile(ti);
            if t.color != q.palette()[want as usize] {
                return Err(VerifyError::ColorMismatch {
                    x,
                    y,
                    expected: q.palette()[want as usize].clone(),
                    got: t.color.clone(),
                }
                .into());
            }
            let Some(((bx, by), (j, i))) = q.locate(x, y) else {
                continue;
            };
            let ell = inst.ell;
            let face = &mut faces[(by - 1) * wp + bx - 1];
            match (j, i) {
                (1, 1) => face.a_inputs = Some((t.s.clone(), t.w.clone())),
                (1, i) if i == ell => face.c2_north = Some(t.n.clone()),
                (j, 1) if j == ell => face.c1_east = Some(t.e.clone()),
                (j, i) if i == ell && j > 1 && j < ell && t.color == white => face.d2_col = Some(j),
                (j, i) if j == ell && i > 1 && i < ell && t.color == white => face.d1_row = Some(i),
                _ => {}
            }
        }
        Ok(())
    })?;

    let h = |s: String| HGlue::new(s);
    let v = |s: String| VGlue::new(s);
    let mut tiles = Vec::new();
    for by in 1..=hp {
        for bx in 1..=wp {
            let face = &faces[(by - 1) * wp + bx - 1];
            let malformed = |detail: &str| BlowupError::MalformedSupertile {
                x: bx,
                y: by,
                detail: detail.to_owned(),
            };
            let c = match (face.d2_col, face.d1_row) {
                (Some(j), Some(i)) if j == i && j >= 3 => j - 2,
                _ => return Err(malformed("counters missing or inconsistent")),
            };
            let color = inst
                .colors
                .get(c - 1)
                .cloned()
                .ok_or_else(|| malformed("counter exceeds the color count"))?;
            let a_in = face.a_inputs.as_ref();
            let s = match (by, a_in) {
                (1, _) => h(format!("hn@{bx}_0")),
                (_, Some((s, _))) => h(unwrap(s.as_str()).to_owned()),
                _ => h(format!("hn@{bx}_{}", by - 1)),
            };
            let w = match (bx, a_in) {
                (1, _) => v(format!("ve@0_{by}")),
                (_, Some((_, w))) => v(unwrap(w.as_str()).to_owned()),
                _ => v(format!("ve@{}_{by}", bx - 1)),
            };
            let n = match (&face.c2_north, by == hp) {
                (Some(n), false) => h(unwrap(n.as_str()).to_owned()),
                _ => h(format!("hn@{bx}_{by}")),
            };
            let e = match (&face.c1_east, bx == wp) {
                (Some(e), false) => v(unwrap(e.as_str()).to_owned()),
                _ => v(format!("ve@{bx}_{by}")),
            };
            tiles.push(TileType { color, n, e, s, w });
        }
    }
    let seed = Seed::new(
        (1..=wp).map(|x| h(format!("hn@{x}_0"))).collect(),
        (1..=hp).map(|y| v(format!("ve@0_{y}"))).collect(),
    );
    Ok(TileSet::new(tiles, seed))
}

/// Assembles one complete supertile in isolation from its control tile's
/// inputs, with the generic surroundings every complete supertile sees.
/// Returns the tile index grid (row-major from conceptual (1,1)) and the
/// north output at `C2` and east output at `C1`.
pub fn assemble_isolated_supertile(
    theta: &TileSet,
    ell: usize,
    s: &HGlue,
    w: &VGlue,
) -> Result<(Vec<u32>, HGlue, VGlue), BlowupError> {
    let mut north: Vec<HGlue> = vec![HGlue::new(BUL); ell];
    north[0] = s.clone();
    north[ell - 1] = HGlue::new(DIA);
    let mut east: Vec<VGlue> = vec![VGlue::new(BUL); ell];
    east[0] = w.clone();
    east[ell - 1] = VGlue::new(DIA);
    let local = TileSet::new(theta.tiles().to_vec(), Seed::new(north, east));
    let compiled = CompiledTileSet::new(&local).map_err(VerifyError::from)?;
    let mut grid = Vec::with_capacity(ell * ell);
    compiled.stream_tiles::<BlowupError>(ell, ell, |_, row| {
        grid.extend_from_slice(row);
        Ok(())
    })?;
    let c2 = compiled.tile(grid[(ell - 1) * ell]).n.clone();
    let c1 = compiled.tile(grid[ell - 1]).e.clone();
    Ok((grid, c2, c1))
}

/// `qdesc <ell> <wP> <hP>`, then the block color indices with the top row
/// first, then `colors <c1> ... <ck>`.
pub fn write_qdesc(inst: &MbpatsInstance) -> String {
    let (wp, hp) = inst.source_dims;
    let mut out = format!("qdesc {} {} {}\n", inst.ell, wp, hp);
    for by in (1..=hp).rev() {
        let row: Vec<String> = (1..=wp)
            .map(|bx| inst.q.block_color(bx, by).to_string())
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out.push_str("colors");
    for c in &inst.colors {
        out.push(' ');
        out.push_str(&crate::format::escape(c.as_str()));
    }
    out.push('\n');
    out
}

pub fn parse_qdesc(text: &str) -> Result<MbpatsInstance, BlowupError> {
    let err = |line: usize, message: &str| BlowupError::Format {
        line,
        message: message.to_owned(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    let parse = |s: &str| s.parse::<usize>().map_err(|_| err(hl, "bad number"));
    let (ell, wp, hp) = match nums.as_slice() {
        ["qdesc", a, b, c] => (parse(a)?, parse(b)?, parse(c)?),
        _ => return Err(err(hl, "expected `qdesc <ell> <wP> <hP>`")),
    };
    if wp == 0 || hp == 0 {
        return Err(err(hl, "dimensions must be positive"));
    }
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(hp);
    let mut colors = None;
    for (ln, line) in lines {
        if let Some(rest) = line.strip_prefix("colors") {
            let list = rest
                .split_whitespace()
                .map(|t| {
                    crate::format::unescape(t)
                        .and_then(Color::try_new)
                        .ok_or_else(|| err(ln, "bad color token"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            colors = Some(list);
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|_| err(ln, "bad color index")))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != wp {
            return Err(err(ln, "row length differs from wP"));
        }
        rows.push(row);
    }
    let last = text.lines().count().max(1);
    if rows.len() != hp {
        return Err(err(last, "row count differs from hP"));
    }
    let colors = colors.ok_or_else(|| err(last, "missing `colors` line"))?;
    let k = colors.len();
    if ell != ell_for(k) {
        return Err(err(hl, "ell must be 5k+8 for k listed colors"));
    }
    let blocks: Vec<u32> = rows.into_iter().rev().flatten().collect();
    if blocks.iter().any(|&c| c == 0 || c as usize > k) {
        return Err(err(last, "color index out of range"));
    }
    if (1..=k as u32).any(|c| !blocks.contains(&c)) {
        return Err(err(last, "a listed color is not used"));
    }
    let b = bounds_for(k, wp, hp).map_err(|e| err(hl, &e.to_string()))?;
    Ok(MbpatsInstance {
        q: QPattern::new(ell, k, wp, hp, blocks),
        m_b: b.m_b,
        m_w: b.m_w,
        m_g: b.m_g,
        ell,
        source_dims: (wp, hp),
        colors,
    })
}
