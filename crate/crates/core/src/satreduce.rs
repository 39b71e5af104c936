//! From a 3-CNF formula to a pattern whose optimal tile sets encode
//! satisfying assignments.
//!
//! The pattern is a row of gadgets (`p`, `q1..q5`, then `r1..r3` per
//! variable and `s` per clause) separated by columns of unique colors and
//! framed by unique top and bottom rows. Every color except `or` needs
//! exactly one tile type; `or` needs four, which behave as an or-gate on the
//! glues `0`/`1`.
//!
//! Glue tokens: `0`, `1`, letters `A`..`D`, and the shapes `bul`, `dia`,
//! `str`, `tri`. Literal and variable glues are `lit(x1)`, `lit(~x1)` and
//! `var(x1)`. Gadget tile sides without a fixed glue always face a
//! unique-color cell; they are named `blank(<color>,<side>)` so a gadget
//! tile keeps one type however often it occurs. Edges between two unique
//! cells are named by position: `h@x_y` is the edge above cell `(x,y)` and
//! `v@x_y` the edge right of it.

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::model::{Color, HGlue, Seed, TileSet, TileType, VGlue};
use crate::pattern::{color_census, DensePattern, Pattern};
use crate::sat::{Cnf3, SatError, VarAssignment};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReduceError {
    #[error("the assignment does not satisfy the formula")]
    UnsatisfyingAssignment,
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("expected exactly one tile of color {color}, found {count}")]
    AmbiguousColor { color: Color, count: usize },
    #[error("invalid gadget: {0}")]
    InvalidGadget(String),
    #[error("gadget tiles do not fit at ({x},{y}): {detail}")]
    Inconsistent { x: usize, y: usize, detail: String },
}

/// A subpattern of the reduction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Gadget {
    P,
    /// `q1..=q5`.
    Q(u8),
    /// `r1..=r3` for the named variable.
    R(u8, String),
    /// Clause gadget over three `(variable, negated)` literals.
    S([(String, bool); 3]),
}

impl Gadget {
    pub fn name(&self) -> String {
        match self {
            Gadget::P => "p".into(),
            Gadget::Q(i) => format!("q{i}"),
            Gadget::R(j, v) => format!("r{j}({v})"),
            Gadget::S(lits) => {
                let l: Vec<String> = lits.iter().map(|(v, n)| lit_name(v, *n)).collect();
                format!("s({})", l.join("|"))
            }
        }
    }
}

fn lit_name(var: &str, negated: bool) -> String {
    if negated {
        format!("~{var}")
    } else {
        var.to_owned()
    }
}

/// The or-gate tiles as `(n, e, s, w)`. Index `2*w + s` picks the tile for
/// inputs `s`, `w`.
pub const OR_TILES: [(&str, &str, &str, &str); 4] = [
    ("A", "0", "0", "0"),
    ("B", "1", "1", "0"),
    ("C", "1", "0", "1"),
    ("D", "1", "1", "1"),
];

pub const OR: &str = "or";

fn or_index(s: &str, w: &str) -> Option<usize> {
    let bit = |g: &str| match g {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    };
    Some(2 * bit(w)? + bit(s)?)
}

type StaticTile = (
    &'static str,
    Option<&'static str>,
    Option<&'static str>,
    Option<&'static str>,
    Option<&'static str>,
);

/// Fixed gadget tiles with formula-independent glues, `(color, n, e, s, w)`;
/// `None` marks a side facing the unique frame.
#[rustfmt::skip]
const STATIC_TILES: &[StaticTile] = &[
    ("X1", Some("0"), Some("0"), None, None),
    ("X2", Some("0"), Some("0"), None, Some("0")),
    ("X3", Some("0"), Some("1"), None, Some("1")),
    ("X4", Some("0"), Some("1"), None, Some("1")),
    ("X5", Some("1"), Some("0"), None, Some("1")),
    ("X6", Some("1"), Some("0"), None, Some("0")),
    ("X7", Some("1"), Some("1"), None, Some("1")),
    ("X8", Some("1"), Some("1"), None, Some("1")),
    ("Y1", None, Some("0"), Some("A"), Some("0")),
    ("Y2", None, Some("0"), Some("B"), Some("0")),
    ("Y3", None, Some("0"), Some("C"), Some("0")),
    ("Y4", None, Some("0"), Some("D"), Some("0")),
    ("Y5", None, Some("0"), Some("A"), Some("1")),
    ("Y6", None, Some("0"), Some("B"), Some("1")),
    ("Y7", None, Some("0"), Some("C"), Some("1")),
    ("Y8", None, None, Some("D"), Some("1")),
    ("right0_dark", Some("bul"), Some("0"), Some("bul"), Some("0")),
    ("right0_white", Some("dia"), Some("0"), Some("dia"), Some("0")),
    ("right1_dark", Some("bul"), Some("1"), Some("bul"), Some("1")),
    ("right1_white", Some("dia"), Some("1"), Some("dia"), Some("1")),
    ("up0_dark", Some("0"), Some("bul"), Some("0"), Some("bul")),
    ("up0_white", Some("0"), Some("dia"), Some("0"), Some("dia")),
    ("up1_dark", Some("1"), Some("bul"), Some("1"), Some("bul")),
    ("up1_white", Some("1"), Some("dia"), Some("1"), Some("dia")),
    ("a", Some("dia"), Some("dia"), Some("dia"), Some("dia")),
    ("b_dark", Some("str"), None, None, Some("bul")),
    ("b_gray", Some("str"), None, Some("str"), Some("dia")),
    ("c_dark", None, Some("str"), Some("bul"), None),
    ("c_gray", None, Some("str"), Some("dia"), Some("str")),
    ("d", None, None, Some("str"), Some("str")),
    ("plus", Some("str"), None, Some("str"), Some("1")),
    ("minus", Some("str"), None, Some("str"), Some("0")),
    ("A", None, Some("str"), Some("A"), Some("str")),
    ("B", None, Some("str"), Some("B"), Some("str")),
    ("C", None, Some("str"), Some("C"), Some("str")),
    ("D", None, Some("str"), Some("D"), Some("str")),
    ("Z1", Some("bul"), Some("bul"), None, None),
    ("Z2", Some("dia"), Some("bul"), None, Some("bul")),
    ("Z3", Some("bul"), Some("dia"), Some("bul"), None),
    ("Z4", Some("tri"), Some("dia"), None, None),
];

/// A non-unique cell of a gadget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GadgetCell {
    /// An or-gate cell; `Some(i)` when its inputs come from the frame, in
    /// which case the tile `OR_TILES[i]` is the one the frame must feed.
    Or(Option<usize>),
    Static(&'static str),
    /// `v_white(v)`: north glue is the value of `v`.
    VWhite(String),
    /// `neg_white(v)`: north glue is the negated value of `v`.
    NegWhite(String),
    VGray(String),
    VDark(String),
    VTilde(String),
}

impl GadgetCell {
    pub fn color(&self) -> Color {
        match self {
            GadgetCell::Or(_) => Color::new(OR),
            GadgetCell::Static(c) => Color::new(*c),
            GadgetCell::VWhite(v) => Color::new(format!("v_white({v})")),
            GadgetCell::NegWhite(v) => Color::new(format!("neg_white({v})")),
            GadgetCell::VGray(v) => Color::new(format!("v_gray({v})")),
            GadgetCell::VDark(v) => Color::new(format!("v_dark({v})")),
            GadgetCell::VTilde(v) => Color::new(format!("v_tilde({v})")),
        }
    }

    /// Glues `(n, e, s, w)` of the fixed tile for this cell, with blank
    /// sides named. `None` for unforced or cells.
    fn tile(&self, f: &VarAssignment) -> Option<TileType> {
        let color = self.color();
        let bit = |v: &str, flip: bool| -> String {
            let value = f.get(v).copied().unwrap_or(false) != flip;
            u8::from(value).to_string()
        };
        let (n, e, s, w): (
            Option<String>,
            Option<String>,
            Option<String>,
            Option<String>,
        ) = match self {
            GadgetCell::Or(None) => return None,
            GadgetCell::Or(Some(i)) => {
                let (n, e, s, w) = OR_TILES[*i];
                (
                    Some(n.into()),
                    Some(e.into()),
                    Some(s.into()),
                    Some(w.into()),
                )
            }
            GadgetCell::Static(name) => {
                let &(_, n, e, s, w) = STATIC_TILES
                    .iter()
                    .find(|t| t.0 == *name)
                    .expect("static gadget tile");
                let own = |g: Option<&str>| g.map(str::to_owned);
                (own(n), own(e), own(s), own(w))
            }
            GadgetCell::VWhite(v) => (
                Some(bit(v, false)),
                Some("dia".into()),
                Some(format!("lit({v})")),
                Some("dia".into()),
            ),
            GadgetCell::NegWhite(v) => (
                Some(bit(v, true)),
                Some("dia".into()),
                Some(format!("lit(~{v})")),
                Some("dia".into()),
            ),
            GadgetCell::VGray(v) => (None, Some(format!("var({v})")), Some("tri".into()), None),
            GadgetCell::VDark(v) => (None, None, Some(bit(v, false)), Some(format!("var({v})"))),
            GadgetCell::VTilde(v) => (None, None, Some(bit(v, true)), Some(format!("var({v})"))),
        };
        let blank =
            |g: Option<String>, side: &str| g.unwrap_or_else(|| format!("blank({color},{side})"));
        Some(TileType {
            n: HGlue::new(blank(n, "N")),
            e: VGlue::new(blank(e, "E")),
            s: HGlue::new(blank(s, "S")),
            w: VGlue::new(blank(w, "W")),
            color,
        })
    }
}

/// Gadget cells, rows bottom to top.
pub fn gadget_cells(g: &Gadget) -> Result<Vec<Vec<GadgetCell>>, ReduceError> {
    use GadgetCell::{Or, Static as St};
    Ok(match g {
        Gadget::P => {
            // Bottom row or-cells read the frame; the pattern forces them to
            // A,B,C,D,A,B,C,D. The top-left one reads the frame too.
            let xs = ["X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8"];
            let ys = ["Y1", "Y2", "Y3", "Y4", "Y5", "Y6", "Y7", "Y8"];
            let bottom = (0..8).flat_map(|i| [St(xs[i]), Or(Some(i % 4))]).collect();
            let top = (0..8)
                .flat_map(|i| [Or((i == 0).then_some(0)), St(ys[i])])
                .collect();
            vec![bottom, top]
        }
        Gadget::Q(i @ 1..=4) => {
            let (w, s, sign, letter) = [
                ("0", "0", "minus", "A"),
                ("0", "1", "plus", "B"),
                ("1", "0", "plus", "C"),
                ("1", "1", "plus", "D"),
            ][usize::from(*i) - 1];
            let up = |shade: &str| st(&format!("up{s}_{shade}"));
            let right = |shade: &str| st(&format!("right{w}_{shade}"));
            vec![
                vec![St("Z1"), St("Z2"), up("dark"), St("b_dark")],
                vec![St("Z3"), St("a"), up("white"), St("b_gray")],
                vec![right("dark"), right("white"), Or(None), st(sign)],
                vec![St("c_dark"), St("c_gray"), st(letter), St("d")],
            ]
        }
        Gadget::Q(5) => vec![
            vec![
                St("a"),
                St("up0_white"),
                St("up1_white"),
                St("up0_white"),
                St("up1_white"),
                St("b_gray"),
            ],
            vec![
                St("right0_white"),
                Or(None),
                Or(None),
                Or(None),
                Or(None),
                St("plus"),
            ],
            vec![St("c_gray"), St("A"), St("B"), St("C"), St("D"), St("d")],
        ],
        Gadget::R(1, v) => vec![
            vec![St("Z4"), GadgetCell::VWhite(v.clone())],
            vec![GadgetCell::VGray(v.clone()), GadgetCell::VDark(v.clone())],
        ],
        Gadget::R(2, v) => vec![
            vec![St("Z4"), GadgetCell::NegWhite(v.clone())],
            vec![GadgetCell::VGray(v.clone()), GadgetCell::VTilde(v.clone())],
        ],
        Gadget::R(3, v) => vec![
            vec![
                St("a"),
                GadgetCell::VWhite(v.clone()),
                GadgetCell::NegWhite(v.clone()),
                St("b_gray"),
            ],
            vec![St("right0_white"), Or(None), Or(None), St("plus")],
        ],
        Gadget::S(lits) => {
            let mut bottom = vec![St("a")];
            bottom.extend(lits.iter().map(|(v, neg)| {
                if *neg {
                    GadgetCell::NegWhite(v.clone())
                } else {
                    GadgetCell::VWhite(v.clone())
                }
            }));
            bottom.push(St("b_gray"));
            vec![
                bottom,
                vec![St("right0_white"), Or(None), Or(None), Or(None), St("plus")],
            ]
        }
        other => return Err(ReduceError::InvalidGadget(format!("{other:?}"))),
    })
}

fn st(name: &str) -> GadgetCell {
    let &(n, ..) = STATIC_TILES
        .iter()
        .find(|t| t.0 == name)
        .unwrap_or_else(|| panic!("no static tile {name}"));
    GadgetCell::Static(n)
}

/// The colors of a gadget on its own.
pub fn gen_subpattern(g: &Gadget) -> Result<DensePattern, ReduceError> {
    let rows = gadget_cells(g)?;
    Ok(DensePattern::from_fn(rows[0].len(), rows.len(), |x, y| {
        rows[y - 1][x - 1].color()
    }))
}

/// Where a gadget sits in the reduction pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub gadget: Gadget,
    /// Bottom-left cell.
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

/// Gadgets in left-to-right order for a formula.
pub fn gadget_sequence(f: &Cnf3) -> Vec<Gadget> {
    let mut out = vec![Gadget::P];
    out.extend((1..=5).map(Gadget::Q));
    for v in f.variables() {
        out.extend((1..=3).map(|j| Gadget::R(j, v.clone())));
    }
    for c in f.clauses() {
        let lits = c.map(|l| (f.variables()[l.var].clone(), l.negated));
        out.push(Gadget::S(lits));
    }
    out
}

pub const HEIGHT: usize = 6;
/// Row of each gadget's bottom row.
const GADGET_ROW: usize = 2;

pub fn expected_width(vars: usize, clauses: usize) -> usize {
    45 + 11 * vars + 6 * clauses
}

struct Layout {
    width: usize,
    /// Row-major from (1,1); `None` is a unique cell.
    cells: Vec<Option<GadgetCell>>,
    placements: Vec<Placement>,
}

impl Layout {
    fn new(f: &Cnf3) -> Layout {
        let gadgets: Vec<(Gadget, Vec<Vec<GadgetCell>>)> = gadget_sequence(f)
            .into_iter()
            .map(|g| {
                let cells = gadget_cells(&g).expect("sequence holds valid gadgets");
                (g, cells)
            })
            .collect();
        let width = 1 + gadgets.iter().map(|(_, c)| c[0].len() + 1).sum::<usize>();
        let mut cells = vec![None; width * HEIGHT];
        let mut placements = Vec::new();
        let mut x0 = 2;
        for (g, rows) in gadgets {
            let (w, h) = (rows[0].len(), rows.len());
            for (dy, row) in rows.into_iter().enumerate() {
                for (dx, cell) in row.into_iter().enumerate() {
                    let (x, y) = (x0 + dx, GADGET_ROW + dy);
                    cells[(y - 1) * width + x - 1] = Some(cell);
                }
            }
            placements.push(Placement {
                gadget: g,
                x: x0,
                y: GADGET_ROW,
                width: w,
                height: h,
            });
            x0 += w + 1;
        }
        debug_assert_eq!(x0, width + 1);
        Layout {
            width,
            cells,
            placements,
        }
    }

    fn at(&self, x: usize, y: usize) -> Option<&GadgetCell> {
        self.cells[(y - 1) * self.width + x - 1].as_ref()
    }
}

fn unique_color(x: usize, y: usize) -> Color {
    Color::new(format!("u@{x}_{y}"))
}

/// The reduction pattern with its tile budget.
#[derive(Clone, Debug)]
pub struct PatsInstance {
    pub pattern: DensePattern,
    /// Number of colors plus three.
    pub m: usize,
    pub formula: Cnf3,
    /// `role -> color`, roles being fixed color names and `unique@(x,y)`.
    pub color_atlas: Vec<(String, Color)>,
    pub placements: Vec<Placement>,
}

impl PatsInstance {
    pub fn color_of(&self, role: &str) -> Option<&Color> {
        self.color_atlas
            .iter()
            .find(|(r, _)| r == role)
            .map(|(_, c)| c)
    }
}

pub fn build_pattern(f: &Cnf3) -> PatsInstance {
    let layout = Layout::new(f);
    let pattern = DensePattern::from_fn(layout.width, HEIGHT, |x, y| match layout.at(x, y) {
        Some(cell) => cell.color(),
        None => unique_color(x, y),
    });
    let census = color_census(&pattern);
    let mut color_atlas = Vec::with_capacity(census.num_colors());
    let mut seen = rustc_hash::FxHashSet::default();
    for y in 1..=HEIGHT {
        for x in 1..=layout.width {
            let c = pattern.cell(x, y);
            if !seen.insert(c.clone()) {
                continue;
            }
            let role = match layout.at(x, y) {
                Some(_) => c.as_str().to_owned(),
                None => format!("unique@({x},{y})"),
            };
            color_atlas.push((role, c.clone()));
        }
    }
    PatsInstance {
        m: census.num_colors() + 3,
        pattern,
        formula: f.clone(),
        color_atlas,
        placements: layout.placements,
    }
}

/// The optimal tile set for a satisfying assignment: four or-gate tiles
/// plus one tile per other color.
pub fn witness_tileset(f: &Cnf3, assignment: &VarAssignment) -> Result<TileSet, ReduceError> {
    if !f.eval(assignment)? {
        return Err(ReduceError::UnsatisfyingAssignment);
    }
    let layout = Layout::new(f);
    let (w, h) = (layout.width, HEIGHT);
    let fixed: Vec<Option<TileType>> = layout
        .cells
        .iter()
        .map(|c| c.as_ref().and_then(|c| c.tile(assignment)))
        .collect();
    let fixed_at = |x: usize, y: usize| fixed[(y - 1) * w + x - 1].as_ref();
    let h_coord = |x: usize, y: usize| HGlue::new(format!("h@{x}_{y}"));
    let v_coord = |x: usize, y: usize| VGlue::new(format!("v@{x}_{y}"));

    let inconsistent = |x, y, detail: String| ReduceError::Inconsistent { x, y, detail };
    let mut north: Vec<HGlue> = (1..=w).map(|x| h_coord(x, 0)).collect();
    let mut tiles: Vec<TileType> = Vec::new();
    for y in 1..=h {
        let mut west = v_coord(0, y);
        for x in 1..=w {
            let south = north[x - 1].clone();
            let tile = match layout.at(x, y) {
                None => {
                    // A unique cell feeds its gadget neighbors what they need.
                    let n = match (y < h).then(|| layout.at(x, y + 1)).flatten() {
                        Some(_) => fixed_at(x, y + 1).map(|t| t.s.clone()).ok_or_else(|| {
                            inconsistent(x, y + 1, "frame feeds a free or cell".into())
                        })?,
                        None => h_coord(x, y),
                    };
                    let e = match (x < w).then(|| layout.at(x + 1, y)).flatten() {
                        Some(_) => fixed_at(x + 1, y).map(|t| t.w.clone()).ok_or_else(|| {
                            inconsistent(x + 1, y, "frame feeds a free or cell".into())
                        })?,
                        None => v_coord(x, y),
                    };
                    TileType {
                        color: unique_color(x, y),
                        n,
                        e,
                        s: south,
                        w: west,
                    }
                }
                Some(GadgetCell::Or(None)) => {
                    let i = or_index(south.as_str(), west.as_str()).ok_or_else(|| {
                        inconsistent(x, y, format!("or inputs S={south} W={west}"))
                    })?;
                    let (n, e, s, w) = OR_TILES[i];
                    TileType::new(OR, n, e, s, w)
                }
                Some(_) => {
                    let t = fixed_at(x, y).expect("fixed gadget cell").clone();
                    if t.s != south || t.w != west {
                        return Err(inconsistent(
                            x,
                            y,
                            format!(
                                "{} needs S={} W={}, got S={south} W={west}",
                                t.color, t.s, t.w
                            ),
                        ));
                    }
                    t
                }
            };
            north[x - 1] = tile.n.clone();
            west = tile.e.clone();
            tiles.push(tile);
        }
    }
    let seed = Seed::new(
        (1..=w).map(|x| h_coord(x, 0)).collect(),
        (1..=h).map(|y| v_coord(0, y)).collect(),
    );
    Ok(TileSet::new(tiles, seed))
}

fn single_tile<'a>(t: &'a TileSet, color: &Color) -> Result<&'a TileType, ReduceError> {
    let mut it = t.tiles_of_color(color);
    match (it.next(), it.count()) {
        (Some(tile), 0) => Ok(tile),
        (first, rest) => Err(ReduceError::AmbiguousColor {
            color: color.clone(),
            count: usize::from(first.is_some()) + rest,
        }),
    }
}

/// Reads a variable assignment off a tile set for the reduction pattern:
/// `v` is true iff the north glue of the `v_white(v)` tile equals that of
/// the `up1_white` tile.
pub fn extract_assignment(t: &TileSet, inst: &PatsInstance) -> Result<VarAssignment, ReduceError> {
    let role = |r: &str| inst.color_of(r).cloned().unwrap_or_else(|| Color::new(r));
    let one = single_tile(t, &role("up1_white"))?.n.clone();
    let mut out = VarAssignment::new();
    for v in inst.formula.variables() {
        let pos = single_tile(t, &role(&format!("v_white({v})")))?;
        single_tile(t, &role(&format!("neg_white({v})")))?;
        out.insert(v.clone(), pos.n == one);
    }
    Ok(out)
}

/// Per-color tile counts keyed by color, for checking multiplicities.
pub fn tiles_per_color(t: &TileSet) -> FxHashMap<Color, usize> {
    t.count_by_color().into_iter().collect()
}
