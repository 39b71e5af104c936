//! Colored Wang tiles, L-shaped seeds and tile sets.
//!
//! Glues live in two disjoint namespaces. Horizontal glues sit on north and
//! south edges, vertical glues on east and west edges. The two are separate
//! Rust types, so a horizontal and a vertical glue never compare equal even
//! when their tokens coincide.

use std::fmt;

use rustc_hash::FxHashSet;

/// A pattern color. Tokens are non-empty and contain no whitespace.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color(String);

impl Color {
    /// Panics on an empty token or one containing whitespace; use
    /// [`Color::try_new`] for untrusted input.
    pub fn new(token: impl Into<String>) -> Self {
        let token = token.into();
        Self::try_new(token.clone()).unwrap_or_else(|| panic!("invalid color token {token:?}"))
    }

    pub fn try_new(token: impl Into<String>) -> Option<Self> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Color(token))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Color({})", self.0)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Color {
    fn from(s: &str) -> Self {
        Color::new(s)
    }
}

/// Which edges a glue may appear on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Namespace {
    /// North and south edges.
    Horizontal,
    /// East and west edges.
    Vertical,
}

macro_rules! glue_type {
    ($(#[$doc:meta])* $name:ident, $ns:expr) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(String);

        impl $name {
            pub const NAMESPACE: Namespace = $ns;

            /// Panics on an empty token.
            pub fn new(token: impl Into<String>) -> Self {
                let token = token.into();
                assert!(!token.is_empty(), "glue tokens must be non-empty");
                $name(token)
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name::new(s)
            }
        }
    };
}

glue_type!(
    /// Glue on a north or south edge.
    HGlue,
    Namespace::Horizontal
);
glue_type!(
    /// Glue on an east or west edge.
    VGlue,
    Namespace::Vertical
);

/// A colored Wang tile. Inputs are `(s, w)`, outputs are `(n, e)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileType {
    pub color: Color,
    pub n: HGlue,
    pub e: VGlue,
    pub s: HGlue,
    pub w: VGlue,
}

impl TileType {
    pub fn new(
        color: impl Into<Color>,
        n: impl Into<HGlue>,
        e: impl Into<VGlue>,
        s: impl Into<HGlue>,
        w: impl Into<VGlue>,
    ) -> Self {
        TileType {
            color: color.into(),
            n: n.into(),
            e: e.into(),
            s: s.into(),
            w: w.into(),
        }
    }

    pub fn inputs(&self) -> (&HGlue, &VGlue) {
        (&self.s, &self.w)
    }
}

impl fmt::Debug for TileType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} N={} E={} S={} W={}]",
            self.color, self.n, self.e, self.s, self.w
        )
    }
}

/// The L-shaped seed: north glues along the bottom (x = 1..=width) and east
/// glues up the left side (y = 1..=height).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Seed {
    pub north: Vec<HGlue>,
    pub east: Vec<VGlue>,
}

impl Seed {
    pub fn new(north: Vec<HGlue>, east: Vec<VGlue>) -> Self {
        Seed { north, east }
    }

    /// A seed presenting the same glue everywhere.
    pub fn uniform(width: usize, height: usize, north: HGlue, east: VGlue) -> Self {
        Seed {
            north: vec![north; width],
            east: vec![east; height],
        }
    }

    pub fn width(&self) -> usize {
        self.north.len()
    }

    pub fn height(&self) -> usize {
        self.east.len()
    }
}

/// A finite set of tile types together with its seed.
///
/// Construction removes duplicate tile types while keeping first-occurrence
/// order, so indices are stable for a given input sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileSet {
    tiles: Vec<TileType>,
    pub seed: Seed,
}

impl TileSet {
    pub fn new(tiles: impl IntoIterator<Item = TileType>, seed: Seed) -> Self {
        let mut seen = FxHashSet::default();
        let tiles = tiles
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .collect();
        TileSet { tiles, seed }
    }

    pub fn tiles(&self) -> &[TileType] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// True iff no two distinct tile types share their `(s, w)` input pair.
    pub fn is_directed(&self) -> bool {
        let mut inputs = FxHashSet::default();
        self.tiles.iter().all(|t| inputs.insert(t.inputs()))
    }

    /// Tile types grouped by color, in first-occurrence order.
    pub fn count_by_color(&self) -> Vec<(Color, usize)> {
        let mut out: Vec<(Color, usize)> = Vec::new();
        let mut index = rustc_hash::FxHashMap::default();
        for t in &self.tiles {
            let slot = *index.entry(t.color.clone()).or_insert_with(|| {
                out.push((t.color.clone(), 0));
                out.len() - 1
            });
            out[slot].1 += 1;
        }
        out
    }

    pub fn tiles_of_color(&self, color: &Color) -> impl Iterator<Item = &TileType> + use<'_> {
        let color = color.clone();
        self.tiles.iter().filter(move |t| t.color == color)
    }
}
