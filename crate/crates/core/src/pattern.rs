//! Patterns: grids of colors with (1,1) at the bottom left.
//!
//! A pattern is either a dense grid or a procedural generator. Algorithms
//! that scan a whole pattern go row by row through [`Pattern::fill_row`] so
//! procedural backings never have to be materialized.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::model::Color;

pub trait Pattern: Send + Sync {
    fn width(&self) -> usize;
    fn height(&self) -> usize;

    /// Every color the pattern may use. Cells refer to colors by index.
    fn palette(&self) -> &[Color];

    /// Palette index of the color at `(x, y)`. Coordinates are 1-based.
    fn color_index(&self, x: usize, y: usize) -> u32;

    /// Writes the palette indices of row `y`, columns `x0..x0 + out.len()`.
    fn fill_row(&self, y: usize, x0: usize, out: &mut [u32]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.color_index(x0 + i, y);
        }
    }

    fn cell(&self, x: usize, y: usize) -> &Color {
        &self.palette()[self.color_index(x, y) as usize]
    }

    fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }
}

/// A pattern stored cell by cell.
#[derive(Clone)]
pub struct DensePattern {
    width: usize,
    height: usize,
    palette: Vec<Color>,
    /// Row-major from (1,1): index `(y-1)*width + (x-1)`.
    cells: Vec<u32>,
}

impl DensePattern {
    /// Builds a pattern from a cell function. The palette lists colors in
    /// order of first appearance, scanning rows bottom to top and each row
    /// left to right.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Color) -> Self {
        assert!(
            width > 0 && height > 0,
            "pattern dimensions must be positive"
        );
        let mut palette = Vec::new();
        let mut index: FxHashMap<Color, u32> = FxHashMap::default();
        let mut cells = Vec::with_capacity(width * height);
        for y in 1..=height {
            for x in 1..=width {
                let c = f(x, y);
                let id = match index.get(&c) {
                    Some(&id) => id,
                    None => {
                        let id = palette.len() as u32;
                        palette.push(c.clone());
                        index.insert(c, id);
                        id
                    }
                };
                cells.push(id);
            }
        }
        DensePattern {
            width,
            height,
            palette,
            cells,
        }
    }

    /// Rows given top row first, as they would be drawn.
    pub fn from_rows_top_first(rows: &[Vec<Color>]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == width), "ragged pattern rows");
        DensePattern::from_fn(width, height, |x, y| rows[height - y][x - 1].clone())
    }

    pub fn from_pattern(p: &dyn Pattern) -> Self {
        let mut row = vec![0u32; p.width()];
        let mut cells = Vec::with_capacity(p.width() * p.height());
        for y in 1..=p.height() {
            p.fill_row(y, 1, &mut row);
            cells.extend_from_slice(&row);
        }
        // Re-index so the palette keeps the first-appearance convention.
        let palette = p.palette();
        DensePattern::from_fn(p.width(), p.height(), |x, y| {
            palette[cells[(y - 1) * p.width() + x - 1] as usize].clone()
        })
    }

    /// Copy with one cell recolored.
    pub fn with_cell(&self, x: usize, y: usize, color: Color) -> Self {
        DensePattern::from_fn(self.width, self.height, |cx, cy| {
            if (cx, cy) == (x, y) {
                color.clone()
            } else {
                self.cell(cx, cy).clone()
            }
        })
    }

    /// The sub-rectangle with bottom-left corner `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Self {
        DensePattern::from_fn(width, height, |x, y| {
            self.cell(x0 + x - 1, y0 + y - 1).clone()
        })
    }
}

impl Pattern for DensePattern {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn palette(&self) -> &[Color] {
        &self.palette
    }

    fn color_index(&self, x: usize, y: usize) -> u32 {
        debug_assert!((1..=self.width).contains(&x) && (1..=self.height).contains(&y));
        self.cells[(y - 1) * self.width + x - 1]
    }

    fn fill_row(&self, y: usize, x0: usize, out: &mut [u32]) {
        let start = (y - 1) * self.width + x0 - 1;
        out.copy_from_slice(&self.cells[start..start + out.len()]);
    }
}

impl PartialEq for DensePattern {
    fn eq(&self, other: &Self) -> bool {
        same_cells(self, other)
    }
}

impl Eq for DensePattern {}

impl fmt::Debug for DensePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DensePattern {}x{}", self.width, self.height)?;
        for y in (1..=self.height).rev() {
            let row: Vec<&str> = (1..=self.width).map(|x| self.cell(x, y).as_str()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Cell-by-cell color equality of two patterns of any backing.
pub fn same_cells(a: &dyn Pattern, b: &dyn Pattern) -> bool {
    if a.width() != b.width() || a.height() != b.height() {
        return false;
    }
    let (pa, pb) = (a.palette(), b.palette());
    let mut ra = vec![0u32; a.width()];
    let mut rb = vec![0u32; b.width()];
    (1..=a.height()).all(|y| {
        a.fill_row(y, 1, &mut ra);
        b.fill_row(y, 1, &mut rb);
        ra.iter()
            .zip(&rb)
            .all(|(&i, &j)| pa[i as usize] == pb[j as usize])
    })
}

/// Occurrence counts per color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    /// Colors that occur at least once, in palette order.
    pub counts: Vec<(Color, u64)>,
    /// Colors occurring exactly once.
    pub unique: Vec<Color>,
}

impl Census {
    pub fn num_colors(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, c: &Color) -> u64 {
        self.counts
            .iter()
            .find(|(k, _)| k == c)
            .map_or(0, |&(_, n)| n)
    }

    pub fn is_unique(&self, c: &Color) -> bool {
        self.count(c) == 1
    }
}

fn count_rows(p: &dyn Pattern, rows: std::ops::Range<usize>) -> Vec<u64> {
    let mut counts = vec![0u64; p.palette().len()];
    let mut row = vec![0u32; p.width()];
    for y in rows {
        p.fill_row(y, 1, &mut row);
        for &c in &row {
            counts[c as usize] += 1;
        }
    }
    counts
}

/// Exact color multiset of `p`, scanning row by row.
pub fn color_census(p: &dyn Pattern) -> Census {
    #[cfg(feature = "parallel")]
    let counts = {
        use rayon::prelude::*;
        let h = p.height();
        let chunk = (h / (4 * rayon::current_num_threads())).max(1);
        let starts: Vec<usize> = (1..=h).step_by(chunk).collect();
        starts
            .into_par_iter()
            .map(|y0| count_rows(p, y0..(y0 + chunk).min(h + 1)))
            .reduce(
                || vec![0u64; p.palette().len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    #[cfg(not(feature = "parallel"))]
    let counts = count_rows(p, 1..p.height() + 1);

    let counts: Vec<(Color, u64)> = p
        .palette()
        .iter()
        .cloned()
        .zip(counts)
        .filter(|&(_, n)| n > 0)
        .collect();
    let unique = counts
        .iter()
        .filter(|&&(_, n)| n == 1)
        .map(|(c, _)| c.clone())
        .collect();
    Census { counts, unique }
}
