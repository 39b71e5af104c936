//! Static PPM and SVG renders of patterns.

use std::io::{self, Write};

use pats::{Color, Pattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ImageFormat {
    Ppm,
    Svg,
}

impl ImageFormat {
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "ppm" => Some(ImageFormat::Ppm),
            "svg" => Some(ImageFormat::Svg),
            _ => None,
        }
    }
}

fn fixed_rgb(c: &Color) -> Option<[u8; 3]> {
    match c.as_str() {
        "black" => Some([0, 0, 0]),
        "white" => Some([0xff, 0xff, 0xff]),
        "gray" | "grey" => Some([0xaa, 0xaa, 0xaa]),
        _ => None,
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = (h % 360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|u| ((u + m) * 255.0).round() as u8)
}

/// One RGB value per palette entry, pairwise distinct. Black, white and
/// gray get fixed values; other colors get a hue from a hash of their
/// token, nudged along the hue circle on collision.
pub fn palette_rgb(palette: &[Color]) -> Vec<[u8; 3]> {
    let mut used = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(palette.len());
    for c in palette {
        let rgb = fixed_rgb(c)
            .filter(|v| !used.contains(v))
            .unwrap_or_else(|| {
                let h = fnv1a(c.as_str());
                let mut hue = (h % 3600) as f64 / 10.0;
                let mut tries = 0u32;
                loop {
                    let value = 0.95 - 0.1 * f64::from(tries / 360 % 6);
                    let sat = 0.55 + 0.07 * f64::from((h >> 16) as u32 % 6);
                    let rgb = hsv(hue, sat, value);
                    if !used.contains(&rgb) {
                        break rgb;
                    }
                    hue = (hue + 137.507_764) % 360.0;
                    tries += 1;
                }
            });
        used.insert(rgb);
        out.push(rgb);
    }
    out
}

/// Binary PPM, streamed row by row from the top.
pub fn write_ppm(p: &dyn Pattern, cell: usize, out: &mut impl Write) -> io::Result<()> {
    let rgb = palette_rgb(p.palette());
    let (w, h) = (p.width(), p.height());
    write!(out, "P6\n{} {}\n255\n", w * cell, h * cell)?;
    let mut row = vec![0u32; w];
    let mut line = Vec::with_capacity(w * cell * 3);
    for y in (1..=h).rev() {
        p.fill_row(y, 1, &mut row);
        line.clear();
        for &c in &row {
            for _ in 0..cell {
                line.extend_from_slice(&rgb[c as usize]);
            }
        }
        for _ in 0..cell {
            out.write_all(&line)?;
        }
    }
    Ok(())
}

/// SVG with one rectangle per horizontal run of equal colors.
pub fn write_svg(p: &dyn Pattern, cell: usize, out: &mut impl Write) -> io::Result<()> {
    let rgb = palette_rgb(p.palette());
    let (w, h) = (p.width(), p.height());
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" shape-rendering="crispEdges">"#,
        w * cell,
        h * cell
    )?;
    let mut row = vec![0u32; w];
    for y in (1..=h).rev() {
        p.fill_row(y, 1, &mut row);
        let top = (h - y) * cell;
        let mut start = 0;
        while start < w {
            let c = row[start];
            let end = row[start..]
                .iter()
                .position(|&d| d != c)
                .map_or(w, |n| start + n);
            let [r, g, b] = rgb[c as usize];
            writeln!(
                out,
                r##"<rect x="{}" y="{top}" width="{}" height="{cell}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                start * cell,
                (end - start) * cell
            )?;
            start = end;
        }
    }
    writeln!(out, "</svg>")
}
