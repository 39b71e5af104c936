//! Plain-text formats for patterns and tile sets.
//!
//! ```text
//! pattern 3 2
//! a b c
//! c a b
//! ```
//!
//! Rows are listed top row first. Tile sets look like
//!
//! ```text
//! tileset
//! tile red N=x E=y S=x W=y
//! seed north x x x
//! seed east y y
//! ```
//!
//! with the east seed listed bottom to top. Tokens escape whitespace, `=`
//! and `%` as `%xx` (two lowercase hex digits).

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::model::{Color, HGlue, Seed, TileSet, TileType, VGlue};
use crate::pattern::{DensePattern, Pattern};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

pub fn escape(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for ch in token.chars() {
        if ch.is_whitespace() || ch == '=' || ch == '%' {
            let mut buf = [0u8; 4];
            for b in ch.encode_utf8(&mut buf).bytes() {
                let _ = write!(out, "%{b:02x}");
            }
        } else {
            out.push(ch);
        }
    }
    out
}

pub fn unescape(token: &str) -> Option<String> {
    if !token.contains('%') {
        return Some(token.to_owned());
    }
    let bytes = token.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = token.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

/// Numbered, non-blank, comment-free lines. `#` starts a comment line.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_token(line: usize, raw: &str) -> Result<String, FormatError> {
    match unescape(raw) {
        Some(t) if !t.is_empty() => Ok(t),
        _ => Err(err(line, format!("bad token {raw:?}"))),
    }
}

pub fn write_pattern(p: &dyn Pattern, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "pattern {} {}", p.width(), p.height())?;
    let palette: Vec<String> = p.palette().iter().map(|c| escape(c.as_str())).collect();
    let mut row = vec![0u32; p.width()];
    let mut line = String::new();
    for y in (1..=p.height()).rev() {
        p.fill_row(y, 1, &mut row);
        line.clear();
        for (i, &c) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&palette[c as usize]);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn pattern_to_string(p: &dyn Pattern) -> String {
    let mut buf = Vec::new();
    write_pattern(p, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("tokens are UTF-8")
}

pub fn parse_pattern(text: &str) -> Result<DensePattern, FormatError> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (width, height) = match parts.as_slice() {
        ["pattern", w, h] => (
            w.parse::<usize>().map_err(|_| err(hl, "bad width"))?,
            h.parse::<usize>().map_err(|_| err(hl, "bad height"))?,
        ),
        _ => return Err(err(hl, "expected `pattern <width> <height>`")),
    };
    if width == 0 || height == 0 {
        return Err(err(hl, "dimensions must be positive"));
    }
    let mut rows = Vec::with_capacity(height);
    for (ln, line) in lines {
        if rows.len() == height {
            return Err(err(ln, "more rows than the header declares"));
        }
        let row = line
            .split_whitespace()
            .map(|raw| {
                let t = parse_token(ln, raw)?;
                Color::try_new(t).ok_or_else(|| err(ln, format!("bad color {raw:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != width {
            return Err(err(
                ln,
                format!("expected {width} cells, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != height {
        return Err(err(
            text.lines().count().max(1),
            format!("expected {height} rows, found {}", rows.len()),
        ));
    }
    Ok(DensePattern::from_rows_top_first(&rows))
}

pub fn write_tileset(ts: &TileSet, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "tileset")?;
    for t in ts.tiles() {
        writeln!(
            out,
            "tile {} N={} E={} S={} W={}",
            escape(t.color.as_str()),
            escape(t.n.as_str()),
            escape(t.e.as_str()),
            escape(t.s.as_str()),
            escape(t.w.as_str())
        )?;
    }
    let join = |it: &mut dyn Iterator<Item = &str>| {
        it.map(|g| format!(" {}", escape(g))).collect::<String>()
    };
    writeln!(
        out,
        "seed north{}",
        join(&mut ts.seed.north.iter().map(HGlue::as_str))
    )?;
    writeln!(
        out,
        "seed east{}",
        join(&mut ts.seed.east.iter().map(VGlue::as_str))
    )?;
    Ok(())
}

pub fn tileset_to_string(ts: &TileSet) -> String {
    let mut buf = Vec::new();
    write_tileset(ts, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("tokens are UTF-8")
}

pub fn parse_tileset(text: &str) -> Result<TileSet, FormatError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, "tileset")) => {}
        Some((ln, _)) => return Err(err(ln, "expected `tileset`")),
        None => return Err(err(1, "empty input")),
    }
    let mut tiles = Vec::new();
    let mut north = None;
    let mut east = None;
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["tile", color, sides @ ..] => {
                if sides.len() != 4 {
                    return Err(err(ln, "tile needs N=, E=, S=, W="));
                }
                let glue = |want: &str, raw: &str| -> Result<String, FormatError> {
                    match raw.split_once('=') {
                        Some((k, v)) if k == want => parse_token(ln, v),
                        _ => Err(err(ln, format!("expected {want}=<glue>, found {raw:?}"))),
                    }
                };
                let n = glue("N", sides[0])?;
                let e = glue("E", sides[1])?;
                let s = glue("S", sides[2])?;
                let w = glue("W", sides[3])?;
                let color = Color::try_new(parse_token(ln, color)?)
                    .ok_or_else(|| err(ln, format!("bad color {color:?}")))?;
                tiles.push(TileType {
                    color,
                    n: n.into(),
                    e: e.into(),
                    s: s.into(),
                    w: w.into(),
                });
            }
            ["seed", "north", glues @ ..] => {
                let g = glues
                    .iter()
                    .map(|raw| parse_token(ln, raw).map(HGlue::new))
                    .collect::<Result<Vec<_>, _>>()?;
                if north.replace(g).is_some() {
                    return Err(err(ln, "duplicate north seed"));
                }
            }
            ["seed", "east", glues @ ..] => {
                let g = glues
                    .iter()
                    .map(|raw| parse_token(ln, raw).map(VGlue::new))
                    .collect::<Result<Vec<_>, _>>()?;
                if east.replace(g).is_some() {
                    return Err(err(ln, "duplicate east seed"));
                }
            }
            _ => return Err(err(ln, format!("unrecognized line {line:?}"))),
        }
    }
    Ok(TileSet::new(
        tiles,
        Seed::new(north.unwrap_or_default(), east.unwrap_or_default()),
    ))
}

/// Escaped `role -> token` lines.
pub fn write_atlas<'a>(
    entries: impl IntoIterator<Item = (&'a str, &'a Color)>,
    out: &mut impl Write,
) -> io::Result<()> {
    for (role, color) in entries {
        writeln!(out, "{} -> {}", escape(role), escape(color.as_str()))?;
    }
    Ok(())
}

pub fn parse_atlas(text: &str) -> Result<Vec<(String, Color)>, FormatError> {
    content_lines(text)
        .map(|(ln, line)| {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                [role, "->", color] => Ok((
                    parse_token(ln, role)?,
                    Color::try_new(parse_token(ln, color)?).ok_or_else(|| err(ln, "bad color"))?,
                )),
                _ => Err(err(ln, "expected `<role> -> <color>`")),
            }
        })
        .collect()
}
