//! `pats`: build, verify, blow up, decode and solve tile assembly instances.
//!
//! Exit status is 0 on success, 1 when a valid run produces a negative
//! answer (unsatisfiable, infeasible, verification failure) and 2 on usage,
//! parse or I/O errors.

mod render;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use pats::format::{
    parse_pattern, parse_tileset, pattern_to_string, tileset_to_string, write_atlas,
};
use pats::sat::{parse_dimacs, solve_sat, Cnf3, VarAssignment};
use pats::satreduce::{build_pattern, extract_assignment, witness_tileset};
use pats::solver::{minimize, solve_any, solve_exact, SearchBudget, Status};
use pats::superreduce::{
    build_q, decode_supertiles, parse_qdesc, validate_source_strict, witness_theta, write_qdesc,
    MbpatsInstance,
};
use pats::{
    assemble, cell_tileset, glue_isomorphic, pattern_of, verify_stream, verify_stream_parallel,
    Color, DensePattern, Pattern, TileSet,
};

use render::{write_ppm, write_svg, ImageFormat};

/// Dense files above this many cells need `--allow-large`.
const DENSE_LIMIT: u64 = 10_000_000;

#[derive(Parser)]
#[command(name = "pats", version, about = "Patterned tile self-assembly toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the reduction pattern of a 3-CNF formula.
    Sat2pats {
        cnf: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the `role -> color` map.
        #[arg(long)]
        atlas: Option<PathBuf>,
    },
    /// Write the optimal tile set for a satisfying assignment.
    WitnessPats {
        cnf: PathBuf,
        /// File of `name=0|1` lines.
        #[arg(long, conflicts_with = "solve")]
        assignment: Option<PathBuf>,
        /// Find an assignment with the built-in SAT solver (the default).
        #[arg(long)]
        solve: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Read the variable assignment encoded by a tile set.
    ExtractAssignment { tileset: PathBuf, cnf: PathBuf },
    /// Assemble a tile set into a pattern.
    Assemble {
        tileset: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check that a tile set assembles a pattern or a blown-up description.
    Verify {
        tileset: PathBuf,
        target: PathBuf,
        /// Pipeline the sweep over column strips on worker threads.
        #[arg(long)]
        stream: bool,
    },
    /// Blow a pattern up into its three-color description.
    Pats2mbpats {
        pattern: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the blown-up pattern cell by cell.
        #[arg(long)]
        dense: Option<PathBuf>,
        /// Permit dense output above ten million cells.
        #[arg(long)]
        allow_large: bool,
        /// Require the pattern to be exactly the reduction pattern of this formula.
        #[arg(long)]
        strict_membership: Option<PathBuf>,
    },
    /// Build the three-color tile set from a tile set for the source pattern.
    WitnessMbpats {
        tileset: PathBuf,
        pattern: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Recover a source tile set from a three-color tile set.
    DecodeSupertiles {
        theta: PathBuf,
        qdesc: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Find the fewest tile types assembling a small pattern.
    SolveMin {
        pattern: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[command(flatten)]
        limits: Limits,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Search for a tile set within per-color and total bounds.
    SolveBounded {
        pattern: PathBuf,
        /// `<color>=<n>`; may be repeated.
        #[arg(long = "bound", value_parser = parse_bound)]
        bounds: Vec<(Color, usize)>,
        #[arg(long)]
        total: Option<usize>,
        /// Explore branches on all threads; returns any witness.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        limits: Limits,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the whole pipeline on a formula and check every step.
    Roundtrip {
        cnf: PathBuf,
        /// Blow up a small all-distinct pattern instead of the reduction pattern.
        #[arg(long, conflicts_with = "full")]
        toy: bool,
        /// Blow up the reduction pattern itself and verify by streaming.
        #[arg(long)]
        full: bool,
    },
    /// Render a pattern or blown-up description as an image.
    Render {
        target: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<ImageFormat>,
        /// Pixels per cell.
        #[arg(long, default_value_t = 8)]
        cell: usize,
    },
    /// Solve a DIMACS formula.
    SatSolve { cnf: PathBuf },
}

#[derive(clap::Args, Clone, Copy)]
struct Limits {
    /// Stop after this many search nodes.
    #[arg(long)]
    nodes: Option<u64>,
    /// Stop after this many seconds.
    #[arg(long)]
    time_secs: Option<u64>,
}

impl Limits {
    fn budget(self) -> SearchBudget {
        SearchBudget {
            node_limit: self.nodes,
            time_limit: self.time_secs.map(Duration::from_secs),
            ..SearchBudget::default()
        }
    }
}

fn parse_bound(s: &str) -> Result<(Color, usize), String> {
    let (c, n) = s.rsplit_once('=').ok_or("expected <color>=<n>")?;
    let color = Color::try_new(c).ok_or("bad color")?;
    Ok((color, n.parse().map_err(|_| "bad count")?))
}

/// A valid run whose answer is negative.
#[derive(Debug)]
struct Negative(String);

impl fmt::Display for Negative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Negative {}

fn negative(msg: impl Into<String>) -> anyhow::Error {
    Negative(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_cnf(path: &Path) -> Result<Cnf3> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_tileset(path: &Path) -> Result<TileSet> {
    parse_tileset(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_pattern(path: &Path) -> Result<DensePattern> {
    parse_pattern(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

enum Target {
    Dense(DensePattern),
    Blowup(Box<MbpatsInstance>),
}

impl Target {
    fn pattern(&self) -> &dyn Pattern {
        match self {
            Target::Dense(p) => p,
            Target::Blowup(inst) => &inst.q,
        }
    }
}

fn load_target(path: &Path) -> Result<Target> {
    let text = read(path)?;
    let is_qdesc = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("qdesc"));
    let parsed = if is_qdesc {
        parse_qdesc(&text).map(|q| Target::Blowup(Box::new(q)))?
    } else {
        parse_pattern(&text).map(Target::Dense)?
    };
    Ok(parsed)
}

fn parse_assignment(text: &str) -> Result<VarAssignment> {
    let mut out = VarAssignment::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = match line.rsplit_once('=') {
            Some((name, "1")) => (name, true),
            Some((name, "0")) => (name, false),
            _ => bail!("line {}: expected <name>=0|1", i + 1),
        };
        out.insert(value.0.trim().to_owned(), value.1);
    }
    Ok(out)
}

fn print_assignment(f: &VarAssignment) {
    for (name, value) in f {
        println!("{name}={}", u8::from(*value));
    }
}

fn solve_or_negative(f: &Cnf3) -> Result<VarAssignment> {
    solve_sat(f)?.ok_or_else(|| negative("formula is unsatisfiable"))
}

fn report_search(status: Status, output: Option<&Path>) -> Result<()> {
    match status {
        Status::Found(ts) => {
            println!("found {} tile types", ts.len());
            for (c, n) in ts.count_by_color() {
                println!("  {c}: {n}");
            }
            if let Some(path) = output {
                write(path, &tileset_to_string(&ts))?;
            }
            Ok(())
        }
        Status::Infeasible => Err(negative("infeasible within the given bounds")),
        Status::BudgetExceeded => Err(negative("search budget exceeded")),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sat2pats { cnf, output, atlas } => {
            let inst = build_pattern(&load_cnf(&cnf)?);
            write(&output, &pattern_to_string(&inst.pattern))?;
            if let Some(path) = atlas {
                let mut buf = Vec::new();
                write_atlas(
                    inst.color_atlas.iter().map(|(r, c)| (r.as_str(), c)),
                    &mut buf,
                )?;
                fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
            }
            println!(
                "pattern {}x{}, {} colors, m = {}",
                inst.pattern.width(),
                inst.pattern.height(),
                inst.color_atlas.len(),
                inst.m
            );
        }
        Command::WitnessPats {
            cnf,
            assignment,
            solve: _,
            output,
        } => {
            let f = load_cnf(&cnf)?;
            let a = match assignment {
                Some(path) => parse_assignment(&read(&path)?)?,
                None => solve_or_negative(&f)?,
            };
            let ts = witness_tileset(&f, &a).map_err(|e| negative(e.to_string()))?;
            write(&output, &tileset_to_string(&ts))?;
            println!("{} tile types", ts.len());
        }
        Command::ExtractAssignment { tileset, cnf } => {
            let ts = load_tileset(&tileset)?;
            let inst = build_pattern(&load_cnf(&cnf)?);
            let f = extract_assignment(&ts, &inst).map_err(|e| negative(e.to_string()))?;
            print_assignment(&f);
        }
        Command::Assemble {
            tileset,
            width,
            height,
            output,
        } => {
            let ts = load_tileset(&tileset)?;
            let a = assemble(&ts, width, height).map_err(|e| negative(e.to_string()))?;
            write(&output, &pattern_to_string(&pattern_of(&a)))?;
        }
        Command::Verify {
            tileset,
            target,
            stream,
        } => {
            let ts = load_tileset(&tileset)?;
            let target = load_target(&target)?;
            let p = target.pattern();
            let result = if stream {
                verify_stream_parallel(&ts, p)
            } else {
                verify_stream(&ts, p)
            };
            match result {
                Ok(()) => println!("ok: assembles the {}x{} pattern", p.width(), p.height()),
                Err(e) => return Err(negative(format!("verification failed: {e}"))),
            }
        }
        Command::Pats2mbpats {
            pattern,
            output,
            dense,
            allow_large,
            strict_membership,
        } => {
            let p = load_pattern(&pattern)?;
            if let Some(cnf) = strict_membership {
                validate_source_strict(&p, &load_cnf(&cnf)?)
                    .map_err(|e| negative(e.to_string()))?;
            }
            let inst = build_q(&p).map_err(|e| negative(e.to_string()))?;
            write(&output, &write_qdesc(&inst))?;
            if let Some(path) = dense {
                if inst.q.area() > DENSE_LIMIT && !allow_large {
                    bail!(
                        "dense output would have {} cells; pass --allow-large to write it",
                        inst.q.area()
                    );
                }
                let file =
                    File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut out = BufWriter::new(file);
                pats::format::write_pattern(&inst.q, &mut out)?;
                out.flush()?;
            }
            println!("m_b = {}", inst.m_b);
            println!("m_w = {}", inst.m_w);
            println!("m_g = {}", inst.m_g);
            println!("ell = {}", inst.ell);
            println!("Q = {}x{}", inst.q.width(), inst.q.height());
        }
        Command::WitnessMbpats {
            tileset,
            pattern,
            output,
        } => {
            let t = load_tileset(&tileset)?;
            let p = load_pattern(&pattern)?;
            let theta = witness_theta(&t, &p).map_err(|e| negative(e.to_string()))?;
            write(&output, &tileset_to_string(&theta))?;
            println!("{} tile types", theta.len());
        }
        Command::DecodeSupertiles {
            theta,
            qdesc,
            output,
        } => {
            let theta = load_tileset(&theta)?;
            let inst = parse_qdesc(&read(&qdesc)?)?;
            let t = decode_supertiles(&theta, &inst).map_err(|e| negative(e.to_string()))?;
            write(&output, &tileset_to_string(&t))?;
            println!("{} tile types", t.len());
        }
        Command::SolveMin {
            pattern,
            cap,
            limits,
            output,
        } => {
            let p = load_pattern(&pattern)?;
            let (m, ts) =
                minimize(&p, cap, &limits.budget()).map_err(|e| negative(e.to_string()))?;
            println!("minimum: {m} tile types");
            if let Some(path) = output {
                write(&path, &tileset_to_string(&ts))?;
            }
        }
        Command::SolveBounded {
            pattern,
            bounds,
            total,
            parallel,
            limits,
            output,
        } => {
            let p = load_pattern(&pattern)?;
            let mut budget = limits.budget();
            budget.max_total_tiles = total;
            budget.per_color_bounds.extend(bounds);
            let r = if parallel {
                solve_any(&p, &budget)
            } else {
                solve_exact(&p, &budget)
            };
            eprintln!("{} nodes explored", r.nodes_explored);
            report_search(r.status, output.as_deref())?;
        }
        Command::Roundtrip { cnf, toy: _, full } => roundtrip(&load_cnf(&cnf)?, full)?,
        Command::Render {
            target,
            output,
            format,
            cell,
        } => {
            let format = format
                .or_else(|| ImageFormat::from_path(&output))
                .context("cannot tell the image format; pass --format")?;
            if cell == 0 {
                bail!("--cell must be positive");
            }
            let target = load_target(&target)?;
            let file =
                File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            let mut out = BufWriter::new(file);
            match format {
                ImageFormat::Ppm => write_ppm(target.pattern(), cell, &mut out)?,
                ImageFormat::Svg => write_svg(target.pattern(), cell, &mut out)?,
            }
            out.flush()?;
        }
        Command::SatSolve { cnf } => {
            let f = load_cnf(&cnf)?;
            let a = solve_or_negative(&f).inspect_err(|_| println!("UNSAT"))?;
            println!("SAT");
            print_assignment(&a);
        }
    }
    Ok(())
}

fn step(name: &str, ok: bool) -> Result<()> {
    println!("{:<28} {}", name, if ok { "ok" } else { "FAILED" });
    if ok {
        Ok(())
    } else {
        Err(negative(format!("{name} failed")))
    }
}

fn roundtrip(f: &Cnf3, full: bool) -> Result<()> {
    let a = solve_or_negative(f)?;
    step("solve formula", f.eval(&a)?)?;
    let inst = build_pattern(f);
    let t = witness_tileset(f, &a)?;
    step("witness size", t.len() == inst.m)?;
    step(
        "witness assembles pattern",
        verify_stream(&t, &inst.pattern).is_ok(),
    )?;
    let back = extract_assignment(&t, &inst)?;
    step("extracted assignment", back == a)?;

    let (source, t) = if full {
        (inst.pattern.clone(), t)
    } else {
        let p = DensePattern::from_fn(4, 4, |x, y| Color::new(format!("c{x}_{y}")));
        let t = cell_tileset(&p);
        (p, t)
    };
    let q = build_q(&source)?;
    println!(
        "blowup: {}x{} source, Q = {}x{}, bounds (m_b, m_w, m_g) = ({}, {}, {})",
        source.width(),
        source.height(),
        q.q.width(),
        q.q.height(),
        q.m_b,
        q.m_w,
        q.m_g
    );
    let theta = witness_theta(&t, &source)?;
    let started = Instant::now();
    step(
        "three-color set assembles Q",
        verify_stream_parallel(&theta, &q.q).is_ok(),
    )?;
    println!("  swept {} cells in {:.1?}", q.q.area(), started.elapsed());
    let decoded = decode_supertiles(&theta, &q)?;
    step(
        "decoded set assembles source",
        verify_stream(&decoded, &source).is_ok(),
    )?;
    step(
        "decoded set matches original",
        glue_isomorphic(&decoded, &t, false),
    )?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Negative>().is_some() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
