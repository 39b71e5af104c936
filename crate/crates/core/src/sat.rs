//! 3-CNF formulas: DIMACS input, evaluation and a small DPLL solver.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A literal over the variable with index `var` into [`Cnf3::variables`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    fn holds(self, value: bool) -> bool {
        value != self.negated
    }
}

pub type Clause3 = [Literal; 3];

/// Variable name to truth value.
pub type VarAssignment = BTreeMap<String, bool>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf3 {
    variables: Vec<String>,
    clauses: Vec<Clause3>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: clause has {len} literals, at most 3 are allowed")]
    Arity { line: usize, len: usize },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("assignment has no value for variable {0}")]
    MissingVariable(String),
    #[error("{vars} variables exceed the solver guard of {guard}")]
    TooLarge { vars: usize, guard: usize },
}

impl Cnf3 {
    /// Panics when a literal refers to an unknown variable.
    pub fn new(variables: Vec<String>, clauses: Vec<Clause3>) -> Self {
        assert!(
            clauses.iter().flatten().all(|l| l.var < variables.len()),
            "literal refers to an undeclared variable"
        );
        Cnf3 { variables, clauses }
    }

    /// Variables named `x1..=xn`, matching DIMACS numbering.
    pub fn numbered(n: usize, clauses: Vec<Clause3>) -> Self {
        Cnf3::new((1..=n).map(|i| format!("x{i}")).collect(), clauses)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn clauses(&self) -> &[Clause3] {
        &self.clauses
    }

    pub fn literal_name(&self, l: Literal) -> String {
        if l.negated {
            format!("~{}", self.variables[l.var])
        } else {
            self.variables[l.var].clone()
        }
    }

    pub fn eval(&self, f: &VarAssignment) -> Result<bool, SatError> {
        let values = self.values(f)?;
        Ok(self.eval_values(&values))
    }

    fn values(&self, f: &VarAssignment) -> Result<Vec<bool>, SatError> {
        self.variables
            .iter()
            .map(|v| {
                f.get(v)
                    .copied()
                    .ok_or_else(|| SatError::MissingVariable(v.clone()))
            })
            .collect()
    }

    fn eval_values(&self, values: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.holds(values[l.var])))
    }

    pub fn assignment_from_bits(&self, bits: &[bool]) -> VarAssignment {
        self.variables
            .iter()
            .cloned()
            .zip(bits.iter().copied())
            .collect()
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.variables.len(), self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                out.push_str(&format!("{} ", if l.negated { -v } else { v }));
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for Cnf3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            let lits: Vec<String> = c.iter().map(|&l| self.literal_name(l)).collect();
            write!(f, "({})", lits.join(" | "))?;
        }
        Ok(())
    }
}

/// Parses DIMACS CNF. Clauses shorter than three literals are padded by
/// repeating their last literal.
pub fn parse_dimacs(text: &str) -> Result<Cnf3, DimacsError> {
    let perr = |line: usize, m: &str| DimacsError::Parse {
        line,
        message: m.to_owned(),
    };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut last_line = 0;
    'lines: for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(perr(line, "duplicate header"));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            header = match parts.as_slice() {
                ["p", "cnf", nv, nc] => Some((
                    nv.parse().map_err(|_| perr(line, "bad variable count"))?,
                    nc.parse().map_err(|_| perr(line, "bad clause count"))?,
                )),
                _ => return Err(perr(line, "expected `p cnf <vars> <clauses>`")),
            };
            continue;
        }
        let Some((nv, _)) = header else {
            return Err(perr(line, "clause before header"));
        };
        for tok in trimmed.split_whitespace() {
            if tok == "%" {
                break 'lines;
            }
            let v: i64 = tok
                .parse()
                .map_err(|_| perr(line, &format!("bad literal {tok:?}")))?;
            if v == 0 {
                if current.is_empty() {
                    return Err(perr(line, "empty clause"));
                }
                if current.len() > 3 {
                    return Err(DimacsError::Arity {
                        line,
                        len: current.len(),
                    });
                }
                let last = *current.last().unwrap();
                current.resize(3, last);
                clauses.push([current[0], current[1], current[2]]);
                current.clear();
                continue;
            }
            let var = v.unsigned_abs() as usize;
            if var > nv {
                return Err(perr(line, &format!("variable {var} exceeds declared {nv}")));
            }
            current.push(Literal {
                var: var - 1,
                negated: v < 0,
            });
        }
    }
    let Some((nv, nc)) = header else {
        return Err(perr(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(perr(last_line, "unterminated clause"));
    }
    if clauses.len() != nc {
        return Err(perr(
            last_line.max(1),
            &format!("header declares {nc} clauses, found {}", clauses.len()),
        ));
    }
    Ok(Cnf3::numbered(nv, clauses))
}

pub const DEFAULT_GUARD: usize = 26;

/// Finds a satisfying assignment, or `None` when the formula is
/// unsatisfiable.
pub fn solve_sat(f: &Cnf3) -> Result<Option<VarAssignment>, SatError> {
    solve_sat_guarded(f, DEFAULT_GUARD)
}

pub fn solve_sat_guarded(f: &Cnf3, guard: usize) -> Result<Option<VarAssignment>, SatError> {
    let n = f.variables.len();
    if n > guard {
        return Err(SatError::TooLarge { vars: n, guard });
    }
    let mut values = vec![None; n];
    if dpll(&f.clauses, &mut values) {
        // Unconstrained variables default to false.
        let bits: Vec<bool> = values.iter().map(|v| v.unwrap_or(false)).collect();
        debug_assert!(f.eval_values(&bits));
        Ok(Some(f.assignment_from_bits(&bits)))
    } else {
        Ok(None)
    }
}

enum ClauseState {
    Satisfied,
    Unit(Literal),
    Conflict,
    Open(Literal),
}

fn clause_state(c: &Clause3, values: &[Option<bool>]) -> ClauseState {
    let mut free: Option<Literal> = None;
    let mut multiple = false;
    for &l in c {
        match values[l.var] {
            Some(v) if l.holds(v) => return ClauseState::Satisfied,
            Some(_) => {}
            None => match free {
                Some(f) if f != l => multiple = true,
                _ => free = Some(l),
            },
        }
    }
    match (free, multiple) {
        (None, _) => ClauseState::Conflict,
        (Some(l), false) => ClauseState::Unit(l),
        (Some(l), true) => ClauseState::Open(l),
    }
}

fn dpll(clauses: &[Clause3], values: &mut [Option<bool>]) -> bool {
    let mut trail = Vec::new();
    // Unit propagation to fixpoint.
    let branch = loop {
        let mut changed = false;
        let mut branch = None;
        for c in clauses {
            match clause_state(c, values) {
                ClauseState::Satisfied => {}
                ClauseState::Conflict => {
                    for v in trail {
                        values[v] = None;
                    }
                    return false;
                }
                ClauseState::Unit(l) => {
                    values[l.var] = Some(!l.negated);
                    trail.push(l.var);
                    changed = true;
                }
                ClauseState::Open(l) => {
                    branch.get_or_insert(l);
                }
            }
        }
        if !changed {
            break branch;
        }
    };
    let Some(l) = branch else {
        return true;
    };
    for value in [!l.negated, l.negated] {
        values[l.var] = Some(value);
        if dpll(clauses, values) {
            return true;
        }
    }
    values[l.var] = None;
    for v in trail {
        values[v] = None;
    }
    false
}

/// Satisfiability by trying all 2^n assignments.
pub fn brute_force_sat(f: &Cnf3) -> Option<VarAssignment> {
    let n = f.variables.len();
    assert!(n < 32, "brute force is limited to 31 variables");
    (0u32..1 << n).find_map(|mask| {
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        f.eval_values(&bits).then(|| f.assignment_from_bits(&bits))
    })
}
