//! CNF data model and DIMACS I/O.
//!
//! The clause database keeps deleted clauses as tombstones so that clause
//! ids stay stable across rewrites; compaction happens only when a formula
//! is written back out.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Index of a clause slot in a [`Formula`]. Slots are never reused.
pub type ClauseId = usize;

/// A signed reference to a variable. Variable indices start at 1, matching
/// DIMACS conventions; the sign carries the polarity.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal(i32);

impl Literal {
    /// Builds a literal from a variable index (>= 1) and a polarity.
    pub fn new(var: u32, positive: bool) -> Literal {
        assert!(
            var >= 1 && var <= i32::MAX as u32,
            "variable index out of range: {var}"
        );
        Literal(if positive { var as i32 } else { -(var as i32) })
    }

    /// Builds a literal from a nonzero DIMACS integer.
    pub fn from_dimacs(value: i32) -> Literal {
        assert!(value != 0, "literal 0 is reserved as the clause terminator");
        Literal(value)
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negated(self) -> Literal {
        Literal(-self.0)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Dense index usable for occurrence tables: `2 * (var - 1) + negative`.
    pub fn code(self) -> usize {
        (self.var() as usize - 1) * 2 + usize::from(!self.is_positive())
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Sorted by variable first, positive polarity before negative.
        (self.var(), !self.is_positive()).cmp(&(other.var(), !other.is_positive()))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A sorted, duplicate-free disjunction of literals.
///
/// Clauses containing a variable in both polarities are kept but flagged
/// tautological; the rewrite engine skips them entirely.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
    tautology: bool,
}

impl Clause {
    /// Normalizes an arbitrary literal sequence: sorts by (variable,
    /// polarity), removes duplicates, and flags tautologies.
    pub fn new(mut lits: Vec<Literal>) -> Clause {
        lits.sort();
        lits.dedup();
        let tautology = lits.windows(2).any(|w| w[0].var() == w[1].var());
        Clause { lits, tautology }
    }

    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.tautology
    }

    pub fn is_unit(&self) -> bool {
        self.lits.len() == 1
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    /// Canonical key: equal keys iff equal literal sets.
    pub fn key(&self) -> &[Literal] {
        &self.lits
    }

    /// The clause with one literal removed. The literal must be present.
    pub fn without(&self, lit: Literal) -> Clause {
        debug_assert!(self.contains(lit));
        let lits: Vec<Literal> = self.lits.iter().copied().filter(|&l| l != lit).collect();
        let tautology = lits.windows(2).any(|w| w[0].var() == w[1].var());
        Clause { lits, tautology }
    }

    /// If `self` has exactly one literal more than `other` and contains all
    /// of `other`'s literals, returns that extra literal.
    pub fn single_extra_over(&self, other: &Clause) -> Option<Literal> {
        if self.lits.len() != other.lits.len() + 1 {
            return None;
        }
        let mut extra = None;
        let mut oi = 0;
        for &l in &self.lits {
            if oi < other.lits.len() && other.lits[oi] == l {
                oi += 1;
            } else if extra.is_none() {
                extra = Some(l);
            } else {
                return None;
            }
        }
        if oi == other.lits.len() {
            extra
        } else {
            None
        }
    }

    pub fn max_var(&self) -> u32 {
        self.lits.last().map_or(0, |l| l.var())
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

#[derive(Clone, Debug)]
struct ClauseSlot {
    clause: Clause,
    live: bool,
}

/// Clause database with stable slot ids and a live/deleted flag per slot.
#[derive(Clone, Debug, Default)]
pub struct Formula {
    num_vars: u32,
    slots: Vec<ClauseSlot>,
    live_count: usize,
}

/// Variable and live-clause counts of a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormulaStats {
    pub num_vars: u32,
    pub num_clauses: usize,
}

impl Formula {
    pub fn new(num_vars: u32) -> Formula {
        Formula {
            num_vars,
            slots: Vec::new(),
            live_count: 0,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn live_clause_count(&self) -> usize {
        self.live_count
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Live-clause view of the formula; see [`formula_stats`].
    pub fn stats(&self) -> FormulaStats {
        FormulaStats {
            num_vars: self.num_vars,
            num_clauses: self.live_count,
        }
    }

    /// Appends a clause (normalizing it) and returns its slot id. The
    /// variable count grows to cover every literal in the clause.
    pub fn add_clause(&mut self, lits: Vec<Literal>) -> ClauseId {
        self.add_normalized(Clause::new(lits))
    }

    pub fn add_normalized(&mut self, clause: Clause) -> ClauseId {
        self.num_vars = self.num_vars.max(clause.max_var());
        let id = self.slots.len();
        self.slots.push(ClauseSlot { clause, live: true });
        self.live_count += 1;
        id
    }

    /// Tombstones a live clause. Panics if the slot is already dead; callers
    /// are expected to track liveness.
    pub fn delete_clause(&mut self, id: ClauseId) {
        let slot = &mut self.slots[id];
        assert!(slot.live, "clause {id} deleted twice");
        slot.live = false;
        self.live_count -= 1;
    }

    /// The clause in slot `id`, or `None` if it has been deleted.
    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.slots.get(id).filter(|s| s.live).map(|s| &s.clause)
    }

    /// Slot contents regardless of liveness (tombstones keep their clause).
    pub fn slot_clause(&self, id: ClauseId) -> &Clause {
        &self.slots[id].clause
    }

    pub fn is_live(&self, id: ClauseId) -> bool {
        self.slots.get(id).is_some_and(|s| s.live)
    }

    pub fn live_clauses(&self) -> impl Iterator<Item = (ClauseId, &Clause)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.live)
            .map(|(id, s)| (id, &s.clause))
    }

    /// Allocates the next variable index.
    pub fn fresh_var(&mut self) -> u32 {
        self.num_vars += 1;
        self.num_vars
    }

    /// Grows the variable count (never shrinks).
    pub fn ensure_vars(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    /// Multiset of live clauses keyed by canonical form.
    pub fn live_clause_multiset(&self) -> HashMap<Clause, usize> {
        let mut map = HashMap::new();
        for (_, c) in self.live_clauses() {
            *map.entry(c.clone()).or_insert(0) += 1;
        }
        map
    }
}

/// The occurrence index: for every literal, the ids of live clauses that
/// contain it. Kept exactly consistent with the formula by the callers that
/// mutate both.
#[derive(Clone, Debug, Default)]
pub struct OccurrenceIndex {
    occ: Vec<Vec<ClauseId>>,
}

impl OccurrenceIndex {
    /// Builds the index from the live clauses of `f`.
    pub fn build(f: &Formula) -> OccurrenceIndex {
        let mut idx = OccurrenceIndex {
            occ: vec![Vec::new(); f.num_vars() as usize * 2],
        };
        for (id, clause) in f.live_clauses() {
            for &lit in clause.lits() {
                idx.occ[lit.code()].push(id);
            }
        }
        idx
    }

    /// Ids of live clauses containing `lit`, in ascending order.
    pub fn ids(&self, lit: Literal) -> &[ClauseId] {
        self.occ.get(lit.code()).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, lit: Literal) -> usize {
        self.ids(lit).len()
    }

    fn ensure_var(&mut self, var: u32) {
        let need = var as usize * 2;
        if self.occ.len() < need {
            self.occ.resize_with(need, Vec::new);
        }
    }

    /// Records a newly added clause. Ids grow monotonically, so pushing
    /// keeps each list sorted.
    pub fn on_clause_added(&mut self, id: ClauseId, clause: &Clause) {
        for &lit in clause.lits() {
            self.ensure_var(lit.var());
            let list = &mut self.occ[lit.code()];
            debug_assert!(list.last().is_none_or(|&last| last < id));
            list.push(id);
        }
    }

    /// Records a clause deletion.
    pub fn on_clause_deleted(&mut self, id: ClauseId, clause: &Clause) {
        for &lit in clause.lits() {
            let list = &mut self.occ[lit.code()];
            let pos = list
                .binary_search(&id)
                .unwrap_or_else(|_| panic!("clause {id} missing from occurrence list of {lit}"));
            list.remove(pos);
        }
    }
}

/// Builds the clause-literal incidence transpose for `f`.
pub fn build_occurrence_index(f: &Formula) -> OccurrenceIndex {
    OccurrenceIndex::build(f)
}

/// Variable and live-clause counts, the size metric reported everywhere.
pub fn formula_stats(f: &Formula) -> FormulaStats {
    f.stats()
}

/// Errors produced while reading DIMACS CNF input.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: expected `p cnf <vars> <clauses>` header, found {found:?}")]
    MalformedHeader { line: usize, found: String },
    #[error("line {line}: clause data before the `p cnf` header")]
    DataBeforeHeader { line: usize },
    #[error("no `p cnf` header found")]
    MissingHeader,
    #[error("line {line}: token {token:?} is not a literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {value} out of range")]
    LiteralOutOfRange { line: usize, value: i64 },
    #[error("line {line}: final clause not terminated by 0")]
    UnterminatedClause { line: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Recoverable oddities in otherwise accepted input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// A literal referenced a variable above the header count; the formula
    /// was grown to cover it.
    VarCountGrown { header: u32, seen: u32 },
    /// The header clause count does not match the number of clauses read.
    ClauseCountMismatch { header: usize, seen: usize },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::VarCountGrown { header, seen } => {
                write!(
                    f,
                    "header declares {header} variables but {seen} are referenced"
                )
            }
            ParseWarning::ClauseCountMismatch { header, seen } => {
                write!(f, "header declares {header} clauses but {seen} were read")
            }
        }
    }
}

/// A parsed formula together with any tolerated irregularities.
#[derive(Debug)]
pub struct Parsed {
    pub formula: Formula,
    pub warnings: Vec<ParseWarning>,
}

/// Parses DIMACS CNF: `c` comment lines, one `p cnf V C` header, then
/// whitespace-separated decimal literals with `0` terminating each clause.
pub fn parse_dimacs<R: BufRead>(reader: R) -> Result<Parsed, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut formula = Formula::new(0);
    let mut current: Vec<Literal> = Vec::new();
    let mut clauses_read = 0usize;
    let mut max_var = 0u32;
    let mut last_line = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        last_line = lineno;
        let trimmed = line.trim_start();
        if trimmed.starts_with('c') || trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::MalformedHeader {
                    line: lineno,
                    found: line.clone(),
                });
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", vars, clauses] => {
                    vars.parse::<u32>().ok().zip(clauses.parse::<usize>().ok())
                }
                _ => None,
            };
            match parsed {
                Some((v, c)) => {
                    header = Some((v, c));
                    formula.ensure_vars(v);
                }
                None => {
                    return Err(ParseError::MalformedHeader {
                        line: lineno,
                        found: line.clone(),
                    })
                }
            }
            continue;
        }
        if header.is_none() {
            return Err(ParseError::DataBeforeHeader { line: lineno });
        }
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::BadToken {
                line: lineno,
                token: token.to_string(),
            })?;
            if value == 0 {
                formula.add_clause(std::mem::take(&mut current));
                clauses_read += 1;
            } else {
                if value.unsigned_abs() > i32::MAX as u64 {
                    return Err(ParseError::LiteralOutOfRange {
                        line: lineno,
                        value,
                    });
                }
                let lit = Literal::from_dimacs(value as i32);
                max_var = max_var.max(lit.var());
                current.push(lit);
            }
        }
    }

    let (header_vars, header_clauses) = header.ok_or(ParseError::MissingHeader)?;
    if !current.is_empty() {
        return Err(ParseError::UnterminatedClause { line: last_line });
    }

    let mut warnings = Vec::new();
    if max_var > header_vars {
        warnings.push(ParseWarning::VarCountGrown {
            header: header_vars,
            seen: max_var,
        });
    }
    if clauses_read != header_clauses {
        warnings.push(ParseWarning::ClauseCountMismatch {
            header: header_clauses,
            seen: clauses_read,
        });
    }
    Ok(Parsed { formula, warnings })
}

/// Convenience wrapper over [`parse_dimacs`] that drops warnings.
pub fn parse_dimacs_str(text: &str) -> Result<Formula, ParseError> {
    parse_dimacs(text.as_bytes()).map(|p| p.formula)
}

/// Writes the live clauses of `f` in DIMACS form. Deleted slots are
/// compacted away; literal order within a clause is canonical.
pub fn write_dimacs<W: Write>(f: &Formula, w: &mut W) -> io::Result<()> {
    writeln!(w, "p cnf {} {}", f.num_vars(), f.live_clause_count())?;
    for (_, clause) in f.live_clauses() {
        write_clause_line(clause.lits(), w)?;
    }
    Ok(())
}

/// Like [`write_dimacs`], but emits each clause's literals in the order
/// given by `orders` (one entry per live clause, same literal sets).
pub fn write_dimacs_with_orders<W: Write>(
    f: &Formula,
    orders: &[Vec<Literal>],
    w: &mut W,
) -> io::Result<()> {
    assert_eq!(
        orders.len(),
        f.live_clause_count(),
        "one literal order per live clause"
    );
    writeln!(w, "p cnf {} {}", f.num_vars(), f.live_clause_count())?;
    for ((_, clause), order) in f.live_clauses().zip(orders) {
        debug_assert_eq!(&Clause::new(order.clone()), clause);
        write_clause_line(order, w)?;
    }
    Ok(())
}

fn write_clause_line<W: Write>(lits: &[Literal], w: &mut W) -> io::Result<()> {
    let mut buf = String::new();
    for lit in lits {
        buf.push_str(&lit.to_dimacs().to_string());
        buf.push(' ');
    }
    buf.push('0');
    writeln!(w, "{buf}")
}

/// Serializes a formula to a DIMACS string.
pub fn to_dimacs_string(f: &Formula) -> String {
    let mut out = Vec::new();
    write_dimacs(f, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("DIMACS output is ASCII")
}
