//! DRAT proof emission for variable additions, plus the small RAT/AT
//! checker the test suite replays proofs with.
//!
//! Every replacement becomes a fragment of addition lines followed by
//! deletion lines. The additions are ordered so each is redundant at the
//! moment it appears: the `(x ∨ C)` definitions come first (RAT on `x`,
//! vacuous while `x` is fresh), then the `(x̄ ∨ l)` clauses (RAT on `x̄`,
//! since every resolvent `(l ∨ C)` is still a live grid clause), and only
//! then the `d` lines for the grid cells.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::cnf::{Clause, Formula, Literal};
use crate::engine::ReplacementRecord;

/// One proof line. Addition lines keep their literal order: the first
/// literal is the RAT pivot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DratLine {
    Add(Vec<Literal>),
    Delete(Vec<Literal>),
}

/// An append-only clausal proof.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DratProof {
    lines: Vec<DratLine>,
}

impl DratProof {
    pub fn new() -> DratProof {
        DratProof::default()
    }

    pub fn from_lines(lines: Vec<DratLine>) -> DratProof {
        DratProof { lines }
    }

    pub fn lines(&self) -> &[DratLine] {
        &self.lines
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Appends the fragment for one replacement.
    pub fn push_replacement(&mut self, rec: &ReplacementRecord) {
        self.lines.extend(emit_replacement(rec));
    }

    /// The proof mirroring a whole run.
    pub fn from_records(records: &[ReplacementRecord]) -> DratProof {
        let mut proof = DratProof::new();
        for rec in records {
            proof.push_replacement(rec);
        }
        proof
    }

    /// Writes the plain-text format: one clause per line, `0`-terminated,
    /// deletions prefixed with `d `.
    pub fn write_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for line in &self.lines {
            let (prefix, lits) = match line {
                DratLine::Add(lits) => ("", lits),
                DratLine::Delete(lits) => ("d ", lits),
            };
            let mut buf = String::from(prefix);
            for lit in lits {
                buf.push_str(&lit.to_dimacs().to_string());
                buf.push(' ');
            }
            buf.push('0');
            writeln!(w, "{buf}")?;
        }
        Ok(())
    }
}

impl fmt::Display for DratProof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_text(&mut buf)
            .expect("writing to a Vec cannot fail");
        f.write_str(&String::from_utf8(buf).expect("DRAT output is ASCII"))
    }
}

/// The DRAT fragment for one replacement: `(x ∨ C)` additions, then
/// `(x̄ ∨ l)` additions, then deletions of all grid cells.
pub fn emit_replacement(rec: &ReplacementRecord) -> Vec<DratLine> {
    let pos = Literal::new(rec.new_var(), true);
    let neg = pos.negated();
    let mut lines = Vec::with_capacity(
        rec.partials().len() + rec.lits().len() + rec.partials().len() * rec.lits().len(),
    );
    for partial in rec.partials() {
        let mut lits = Vec::with_capacity(partial.len() + 1);
        lits.push(pos);
        lits.extend_from_slice(partial.lits());
        lines.push(DratLine::Add(lits));
    }
    for &l in rec.lits() {
        lines.push(DratLine::Add(vec![neg, l]));
    }
    for clause in rec.deleted_clauses() {
        lines.push(DratLine::Delete(clause.lits().to_vec()));
    }
    lines
}

/// Why a proof was rejected.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("line {line}: added clause is neither AT nor RAT on {pivot}")]
    NotRedundant { line: usize, pivot: Literal },
    #[error("line {line}: added an empty clause that is not AT")]
    EmptyNotRedundant { line: usize },
    #[error("line {line}: deleted clause not present in the formula")]
    DeleteMissing { line: usize },
}

/// Replays `proof` against `f`, checking every addition is AT or RAT on
/// its first literal and every deletion names a present clause. On
/// success returns the final clause multiset.
pub fn check_proof(f: &Formula, proof: &DratProof) -> Result<HashMap<Clause, usize>, CheckError> {
    let mut checker = Checker::from_formula(f);
    for (lineno, line) in proof.lines().iter().enumerate() {
        match line {
            DratLine::Add(lits) => checker.check_and_add(lits, lineno)?,
            DratLine::Delete(lits) => checker.delete(lits, lineno)?,
        }
    }
    Ok(checker.into_multiset())
}

const UNASSIGNED: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

/// Clause store with occurrence lists and a reusable assignment trail for
/// unit propagation. This implements only the fragment the proofs need;
/// it is a test oracle, not a general verifier.
struct Checker {
    clauses: Vec<Clause>,
    live: Vec<bool>,
    occ: Vec<Vec<usize>>,
    by_key: HashMap<Clause, Vec<usize>>,
    assign: Vec<u8>,
    /// Ids of unit clauses ever inserted; propagation seeds from the live
    /// ones so AT holds in the standard sense.
    units: Vec<usize>,
}

impl Checker {
    fn from_formula(f: &Formula) -> Checker {
        let mut checker = Checker {
            clauses: Vec::new(),
            live: Vec::new(),
            occ: Vec::new(),
            by_key: HashMap::new(),
            assign: Vec::new(),
            units: Vec::new(),
        };
        for (_, clause) in f.live_clauses() {
            checker.insert(clause.clone());
        }
        checker
    }

    fn ensure_var(&mut self, var: u32) {
        if self.occ.len() < var as usize * 2 {
            self.occ.resize_with(var as usize * 2, Vec::new);
        }
        if self.assign.len() < var as usize {
            self.assign.resize(var as usize, UNASSIGNED);
        }
    }

    fn insert(&mut self, clause: Clause) {
        let id = self.clauses.len();
        for &lit in clause.lits() {
            self.ensure_var(lit.var());
            self.occ[lit.code()].push(id);
        }
        if clause.len() <= 1 {
            self.units.push(id);
        }
        self.by_key.entry(clause.clone()).or_default().push(id);
        self.clauses.push(clause);
        self.live.push(true);
    }

    fn value(&self, lit: Literal) -> u8 {
        match self.assign[lit.var() as usize - 1] {
            UNASSIGNED => UNASSIGNED,
            v if (v == TRUE) == lit.is_positive() => TRUE,
            _ => FALSE,
        }
    }

    fn set_true(&mut self, lit: Literal) {
        self.assign[lit.var() as usize - 1] = if lit.is_positive() { TRUE } else { FALSE };
    }

    /// Unit propagation after assuming all of `assumed_false` false.
    /// Returns true iff a conflict is derived (the tested clause is AT).
    fn propagates_to_conflict(&mut self, assumed_false: &[Literal]) -> bool {
        let mut trail: Vec<Literal> = Vec::new();
        let mut conflict = false;
        for &lit in assumed_false {
            self.ensure_var(lit.var());
            match self.value(lit) {
                FALSE => {}
                TRUE => {
                    // Both polarities assumed false: the clause under test
                    // is a tautology and trivially redundant.
                    conflict = true;
                }
                _ => {
                    self.set_true(lit.negated());
                    trail.push(lit.negated());
                }
            }
            if conflict {
                break;
            }
        }
        // Seed with the formula's own unit (and empty) clauses.
        for i in 0..self.units.len() {
            if conflict {
                break;
            }
            let id = self.units[i];
            if !self.live[id] {
                continue;
            }
            match self.clauses[id].lits().first().copied() {
                None => conflict = true,
                Some(unit) => match self.value(unit) {
                    FALSE => conflict = true,
                    TRUE => {}
                    _ => {
                        self.set_true(unit);
                        trail.push(unit);
                    }
                },
            }
        }

        let mut head = 0;
        'outer: while !conflict && head < trail.len() {
            let assigned = trail[head];
            head += 1;
            // Clauses containing the falsified literal may have become unit.
            let falsified = assigned.negated();
            for idx in 0..self.occ[falsified.code()].len() {
                let cid = self.occ[falsified.code()][idx];
                if !self.live[cid] {
                    continue;
                }
                let mut unassigned = None;
                let mut skip = false;
                for &l in self.clauses[cid].lits() {
                    match self.value(l) {
                        // Satisfied, or two unassigned literals: not unit.
                        TRUE => skip = true,
                        UNASSIGNED if unassigned.replace(l).is_some() => skip = true,
                        _ => {}
                    }
                    if skip {
                        break;
                    }
                }
                if skip {
                    continue;
                }
                match unassigned {
                    Some(unit) => {
                        self.set_true(unit);
                        trail.push(unit);
                    }
                    None => {
                        conflict = true;
                        continue 'outer;
                    }
                }
            }
        }

        for lit in trail {
            self.assign[lit.var() as usize - 1] = UNASSIGNED;
        }
        conflict
    }

    fn check_and_add(&mut self, lits: &[Literal], lineno: usize) -> Result<(), CheckError> {
        for &lit in lits {
            self.ensure_var(lit.var());
        }
        if !self.propagates_to_conflict(lits) {
            // Not AT; try RAT on the first literal.
            let &pivot = lits
                .first()
                .ok_or(CheckError::EmptyNotRedundant { line: lineno })?;
            let rest: Vec<Literal> = lits[1..].to_vec();
            let neg_ids: Vec<usize> = self.occ[pivot.negated().code()]
                .iter()
                .copied()
                .filter(|&id| self.live[id])
                .collect();
            for cid in neg_ids {
                let mut resolvent: Vec<Literal> = rest.clone();
                resolvent.extend(
                    self.clauses[cid]
                        .lits()
                        .iter()
                        .copied()
                        .filter(|&l| l != pivot.negated()),
                );
                let resolvent = Clause::new(resolvent);
                if resolvent.is_tautology() {
                    continue;
                }
                if !self.propagates_to_conflict(resolvent.lits()) {
                    return Err(CheckError::NotRedundant {
                        line: lineno,
                        pivot,
                    });
                }
            }
        }
        self.insert(Clause::new(lits.to_vec()));
        Ok(())
    }

    fn delete(&mut self, lits: &[Literal], lineno: usize) -> Result<(), CheckError> {
        let key = Clause::new(lits.to_vec());
        let ids = self
            .by_key
            .get_mut(&key)
            .ok_or(CheckError::DeleteMissing { line: lineno })?;
        let id = ids
            .pop()
            .ok_or(CheckError::DeleteMissing { line: lineno })?;
        if ids.is_empty() {
            self.by_key.remove(&key);
        }
        self.live[id] = false;
        Ok(())
    }

    fn into_multiset(self) -> HashMap<Clause, usize> {
        let mut map = HashMap::new();
        for (clause, live) in self.clauses.into_iter().zip(self.live) {
            if live {
                *map.entry(clause).or_insert(0) += 1;
            }
        }
        map
    }
}
