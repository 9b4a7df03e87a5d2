//! CNF preprocessing by bounded variable addition.
//!
//! The engine finds grids of clauses `{(l ∨ C) | l ∈ L, C ∈ P}` and
//! replaces each with a fresh definition variable, shrinking the formula
//! from `|L|·|P|` clauses to `|L| + |P|`. Literal-selection ties can be
//! broken by input order, at random, or by 3-hop connectivity in the
//! weighted variable incidence graph, which keeps the rewrite stable under
//! formula scrambling. Every rewrite can be logged as a DRAT fragment.
//!
//! The crate also ships the surrounding tooling: DIMACS I/O, a seeded
//! formula scrambler, and generators for packing-coloring and pigeonhole
//! benchmark families.

pub mod cnf;
pub mod drat;
pub mod engine;
pub mod generators;
pub mod scramble;
pub mod vig;

pub use cnf::{
    build_occurrence_index, formula_stats, parse_dimacs, parse_dimacs_str, to_dimacs_string,
    write_dimacs, write_dimacs_with_orders, Clause, ClauseId, Formula, FormulaStats, Literal,
    OccurrenceIndex, ParseError, ParseWarning, Parsed,
};
pub use drat::{check_proof, emit_replacement, CheckError, DratLine, DratProof};
pub use engine::{
    accept_grid, apply_replacement, find_lmax, grow_grid, partial_clauses, reduction, run_bva,
    BvaRun, EngineConfig, EngineError, Grid, GridColumn, GrowOutcome, GrowTrace, LiteralQueue,
    ReductionCondition, ReplacementRecord, TieBreakCtx, Tiebreak,
};
pub use generators::{gen_packing, gen_php, taxicab, LegendEntry, PackingSpec, PigeonholeSpec};
pub use scramble::{scramble, ScrambleConfig, ScrambleRecord};
pub use vig::{build_vig, export_heatmap, three_hop, HopVector, Vig, VigError};
