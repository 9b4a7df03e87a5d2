//! The bounded variable addition loop: grid discovery, greedy growth,
//! reduction test, and replacement, with pluggable tie-breaking.
//!
//! A *grid* is a literal set `L` and a partial-clause set `P` such that
//! `(l ∨ C)` is a live clause for every `l ∈ L`, `C ∈ P`. Replacing the
//! `|L|·|P|` grid clauses with a fresh variable `x` and the `|L| + |P|`
//! clauses `{x ∨ C}` ∪ `{x̄ ∨ l}` shrinks the formula whenever the
//! reduction `R = |L|·|P| − (|L| + |P|)` is positive.

use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{Clause, ClauseId, Formula, Literal, OccurrenceIndex};
use crate::vig::{HopVector, Vig, VigError};

/// How ties between equally good candidate literals are broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tiebreak {
    /// Smallest (variable, polarity); reproduces variable-order behavior.
    Sorted,
    /// Seeded uniform choice among the tied candidates.
    Random { seed: u64 },
    /// Highest 3-hop connectivity to the grid's starting variable,
    /// remaining ties by smallest (variable, polarity).
    ThreeHop,
}

/// Which size test a finished grid must pass before being replaced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReductionCondition {
    /// `|L|·|P| > |L| + |P|`: every replacement strictly decreases the
    /// live-clause count.
    #[default]
    StrictClauseDecrease,
    /// `|L|·|P| > |L| + |P| + 1`: the clause saving must also pay for the
    /// added variable.
    VarsPlusClauses,
}

/// Engine configuration; the default is a sorted, strictly-shrinking,
/// unbounded run.
#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub tiebreak: Tiebreak,
    pub reduction_condition: ReductionCondition,
    pub max_replacements: Option<usize>,
    pub time_budget: Option<Duration>,
    /// Keep the incidence graph of the *input* formula for 3-hop queries
    /// instead of tracking rewrites.
    pub freeze_vig: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tiebreak: Tiebreak::Sorted,
            reduction_condition: ReductionCondition::default(),
            max_replacements: None,
            time_budget: None,
            freeze_vig: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    /// A grid cell named a clause that is no longer live.
    #[error("grid cell clause {0} is not live")]
    StaleGridCell(ClauseId),
    /// The incrementally maintained incidence graph went inconsistent.
    #[error("incidence graph inconsistency: {0}")]
    Vig(#[from] VigError),
}

/// Clause saving of an `nL x nP` grid: `nL·nP − (nL + nP)`.
pub fn reduction(n_lits: usize, n_cols: usize) -> i64 {
    let (l, p) = (n_lits as i64, n_cols as i64);
    l * p - (l + p)
}

/// One column of a grid: a partial clause plus the id of the live clause
/// `(l ∨ partial)` for every row literal `l`, in row order.
#[derive(Clone, Debug)]
pub struct GridColumn {
    partial: Clause,
    cell_ids: Vec<ClauseId>,
}

impl GridColumn {
    pub fn partial(&self) -> &Clause {
        &self.partial
    }

    pub fn cell_ids(&self) -> &[ClauseId] {
        &self.cell_ids
    }
}

/// A literal set `L` and partial-clause set `P` whose cross product names
/// live clauses of the formula.
#[derive(Clone, Debug)]
pub struct Grid {
    lits: Vec<Literal>,
    cols: Vec<GridColumn>,
    reduction: i64,
}

impl Grid {
    /// The initial `1 x |PartialClauses(F, start)|` grid.
    pub fn seed(f: &Formula, idx: &OccurrenceIndex, start: Literal) -> Grid {
        let cols = partial_clauses(f, idx, start);
        let reduction = reduction(1, cols.len());
        Grid {
            lits: vec![start],
            cols,
            reduction,
        }
    }

    /// Row literals in acceptance order; the starting literal is first.
    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    pub fn start(&self) -> Literal {
        self.lits[0]
    }

    pub fn columns(&self) -> &[GridColumn] {
        &self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.lits.len(), self.cols.len())
    }

    pub fn reduction(&self) -> i64 {
        self.reduction
    }

    fn contains_lit(&self, lit: Literal) -> bool {
        self.lits.contains(&lit)
    }

    fn accept(&mut self, cand: Candidate) {
        let mut cols = Vec::with_capacity(cand.entries.len());
        for (col_idx, cell_id) in cand.entries {
            let mut col = self.cols[col_idx].clone();
            col.cell_ids.push(cell_id);
            cols.push(col);
        }
        self.lits.push(cand.lit);
        self.cols = cols;
        self.reduction = reduction(self.lits.len(), self.cols.len());
    }
}

/// The partial clauses of `l`: every live, non-tautological clause
/// containing `l`, with `l` removed, deduplicated by canonical key. Unit
/// clauses of the formula are ignored entirely.
pub fn partial_clauses(f: &Formula, idx: &OccurrenceIndex, l: Literal) -> Vec<GridColumn> {
    let mut cols = Vec::new();
    let mut seen: HashSet<Clause> = HashSet::new();
    for &id in idx.ids(l) {
        let clause = f
            .clause(id)
            .expect("occurrence index names only live clauses");
        if clause.len() < 2 || clause.is_tautology() {
            continue;
        }
        let partial = clause.without(l);
        if seen.insert(partial.clone()) {
            cols.push(GridColumn {
                partial,
                cell_ids: vec![id],
            });
        }
    }
    cols
}

/// Mutable tie-breaking state carried across one engine run: the RNG for
/// random mode and the per-start-variable 3-hop row cache (invalidated on
/// every formula mutation unless the graph is frozen).
#[derive(Debug, Default)]
pub struct TieBreakCtx {
    rng: Option<ChaCha8Rng>,
    hop_cache: HashMap<u32, Option<HopVector>>,
}

impl TieBreakCtx {
    pub fn new(tiebreak: Tiebreak) -> TieBreakCtx {
        let rng = match tiebreak {
            Tiebreak::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        TieBreakCtx {
            rng,
            hop_cache: HashMap::new(),
        }
    }

    pub fn invalidate_hops(&mut self) {
        self.hop_cache.clear();
    }

    /// 3-hop row for `var`, or `None` when the variable is outside the
    /// graph (frozen graph, fresh variable) or the count overflowed.
    fn hop_row(&mut self, vig: &Vig, var: u32) -> Option<&HopVector> {
        self.hop_cache
            .entry(var)
            .or_insert_with(|| {
                if var > vig.num_vars() {
                    return None;
                }
                match vig.three_hop(var) {
                    Ok(row) => Some(row),
                    Err(err) => {
                        log::warn!("3-hop heuristic disabled for variable {var}: {err}");
                        None
                    }
                }
            })
            .as_ref()
    }
}

struct Candidate {
    lit: Literal,
    entries: Vec<(usize, ClauseId)>,
}

/// Finds the literal maximizing the overlap `|P ∩ PartialClauses(F, l_m)|`
/// over all candidates, breaking overlap ties per `tiebreak`. Candidates
/// exclude the grid's literals and their complements. Returns `None` when
/// no candidate overlaps at least two columns (a single-column overlap can
/// never raise the reduction).
pub fn find_lmax(
    f: &Formula,
    idx: &OccurrenceIndex,
    grid: &Grid,
    tiebreak: Tiebreak,
    vig: Option<&Vig>,
    ctx: &mut TieBreakCtx,
) -> Option<(Literal, usize)> {
    find_candidate(f, idx, grid, tiebreak, vig, ctx)
        .filter(|c| c.entries.len() >= 2)
        .map(|c| (c.lit, c.entries.len()))
}

fn find_candidate(
    f: &Formula,
    idx: &OccurrenceIndex,
    grid: &Grid,
    tiebreak: Tiebreak,
    vig: Option<&Vig>,
    ctx: &mut TieBreakCtx,
) -> Option<Candidate> {
    let mut matches: HashMap<Literal, Vec<(usize, ClauseId)>> = HashMap::new();
    let mut col_seen: HashSet<Literal> = HashSet::new();
    for (col_idx, col) in grid.columns().iter().enumerate() {
        // Any clause extending this column contains all of its literals, so
        // scanning the occurrence list of the rarest one finds every match.
        let lmin = *col
            .partial
            .lits()
            .iter()
            .min_by_key(|l| idx.count(**l))
            .expect("partial clauses are nonempty");
        col_seen.clear();
        for &cand_id in idx.ids(lmin) {
            let cand = f
                .clause(cand_id)
                .expect("occurrence index names only live clauses");
            if cand.is_tautology() {
                continue;
            }
            let Some(extra) = cand.single_extra_over(&col.partial) else {
                continue;
            };
            if grid.contains_lit(extra) || grid.contains_lit(extra.negated()) {
                continue;
            }
            // Duplicate clauses in the formula must count a column once.
            if col_seen.insert(extra) {
                matches.entry(extra).or_default().push((col_idx, cand_id));
            }
        }
    }

    let mut ranked: Vec<(Literal, Vec<(usize, ClauseId)>)> = matches.into_iter().collect();
    ranked.sort_by_key(|(lit, _)| *lit);
    let best_overlap = ranked.iter().map(|(_, e)| e.len()).max()?;
    let tied: Vec<usize> = ranked
        .iter()
        .enumerate()
        .filter(|(_, (_, e))| e.len() == best_overlap)
        .map(|(i, _)| i)
        .collect();

    let chosen = if tied.len() == 1 {
        tied[0]
    } else {
        match tiebreak {
            Tiebreak::Sorted => tied[0],
            Tiebreak::Random { .. } => {
                let rng = ctx
                    .rng
                    .as_mut()
                    .expect("random tie-break context carries an RNG");
                tied[rng.gen_range(0..tied.len())]
            }
            Tiebreak::ThreeHop => match vig.and_then(|v| ctx.hop_row(v, grid.start().var())) {
                Some(row) => {
                    let mut best = tied[0];
                    let mut best_h = row.get(ranked[best].0.var());
                    for &i in &tied[1..] {
                        let h = row.get(ranked[i].0.var());
                        if h > best_h {
                            best = i;
                            best_h = h;
                        }
                    }
                    best
                }
                None => tied[0],
            },
        }
    };
    let (lit, entries) = ranked.swap_remove(chosen);
    Some(Candidate { lit, entries })
}

/// The reduction values a grid passed through while growing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GrowTrace {
    /// Reduction after seeding and after each accepted extension.
    pub r_steps: Vec<i64>,
    /// Reduction the first rejected extension would have reached.
    pub rejected_r: Option<i64>,
}

/// A grown grid together with its growth trace.
#[derive(Debug)]
pub struct GrowOutcome {
    pub grid: Grid,
    pub trace: GrowTrace,
}

/// Greedily extends the grid seeded at `start`: each step tentatively adds
/// the best candidate literal and shrinks the columns to the overlap,
/// accepting only while the reduction strictly increases.
pub fn grow_grid(
    f: &Formula,
    idx: &OccurrenceIndex,
    start: Literal,
    cfg: &EngineConfig,
    vig: Option<&Vig>,
    ctx: &mut TieBreakCtx,
) -> GrowOutcome {
    let mut grid = Grid::seed(f, idx, start);
    let mut trace = GrowTrace {
        r_steps: vec![grid.reduction()],
        rejected_r: None,
    };
    while let Some(cand) = find_candidate(f, idx, &grid, cfg.tiebreak, vig, ctx) {
        let new_r = reduction(grid.lits.len() + 1, cand.entries.len());
        if new_r > grid.reduction() {
            grid.accept(cand);
            trace.r_steps.push(new_r);
        } else {
            trace.rejected_r = Some(new_r);
            break;
        }
    }
    GrowOutcome { grid, trace }
}

/// Whether replacing this grid passes the configured size test.
pub fn accept_grid(grid: &Grid, cfg: &EngineConfig) -> bool {
    let (l, p) = grid.dims();
    let (l, p) = (l as i64, p as i64);
    match cfg.reduction_condition {
        ReductionCondition::StrictClauseDecrease => l * p > l + p,
        ReductionCondition::VarsPlusClauses => l * p > l + p + 1,
    }
}

/// One completed replacement: the grid snapshot, the fresh variable, and
/// the clause ids it added and tombstoned.
#[derive(Clone, Debug)]
pub struct ReplacementRecord {
    new_var: u32,
    lits: Vec<Literal>,
    partials: Vec<Clause>,
    added_ids: Vec<ClauseId>,
    deleted_ids: Vec<ClauseId>,
}

impl ReplacementRecord {
    pub fn new_var(&self) -> u32 {
        self.new_var
    }

    /// The literal set `L`, starting literal first.
    pub fn lits(&self) -> &[Literal] {
        &self.lits
    }

    /// The partial-clause set `P` in final column order.
    pub fn partials(&self) -> &[Clause] {
        &self.partials
    }

    pub fn added_ids(&self) -> &[ClauseId] {
        &self.added_ids
    }

    pub fn deleted_ids(&self) -> &[ClauseId] {
        &self.deleted_ids
    }

    /// The added clauses in insertion order: `{x ∨ C | C ∈ P}` then
    /// `{x̄ ∨ l | l ∈ L}`.
    pub fn added_clauses(&self) -> Vec<Clause> {
        let pos = Literal::new(self.new_var, true);
        let neg = pos.negated();
        let mut out = Vec::with_capacity(self.partials.len() + self.lits.len());
        for partial in &self.partials {
            let mut lits = partial.lits().to_vec();
            lits.push(pos);
            out.push(Clause::new(lits));
        }
        for &l in &self.lits {
            out.push(Clause::new(vec![neg, l]));
        }
        out
    }

    /// The tombstoned grid clauses `(l ∨ C)` in row-major order, matching
    /// `deleted_ids`.
    pub fn deleted_clauses(&self) -> Vec<Clause> {
        let mut out = Vec::with_capacity(self.lits.len() * self.partials.len());
        for &l in &self.lits {
            for partial in &self.partials {
                let mut lits = partial.lits().to_vec();
                lits.push(l);
                out.push(Clause::new(lits));
            }
        }
        out
    }
}

/// Replaces the grid's clauses with a fresh variable: adds `|L| + |P|`
/// clauses, tombstones the `|L|·|P|` grid cells, and keeps the occurrence
/// index consistent.
pub fn apply_replacement(
    f: &mut Formula,
    idx: &mut OccurrenceIndex,
    grid: &Grid,
) -> Result<ReplacementRecord, EngineError> {
    for col in grid.columns() {
        for &id in col.cell_ids() {
            if !f.is_live(id) {
                return Err(EngineError::StaleGridCell(id));
            }
        }
    }

    let new_var = f.fresh_var();
    let pos = Literal::new(new_var, true);
    let neg = pos.negated();

    let mut added_ids = Vec::with_capacity(grid.cols.len() + grid.lits.len());
    for col in &grid.cols {
        let mut lits = col.partial.lits().to_vec();
        lits.push(pos);
        let clause = Clause::new(lits);
        let id = f.add_normalized(clause);
        idx.on_clause_added(id, f.slot_clause(id));
        added_ids.push(id);
    }
    for &l in &grid.lits {
        let clause = Clause::new(vec![neg, l]);
        let id = f.add_normalized(clause);
        idx.on_clause_added(id, f.slot_clause(id));
        added_ids.push(id);
    }

    let mut deleted_ids = Vec::with_capacity(grid.lits.len() * grid.cols.len());
    for (row, &lit) in grid.lits.iter().enumerate() {
        for col in &grid.cols {
            let id = col.cell_ids[row];
            debug_assert_eq!(
                f.slot_clause(id).single_extra_over(&col.partial),
                Some(lit),
                "grid cell {id} does not match its row and column"
            );
            idx.on_clause_deleted(id, f.slot_clause(id));
            f.delete_clause(id);
            deleted_ids.push(id);
        }
    }
    debug_assert_eq!(
        deleted_ids.iter().collect::<HashSet<_>>().len(),
        deleted_ids.len(),
        "grid cells must be pairwise distinct clauses"
    );

    Ok(ReplacementRecord {
        new_var,
        lits: grid.lits.clone(),
        partials: grid.cols.iter().map(|c| c.partial.clone()).collect(),
        added_ids,
        deleted_ids,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct QueueEntry {
    count: usize,
    lit: Literal,
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Highest count first; among equal counts the literal with the
        // largest (variable, negative-polarity-first) encoding.
        self.count
            .cmp(&other.count)
            .then_with(|| self.lit.cmp(&other.lit))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Max-priority queue of literals keyed by occurrence count with lazy
/// invalidation: superseded entries are discarded on pop, and an entry
/// whose stored count no longer matches is re-keyed and reinserted.
/// Count ties pop the highest variable index first, negative polarity
/// before positive, matching a dense-literal-encoding max-heap.
#[derive(Default)]
pub struct LiteralQueue {
    heap: BinaryHeap<QueueEntry>,
    entries: HashMap<Literal, usize>,
}

impl LiteralQueue {
    pub fn new() -> LiteralQueue {
        LiteralQueue::default()
    }

    pub fn push(&mut self, lit: Literal, count: usize) {
        self.entries.insert(lit, count);
        self.heap.push(QueueEntry { count, lit });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pops the literal with the highest current occurrence count.
    pub fn pop(&mut self, current: impl Fn(Literal) -> usize) -> Option<(Literal, usize)> {
        while let Some(entry) = self.heap.pop() {
            if self.entries.get(&entry.lit) != Some(&entry.count) {
                continue;
            }
            self.entries.remove(&entry.lit);
            let now = current(entry.lit);
            if now != entry.count {
                if now > 0 {
                    self.push(entry.lit, now);
                }
                continue;
            }
            return Some((entry.lit, now));
        }
        None
    }
}

/// The result of an engine run.
#[derive(Debug)]
pub struct BvaRun {
    pub formula: Formula,
    pub records: Vec<ReplacementRecord>,
    /// True when the time budget expired before the queue was exhausted.
    pub partial: bool,
}

/// Runs bounded variable addition to fixpoint (or until the replacement or
/// time budget is hit): repeatedly pops the highest-occurrence literal,
/// grows a grid from it, and replaces the grid if it passes the size test.
/// Literals touched by a replacement are re-enqueued, including the two
/// literals of the fresh variable.
pub fn run_bva(f: Formula, cfg: &EngineConfig) -> Result<BvaRun, EngineError> {
    let mut f = f;
    let mut idx = OccurrenceIndex::build(&f);
    let mut queue = LiteralQueue::new();
    for var in 1..=f.num_vars() {
        for lit in [Literal::new(var, true), Literal::new(var, false)] {
            let count = idx.count(lit);
            if count > 0 {
                queue.push(lit, count);
            }
        }
    }

    let mut vig = match cfg.tiebreak {
        Tiebreak::ThreeHop => Some(Vig::build(&f)),
        _ => None,
    };
    let mut ctx = TieBreakCtx::new(cfg.tiebreak);
    let deadline = cfg.time_budget.map(|budget| Instant::now() + budget);
    let max_replacements = cfg.max_replacements.unwrap_or(usize::MAX);

    let mut records: Vec<ReplacementRecord> = Vec::new();
    let mut partial = false;
    loop {
        if records.len() >= max_replacements {
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            partial = !queue.is_empty();
            break;
        }
        let Some((lit, count)) = queue.pop(|l| idx.count(l)) else {
            break;
        };
        if count < 2 {
            continue;
        }
        let grown = grow_grid(&f, &idx, lit, cfg, vig.as_ref(), &mut ctx);
        if !accept_grid(&grown.grid, cfg) {
            continue;
        }
        let record = apply_replacement(&mut f, &mut idx, &grown.grid)?;
        let added = record.added_clauses();
        let removed = record.deleted_clauses();
        if let Some(v) = vig.as_mut() {
            if !cfg.freeze_vig {
                v.apply_delta(&added, &removed)?;
                ctx.invalidate_hops();
            }
        }
        let mut touched: HashSet<Literal> = HashSet::new();
        for clause in added.iter().chain(removed.iter()) {
            touched.extend(clause.lits().iter().copied());
        }
        for lit in touched {
            queue.push(lit, idx.count(lit));
        }
        records.push(record);
    }

    Ok(BvaRun {
        formula: f,
        records,
        partial,
    })
}
