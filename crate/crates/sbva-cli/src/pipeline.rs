//! Per-instance pipeline: optional pre-scramble, budgeted preprocessing
//! with fallback to the original formula, post-scramble, then an external
//! solver run under the remaining budget.
//!
//! Accounting follows the competition convention: scramble time is free,
//! parse and rewrite time count against the preprocessing budget, and an
//! instance that is not solved within the total budget scores twice the
//! budget (PAR-2). Repeats are averaged; an instance counts as solved if
//! any repeat solved it.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use sbva::{
    parse_dimacs, run_bva, scramble, write_dimacs, EngineConfig, Formula, FormulaStats,
    ScrambleConfig, Tiebreak,
};

/// Environment variable overriding the configured solver command.
pub const SOLVER_ENV_VAR: &str = "SBVA_SOLVER";

/// Column layout of the report CSV, one row per (instance, repeat).
pub const CSV_HEADER: &str = "instance,variant,repeat,vars_before,clauses_before,vars_after,\
                              clauses_after,replacements,preprocess_s,solve_s,status,par2";

/// The four experiment arms: whether the input is scrambled before
/// preprocessing, and which preprocessor (if any) runs. Every arm
/// scrambles before solving.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Variant {
    #[value(name = "baseline")]
    Baseline,
    #[value(name = "bva-orig")]
    BvaOrig,
    #[value(name = "bva-rand-orig")]
    BvaRandOrig,
    #[value(name = "bva-rand-3hop")]
    BvaRand3hop,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::BvaOrig => "bva-orig",
            Variant::BvaRandOrig => "bva-rand-orig",
            Variant::BvaRand3hop => "bva-rand-3hop",
        }
    }

    fn scrambles_before_preprocess(&self) -> bool {
        matches!(self, Variant::BvaRandOrig | Variant::BvaRand3hop)
    }

    fn tiebreak(&self) -> Option<Tiebreak> {
        match self {
            Variant::Baseline => None,
            Variant::BvaOrig | Variant::BvaRandOrig => Some(Tiebreak::Sorted),
            Variant::BvaRand3hop => Some(Tiebreak::ThreeHop),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "bva-orig" => Ok(Variant::BvaOrig),
            "bva-rand-orig" => Ok(Variant::BvaRandOrig),
            "bva-rand-3hop" => Ok(Variant::BvaRand3hop),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub variant: Variant,
    /// Wall-clock budget for parsing plus rewriting, seconds.
    pub preprocess_budget_secs: f64,
    /// Total budget per repeat (preprocess + solve), seconds.
    pub total_budget_secs: f64,
    /// Solver command; split on whitespace, `{}` replaced by the CNF path
    /// (appended when absent). Exit 10 means SAT, 20 means UNSAT.
    pub solver: String,
    pub repeats: u32,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(variant: Variant, solver: impl Into<String>) -> PipelineConfig {
        PipelineConfig {
            variant,
            preprocess_budget_secs: 200.0,
            total_budget_secs: 5000.0,
            solver: solver.into(),
            repeats: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("formula after preprocessing reports zero clauses; compression undefined")]
    EmptyAfter,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Ratio of live-clause counts before and after preprocessing.
pub fn compression_factor(before: FormulaStats, after: FormulaStats) -> Result<f64, HarnessError> {
    if after.num_clauses == 0 {
        return Err(HarnessError::EmptyAfter);
    }
    Ok(before.num_clauses as f64 / after.num_clauses as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
    Error,
}

impl SolveStatus {
    pub fn solved(&self) -> bool {
        matches!(self, SolveStatus::Sat | SolveStatus::Unsat)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Timeout => "timeout",
            SolveStatus::Error => "error",
        }
    }
}

/// One repeat of one instance.
#[derive(Clone, Debug)]
pub struct RepeatResult {
    pub repeat: u32,
    pub vars_before: u32,
    pub clauses_before: usize,
    pub vars_after: u32,
    pub clauses_after: usize,
    pub replacements: usize,
    pub preprocess_s: f64,
    pub solve_s: f64,
    pub status: SolveStatus,
    /// Total time when solved within budget, twice the budget otherwise.
    pub par2: f64,
}

/// Per-instance aggregate over repeats.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub instance: String,
    pub repeats: Vec<RepeatResult>,
    /// Mean clause-count compression over repeats.
    pub compression_factor: f64,
    /// PAR-2 averaged over repeats.
    pub par2: f64,
    /// Solved by at least one repeat.
    pub solved: bool,
}

/// Runs every instance through the configured pipeline, streaming one CSV
/// row per repeat to `csv`. Unreadable instances are marked errored and
/// the run continues.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    instances: &[PathBuf],
    csv: &mut dyn Write,
) -> Result<Vec<RunResult>, HarnessError> {
    writeln!(csv, "{CSV_HEADER}")?;
    let solver = std::env::var(SOLVER_ENV_VAR).unwrap_or_else(|_| cfg.solver.clone());
    let mut results = Vec::with_capacity(instances.len());
    for (index, path) in instances.iter().enumerate() {
        let result = run_instance(cfg, &solver, index, path, csv)?;
        log::info!(
            "{}: variant={} par2={:.3} solved={}",
            result.instance,
            cfg.variant.name(),
            result.par2,
            result.solved
        );
        results.push(result);
    }
    Ok(results)
}

fn run_instance(
    cfg: &PipelineConfig,
    solver: &str,
    index: usize,
    path: &Path,
    csv: &mut dyn Write,
) -> Result<RunResult, HarnessError> {
    let instance = path.display().to_string();
    let mut repeats = Vec::with_capacity(cfg.repeats as usize);
    for repeat in 0..cfg.repeats {
        let outcome = run_repeat(cfg, solver, index, path, repeat);
        write_row(csv, &instance, cfg.variant, &outcome)?;
        repeats.push(outcome);
    }
    let par2 = repeats.iter().map(|r| r.par2).sum::<f64>() / repeats.len().max(1) as f64;
    let solved = repeats.iter().any(|r| r.status.solved());
    let compression = repeats
        .iter()
        .map(|r| {
            if r.clauses_after == 0 {
                1.0
            } else {
                r.clauses_before as f64 / r.clauses_after as f64
            }
        })
        .sum::<f64>()
        / repeats.len().max(1) as f64;
    Ok(RunResult {
        instance,
        repeats,
        compression_factor: compression,
        par2,
        solved,
    })
}

fn run_repeat(
    cfg: &PipelineConfig,
    solver: &str,
    instance_index: usize,
    path: &Path,
    repeat: u32,
) -> RepeatResult {
    let total_budget = cfg.total_budget_secs;
    let errored = |preprocess_s: f64| RepeatResult {
        repeat,
        vars_before: 0,
        clauses_before: 0,
        vars_after: 0,
        clauses_after: 0,
        replacements: 0,
        preprocess_s,
        solve_s: 0.0,
        status: SolveStatus::Error,
        par2: 2.0 * total_budget,
    };

    // Parse time counts against the preprocessing budget.
    let clock = Instant::now();
    let parsed = File::open(path)
        .map_err(|e| e.to_string())
        .and_then(|f| parse_dimacs(BufReader::new(f)).map_err(|e| e.to_string()));
    let mut formula = match parsed {
        Ok(p) => p.formula,
        Err(err) => {
            log::error!("{}: marking repeat {repeat} errored: {err}", path.display());
            return errored(clock.elapsed().as_secs_f64());
        }
    };

    // Scramble stages are not charged to any budget.
    if cfg.variant.scrambles_before_preprocess() {
        let seed = derive_seed(cfg.seed, instance_index as u64, repeat as u64, 0);
        formula = scramble(&formula, &ScrambleConfig::pipeline(seed)).0;
    }

    let before = formula.stats();
    let (mut formula, replacements) = match cfg.variant.tiebreak() {
        None => (formula, 0),
        Some(tiebreak) => {
            let budget = (cfg.preprocess_budget_secs - clock.elapsed().as_secs_f64())
                .min(total_budget - clock.elapsed().as_secs_f64())
                .max(0.0);
            let engine_cfg = EngineConfig {
                tiebreak,
                time_budget: Some(Duration::from_secs_f64(budget)),
                ..EngineConfig::default()
            };
            match run_bva(formula.clone(), &engine_cfg) {
                Ok(run) if !run.partial => (run.formula, run.records.len()),
                Ok(_) => {
                    // Budget expired: solve the formula the preprocessor was
                    // handed, with the spent time still charged.
                    log::warn!("{}: preprocess budget expired, using input", path.display());
                    (formula, 0)
                }
                Err(err) => {
                    log::error!(
                        "{}: preprocessor failed ({err}), using input",
                        path.display()
                    );
                    (formula, 0)
                }
            }
        }
    };
    let after = formula.stats();
    let preprocess_s = clock.elapsed().as_secs_f64();

    let seed = derive_seed(cfg.seed, instance_index as u64, repeat as u64, 1);
    formula = scramble(&formula, &ScrambleConfig::pipeline(seed)).0;

    let base = RepeatResult {
        repeat,
        vars_before: before.num_vars,
        clauses_before: before.num_clauses,
        vars_after: after.num_vars,
        clauses_after: after.num_clauses,
        replacements,
        preprocess_s,
        solve_s: 0.0,
        status: SolveStatus::Error,
        par2: 2.0 * total_budget,
    };

    let remaining = total_budget - preprocess_s;
    if remaining <= 0.0 {
        return RepeatResult {
            status: SolveStatus::Timeout,
            ..base
        };
    }
    let (status, solve_s) = match solve_external(solver, &formula, remaining) {
        Ok(pair) => pair,
        Err(err) => {
            log::error!("{}: solver failed: {err}", path.display());
            (SolveStatus::Error, 0.0)
        }
    };
    let par2 = if status.solved() {
        preprocess_s + solve_s
    } else {
        2.0 * total_budget
    };
    RepeatResult {
        solve_s,
        status,
        par2,
        ..base
    }
}

/// Writes the formula to a temp file and runs the solver on it, killing
/// the process at the deadline. SAT-standard exit codes: 10 SAT, 20 UNSAT.
fn solve_external(
    solver: &str,
    formula: &Formula,
    budget_secs: f64,
) -> Result<(SolveStatus, f64), HarnessError> {
    let mut tmp = tempfile::Builder::new()
        .prefix("sbva-pipe-")
        .suffix(".cnf")
        .tempfile()?;
    write_dimacs(formula, &mut tmp)?;
    tmp.flush()?;

    let mut parts = solver.split_whitespace();
    let program = parts.next().unwrap_or_default();
    let mut args: Vec<String> = parts.map(str::to_string).collect();
    let path_str = tmp.path().display().to_string();
    if let Some(slot) = args.iter_mut().find(|a| *a == "{}") {
        *slot = path_str;
    } else {
        args.push(path_str);
    }

    let clock = Instant::now();
    let mut child = Command::new(program)
        .args(&args)
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()?;
    let deadline = Duration::from_secs_f64(budget_secs);
    loop {
        match child.try_wait()? {
            Some(exit) => {
                let solve_s = clock.elapsed().as_secs_f64();
                let status = match exit.code() {
                    Some(10) => SolveStatus::Sat,
                    Some(20) => SolveStatus::Unsat,
                    // Anything else (including signals) is an abnormal stop.
                    _ => SolveStatus::Error,
                };
                return Ok((status, solve_s));
            }
            None if clock.elapsed() >= deadline => {
                child.kill().ok();
                child.wait()?;
                return Ok((SolveStatus::Timeout, clock.elapsed().as_secs_f64()));
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    }
}

fn write_row(
    csv: &mut dyn Write,
    instance: &str,
    variant: Variant,
    r: &RepeatResult,
) -> Result<(), HarnessError> {
    writeln!(
        csv,
        "{instance},{},{},{},{},{},{},{},{:.6},{:.6},{},{:.6}",
        variant.name(),
        r.repeat,
        r.vars_before,
        r.clauses_before,
        r.vars_after,
        r.clauses_after,
        r.replacements,
        r.preprocess_s,
        r.solve_s,
        r.status.name(),
        r.par2
    )?;
    Ok(())
}

/// Splitmix-style mixing so each (instance, repeat, stage) gets an
/// independent, reproducible scramble seed.
fn derive_seed(base: u64, instance: u64, repeat: u64, stage: u64) -> u64 {
    let mut z = base
        .wrapping_add(instance.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(repeat.wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add(stage.wrapping_mul(0x94d0_49bb_1331_11eb));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
