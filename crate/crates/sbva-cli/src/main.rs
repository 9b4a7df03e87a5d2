//! `sbva`: CNF preprocessing by bounded variable addition, plus the
//! surrounding tooling (generators, scrambler, heatmaps, benchmark
//! pipeline).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sbva::{
    export_heatmap, gen_packing, gen_php, parse_dimacs, run_bva, scramble, write_dimacs,
    write_dimacs_with_orders, EngineConfig, Formula, PackingSpec, Parsed, PigeonholeSpec,
    ReductionCondition, ScrambleConfig, Tiebreak, Vig,
};
use sbva_cli::{run_pipeline, PipelineConfig, Variant, SOLVER_ENV_VAR};

#[derive(Parser)]
#[command(
    name = "sbva",
    version,
    about = "CNF preprocessing by bounded variable addition"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Rewrite a formula by repeated bounded variable addition.
    Preprocess(PreprocessArgs),
    /// Randomize variable names, polarities, clause order, or literal order.
    Scramble(ScrambleArgs),
    /// Generate benchmark instances.
    #[command(subcommand)]
    Gen(GenCmd),
    /// Print variable and live-clause counts of a formula.
    Stats { input: PathBuf },
    /// Export the 3-hop connectivity row of one variable as CSV.
    Heatmap(HeatmapArgs),
    /// Scramble, preprocess, and solve instances under time budgets.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TiebreakArg {
    Sorted,
    Random,
    #[value(name = "3hop", alias = "three-hop")]
    ThreeHop,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Strict,
    VarsPlusClauses,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input DIMACS CNF file.
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// How to break literal-selection ties.
    #[arg(long, value_enum, default_value_t = TiebreakArg::Sorted)]
    tiebreak: TiebreakArg,
    /// Seed for the random tie-break mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop after this many variable additions.
    #[arg(long)]
    max_replacements: Option<usize>,
    /// Preprocessing time budget in seconds; on expiry the input is
    /// written back unchanged.
    #[arg(long)]
    timeout: Option<f64>,
    /// Write a DRAT proof of the rewrite to this file.
    #[arg(long)]
    proof: Option<PathBuf>,
    /// Size test a grid must pass before being replaced.
    #[arg(long, value_enum, default_value_t = ConditionArg::Strict)]
    condition: ConditionArg,
    /// Compute 3-hop values on the input formula instead of tracking
    /// rewrites.
    #[arg(long)]
    freeze_vig: bool,
}

#[derive(Args)]
struct ScrambleArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Apply a uniform variable-name permutation.
    #[arg(long)]
    permute_vars: bool,
    /// Apply a uniform clause-order permutation.
    #[arg(long)]
    permute_clauses: bool,
    /// Shuffle the literal order written within each clause.
    #[arg(long)]
    shuffle_literals: bool,
    /// Per-variable polarity flip probability.
    #[arg(long, default_value_t = 0.5)]
    flip_prob: f64,
    /// Record the applied mapping as comment lines in the output.
    #[arg(long)]
    emit_record: bool,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Packing k-coloring of a taxicab ball, direct encoding.
    Packing {
        /// Ball radius.
        #[arg(long)]
        r: u32,
        /// Number of colors.
        #[arg(long)]
        k: u32,
        /// Color pinned at the center tile (defaults to k).
        #[arg(long)]
        center_color: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write a variable legend CSV (var,tile_x,tile_y,color).
        #[arg(long)]
        legend: Option<PathBuf>,
    },
    /// Pigeonhole principle instance.
    Php {
        #[arg(long)]
        pigeons: u32,
        #[arg(long)]
        holes: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct HeatmapArgs {
    input: PathBuf,
    /// Query variable.
    #[arg(long)]
    var: u32,
    /// Output CSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Instances to run.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, value_enum)]
    variant: Variant,
    /// Solver command; `{}` is replaced by the CNF path. Overridden by
    /// the SBVA_SOLVER environment variable.
    #[arg(long, default_value = "cadical")]
    solver: String,
    /// Preprocessing budget per repeat, seconds.
    #[arg(long, default_value_t = 200.0)]
    preprocess_budget: f64,
    /// Total budget per repeat, seconds.
    #[arg(long, default_value_t = 5000.0)]
    total_budget: f64,
    #[arg(long, default_value_t = 3)]
    repeats: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report CSV path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Preprocess(args) => cmd_preprocess(args),
        Cmd::Scramble(args) => cmd_scramble(args),
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Stats { input } => cmd_stats(input),
        Cmd::Heatmap(args) => cmd_heatmap(args),
        Cmd::Pipeline(args) => cmd_pipeline(args),
    }
}

fn read_formula(path: &PathBuf) -> Result<Formula> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let Parsed { formula, warnings } = parse_dimacs(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))?;
    for warning in warnings {
        log::warn!("{}: {warning}", path.display());
    }
    Ok(formula)
}

fn output_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<()> {
    let clock = Instant::now();
    let input = read_formula(&args.input)?;
    let before = input.stats();

    let cfg = EngineConfig {
        tiebreak: match args.tiebreak {
            TiebreakArg::Sorted => Tiebreak::Sorted,
            TiebreakArg::Random => Tiebreak::Random { seed: args.seed },
            TiebreakArg::ThreeHop => Tiebreak::ThreeHop,
        },
        reduction_condition: match args.condition {
            ConditionArg::Strict => ReductionCondition::StrictClauseDecrease,
            ConditionArg::VarsPlusClauses => ReductionCondition::VarsPlusClauses,
        },
        max_replacements: args.max_replacements,
        time_budget: args.timeout.map(|secs| {
            // Parsing already consumed part of the budget.
            Duration::from_secs_f64((secs - clock.elapsed().as_secs_f64()).max(0.0))
        }),
        freeze_vig: args.freeze_vig,
    };
    let run = run_bva(input.clone(), &cfg)?;

    // On budget expiry the original formula is passed through so the
    // caller can hand it to a solver unchanged.
    let (result, records): (&Formula, &[_]) = if run.partial {
        (&input, &[])
    } else {
        (&run.formula, &run.records)
    };

    let mut out = output_writer(&args.output)?;
    write_dimacs(result, &mut out)?;
    out.flush()?;

    if let Some(proof_path) = &args.proof {
        let proof = sbva::DratProof::from_records(records);
        let mut w = BufWriter::new(
            File::create(proof_path)
                .with_context(|| format!("creating {}", proof_path.display()))?,
        );
        proof.write_text(&mut w)?;
        w.flush()?;
    }

    let after = result.stats();
    eprintln!(
        "vars_before={} clauses_before={} vars_after={} clauses_after={} replacements={} time_s={:.3} partial={}",
        before.num_vars,
        before.num_clauses,
        after.num_vars,
        after.num_clauses,
        records.len(),
        clock.elapsed().as_secs_f64(),
        run.partial
    );
    Ok(())
}

fn cmd_scramble(args: ScrambleArgs) -> Result<()> {
    let input = read_formula(&args.input)?;
    let cfg = ScrambleConfig {
        seed: args.seed,
        permute_vars: args.permute_vars,
        permute_clauses: args.permute_clauses,
        shuffle_within_clause: args.shuffle_literals,
        flip_prob: args.flip_prob,
    };
    if !(0.0..=1.0).contains(&args.flip_prob) {
        bail!("--flip-prob must be within [0, 1]");
    }
    let (out, record) = scramble(&input, &cfg);

    let mut w = output_writer(&args.output)?;
    if args.emit_record {
        writeln!(w, "c scramble seed={}", args.seed)?;
        for (old, (&new, &flip)) in record.var_map.iter().zip(&record.flipped).enumerate() {
            writeln!(w, "c scramble var {} {} {}", old + 1, new, u8::from(flip))?;
        }
        for (pos, &src) in record.source_of.iter().enumerate() {
            writeln!(w, "c scramble clause {pos} {src}")?;
        }
    }
    match &record.literal_orders {
        Some(orders) => write_dimacs_with_orders(&out, orders, &mut w)?,
        None => write_dimacs(&out, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_gen(cmd: GenCmd) -> Result<()> {
    match cmd {
        GenCmd::Packing {
            r,
            k,
            center_color,
            output,
            legend,
        } => {
            let mut spec = PackingSpec::new(r, k);
            if let Some(c) = center_color {
                if !(1..=k).contains(&c) {
                    bail!("--center-color must be within 1..={k}");
                }
                spec = spec.with_center_color(c);
            }
            let (formula, entries) = gen_packing(&spec);
            let mut w = output_writer(&output)?;
            write_dimacs(&formula, &mut w)?;
            w.flush()?;
            if let Some(path) = legend {
                let mut lw = BufWriter::new(
                    File::create(&path).with_context(|| format!("creating {}", path.display()))?,
                );
                writeln!(lw, "var,tile_x,tile_y,color")?;
                for e in entries {
                    writeln!(lw, "{},{},{},{}", e.var, e.tile_x, e.tile_y, e.color)?;
                }
                lw.flush()?;
            }
        }
        GenCmd::Php {
            pigeons,
            holes,
            output,
        } => {
            let formula = gen_php(&PigeonholeSpec::new(pigeons, holes));
            let mut w = output_writer(&output)?;
            write_dimacs(&formula, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_stats(input: PathBuf) -> Result<()> {
    let f = read_formula(&input)?;
    let stats = f.stats();
    println!("vars={} clauses={}", stats.num_vars, stats.num_clauses);
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<()> {
    let f = read_formula(&args.input)?;
    if args.var == 0 || args.var > f.num_vars() {
        bail!("variable {} outside 1..={}", args.var, f.num_vars());
    }
    let vig = Vig::build(&f);
    let rows = export_heatmap(&vig, args.var)?;
    let mut w = output_writer(&args.output)?;
    writeln!(w, "var,h")?;
    for (var, h) in rows {
        writeln!(w, "{var},{h}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let cfg = PipelineConfig {
        variant: args.variant,
        preprocess_budget_secs: args.preprocess_budget,
        total_budget_secs: args.total_budget,
        solver: args.solver,
        repeats: args.repeats,
        seed: args.seed,
    };
    if cfg.preprocess_budget_secs <= 0.0 || cfg.total_budget_secs <= 0.0 {
        bail!("budgets must be positive");
    }
    if std::env::var(SOLVER_ENV_VAR).is_ok() {
        log::info!("solver overridden by ${SOLVER_ENV_VAR}");
    }
    let mut out = output_writer(&args.output)?;
    let results = run_pipeline(&cfg, &args.instances, &mut out)?;
    out.flush()?;

    let mean_par2 = results.iter().map(|r| r.par2).sum::<f64>() / results.len().max(1) as f64;
    let solved = results.iter().filter(|r| r.solved).count();
    eprintln!(
        "pipeline variant={} instances={} solved={} mean_par2={:.3}",
        cfg.variant.name(),
        results.len(),
        solved,
        mean_par2
    );
    Ok(())
}
