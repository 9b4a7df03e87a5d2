//! Surface tests for the command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use sbva::{check_proof, parse_dimacs_str, DratLine, DratProof, Literal};
use sbva_cli::{run_pipeline, PipelineConfig, SolveStatus, Variant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbva"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn stats_reports_live_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "f.cnf", "p cnf 3 2\n1 2 0\n-1 3 0\n");
    let out = bin().arg("stats").arg(&input).output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "vars=3 clauses=2"
    );
}

#[test]
fn parse_error_exits_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "bad.cnf", "p cnf 2 1\n1 two 0\n");
    let out = bin().arg("stats").arg(&input).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("line 2"),
        "diagnostic missing line number: {stderr}"
    );
}

#[test]
fn preprocess_reports_stats_line_and_writes_proof() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "grid.cnf",
        "p cnf 7 8\n1 3 4 0\n1 3 5 0\n1 5 6 0\n1 7 0\n2 3 4 0\n2 3 5 0\n2 5 6 0\n2 7 0\n",
    );
    let output = dir.path().join("out.cnf");
    let proof = dir.path().join("out.drat");
    let out = bin()
        .arg("preprocess")
        .arg(&input)
        .arg("-o")
        .arg(&output)
        .arg("--proof")
        .arg(&proof)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("vars_before=7 clauses_before=8"),
        "stats line: {stderr}"
    );
    assert!(
        stderr.contains("vars_after=8 clauses_after=6"),
        "stats line: {stderr}"
    );
    assert!(stderr.contains("replacements=1"), "stats line: {stderr}");

    let rewritten = parse_dimacs_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(rewritten.live_clause_count(), 6);

    // The proof file replays the original into the rewritten formula.
    let original = parse_dimacs_str(&std::fs::read_to_string(&input).unwrap()).unwrap();
    let proof_text = std::fs::read_to_string(&proof).unwrap();
    let lines: Vec<DratLine> = proof_text
        .lines()
        .map(|line| {
            let (is_delete, rest) = match line.strip_prefix("d ") {
                Some(rest) => (true, rest),
                None => (false, line),
            };
            let lits: Vec<Literal> = rest
                .split_whitespace()
                .map(|t| t.parse::<i32>().unwrap())
                .take_while(|&v| v != 0)
                .map(Literal::from_dimacs)
                .collect();
            if is_delete {
                DratLine::Delete(lits)
            } else {
                DratLine::Add(lits)
            }
        })
        .collect();
    assert_eq!(lines.len(), 14, "6 additions + 8 deletions");
    let parsed_proof = DratProof::from_lines(lines);
    let replayed = check_proof(&original, &parsed_proof).unwrap();
    assert_eq!(replayed, rewritten.live_clause_multiset());
}

#[test]
fn preprocess_zero_timeout_passes_input_through() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "grid.cnf",
        "p cnf 7 8\n1 3 4 0\n1 3 5 0\n1 5 6 0\n1 7 0\n2 3 4 0\n2 3 5 0\n2 5 6 0\n2 7 0\n",
    );
    let output = dir.path().join("out.cnf");
    let proof = dir.path().join("out.drat");
    let out = bin()
        .arg("preprocess")
        .arg(&input)
        .args(["--timeout", "0", "-o"])
        .arg(&output)
        .arg("--proof")
        .arg(&proof)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("partial=true"));
    let written = parse_dimacs_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(
        written.live_clause_count(),
        8,
        "input passed through unchanged"
    );
    assert_eq!(
        std::fs::read_to_string(&proof).unwrap(),
        "",
        "empty proof for a no-op"
    );
}

#[test]
fn preprocess_empty_formula_is_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "empty.cnf", "p cnf 0 0\n");
    let out = bin().arg("preprocess").arg(&input).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "p cnf 0 0\n");
}

#[test]
fn preprocess_tiebreak_and_condition_flags_parse() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "f.cnf", "p cnf 2 1\n1 2 0\n");
    for args in [
        vec!["--tiebreak", "sorted"],
        vec!["--tiebreak", "random", "--seed", "9"],
        vec!["--tiebreak", "3hop", "--freeze-vig"],
        vec!["--condition", "vars-plus-clauses"],
        vec!["--max-replacements", "3"],
    ] {
        let out = bin()
            .arg("preprocess")
            .arg(&input)
            .args(&args)
            .output()
            .unwrap();
        assert!(out.status.success(), "args {args:?} failed");
    }
}

#[test]
fn scramble_is_seed_deterministic_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "f.cnf",
        "p cnf 4 4\n1 2 0\n-1 3 0\n2 -3 4 0\n-2 -4 0\n",
    );
    let run = |seed: &str| {
        let out = bin()
            .arg("scramble")
            .arg(&input)
            .args(["--seed", seed, "--permute-vars", "--permute-clauses"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn scramble_shuffle_literals_changes_bytes_not_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "f.cnf",
        "p cnf 5 2\n1 2 3 4 5 0\n-1 -2 -3 -4 -5 0\n",
    );
    let plain = bin()
        .arg("scramble")
        .arg(&input)
        .args(["--seed", "3", "--flip-prob", "0"])
        .output()
        .unwrap();
    let shuffled = bin()
        .arg("scramble")
        .arg(&input)
        .args(["--seed", "3", "--flip-prob", "0", "--shuffle-literals"])
        .output()
        .unwrap();
    let plain = String::from_utf8(plain.stdout).unwrap();
    let shuffled = String::from_utf8(shuffled.stdout).unwrap();
    assert_ne!(plain, shuffled, "shuffle must be visible in the bytes");
    let a = parse_dimacs_str(&plain).unwrap();
    let b = parse_dimacs_str(&shuffled).unwrap();
    assert_eq!(a.live_clause_multiset(), b.live_clause_multiset());
}

#[test]
fn scramble_emit_record_comments_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "f.cnf", "p cnf 3 2\n1 2 0\n-2 3 0\n");
    let out = bin()
        .arg("scramble")
        .arg(&input)
        .args(["--seed", "5", "--permute-vars", "--emit-record"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("c scramble seed=5"));
    assert!(text.contains("c scramble var "));
    let parsed = parse_dimacs_str(&text).unwrap();
    assert_eq!(parsed.live_clause_count(), 2);
}

#[test]
fn gen_php_and_legend_files() {
    let dir = tempfile::tempdir().unwrap();
    let php = dir.path().join("php.cnf");
    let status = bin()
        .args(["gen", "php", "--pigeons", "3", "--holes", "2", "-o"])
        .arg(&php)
        .status()
        .unwrap();
    assert!(status.success());
    let f = parse_dimacs_str(&std::fs::read_to_string(&php).unwrap()).unwrap();
    assert_eq!((f.num_vars(), f.live_clause_count()), (6, 9));

    let packing = dir.path().join("packing.cnf");
    let legend = dir.path().join("legend.csv");
    let status = bin()
        .args([
            "gen",
            "packing",
            "--r",
            "1",
            "--k",
            "2",
            "--center-color",
            "1",
            "-o",
        ])
        .arg(&packing)
        .arg("--legend")
        .arg(&legend)
        .status()
        .unwrap();
    assert!(status.success());
    let legend_text = std::fs::read_to_string(&legend).unwrap();
    let mut lines = legend_text.lines();
    assert_eq!(lines.next(), Some("var,tile_x,tile_y,color"));
    assert_eq!(
        legend_text.lines().count(),
        1 + 10,
        "5 tiles x 2 colors plus header"
    );
}

#[test]
fn heatmap_emits_nonzero_rows_with_header() {
    let dir = tempfile::tempdir().unwrap();
    // Path a-b-c: H(a,b) = 2, H(a,c) = 0.
    let input = write_file(dir.path(), "f.cnf", "p cnf 3 2\n1 2 0\n2 3 0\n");
    let out = bin()
        .arg("heatmap")
        .arg(&input)
        .args(["--var", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "var,h\n2,2\n");

    let bad = bin()
        .arg("heatmap")
        .arg(&input)
        .args(["--var", "9"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

fn stub_solver(dir: &Path, sleep_s: f64, exit: u8) -> PathBuf {
    use std::os::unix::fs::PermissionsExt;
    let path = dir.join(format!("solver_{exit}.sh"));
    let mut file = std::fs::File::create(&path).unwrap();
    writeln!(file, "#!/bin/sh\nsleep {sleep_s}\nexit {exit}").unwrap();
    let mut perms = file.metadata().unwrap().permissions();
    perms.set_mode(0o755);
    std::fs::set_permissions(&path, perms).unwrap();
    path
}

#[test]
fn pipeline_baseline_never_preprocesses() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "grid.cnf",
        "p cnf 7 8\n1 3 4 0\n1 3 5 0\n1 5 6 0\n1 7 0\n2 3 4 0\n2 3 5 0\n2 5 6 0\n2 7 0\n",
    );
    let solver = stub_solver(dir.path(), 0.0, 20);
    let mut cfg = PipelineConfig::new(Variant::Baseline, solver.display().to_string());
    cfg.repeats = 2;
    cfg.total_budget_secs = 10.0;
    let mut csv = Vec::new();
    let results = run_pipeline(&cfg, &[input], &mut csv).unwrap();
    let run = &results[0];
    assert!(run.solved);
    for r in &run.repeats {
        assert_eq!(r.status, SolveStatus::Unsat);
        assert_eq!(r.replacements, 0);
        assert_eq!(r.vars_after, r.vars_before);
        assert_eq!(r.clauses_after, r.clauses_before);
    }
    assert_eq!(run.compression_factor, 1.0);
}

#[test]
fn pipeline_rewrites_for_bva_variants() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "grid.cnf",
        "p cnf 7 8\n1 3 4 0\n1 3 5 0\n1 5 6 0\n1 7 0\n2 3 4 0\n2 3 5 0\n2 5 6 0\n2 7 0\n",
    );
    let solver = stub_solver(dir.path(), 0.0, 10);
    for variant in [Variant::BvaOrig, Variant::BvaRandOrig, Variant::BvaRand3hop] {
        let mut cfg = PipelineConfig::new(variant, solver.display().to_string());
        cfg.repeats = 1;
        cfg.total_budget_secs = 10.0;
        let mut csv = Vec::new();
        let results = run_pipeline(&cfg, std::slice::from_ref(&input), &mut csv).unwrap();
        let run = &results[0];
        assert!(run.solved, "variant {variant:?}");
        assert_eq!(run.repeats[0].replacements, 1);
        assert_eq!(run.repeats[0].clauses_after, 6);
        assert!(run.compression_factor > 1.3);
    }
}

#[test]
fn pipeline_env_var_overrides_solver_command() {
    // Exercised through the binary so the override stays scoped to a
    // child process.
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "f.cnf", "p cnf 2 1\n1 2 0\n");
    let solver = stub_solver(dir.path(), 0.0, 10);
    let report = dir.path().join("report.csv");
    let out = bin()
        .arg("pipeline")
        .arg(&input)
        .args([
            "--variant",
            "baseline",
            "--solver",
            "/nonexistent-solver-command",
            "--repeats",
            "1",
            "--total-budget",
            "10",
            "-o",
        ])
        .arg(&report)
        .env(sbva_cli::SOLVER_ENV_VAR, solver.display().to_string())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&report).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(
        row.contains(",sat,"),
        "row should be solved via the env solver: {row}"
    );
}

#[test]
fn pipeline_marks_unreadable_instances_errored_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_file(dir.path(), "good.cnf", "p cnf 2 1\n1 2 0\n");
    let missing = dir.path().join("missing.cnf");
    let solver = stub_solver(dir.path(), 0.0, 10);
    let mut cfg = PipelineConfig::new(Variant::Baseline, solver.display().to_string());
    cfg.repeats = 1;
    cfg.total_budget_secs = 5.0;
    let mut csv = Vec::new();
    let results = run_pipeline(&cfg, &[missing, good], &mut csv).unwrap();
    assert_eq!(results.len(), 2);
    assert!(!results[0].solved);
    assert_eq!(results[0].repeats[0].status, SolveStatus::Error);
    assert_eq!(
        results[0].par2, 10.0,
        "errored instance scores the PAR-2 penalty"
    );
    assert!(results[1].solved);
}

#[test]
fn pipeline_missing_solver_marks_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(dir.path(), "f.cnf", "p cnf 2 1\n1 2 0\n");
    let mut cfg = PipelineConfig::new(Variant::Baseline, "/definitely/not/a/solver");
    cfg.repeats = 1;
    cfg.total_budget_secs = 5.0;
    let mut csv = Vec::new();
    let results = run_pipeline(&cfg, &[input], &mut csv).unwrap();
    assert_eq!(results[0].repeats[0].status, SolveStatus::Error);
    assert!(!results[0].solved);
}
