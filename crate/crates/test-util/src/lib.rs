//! Independent test oracles for the preprocessing suites: brute-force
//! satisfiability, exhaustive walk counting, and formula generators.
//!
//! Everything here deliberately avoids the code paths under test: the
//! solver is a plain DPLL over literal vectors, and the walk counter reads
//! single edge weights instead of doing matrix products.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sbva::{Formula, Literal, Vig};

/// Complete DPLL with unit propagation; the satisfiability oracle.
pub fn dpll_sat(f: &Formula) -> bool {
    // Tautologies are always satisfied; drop them up front.
    let clauses: Vec<Vec<Literal>> = f
        .live_clauses()
        .filter(|(_, c)| !c.is_tautology())
        .map(|(_, c)| c.lits().to_vec())
        .collect();
    let mut assign = vec![None; f.num_vars() as usize];
    solve(&clauses, &mut assign)
}

/// Enumerates every satisfying assignment over `1..=f.num_vars()` and
/// feeds it to `visit`. Exponential; keep the variable count small.
pub fn for_each_model(f: &Formula, mut visit: impl FnMut(&[bool])) {
    let n = f.num_vars() as usize;
    assert!(
        n <= 24,
        "model enumeration is exponential; got {n} variables"
    );
    let clauses: Vec<Vec<Literal>> = f
        .live_clauses()
        .filter(|(_, c)| !c.is_tautology())
        .map(|(_, c)| c.lits().to_vec())
        .collect();
    let mut assignment = vec![false; n];
    for mask in 0u64..(1u64 << n) {
        for (v, slot) in assignment.iter_mut().enumerate() {
            *slot = mask & (1 << v) != 0;
        }
        let ok = clauses.iter().all(|cl| {
            cl.iter()
                .any(|l| assignment[l.var() as usize - 1] == l.is_positive())
        });
        if ok {
            visit(&assignment);
        }
    }
}

fn solve(clauses: &[Vec<Literal>], assign: &mut Vec<Option<bool>>) -> bool {
    // Unit propagation to fixpoint.
    let mut trail: Vec<u32> = Vec::new();
    loop {
        let mut unit: Option<Literal> = None;
        for clause in clauses {
            let mut unassigned = None;
            let mut count = 0;
            let mut satisfied = false;
            for &l in clause {
                match assign[l.var() as usize - 1] {
                    Some(v) if v == l.is_positive() => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        unassigned = Some(l);
                        count += 1;
                    }
                }
            }
            if satisfied {
                continue;
            }
            match count {
                0 => {
                    for v in trail {
                        assign[v as usize - 1] = None;
                    }
                    return false;
                }
                1 => {
                    unit = unassigned;
                    break;
                }
                _ => {}
            }
        }
        match unit {
            Some(l) => {
                assign[l.var() as usize - 1] = Some(l.is_positive());
                trail.push(l.var());
            }
            None => break,
        }
    }

    let next = assign.iter().position(|v| v.is_none());
    let result = match next {
        None => true, // no conflict and nothing unassigned
        Some(v) => [true, false].iter().any(|&value| {
            assign[v] = Some(value);
            let sat = solve(clauses, assign);
            assign[v] = None;
            sat
        }),
    };
    for v in trail {
        assign[v as usize - 1] = None;
    }
    result
}

/// Exhaustive weight-multiplied count of length-3 walks from `x` to `y`:
/// the independent check for the 3-hop heuristic.
pub fn walk_count_3(vig: &Vig, x: u32, y: u32) -> u128 {
    let n = vig.num_vars();
    let mut total: u128 = 0;
    for u in 1..=n {
        let w1 = vig.weight(x, u) as u128;
        if w1 == 0 {
            continue;
        }
        for v in 1..=n {
            let w2 = vig.weight(u, v) as u128;
            if w2 == 0 {
                continue;
            }
            total += w1 * w2 * vig.weight(v, y) as u128;
        }
    }
    total
}

/// Uniform random CNF: up to `max_vars` variables, up to `max_clauses`
/// clauses of width 1..=4 (mostly 2-3).
pub fn random_cnf(rng: &mut ChaCha8Rng, max_vars: u32, max_clauses: usize) -> Formula {
    let n = rng.gen_range(3..=max_vars.max(3));
    let m = rng.gen_range(3..=max_clauses.max(3));
    let mut f = Formula::new(n);
    for _ in 0..m {
        let width = *[1, 2, 2, 3, 3, 3, 4].get(rng.gen_range(0..7)).unwrap();
        let lits: Vec<Literal> = (0..width)
            .map(|_| Literal::new(rng.gen_range(1..=n), rng.gen_bool(0.5)))
            .collect();
        f.add_clause(lits);
    }
    f
}

/// Random CNF with a planted grid: picks row literals and partial clauses,
/// adds their full cross product, then noise clauses. Gives the rewrite
/// engine something to find.
pub fn planted_grid_cnf(rng: &mut ChaCha8Rng, max_vars: u32) -> Formula {
    let n = rng.gen_range(8..=max_vars.max(8));
    let mut f = Formula::new(n);

    let n_rows = rng.gen_range(2..=4usize);
    let n_cols = rng.gen_range(2..=4usize);
    let mut row_vars: Vec<u32> = Vec::new();
    while row_vars.len() < n_rows {
        let v = rng.gen_range(1..=n);
        if !row_vars.contains(&v) {
            row_vars.push(v);
        }
    }
    let rows: Vec<Literal> = row_vars
        .iter()
        .map(|&v| Literal::new(v, rng.gen_bool(0.5)))
        .collect();
    let cols: Vec<Vec<Literal>> = (0..n_cols)
        .map(|_| {
            let width = rng.gen_range(1..=2usize);
            (0..width)
                .map(|_| {
                    // Keep column variables clear of the rows so grid cells
                    // stay non-tautological and pairwise distinct.
                    loop {
                        let v = rng.gen_range(1..=n);
                        if !row_vars.contains(&v) {
                            return Literal::new(v, rng.gen_bool(0.5));
                        }
                    }
                })
                .collect()
        })
        .collect();

    for &row in &rows {
        for col in &cols {
            let mut lits = col.clone();
            lits.push(row);
            f.add_clause(lits);
        }
    }
    for _ in 0..rng.gen_range(0..=15usize) {
        let width = rng.gen_range(1..=3usize);
        let lits: Vec<Literal> = (0..width)
            .map(|_| Literal::new(rng.gen_range(1..=n), rng.gen_bool(0.5)))
            .collect();
        f.add_clause(lits);
    }
    f
}

/// The deterministic mixed corpus used by the equisatisfiability and proof
/// suites: uniform random formulas interleaved with planted-grid ones.
pub fn corpus_formula(seed: u64) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed % 5 < 3 {
        random_cnf(&mut rng, 18, 60)
    } else {
        planted_grid_cnf(&mut rng, 18)
    }
}

/// Seeded generator for callers that need raw randomness.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
