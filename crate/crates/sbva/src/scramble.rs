//! Seeded formula randomization: variable renaming, polarity flips,
//! clause reordering, and within-clause literal shuffling.
//!
//! The scramble is an isomorphism — the returned record maps the output
//! back onto the input exactly — so satisfiability and all size metrics
//! are preserved. The within-clause shuffle only affects the order
//! literals are *written* in: the in-memory clause model is canonical, so
//! the record carries the shuffled order separately for the writer.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Clause, Formula, Literal};

/// What to randomize and with which seed.
#[derive(Clone, Debug)]
pub struct ScrambleConfig {
    pub seed: u64,
    pub permute_vars: bool,
    pub permute_clauses: bool,
    pub shuffle_within_clause: bool,
    /// Per-variable probability of flipping polarity, in [0, 1].
    pub flip_prob: f64,
}

impl Default for ScrambleConfig {
    fn default() -> Self {
        ScrambleConfig {
            seed: 0,
            permute_vars: false,
            permute_clauses: false,
            shuffle_within_clause: false,
            flip_prob: 0.0,
        }
    }
}

impl ScrambleConfig {
    /// The randomization applied around preprocessing in the benchmark
    /// pipeline: rename variables, flip each with probability 0.5, and
    /// permute clause order.
    pub fn pipeline(seed: u64) -> ScrambleConfig {
        ScrambleConfig {
            seed,
            permute_vars: true,
            permute_clauses: true,
            shuffle_within_clause: false,
            flip_prob: 0.5,
        }
    }
}

/// The mapping a scramble applied, sufficient to invert it.
#[derive(Clone, Debug)]
pub struct ScrambleRecord {
    /// `var_map[v - 1]` is the new name of input variable `v`.
    pub var_map: Vec<u32>,
    /// `flipped[v - 1]`: input variable `v` changed polarity.
    pub flipped: Vec<bool>,
    /// `source_of[j]` is the input live-clause ordinal now at output
    /// position `j`.
    pub source_of: Vec<usize>,
    /// Literal emission order per output clause, when the within-clause
    /// shuffle was requested.
    pub literal_orders: Option<Vec<Vec<Literal>>>,
}

impl ScrambleRecord {
    /// Maps an output literal back to the input literal it came from.
    pub fn invert_literal(&self, lit: Literal) -> Literal {
        let old_var = (self
            .var_map
            .iter()
            .position(|&new| new == lit.var())
            .expect("output variable missing from scramble record")
            + 1) as u32;
        let positive = lit.is_positive() ^ self.flipped[old_var as usize - 1];
        Literal::new(old_var, positive)
    }

    /// Reconstructs the input formula from a scrambled one.
    pub fn invert(&self, scrambled: &Formula) -> Formula {
        let mut inverse = vec![0u32; self.var_map.len()];
        for (old, &new) in self.var_map.iter().enumerate() {
            inverse[new as usize - 1] = old as u32 + 1;
        }
        let live: Vec<&Clause> = scrambled.live_clauses().map(|(_, c)| c).collect();
        let mut f = Formula::new(self.var_map.len() as u32);
        let mut order: Vec<(usize, usize)> = self
            .source_of
            .iter()
            .copied()
            .enumerate()
            .map(|(out, src)| (src, out))
            .collect();
        order.sort_unstable();
        for (_, out_pos) in order {
            let lits = live[out_pos]
                .lits()
                .iter()
                .map(|l| {
                    let old_var = inverse[l.var() as usize - 1];
                    Literal::new(
                        old_var,
                        l.is_positive() ^ self.flipped[old_var as usize - 1],
                    )
                })
                .collect();
            f.add_clause(lits);
        }
        f
    }
}

/// Applies, in order: variable renaming, per-variable polarity flips,
/// clause-order permutation, and within-clause literal shuffling, all
/// driven by one seeded generator. Deleted slots are compacted away.
pub fn scramble(f: &Formula, cfg: &ScrambleConfig) -> (Formula, ScrambleRecord) {
    assert!(
        (0.0..=1.0).contains(&cfg.flip_prob),
        "flip probability {} outside [0, 1]",
        cfg.flip_prob
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = f.num_vars() as usize;

    let mut var_map: Vec<u32> = (1..=n as u32).collect();
    if cfg.permute_vars {
        var_map.shuffle(&mut rng);
    }
    // Flip decisions are drawn for every variable regardless of the
    // probability so the stream consumed by later stages is stable.
    let flipped: Vec<bool> = (0..n).map(|_| rng.gen_bool(cfg.flip_prob)).collect();

    let mapped: Vec<Clause> = f
        .live_clauses()
        .map(|(_, clause)| {
            clause
                .lits()
                .iter()
                .map(|l| {
                    let v = l.var() as usize - 1;
                    Literal::new(var_map[v], l.is_positive() ^ flipped[v])
                })
                .collect()
        })
        .collect();

    let mut source_of: Vec<usize> = (0..mapped.len()).collect();
    if cfg.permute_clauses {
        source_of.shuffle(&mut rng);
    }

    let mut out = Formula::new(f.num_vars());
    for &src in &source_of {
        out.add_normalized(mapped[src].clone());
    }

    let literal_orders = cfg.shuffle_within_clause.then(|| {
        out.live_clauses()
            .map(|(_, clause)| {
                let mut lits = clause.lits().to_vec();
                lits.shuffle(&mut rng);
                lits
            })
            .collect()
    });

    (
        out,
        ScrambleRecord {
            var_map,
            flipped,
            source_of,
            literal_orders,
        },
    )
}
