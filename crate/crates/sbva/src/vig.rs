//! Weighted variable incidence graph and the 3-hop connectivity heuristic.
//!
//! Two variables are adjacent iff some live clause contains both; the edge
//! weight is the number of such clauses. The heuristic value between `x`
//! and `y` is the number of weight-multiplied walks of length 3, i.e. the
//! `(x, y)` entry of the cubed adjacency matrix. Only single rows of that
//! cube are ever computed, as three sparse matrix-vector products.

use std::collections::HashMap;

use thiserror::Error;

use crate::cnf::{Clause, Formula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VigError {
    /// A delta removed more co-occurrences of a pair than were recorded.
    #[error("weight underflow on variable pair ({0}, {1})")]
    WeightUnderflow(u32, u32),
    /// Edge weight exceeded the backing integer width.
    #[error("weight overflow on variable pair ({0}, {1})")]
    WeightOverflow(u32, u32),
    /// A path count exceeded the backing integer width.
    #[error("3-hop path count overflow at variable {0}")]
    HopOverflow(u32),
}

/// Symmetric nonnegative-integer adjacency with zero diagonal, stored as a
/// neighbor map per variable (both directions of each edge).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vig {
    adj: Vec<HashMap<u32, u64>>,
}

/// One row of the cubed adjacency matrix: exact path counts from a fixed
/// query variable to every variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopVector {
    counts: Vec<u128>,
}

impl HopVector {
    /// Path count to `var`; variables beyond the vector are isolated.
    pub fn get(&self, var: u32) -> u128 {
        self.counts.get(var as usize - 1).copied().unwrap_or(0)
    }

    /// `(variable, count)` pairs with nonzero count, ascending by variable.
    pub fn nonzero(&self) -> impl Iterator<Item = (u32, u128)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i as u32 + 1, c))
    }
}

impl Vig {
    pub fn new(num_vars: u32) -> Vig {
        Vig {
            adj: vec![HashMap::new(); num_vars as usize],
        }
    }

    /// Builds the graph from the live clauses of `f`: every clause with `k`
    /// distinct variables contributes +1 to all `k(k-1)/2` pairs.
    pub fn build(f: &Formula) -> Vig {
        let mut vig = Vig::new(f.num_vars());
        for (_, clause) in f.live_clauses() {
            vig.bump_clause(clause, true)
                .expect("fresh build cannot under- or overflow");
        }
        vig
    }

    pub fn num_vars(&self) -> u32 {
        self.adj.len() as u32
    }

    pub fn ensure_vars(&mut self, num_vars: u32) {
        if (self.adj.len() as u32) < num_vars {
            self.adj.resize_with(num_vars as usize, HashMap::new);
        }
    }

    /// Co-occurrence weight of a variable pair; zero when out of range.
    pub fn weight(&self, v1: u32, v2: u32) -> u64 {
        if v1 == v2 {
            return 0;
        }
        self.adj
            .get(v1 as usize - 1)
            .and_then(|m| m.get(&v2))
            .copied()
            .unwrap_or(0)
    }

    fn bump_pair(&mut self, v1: u32, v2: u32, add: bool) -> Result<(), VigError> {
        debug_assert_ne!(v1, v2);
        for (a, b) in [(v1, v2), (v2, v1)] {
            let entry = self.adj[a as usize - 1].entry(b);
            if add {
                let slot = entry.or_insert(0);
                *slot = slot
                    .checked_add(1)
                    .ok_or(VigError::WeightOverflow(v1, v2))?;
            } else {
                match entry {
                    std::collections::hash_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= 1;
                        if *o.get() == 0 {
                            o.remove();
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(_) => {
                        return Err(VigError::WeightUnderflow(v1, v2));
                    }
                }
            }
        }
        Ok(())
    }

    fn bump_clause(&mut self, clause: &Clause, add: bool) -> Result<(), VigError> {
        // A clause contributes once per distinct variable pair, so collapse
        // both polarities of a variable (tautological clauses) first.
        let mut vars: Vec<u32> = clause.lits().iter().map(|l| l.var()).collect();
        vars.dedup();
        for i in 0..vars.len() {
            for j in (i + 1)..vars.len() {
                self.bump_pair(vars[i], vars[j], add)?;
            }
        }
        Ok(())
    }

    /// Applies a formula mutation: `removed` clauses must currently be
    /// accounted for. Weights afterwards equal a fresh build on the mutated
    /// formula.
    pub fn apply_delta(&mut self, added: &[Clause], removed: &[Clause]) -> Result<(), VigError> {
        let max_var = added.iter().map(|c| c.max_var()).max().unwrap_or(0);
        self.ensure_vars(max_var);
        for clause in added {
            self.bump_clause(clause, true)?;
        }
        for clause in removed {
            self.bump_clause(clause, false)?;
        }
        Ok(())
    }

    /// Row `x` of the cubed adjacency matrix, computed as three successive
    /// matrix-vector products from the unit vector at `x`. All arithmetic
    /// is overflow-checked.
    pub fn three_hop(&self, x: u32) -> Result<HopVector, VigError> {
        assert!(
            x >= 1 && (x as usize) <= self.adj.len(),
            "variable {x} out of range"
        );
        let n = self.adj.len();
        let mut current = vec![0u128; n];
        current[x as usize - 1] = 1;
        for _ in 0..3 {
            let mut next = vec![0u128; n];
            for (i, &value) in current.iter().enumerate() {
                if value == 0 {
                    continue;
                }
                for (&nbr, &w) in &self.adj[i] {
                    let term = (w as u128)
                        .checked_mul(value)
                        .ok_or(VigError::HopOverflow(x))?;
                    let slot = &mut next[nbr as usize - 1];
                    *slot = slot.checked_add(term).ok_or(VigError::HopOverflow(x))?;
                }
            }
            current = next;
        }
        Ok(HopVector { counts: current })
    }
}

/// Builds the incidence graph for a formula.
pub fn build_vig(f: &Formula) -> Vig {
    Vig::build(f)
}

/// 3-hop heuristic row for `x`; see [`Vig::three_hop`].
pub fn three_hop(v: &Vig, x: u32) -> Result<HopVector, VigError> {
    v.three_hop(x)
}

/// CSV-ready heatmap rows for variable `x`: one `(variable, count)` pair
/// per variable with a nonzero 3-hop value.
pub fn export_heatmap(v: &Vig, x: u32) -> Result<Vec<(u32, u128)>, VigError> {
    Ok(v.three_hop(x)?.nonzero().collect())
}
