//! Benchmark instance generators: packing k-coloring direct encodings on
//! taxicab balls, and pigeonhole formulas.

use crate::cnf::{Formula, Literal};

/// A packing k-coloring instance on the taxicab ball of radius `radius`:
/// color every tile with a color in `1..=colors` such that two tiles may
/// share color `c` only when their taxicab distance exceeds `c`. One
/// center tile is pinned to `center_color` as symmetry breaking.
#[derive(Clone, Copy, Debug)]
pub struct PackingSpec {
    pub radius: u32,
    pub colors: u32,
    pub center_color: u32,
}

impl PackingSpec {
    /// Center color defaults to the largest color.
    pub fn new(radius: u32, colors: u32) -> PackingSpec {
        assert!(colors >= 1, "need at least one color");
        PackingSpec {
            radius,
            colors,
            center_color: colors,
        }
    }

    pub fn with_center_color(self, center_color: u32) -> PackingSpec {
        assert!(
            (1..=self.colors).contains(&center_color),
            "center color {center_color} outside 1..={}",
            self.colors
        );
        PackingSpec {
            center_color,
            ..self
        }
    }

    /// Tiles in reading order: top row first, left to right within a row.
    pub fn tiles(&self) -> Vec<(i32, i32)> {
        let r = self.radius as i32;
        let mut tiles = Vec::new();
        for y in (-r..=r).rev() {
            for x in -r..=r {
                if x.abs() + y.abs() <= r {
                    tiles.push((x, y));
                }
            }
        }
        debug_assert_eq!(
            tiles.len() as u64,
            2 * (r as u64) * (r as u64) + 2 * r as u64 + 1
        );
        tiles
    }
}

/// One row of the variable legend: which (tile, color) a variable encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LegendEntry {
    pub var: u32,
    pub tile_x: i32,
    pub tile_y: i32,
    pub color: u32,
}

/// Taxicab distance between two tiles.
pub fn taxicab(a: (i32, i32), b: (i32, i32)) -> u32 {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Direct encoding of a packing coloring instance. Variables are numbered
/// tile-major (reading order), color-minor: tile `t` and color `c` map to
/// variable `t * colors + c`. Clauses: one at-least-one-color clause per
/// tile, one binary at-most-one-distance clause per color and tile pair
/// within that color's distance, and the center unit clause.
pub fn gen_packing(spec: &PackingSpec) -> (Formula, Vec<LegendEntry>) {
    let tiles = spec.tiles();
    let k = spec.colors;
    let var = |tile: usize, color: u32| tile as u32 * k + color;

    let legend: Vec<LegendEntry> = tiles
        .iter()
        .enumerate()
        .flat_map(|(t, &(x, y))| {
            (1..=k).map(move |c| LegendEntry {
                var: var(t, c),
                tile_x: x,
                tile_y: y,
                color: c,
            })
        })
        .collect();

    let mut f = Formula::new(tiles.len() as u32 * k);
    for t in 0..tiles.len() {
        f.add_clause((1..=k).map(|c| Literal::new(var(t, c), true)).collect());
    }
    for c in 1..=k {
        for i in 0..tiles.len() {
            for j in (i + 1)..tiles.len() {
                if taxicab(tiles[i], tiles[j]) <= c {
                    f.add_clause(vec![
                        Literal::new(var(i, c), false),
                        Literal::new(var(j, c), false),
                    ]);
                }
            }
        }
    }
    let center = tiles
        .iter()
        .position(|&t| t == (0, 0))
        .expect("origin is in every ball");
    f.add_clause(vec![Literal::new(var(center, spec.center_color), true)]);

    (f, legend)
}

/// A pigeonhole instance: assign every pigeon to a hole, no two pigeons
/// sharing one. Unsatisfiable exactly when `pigeons > holes`.
#[derive(Clone, Copy, Debug)]
pub struct PigeonholeSpec {
    pub pigeons: u32,
    pub holes: u32,
}

impl PigeonholeSpec {
    pub fn new(pigeons: u32, holes: u32) -> PigeonholeSpec {
        assert!(
            pigeons >= 1 && holes >= 1,
            "need at least one pigeon and one hole"
        );
        PigeonholeSpec { pigeons, holes }
    }
}

/// Direct pigeonhole encoding, pigeon-major: pigeon `i` in hole `j` is
/// variable `(i - 1) * holes + j`. One at-least-one clause per pigeon,
/// then binary at-most-one clauses per hole and pigeon pair.
pub fn gen_php(spec: &PigeonholeSpec) -> Formula {
    let (p, h) = (spec.pigeons, spec.holes);
    let var = |pigeon: u32, hole: u32| (pigeon - 1) * h + hole;
    let mut f = Formula::new(p * h);
    for i in 1..=p {
        f.add_clause((1..=h).map(|j| Literal::new(var(i, j), true)).collect());
    }
    for j in 1..=h {
        for i1 in 1..=p {
            for i2 in (i1 + 1)..=p {
                f.add_clause(vec![
                    Literal::new(var(i1, j), false),
                    Literal::new(var(i2, j), false),
                ]);
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxicab_distances() {
        assert_eq!(taxicab((0, 0), (1, 1)), 2);
        assert_eq!(taxicab((0, 0), (0, 0)), 0);
        assert_eq!(taxicab((2, -1), (-1, 1)), 5);
    }

    #[test]
    fn packing_r5_k10_matches_published_size() {
        let (f, legend) = gen_packing(&PackingSpec::new(5, 10));
        assert_eq!(f.num_vars(), 610);
        assert_eq!(f.live_clause_count(), 10688);
        assert_eq!(legend.len(), 610);
    }

    #[test]
    fn packing_variable_count_formula() {
        for r in 0..=5u32 {
            for k in [1, 3, 8] {
                let spec = PackingSpec::new(r, k);
                let (f, _) = gen_packing(&spec);
                assert_eq!(f.num_vars(), (2 * r * r + 2 * r + 1) * k);
            }
        }
    }

    #[test]
    fn packing_single_tile() {
        let (f, _) = gen_packing(&PackingSpec::new(0, 1));
        assert_eq!(f.num_vars(), 1);
        // One at-least-one clause plus the center unit; no distance pairs.
        assert_eq!(f.live_clause_count(), 2);
        let clauses: Vec<_> = f.live_clauses().map(|(_, c)| c.lits().to_vec()).collect();
        assert_eq!(
            clauses,
            vec![vec![Literal::new(1, true)], vec![Literal::new(1, true)]]
        );
    }

    #[test]
    fn packing_r3_k5_pair_count_oracle() {
        let spec = PackingSpec::new(3, 5);
        let (f, _) = gen_packing(&spec);
        assert_eq!(f.num_vars(), 125);
        // Independent count: tiles + qualifying pairs per color + center.
        let tiles = spec.tiles();
        let mut expect = tiles.len() + 1;
        for c in 1..=5u32 {
            for i in 0..tiles.len() {
                for j in (i + 1)..tiles.len() {
                    if taxicab(tiles[i], tiles[j]) <= c {
                        expect += 1;
                    }
                }
            }
        }
        assert_eq!(f.live_clause_count(), expect);
    }

    #[test]
    fn packing_distance_clauses_are_binary() {
        let (f, _) = gen_packing(&PackingSpec::new(2, 3));
        for (_, c) in f.live_clauses() {
            assert!(c.len() == 3 || c.len() == 2 || c.len() == 1);
            if c.len() == 2 {
                assert!(c.lits().iter().all(|l| !l.is_positive()));
                assert_ne!(c.lits()[0].var(), c.lits()[1].var());
            }
        }
    }

    #[test]
    fn legend_matches_variable_numbering() {
        let spec = PackingSpec::new(1, 2);
        let (_, legend) = gen_packing(&spec);
        // Tile 0 is (0, 1): the top of the radius-1 ball.
        assert_eq!(
            legend[0],
            LegendEntry {
                var: 1,
                tile_x: 0,
                tile_y: 1,
                color: 1
            }
        );
        assert_eq!(
            legend[3],
            LegendEntry {
                var: 4,
                tile_x: -1,
                tile_y: 0,
                color: 2
            }
        );
    }

    #[test]
    fn php_counts() {
        let f = gen_php(&PigeonholeSpec::new(3, 2));
        assert_eq!(f.num_vars(), 6);
        assert_eq!(f.live_clause_count(), 9);

        let f = gen_php(&PigeonholeSpec::new(1, 1));
        assert_eq!(f.num_vars(), 1);
        assert_eq!(f.live_clause_count(), 1);
    }

    #[test]
    fn php_clause_count_formula() {
        for p in 1..=5u32 {
            for h in 1..=5u32 {
                let f = gen_php(&PigeonholeSpec::new(p, h));
                let expect = p + h * (p * (p.saturating_sub(1)) / 2);
                assert_eq!(f.live_clause_count() as u32, expect, "p={p} h={h}");
            }
        }
    }
}
