//! Dense two-phase primal simplex over exact rationals.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable among ratio ties), so the method never cycles.

use crate::rational::Rational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Maximize `objective . x` subject to `constraints` and `x >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    active: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.active.len()
    }

    fn pivot(&mut self, costs: &mut [Rational], row: usize, col: usize) {
        let inv = Rational::one() / &self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        if !costs[col].is_zero() {
            let factor = costs[col].clone();
            for (v, p) in costs.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for a cost vector over all columns;
    /// the trailing slot carries `-c_B x_B`.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let width = self.width();
        let mut reduced: Vec<Rational> = cost.to_vec();
        reduced.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if cost[b].is_zero() {
                continue;
            }
            for j in 0..=width {
                if !row[j].is_zero() {
                    reduced[j] -= &cost[b] * &row[j];
                }
            }
        }
        reduced
    }

    /// Runs Bland-rule pivots to optimality. Returns false if unbounded.
    fn optimize(&mut self, costs: &mut [Rational]) -> bool {
        let width = self.width();
        loop {
            let entering = (0..width).find(|&j| self.active[j] && costs[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[width] / &row[col];
                let better = match &leaving {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, _)) = leaving else {
                return false;
            };
            self.pivot(costs, row, col);
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> LpOutcome {
        let n = self.objective.len();
        let m = self.constraints.len();

        // Normalise to nonnegative right-hand sides.
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = self
            .constraints
            .iter()
            .map(|c| {
                assert_eq!(c.coeffs.len(), n, "constraint width mismatch");
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();

        let slack_count = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let artificial_count = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let width = n + slack_count + artificial_count;
        let first_artificial = n + slack_count;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, first_artificial);
        for (coeffs, relation, rhs) in normalized {
            let mut row = coeffs;
            row.resize(width + 1, Rational::zero());
            row[width] = rhs;
            match relation {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }

        let mut tableau = Tableau {
            rows,
            basis,
            active: vec![true; width],
        };

        if artificial_count > 0 {
            let phase_one: Vec<Rational> = (0..width)
                .map(|j| {
                    if j >= first_artificial {
                        -Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            let mut costs = tableau.reduced_costs(&phase_one);
            tableau.optimize(&mut costs);
            let infeasibility: Rational = tableau
                .rows
                .iter()
                .zip(&tableau.basis)
                .filter(|(_, &b)| b >= first_artificial)
                .map(|(row, _)| row[width].clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < tableau.rows.len() {
                if tableau.basis[i] < first_artificial {
                    i += 1;
                    continue;
                }
                match (0..first_artificial).find(|&j| !tableau.rows[i][j].is_zero()) {
                    Some(col) => {
                        let mut scratch = vec![Rational::zero(); width + 1];
                        tableau.pivot(&mut scratch, i, col);
                        i += 1;
                    }
                    None => {
                        tableau.rows.remove(i);
                        tableau.basis.remove(i);
                    }
                }
            }
            for j in first_artificial..width {
                tableau.active[j] = false;
            }
        }

        let mut cost: Vec<Rational> = self.objective.clone();
        cost.resize(width, Rational::zero());
        let mut costs = tableau.reduced_costs(&cost);
        if !tableau.optimize(&mut costs) {
            return LpOutcome::Unbounded;
        }

        let mut x = vec![Rational::zero(); n];
        for (row, &b) in tableau.rows.iter().zip(&tableau.basis) {
            if b < n {
                x[b] = row[width].clone();
            }
        }
        let value = x
            .iter()
            .zip(&self.objective)
            .map(|(xi, ci)| xi * ci)
            .sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn c(coeffs: &[i64], relation: Relation, rhs: i64) -> Constraint {
        Constraint {
            coeffs: coeffs.iter().map(|&v| int(v)).collect(),
            relation,
            rhs: int(rhs),
        }
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let lp = LinearProgram {
            objective: vec![int(3), int(5)],
            constraints: vec![
                c(&[1, 0], Relation::Le, 4),
                c(&[0, 2], Relation::Le, 12),
                c(&[3, 2], Relation::Le, 18),
            ],
        };
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal { x: vec![int(2), int(6)], value: int(36) }
        );
    }

    #[test]
    fn equality_and_ge_constraints() {
        // max -x - y, x + y = 1, x >= 1/2 ... via 2x >= 1.
        let lp = LinearProgram {
            objective: vec![int(-1), int(-2)],
            constraints: vec![c(&[1, 1], Relation::Eq, 1), c(&[2, 0], Relation::Ge, 1)],
        };
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![int(1), int(0)]);
                assert_eq!(value, int(-1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            objective: vec![int(1)],
            constraints: vec![c(&[1], Relation::Le, 1), c(&[1], Relation::Ge, 2)],
        };
        assert_eq!(infeasible.solve(), LpOutcome::Infeasible);
        let unbounded = LinearProgram {
            objective: vec![int(1), int(0)],
            constraints: vec![c(&[-1, 1], Relation::Le, 1)],
        };
        assert_eq!(unbounded.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram {
            objective: vec![int(1), int(1)],
            constraints: vec![
                c(&[1, 1], Relation::Eq, 2),
                c(&[2, 2], Relation::Eq, 4),
                c(&[1, 0], Relation::Le, 1),
            ],
        };
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // max x subject to -x >= -3/2.
        let lp = LinearProgram {
            objective: vec![int(1)],
            constraints: vec![Constraint {
                coeffs: vec![int(-1)],
                relation: Relation::Ge,
                rhs: rat(-3, 2),
            }],
        };
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
