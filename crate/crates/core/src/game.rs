//! Exact solver for two-player zero-sum matrix games.
//!
//! The row player maximizes. Both optimal strategies come from separate linear
//! programs on a positively shifted matrix, and the two values are required to
//! coincide exactly.

use crate::lp::{Constraint, LinearProgram, LpOutcome, Relation};
use crate::payoff::PayoffMatrix;
use crate::rational::{self, Rational};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("strategy has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("strategy has a negative entry at index {0}")]
    NegativeProbability(usize),
    #[error("strategy sums to {0}, not 1")]
    NotNormalized(String),
}

/// Probability vector over actions (nodes).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedStrategy {
    #[serde(with = "rational::vec")]
    probs: Vec<Rational>,
}

impl MixedStrategy {
    pub fn new(probs: Vec<Rational>) -> Result<Self, GameError> {
        if let Some(i) = probs.iter().position(Signed::is_negative) {
            return Err(GameError::NegativeProbability(i));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(GameError::NotNormalized(rational::format_rational(&total)));
        }
        Ok(MixedStrategy { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self::uniform_on(n, 0..n)
    }

    /// Uniform over `support` (which must be nonempty) within `n` actions.
    pub fn uniform_on<I: IntoIterator<Item = usize>>(n: usize, support: I) -> Self {
        let support: Vec<usize> = support.into_iter().collect();
        assert!(!support.is_empty(), "uniform strategy needs a nonempty support");
        let weight = Rational::new(1.into(), (support.len() as i64).into());
        let mut probs = vec![Rational::zero(); n];
        for i in support {
            probs[i] = weight.clone();
        }
        MixedStrategy { probs }
    }

    pub fn pure(n: usize, action: usize) -> Self {
        Self::uniform_on(n, [action])
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| self.probs[i].is_positive()).collect()
    }

    pub fn mass_on<I: IntoIterator<Item = usize>>(&self, actions: I) -> Rational {
        actions.into_iter().map(|i| &self.probs[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSolution {
    #[serde(with = "rational")]
    pub value: Rational,
    pub row_strategy: MixedStrategy,
    pub col_strategy: MixedStrategy,
}

/// Optimal column strategy and value via
/// `max sum(y)  s.t.  (M + c) y <= 1, y >= 0`, with `c` making entries >= 1.
fn column_program(m: &PayoffMatrix) -> (Rational, MixedStrategy) {
    let min = m
        .rows()
        .iter()
        .flatten()
        .min()
        .expect("nonempty matrix")
        .clone();
    let shift = Rational::one() - min;
    let constraints = m
        .rows()
        .iter()
        .map(|row| Constraint {
            coeffs: row.iter().map(|v| v + &shift).collect(),
            relation: Relation::Le,
            rhs: Rational::one(),
        })
        .collect();
    let lp = LinearProgram {
        objective: vec![Rational::one(); m.col_count()],
        constraints,
    };
    match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let shifted_value = Rational::one() / &value;
            let probs = x.iter().map(|y| y * &shifted_value).collect();
            let strategy = MixedStrategy::new(probs).expect("normalized LP strategy");
            (shifted_value - shift, strategy)
        }
        other => unreachable!("game LP with positive entries is bounded and feasible: {other:?}"),
    }
}

pub fn solve_zero_sum(m: &PayoffMatrix) -> GameSolution {
    let (value, col_strategy) = column_program(m);
    let (negated_value, row_strategy) = column_program(&m.transpose_negated());
    assert_eq!(value, -negated_value, "row and column programs disagree");
    GameSolution {
        value,
        row_strategy,
        col_strategy,
    }
}

fn check_len(strategy: &MixedStrategy, expected: usize) -> Result<(), GameError> {
    if strategy.len() != expected {
        return Err(GameError::DimensionMismatch {
            expected,
            got: strategy.len(),
        });
    }
    Ok(())
}

/// Row player's payoff against each pure column.
pub fn row_payoffs_by_column(m: &PayoffMatrix, row: &MixedStrategy) -> Vec<Rational> {
    (0..m.col_count())
        .map(|k| {
            (0..m.row_count())
                .filter(|&h| !row.probs[h].is_zero())
                .map(|h| &row.probs[h] * m.entry(h, k))
                .sum()
        })
        .collect()
}

/// Row player's payoff from each pure row against `col`.
pub fn row_payoffs_by_row(m: &PayoffMatrix, col: &MixedStrategy) -> Vec<Rational> {
    (0..m.row_count())
        .map(|h| {
            (0..m.col_count())
                .filter(|&k| !col.probs[k].is_zero())
                .map(|k| &col.probs[k] * m.entry(h, k))
                .sum()
        })
        .collect()
}

pub fn expected_payoff(
    m: &PayoffMatrix,
    row: &MixedStrategy,
    col: &MixedStrategy,
) -> Result<Rational, GameError> {
    check_len(row, m.row_count())?;
    check_len(col, m.col_count())?;
    Ok(row_payoffs_by_row(m, col)
        .iter()
        .zip(&row.probs)
        .map(|(v, p)| v * p)
        .sum())
}

/// `(row regret, column regret)`: what each player gains by switching to
/// its best pure action. Both are zero exactly at an equilibrium.
pub fn best_response_gap(
    m: &PayoffMatrix,
    row: &MixedStrategy,
    col: &MixedStrategy,
) -> Result<(Rational, Rational), GameError> {
    let current = expected_payoff(m, row, col)?;
    let best_row = row_payoffs_by_row(m, col).into_iter().max().expect("rows");
    let best_col = row_payoffs_by_column(m, row).into_iter().min().expect("cols");
    Ok((best_row - &current, current - best_col))
}

/// Largest probability any optimal row strategy can put on `action`.
///
/// Solves `max p_action` over strategies guaranteeing `value` against every
/// column; `value` must be the game value.
pub fn max_optimal_row_mass(m: &PayoffMatrix, value: &Rational, action: usize) -> Rational {
    let rows = m.row_count();
    let mut constraints: Vec<Constraint> = (0..m.col_count())
        .map(|k| Constraint {
            coeffs: (0..rows).map(|h| m.entry(h, k).clone()).collect(),
            relation: Relation::Ge,
            rhs: value.clone(),
        })
        .collect();
    constraints.push(Constraint {
        coeffs: vec![Rational::one(); rows],
        relation: Relation::Eq,
        rhs: Rational::one(),
    });
    let mut objective = vec![Rational::zero(); rows];
    objective[action] = Rational::one();
    match (LinearProgram { objective, constraints }).solve() {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible => panic!("value is not attainable by the row player"),
        LpOutcome::Unbounded => unreachable!("probabilities are bounded"),
    }
}
