//! Utility specification `(f, beta)` and the hider's payoff matrix.
//!
//! Sign convention: every stored entry is the hider's payoff. The seeker's
//! payoff is its negation; no second matrix is ever built.

use crate::graph::{Graph, GraphError};
use crate::rational::{self, format_rational, parse_rational, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UtilityError {
    #[error("linear slope must be positive")]
    NonPositiveSlope,
    #[error("power exponent must be positive")]
    NonPositiveGamma,
    #[error("ratio-power exponent must exceed 1")]
    RatioGammaTooSmall,
    #[error("capture penalty beta must be nonnegative")]
    NegativeBeta,
    #[error("utility table must start with f(0) = 0")]
    TableNonzeroOrigin,
    #[error("utility table must be strictly increasing (fails at x = {0})")]
    TableNotIncreasing(usize),
    #[error("utility table covers sizes up to {len}, but size {needed} is required")]
    TableTooShort { len: usize, needed: usize },
    #[error("utility is not strictly increasing at x = {0}")]
    NotIncreasing(usize),
    #[error("unknown utility family {0:?}")]
    UnknownFamily(String),
    #[error("missing or invalid parameter {0:?}")]
    BadParam(String),
}

/// The component-value function `f`, evaluated on integer component sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Utility {
    /// `f(x) = slope * x`.
    Linear { slope: Rational },
    /// `f(x) = x^gamma`.
    Power { gamma: Rational },
    /// `f(x) = x^gamma / (x + 1)^(gamma - 1)`, convex for `gamma > 1` yet
    /// growing slowly enough that the core-periphery design always wins.
    RatioPower { gamma: Rational },
    /// Explicit values `f(0), f(1), ...`.
    Table(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilitySpec {
    pub f: Utility,
    pub beta: Rational,
}

fn integer_exponent(gamma: &Rational) -> Option<u32> {
    if gamma.is_integer() {
        gamma.to_integer().to_u32()
    } else {
        None
    }
}

fn pow_exact(base: usize, exp: u32) -> Rational {
    Rational::from_integer(num_traits::pow(BigInt::from(base), exp as usize))
}

impl Utility {
    pub fn linear(slope: Rational) -> Result<Self, UtilityError> {
        if !slope.is_positive() {
            return Err(UtilityError::NonPositiveSlope);
        }
        Ok(Utility::Linear { slope })
    }

    pub fn power(gamma: Rational) -> Result<Self, UtilityError> {
        if !gamma.is_positive() {
            return Err(UtilityError::NonPositiveGamma);
        }
        Ok(Utility::Power { gamma })
    }

    pub fn ratio_power(gamma: Rational) -> Result<Self, UtilityError> {
        if gamma <= Rational::one() {
            return Err(UtilityError::RatioGammaTooSmall);
        }
        Ok(Utility::RatioPower { gamma })
    }

    pub fn table(values: Vec<Rational>) -> Result<Self, UtilityError> {
        if values.first().is_some_and(|v| !v.is_zero()) {
            return Err(UtilityError::TableNonzeroOrigin);
        }
        if let Some(x) = (1..values.len()).find(|&x| values[x] <= values[x - 1]) {
            return Err(UtilityError::TableNotIncreasing(x));
        }
        Ok(Utility::Table(values))
    }

    /// True when every value is an exact rational (no floating-point power).
    pub fn is_exact(&self) -> bool {
        match self {
            Utility::Linear { .. } | Utility::Table(_) => true,
            Utility::Power { gamma } => integer_exponent(gamma).is_some(),
            Utility::RatioPower { gamma } => integer_exponent(gamma).is_some(),
        }
    }

    /// `f(x)`. Non-integer exponents are evaluated in `f64` and converted to
    /// the exact rational of the rounded result.
    ///
    /// Panics if a table does not cover `x`; callers validate first.
    pub fn eval(&self, x: usize) -> Rational {
        if x == 0 {
            return Rational::zero();
        }
        match self {
            Utility::Linear { slope } => slope * Rational::from_integer(BigInt::from(x)),
            Utility::Power { gamma } => match integer_exponent(gamma) {
                Some(e) => pow_exact(x, e),
                None => float_rational((x as f64).powf(rational::to_f64(gamma))),
            },
            Utility::RatioPower { gamma } => match integer_exponent(gamma) {
                Some(e) => pow_exact(x, e) / pow_exact(x + 1, e - 1),
                None => {
                    let g = rational::to_f64(gamma);
                    float_rational((x as f64).powf(g) / ((x + 1) as f64).powf(g - 1.0))
                }
            },
            Utility::Table(values) => values[x].clone(),
        }
    }

    fn family_name(&self) -> &'static str {
        match self {
            Utility::Linear { .. } => "linear",
            Utility::Power { .. } => "power",
            Utility::RatioPower { .. } => "ratio_power",
            Utility::Table(_) => "table",
        }
    }
}

fn float_rational(value: f64) -> Rational {
    rational::from_f64(value).expect("finite utility value")
}

impl UtilitySpec {
    pub fn new(f: Utility, beta: Rational) -> Result<Self, UtilityError> {
        if beta.is_negative() {
            return Err(UtilityError::NegativeBeta);
        }
        Ok(UtilitySpec { f, beta })
    }

    /// Builds one of the named families: `linear` (`slope`), `power`
    /// (`gamma`), `ratio_power` (`gamma`) or `table` (`values`).
    pub fn builtin(
        family: &str,
        params: &BTreeMap<String, serde_json::Value>,
        beta: Rational,
    ) -> Result<Self, UtilityError> {
        let scalar = |key: &str| -> Result<Rational, UtilityError> {
            match params.get(key) {
                Some(serde_json::Value::String(s)) => {
                    parse_rational(s).map_err(|_| UtilityError::BadParam(key.into()))
                }
                Some(serde_json::Value::Number(n)) => parse_rational(&n.to_string())
                    .map_err(|_| UtilityError::BadParam(key.into())),
                _ => Err(UtilityError::BadParam(key.into())),
            }
        };
        let f = match family {
            "linear" => Utility::linear(scalar("slope").or_else(|_| scalar("lambda"))?)?,
            "power" => Utility::power(scalar("gamma")?)?,
            "ratio_power" => Utility::ratio_power(scalar("gamma")?)?,
            "table" => {
                let values = match params.get("values") {
                    Some(serde_json::Value::Array(items)) => items
                        .iter()
                        .map(|item| match item {
                            serde_json::Value::String(s) => parse_rational(s).ok(),
                            serde_json::Value::Number(n) => parse_rational(&n.to_string()).ok(),
                            _ => None,
                        })
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| UtilityError::BadParam("values".into()))?,
                    _ => return Err(UtilityError::BadParam("values".into())),
                };
                Utility::table(values)?
            }
            other => return Err(UtilityError::UnknownFamily(other.to_string())),
        };
        UtilitySpec::new(f, beta)
    }

    pub fn identity(beta: Rational) -> Self {
        UtilitySpec {
            f: Utility::Linear { slope: Rational::one() },
            beta,
        }
    }

    pub fn square(beta: Rational) -> Self {
        UtilitySpec {
            f: Utility::Power { gamma: rational::int(2) },
            beta,
        }
    }

    pub fn f(&self, x: usize) -> Rational {
        self.f.eval(x)
    }

    pub fn is_exact(&self) -> bool {
        self.f.is_exact()
    }

    /// Checks that `f` is defined and strictly increasing on `0..=max_size`.
    pub fn validate(&self, max_size: usize) -> Result<(), UtilityError> {
        if let Utility::Table(values) = &self.f {
            if values.len() <= max_size {
                return Err(UtilityError::TableTooShort {
                    len: values.len().saturating_sub(1),
                    needed: max_size,
                });
            }
        }
        let mut prev = self.f(0);
        for x in 1..=max_size {
            let next = self.f(x);
            if next <= prev {
                return Err(UtilityError::NotIncreasing(x));
            }
            prev = next;
        }
        Ok(())
    }
}

impl fmt::Display for UtilitySpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.f {
            Utility::Linear { slope } => write!(out, "linear(slope={})", format_rational(slope))?,
            Utility::Power { gamma } => write!(out, "power(gamma={})", format_rational(gamma))?,
            Utility::RatioPower { gamma } => {
                write!(out, "ratio_power(gamma={})", format_rational(gamma))?
            }
            Utility::Table(values) => write!(out, "table(len={})", values.len())?,
        }
        write!(out, ", beta={}", format_rational(&self.beta))
    }
}

/// Wire form: `{"family": ..., "params": {...}, "beta": "p/q"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityJson {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    pub beta: String,
}

impl UtilitySpec {
    pub fn to_json(&self) -> UtilityJson {
        let mut params = BTreeMap::new();
        let s = |r: &Rational| serde_json::Value::String(format_rational(r));
        match &self.f {
            Utility::Linear { slope } => {
                params.insert("slope".to_string(), s(slope));
            }
            Utility::Power { gamma } | Utility::RatioPower { gamma } => {
                params.insert("gamma".to_string(), s(gamma));
            }
            Utility::Table(values) => {
                params.insert(
                    "values".to_string(),
                    serde_json::Value::Array(values.iter().map(s).collect()),
                );
            }
        }
        UtilityJson {
            family: self.f.family_name().to_string(),
            params,
            beta: format_rational(&self.beta),
        }
    }

    pub fn from_json(json: &UtilityJson) -> Result<Self, UtilityError> {
        let beta = parse_rational(&json.beta).map_err(|_| UtilityError::BadParam("beta".into()))?;
        UtilitySpec::builtin(&json.family, &json.params, beta)
    }
}

/// Rectangular rational matrix of row-player payoffs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffMatrix {
    rows: Vec<Vec<Rational>>,
    cols: usize,
}

impl PayoffMatrix {
    /// Panics on ragged or empty input.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(cols > 0, "payoff matrix must be nonempty");
        assert!(rows.iter().all(|r| r.len() == cols), "ragged payoff matrix");
        PayoffMatrix { rows, cols }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        PayoffMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rational::int(v)).collect())
                .collect(),
        )
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.rows[row][col]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn transpose_negated(&self) -> PayoffMatrix {
        let rows = (0..self.cols)
            .map(|c| self.rows.iter().map(|r| -&r[c]).collect())
            .collect();
        PayoffMatrix::from_rows(rows)
    }

    pub fn map<F: Fn(&Rational) -> Rational>(&self, f: F) -> PayoffMatrix {
        PayoffMatrix::from_rows(self.rows.iter().map(|r| r.iter().map(&f).collect()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayoffError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error("payoff matrix needs at least one node")]
    EmptyGraph,
}

/// Hider's payoff when hiding at `h` while the seeker inspects `k`.
pub fn hider_payoff(
    g: &Graph,
    u: &UtilitySpec,
    h: usize,
    k: usize,
) -> Result<Rational, PayoffError> {
    g.check_node(h)?;
    g.check_node(k)?;
    Ok(payoff_unchecked(g, u, h, k))
}

fn payoff_unchecked(g: &Graph, u: &UtilitySpec, h: usize, k: usize) -> Rational {
    if h == k || g.has_edge(h, k) {
        -u.beta.clone()
    } else {
        u.f(g.component_size_without(h, k))
    }
}

/// Full `n x n` matrix: rows are hiding nodes, columns are inspected nodes.
pub fn payoff_matrix(g: &Graph, u: &UtilitySpec) -> Result<PayoffMatrix, PayoffError> {
    let n = g.node_count();
    if n == 0 {
        return Err(PayoffError::EmptyGraph);
    }
    u.validate(n)?;
    let rows = (0..n)
        .map(|h| (0..n).map(|k| payoff_unchecked(g, u, h, k)).collect())
        .collect();
    Ok(PayoffMatrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn hider_payoff_examples() {
        let u = UtilitySpec::identity(int(1));
        assert_eq!(hider_payoff(&cycle(4), &u, 0, 1).unwrap(), int(-1));
        assert_eq!(hider_payoff(&cycle(4), &u, 0, 2).unwrap(), int(3));
        assert_eq!(hider_payoff(&Graph::empty(4), &u, 0, 3).unwrap(), int(1));
        assert!(hider_payoff(&cycle(4), &u, 0, 4).is_err());
    }

    #[test]
    fn payoff_matrix_examples() {
        let m = payoff_matrix(&Graph::empty(1), &UtilitySpec::identity(int(2))).unwrap();
        assert_eq!(m.rows(), &[vec![int(-2)]]);

        let m = payoff_matrix(&cycle(4), &UtilitySpec::identity(int(1))).unwrap();
        for row in m.rows() {
            assert_eq!(row.iter().filter(|&v| *v == int(-1)).count(), 3);
            assert_eq!(row.iter().filter(|&v| *v == int(3)).count(), 1);
        }
        assert!(payoff_matrix(&Graph::empty(0), &UtilitySpec::identity(int(1))).is_err());
    }

    #[test]
    fn builtin_family_values() {
        let params = |k: &str, v: &str| {
            BTreeMap::from([(k.to_string(), serde_json::Value::String(v.to_string()))])
        };
        let lin = UtilitySpec::builtin("linear", &params("slope", "1"), int(0)).unwrap();
        assert_eq!(lin.f(5), int(5));
        let ratio = UtilitySpec::builtin("ratio_power", &params("gamma", "2"), int(0)).unwrap();
        assert_eq!(ratio.f(2), rat(4, 3));
        let pow = UtilitySpec::builtin("power", &params("gamma", "2"), int(0)).unwrap();
        assert_eq!(pow.f(3), int(9));
        assert!(UtilitySpec::builtin("cubic", &params("gamma", "2"), int(0)).is_err());
        assert!(UtilitySpec::builtin("ratio_power", &params("gamma", "1"), int(0)).is_err());
    }

    #[test]
    fn table_validation() {
        assert_eq!(
            Utility::table(vec![int(1), int(2)]),
            Err(UtilityError::TableNonzeroOrigin)
        );
        assert_eq!(
            Utility::table(vec![int(0), int(2), int(2)]),
            Err(UtilityError::TableNotIncreasing(2))
        );
        let u = UtilitySpec::new(Utility::table(vec![int(0), int(1), int(3)]).unwrap(), int(0))
            .unwrap();
        assert!(u.validate(2).is_ok());
        assert!(matches!(u.validate(3), Err(UtilityError::TableTooShort { .. })));
        assert!(UtilitySpec::new(Utility::Linear { slope: int(1) }, int(-1)).is_err());
    }

    #[test]
    fn fractional_power_falls_back_to_float() {
        let u = UtilitySpec::new(Utility::power(rat(1, 2)).unwrap(), int(0)).unwrap();
        assert!(!u.is_exact());
        let v = rational::to_f64(&u.f(4));
        assert!((v - 2.0).abs() < 1e-9);
        assert!(u.validate(20).is_ok());
    }

    #[test]
    fn utility_json_round_trip() {
        let u = UtilitySpec::new(Utility::ratio_power(int(3)).unwrap(), rat(1, 2)).unwrap();
        let json = serde_json::to_string(&u.to_json()).unwrap();
        assert_eq!(
            json,
            r#"{"family":"ratio_power","params":{"gamma":"3/1"},"beta":"1/2"}"#
        );
        let back: UtilityJson = serde_json::from_str(&json).unwrap();
        assert_eq!(UtilitySpec::from_json(&back).unwrap(), u);
    }
}
