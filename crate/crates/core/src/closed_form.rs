//! Closed-form thresholds, payoff bounds and mixing weights.
//!
//! Notation: `n` nodes in total, `s` singleton nodes, `m` singleton leaves
//! (equivalently, their neighbours), `k = n - s` non-singleton nodes.
//! `f` and `beta` come from the [`UtilitySpec`]. All arithmetic is exact.
//!
//! Algebraic identities (two formulas for the same quantity) are checked with
//! `assert!`: a mismatch is a bug here. Inequalities that the theory claims
//! but that depend on the utility are reported as
//! [`ClosedFormError::ClaimViolated`] instead.

use crate::payoff::{Utility, UtilitySpec};
use crate::rational::{format_rational, int, Rational};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosedFormError {
    #[error("need at least {needed} non-singleton nodes, got n - s = {n} - {s}")]
    TooFewNodes { n: usize, s: usize, needed: usize },
    #[error("s = {s} singletons is outside {{0..n-4}} u {{n}} for n = {n}")]
    InvalidSingletons { n: usize, s: usize },
    #[error("m = {m} singleton leaves is infeasible for n - s = {k}")]
    InvalidM { m: usize, k: usize },
    #[error("R(G) empty requires n - s = 2m (n - s = {k}, m = {m})")]
    InconsistentREmpty { k: usize, m: usize },
    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
    #[error("n - s = {0} has the wrong parity for this quantity")]
    Parity(usize),
    #[error("requires T(n, s) < beta")]
    ThresholdNotBelowBeta,
    #[error("requires a linear utility with slope {0}")]
    NotLinear(String),
    #[error("claimed inequality fails: {0}")]
    ClaimViolated(String),
}

type Result<T> = std::result::Result<T, ClosedFormError>;

fn r(x: usize) -> Rational {
    int(x as i64)
}

fn non_singletons(n: usize, s: usize, needed: usize) -> Result<usize> {
    if s > n || n - s < needed {
        return Err(ClosedFormError::TooFewNodes { n, s, needed });
    }
    Ok(n - s)
}

/// `s` must lie in `{0, ..., n-4} u {n}`.
pub fn check_singletons(n: usize, s: usize) -> Result<()> {
    if s == n || s + 4 <= n {
        Ok(())
    } else {
        Err(ClosedFormError::InvalidSingletons { n, s })
    }
}

/// `D(n, s) = f(n - s - 1) + beta`.
pub fn d_value(n: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    let k = non_singletons(n, s, 1)?;
    Ok(u.f(k - 1) + &u.beta)
}

/// Cycle-versus-core-periphery threshold
/// `T(n, s) = (k-3) f(k-1) - (k-2) f(k-2)`.
pub fn threshold_t(n: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    let k = non_singletons(n, s, 3)?;
    let direct = r(k - 3) * u.f(k - 1) - r(k - 2) * u.f(k - 2);
    let via_d = r(k - 3) * d_value(n, s, u)? - r(k - 2) * d_value(n - 1, s, u)? + &u.beta;
    assert_eq!(direct, via_d, "T(n,s) forms disagree");
    Ok(direct)
}

fn check_m(k: usize, m: usize) -> Result<()> {
    if 2 * m > k {
        Err(ClosedFormError::InvalidM { m, k })
    } else {
        Ok(())
    }
}

/// `A(n, m, s)` for any `k >= 2`; the public [`value_a`] adds the `k >= 4`
/// precondition.
pub(crate) fn a_unchecked(n: usize, m: usize, s: usize, u: &UtilitySpec, r_empty: bool) -> Result<Rational> {
    let k = non_singletons(n, s, 2)?;
    check_m(k, m)?;
    if r_empty {
        if k != 2 * m {
            return Err(ClosedFormError::InconsistentREmpty { k, m });
        }
        if m == 0 {
            return Err(ClosedFormError::DivisionByZero("A(n,m,s) with m = 0 and R(G) empty"));
        }
        let mr = r(m);
        return Ok(&u.beta / &mr - (r(m - 1) / mr) * u.f(k - 2));
    }
    let value = a_d_form(n, m, s, u)?;
    if k.is_multiple_of(2) && k >= 2 && m != k / 2 {
        // Both branches are defined at m = k/2 and must coincide there.
        let half = k / 2;
        let hr = r(half);
        let empty_branch = &u.beta / &hr - (r(half - 1) / hr) * u.f(k - 2);
        assert_eq!(a_d_form(n, half, s, u)?, empty_branch, "A(n,m,s) branches disagree");
    }
    Ok(value)
}

fn a_d_form(n: usize, m: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    let k = n - s;
    let d = u.f(k - 1) + &u.beta;
    let d1 = u.f(k - 2) + &u.beta;
    let t = int(k as i64 - 3) * &d - r(k - 2) * &d1 + &u.beta;
    let den1 = int(3) * &d - int(2) * &d1;
    let den2 = r(m) * &den1 + r(k) * &d1;
    if den1.is_zero() || den2.is_zero() {
        return Err(ClosedFormError::DivisionByZero("A(n,m,s)"));
    }
    Ok((&d * &d1 / &den1) * (int(3) * (&u.beta - t) / den2 - Rational::one()) + &u.beta)
}

/// Seeker's guaranteed payoff when the hider avoids singleton nodes and the
/// seeker never seeks there: `A(n, m, s)`.
pub fn value_a(n: usize, m: usize, s: usize, u: &UtilitySpec, r_empty: bool) -> Result<Rational> {
    non_singletons(n, s, 4)?;
    a_unchecked(n, m, s, u, r_empty)
}

/// `B(s) = beta/s - (1 - 1/s) f(1)`: seeker's payoff from uniform seeking
/// over `s` singletons against a hider among them.
pub fn value_b(s: usize, u: &UtilitySpec) -> Result<Rational> {
    if s == 0 {
        return Err(ClosedFormError::DivisionByZero("B(s) with s = 0"));
    }
    let sr = r(s);
    Ok(&u.beta / &sr - (Rational::one() - Rational::one() / sr) * u.f(1))
}

/// Weight `rho` that equalizes capture chances inside `R(G)` and at the
/// neighbours of singleton leaves. Equals 1 when `m = 0`.
pub fn rho(n: usize, m: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    let k = non_singletons(n, s, 2)?;
    check_m(k, m)?;
    if m == 0 {
        return Ok(Rational::one());
    }
    let rest = r(k - 2 * m) * (u.f(k - 2) + &u.beta);
    let paired = int(3) * r(m) * (u.f(k - 1) + &u.beta);
    let den = &paired + &rest;
    if den.is_zero() {
        return Err(ClosedFormError::DivisionByZero("rho"));
    }
    Ok(rest / den)
}

/// Seeker's lower bound `L^R` when the hider sits in `R(G)`.
pub fn lower_bound_r(
    n: usize,
    m: usize,
    s: usize,
    u: &UtilitySpec,
    lambda_s: &Rational,
    lambda_r: &Rational,
) -> Result<Rational> {
    let k = non_singletons(n, s, 2)?;
    if 2 * m >= k {
        return Err(ClosedFormError::InvalidM { m, k });
    }
    let three = int(3) / r(k - 2 * m);
    let inner = lambda_r * (&three * &u.beta - (Rational::one() - &three) * u.f(k - 1))
        - (Rational::one() - lambda_r) * u.f(k - 2);
    Ok((Rational::one() - lambda_s) * inner - lambda_s * u.f(k))
}

/// Seeker's lower bound `L^M` when the hider sits in `M(G) u SL(G)`.
pub fn lower_bound_m(
    n: usize,
    m: usize,
    s: usize,
    u: &UtilitySpec,
    lambda_s: &Rational,
    lambda_r: &Rational,
) -> Result<Rational> {
    let k = non_singletons(n, s, 2)?;
    check_m(k, m)?;
    if m == 0 {
        return Err(ClosedFormError::DivisionByZero("L^M with m = 0"));
    }
    let one_m = Rational::one() / r(m);
    let inner = (Rational::one() - lambda_r)
        * (&one_m * &u.beta - (Rational::one() - &one_m) * u.f(k - 2))
        - lambda_r * u.f(k - 1);
    Ok((Rational::one() - lambda_s) * inner - lambda_s * u.f(k))
}

pub(crate) fn lambda_r_unchecked(
    n: usize,
    m: usize,
    s: usize,
    u: &UtilitySpec,
    r_empty: bool,
) -> Result<Rational> {
    let k = non_singletons(n, s, 2)?;
    check_m(k, m)?;
    if r_empty {
        if k != 2 * m {
            return Err(ClosedFormError::InconsistentREmpty { k, m });
        }
        return Ok(Rational::zero());
    }
    let value = rho(n, m, s, u)?;
    if m >= 1 && 2 * m < k {
        let zero = Rational::zero();
        let lr = lower_bound_r(n, m, s, u, &zero, &value)?;
        let lm = lower_bound_m(n, m, s, u, &zero, &value)?;
        assert_eq!(lr, lm, "L^R and L^M differ at lambda_R = rho");
        assert_eq!(lr, a_unchecked(n, m, s, u, false)?, "L(n,m,s) differs from A(n,m,s)");
    }
    Ok(value)
}

/// `lambda_R`: 0 when `R(G)` is empty, otherwise `rho`.
pub fn mixing_lambda_r(n: usize, m: usize, s: usize, u: &UtilitySpec, r_empty: bool) -> Result<Rational> {
    non_singletons(n, s, 4)?;
    lambda_r_unchecked(n, m, s, u, r_empty)
}

pub(crate) fn lambda_s_unchecked(n: usize, m: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    if s == n {
        return Ok(Rational::one());
    }
    if s == 0 {
        return Ok(Rational::zero());
    }
    let k = n - s;
    let a = a_unchecked(n, m, s, u, k == 2 * m)?;
    let f1 = u.f(1);
    if a > -f1.clone() {
        let b = value_b(s, u)?;
        Ok((&a + &f1) / (&a + b + &f1 + u.f(k)))
    } else {
        Ok(Rational::zero())
    }
}

/// `lambda_S`: probability of seeking among singleton nodes.
pub fn mixing_lambda_s(n: usize, m: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    check_singletons(n, s)?;
    if s < n {
        check_m(n - s, m)?;
    }
    lambda_s_unchecked(n, m, s, u)
}

/// `Q(n, m, s)`: payoff the seeker secures on any network with `s`
/// singletons and `m` singleton leaves.
pub fn bound_q(n: usize, m: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    check_singletons(n, s)?;
    if s == n {
        return value_b(n, u);
    }
    let k = n - s;
    check_m(k, m)?;
    let a = a_unchecked(n, m, s, u, k == 2 * m)?;
    let f1 = u.f(1);
    let q = if s >= 1 && a > -f1.clone() {
        let b = value_b(s, u)?;
        let fk = u.f(k);
        (&a * &b - &f1 * &fk) / (&a + &b + &f1 + &fk)
    } else {
        a.clone()
    };
    let lambda_s = lambda_s_unchecked(n, m, s, u)?;
    assert_eq!(
        q,
        (Rational::one() - &lambda_s) * &a - &lambda_s * u.f(k),
        "Q(n,m,s) forms disagree"
    );
    Ok(q)
}

/// Number of singleton leaves in the optimal component with `s` singletons:
/// 0 for the cycle branch, `k/2` for even and `(k-3)/2` for odd core-periphery.
pub fn optimal_m(n: usize, s: usize, u: &UtilitySpec) -> Result<usize> {
    check_singletons(n, s)?;
    if s == n {
        return Ok(0);
    }
    let k = n - s;
    if threshold_t(n, s, u)? >= u.beta {
        Ok(0)
    } else if k.is_multiple_of(2) {
        Ok(k / 2)
    } else {
        Ok((k - 3) / 2)
    }
}

/// `Q-bar(n, s)`: the seeker's payoff on the best network with exactly `s`
/// singletons. Its negation is the hider's equilibrium payoff there.
pub fn bound_qbar(n: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    let m = optimal_m(n, s, u)?;
    bound_q(n, m, s, u)
}

/// `A-bar(n, s)`: `A` evaluated at the optimal number of singleton leaves.
pub fn value_abar(n: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    check_singletons(n, s)?;
    if s == n {
        return Err(ClosedFormError::TooFewNodes { n, s, needed: 4 });
    }
    let m = optimal_m(n, s, u)?;
    value_a(n, m, s, u, n - s == 2 * m)
}

/// Hider's probability `kappa` of hiding in the non-singleton component.
pub fn mixing_kappa(n: usize, s: usize, u: &UtilitySpec, abar: &Rational) -> Result<Rational> {
    check_singletons(n, s)?;
    if s == 0 {
        return Ok(Rational::one());
    }
    if s == n {
        return Ok(Rational::zero());
    }
    let k = n - s;
    let f1 = u.f(1);
    if *abar > -f1.clone() {
        let b = value_b(s, u)?;
        let fk = u.f(k);
        let kappa = (&b + &f1) / (abar + &b + &fk + &f1);
        // Seeking among singletons and seeking in the component leave the
        // hider the same payoff.
        let vs_singletons = &kappa * &fk - (Rational::one() - &kappa) * &b;
        let vs_component = -&kappa * abar + (Rational::one() - &kappa) * &f1;
        assert_eq!(vs_singletons, vs_component, "kappa does not equalize guarantees");
        Ok(kappa)
    } else {
        Ok(Rational::one())
    }
}

/// Hider's probability `mu` of hiding on the periphery (versus the middle
/// orphan) of an odd maximal core-periphery component.
pub fn mixing_mu(n: usize, s: usize, u: &UtilitySpec) -> Result<Rational> {
    let k = non_singletons(n, s, 5)?;
    if k.is_multiple_of(2) {
        return Err(ClosedFormError::Parity(k));
    }
    if threshold_t(n, s, u)? >= u.beta {
        return Err(ClosedFormError::ThresholdNotBelowBeta);
    }
    let (f1k, f2k, beta) = (u.f(k - 1), u.f(k - 2), &u.beta);
    let num = r(k - 3) * &f2k + r(k - 3) * beta;
    let den = r(k - 3) * &f1k + int(2) * &f2k + r(k - 1) * beta;
    let mu = num / den;
    let one = Rational::one();
    let orphan_seek = &mu * &f1k - (&one - &mu) * beta;
    let two = int(2) / r(k - 3);
    let periphery_seek = &mu * (-&two * beta + (&one - &two) * &f2k) + (&one - &mu) * &f2k;
    assert_eq!(orphan_seek, periphery_seek, "mu does not equalize guarantees");
    Ok(mu)
}

/// Monotone blend `phi(Z)` of a component guarantee `Z` with singleton
/// seeking, for `s >= 1` singletons.
pub fn phi(z: &Rational, s: usize, n: usize, u: &UtilitySpec) -> Result<Rational> {
    if s == 0 {
        return Err(ClosedFormError::DivisionByZero("phi with s = 0"));
    }
    if s > n {
        return Err(ClosedFormError::TooFewNodes { n, s, needed: 0 });
    }
    let f1 = u.f(1);
    if *z > -f1.clone() {
        let b = value_b(s, u)?;
        let fk = u.f(n - s);
        Ok((&b * z - &f1 * &fk) / (z + &b + &fk + &f1))
    } else {
        Ok(z.clone())
    }
}

/// `(X(n, s), Y(n, s))`: seeker guarantees on an odd component with one
/// orphan more than the maximal core-periphery shape. Fails with
/// [`ClosedFormError::ClaimViolated`] unless `X > A` and `Y > Q` at
/// `m = (k-3)/2`.
pub fn orphan_bound_xy(n: usize, s: usize, u: &UtilitySpec) -> Result<(Rational, Rational)> {
    let k = non_singletons(n, s, 5)?;
    check_singletons(n, s)?;
    if k.is_multiple_of(2) {
        return Err(ClosedFormError::Parity(k));
    }
    if threshold_t(n, s, u)? >= u.beta {
        return Err(ClosedFormError::ThresholdNotBelowBeta);
    }
    let two = int(2) / r(k - 1);
    let x = &two * &u.beta - (Rational::one() - &two) * u.f(k - 2);
    let y = if s == 0 { x.clone() } else { phi(&x, s, n, u)? };
    let m = (k - 3) / 2;
    let a = value_a(n, m, s, u, false)?;
    let q = bound_q(n, m, s, u)?;
    if x <= a {
        return Err(ClosedFormError::ClaimViolated(format!(
            "X({n},{s}) = {} <= A = {}",
            format_rational(&x),
            format_rational(&a)
        )));
    }
    if y <= q {
        return Err(ClosedFormError::ClaimViolated(format!(
            "Y({n},{s}) = {} <= Q = {}",
            format_rational(&y),
            format_rational(&q)
        )));
    }
    Ok((x, y))
}

/// `S*(n)`: every optimal singleton count, plus the minimal `Q-bar`.
/// The hider's optimal payoff is the negation of the returned value.
pub fn optimal_singletons(n: usize, u: &UtilitySpec) -> Result<(Vec<usize>, Rational)> {
    if n == 0 {
        return Err(ClosedFormError::TooFewNodes { n, s: 0, needed: 1 });
    }
    let candidates = (0..=n.saturating_sub(4)).filter(|&s| s + 4 <= n).chain([n]);
    let mut best: Option<Rational> = None;
    let mut argmin = Vec::new();
    for s in candidates {
        let q = bound_qbar(n, s, u)?;
        match &best {
            Some(b) if q > *b => {}
            Some(b) if q == *b => argmin.push(s),
            _ => {
                best = Some(q);
                argmin = vec![s];
            }
        }
    }
    Ok((argmin, best.expect("candidate set contains n")))
}

/// `A~(n, s) = A(n, (n-s)/2, s)` for `f(x) = slope * x`, valid for any
/// `s < n` (the formula is polynomial in `n - s`).
pub fn linear_a_tilde(n: usize, s: usize, slope: &Rational, beta: &Rational) -> Result<Rational> {
    let k = non_singletons(n, s, 1)?;
    let bt = beta / slope;
    Ok(slope * (int(2) * (bt - int(2)) / r(k) + int(4) - r(k)))
}

fn linear_slope(u: &UtilitySpec, slope: &Rational) -> Result<()> {
    match &u.f {
        Utility::Linear { slope: actual } if actual == slope => Ok(()),
        _ => Err(ClosedFormError::NotLinear(format_rational(slope))),
    }
}

/// `AB(n, s)`: the blended seeker payoff `(1 - rho) A~ - rho * slope * (n-s)`
/// for linear `f`, with `rho` equalizing singleton and component seeking.
/// Defined on `0 <= s <= n`; at `s = n` it equals `B(n)`.
pub fn linear_case_ab(n: usize, s: usize, slope: &Rational, u: &UtilitySpec) -> Result<Rational> {
    linear_slope(u, slope)?;
    if s > n {
        return Err(ClosedFormError::TooFewNodes { n, s, needed: 0 });
    }
    let bt = &u.beta / slope;
    let (nr, sr) = (r(n), r(s));
    let via_rational_form = {
        let num = &nr * &nr * (&bt + int(1))
            - int(2) * &nr * (&sr * (&bt - int(1)) + int(2) * (&bt + int(1)))
            + &sr * &sr * (&bt - int(3))
            + int(6) * &sr * &bt
            - int(2) * (&bt + int(1)) * (&bt - int(2));
        let den = &sr * (int(4) * &sr - &bt + int(5)) - &nr * (int(4) * &sr + &bt + int(1));
        if den.is_zero() {
            return Err(ClosedFormError::DivisionByZero("AB(n,s)"));
        }
        slope * num / den
    };
    if s == n {
        return Ok(via_rational_form);
    }
    let k = r(n - s);
    let a_tilde = linear_a_tilde(n, s, slope, &u.beta)?;
    let rho = if s == 0 {
        Rational::zero()
    } else {
        let lead = &sr * (int(2) * (&bt - int(2)) - &k * (&k - int(5)));
        let den = &lead + &k * (&sr * (&k - int(1)) + &bt + int(1));
        if den.is_zero() {
            return Err(ClosedFormError::DivisionByZero("rho in AB(n,s)"));
        }
        lead / den
    };
    let ab = (Rational::one() - &rho) * a_tilde - &rho * slope * &k;
    assert_eq!(ab, via_rational_form, "AB(n,s) forms disagree");
    Ok(ab)
}

/// Every closed-form quantity defined at `(n, m, s)`. Undefined entries are
/// `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValueReport {
    pub t: Option<Rational>,
    pub d_n: Option<Rational>,
    pub d_n1: Option<Rational>,
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    pub rho: Option<Rational>,
    pub lambda_r: Option<Rational>,
    pub lambda_s: Option<Rational>,
    pub l: Option<Rational>,
    pub q: Option<Rational>,
    pub qbar: Option<Rational>,
    pub kappa: Option<Rational>,
    pub mu: Option<Rational>,
}

impl ValueReport {
    /// Requires `s` in `{0..n-4} u {n}` and `2m <= n - s`.
    pub fn compute(n: usize, m: usize, s: usize, u: &UtilitySpec) -> Result<Self> {
        check_singletons(n, s)?;
        let mut report = ValueReport {
            b: value_b(s, u).ok(),
            q: Some(bound_q(n, m, s, u)?),
            qbar: Some(bound_qbar(n, s, u)?),
            ..Default::default()
        };
        if s == n {
            report.lambda_s = Some(Rational::one());
            return Ok(report);
        }
        let k = n - s;
        check_m(k, m)?;
        let r_empty = k == 2 * m;
        let a = value_a(n, m, s, u, r_empty)?;
        let lambda_s = mixing_lambda_s(n, m, s, u)?;
        report.t = Some(threshold_t(n, s, u)?);
        report.d_n = Some(d_value(n, s, u)?);
        report.d_n1 = Some(d_value(n - 1, s, u)?);
        report.rho = Some(rho(n, m, s, u)?);
        report.lambda_r = Some(mixing_lambda_r(n, m, s, u, r_empty)?);
        report.l = Some((Rational::one() - &lambda_s) * &a - &lambda_s * u.f(k));
        report.lambda_s = Some(lambda_s);
        report.a = Some(a);
        let abar = value_abar(n, s, u)?;
        report.kappa = Some(mixing_kappa(n, s, u, &abar)?);
        report.mu = mixing_mu(n, s, u).ok();
        Ok(report)
    }
}
