//! Termwise Caputo / Riemann-Liouville calculus on finite generalized power
//! series `Σ c_k t^{γ_k}` with exact rational exponents.
//!
//! A series may be a truncation of an infinite one; `truncation_order` is the
//! exponent from which terms are missing, and every termwise operator moves
//! it along with the exponents so comparisons stay inside the trusted range.

use std::fmt;


use crate::mlf::{gamma, MlError};
use crate::rational::{ceil_exp, exp_f64, fmt_ratio, is_integer, Exp};

/// Coefficients below this magnitude are dropped after arithmetic.
pub const PRUNE_BELOW: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("exponent {exponent} is not covered by the Caputo power rule for order {order}")]
    UnsupportedExponent { exponent: Exp, order: Exp },
    #[error("order must be positive, got {0}")]
    NonPositiveOrder(Exp),
    #[error("cannot evaluate at t = {0}")]
    BadPoint(f64),
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// Finite generalized power series with real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct GpSeries {
    terms: Vec<(Exp, f64)>,
    truncation: Option<Exp>,
}

impl GpSeries {
    /// Builds a canonical series: like exponents merged, sorted ascending,
    /// tiny coefficients pruned, terms at or past `truncation` dropped.
    pub fn new(terms: impl IntoIterator<Item = (Exp, f64)>, truncation: Option<Exp>) -> Self {
        let mut raw: Vec<(Exp, f64)> = terms.into_iter().collect();
        raw.sort_by_key(|a| a.0);
        let mut merged: Vec<(Exp, f64)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(e, c)| c.abs() >= PRUNE_BELOW && truncation.is_none_or(|tr| *e < tr));
        GpSeries { terms: merged, truncation }
    }

    /// Exact finite series.
    pub fn exact(terms: impl IntoIterator<Item = (Exp, f64)>) -> Self {
        GpSeries::new(terms, None)
    }

    pub fn zero() -> Self {
        GpSeries { terms: Vec::new(), truncation: None }
    }

    pub fn terms(&self) -> &[(Exp, f64)] {
        &self.terms
    }

    /// `None` means the series is exact.
    pub fn truncation_order(&self) -> Option<Exp> {
        self.truncation
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exponent: Exp) -> f64 {
        self.terms
            .binary_search_by(|(e, _)| e.cmp(&exponent))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    pub fn lowest_exponent(&self) -> Option<Exp> {
        self.terms.first().map(|(e, _)| *e)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        GpSeries::new(self.terms.iter().map(|(e, c)| (*e, c * factor)), self.truncation)
    }

    /// Keeps only terms strictly below `bound` and lowers the truncation
    /// order accordingly.
    pub fn truncated(&self, bound: Exp) -> Self {
        let tr = Some(self.truncation.map_or(bound, |t| t.min(bound)));
        GpSeries::new(self.terms.iter().copied(), tr)
    }

    /// `Σ c t^γ`; `t = 0` needs every exponent nonnegative (`0^0 = 1`).
    pub fn eval(&self, t: f64) -> Result<f64, SeriesError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(SeriesError::BadPoint(t));
        }
        if t == 0.0 {
            if self.terms.iter().any(|(e, _)| *e < Exp::from_integer(0)) {
                return Err(SeriesError::BadPoint(t));
            }
            return Ok(self.coeff(Exp::from_integer(0)));
        }
        Ok(self.terms.iter().map(|(e, c)| c * t.powf(exp_f64(*e))).sum())
    }
}

impl fmt::Display for GpSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:.12e}*t^({})", fmt_ratio(e))?;
        }
        if let Some(tr) = self.truncation {
            write!(f, " + O(t^({}))", fmt_ratio(&tr))?;
        }
        Ok(())
    }
}

fn check_order(alpha: Exp) -> Result<(), SeriesError> {
    if alpha <= Exp::from_integer(0) {
        return Err(SeriesError::NonPositiveOrder(alpha));
    }
    Ok(())
}

/// Truncated `E_α(λ t^α) = Σ_{k=0}^{K} λ^k t^{αk} / Γ(αk+1)`, trusted below
/// `t^{α(K+1)}`.
pub fn ml_to_series(alpha: Exp, lambda: f64, k_max: usize) -> Result<GpSeries, SeriesError> {
    check_order(alpha)?;
    let af = exp_f64(alpha);
    let terms = (0..=k_max).map(|k| {
        let e = alpha * Exp::from_integer(k as i64);
        (e, lambda.powi(k as i32) / gamma(af * k as f64 + 1.0))
    });
    Ok(GpSeries::new(terms, Some(alpha * Exp::from_integer(k_max as i64 + 1))))
}

/// Caputo derivative of order `alpha` (lower limit 0), applied termwise:
/// `t^β ↦ 0` for `β ∈ {0, …, n−1}` and
/// `t^β ↦ Γ(β+1)/Γ(β−α+1) t^{β−α}` for `β > n−1`, where `n−1 < α ≤ n`.
pub fn caputo_deriv(f: &GpSeries, alpha: Exp) -> Result<GpSeries, SeriesError> {
    check_order(alpha)?;
    let n = ceil_exp(alpha);
    let n_minus_1 = Exp::from_integer(n - 1);
    let mut out = Vec::with_capacity(f.terms.len());
    for &(beta, c) in &f.terms {
        if is_integer(beta) && beta >= Exp::from_integer(0) && beta <= n_minus_1 {
            continue;
        }
        if beta <= n_minus_1 {
            return Err(SeriesError::UnsupportedExponent { exponent: beta, order: alpha });
        }
        let bf = exp_f64(beta);
        let af = exp_f64(alpha);
        out.push((beta - alpha, c * gamma(bf + 1.0) / gamma(bf - af + 1.0)));
    }
    Ok(GpSeries::new(out, f.truncation.map(|t| t - alpha)))
}

/// Riemann-Liouville integral of order `alpha`, termwise:
/// `t^β ↦ Γ(β+1)/Γ(β+α+1) t^{β+α}`. Terms with `β ≤ −1` are not integrable.
pub fn rl_integral(f: &GpSeries, alpha: Exp) -> Result<GpSeries, SeriesError> {
    check_order(alpha)?;
    let af = exp_f64(alpha);
    let mut out = Vec::with_capacity(f.terms.len());
    for &(beta, c) in &f.terms {
        if beta <= Exp::from_integer(-1) {
            return Err(SeriesError::UnsupportedExponent { exponent: beta, order: alpha });
        }
        let bf = exp_f64(beta);
        out.push((beta + alpha, c * gamma(bf + 1.0) / gamma(bf + af + 1.0)));
    }
    Ok(GpSeries::new(out, f.truncation.map(|t| t + alpha)))
}

/// Differentiability class at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regularity {
    /// Some exponent is a negative non-integer: not even continuous at 0.
    Singular,
    /// `C^k` but not `C^{k+1}`.
    Finite(u64),
    /// Every exponent is a nonnegative integer.
    Infinite,
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularity::Singular => write!(f, "singular"),
            Regularity::Finite(k) => write!(f, "C^{k}"),
            Regularity::Infinite => write!(f, "C^inf"),
        }
    }
}

/// Largest `k` such that every exponent is a nonnegative integer or `> k`.
pub fn regularity_class(f: &GpSeries) -> Regularity {
    let lowest_fractional = f
        .terms
        .iter()
        .map(|(e, _)| *e)
        .filter(|e| !(is_integer(*e) && *e >= Exp::from_integer(0)))
        .min();
    match lowest_fractional {
        None => Regularity::Infinite,
        Some(e) if e < Exp::from_integer(0) => Regularity::Singular,
        // γ > k  ⇔  k ≤ ceil(γ) − 1 for non-integer γ
        Some(e) => Regularity::Finite((ceil_exp(e) - 1) as u64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueAtZero {
    Finite(f64),
    Divergent,
}

/// `D^α f` at `t = 0`: the constant coefficient of the image, or divergence
/// if the image has a negative exponent.
pub fn caputo_value_at_zero(f: &GpSeries, alpha: Exp) -> Result<ValueAtZero, SeriesError> {
    let image = caputo_deriv(f, alpha)?;
    if image.terms.iter().any(|(e, _)| *e < Exp::from_integer(0)) {
        return Ok(ValueAtZero::Divergent);
    }
    Ok(ValueAtZero::Finite(image.coeff(Exp::from_integer(0))))
}

/// First exponent where two series disagree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    pub exponent: Exp,
    pub lhs: f64,
    pub rhs: f64,
}

/// Compares two series below the shorter trusted range. Coefficients agree
/// when `|a − b| ≤ tol · max(|a|, |b|)`; a missing term counts as 0.
pub fn first_mismatch(a: &GpSeries, b: &GpSeries, tol: f64) -> Option<Mismatch> {
    let horizon = match (a.truncation, b.truncation) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let mut exps: Vec<Exp> = a.terms.iter().chain(&b.terms).map(|(e, _)| *e).collect();
    exps.sort();
    exps.dedup();
    exps.into_iter()
        .filter(|e| horizon.is_none_or(|h| *e < h))
        .find_map(|e| {
            let (x, y) = (a.coeff(e), b.coeff(e));
            ((x - y).abs() > tol * x.abs().max(y.abs())).then_some(Mismatch { exponent: e, lhs: x, rhs: y })
        })
}

/// Outcome of comparing `D^{a1} D^{a2} f`, `D^{a2} D^{a1} f` and `D^{a1+a2} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposeReport {
    /// `D^{a1} D^{a2} f`
    pub lhs_series: GpSeries,
    /// `D^{a2} D^{a1} f`
    pub swapped_series: GpSeries,
    /// `D^{a1+a2} f`
    pub rhs_series: GpSeries,
    pub equal_termwise: bool,
    /// Lowest exponent at which either composition differs from the direct
    /// derivative.
    pub first_mismatch: Option<Mismatch>,
    pub max_numeric_gap: f64,
    pub sample_points: Vec<f64>,
}

pub fn compose_check(
    f: &GpSeries,
    a1: Exp,
    a2: Exp,
    sample_points: &[f64],
    tol: f64,
) -> Result<ComposeReport, SeriesError> {
    if let Some(t) = sample_points.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(SeriesError::BadPoint(*t));
    }
    let lhs = caputo_deriv(&caputo_deriv(f, a2)?, a1)?;
    let swapped = caputo_deriv(&caputo_deriv(f, a1)?, a2)?;
    let rhs = caputo_deriv(f, a1 + a2)?;

    let m1 = first_mismatch(&lhs, &rhs, tol);
    let m2 = first_mismatch(&swapped, &rhs, tol);
    let mismatch = match (m1, m2) {
        (Some(x), Some(y)) => Some(if y.exponent < x.exponent { y } else { x }),
        (x, y) => x.or(y),
    };

    let mut gap = 0.0f64;
    for &t in sample_points {
        let r = rhs.eval(t)?;
        for side in [&lhs, &swapped] {
            let v = side.eval(t)?;
            let scale = v.abs().max(r.abs());
            if scale > 0.0 {
                gap = gap.max((v - r).abs() / scale);
            }
        }
    }

    Ok(ComposeReport {
        lhs_series: lhs,
        swapped_series: swapped,
        rhs_series: rhs,
        equal_termwise: mismatch.is_none(),
        first_mismatch: mismatch,
        max_numeric_gap: gap,
        sample_points: sample_points.to_vec(),
    })
}
