//! Exact Laplace-domain algebra over fractional powers of `s`.
//!
//! [`SPoly`] is `Σ c_i s^{μ_i}` with rational coefficients and exponents;
//! [`SRational`] is a quotient kept in canonical form (denominator monic,
//! smallest denominator exponent 0). Equality of quotients is decided by
//! exact cross-multiplication, never by numeric sampling.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exec::{self, Execution};
use crate::mlf::{gamma, ml_multi, EvalControl, MLSpec, MlError};
use crate::rational::{ceil_exp, exp_f64, fmt_ratio, q_f64, Exp, Q};
use crate::splitter::{MultiTermFde, SplitSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SDomainError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("system is not a chain: {0}")]
    NotAChain(String),
    #[error("expression is outside the multinomial Mittag-Leffler family: {0}")]
    ShapeError(String),
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// `Σ c_i s^{μ_i}`, exponents distinct and descending, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SPoly {
    terms: Vec<(Q, Exp)>,
}

impl SPoly {
    pub fn new(terms: impl IntoIterator<Item = (Q, Exp)>) -> Self {
        let mut acc: BTreeMap<Exp, Q> = BTreeMap::new();
        for (c, e) in terms {
            *acc.entry(e).or_insert_with(Q::zero) += c;
        }
        SPoly { terms: acc.into_iter().rev().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect() }
    }

    pub fn zero() -> Self {
        SPoly::default()
    }

    pub fn one() -> Self {
        SPoly::monomial(Q::one(), Exp::zero())
    }

    pub fn monomial(c: Q, e: Exp) -> Self {
        SPoly::new([(c, e)])
    }

    pub fn terms(&self) -> &[(Q, Exp)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient and exponent of the highest power.
    pub fn leading(&self) -> Option<&(Q, Exp)> {
        self.terms.first()
    }

    pub fn min_exponent(&self) -> Option<Exp> {
        self.terms.last().map(|t| t.1)
    }

    pub fn coeff(&self, e: Exp) -> Q {
        self.terms.iter().find(|t| t.1 == e).map(|t| t.0.clone()).unwrap_or_else(Q::zero)
    }

    /// Multiplies by `s^e`.
    pub fn shift(&self, e: Exp) -> Self {
        SPoly { terms: self.terms.iter().map(|(c, x)| (c.clone(), x + e)).collect() }
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return SPoly::zero();
        }
        SPoly { terms: self.terms.iter().map(|(c, x)| (c * k, *x)).collect() }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.terms.iter().map(|(c, e)| q_f64(c) * s.powf(exp_f64(*e))).sum()
    }
}

impl Add for &SPoly {
    type Output = SPoly;
    fn add(self, rhs: &SPoly) -> SPoly {
        SPoly::new(self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl Sub for &SPoly {
    type Output = SPoly;
    fn sub(self, rhs: &SPoly) -> SPoly {
        SPoly::new(self.terms.iter().cloned().chain(rhs.terms.iter().map(|(c, e)| (-c, *e))))
    }
}

impl Neg for &SPoly {
    type Output = SPoly;
    fn neg(self) -> SPoly {
        SPoly { terms: self.terms.iter().map(|(c, e)| (-c, *e)).collect() }
    }
}

impl Mul for &SPoly {
    type Output = SPoly;
    fn mul(self, rhs: &SPoly) -> SPoly {
        SPoly::new(
            self.terms
                .iter()
                .flat_map(|(c1, e1)| rhs.terms.iter().map(move |(c2, e2)| (c1 * c2, e1 + e2))),
        )
    }
}

impl fmt::Display for SPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, e)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let power = match (e.is_zero(), e.is_one()) {
                (true, _) => String::new(),
                (_, true) => "s".to_string(),
                _ => format!("s^({})", fmt_ratio(e)),
            };
            match (mag.is_one(), power.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{power}")?,
                (false, true) => write!(f, "{}", fmt_ratio(&mag))?,
                (false, false) => write!(f, "({})*{power}", fmt_ratio(&mag))?,
            }
        }
        Ok(())
    }
}

/// `num / den` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SRational {
    num: SPoly,
    den: SPoly,
}

impl SRational {
    pub fn new(num: SPoly, den: SPoly) -> Result<Self, SDomainError> {
        let (lead, _) = den.leading().ok_or(SDomainError::ZeroDenominator)?;
        if num.is_zero() {
            return Ok(SRational { num, den: SPoly::one() });
        }
        let k = lead.recip();
        let sigma = -den.min_exponent().unwrap();
        Ok(SRational { num: num.scale(&k).shift(sigma), den: den.scale(&k).shift(sigma) })
    }

    pub fn num(&self) -> &SPoly {
        &self.num
    }

    pub fn den(&self) -> &SPoly {
        &self.den
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.num.eval(s) / self.den.eval(s)
    }

    /// The numerator this quotient has when written over `den`, if `den`
    /// canonicalizes to this quotient's denominator.
    pub fn numerator_over(&self, den: &SPoly) -> Option<SPoly> {
        let (lead, _) = den.leading()?;
        let sigma = den.min_exponent()?;
        let canon = den.scale(&lead.recip()).shift(-sigma);
        if self.num.is_zero() {
            return Some(SPoly::zero());
        }
        (canon == self.den).then(|| self.num.scale(lead).shift(sigma))
    }
}

impl fmt::Display for SRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}

/// `A.num·B.den − B.num·A.den`; empty exactly when `A = B`.
pub fn residual(a: &SRational, b: &SRational) -> SPoly {
    &(&a.num * &b.den) - &(&b.num * &a.den)
}

pub fn srational_equal(a: &SRational, b: &SRational) -> bool {
    residual(a, b).is_zero()
}

/// `A − B` as a quotient.
pub fn difference(a: &SRational, b: &SRational) -> Result<SRational, SDomainError> {
    if a.den == b.den {
        return SRational::new(&a.num - &b.num, a.den.clone());
    }
    SRational::new(residual(a, b), &a.den * &b.den)
}

/// Numerator of `A − B` over the common denominator `den`, or `None` when
/// either side is not expressed over `den`.
pub fn residual_over_common_den(a: &SRational, b: &SRational, den: &SPoly) -> Option<SPoly> {
    Some(&a.numerator_over(den)? - &b.numerator_over(den)?)
}

/// `a_0 + Σ a_j s^{α_j}`, not normalized.
pub fn fde_denominator(fde: &MultiTermFde) -> SPoly {
    let a = fde.a();
    SPoly::new(
        std::iter::once((a[0].clone(), Exp::zero()))
            .chain(fde.alpha().iter().zip(&a[1..]).map(|(al, c)| (c.clone(), *al))),
    )
}

/// `X(s)` of the FDE:
/// `Σ_i C_i Σ_{α_j > i} a_j s^{α_j−i−1}` over `a_0 + Σ a_j s^{α_j}`.
pub fn fde_laplace(fde: &MultiTermFde) -> SRational {
    let a = fde.a();
    let mut num = Vec::new();
    for (i, c) in fde.ics().iter().enumerate() {
        let i_exp = Exp::from_integer(i as i64);
        for (j, al) in fde.alpha().iter().enumerate() {
            if *al > i_exp {
                num.push((c * &a[j + 1], al - i_exp - Exp::one()));
            }
        }
    }
    SRational::new(SPoly::new(num), fde_denominator(fde)).expect("a_m is nonzero")
}

/// `Σ_{k<⌈β⌉} s^{β−k−1} y^{(k)}(0)`, the initial-value part of `L{D^β y}`.
fn ic_terms(order: Exp, init: &[Q]) -> SPoly {
    debug_assert_eq!(init.len() as i64, ceil_exp(order));
    SPoly::new(
        init.iter().enumerate().map(|(k, c)| (c.clone(), order - Exp::from_integer(k as i64 + 1))),
    )
}

/// `Y_0(s)` of a chain system by forward elimination.
///
/// Each `Y_j` is tracked as `P_j X + R_j`; the closing equation then gives
/// one linear relation for `X`.
pub fn split_laplace(sys: &SplitSystem) -> Result<SRational, SDomainError> {
    if !sys.is_chain() {
        return Err(SDomainError::NotAChain(
            "every equation but the last must read D^b y_j = y_(j+1)".into(),
        ));
    }
    let eqs = sys.equations();
    let n = eqs.len();
    let mut p = vec![SPoly::one()];
    let mut r = vec![SPoly::zero()];
    for (j, eq) in eqs[..n - 1].iter().enumerate() {
        let s_beta = SPoly::monomial(Q::one(), eq.order);
        p.push(&s_beta * &p[j]);
        r.push(&(&s_beta * &r[j]) - &ic_terms(eq.order, sys.init(j)));
    }
    let last = &eqs[n - 1];
    let s_beta = SPoly::monomial(Q::one(), last.order);
    // s^β Y_last − ICs = Σ c_u Y_u
    let mut coef = &s_beta * &p[n - 1];
    let mut rest = &ic_terms(last.order, sys.init(n - 1)) - &(&s_beta * &r[n - 1]);
    for t in &last.rhs {
        coef = &coef - &p[t.unknown].scale(&t.coeff);
        rest = &rest + &r[t.unknown].scale(&t.coeff);
    }
    SRational::new(rest, coef)
}

/// `scale · t^{b−1} E_{(a_1..a_n),b}(−c_1 t^{a_1}, …, −c_n t^{a_n})`, whose
/// transform is `scale · s^{A−b} / (s^A + Σ c_i s^{A−a_i})` with `A = max a_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlTerm {
    pub scale: Q,
    /// Strictly increasing.
    pub a: Vec<Exp>,
    pub b: Exp,
    /// Denominator coefficients `c_i`; the ML arguments are `−c_i t^{a_i}`.
    pub coeffs: Vec<Q>,
}

impl MlTerm {
    pub fn power(&self) -> Exp {
        self.b - Exp::one()
    }

    fn top(&self) -> Exp {
        self.a.last().copied().unwrap_or_else(Exp::zero)
    }

    fn check_shape(&self) -> Result<(), SDomainError> {
        let bad = |m: String| Err(SDomainError::ShapeError(m));
        if self.a.len() != self.coeffs.len() {
            return bad("orders and coefficients differ in length".into());
        }
        if self.b < Exp::one() {
            return bad(format!("b = {} < 1", fmt_ratio(&self.b)));
        }
        if self.a.iter().any(|x| *x <= Exp::zero()) || self.a.windows(2).any(|w| w[0] >= w[1]) {
            return bad("orders must be positive and strictly increasing".into());
        }
        if self.coeffs.iter().any(Zero::is_zero) {
            return bad("zero argument coefficient".into());
        }
        Ok(())
    }

    pub fn spec(&self) -> MLSpec {
        MLSpec::laplace_family(self.a.clone(), self.b, self.coeffs.iter().map(|c| -q_f64(c)).collect())
    }

    pub fn eval(&self, t: f64, ctrl: &EvalControl) -> Result<f64, SDomainError> {
        let pre = q_f64(&self.scale) * if self.b.is_one() { 1.0 } else { t.powf(exp_f64(self.power())) };
        if pre == 0.0 {
            return Ok(0.0);
        }
        let value = if self.a.is_empty() {
            1.0 / gamma(exp_f64(self.b))
        } else {
            ml_multi(&self.spec(), t, ctrl)?
        };
        Ok(pre * value)
    }
}

impl fmt::Display for MlTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*t^({})*E_(", fmt_ratio(&self.scale), fmt_ratio(&self.power()))?;
        let a: Vec<String> = self.a.iter().map(fmt_ratio).collect();
        write!(f, "({}),{})(", a.join(","), fmt_ratio(&self.b))?;
        let args: Vec<String> = self
            .a
            .iter()
            .zip(&self.coeffs)
            .map(|(x, c)| format!("{}*t^({})", fmt_ratio(&-c), fmt_ratio(x)))
            .collect();
        write!(f, "{})", args.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MlTermSum {
    pub terms: Vec<MlTerm>,
}

impl MlTermSum {
    pub fn eval(&self, t: f64, ctrl: &EvalControl) -> Result<f64, SDomainError> {
        self.terms.iter().map(|term| term.eval(t, ctrl)).sum()
    }

    pub fn eval_many(&self, ts: &[f64], ctrl: &EvalControl, exec: Execution) -> Result<Vec<f64>, SDomainError> {
        exec::map(exec, ts, |&t| self.eval(t, ctrl)).into_iter().collect()
    }

    /// Sum of the terms' transforms.
    pub fn laplace(&self) -> Result<SRational, SDomainError> {
        let mut acc = SRational::new(SPoly::zero(), SPoly::one())?;
        for term in &self.terms {
            let x = ml_laplace(term)?;
            acc = if acc.den == x.den {
                SRational::new(&acc.num + &x.num, x.den)?
            } else {
                SRational::new(&(&acc.num * &x.den) + &(&x.num * &acc.den), &acc.den * &x.den)?
            };
        }
        Ok(acc)
    }
}

impl fmt::Display for MlTermSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn ml_laplace(term: &MlTerm) -> Result<SRational, SDomainError> {
    term.check_shape()?;
    let top = term.top();
    let den = SPoly::new(
        std::iter::once((Q::one(), top))
            .chain(term.a.iter().zip(&term.coeffs).map(|(x, c)| (c.clone(), top - x))),
    );
    SRational::new(SPoly::monomial(term.scale.clone(), top - term.b), den)
}

/// Splits `X` into one ML term per numerator monomial: `c s^μ` becomes
/// `c t^{A−μ−1} E_{(A−μ_i),A−μ}(−d_i t^{A−μ_i})` for the denominator
/// `s^A + Σ d_i s^{μ_i}`.
pub fn inverse_laplace_to_ml(x: &SRational) -> Result<MlTermSum, SDomainError> {
    let (_, top) = x.den.leading().expect("canonical denominator is nonzero");
    let top = *top;
    // den is monic; remaining terms in descending exponent give ascending a_i
    let (a, coeffs): (Vec<Exp>, Vec<Q>) = x.den.terms[1..].iter().map(|(c, mu)| (top - mu, c.clone())).unzip();
    let terms = x
        .num
        .terms
        .iter()
        .map(|(c, mu)| {
            let term = MlTerm { scale: c.clone(), a: a.clone(), b: top - mu, coeffs: coeffs.clone() };
            term.check_shape().map(|_| term)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MlTermSum { terms })
}
