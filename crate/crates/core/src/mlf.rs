//! Mittag-Leffler functions by controlled series truncation.
//!
//! Four families are covered:
//!
//! - one-parameter `E_α(z) = Σ z^k / Γ(αk+1)`
//! - two-parameter `E_{α,β}(z) = Σ z^k / Γ(αk+β)`
//! - multinomial `E_{(a_1..a_n),b}(z_1..z_n) = Σ_k Σ_{|l|=k} (k; l) Π z_i^{l_i} / Γ(b + Σ a_i l_i)`
//! - Prabhakar `E^γ_{α,β}(z) = Σ (γ)_k z^k / (Γ(αk+β) k!)`
//!
//! Summation stops once three consecutive outer terms are each below
//! `rtol·|partial sum|`. Arguments with `|z| > 50` are rejected, and so is any
//! input where cancellation between terms would leave fewer than ~8 correct
//! digits; there is no asymptotic fallback.

use statrs::function::factorial::factorial;
use statrs::function::gamma::ln_gamma;

use crate::exec::{self, Execution};
use crate::rational::{exp_f64, Exp};

/// Largest accepted `|z_i|`.
pub const MAX_ARGUMENT: f64 = 50.0;

/// Largest accepted `Σ|term| / |sum|`.
pub const MAX_CANCELLATION: f64 = 1e7;

const SMALL_TERMS_TO_STOP: usize = 3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlError {
    #[error("series did not meet the truncation rule within k_max = {k_max} terms")]
    NonConvergence { k_max: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cancellation factor {factor:.3e} exceeds {MAX_CANCELLATION:e}; series summation is not reliable here")]
    PrecisionLoss { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalControl {
    pub rtol: f64,
    pub k_max: usize,
}

impl Default for EvalControl {
    fn default() -> Self {
        EvalControl { rtol: 1e-12, k_max: 10_000 }
    }
}

impl EvalControl {
    pub fn new(rtol: f64, k_max: usize) -> Result<Self, MlError> {
        if !(rtol > 0.0 && rtol.is_finite()) {
            return Err(MlError::Domain(format!("rtol must be positive, got {rtol}")));
        }
        if k_max == 0 {
            return Err(MlError::Domain("k_max must be at least 1".into()));
        }
        Ok(EvalControl { rtol, k_max })
    }
}

/// Parameters of `t^0 · E_{(a),b}(scales_i · t^{power_exponents_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MLSpec {
    pub a: Vec<Exp>,
    pub b: Exp,
    /// Prabhakar parameter; only honoured for `n = 1`.
    pub gamma: Exp,
    pub scales: Vec<f64>,
    pub power_exponents: Vec<Exp>,
}

impl MLSpec {
    /// Spec whose arguments carry the same exponent as their order, the
    /// shape produced by Laplace inversion.
    pub fn laplace_family(a: Vec<Exp>, b: Exp, scales: Vec<f64>) -> Self {
        MLSpec { power_exponents: a.clone(), a, b, gamma: Exp::from_integer(1), scales }
    }

    pub fn validate(&self) -> Result<(), MlError> {
        let n = self.a.len();
        if n == 0 || self.scales.len() != n || self.power_exponents.len() != n {
            return Err(MlError::Domain(format!(
                "MLSpec needs equal non-empty lengths, got a={}, scales={}, powers={}",
                n,
                self.scales.len(),
                self.power_exponents.len()
            )));
        }
        if let Some(a) = self.a.iter().find(|a| **a <= Exp::from_integer(0)) {
            return Err(MlError::Domain(format!("inner order {a} must be positive")));
        }
        if self.b <= Exp::from_integer(0) {
            return Err(MlError::Domain(format!("b = {} must be positive", self.b)));
        }
        if self.gamma <= Exp::from_integer(0) {
            return Err(MlError::Domain(format!("gamma = {} must be positive", self.gamma)));
        }
        if n > 1 && self.gamma != Exp::from_integer(1) {
            return Err(MlError::Domain("Prabhakar gamma is only defined for a single argument".into()));
        }
        if let Some(p) = self.power_exponents.iter().find(|p| **p < Exp::from_integer(0)) {
            return Err(MlError::Domain(format!("power exponent {p} must be nonnegative")));
        }
        if self.scales.iter().any(|s| !s.is_finite()) {
            return Err(MlError::Domain("scales must be finite".into()));
        }
        Ok(())
    }

    /// Arguments `z_i` at time `t`.
    pub fn arguments(&self, t: f64) -> Vec<f64> {
        self.scales
            .iter()
            .zip(&self.power_exponents)
            .map(|(s, p)| if *p == Exp::from_integer(0) { *s } else { s * t.powf(exp_f64(*p)) })
            .collect()
    }
}

/// `Γ(x)` for `x > 0`, exact at small positive integers.
pub fn gamma(x: f64) -> f64 {
    if (1.0..=171.0).contains(&x) && x.fract() == 0.0 {
        factorial(x as u64 - 1)
    } else {
        statrs::function::gamma::gamma(x)
    }
}

/// `num / Γ(arg)` where `num` is tracked both directly and as
/// `sign·exp(ln_abs)`; the log form takes over once either side leaves the
/// f64 range.
fn over_gamma(num: f64, ln_abs: f64, sign: f64, arg: f64) -> f64 {
    if sign == 0.0 {
        return 0.0;
    }
    if arg <= 170.0 && num.is_finite() && num != 0.0 {
        num / gamma(arg)
    } else {
        sign * (ln_abs - ln_gamma(arg)).exp()
    }
}

struct SeriesSum {
    rtol: f64,
    sum: f64,
    abs_sum: f64,
    small_run: usize,
}

impl SeriesSum {
    fn new(ctrl: &EvalControl) -> Self {
        SeriesSum { rtol: ctrl.rtol, sum: 0.0, abs_sum: 0.0, small_run: 0 }
    }

    /// Adds the k-th outer term; returns true when the truncation rule fires.
    fn push(&mut self, term: f64, abs_term: f64) -> bool {
        self.sum += term;
        self.abs_sum += abs_term;
        if term == 0.0 || term.abs() < self.rtol * self.sum.abs() {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        self.small_run >= SMALL_TERMS_TO_STOP
    }

    fn finish(self) -> Result<f64, MlError> {
        if !self.sum.is_finite() {
            return Err(MlError::Domain("series sum overflowed".into()));
        }
        let factor = if self.sum == 0.0 { f64::INFINITY } else { self.abs_sum / self.sum.abs() };
        if factor > MAX_CANCELLATION {
            return Err(MlError::PrecisionLoss { factor });
        }
        Ok(self.sum)
    }
}

fn run_series(
    ctrl: &EvalControl,
    mut term: impl FnMut(usize) -> (f64, f64),
) -> Result<f64, MlError> {
    let mut acc = SeriesSum::new(ctrl);
    for k in 0..=ctrl.k_max {
        let (t, a) = term(k);
        if acc.push(t, a) {
            return acc.finish();
        }
    }
    Err(MlError::NonConvergence { k_max: ctrl.k_max })
}

fn check_argument(z: f64) -> Result<(), MlError> {
    if !z.is_finite() || z.abs() > MAX_ARGUMENT {
        return Err(MlError::Domain(format!("|z| = {} exceeds the series guard {MAX_ARGUMENT}", z.abs())));
    }
    Ok(())
}

fn positive(name: &str, v: Exp) -> Result<f64, MlError> {
    if v <= Exp::from_integer(0) {
        return Err(MlError::Domain(format!("{name} = {v} must be positive")));
    }
    Ok(exp_f64(v))
}

/// One-parameter Mittag-Leffler function `E_α(z)`.
pub fn ml1(alpha: Exp, z: f64, ctrl: &EvalControl) -> Result<f64, MlError> {
    ml2(alpha, Exp::from_integer(1), z, ctrl)
}

/// Two-parameter Mittag-Leffler function `E_{α,β}(z)`.
pub fn ml2(alpha: Exp, beta: Exp, z: f64, ctrl: &EvalControl) -> Result<f64, MlError> {
    ml_prabhakar(alpha, beta, Exp::from_integer(1), z, ctrl)
}

/// Prabhakar function `E^γ_{α,β}(z)`. With `γ = 1` the Pochhammer weight
/// `(1)_k / k!` is exactly 1 and this is `E_{α,β}`.
pub fn ml_prabhakar(
    alpha: Exp,
    beta: Exp,
    gamma_param: Exp,
    z: f64,
    ctrl: &EvalControl,
) -> Result<f64, MlError> {
    let alpha = positive("alpha", alpha)?;
    let beta = positive("beta", beta)?;
    let g = positive("gamma", gamma_param)?;
    check_argument(z)?;
    let unit_weight = gamma_param == Exp::from_integer(1);
    let ln_z = z.abs().ln();
    let z_sign = z.signum();

    // weight = (γ)_k / k!, zpow = z^k
    let mut weight = 1.0f64;
    let mut ln_weight = 0.0f64;
    let mut zpow = 1.0f64;
    let mut sign = 1.0f64;
    run_series(ctrl, |k| {
        if k > 0 {
            if !unit_weight {
                let r = (g + k as f64 - 1.0) / k as f64;
                weight *= r;
                ln_weight += r.ln();
            }
            zpow *= z;
            sign *= z_sign;
        }
        let ln_abs = ln_weight + if k == 0 { 0.0 } else { k as f64 * ln_z };
        let t = over_gamma(weight * zpow, ln_abs, sign, alpha * k as f64 + beta);
        (t, t.abs())
    })
}

/// Multinomial Mittag-Leffler function `E_{(a),b}(z)` with
/// `z_i = scales_i · t^{power_exponents_i}`.
pub fn ml_multi(spec: &MLSpec, t: f64, ctrl: &EvalControl) -> Result<f64, MlError> {
    spec.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(MlError::Domain(format!("t = {t} must be nonnegative")));
    }
    let z = spec.arguments(t);
    for zi in &z {
        check_argument(*zi)?;
    }
    if spec.a.len() == 1 {
        return ml_prabhakar(spec.a[0], spec.b, spec.gamma, z[0], ctrl);
    }
    let orders: Vec<f64> = spec.a.iter().map(|a| exp_f64(*a)).collect();
    let b = exp_f64(spec.b);
    let slots: Vec<Slot> = z
        .iter()
        .zip(&orders)
        .map(|(zi, ai)| Slot { z: *zi, ln_abs: zi.abs().ln(), sign: zi.signum(), order: *ai })
        .collect();
    run_series(ctrl, |k| {
        let mut acc = OuterTerm::default();
        compositions(&slots, k, Partial { coef: 1.0, ln_coef: 0.0, sign: 1.0, arg: b }, &mut acc);
        (acc.sum, acc.abs)
    })
}

/// Evaluates [`ml_multi`] at many times.
pub fn ml_multi_batch(
    spec: &MLSpec,
    ts: &[f64],
    ctrl: &EvalControl,
    exec: Execution,
) -> Vec<Result<f64, MlError>> {
    exec::map(exec, ts, |t| ml_multi(spec, *t, ctrl))
}

struct Slot {
    z: f64,
    ln_abs: f64,
    sign: f64,
    order: f64,
}

#[derive(Clone, Copy)]
struct Partial {
    /// multinomial · Π z_i^{l_i}, directly
    coef: f64,
    /// log of |coef|
    ln_coef: f64,
    sign: f64,
    /// b + Σ a_i l_i
    arg: f64,
}

#[derive(Default)]
struct OuterTerm {
    sum: f64,
    abs: f64,
}

/// Enumerates `l_1 + … + l_n = remaining` in lexicographic order, updating
/// the binomial factor `C(r, l)` and the power `z^l` by ratios so no
/// factorial is ever formed.
fn compositions(slots: &[Slot], remaining: usize, p: Partial, acc: &mut OuterTerm) {
    let (slot, rest) = slots.split_first().expect("at least one slot");
    if rest.is_empty() {
        let l = remaining;
        let mut q = p;
        if l > 0 {
            q.coef *= slot.z.powi(l as i32);
            q.ln_coef += l as f64 * slot.ln_abs;
            if slot.z == 0.0 {
                q.sign = 0.0;
            } else if slot.sign < 0.0 && l % 2 == 1 {
                q.sign = -q.sign;
            }
            q.arg += slot.order * l as f64;
        }
        let t = over_gamma(q.coef, q.ln_coef, q.sign, q.arg);
        acc.sum += t;
        acc.abs += t.abs();
        return;
    }
    let r = remaining;
    let mut binom = 1.0f64;
    let mut ln_binom = 0.0f64;
    let mut zpow = 1.0f64;
    let mut sign = 1.0f64;
    for l in 0..=r {
        if l > 0 {
            let ratio = (r - l + 1) as f64 / l as f64;
            binom *= ratio;
            ln_binom += ratio.ln();
            zpow *= slot.z;
            sign *= slot.sign;
        }
        let zero_power = slot.z == 0.0 && l > 0;
        let q = Partial {
            coef: p.coef * binom * zpow,
            ln_coef: p.ln_coef + ln_binom + if l > 0 { l as f64 * slot.ln_abs } else { 0.0 },
            sign: if zero_power { 0.0 } else { p.sign * sign },
            arg: p.arg + slot.order * l as f64,
        };
        if q.sign == 0.0 {
            // every deeper term carries a zero factor
            continue;
        }
        compositions(rest, r - l, q, acc);
    }
}
