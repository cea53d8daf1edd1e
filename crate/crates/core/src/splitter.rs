//! Multi-term linear FDEs and the systems obtained by splitting them.
//!
//! The FDE is `a_0 x + a_1 D^{α_1} x + … + a_m D^{α_m} x = 0` with Caputo
//! derivatives and initial data `x^{(i)}(0) = C_i`, `i < ⌈α_m⌉`.
//!
//! Valid constructions:
//!
//! - [`build_split_2m1`]: one order per unit cell (`k−1 < α_k ≤ k`), split into
//!   `2m−1` links of order ≤ 1. Odd unknowns carry `D^{α_k} x` and start at 0,
//!   even unknowns carry `x^{(k)}` and start at `C_k`.
//! - [`build_split_chain`]: all orders in one cell `(p, p+1]`, split into `m`
//!   links whose intermediate unknowns start at 0.
//! - [`refine_split`]: cut one link in two inside its unit cell.
//!
//! [`build_naive_split`] builds the shortcuts that drop initial data, for
//! negative testing.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{ceil_exp, fmt_ratio, serde_str, Exp, Q};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("malformed FDE: {0}")]
    MalformedFde(String),
    #[error("order α_{k} = {alpha} is outside the cell ({}, {k}]", k - 1)]
    OrderCellViolation { k: usize, alpha: Exp },
    #[error("α_{k} = {k} makes link β_{} zero; use the chain split instead", 2 * k - 1)]
    DegenerateOrder { k: usize },
    #[error("orders are not inside one unit cell (p, p+1]: {0}")]
    CellViolation(String),
    #[error("invalid split point {cut} for order {order}")]
    InvalidCut { cut: Exp, order: Exp },
    #[error("invalid refinement: {0}")]
    InvalidRefinement(String),
    #[error("malformed system: {0}")]
    MalformedSystem(String),
}

/// `a_0 x + Σ a_j D^{α_j} x = 0` with `x^{(i)}(0) = ics[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTermFde {
    a: Vec<Q>,
    alpha: Vec<Exp>,
    ics: Vec<Q>,
}

impl MultiTermFde {
    pub fn new(a: Vec<Q>, alpha: Vec<Exp>, ics: Vec<Q>) -> Result<Self, SplitError> {
        let m = alpha.len();
        if m == 0 {
            return Err(SplitError::MalformedFde("at least one derivative order is required".into()));
        }
        if a.len() != m + 1 {
            return Err(SplitError::MalformedFde(format!(
                "{} coefficients given for {m} orders; need a_0..a_{m}",
                a.len()
            )));
        }
        if a[m].is_zero() {
            return Err(SplitError::MalformedFde("leading coefficient a_m is zero".into()));
        }
        if alpha[0] <= Exp::zero() {
            return Err(SplitError::MalformedFde(format!("order {} is not positive", alpha[0])));
        }
        if let Some(w) = alpha.windows(2).find(|w| w[0] >= w[1]) {
            return Err(SplitError::MalformedFde(format!("orders must increase strictly: {} >= {}", w[0], w[1])));
        }
        let need = ceil_exp(alpha[m - 1]) as usize;
        if ics.len() != need {
            return Err(SplitError::MalformedFde(format!(
                "order {} needs {need} initial values, got {}",
                alpha[m - 1],
                ics.len()
            )));
        }
        Ok(MultiTermFde { a, alpha, ics })
    }

    /// Number of derivative terms.
    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn a(&self) -> &[Q] {
        &self.a
    }

    pub fn alpha(&self) -> &[Exp] {
        &self.alpha
    }

    pub fn ics(&self) -> &[Q] {
        &self.ics
    }

    pub fn with_ics(&self, ics: Vec<Q>) -> Result<Self, SplitError> {
        MultiTermFde::new(self.a.clone(), self.alpha.clone(), ics)
    }

    /// True when `k−1 < α_k ≤ k` for every k.
    pub fn one_order_per_cell(&self) -> bool {
        self.check_order_cells().is_ok()
    }

    fn check_order_cells(&self) -> Result<(), SplitError> {
        for (i, &alpha) in self.alpha.iter().enumerate() {
            let k = i as i64 + 1;
            if !(alpha > Exp::from_integer(k - 1) && alpha <= Exp::from_integer(k)) {
                return Err(SplitError::OrderCellViolation { k: i + 1, alpha });
            }
        }
        Ok(())
    }

    /// `Some(p)` when `p < α_1 < … < α_m ≤ p+1`.
    pub fn common_cell(&self) -> Option<i64> {
        let p = ceil_exp(self.alpha[0]) - 1;
        (*self.alpha.last().unwrap() <= Exp::from_integer(p + 1)).then_some(p)
    }
}

/// One coefficient of a linear right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub unknown: usize,
    #[serde(with = "serde_str")]
    pub coeff: Q,
}

/// `D^{order} y_lhs = Σ coeff · y_unknown`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    #[serde(with = "serde_str")]
    pub order: Exp,
    pub lhs: usize,
    pub rhs: Vec<Term>,
}

/// Initial values `y(0), y'(0), …` for one unknown; `⌈order⌉` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InitialValues(#[serde(with = "serde_str::vec")] pub Vec<Q>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct SplitSystem {
    unknowns: Vec<String>,
    equations: Vec<Equation>,
    init: Vec<InitialValues>,
}

#[derive(Deserialize)]
struct RawSystem {
    unknowns: Vec<String>,
    equations: Vec<Equation>,
    init: Vec<InitialValues>,
}

impl TryFrom<RawSystem> for SplitSystem {
    type Error = SplitError;
    fn try_from(raw: RawSystem) -> Result<Self, SplitError> {
        SplitSystem::new(raw.unknowns, raw.equations, raw.init.into_iter().map(|v| v.0).collect())
    }
}

impl SplitSystem {
    pub fn new(unknowns: Vec<String>, equations: Vec<Equation>, init: Vec<Vec<Q>>) -> Result<Self, SplitError> {
        let n = unknowns.len();
        let bad = |msg: String| Err(SplitError::MalformedSystem(msg));
        if n == 0 || equations.len() != n || init.len() != n {
            return bad(format!(
                "{} unknowns, {} equations, {} initial-value lists",
                n,
                equations.len(),
                init.len()
            ));
        }
        let mut seen = vec![false; n];
        for eq in &equations {
            if eq.order <= Exp::zero() {
                return bad(format!("order {} is not positive", eq.order));
            }
            if eq.lhs >= n || std::mem::replace(&mut seen[eq.lhs], true) {
                return bad(format!("unknown {} is defined twice or does not exist", eq.lhs));
            }
            if let Some(t) = eq.rhs.iter().find(|t| t.unknown >= n) {
                return bad(format!("rhs references unknown {}", t.unknown));
            }
            let need = ceil_exp(eq.order) as usize;
            if init[eq.lhs].len() != need {
                return bad(format!(
                    "{} has order {} and needs {need} initial values, got {}",
                    unknowns[eq.lhs],
                    eq.order,
                    init[eq.lhs].len()
                ));
            }
        }
        Ok(SplitSystem { unknowns, equations, init: init.into_iter().map(InitialValues).collect() })
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    /// Initial values of unknown `j`.
    pub fn init(&self, j: usize) -> &[Q] {
        &self.init[j].0
    }

    pub fn orders(&self) -> Vec<Exp> {
        self.equations.iter().map(|e| e.order).collect()
    }

    /// Equation defining unknown `j`.
    pub fn equation_for(&self, j: usize) -> &Equation {
        self.equations.iter().find(|e| e.lhs == j).expect("validated: one equation per unknown")
    }

    /// True when equation `j` reads `D^{β_j} y_j = y_{j+1}` for all but the
    /// last equation.
    pub fn is_chain(&self) -> bool {
        let n = self.equations.len();
        self.equations.iter().enumerate().all(|(j, eq)| {
            eq.lhs == j
                && (j + 1 == n || (eq.rhs.len() == 1 && eq.rhs[0].unknown == j + 1 && eq.rhs[0].coeff.is_one()))
        })
    }
}

impl fmt::Display for SplitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for eq in &self.equations {
            write!(f, "D^({}) {} =", fmt_ratio(&eq.order), self.unknowns[eq.lhs])?;
            if eq.rhs.is_empty() {
                write!(f, " 0")?;
            }
            for (i, t) in eq.rhs.iter().enumerate() {
                let sep = if i == 0 { " " } else { " + " };
                if t.coeff.is_one() {
                    write!(f, "{sep}{}", self.unknowns[t.unknown])?;
                } else {
                    write!(f, "{sep}({})*{}", fmt_ratio(&t.coeff), self.unknowns[t.unknown])?;
                }
            }
            let ics: Vec<String> = self.init(eq.lhs).iter().map(fmt_ratio).collect();
            writeln!(f, "    [{}(0..) = {}]", self.unknowns[eq.lhs], ics.join(", "))?;
        }
        Ok(())
    }
}

fn link(order: Exp, lhs: usize) -> Equation {
    Equation { order, lhs, rhs: vec![Term { unknown: lhs + 1, coeff: Q::one() }] }
}

/// `−(1/a_m)[a_0 y_{slot(0)} + … + a_{m−1} y_{slot(m−1)}]`, zero terms omitted.
fn closing_rhs(fde: &MultiTermFde, slot: impl Fn(usize) -> usize) -> Vec<Term> {
    let m = fde.m();
    let am = &fde.a[m];
    (0..m)
        .filter(|&i| !fde.a[i].is_zero())
        .map(|i| Term { unknown: slot(i), coeff: -(&fde.a[i] / am) })
        .collect()
}

fn names(count: usize) -> Vec<String> {
    (0..count).map(|j| if j == 0 { "x".to_string() } else { format!("y{j}") }).collect()
}

/// Splits into `2m−1` links with
/// `β_{2j} = α_{j+1} − j` and `β_{2j+1} = (j+1) − α_{j+1}`.
///
/// For `m = 1` the single equation is cut at `α/2` into the two-link system;
/// see [`build_split_2m1_with_cut`] to choose the cut.
pub fn build_split_2m1(fde: &MultiTermFde) -> Result<SplitSystem, SplitError> {
    let cut = fde.alpha[0] / Exp::from_integer(2);
    build_split_2m1_with_cut(fde, cut)
}

/// As [`build_split_2m1`]; `first_cut` is only used when `m = 1`.
pub fn build_split_2m1_with_cut(fde: &MultiTermFde, first_cut: Exp) -> Result<SplitSystem, SplitError> {
    fde.check_order_cells()?;
    let m = fde.m();
    if m == 1 {
        let alpha = fde.alpha[0];
        if !(first_cut > Exp::zero() && first_cut < alpha) {
            return Err(SplitError::InvalidCut { cut: first_cut, order: alpha });
        }
        let eqs = vec![
            link(first_cut, 0),
            Equation { order: alpha - first_cut, lhs: 1, rhs: closing_rhs(fde, |_| 0) },
        ];
        return SplitSystem::new(names(2), eqs, vec![vec![fde.ics[0].clone()], vec![Q::zero()]]);
    }
    let count = 2 * m - 1;
    let mut eqs = Vec::with_capacity(count);
    let mut init = vec![Vec::new(); count];
    init[0] = vec![fde.ics[0].clone()];
    for j in 0..m {
        let alpha = fde.alpha[j];
        let even = alpha - Exp::from_integer(j as i64);
        if j + 1 < m {
            eqs.push(link(even, 2 * j));
            let odd = Exp::from_integer(j as i64 + 1) - alpha;
            if odd.is_zero() {
                return Err(SplitError::DegenerateOrder { k: j + 1 });
            }
            eqs.push(link(odd, 2 * j + 1));
            init[2 * j + 1] = vec![Q::zero()];
            init[2 * j + 2] = vec![fde.ics[j + 1].clone()];
        } else {
            // odd unknown y_{2i−1} carries D^{α_i} x
            let rhs = closing_rhs(fde, |i| if i == 0 { 0 } else { 2 * i - 1 });
            eqs.push(Equation { order: even, lhs: 2 * j, rhs });
        }
    }
    SplitSystem::new(names(count), eqs, init)
}

/// Splits an FDE whose orders share one cell `(p, p+1]` into
/// `D^{α_1} x = y_1`, `D^{α_{j+1}−α_j} y_j = y_{j+1}` with `y_j(0) = 0`.
pub fn build_split_chain(fde: &MultiTermFde) -> Result<SplitSystem, SplitError> {
    let p = fde.common_cell().ok_or_else(|| {
        SplitError::CellViolation(
            fde.alpha.iter().map(fmt_ratio).collect::<Vec<_>>().join(", "),
        )
    })?;
    let m = fde.m();
    let mut eqs = Vec::with_capacity(m);
    let mut init = vec![vec![Q::zero()]; m];
    init[0] = fde.ics[..=p as usize].to_vec();
    for j in 0..m {
        let order = if j == 0 { fde.alpha[0] } else { fde.alpha[j] - fde.alpha[j - 1] };
        if j + 1 < m {
            eqs.push(link(order, j));
        } else {
            eqs.push(Equation { order, lhs: j, rhs: closing_rhs(fde, |i| i) });
        }
    }
    SplitSystem::new(names(m), eqs, init)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaiveVariant {
    /// `D^{α_1} x = y`, `D^{α_2−α_1} y = −(a_0 x + a_1 y)/a_2` for `m = 2`.
    TwoTermPair,
    /// The `2m−2` equation system: the last two links of the valid split
    /// merged into one link of order `α_m − α_{m−1}`.
    Cut2m2,
}

/// Sub-cases of the naive two-term split for `0 < α_1 < 1 < α_2 ≤ 2`,
/// by the size of `α_2 − α_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaivePairCase {
    /// `1 < α_2 − α_1 < 2`
    I,
    /// `0 < α_2 − α_1 < 1`
    II,
    /// `α_2 − α_1 = 1`
    III,
}

pub fn naive_pair_case(fde: &MultiTermFde) -> Option<NaivePairCase> {
    if fde.m() != 2 {
        return None;
    }
    let (beta, alpha) = (fde.alpha[0], fde.alpha[1]);
    let one = Exp::one();
    if !(beta > Exp::zero() && beta < one && alpha > one && alpha <= Exp::from_integer(2)) {
        return None;
    }
    let gap = alpha - beta;
    Some(if gap > one {
        NaivePairCase::I
    } else if gap < one {
        NaivePairCase::II
    } else {
        NaivePairCase::III
    })
}

/// Builds the shortcut splits. Every intermediate unknown starts at 0; the
/// `x`-derivative data that these systems cannot carry is dropped.
pub fn build_naive_split(fde: &MultiTermFde, variant: NaiveVariant) -> Result<SplitSystem, SplitError> {
    let m = fde.m();
    match variant {
        NaiveVariant::TwoTermPair => {
            if m != 2 {
                return Err(SplitError::MalformedFde(format!("two-term pair split needs m = 2, got m = {m}")));
            }
            let head = fde.alpha[0];
            let tail = fde.alpha[1] - head;
            let eqs = vec![link(head, 0), Equation { order: tail, lhs: 1, rhs: closing_rhs(fde, |i| i) }];
            let init = vec![fde.ics[..ceil_exp(head) as usize].to_vec(), vec![Q::zero(); ceil_exp(tail) as usize]];
            SplitSystem::new(names(2), eqs, init)
        }
        NaiveVariant::Cut2m2 => {
            if m < 2 {
                return Err(SplitError::MalformedFde("the 2m-2 split needs m >= 2".into()));
            }
            fde.check_order_cells()?;
            let count = 2 * m - 2;
            let mut eqs = Vec::with_capacity(count);
            let mut init = vec![Vec::new(); count];
            init[0] = vec![fde.ics[0].clone()];
            eqs.push(link(fde.alpha[0], 0));
            for k in 1..m - 1 {
                let odd = Exp::from_integer(k as i64) - fde.alpha[k - 1];
                if odd.is_zero() {
                    return Err(SplitError::DegenerateOrder { k });
                }
                eqs.push(link(odd, 2 * k - 1));
                eqs.push(link(fde.alpha[k] - Exp::from_integer(k as i64), 2 * k));
                init[2 * k - 1] = vec![Q::zero()];
                init[2 * k] = vec![fde.ics[k].clone()];
            }
            let last = fde.alpha[m - 1] - fde.alpha[m - 2];
            let rhs = closing_rhs(fde, |i| if i == 0 { 0 } else { 2 * i - 1 });
            eqs.push(Equation { order: last, lhs: count - 1, rhs });
            init[count - 1] = vec![Q::zero(); ceil_exp(last) as usize];
            SplitSystem::new(names(count), eqs, init)
        }
    }
}

/// Replaces link `equation_index` of order β by two links `γ` and `β − γ`.
/// Both pieces must stay in β's unit cell; the new intermediate unknown
/// starts at 0.
pub fn refine_split(sys: &SplitSystem, equation_index: usize, gamma: Exp) -> Result<SplitSystem, SplitError> {
    let eq = sys
        .equations
        .get(equation_index)
        .ok_or_else(|| SplitError::InvalidRefinement(format!("no equation {equation_index}")))?;
    let beta = eq.order;
    if !(gamma > Exp::zero() && gamma < beta) {
        return Err(SplitError::InvalidRefinement(format!("need 0 < {gamma} < {beta}")));
    }
    if ceil_exp(gamma) != ceil_exp(beta) {
        return Err(SplitError::InvalidRefinement(format!(
            "{gamma} and {beta} lie in different unit cells"
        )));
    }
    let lhs = eq.lhs;
    let new_idx = lhs + 1;
    let shift = |u: usize| if u >= new_idx { u + 1 } else { u };

    let mut unknowns = sys.unknowns.clone();
    let mut name = format!("w{}", unknowns.len());
    while unknowns.contains(&name) {
        name.push('\'');
    }
    unknowns.insert(new_idx, name);

    let mut equations: Vec<Equation> = sys
        .equations
        .iter()
        .map(|e| Equation {
            order: e.order,
            lhs: shift(e.lhs),
            rhs: e.rhs.iter().map(|t| Term { unknown: shift(t.unknown), coeff: t.coeff.clone() }).collect(),
        })
        .collect();
    let tail = Equation { order: beta - gamma, lhs: new_idx, rhs: equations[equation_index].rhs.clone() };
    equations[equation_index] = Equation { order: gamma, lhs, rhs: vec![Term { unknown: new_idx, coeff: Q::one() }] };
    equations.insert(equation_index + 1, tail);

    let mut init: Vec<Vec<Q>> = sys.init.iter().map(|v| v.0.clone()).collect();
    init.insert(new_idx, vec![Q::zero(); ceil_exp(beta - gamma) as usize]);
    SplitSystem::new(unknowns, equations, init)
}

/// `β_0 + … + β_{2k−2}`, the order reached at unknown `2k−1` of a
/// [`build_split_2m1`] system.
pub fn partial_order(sys: &SplitSystem, upto: usize) -> Exp {
    sys.equations[..=upto].iter().map(|e| e.order).sum()
}
