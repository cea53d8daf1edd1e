//! Time-domain solutions: a fractional Adams–Bashforth–Moulton stepper for
//! split systems and closed-form Mittag-Leffler evaluation of the unsplit
//! FDE, plus the combined symbolic/numeric equivalence verdict.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::mlf::{gamma, EvalControl};
use crate::rational::{ceil_exp, exp_f64, q_f64, Exp};
use crate::sdomain::{fde_laplace, inverse_laplace_to_ml, split_laplace, srational_equal, SDomainError};
use crate::splitter::{build_split_2m1, build_split_chain, MultiTermFde, SplitError, SplitSystem};

/// Smallest accepted number of steps.
pub const MIN_STEPS: usize = 8;

/// Default numeric tolerance for verdicts.
pub const DEFAULT_TOL: f64 = 1e-3;

/// Closed-form values are computed on at most this many grid points when
/// verifying; the stepper still runs on the full grid.
const CLOSED_FORM_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("N = {0} steps is too coarse; at least {MIN_STEPS} are required")]
    StepTooCoarse(usize),
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("t_end = {0} must be positive and finite")]
    BadHorizon(f64),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    SDomain(#[from] SDomainError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// `values[k][j]` is unknown `j` at `t[k]`.
    pub values: Vec<Vec<f64>>,
    pub names: Vec<String>,
    pub orders: Vec<Exp>,
    pub h: f64,
    pub steps: usize,
    pub method: &'static str,
}

impl Trajectory {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// The first unknown, `x`.
    pub fn x(&self) -> Vec<f64> {
        self.column(0)
    }
}

/// One scalar link `D^β y_i = Σ c·y_u` with `0 < β ≤ 1`.
#[derive(Debug, Clone)]
struct Link {
    beta: Exp,
    y0: f64,
    rhs: Vec<(usize, f64)>,
}

/// Rewrites every equation of order above 1 as a run of first-order links
/// ending in one fractional link: `D^β y = r` with `β = q−1+δ` becomes
/// `y' = u_1, …, u_{q−2}' = u_{q−1}, D^δ u_{q−1} = r`.
fn first_order_links(sys: &SplitSystem) -> Vec<Link> {
    let n = sys.unknowns().len();
    let mut links: Vec<Option<Link>> = vec![None; n];
    let mut extra = Vec::new();
    for eq in sys.equations() {
        let rhs: Vec<(usize, f64)> = eq.rhs.iter().map(|t| (t.unknown, q_f64(&t.coeff))).collect();
        let init = sys.init(eq.lhs);
        let q = ceil_exp(eq.order) as usize;
        if q <= 1 {
            links[eq.lhs] = Some(Link { beta: eq.order, y0: q_f64(&init[0]), rhs });
            continue;
        }
        let one = Exp::from_integer(1);
        let first_aux = n + extra.len();
        links[eq.lhs] = Some(Link { beta: one, y0: q_f64(&init[0]), rhs: vec![(first_aux, 1.0)] });
        for (k, c) in init.iter().enumerate().take(q).skip(1) {
            let here = first_aux + k - 1;
            let link = if k + 1 < q {
                Link { beta: one, y0: q_f64(c), rhs: vec![(here + 1, 1.0)] }
            } else {
                Link { beta: eq.order - Exp::from_integer(q as i64 - 1), y0: q_f64(c), rhs: rhs.clone() }
            };
            extra.push(link);
        }
    }
    links.into_iter().map(|l| l.expect("validated: one equation per unknown")).chain(extra).collect()
}

/// Predictor and corrector weights for one order on an `N`-step grid.
struct Weights {
    /// `(j+1)^β − j^β`
    pred: Vec<f64>,
    /// `(j+2)^{β+1} + j^{β+1} − 2(j+1)^{β+1}`
    corr: Vec<f64>,
    /// Corrector weight of `f_0` at step `n+1`: `n^{β+1} − (n−β)(n+1)^β`.
    corr0: Vec<f64>,
    pred_fac: f64,
    corr_fac: f64,
}

impl Weights {
    fn new(beta: f64, h: f64, steps: usize) -> Self {
        let pw = |j: usize, e: f64| (j as f64).powf(e);
        let pred = (0..=steps).map(|j| pw(j + 1, beta) - pw(j, beta)).collect();
        let corr = (0..=steps)
            .map(|j| pw(j + 2, beta + 1.0) + pw(j, beta + 1.0) - 2.0 * pw(j + 1, beta + 1.0))
            .collect();
        let corr0 = (0..=steps)
            .map(|n| pw(n, beta + 1.0) - (n as f64 - beta) * pw(n + 1, beta))
            .collect();
        Weights {
            pred,
            corr,
            corr0,
            pred_fac: h.powf(beta) / gamma(beta + 1.0),
            corr_fac: h.powf(beta) / gamma(beta + 2.0),
        }
    }
}

pub fn abm_solve(sys: &SplitSystem, t_end: f64, steps: usize) -> Result<Trajectory, SolveError> {
    abm_solve_with(sys, t_end, steps, Execution::default())
}

/// Predictor (fractional rectangle rule) and one corrector sweep
/// (fractional trapezoid rule) per step, full memory.
pub fn abm_solve_with(sys: &SplitSystem, t_end: f64, steps: usize, exec: Execution) -> Result<Trajectory, SolveError> {
    if steps < MIN_STEPS {
        return Err(SolveError::StepTooCoarse(steps));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SolveError::BadHorizon(t_end));
    }
    let links = first_order_links(sys);
    let h = t_end / steps as f64;
    let mut weights: HashMap<Exp, Weights> = HashMap::new();
    for l in &links {
        weights.entry(l.beta).or_insert_with(|| Weights::new(exp_f64(l.beta), h, steps));
    }
    let ws: Vec<&Weights> = links.iter().map(|l| &weights[&l.beta]).collect();
    let idx: Vec<usize> = (0..links.len()).collect();
    let apply = |i: usize, y: &dyn Fn(usize) -> f64| links[i].rhs.iter().map(|(u, c)| c * y(*u)).sum::<f64>();

    let mut y: Vec<Vec<f64>> = links.iter().map(|l| {
        let mut v = Vec::with_capacity(steps + 1);
        v.push(l.y0);
        v
    }).collect();
    let mut f: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| {
            let mut v = Vec::with_capacity(steps + 1);
            v.push(apply(i, &|u| links[u].y0));
            v
        })
        .collect();

    for n in 0..steps {
        let sums = exec::map(exec, &idx, |&i| {
            let w = ws[i];
            let (sp, sc) = exec::history_sums(exec, &w.pred, &w.corr, &f[i], 1, n);
            let pred = links[i].y0 + w.pred_fac * (sp + w.pred[n] * f[i][0]);
            (pred, w.corr0[n] * f[i][0] + sc)
        });
        let f_pred: Vec<f64> = idx.iter().map(|&i| apply(i, &|u| sums[u].0)).collect();
        for &i in &idx {
            let next = links[i].y0 + ws[i].corr_fac * (f_pred[i] + sums[i].1);
            y[i].push(next);
        }
        for &i in &idx {
            let fi = apply(i, &|u| y[u][n + 1]);
            f[i].push(fi);
        }
    }

    let count = sys.unknowns().len();
    Ok(Trajectory {
        t: (0..=steps).map(|k| k as f64 * h).collect(),
        values: (0..=steps).map(|k| (0..count).map(|j| y[j][k]).collect()).collect(),
        names: sys.unknowns().to_vec(),
        orders: sys.orders(),
        h,
        steps,
        method: "abm-pc1",
    })
}

/// A valid split for time stepping the FDE itself: the same-cell chain when
/// the orders share a unit cell, otherwise the `2m−1` split.
pub fn stepping_split(fde: &MultiTermFde) -> Result<SplitSystem, SolveError> {
    if fde.common_cell().is_some() {
        return Ok(build_split_chain(fde)?);
    }
    Ok(build_split_2m1(fde)?)
}

pub fn abm_solve_fde(fde: &MultiTermFde, t_end: f64, steps: usize, exec: Execution) -> Result<Trajectory, SolveError> {
    abm_solve_with(&stepping_split(fde)?, t_end, steps, exec)
}

/// `x(t)` from the Mittag-Leffler decomposition of `X(s)`.
pub fn closed_form_solve(fde: &MultiTermFde, t_points: &[f64]) -> Result<Vec<f64>, SolveError> {
    closed_form_solve_with(fde, t_points, &EvalControl::default(), Execution::default())
}

pub fn closed_form_solve_with(
    fde: &MultiTermFde,
    t_points: &[f64],
    ctrl: &EvalControl,
    exec: Execution,
) -> Result<Vec<f64>, SolveError> {
    let sum = inverse_laplace_to_ml(&fde_laplace(fde))?;
    Ok(sum.eval_many(t_points, ctrl, exec)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::NotEquivalent => "not_equivalent",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub symbolic_equal: bool,
    pub numeric_max_rel_gap: f64,
    pub t_end: f64,
    pub steps: usize,
    pub tol: f64,
    pub verdict: Verdict,
    pub fde_transform: String,
    pub split_transform: String,
}

pub fn verdict(symbolic_equal: bool, gap: f64, tol: f64) -> Verdict {
    match (symbolic_equal, gap <= tol) {
        (true, true) => Verdict::Equivalent,
        (false, false) => Verdict::NotEquivalent,
        _ => Verdict::Inconclusive,
    }
}

/// `max |x_abm − x_cf| / (1 + |x_cf|)` over (a subsample of) the grid.
pub fn max_shifted_gap(abm: &[f64], t: &[f64], closed: &[f64], stride: usize) -> f64 {
    t.iter()
        .enumerate()
        .step_by(stride)
        .zip(closed)
        .map(|((k, _), c)| (abm[k] - c).abs() / (1.0 + c.abs()))
        .fold(0.0, f64::max)
}

pub fn verify_equivalence(
    fde: &MultiTermFde,
    sys: &SplitSystem,
    t_end: f64,
    steps: usize,
    tol: f64,
) -> Result<EquivalenceReport, SolveError> {
    verify_equivalence_with(fde, sys, t_end, steps, tol, Execution::default())
}

pub fn verify_equivalence_with(
    fde: &MultiTermFde,
    sys: &SplitSystem,
    t_end: f64,
    steps: usize,
    tol: f64,
    exec: Execution,
) -> Result<EquivalenceReport, SolveError> {
    let x = fde_laplace(fde);
    let y = split_laplace(sys)?;
    let symbolic_equal = srational_equal(&x, &y);
    let traj = abm_solve_with(sys, t_end, steps, exec)?;
    let stride = steps.div_ceil(CLOSED_FORM_SAMPLES).max(1);
    let ts: Vec<f64> = traj.t.iter().copied().step_by(stride).collect();
    let closed = closed_form_solve_with(fde, &ts, &EvalControl::default(), exec)?;
    let gap = max_shifted_gap(&traj.x(), &traj.t, &closed, stride);
    Ok(EquivalenceReport {
        symbolic_equal,
        numeric_max_rel_gap: gap,
        t_end,
        steps,
        tol,
        verdict: verdict(symbolic_equal, gap, tol),
        fde_transform: x.to_string(),
        split_transform: y.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlf::ml1;
    use crate::rational::{exp, q_int};
    use crate::splitter::{build_naive_split, NaiveVariant};

    fn one_term(lambda: i64, alpha: Exp) -> MultiTermFde {
        MultiTermFde::new(vec![q_int(-lambda), q_int(1)], vec![alpha], vec![q_int(1)]).unwrap()
    }

    #[test]
    fn classical_decay() {
        let sys = build_split_chain(&one_term(-1, exp(1, 1))).unwrap();
        let traj = abm_solve(&sys, 1.0, 100).unwrap();
        let end = *traj.x().last().unwrap();
        assert!((end - (-1.0f64).exp()).abs() < 5e-3);
        let fine = abm_solve(&sys, 1.0, 400).unwrap();
        assert!((fine.x().last().unwrap() - (-1.0f64).exp()).abs() < (end - (-1.0f64).exp()).abs());
    }

    #[test]
    fn half_order_relaxation_matches_ml() {
        let sys = build_split_chain(&one_term(-1, exp(1, 2))).unwrap();
        let traj = abm_solve(&sys, 1.0, 2000).unwrap();
        let exact = ml1(exp(1, 2), -1.0, &EvalControl::default()).unwrap();
        assert!((traj.x().last().unwrap() - exact).abs() < 1e-3);
    }

    #[test]
    fn one_term_split_tracks_unsplit() {
        let fde = one_term(-1, exp(3, 5));
        // the largest gap sits in the first steps, where x ~ 1 − c·t^{3/5}
        let whole = abm_solve(&build_split_chain(&fde).unwrap(), 1.0, 8000).unwrap();
        let split = abm_solve(&build_split_2m1(&fde).unwrap(), 1.0, 8000).unwrap();
        let gap = whole.x().iter().zip(split.x()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-3, "{gap}");
    }

    #[test]
    fn higher_order_head_is_normalized() {
        // x'' = −x via a single order-2 equation
        let fde = MultiTermFde::new(vec![q_int(1), q_int(1)], vec![exp(2, 1)], vec![q_int(1), q_int(0)]).unwrap();
        let traj = abm_solve(&build_split_chain(&fde).unwrap(), 1.0, 400).unwrap();
        assert_eq!(traj.values[0].len(), 1);
        assert!((traj.x().last().unwrap() - 1f64.cos()).abs() < 1e-4);
    }

    #[test]
    fn rejects_coarse_grids() {
        let sys = build_split_chain(&one_term(-1, exp(1, 2))).unwrap();
        assert_eq!(abm_solve(&sys, 1.0, 7), Err(SolveError::StepTooCoarse(7)));
        assert!(abm_solve(&sys, 1.0, 8).is_ok());
        assert!(abm_solve(&sys, 0.0, 8).is_err());
    }

    #[test]
    fn closed_form_at_zero_is_x0() {
        let fde = MultiTermFde::new(vec![q_int(1), q_int(1), q_int(1)], vec![exp(1, 2), exp(3, 2)], vec![q_int(2), q_int(1)])
            .unwrap();
        let v = closed_form_solve(&fde, &[0.0]).unwrap();
        assert_eq!(v, vec![2.0]);
    }

    #[test]
    fn modes_give_identical_trajectories() {
        let fde = MultiTermFde::new(vec![q_int(1), q_int(1), q_int(1)], vec![exp(1, 2), exp(3, 2)], vec![q_int(1), q_int(1)])
            .unwrap();
        let sys = build_split_2m1(&fde).unwrap();
        let a = abm_solve_with(&sys, 1.0, 3000, Execution::Sequential).unwrap();
        let b = abm_solve_with(&sys, 1.0, 3000, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn verdicts_for_the_two_term_splits() {
        let fde = MultiTermFde::new(vec![q_int(1), q_int(1), q_int(1)], vec![exp(7, 10), exp(6, 5)], vec![q_int(1), q_int(1)])
            .unwrap();
        let proper = verify_equivalence(&fde, &build_split_2m1(&fde).unwrap(), 1.0, 1000, DEFAULT_TOL).unwrap();
        assert_eq!(proper.verdict, Verdict::Equivalent, "{proper:?}");
        let naive = build_naive_split(&fde, NaiveVariant::TwoTermPair).unwrap();
        let report = verify_equivalence(&fde, &naive, 1.0, 1000, DEFAULT_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::NotEquivalent, "{report:?}");
    }

    #[test]
    fn verdict_table() {
        assert_eq!(verdict(true, 0.0, 1e-3), Verdict::Equivalent);
        assert_eq!(verdict(false, 1.0, 1e-3), Verdict::NotEquivalent);
        assert_eq!(verdict(true, 1.0, 1e-3), Verdict::Inconclusive);
        assert_eq!(verdict(false, 0.0, 1e-3), Verdict::Inconclusive);
    }
}
