#![allow(dead_code, clippy::excessive_precision)]

use fracsplit::rational::{exp, q, Exp, Q};
use fracsplit::splitter::MultiTermFde;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(α_n, α_d, β_n, β_d, z_n, z_d, E_{α,β}(z))`, summed at 60 digits by
/// `oracle/gen_ml_oracle.py`.
pub const ML_ORACLE: [(i64, i64, i64, i64, i64, i64, f64); 20] = [
    (1, 2, 1, 1, 1, 1, 5.008980080762283466309825),
    (1, 2, 1, 1, -1, 1, 0.4275835761558070044107503),
    (1, 2, 1, 1, 5, 1, 144009798674.6610404105896),
    (1, 2, 1, 1, -3, 2, 0.3215854164543175023543226),
    (1, 4, 1, 1, 1, 1, 9.554107400722853645683113),
    (1, 4, 1, 1, -1, 2, 0.6376705192003933565495398),
    (1, 4, 3, 4, 1, 1, 10.3701563398211166267602),
    (1, 4, 3, 4, 2, 1, 71088883.8359105023048064),
    (3, 4, 1, 1, -2, 1, 0.2020784834129544543480273),
    (3, 4, 1, 1, 3, 1, 100.8618017751002803515241),
    (3, 4, 5, 4, -1, 1, 0.5130667610113423239659819),
    (1, 1, 1, 1, -5, 1, 0.006737946999085467096636048),
    (1, 1, 1, 1, 5, 1, 148.4131591025766034211156),
    (1, 1, 2, 1, 1, 1, 1.718281828459045235360287),
    (1, 1, 2, 1, -3, 1, 0.3167376438773786856735525),
    (3, 2, 1, 1, -5, 1, -0.300082050413130880802028),
    (3, 2, 1, 2, 4, 1, 13.17706687140009790297417),
    (2, 1, 1, 1, 1, 1, 1.543080634815243778477906),
    (2, 1, 1, 1, -5, 1, -0.6172728764571665940588713),
    (2, 1, 3, 2, -4, 1, 0.1983126616122291716143751),
];

type Ratio = (i64, i64);

/// `(α, β, γ, z, E^γ_{α,β}(z))` from the same script.
pub const PRABHAKAR_ORACLE: [(Ratio, Ratio, Ratio, f64, f64); 4] = [
    ((1, 1), (1, 1), (2, 1), 0.5, 2.473081906050192220272976),
    ((1, 2), (1, 1), (3, 2), 0.5, 2.633548100528118055575475),
    ((1, 2), (1, 1), (3, 2), -1.0, 0.2645989494895728398565667),
    ((1, 2), (1, 1), (3, 2), 2.0, 353.96273630213053581371),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform over the rationals `n/d` in `[lo, hi]` with `d ≤ max_den`.
pub fn rand_q(rng: &mut impl Rng, lo: i64, hi: i64, max_den: i64) -> Q {
    let d = rng.random_range(1..=max_den);
    q(rng.random_range(lo * d..=hi * d), d)
}

pub fn rand_nonzero_q(rng: &mut impl Rng, lo: i64, hi: i64, max_den: i64) -> Q {
    loop {
        let v = rand_q(rng, lo, hi, max_den);
        if v != Q::from_integer(0.into()) {
            return v;
        }
    }
}

/// Rational in `(k−1, k)`, or `(k−1, k]` when `closed`.
fn order_in_cell(rng: &mut impl Rng, k: i64, closed: bool) -> Exp {
    let d = rng.random_range(2..=12);
    let top = if closed { d } else { d - 1 };
    Exp::from_integer(k - 1) + exp(rng.random_range(1..=top), d)
}

/// `k−1 < α_k < k` for `k < m` and `m−1 < α_m ≤ m`; coefficients in
/// `[−3, 3]` with `a_m ≠ 0`; initial values in `[−2, 2]`.
pub fn random_cell_fde(rng: &mut impl Rng, m: usize) -> MultiTermFde {
    let alpha: Vec<Exp> = (1..=m as i64).map(|k| order_in_cell(rng, k, k == m as i64)).collect();
    let mut a: Vec<Q> = (0..m).map(|_| rand_q(rng, -3, 3, 6)).collect();
    a.push(rand_nonzero_q(rng, -3, 3, 6));
    let ics = (0..m).map(|_| rand_q(rng, -2, 2, 4)).collect();
    MultiTermFde::new(a, alpha, ics).unwrap()
}

/// `m` orders in `(p, p+1]` on a grid of 1/24.
pub fn random_same_cell_fde(rng: &mut impl Rng, m: usize, p: i64) -> MultiTermFde {
    let mut nums: Vec<i64> = Vec::new();
    while nums.len() < m {
        let n = rng.random_range(1..=24);
        if !nums.contains(&n) {
            nums.push(n);
        }
    }
    nums.sort();
    let alpha = nums.iter().map(|n| Exp::from_integer(p) + exp(*n, 24)).collect();
    let mut a: Vec<Q> = (0..m).map(|_| rand_q(rng, -3, 3, 6)).collect();
    a.push(rand_nonzero_q(rng, -3, 3, 6));
    let ics = (0..=p).map(|_| rand_q(rng, -2, 2, 4)).collect();
    MultiTermFde::new(a, alpha, ics).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}
