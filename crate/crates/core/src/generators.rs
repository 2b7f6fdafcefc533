//! Constructors for the named instance families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::rational::{rat, Rational};

fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn pow2(e: u32) -> Rational {
    r(2).pow(e)
}

/// Parameters of the reduction from Partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionParams {
    pub a: Vec<Rational>,
    pub epsilon: Rational,
    /// Rational approximation of the root of [`partition_quadratic`] in (0, 1).
    pub q: Rational,
    pub c: Rational,
    /// `|quadratic(q)|`.
    pub residual: Rational,
    /// The root lies strictly between these: the quadratic is positive at
    /// `lower` and negative at `upper`.
    pub lower: Rational,
    pub upper: Rational,
}

pub const PARTITION_RESIDUAL_BOUND: (i64, u32) = (1, 18);

/// `q²(−10+ε) + q(−2 − 4ε/5) + 9/10 − 99ε/100`.
pub fn partition_quadratic(eps: &Rational, q: &Rational) -> Rational {
    q * q * (eps - r(10)) + q * (-r(2) - rat(4, 5) * eps) + rat(9, 10) - rat(99, 100) * eps
}

fn residual_bound() -> Rational {
    Rational::one() / r(10).pow(PARTITION_RESIDUAL_BOUND.1)
}

/// Bisect for the root in (0, 1), then take the simplest rational inside the
/// bracket once its residual is small enough.
fn partition_root(eps: &Rational) -> (Rational, Rational, Rational, Rational) {
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    debug_assert!(partition_quadratic(eps, &lo).is_positive());
    debug_assert!(partition_quadratic(eps, &hi).is_negative());
    let bound = residual_bound();
    let half = rat(1, 2);
    loop {
        let mid = (&lo + &hi) * &half;
        let v = partition_quadratic(eps, &mid);
        if v.is_zero() {
            return (mid.clone(), Rational::zero(), lo, hi);
        }
        if v.is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
        let q = Rational::simplest_between(&lo, &hi);
        let res = partition_quadratic(eps, &q).abs();
        if res <= bound {
            return (q, res, lo, hi);
        }
    }
}

pub fn partition_params(a: &[Rational]) -> Result<PartitionParams> {
    if a.is_empty() {
        return Err(Error::invalid("partition needs at least one number"));
    }
    if a.iter().any(|x| !x.is_positive() || x >= &Rational::one()) {
        return Err(Error::invalid("partition numbers must lie in (0, 1)"));
    }
    let total: Rational = a.iter().sum();
    if total != rat(1, 5) {
        return Err(Error::invalid(format!("partition numbers sum to {total}, expected 1/5")));
    }
    let epsilon = a.iter().min().unwrap() / r(100);
    let (q, residual, lower, upper) = partition_root(&epsilon);
    let c = &epsilon * &q / r(10);
    Ok(PartitionParams { a: a.to_vec(), epsilon, q, c, residual, lower, upper })
}

/// Three actions over `k + 2` outcomes: the zero outcome, `k` worthless
/// middle outcomes, and one outcome of reward 1.
pub fn gen_partition_reduction(a: &[Rational]) -> Result<(Instance, PartitionParams)> {
    let params = partition_params(a)?;
    let k = a.len();
    let zero = Rational::zero;
    let mut rewards = vec![zero(); k + 2];
    rewards[k + 1] = Rational::one();

    let mut free_good = vec![zero(); k + 2];
    free_good[0] = params.epsilon.clone();
    free_good[k + 1] = Rational::one() - &params.epsilon;

    let mut free_spread = vec![zero(); k + 2];
    free_spread[0] = rat(4, 5);
    free_spread[1..=k].clone_from_slice(a);

    let mut costly = free_spread.clone();
    costly[0] = rat(4, 5) - &params.q;
    costly[k + 1] = params.q.clone();

    let inst = Instance::new(
        rewards,
        vec![zero(), zero(), params.c.clone()],
        vec![free_good, free_spread, costly],
    )?;
    Ok((inst, params))
}

/// Pays `c/(q + Σ_S a)` on the middle outcomes in `subset` (0-based into `a`)
/// and on the good outcome.
pub fn equal_spread_contract(params: &PartitionParams, subset: &[usize]) -> Contract {
    let k = params.a.len();
    let x: Rational = subset.iter().map(|&j| &params.a[j]).sum();
    let pay = &params.c / (&params.q + x);
    let mut payments = vec![Rational::zero(); k + 2];
    for &j in subset {
        payments[j + 1] = pay.clone();
    }
    payments[k + 1] = pay;
    Contract { payments }
}

/// Closed-form principal utility of an equal-spread contract whose subset
/// has total `x`.
pub fn equal_spread_utility(params: &PartitionParams, x: &Rational) -> Rational {
    let one = Rational::one();
    let eps = &params.epsilon;
    let q = &params.q;
    let rest = &one - x;
    &one - eps + eps * &rest * q - (&one - eps * &rest * (&rest - q)) * (&params.c / (x + q))
}

/// Rewards (0, 1, 1). Action `i` (1-based) costs `(2^i − i)/2^{n+1}`, pays
/// off on the middle outcome with that same probability and on the last
/// outcome with probability `i/2^{n+1}`.
pub fn gen_gap_instance(n: u32) -> Result<Instance> {
    if n == 0 {
        return Err(Error::invalid("gap instance needs n ≥ 1"));
    }
    let scale = pow2(n + 1);
    let mut costs = Vec::new();
    let mut probs = Vec::new();
    for i in 1..=n {
        let c = (pow2(i) - r(i as i64)) / &scale;
        let top = r(i as i64) / &scale;
        let none = Rational::one() - pow2(i) / &scale;
        probs.push(vec![none, c.clone(), top]);
        costs.push(c);
    }
    Instance::new(vec![r(0), r(1), r(1)], costs, probs)
}

/// `(0, 1, eps)`: full reward on the middle outcome, `eps` on the last.
pub fn gap_general_contract(eps: &Rational) -> Contract {
    Contract { payments: vec![Rational::zero(), Rational::one(), eps.clone()] }
}

/// A free action and an action of cost `1/(2m)`, both uniform over outcomes
/// with rewards `0, 1, …, m−1`.
pub fn gen_critpoints_instance(m: usize) -> Result<Instance> {
    if m < 2 {
        return Err(Error::invalid("critical-point instance needs m ≥ 2"));
    }
    let p = rat(1, m as i64);
    Instance::new(
        (0..m as i64).map(r).collect(),
        vec![Rational::zero(), rat(1, 2 * m as i64)],
        vec![vec![p.clone(); m], vec![p; m]],
    )
}

/// An instance with many distinct best responses, and the contracts that
/// realize them.
#[derive(Debug, Clone)]
pub struct SuperpolyInstance {
    pub instance: Instance,
    pub ell: usize,
    /// `(j, i)` (1-based, as outcome and copy index) for real actions;
    /// `None` for padding.
    pub labels: Vec<Option<(usize, usize)>>,
}

impl SuperpolyInstance {
    fn r(&self, j: usize) -> &Rational {
        self.instance.reward(j - 1)
    }

    /// Pays `(2 + 1/(2ℓ))·r(j)·v[j−2]` on outcome `j ≥ 2`. Exactly the
    /// copies `(j, i)` with `i ≤ v[j−2]` are worth taking.
    pub fn t_v(&self, v: &[usize]) -> Result<Contract> {
        let m = self.instance.m();
        if v.len() != m - 1 || v.iter().any(|&x| x == 0 || x > self.ell) {
            return Err(Error::invalid(format!("v must have {} entries in 1..={}", m - 1, self.ell)));
        }
        let k = r(2) + rat(1, 2 * self.ell as i64);
        let mut payments = vec![Rational::zero()];
        for j in 2..=m {
            payments.push(&k * self.r(j) * r(v[j - 2] as i64));
        }
        Ok(Contract { payments })
    }

    /// Pays `ρ⁻¹(j) + 2r(j)` on outcome `j ≥ 2`, where `rho[k]` (0-based `k`)
    /// is the outcome placed at position `k + 1`. The copies `(j, 1)` are then
    /// taken in order of increasing position.
    pub fn t_rho(&self, rho: &[usize]) -> Result<Contract> {
        let m = self.instance.m();
        let mut seen = vec![false; m + 1];
        if rho.len() != m - 1 || rho.iter().any(|&j| j < 2 || j > m || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::invalid(format!("rho must be a bijection onto 2..={m}")));
        }
        let mut payments = vec![Rational::zero(); m];
        for (pos, &j) in rho.iter().enumerate() {
            payments[j - 1] = r(pos as i64 + 1) + r(2) * self.r(j);
        }
        Ok(Contract { payments })
    }
}

/// `ℓ = ⌊n/(m−1)⌋` copies of an action for each outcome `j ≥ 2`, copy `i`
/// costing `i·r(j)` with `r(j) = ℓ^j`; the remaining `n mod (m−1)` actions are
/// padding that never pays off.
pub fn gen_superpoly_instance(n: usize, m: usize) -> Result<SuperpolyInstance> {
    if m < 2 {
        return Err(Error::invalid("superpolynomial family needs m ≥ 2"));
    }
    let ell = n / (m - 1);
    if ell == 0 {
        return Err(Error::invalid(format!("need n ≥ m − 1 = {}", m - 1)));
    }
    let el = r(ell as i64);
    let mut rewards = vec![Rational::zero()];
    rewards.extend((2..=m).map(|j| el.pow(j as u32)));
    let half = rat(1, 2);
    let mut costs = Vec::new();
    let mut probs = Vec::new();
    let mut labels = Vec::new();
    for j in 2..=m {
        for i in 1..=ell {
            costs.push(r(i as i64) * &rewards[j - 1]);
            let mut row = vec![Rational::zero(); m];
            row[0] = half.clone();
            row[j - 1] = half.clone();
            probs.push(row);
            labels.push(Some((j, i)));
        }
    }
    for _ in ell * (m - 1)..n {
        costs.push(Rational::one());
        let mut row = vec![Rational::zero(); m];
        row[0] = Rational::one();
        probs.push(row);
        labels.push(None);
    }
    Ok(SuperpolyInstance { instance: Instance::new(rewards, costs, probs)?, ell, labels })
}

/// Denominator of the probability grid used by [`gen_random_instance`].
pub const RANDOM_GRID: i64 = 12;

/// A reproducible small instance: integer rewards in `0..=5` (ties allowed),
/// costs `k/20` for `k` in `0..=8`, probabilities on a grid of twelfths.
pub fn gen_random_instance(n: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("random instance needs n, m ≥ 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rewards: Vec<i64> = (1..m).map(|_| rng.gen_range(0..=5)).collect();
    rewards.push(0);
    rewards.sort();
    let costs = (0..n).map(|_| rat(rng.gen_range(0..=8), 20)).collect();
    let probs = (0..n)
        .map(|_| {
            let mut cuts: Vec<i64> = (1..m).map(|_| rng.gen_range(0..=RANDOM_GRID)).collect();
            cuts.push(0);
            cuts.push(RANDOM_GRID);
            cuts.sort();
            cuts.windows(2).map(|w| rat(w[1] - w[0], RANDOM_GRID)).collect()
        })
        .collect();
    Instance::new(rewards.into_iter().map(r).collect(), costs, probs)
}

/// A random contract on the grid `k/4`, `k` in `0..=4·max_reward`.
pub fn gen_random_contract(inst: &Instance, rng: &mut impl Rng) -> Contract {
    let top = inst.reward(inst.m() - 1).floor();
    let top: i64 = top.try_into().unwrap_or(4).max(1);
    Contract { payments: (0..inst.m()).map(|_| rat(rng.gen_range(0..=4 * top), 4)).collect() }
}
