//! Brute-force ground truth for small instances.
//!
//! Everything here walks the full space of non-adaptive strategies, sharing
//! work between strategies with a common prefix but otherwise making no use
//! of reservation values.

use std::collections::HashMap;

use serde::Serialize;

use crate::agent::{principal_utility, NonAdaptiveStrategy};
use crate::error::{Error, Result};
use crate::general::payment_bound;
use crate::model::{Contract, Instance};
use crate::rational::Rational;

/// Default cap on the number of strategies an oracle may enumerate.
pub const DEFAULT_ORACLE_BUDGET: u128 = 1_000_000;

/// `n!·m!·(m+1)^n`, saturating.
pub fn strategy_count(n: usize, m: usize) -> u128 {
    let fact = |k: usize| (1..=k as u128).try_fold(1u128, |a, x| a.checked_mul(x));
    let pow = (0..n).try_fold(1u128, |a, _| a.checked_mul(m as u128 + 1));
    fact(n)
        .and_then(|a| fact(m).and_then(|b| a.checked_mul(b)))
        .and_then(|a| pow.and_then(|p| a.checked_mul(p)))
        .unwrap_or(u128::MAX)
}

fn check_budget(n: usize, m: usize, budget: u128) -> Result<()> {
    let needed = strategy_count(n, m);
    if needed > budget {
        return Err(Error::Capacity { what: "non-adaptive strategies", needed, budget });
    }
    Ok(())
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..k).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Every well-formed `(σ, ρ, τ)` for `n` actions and `m` outcomes, once each.
pub fn enumerate_nonadaptive(n: usize, m: usize, budget: u128) -> Result<impl Iterator<Item = NonAdaptiveStrategy>> {
    check_budget(n, m, budget)?;
    let sigmas = permutations(n);
    let rhos = permutations(m);
    let taus = (0..n).fold(vec![Vec::new()], |acc: Vec<Vec<Option<usize>>>, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..=m).map(move |k| {
                    let mut v = prefix.clone();
                    v.push((k < m).then_some(k));
                    v
                })
            })
            .collect()
    });
    Ok(rhos.into_iter().flat_map(move |rho| {
        let taus = taus.clone();
        sigmas.clone().into_iter().flat_map(move |sigma| {
            let rho = rho.clone();
            taus.clone().into_iter().map(move |tau| NonAdaptiveStrategy { sigma: sigma.clone(), rho: rho.clone(), tau })
        })
    }))
}

/// Depth-first walk over all strategies. At each leaf the visitor receives
/// the strategy, the final outcome distribution and the expected cost.
struct Walker<'a, F> {
    inst: &'a Instance,
    strategy: NonAdaptiveStrategy,
    used: Vec<bool>,
    visit: F,
}

impl<F: FnMut(&NonAdaptiveStrategy, &[Rational], &Rational)> Walker<'_, F> {
    fn run(inst: &Instance, visit: F) {
        let (n, m) = (inst.n(), inst.m());
        let mut w = Walker {
            inst,
            strategy: NonAdaptiveStrategy { sigma: Vec::with_capacity(n), rho: Vec::new(), tau: vec![None; n] },
            used: vec![false; n],
            visit,
        };
        let mut start = vec![Rational::zero(); m];
        start[0] = Rational::one();
        for rho in permutations(m) {
            w.strategy.rho = rho;
            w.descend(&start, &vec![Rational::zero(); m], &Rational::zero());
        }
    }

    fn descend(&mut self, active: &[Rational], halted: &[Rational], cost: &Rational) {
        let (n, m) = (self.inst.n(), self.inst.m());
        if self.strategy.sigma.len() == n {
            let fin: Vec<Rational> = halted.iter().zip(active).map(|(h, a)| h + a).collect();
            (self.visit)(&self.strategy, &fin, cost);
            return;
        }
        for a in 0..n {
            if self.used[a] {
                continue;
            }
            self.used[a] = true;
            self.strategy.sigma.push(a);
            for choice in 0..=m {
                let tau = (choice < m).then_some(choice);
                self.strategy.tau[a] = tau;
                let mut act = active.to_vec();
                let mut halt = halted.to_vec();
                if let Some(k) = tau {
                    for j in 0..m {
                        if self.strategy.rho[j] >= self.strategy.rho[k] && !act[j].is_zero() {
                            let w = std::mem::take(&mut act[j]);
                            halt[j] += w;
                        }
                    }
                }
                let p: Rational = act.iter().sum();
                if p.is_zero() {
                    self.descend(&act, &halt, cost);
                    continue;
                }
                let row = &self.inst.probs()[a];
                let mut next = vec![Rational::zero(); m];
                for (j, w) in act.iter().enumerate().filter(|(_, w)| !w.is_zero()) {
                    for (k, q) in row.iter().enumerate().filter(|(_, q)| !q.is_zero()) {
                        let to = if self.strategy.rho[k] > self.strategy.rho[j] { k } else { j };
                        next[to] += w * q;
                    }
                }
                let cost = cost + &p * self.inst.cost(a);
                self.descend(&next, &halt, &cost);
            }
            self.strategy.sigma.pop();
            self.used[a] = false;
        }
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, _)| !x.is_zero()).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub agent_utility: Rational,
    /// Best principal utility among the agent's optimal strategies.
    pub principal_utility: Rational,
    pub maximizers: Vec<NonAdaptiveStrategy>,
}

/// Exhaustive agent best response to `t`.
pub fn oracle_best_response(inst: &Instance, t: &Contract, budget: u128) -> Result<OracleReport> {
    t.check_against(inst)?;
    check_budget(inst.n(), inst.m(), budget)?;
    let value: Vec<Rational> = inst.rewards().iter().zip(&t.payments).map(|(r, p)| r - p).collect();
    let mut best: Option<(Rational, Rational)> = None;
    let mut maximizers = Vec::new();
    Walker::run(inst, |s, mass, cost| {
        let ua = dot(mass, &t.payments) - cost;
        let up = dot(mass, &value);
        match &mut best {
            Some((a, _)) if ua < *a => {}
            Some((a, p)) if ua == *a => {
                if up > *p {
                    *p = up;
                }
                maximizers.push(s.clone());
            }
            _ => {
                best = Some((ua, up));
                maximizers.clear();
                maximizers.push(s.clone());
            }
        }
    });
    let (agent_utility, principal_utility) = best.expect("at least one strategy");
    Ok(OracleReport { agent_utility, principal_utility, maximizers })
}

/// Exhaustive optimal linear contract: `(α, principal utility)`.
///
/// Each strategy contributes a point (expected reward R, expected cost C);
/// under `α` the agent maximizes `αR − C`. The candidate `α` are the
/// cost/reward ratios between strategies adjacent on the lower convex hull of
/// those points, which are exactly the ratios at which the agent's set of
/// maximizers changes.
pub fn oracle_best_linear(inst: &Instance, budget: u128) -> Result<(Rational, Rational)> {
    check_budget(inst.n(), inst.m(), budget)?;
    let mut cheapest: HashMap<Rational, Rational> = HashMap::new();
    Walker::run(inst, |_, mass, cost| {
        let reward = dot(mass, inst.rewards());
        cheapest
            .entry(reward)
            .and_modify(|c| {
                if cost < c {
                    *c = cost.clone();
                }
            })
            .or_insert_with(|| cost.clone());
    });
    let mut points: Vec<(Rational, Rational)> = cheapest.into_iter().collect();
    points.sort();

    let mut hull: Vec<(Rational, Rational)> = Vec::new();
    for p in &points {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // Drop b unless it lies strictly below segment a–p.
            let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            if cross.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(p.clone());
    }
    let (zero, one) = (Rational::zero(), Rational::one());
    let mut alphas = vec![zero.clone(), one.clone()];
    for w in hull.windows(2) {
        let alpha = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
        if alpha >= zero && alpha <= one {
            alphas.push(alpha);
        }
    }
    alphas.sort();
    alphas.dedup();

    let mut best: Option<(Rational, Rational)> = None;
    for alpha in alphas {
        let mut top: Option<(Rational, &Rational)> = None;
        for (r, c) in &points {
            let ua = &alpha * r - c;
            let better = match &top {
                None => true,
                Some((u, rr)) => ua > *u || (ua == *u && r > *rr),
            };
            if better {
                top = Some((ua, r));
            }
        }
        let (_, reward) = top.expect("nonempty");
        let up = (&one - &alpha) * reward;
        if best.as_ref().is_none_or(|(_, u)| up > *u) {
            best = Some((alpha, up));
        }
    }
    Ok(best.expect("nonempty"))
}

/// Best contract on the grid `{0, step, 2·step, …}^m` truncated at the
/// payment bound. A zero bound (no reward anywhere) leaves only the origin.
pub fn grid_search_general(inst: &Instance, step: &Rational) -> Result<(Contract, Rational)> {
    let bound = payment_bound(inst);
    if !step.is_positive() && !bound.is_zero() {
        return Err(Error::invalid("grid step must be positive"));
    }
    let mut ticks = vec![Rational::zero()];
    while !bound.is_zero() {
        let next = ticks.last().unwrap() + step;
        if next > bound {
            break;
        }
        ticks.push(next);
    }
    let m = inst.m();
    let mut idx = vec![0usize; m];
    let mut best: Option<(Contract, Rational)> = None;
    loop {
        let t = Contract { payments: idx.iter().map(|&k| ticks[k].clone()).collect() };
        let (u, _) = principal_utility(inst, &t);
        if best.as_ref().is_none_or(|(_, b)| u > *b) {
            best = Some((t, u));
        }
        // Lexicographic odometer, last coordinate fastest.
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(best.expect("nonempty grid"));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < ticks.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{agent_utility, principal_utility_for};
    use crate::model::fixtures::i1;
    use crate::rational::rat;

    fn contract(p: &[(i64, i64)]) -> Contract {
        Contract::new(p.iter().map(|&(a, b)| rat(a, b)).collect()).unwrap()
    }

    #[test]
    fn strategy_counts() {
        assert_eq!(enumerate_nonadaptive(1, 2, 100).unwrap().count(), 6);
        assert_eq!(enumerate_nonadaptive(2, 2, 100).unwrap().count(), 36);
        let empty: Vec<_> = enumerate_nonadaptive(0, 2, 100).unwrap().collect();
        assert_eq!(empty.len(), 2);
        assert!(empty.iter().all(|s| s.sigma.is_empty()));
        assert_eq!(strategy_count(4, 4), 360_000);
        assert!(matches!(enumerate_nonadaptive(4, 4, 1000), Err(Error::Capacity { .. })));
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        let all: Vec<_> = enumerate_nonadaptive(2, 3, 1000).unwrap().collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), strategy_count(2, 3) as usize);
        assert_eq!(set.len(), all.len());
    }

    #[test]
    fn walker_matches_direct_evaluation() {
        let inst = i1();
        let t = contract(&[(0, 1), (1, 5)]);
        let report = oracle_best_response(&inst, &t, 100).unwrap();
        for s in enumerate_nonadaptive(1, 2, 100).unwrap() {
            let ua = agent_utility(&inst, &t, &s);
            assert_eq!(report.maximizers.contains(&s), ua == report.agent_utility);
        }
    }

    #[test]
    fn indifferent_agent_favours_principal() {
        let report = oracle_best_response(&i1(), &contract(&[(0, 1), (1, 5)]), 100).unwrap();
        assert_eq!(report.agent_utility, rat(0, 1));
        assert_eq!(report.principal_utility, rat(2, 5));
        let values: std::collections::BTreeSet<_> = report
            .maximizers
            .iter()
            .map(|s| principal_utility_for(&i1(), &contract(&[(0, 1), (1, 5)]), s))
            .collect();
        assert_eq!(values.into_iter().collect::<Vec<_>>(), vec![rat(0, 1), rat(2, 5)]);
    }

    #[test]
    fn zero_contract_and_strict_preference() {
        let zero = oracle_best_response(&i1(), &contract(&[(0, 1), (0, 1)]), 100).unwrap();
        assert_eq!((zero.agent_utility, zero.principal_utility), (rat(0, 1), rat(0, 1)));
        let act = oracle_best_response(&i1(), &contract(&[(0, 1), (2, 5)]), 100).unwrap();
        assert_eq!(act.agent_utility, rat(1, 10));
        assert_eq!(act.principal_utility, rat(3, 10));
    }

    #[test]
    fn best_linear_small_cases() {
        assert_eq!(oracle_best_linear(&i1(), 100).unwrap(), (rat(1, 5), rat(2, 5)));
        let third = rat(1, 3);
        let three = Instance::new(
            vec![rat(0, 1), rat(1, 1), rat(2, 1)],
            vec![rat(0, 1), rat(1, 6)],
            vec![vec![third.clone(); 3], vec![third; 3]],
        )
        .unwrap();
        assert_eq!(oracle_best_linear(&three, 1000).unwrap(), (rat(1, 6), rat(10, 9)));
    }

    #[test]
    fn free_work_needs_no_payment() {
        let inst = Instance::new(
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(0, 1), rat(0, 1)],
            vec![vec![rat(1, 2), rat(1, 2)], vec![rat(2, 3), rat(1, 3)]],
        )
        .unwrap();
        // Both actions taken: success with probability 1 − 1/2·2/3.
        assert_eq!(oracle_best_linear(&inst, 1000).unwrap(), (rat(0, 1), rat(2, 3)));
    }

    #[test]
    fn grid_search_on_two_outcomes() {
        let (t, u) = grid_search_general(&i1(), &rat(1, 10)).unwrap();
        assert_eq!(u, rat(2, 5));
        assert_eq!(t, contract(&[(0, 1), (1, 5)]));
        let (_, corners) = grid_search_general(&i1(), &rat(2, 1)).unwrap();
        assert_eq!(corners, rat(0, 1));
    }
}
