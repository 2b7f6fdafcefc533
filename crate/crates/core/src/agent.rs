//! Agent best response in the independent model.
//!
//! The agent's problem is a Pandora's box search: each action is a box whose
//! prize is the payment of the revealed outcome. An optimal search opens
//! boxes by decreasing reservation value and stops as soon as the best
//! revealed payment beats the next reservation value.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Contract, Instance};
use crate::rational::{ExtendedRational, Rational};

/// A fixed search plan. `sigma` is the action order, `rho[j]` the preference
/// rank of outcome `j` (higher is preferred) and `tau[i]` the halting
/// threshold of action `i`: before taking action `i` the agent stops if the
/// preferred revealed outcome ranks at least `rho[tau[i]]`. `None` never stops.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonAdaptiveStrategy {
    pub sigma: Vec<usize>,
    pub rho: Vec<usize>,
    pub tau: Vec<Option<usize>>,
}

impl NonAdaptiveStrategy {
    /// The strategy that never takes an action.
    pub fn halt_immediately(n: usize, m: usize) -> Self {
        NonAdaptiveStrategy {
            sigma: (0..n).collect(),
            rho: (0..m).collect(),
            tau: vec![Some(0); n],
        }
    }

    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        let is_perm = |v: &[usize], k: usize| {
            let mut seen = vec![false; k];
            v.len() == k && v.iter().all(|&x| x < k && !std::mem::replace(&mut seen[x], true))
        };
        if !is_perm(&self.sigma, n) {
            return Err(Error::invalid("sigma is not a permutation of the actions"));
        }
        if !is_perm(&self.rho, m) {
            return Err(Error::invalid("rho is not a permutation of the outcomes"));
        }
        if self.tau.len() != n || self.tau.iter().flatten().any(|&j| j >= m) {
            return Err(Error::invalid("tau must name one outcome (or null) per action"));
        }
        Ok(())
    }

    /// Whether the agent stops before action `i` when `pref` is the preferred
    /// revealed outcome.
    #[inline]
    pub fn halts_before(&self, i: usize, pref: usize) -> bool {
        match self.tau[i] {
            Some(k) => self.rho[pref] >= self.rho[k],
            None => false,
        }
    }

    fn tie_key(&self) -> (&[usize], Vec<usize>, &[usize]) {
        let m = self.rho.len();
        (&self.sigma, self.tau.iter().map(|t| t.unwrap_or(m)).collect(), &self.rho)
    }
}

impl Ord for NonAdaptiveStrategy {
    fn cmp(&self, other: &Self) -> Ordering {
        self.tie_key().cmp(&other.tie_key())
    }
}

impl PartialOrd for NonAdaptiveStrategy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyJson {
    sigma: Vec<usize>,
    rho: Vec<usize>,
    tau: Vec<Option<usize>>,
}

impl Serialize for NonAdaptiveStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StrategyJson {
            sigma: self.sigma.iter().map(|x| x + 1).collect(),
            rho: self.rho.iter().map(|x| x + 1).collect(),
            tau: self.tau.iter().map(|t| t.map(|x| x + 1)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonAdaptiveStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StrategyJson::deserialize(d)?;
        let dec = |x: usize| x.checked_sub(1).ok_or_else(|| serde::de::Error::custom("indices are 1-based"));
        Ok(NonAdaptiveStrategy {
            sigma: j.sigma.into_iter().map(dec).collect::<std::result::Result<_, _>>()?,
            rho: j.rho.into_iter().map(dec).collect::<std::result::Result<_, _>>()?,
            tau: j
                .tau
                .into_iter()
                .map(|t| t.map(dec).transpose())
                .collect::<std::result::Result<_, _>>()?,
        })
    }
}

/// Distribution of the final outcome, plus the probability that each action
/// (by action index) is taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub mass: Vec<Rational>,
    pub taken: Vec<Rational>,
}

impl OutcomeDistribution {
    pub fn expected(&self, values: &[Rational]) -> Rational {
        self.mass.iter().zip(values).filter(|(p, _)| !p.is_zero()).map(|(p, v)| p * v).sum()
    }

    pub fn expected_cost(&self, costs: &[Rational]) -> Rational {
        self.taken.iter().zip(costs).filter(|(p, _)| !p.is_zero()).map(|(p, c)| p * c).sum()
    }
}

/// Solve `E[(t(X) − z)⁺] = cost` for the outcome row `row`.
pub fn reservation_value_row(row: &[Rational], cost: &Rational, t: &[Rational]) -> ExtendedRational {
    if cost.is_zero() {
        return ExtendedRational::PosInfinity;
    }
    let mut support: Vec<usize> = (0..row.len()).filter(|&j| row[j].is_positive()).collect();
    support.sort_by(|&a, &b| t[b].cmp(&t[a]));

    let mut mass = Rational::zero();
    let mut weighted = Rational::zero();
    let mut k = 0;
    let mut last = None;
    while k < support.len() {
        let pay = &t[support[k]];
        while k < support.len() && &t[support[k]] == pay {
            let j = support[k];
            mass += &row[j];
            weighted += &row[j] * &t[j];
            k += 1;
        }
        let z = (&weighted - cost) / &mass;
        let next_ok = k == support.len() || t[support[k]] <= z;
        if pay > &z && next_ok {
            return ExtendedRational::Finite(z);
        }
        last = Some(z);
    }
    // The expected excess is strictly decreasing below the top payment, so
    // some prefix is always consistent.
    unreachable!("no consistent prefix; last candidate {last:?}")
}

pub fn reservation_value(inst: &Instance, t: &Contract, i: usize) -> ExtendedRational {
    reservation_value_row(&inst.probs()[i], inst.cost(i), &t.payments)
}

pub fn reservation_values(inst: &Instance, t: &Contract) -> Vec<ExtendedRational> {
    (0..inst.n()).map(|i| reservation_value(inst, t, i)).collect()
}

/// Outcome ranks ordered by payment, ties broken toward the higher index.
pub fn payment_ranks(t: &[Rational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].cmp(&t[b]).then(a.cmp(&b)));
    let mut rho = vec![0; t.len()];
    for (rank, &j) in order.iter().enumerate() {
        rho[j] = rank;
    }
    rho
}

/// The strategy that opens actions by decreasing reservation value and stops
/// once the preferred revealed payment strictly exceeds the next one.
pub fn weitzman_strategy(inst: &Instance, t: &Contract) -> NonAdaptiveStrategy {
    let z = reservation_values(inst, t);
    strategy_from_values(&t.payments, &z)
}

pub(crate) fn strategy_from_values(t: &[Rational], z: &[ExtendedRational]) -> NonAdaptiveStrategy {
    let mut sigma: Vec<usize> = (0..z.len()).collect();
    sigma.sort_by(|&a, &b| z[b].cmp(&z[a]).then(a.cmp(&b)));
    let rho = payment_ranks(t);
    let tau = z
        .iter()
        .map(|zi| match zi {
            ExtendedRational::PosInfinity => None,
            ExtendedRational::Finite(zi) => (0..t.len()).filter(|&j| &t[j] > zi).min_by_key(|&j| rho[j]),
        })
        .collect();
    NonAdaptiveStrategy { sigma, rho, tau }
}

/// Exact final-outcome distribution of a non-adaptive strategy.
pub fn outcome_distribution(inst: &Instance, s: &NonAdaptiveStrategy) -> OutcomeDistribution {
    let m = inst.m();
    let mut active = vec![Rational::zero(); m];
    active[0] = Rational::one();
    let mut halted = vec![Rational::zero(); m];
    let mut taken = vec![Rational::zero(); inst.n()];
    let mut next = vec![Rational::zero(); m];

    for &i in &s.sigma {
        for j in 0..m {
            if !active[j].is_zero() && s.halts_before(i, j) {
                let w = std::mem::take(&mut active[j]);
                halted[j] += w;
            }
        }
        let p_taken: Rational = active.iter().sum();
        if p_taken.is_zero() {
            break;
        }
        taken[i] = p_taken;
        let row = &inst.probs()[i];
        for (j, w) in active.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (k, p) in row.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let to = if s.rho[k] > s.rho[j] { k } else { j };
                next[to] += w * p;
            }
        }
        std::mem::swap(&mut active, &mut next);
        next.iter_mut().for_each(|x| *x = Rational::zero());
    }
    for (h, a) in halted.iter_mut().zip(active) {
        *h += a;
    }
    OutcomeDistribution { mass: halted, taken }
}

/// `(u_A, u_P)` of a known outcome distribution under payments `t`.
pub fn utilities(inst: &Instance, t: &Contract, d: &OutcomeDistribution) -> (Rational, Rational) {
    let pay = d.expected(&t.payments);
    let agent = &pay - d.expected_cost(inst.costs());
    let principal = d.expected(inst.rewards()) - pay;
    (agent, principal)
}

pub fn agent_utility(inst: &Instance, t: &Contract, s: &NonAdaptiveStrategy) -> Rational {
    utilities(inst, t, &outcome_distribution(inst, s)).0
}

pub fn principal_utility_for(inst: &Instance, t: &Contract, s: &NonAdaptiveStrategy) -> Rational {
    utilities(inst, t, &outcome_distribution(inst, s)).1
}

/// The perturbation size used by [`tiebreak_contract`].
pub fn tiebreak_epsilon(inst: &Instance, t: &Contract) -> Rational {
    let mut values: Vec<Rational> = t.payments.clone();
    values.extend(reservation_values(inst, t).into_iter().filter_map(|z| match z {
        ExtendedRational::Finite(z) => Some(z),
        ExtendedRational::PosInfinity => None,
    }));
    values.sort();
    values.dedup();
    let half = Rational::new(1, 2);
    let Some(gap) = values.windows(2).map(|w| &w[1] - &w[0]).min() else {
        return half;
    };
    let spread = inst
        .rewards()
        .iter()
        .zip(&t.payments)
        .map(|(r, p)| (r - p).abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let eps = gap / Rational::from_integer(3) / (Rational::one() + spread);
    eps.min(half)
}

/// `t + ε(r − t)`.
pub fn perturb(inst: &Instance, t: &Contract, eps: &Rational) -> Contract {
    Contract {
        payments: t
            .payments
            .iter()
            .zip(inst.rewards())
            .map(|(p, r)| p + eps * (r - p))
            .collect(),
    }
}

/// Shift payments slightly toward the rewards so that every agent tie under
/// `t` is resolved in the principal's favour, while every strict preference
/// survives.
pub fn tiebreak_contract(inst: &Instance, t: &Contract) -> Contract {
    perturb(inst, t, &tiebreak_epsilon(inst, t))
}

/// The agent's principal-favoured best response to `t`, with its evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse {
    pub strategy: NonAdaptiveStrategy,
    pub distribution: OutcomeDistribution,
    pub agent: Rational,
    pub principal: Rational,
}

pub fn best_response(inst: &Instance, t: &Contract) -> BestResponse {
    let perturbed = tiebreak_contract(inst, t);
    let strategy = weitzman_strategy(inst, &perturbed);
    let distribution = outcome_distribution(inst, &strategy);
    let (agent, principal) = utilities(inst, t, &distribution);
    BestResponse { strategy, distribution, agent, principal }
}

/// Principal utility of `t` when the agent best-responds and breaks ties in
/// the principal's favour.
pub fn principal_utility(inst: &Instance, t: &Contract) -> (Rational, NonAdaptiveStrategy) {
    let br = best_response(inst, t);
    (br.principal, br.strategy)
}
