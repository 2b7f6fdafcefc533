//! Instances, contracts and the JSON document formats.

use serde::{Deserialize, Serialize};

use crate::agent::NonAdaptiveStrategy;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// An independent-action instance with outcomes in non-decreasing reward
/// order. Outcome 0 is the zero outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    rewards: Vec<Rational>,
    costs: Vec<Rational>,
    probs: Vec<Vec<Rational>>,
}

/// The on-disk form of an instance. Outcomes may be in any order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub rewards: Vec<Rational>,
    pub costs: Vec<Rational>,
    pub probs: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

/// Result of [`validate_instance`]: the normalized instance and the outcome
/// relabeling, where `permutation[new] = old`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub instance: Instance,
    pub permutation: Vec<usize>,
}

impl Normalized {
    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Map a contract given in the document's outcome order into normalized order.
    pub fn contract_to_normalized(&self, c: &Contract) -> Result<Contract> {
        if c.payments.len() != self.permutation.len() {
            return Err(Error::invalid(format!(
                "contract has {} payments, instance has {} outcomes",
                c.payments.len(),
                self.permutation.len()
            )));
        }
        Contract::new(self.permutation.iter().map(|&old| c.payments[old].clone()).collect())
    }

    /// Map outcome-indexed values in normalized order back to the document's order.
    pub fn to_original<T: Clone + Default>(&self, values: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); values.len()];
        for (new, &old) in self.permutation.iter().enumerate() {
            out[old] = values[new].clone();
        }
        out
    }

    /// The same plan with outcomes labeled as in the document.
    pub fn strategy_to_original(&self, s: &NonAdaptiveStrategy) -> NonAdaptiveStrategy {
        NonAdaptiveStrategy {
            sigma: s.sigma.clone(),
            rho: self.to_original(&s.rho),
            tau: s.tau.iter().map(|t| t.map(|j| self.permutation[j])).collect(),
        }
    }

    /// Map a contract in normalized order back to the document's order.
    pub fn contract_to_original(&self, c: &Contract) -> Contract {
        Contract { payments: self.to_original(&c.payments) }
    }
}

fn check_row(i: usize, row: &[Rational], m: usize) -> Result<()> {
    if row.len() != m {
        return Err(Error::invalid(format!(
            "probability row {} has length {}, expected {m}",
            i + 1,
            row.len()
        )));
    }
    if let Some(p) = row.iter().find(|p| p.is_negative()) {
        return Err(Error::invalid(format!("negative probability {p} in row {}", i + 1)));
    }
    let sum: Rational = row.iter().sum();
    if sum != Rational::one() {
        return Err(Error::invalid(format!("row sum ≠ 1 in row {} (sums to {sum})", i + 1)));
    }
    Ok(())
}

impl Instance {
    /// Build an instance whose outcomes are already in reward order.
    pub fn new(rewards: Vec<Rational>, costs: Vec<Rational>, probs: Vec<Vec<Rational>>) -> Result<Self> {
        let m = rewards.len();
        if m == 0 {
            return Err(Error::invalid("instance has no outcomes"));
        }
        if costs.is_empty() {
            return Err(Error::invalid("instance has no actions"));
        }
        if probs.len() != costs.len() {
            return Err(Error::invalid(format!(
                "{} probability rows for {} actions",
                probs.len(),
                costs.len()
            )));
        }
        if let Some(r) = rewards.iter().find(|r| r.is_negative()) {
            return Err(Error::invalid(format!("negative reward {r}")));
        }
        if let Some(c) = costs.iter().find(|c| c.is_negative()) {
            return Err(Error::invalid(format!("negative cost {c}")));
        }
        if rewards.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("rewards are not sorted"));
        }
        if !rewards[0].is_zero() {
            return Err(Error::invalid(format!("minimum reward is {}, expected 0", rewards[0])));
        }
        for (i, row) in probs.iter().enumerate() {
            check_row(i, row, m)?;
        }
        Ok(Instance { rewards, costs, probs })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn m(&self) -> usize {
        self.rewards.len()
    }

    pub fn rewards(&self) -> &[Rational] {
        &self.rewards
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn probs(&self) -> &[Vec<Rational>] {
        &self.probs
    }

    pub fn reward(&self, j: usize) -> &Rational {
        &self.rewards[j]
    }

    pub fn cost(&self, i: usize) -> &Rational {
        &self.costs[i]
    }

    pub fn prob(&self, i: usize, j: usize) -> &Rational {
        &self.probs[i][j]
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            rewards: self.rewards.clone(),
            costs: self.costs.clone(),
            probs: self.probs.clone(),
            meta: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Normalized> {
        let doc: InstanceDocument = serde_json::from_str(s)?;
        validate_instance(&doc)
    }
}

/// Check a raw document and relabel outcomes into non-decreasing reward order.
/// Ties keep their document order.
pub fn validate_instance(doc: &InstanceDocument) -> Result<Normalized> {
    let m = doc.rewards.len();
    if m == 0 {
        return Err(Error::invalid("instance has no outcomes"));
    }
    if doc.costs.is_empty() {
        return Err(Error::invalid("instance has no actions"));
    }
    if doc.probs.len() != doc.costs.len() {
        return Err(Error::invalid(format!(
            "{} probability rows for {} actions",
            doc.probs.len(),
            doc.costs.len()
        )));
    }
    for (i, row) in doc.probs.iter().enumerate() {
        check_row(i, row, m)?;
    }
    let mut permutation: Vec<usize> = (0..m).collect();
    permutation.sort_by(|&a, &b| doc.rewards[a].cmp(&doc.rewards[b]));
    let rewards = permutation.iter().map(|&j| doc.rewards[j].clone()).collect();
    let probs = doc
        .probs
        .iter()
        .map(|row| permutation.iter().map(|&j| row[j].clone()).collect())
        .collect();
    let instance = Instance::new(rewards, doc.costs.clone(), probs)?;
    Ok(Normalized { instance, permutation })
}

/// A payment vector over outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contract {
    pub payments: Vec<Rational>,
}

impl Contract {
    pub fn new(payments: Vec<Rational>) -> Result<Self> {
        if let Some(p) = payments.iter().find(|p| p.is_negative()) {
            return Err(Error::invalid(format!("negative payment {p}")));
        }
        Ok(Contract { payments })
    }

    pub fn zero(m: usize) -> Self {
        Contract { payments: vec![Rational::zero(); m] }
    }

    pub fn m(&self) -> usize {
        self.payments.len()
    }

    pub fn check_against(&self, inst: &Instance) -> Result<()> {
        if self.payments.len() != inst.m() {
            return Err(Error::invalid(format!(
                "contract has {} payments, instance has {} outcomes",
                self.payments.len(),
                inst.m()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearContract {
    alpha: Rational,
}

impl LinearContract {
    pub fn new(alpha: Rational) -> Result<Self> {
        if alpha.is_negative() || alpha > Rational::one() {
            return Err(Error::invalid(format!("alpha {alpha} outside [0,1]")));
        }
        Ok(LinearContract { alpha })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }
}

pub fn induced_payments(lin: &LinearContract, inst: &Instance) -> Contract {
    scaled_rewards(&lin.alpha, inst)
}

/// `α·r` without the `[0,1]` restriction on α.
pub(crate) fn scaled_rewards(alpha: &Rational, inst: &Instance) -> Contract {
    Contract {
        payments: inst.rewards.iter().map(|r| alpha * r).collect(),
    }
}
