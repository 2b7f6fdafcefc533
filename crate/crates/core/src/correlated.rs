//! Binary outcomes with correlated actions.
//!
//! Each action succeeds or fails; success of a set of actions is governed
//! by a coverage function `f(S) = Pr[some action in S succeeds]`. The agent
//! tries actions in a fixed order and stops at the first success.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

/// Weighted coverage: `f(S)` is the total weight of elements covered by
/// some action in `S`. Action sets are bit masks over action indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageFunction {
    ids: Vec<String>,
    weights: Vec<Rational>,
    names: Vec<String>,
    cover: Vec<Vec<usize>>,
    // covered_by[u]: mask of actions covering element u
    covered_by: Vec<u64>,
}

pub const MAX_ACTIONS: usize = 63;

impl CoverageFunction {
    pub fn new(elements: Vec<(String, Rational)>, actions: Vec<(String, Vec<usize>)>) -> Result<Self> {
        if actions.len() > MAX_ACTIONS {
            return Err(Error::invalid(format!("at most {MAX_ACTIONS} actions are supported")));
        }
        if let Some((id, w)) = elements.iter().find(|(_, w)| w.is_negative()) {
            return Err(Error::invalid(format!("element {id} has negative weight {w}")));
        }
        let mut covered_by = vec![0u64; elements.len()];
        for (i, (name, set)) in actions.iter().enumerate() {
            for &u in set {
                if u >= elements.len() {
                    return Err(Error::invalid(format!("action {name} covers unknown element {u}")));
                }
                covered_by[u] |= 1 << i;
            }
        }
        let (ids, weights) = elements.into_iter().unzip();
        let (names, cover) = actions.into_iter().unzip();
        Ok(CoverageFunction { ids, weights, names, cover, covered_by })
    }

    pub fn n_actions(&self) -> usize {
        self.names.len()
    }

    pub fn universe_size(&self) -> usize {
        self.weights.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn cover(&self, i: usize) -> &[usize] {
        &self.cover[i]
    }

    pub fn full_mask(&self) -> u64 {
        if self.names.is_empty() {
            0
        } else {
            u64::MAX >> (64 - self.names.len())
        }
    }

    pub fn eval_mask(&self, set: u64) -> Rational {
        self.covered_by
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| *c & set != 0)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn eval(&self, set: &[usize]) -> Rational {
        self.eval_mask(set.iter().fold(0, |m, &i| m | 1 << i))
    }

    /// Total weight of elements some action covers.
    pub fn covered_weight(&self) -> Rational {
        self.eval_mask(self.full_mask())
    }

    /// Drop elements no action covers.
    pub fn pruned(&self) -> CoverageFunction {
        let keep: Vec<usize> = (0..self.weights.len()).filter(|&u| self.covered_by[u] != 0).collect();
        let mut remap = vec![usize::MAX; self.weights.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let elements = keep.iter().map(|&u| (self.ids[u].clone(), self.weights[u].clone())).collect();
        let actions = self
            .names
            .iter()
            .zip(&self.cover)
            .map(|(n, set)| (n.clone(), set.iter().map(|&u| remap[u]).collect()))
            .collect();
        CoverageFunction::new(elements, actions).expect("pruning keeps validity")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDocument {
    pub id: String,
    pub weight: Rational,
}

/// JSON form of a coverage function, optionally with action costs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageDocument {
    pub universe: Vec<ElementDocument>,
    pub actions: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub costs: BTreeMap<String, Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl CoverageDocument {
    /// The coverage function, with actions in name order.
    pub fn coverage(&self) -> Result<CoverageFunction> {
        let mut index = HashMap::new();
        for (k, e) in self.universe.iter().enumerate() {
            if index.insert(e.id.as_str(), k).is_some() {
                return Err(Error::invalid(format!("duplicate element id {}", e.id)));
            }
        }
        let elements = self.universe.iter().map(|e| (e.id.clone(), e.weight.clone())).collect();
        let actions = self
            .actions
            .iter()
            .map(|(name, ids)| {
                let set = ids
                    .iter()
                    .map(|id| index.get(id.as_str()).copied().ok_or_else(|| Error::invalid(format!("action {name} covers unknown element {id}"))))
                    .collect::<Result<Vec<usize>>>()?;
                Ok((name.clone(), set))
            })
            .collect::<Result<Vec<_>>>()?;
        CoverageFunction::new(elements, actions)
    }

    pub fn instance(&self) -> Result<CorrelatedInstance> {
        let f = self.coverage()?;
        let costs = f
            .names()
            .iter()
            .map(|n| self.costs.get(n).cloned().ok_or_else(|| Error::invalid(format!("no cost for action {n}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = self.costs.keys().find(|k| !self.actions.contains_key(*k)) {
            return Err(Error::invalid(format!("cost given for unknown action {extra}")));
        }
        CorrelatedInstance::new(costs, f)
    }

    pub fn from_parts(f: &CoverageFunction, costs: Option<&[Rational]>) -> Self {
        CoverageDocument {
            universe: f
                .ids
                .iter()
                .zip(&f.weights)
                .map(|(id, w)| ElementDocument { id: id.clone(), weight: w.clone() })
                .collect(),
            actions: f
                .names
                .iter()
                .zip(&f.cover)
                .map(|(n, set)| (n.clone(), set.iter().map(|&u| f.ids[u].clone()).collect()))
                .collect(),
            costs: costs
                .map(|cs| f.names.iter().cloned().zip(cs.iter().cloned()).collect())
                .unwrap_or_default(),
            meta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointPoint {
    pub x: Vec<Rational>,
    pub p: Rational,
}

/// JSON form of a finite joint distribution over `variables` non-negative
/// variables. Mass not listed sits on the all-zero vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDocument {
    pub variables: usize,
    pub support: Vec<JointPoint>,
}

impl JointDocument {
    pub fn bernoulli(&self) -> Result<BernoulliJoint> {
        let one = Rational::one();
        let support = self
            .support
            .iter()
            .map(|pt| {
                if pt.x.len() != self.variables {
                    return Err(Error::invalid(format!("point has {} entries, expected {}", pt.x.len(), self.variables)));
                }
                let mut mask = 0u64;
                for (i, x) in pt.x.iter().enumerate() {
                    if *x == one {
                        mask |= 1 << i;
                    } else if !x.is_zero() {
                        return Err(Error::invalid(format!("value {x} is not 0 or 1")));
                    }
                }
                Ok((mask, pt.p.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        BernoulliJoint::new(self.variables, support)
    }

    pub fn corrmax(&self) -> Result<CorrMaxJoint> {
        CorrMaxJoint::new(self.variables, self.support.iter().map(|pt| (pt.x.clone(), pt.p.clone())).collect())
    }
}

impl From<&BernoulliJoint> for JointDocument {
    fn from(j: &BernoulliJoint) -> Self {
        let bit = |v: u64, i: usize| if v >> i & 1 == 1 { Rational::one() } else { Rational::zero() };
        JointDocument {
            variables: j.n,
            support: j
                .support
                .iter()
                .map(|(v, p)| JointPoint { x: (0..j.n).map(|i| bit(*v, i)).collect(), p: p.clone() })
                .collect(),
        }
    }
}

impl From<&CorrMaxJoint> for JointDocument {
    fn from(j: &CorrMaxJoint) -> Self {
        JointDocument {
            variables: j.n,
            support: j.support.iter().map(|(x, p)| JointPoint { x: x.clone(), p: p.clone() }).collect(),
        }
    }
}

/// Correlated 0/1 variables: support points as action masks with their
/// probabilities. Missing mass sits on the all-zero vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliJoint {
    pub n: usize,
    pub support: Vec<(u64, Rational)>,
}

impl BernoulliJoint {
    pub fn new(n: usize, support: Vec<(u64, Rational)>) -> Result<Self> {
        if n > MAX_ACTIONS {
            return Err(Error::invalid(format!("at most {MAX_ACTIONS} variables are supported")));
        }
        if support.iter().any(|(v, p)| p.is_negative() || (n < 64 && v >> n != 0)) {
            return Err(Error::invalid("support points must be non-negative and within range"));
        }
        let total: Rational = support.iter().map(|(_, p)| p).sum();
        if total > Rational::one() {
            return Err(Error::invalid(format!("probabilities sum to {total} > 1")));
        }
        Ok(BernoulliJoint { n, support })
    }

    /// `Pr[X_i = 1 for some i in set]`.
    pub fn prob_any(&self, set: u64) -> Rational {
        self.support.iter().filter(|(v, _)| v & set != 0).map(|(_, p)| p).sum()
    }
}

fn action_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// One element per support point, covered by the variables that are 1 there.
pub fn bernoulli_to_coverage(joint: &BernoulliJoint) -> CoverageFunction {
    let elements = joint.support.iter().enumerate().map(|(k, (_, p))| (format!("s{}", k + 1), p.clone())).collect();
    let actions = action_names(joint.n)
        .into_iter()
        .enumerate()
        .map(|(i, name)| (name, (0..joint.support.len()).filter(|&k| joint.support[k].0 >> i & 1 == 1).collect()))
        .collect();
    CoverageFunction::new(elements, actions).expect("support points are valid elements")
}

/// One support point per covered element, plus the all-zero point for the
/// remaining mass. Points with the same vector are merged.
pub fn coverage_to_bernoulli(f: &CoverageFunction) -> Result<BernoulliJoint> {
    let f = f.pruned();
    let total: Rational = f.weights.iter().sum();
    if total > Rational::one() {
        return Err(Error::invalid(format!("covered weight {total} exceeds 1")));
    }
    let mut merged: BTreeMap<u64, Rational> = BTreeMap::new();
    for (v, w) in f.covered_by.iter().zip(&f.weights) {
        *merged.entry(*v).or_default() += w;
    }
    let rest = Rational::one() - total;
    if rest.is_positive() {
        *merged.entry(0).or_default() += rest;
    }
    BernoulliJoint::new(f.n_actions(), merged.into_iter().filter(|(_, p)| p.is_positive()).collect())
}

/// Correlated non-negative variables on a finite support. Missing mass sits
/// on the all-zero vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrMaxJoint {
    pub n: usize,
    pub support: Vec<(Vec<Rational>, Rational)>,
}

impl CorrMaxJoint {
    pub fn new(n: usize, support: Vec<(Vec<Rational>, Rational)>) -> Result<Self> {
        if n > MAX_ACTIONS {
            return Err(Error::invalid(format!("at most {MAX_ACTIONS} variables are supported")));
        }
        if support.iter().any(|(v, p)| v.len() != n || p.is_negative() || v.iter().any(Rational::is_negative)) {
            return Err(Error::invalid("support points must be non-negative vectors of the right length"));
        }
        let total: Rational = support.iter().map(|(_, p)| p).sum();
        if total > Rational::one() {
            return Err(Error::invalid(format!("probabilities sum to {total} > 1")));
        }
        Ok(CorrMaxJoint { n, support })
    }

    /// `E[max_{i in set} X_i]`, zero for the empty set.
    pub fn expected_max(&self, set: u64) -> Rational {
        self.support
            .iter()
            .map(|(v, p)| {
                let top = (0..self.n).filter(|i| set >> i & 1 == 1).map(|i| &v[i]).max();
                top.map_or_else(Rational::zero, |x| p * x)
            })
            .sum()
    }

    /// Distinct values taken by any variable on the support.
    pub fn values(&self) -> Vec<Rational> {
        let mut vals: Vec<Rational> = self.support.iter().flat_map(|(v, _)| v.iter().cloned()).collect();
        vals.sort();
        vals.dedup();
        vals
    }
}

/// Elements are pairs (support point v, value level m) weighted by
/// `p(v)·(m − previous level)`; variable `i` covers `(v, m)` when `v_i ≥ m`.
/// Zero-weight and uncovered pairs are left out.
pub fn corrmax_to_coverage(joint: &CorrMaxJoint) -> CoverageFunction {
    let levels = joint.values();
    let mut elements = Vec::new();
    let mut actions: Vec<(String, Vec<usize>)> = action_names(joint.n).into_iter().map(|n| (n, Vec::new())).collect();
    for (k, (v, p)) in joint.support.iter().enumerate() {
        let mut prev = Rational::zero();
        for m in &levels {
            let w = p * (m - &prev);
            prev = m.clone();
            let covering: Vec<usize> = (0..joint.n).filter(|&i| &v[i] >= m).collect();
            if w.is_zero() || covering.is_empty() {
                continue;
            }
            let u = elements.len();
            elements.push((format!("s{}@{m}", k + 1), w));
            for i in covering {
                actions[i].1.push(u);
            }
        }
    }
    CoverageFunction::new(elements, actions).expect("levels form valid elements")
}

/// Variables on `{0, L}` with `L` the total weight: draw an element with
/// probability `w/L`; variable `i` is `L` if it covers the element.
pub fn coverage_to_corrmax(f: &CoverageFunction) -> CorrMaxJoint {
    let total: Rational = f.weights.iter().sum();
    let n = f.n_actions();
    if total.is_zero() {
        return CorrMaxJoint { n, support: vec![(vec![Rational::zero(); n], Rational::one())] };
    }
    let mut merged: BTreeMap<u64, Rational> = BTreeMap::new();
    for (v, w) in f.covered_by.iter().zip(&f.weights) {
        if w.is_positive() {
            *merged.entry(*v).or_default() += w / &total;
        }
    }
    let support = merged
        .into_iter()
        .map(|(v, p)| ((0..n).map(|i| if v >> i & 1 == 1 { total.clone() } else { Rational::zero() }).collect(), p))
        .collect();
    CorrMaxJoint { n, support }
}

/// Actions with costs and a coverage function giving success probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatedInstance {
    costs: Vec<Rational>,
    f: CoverageFunction,
}

impl CorrelatedInstance {
    pub fn new(costs: Vec<Rational>, f: CoverageFunction) -> Result<Self> {
        if costs.len() != f.n_actions() {
            return Err(Error::invalid(format!("{} costs for {} actions", costs.len(), f.n_actions())));
        }
        if let Some(c) = costs.iter().find(|c| c.is_negative()) {
            return Err(Error::invalid(format!("negative cost {c}")));
        }
        let top = f.covered_weight();
        if top > Rational::one() {
            return Err(Error::invalid(format!("success probability {top} exceeds 1")));
        }
        Ok(CorrelatedInstance { costs, f })
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn coverage(&self) -> &CoverageFunction {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn to_document(&self) -> CoverageDocument {
        CoverageDocument::from_parts(&self.f, Some(&self.costs))
    }
}

fn mask_of(s: &[usize]) -> u64 {
    s.iter().fold(0, |m, &i| m | 1 << i)
}

/// Tries actions in order until one succeeds; an action is paid for only if
/// every earlier one failed.
pub fn sequence_cost(ci: &CorrelatedInstance, s: &[usize]) -> Rational {
    let one = Rational::one();
    let mut prefix = 0u64;
    let mut cost = Rational::zero();
    for &i in s {
        cost += (&one - ci.f.eval_mask(prefix)) * &ci.costs[i];
        prefix |= 1 << i;
    }
    cost
}

/// `(u_A, u_P)` under the linear contract `α`.
pub fn sequence_utilities(ci: &CorrelatedInstance, alpha: &Rational, s: &[usize]) -> (Rational, Rational) {
    let success = ci.f.eval_mask(mask_of(s));
    let agent = alpha * &success - sequence_cost(ci, s);
    let principal = (Rational::one() - alpha) * success;
    (agent, principal)
}

/// Whether every action in `s` is reached with positive probability.
pub fn is_valid_tuple(ci: &CorrelatedInstance, s: &[usize]) -> bool {
    let mut prefix = 0u64;
    for &i in s {
        if i >= ci.n() || prefix >> i & 1 == 1 || ci.f.eval_mask(prefix) == Rational::one() {
            return false;
        }
        prefix |= 1 << i;
    }
    true
}

pub const DEFAULT_CORRELATED_BOUND: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrelatedCandidate {
    pub alpha: Rational,
    pub utility: Rational,
    pub strategy: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrelatedLinear {
    pub alpha: Rational,
    pub utility: Rational,
    pub strategy: Vec<usize>,
    pub candidates: Vec<CorrelatedCandidate>,
}

/// Exhaustive optimal linear contract over all tuple strategies.
///
/// Only the cheapest tuple for each success probability can be a best
/// response, so the candidate α are the pairwise cost/probability ratios
/// among those. At each candidate the agent maximizes its utility, then the
/// success probability, then prefers the lexicographically smallest tuple.
pub fn brute_force_best_linear(ci: &CorrelatedInstance, max_actions: usize) -> Result<CorrelatedLinear> {
    let n = ci.n();
    if n > max_actions {
        return Err(Error::Capacity { what: "correlated actions", needed: n as u128, budget: max_actions as u128 });
    }
    // success probability -> (cost, tuple)
    let mut cheapest: BTreeMap<Rational, (Rational, Vec<usize>)> = BTreeMap::new();
    let mut stack: Vec<(Vec<usize>, u64, Rational)> = vec![(Vec::new(), 0, Rational::zero())];
    let one = Rational::one();
    while let Some((tuple, mask, cost)) = stack.pop() {
        let success = ci.f.eval_mask(mask);
        let better = match cheapest.get(&success) {
            None => true,
            Some((c, t)) => cost < *c || (cost == *c && tuple < *t),
        };
        if better {
            cheapest.insert(success.clone(), (cost.clone(), tuple.clone()));
        }
        if success == one {
            continue;
        }
        let reach = &one - &success;
        for i in (0..n).rev().filter(|i| mask >> i & 1 == 0) {
            let mut next = tuple.clone();
            next.push(i);
            stack.push((next, mask | 1 << i, &cost + &reach * &ci.costs[i]));
        }
    }
    let lines: Vec<(Rational, Rational, Vec<usize>)> = cheapest.into_iter().map(|(f, (c, t))| (f, c, t)).collect();

    let (zero, one) = (Rational::zero(), Rational::one());
    let mut alphas = vec![zero.clone(), one.clone()];
    for (x, a) in lines.iter().enumerate() {
        for b in &lines[x + 1..] {
            let alpha = (&a.1 - &b.1) / (&a.0 - &b.0);
            if alpha >= zero && alpha <= one {
                alphas.push(alpha);
            }
        }
    }
    alphas.sort();
    alphas.dedup();

    let mut candidates = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let mut top: Option<(Rational, &(Rational, Rational, Vec<usize>))> = None;
        for line in &lines {
            let ua = &alpha * &line.0 - &line.1;
            let better = match &top {
                None => true,
                Some((u, l)) => ua > *u || (ua == *u && (line.0 > l.0 || (line.0 == l.0 && line.2 < l.2))),
            };
            if better {
                top = Some((ua, line));
            }
        }
        let (_, line) = top.expect("the empty tuple is always present");
        candidates.push(CorrelatedCandidate {
            utility: (&one - &alpha) * &line.0,
            alpha,
            strategy: line.2.clone(),
        });
    }
    let best = candidates
        .iter()
        .fold(None::<&CorrelatedCandidate>, |b, c| match b {
            Some(b) if b.utility >= c.utility => Some(b),
            _ => Some(c),
        })
        .expect("0 and 1 are candidates");
    Ok(CorrelatedLinear {
        alpha: best.alpha.clone(),
        utility: best.utility.clone(),
        strategy: best.strategy.clone(),
        candidates,
    })
}

/// Name given to the extra action that covers the whole universe.
pub const CATCH_ALL: &str = "0";

/// Adds an action covering every element, costing `1 − γ/8`; the original
/// actions cost `3/(2(k+1))`. If the weights sum to less than 1 the new
/// action also covers a residual element so that it always succeeds.
pub fn hardness_reduction(fprime: &CoverageFunction, k: u32, gamma: &Rational) -> Result<CorrelatedInstance> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if !gamma.is_positive() || gamma >= &Rational::one() {
        return Err(Error::invalid("gamma must lie in (0, 1)"));
    }
    if fprime.names().iter().any(|n| n == CATCH_ALL) {
        return Err(Error::invalid(format!("action name {CATCH_ALL:?} is reserved")));
    }
    let single = rat(1, k as i64);
    for i in 0..fprime.n_actions() {
        let v = fprime.eval_mask(1 << i);
        if v != single {
            return Err(Error::invalid(format!("f({{{}}}) = {v}, expected 1/{k}", fprime.names()[i])));
        }
    }
    let total: Rational = fprime.weights().iter().sum();
    if total > Rational::one() {
        return Err(Error::invalid(format!("total weight {total} exceeds 1")));
    }
    let mut elements: Vec<(String, Rational)> =
        fprime.ids.iter().cloned().zip(fprime.weights.iter().cloned()).collect();
    let rest = Rational::one() - &total;
    if rest.is_positive() {
        elements.push(("residual".into(), rest));
    }
    let mut actions = vec![(CATCH_ALL.to_string(), (0..elements.len()).collect::<Vec<_>>())];
    actions.extend(fprime.names.iter().cloned().zip(fprime.cover.iter().cloned()));
    let f = CoverageFunction::new(elements, actions)?;
    let mut costs = vec![Rational::one() - gamma / Rational::from_integer(8)];
    costs.extend((0..fprime.n_actions()).map(|_| rat(3, 2 * (k as i64 + 1))));
    CorrelatedInstance::new(costs, f)
}

/// `k` disjoint elements of weight `1/k`, action `i` covering element `i`.
pub fn perfect_cover(k: u32) -> CoverageFunction {
    let w = rat(1, k as i64);
    CoverageFunction::new(
        (1..=k).map(|u| (format!("u{u}"), w.clone())).collect(),
        (0..k as usize).map(|i| (format!("a{}", i + 1), vec![i])).collect(),
    )
    .expect("valid")
}

/// A random joint of 0/1 variables with distinct support points whose
/// probabilities are multiples of 1/24 summing to at most 1.
pub fn random_bernoulli_joint(n: usize, support: usize, seed: u64) -> BernoulliJoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = support.min(1 << n);
    let mut points: Vec<u64> = Vec::new();
    while points.len() < support {
        let v = rng.gen_range(0..1u64 << n);
        if !points.contains(&v) {
            points.push(v);
        }
    }
    let mut left = 24;
    let pts = points
        .into_iter()
        .map(|v| {
            let k = rng.gen_range(0..=left.min(12));
            left -= k;
            (v, rat(k, 24))
        })
        .collect();
    BernoulliJoint::new(n, pts).expect("valid by construction")
}

/// A random joint of small non-negative variables in which the number of
/// distinct values does not exceed the support size.
pub fn random_corrmax_joint(n: usize, support: usize, seed: u64) -> CorrMaxJoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = support.max(1);
    let palette: Vec<Rational> = (0..support).map(|_| rat(rng.gen_range(0..=6), 2)).collect();
    let mut left = 24;
    let pts = (0..support)
        .map(|_| {
            let v = (0..n).map(|_| palette[rng.gen_range(0..palette.len())].clone()).collect();
            let k = rng.gen_range(0..=left.min(12));
            left -= k;
            (v, rat(k, 24))
        })
        .collect();
    CorrMaxJoint::new(n, pts).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    // Elements of weight 3/10 and 1/2; a covers the first, b both.
    fn sample() -> CoverageFunction {
        CoverageFunction::new(
            vec![("u1".into(), rat(3, 10)), ("u2".into(), rat(1, 2))],
            vec![("a".into(), vec![0]), ("b".into(), vec![0, 1])],
        )
        .unwrap()
    }

    fn sample_instance() -> CorrelatedInstance {
        CorrelatedInstance::new(vec![rat(1, 10), rat(1, 5)], sample()).unwrap()
    }

    #[test]
    fn coverage_values() {
        let f = sample();
        assert_eq!(f.eval(&[0]), rat(3, 10));
        assert_eq!(f.eval(&[]), rat(0, 1));
        assert_eq!(f.eval(&[0, 1]), rat(4, 5));
    }

    #[test]
    fn bernoulli_round_trip() {
        let joint = BernoulliJoint::new(2, vec![(0b11, rat(3, 10)), (0b10, rat(1, 2))]).unwrap();
        let f = bernoulli_to_coverage(&joint);
        for s in 0..4 {
            assert_eq!(f.eval_mask(s), sample().eval_mask(s));
        }
        let back = coverage_to_bernoulli(&sample()).unwrap();
        let mut support = back.support.clone();
        support.sort();
        assert_eq!(support, vec![(0b00, rat(1, 5)), (0b10, rat(1, 2)), (0b11, rat(3, 10))]);
        let g = bernoulli_to_coverage(&back);
        for s in 0..4 {
            assert_eq!(g.eval_mask(s), sample().eval_mask(s));
        }
    }

    #[test]
    fn empty_and_independent_joints() {
        let empty = bernoulli_to_coverage(&BernoulliJoint::new(2, vec![]).unwrap());
        assert!((0..4).all(|s| empty.eval_mask(s).is_zero()));
        let zero = coverage_to_bernoulli(&empty).unwrap();
        assert_eq!(zero.support, vec![(0, rat(1, 1))]);
        let q = rat(1, 4);
        let indep = BernoulliJoint::new(2, vec![(0b00, q.clone()), (0b01, q.clone()), (0b10, q.clone()), (0b11, q)]).unwrap();
        assert_eq!(bernoulli_to_coverage(&indep).eval_mask(0b11), rat(3, 4));
    }

    #[test]
    fn overweight_coverage_is_rejected() {
        let f = CoverageFunction::new(
            vec![("u".into(), rat(3, 4)), ("v".into(), rat(1, 2))],
            vec![("a".into(), vec![0, 1])],
        )
        .unwrap();
        assert!(coverage_to_bernoulli(&f).is_err());
    }

    #[test]
    fn uncovered_weight_is_pruned() {
        let f = CoverageFunction::new(
            vec![("u".into(), rat(1, 2)), ("lost".into(), rat(3, 4))],
            vec![("a".into(), vec![0])],
        )
        .unwrap();
        let j = coverage_to_bernoulli(&f).unwrap();
        assert_eq!(j.prob_any(1), rat(1, 2));
    }

    #[test]
    fn expected_maximum() {
        let single = CorrMaxJoint::new(1, vec![(vec![rat(1, 1)], rat(1, 2))]).unwrap();
        assert_eq!(corrmax_to_coverage(&single).eval_mask(1), rat(1, 2));
        let como = CorrMaxJoint::new(2, vec![(vec![rat(2, 1), rat(2, 1)], rat(1, 4))]).unwrap();
        assert_eq!(corrmax_to_coverage(&como).eval_mask(0b11), rat(1, 2));
        let g = CoverageFunction::new(
            vec![("u1".into(), rat(1, 2)), ("u2".into(), rat(1, 3)), ("u3".into(), rat(1, 4))],
            vec![("a".into(), vec![0, 1]), ("b".into(), vec![1, 2]), ("c".into(), vec![2])],
        )
        .unwrap();
        let j = coverage_to_corrmax(&g);
        let big_l = rat(13, 12);
        assert!(j.support.iter().all(|(v, _)| v.iter().all(|x| x.is_zero() || x == &big_l)));
        for s in 0..8 {
            assert_eq!(j.expected_max(s), g.eval_mask(s));
        }
        assert!(j.support.len() <= g.universe_size());
    }

    #[test]
    fn level_count_can_exceed_square_of_support() {
        // One support point with two distinct values: any coverage
        // representation needs two elements, more than |support|² = 1.
        let j = CorrMaxJoint::new(2, vec![(vec![rat(1, 1), rat(2, 1)], rat(1, 1))]).unwrap();
        let f = corrmax_to_coverage(&j);
        assert_eq!(f.universe_size(), 2);
        assert_eq!((f.eval_mask(1), f.eval_mask(2), f.eval_mask(3)), (rat(1, 1), rat(2, 1), rat(2, 1)));
    }

    #[test]
    fn sequence_costs_and_utilities() {
        let ci = sample_instance();
        assert_eq!(sequence_cost(&ci, &[0, 1]), rat(6, 25));
        assert_eq!(sequence_cost(&ci, &[]), rat(0, 1));
        assert_eq!(sequence_cost(&ci, &[1]), rat(1, 5));
        assert_eq!(sequence_utilities(&ci, &rat(1, 2), &[0, 1]), (rat(4, 25), rat(2, 5)));
        assert_eq!(sequence_utilities(&ci, &rat(1, 1), &[1]).1, rat(0, 1));
        assert_eq!(sequence_utilities(&ci, &rat(0, 1), &[]).0, rat(0, 1));
    }

    #[test]
    fn tuple_validity() {
        let sure = CorrelatedInstance::new(
            vec![rat(0, 1), rat(0, 1)],
            CoverageFunction::new(vec![("u".into(), rat(1, 1))], vec![("a".into(), vec![0]), ("b".into(), vec![0])]).unwrap(),
        )
        .unwrap();
        assert!(is_valid_tuple(&sure, &[0]));
        assert!(!is_valid_tuple(&sure, &[0, 1]));
        assert!(!is_valid_tuple(&sure, &[0, 0]));
    }

    #[test]
    fn single_action_linear() {
        let ci = CorrelatedInstance::new(
            vec![rat(1, 10)],
            CoverageFunction::new(vec![("u".into(), rat(1, 2))], vec![("a".into(), vec![0])]).unwrap(),
        )
        .unwrap();
        let r = brute_force_best_linear(&ci, 7).unwrap();
        assert_eq!((r.alpha, r.utility), (rat(1, 5), rat(2, 5)));
    }

    #[test]
    fn free_actions_linear() {
        let ci = CorrelatedInstance::new(vec![rat(0, 1), rat(0, 1)], sample()).unwrap();
        let r = brute_force_best_linear(&ci, 7).unwrap();
        assert_eq!((r.alpha, r.utility), (rat(0, 1), rat(4, 5)));
    }

    #[test]
    fn linear_beats_fine_grid() {
        let ci = sample_instance();
        let r = brute_force_best_linear(&ci, 7).unwrap();
        let tuples: Vec<Vec<usize>> = vec![vec![], vec![0], vec![1], vec![0, 1], vec![1, 0]];
        for k in 0..=200 {
            let alpha = rat(k, 200);
            let best = tuples
                .iter()
                .map(|s| sequence_utilities(&ci, &alpha, s))
                .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)))
                .unwrap();
            assert!(best.1 <= r.utility, "alpha {alpha}");
        }
        assert!(matches!(brute_force_best_linear(&ci, 1), Err(Error::Capacity { .. })));
    }

    #[test]
    fn reduction_shape() {
        let ci = hardness_reduction(&perfect_cover(2), 2, &rat(1, 2)).unwrap();
        assert_eq!(ci.costs()[0], rat(15, 16));
        assert_eq!(&ci.costs()[1..], &[rat(1, 2), rat(1, 2)]);
        let f = ci.coverage();
        for s in 0..8u64 {
            let expected = if s & 1 == 1 { rat(1, 1) } else { perfect_cover(2).eval_mask(s >> 1) };
            assert_eq!(f.eval_mask(s), expected);
        }
        let r = brute_force_best_linear(&ci, 7).unwrap();
        assert!(r.utility >= rat(1, 4));
        assert!(hardness_reduction(&sample(), 2, &rat(1, 2)).is_err());
    }

    #[test]
    fn joint_documents() {
        let doc: JointDocument =
            serde_json::from_str(r#"{"variables":2,"support":[{"x":[1,0],"p":"1/3"},{"x":[1,1],"p":"1/6"}]}"#).unwrap();
        let j = doc.bernoulli().unwrap();
        assert_eq!(j.support, vec![(0b01, rat(1, 3)), (0b11, rat(1, 6))]);
        assert_eq!(JointDocument::from(&j), doc);
        assert_eq!(doc.corrmax().unwrap().expected_max(0b10), rat(1, 6));
        let bad: JointDocument = serde_json::from_str(r#"{"variables":1,"support":[{"x":["1/2"],"p":"1"}]}"#).unwrap();
        assert!(bad.bernoulli().is_err());
        assert!(bad.corrmax().is_ok());
    }

    #[test]
    fn document_round_trip() {
        let text = r#"{"universe":[{"id":"u1","weight":"3/10"},{"id":"u2","weight":"1/2"}],"actions":{"a":["u1"],"b":["u1","u2"]},"costs":{"a":"1/10","b":"1/5"}}"#;
        let doc: CoverageDocument = serde_json::from_str(text).unwrap();
        let ci = doc.instance().unwrap();
        assert_eq!(ci, sample_instance());
        assert_eq!(serde_json::to_string(&ci.to_document()).unwrap(), text);
    }
}
