//! Optimal linear contracts.
//!
//! Under `t = α·r` each reservation value is a convex piecewise-linear
//! function of α. The agent's best response can only change where two of
//! them cross or where one crosses a payment line `α·r(j)`, so evaluating
//! the principal at those points (and at 0 and 1) finds the optimum.

use serde::Serialize;

use crate::agent::{best_response, NonAdaptiveStrategy, OutcomeDistribution};
use crate::model::{scaled_rewards, Instance};
use crate::rational::{ExtendedRational, Rational};

/// `slope·α + intercept` on `[start, end)`; `end = None` is unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: Rational,
    pub end: Option<Rational>,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Segment {
    pub fn at(&self, alpha: &Rational) -> Rational {
        &self.slope * alpha + &self.intercept
    }

    fn covers_closed(&self, alpha: &Rational) -> bool {
        alpha >= &self.start && self.end.as_ref().is_none_or(|e| alpha <= e)
    }

    /// Crossing point with another affine piece, if they have different slopes
    /// and meet inside both closed domains.
    fn crossing(&self, slope: &Rational, intercept: &Rational, other: Option<&Segment>) -> Option<Rational> {
        if &self.slope == slope {
            return None;
        }
        let alpha = (intercept - &self.intercept) / (&self.slope - slope);
        let inside = self.covers_closed(&alpha) && other.is_none_or(|o| o.covers_closed(&alpha));
        inside.then_some(alpha)
    }
}

/// A reservation value as a function of α.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PiecewiseLinearFn {
    /// The action is free; its reservation value is `+∞` everywhere.
    Infinite,
    Segments(Vec<Segment>),
}

impl PiecewiseLinearFn {
    pub fn eval(&self, alpha: &Rational) -> ExtendedRational {
        match self {
            PiecewiseLinearFn::Infinite => ExtendedRational::PosInfinity,
            PiecewiseLinearFn::Segments(segs) => {
                let seg = segs
                    .iter()
                    .rev()
                    .find(|s| &s.start <= alpha)
                    .unwrap_or(&segs[0]);
                ExtendedRational::Finite(seg.at(alpha))
            }
        }
    }

    /// Interior breakpoints.
    pub fn breakpoints(&self) -> Vec<Rational> {
        match self {
            PiecewiseLinearFn::Infinite => Vec::new(),
            PiecewiseLinearFn::Segments(segs) => segs.iter().skip(1).map(|s| s.start.clone()).collect(),
        }
    }

    pub fn segments(&self) -> &[Segment] {
        match self {
            PiecewiseLinearFn::Infinite => &[],
            PiecewiseLinearFn::Segments(segs) => segs,
        }
    }
}

/// Reservation value of action `i` under `α·r`, for `α ≥ 0`.
///
/// While `α·r(k) > z` exactly for the outcomes `k ≥ j`, the value is
/// `(α·Σ p·r − c)/Σ p` over those outcomes. Outcome `j` drops out at
/// `α = c / Σ_{k≥j} p(r(k) − r(j))`.
pub fn reservation_pwl(inst: &Instance, i: usize) -> PiecewiseLinearFn {
    let cost = inst.cost(i);
    if cost.is_zero() {
        return PiecewiseLinearFn::Infinite;
    }
    let row = &inst.probs()[i];
    let r = inst.rewards();
    let m = inst.m();
    let mut segs = Vec::new();
    let mut start = Rational::zero();
    for j in 0..m {
        let mass: Rational = row[j..].iter().sum();
        let weighted: Rational = row[j..].iter().zip(&r[j..]).map(|(p, x)| p * x).sum();
        let excess = &weighted - &mass * &r[j];
        let end = excess.is_positive().then(|| cost / &excess);
        if let Some(e) = &end {
            if e <= &start {
                continue;
            }
        }
        segs.push(Segment {
            start: start.clone(),
            end: end.clone(),
            slope: &weighted / &mass,
            intercept: -(cost / &mass),
        });
        match end {
            Some(e) => start = e,
            None => break,
        }
    }
    PiecewiseLinearFn::Segments(segs)
}

/// Every α in `[0, 1]` at which the best response may change, plus 0 and 1.
pub fn candidate_alphas(inst: &Instance) -> Vec<Rational> {
    let fns: Vec<PiecewiseLinearFn> = (0..inst.n()).map(|i| reservation_pwl(inst, i)).collect();
    candidates_from(inst, &fns)
}

fn candidates_from(inst: &Instance, fns: &[PiecewiseLinearFn]) -> Vec<Rational> {
    let (zero, one) = (Rational::zero(), Rational::one());
    let mut out = vec![zero.clone(), one.clone()];
    let mut keep = |a: Rational| {
        if a >= zero && a <= one {
            out.push(a);
        }
    };
    for (x, f) in fns.iter().enumerate() {
        for s in f.segments() {
            for g in &fns[x + 1..] {
                for o in g.segments() {
                    if let Some(a) = s.crossing(&o.slope, &o.intercept, Some(o)) {
                        keep(a);
                    }
                }
            }
            for r in inst.rewards() {
                if let Some(a) = s.crossing(r, &zero, None) {
                    keep(a);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateValue {
    pub alpha: Rational,
    pub utility: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearReport {
    pub alpha: Rational,
    pub utility: Rational,
    pub strategy: NonAdaptiveStrategy,
    pub candidates: Vec<CandidateValue>,
}

/// Optimal linear contract; the smallest α among maximizers.
pub fn solve_linear(inst: &Instance) -> LinearReport {
    let mut best: Option<(Rational, Rational, NonAdaptiveStrategy)> = None;
    let mut candidates = Vec::new();
    for alpha in candidate_alphas(inst) {
        let br = best_response(inst, &scaled_rewards(&alpha, inst));
        candidates.push(CandidateValue { alpha: alpha.clone(), utility: br.principal.clone() });
        if best.as_ref().is_none_or(|(_, u, _)| br.principal > *u) {
            best = Some((alpha, br.principal, br.strategy));
        }
    }
    let (alpha, utility, strategy) = best.expect("0 is always a candidate");
    LinearReport { alpha, utility, strategy, candidates }
}

/// Observable behaviour of a best response: take probabilities and the final
/// outcome distribution.
pub fn behaviour_at(inst: &Instance, alpha: &Rational) -> OutcomeDistribution {
    best_response(inst, &scaled_rewards(alpha, inst)).distribution
}

/// Candidates α at which the best response differs from the one just to
/// their left (probed at the midpoint to the previous candidate).
pub fn best_response_changes(inst: &Instance) -> Vec<Rational> {
    let cands = candidate_alphas(inst);
    let two = Rational::from_integer(2);
    cands
        .windows(2)
        .filter(|w| {
            let mid = (&w[0] + &w[1]) / &two;
            behaviour_at(inst, &mid) != behaviour_at(inst, &w[1])
        })
        .map(|w| w[1].clone())
        .collect()
}
