//! Optimal general contracts for a small number of outcomes.
//!
//! Within each face of the arrangement built here the agent's optimal
//! strategies do not change, so an optimal contract sits at a vertex. All
//! vertices inside the payment box are enumerated and evaluated exactly.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::agent::{principal_utility, NonAdaptiveStrategy};
use crate::error::{Error, Result};
use crate::linalg::{solve_exact, solve_f64, FloatSolve};
use crate::model::{Contract, Instance};
use crate::oracle::permutations;
use crate::rational::Rational;

/// Default cap on the number of hyperplane subsets examined.
pub const DEFAULT_VERTEX_BUDGET: u128 = 50_000_000;

/// `max r(m)/p_ij` over nonzero probabilities. No optimal contract pays more
/// than this on any outcome.
pub fn payment_bound(inst: &Instance) -> Rational {
    let top = inst.reward(inst.m() - 1);
    let smallest = inst
        .probs()
        .iter()
        .flatten()
        .filter(|p| p.is_positive())
        .min()
        .expect("every row has positive mass");
    top / smallest
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Family {
    /// `t_j = 0` or `t_j = L`.
    Wall { outcome: usize, upper: bool },
    /// `t_{j1} = t_{j2}`.
    Tie { j1: usize, j2: usize },
    /// Action `i` is indifferent about stopping when outcome `order[position]`
    /// is the best revealed, payments increasing along `order`.
    Halt { order: Vec<usize>, action: usize, position: usize },
    /// The affine forms of two reservation values agree, with `s1`, `s2` the
    /// outcome sets paying above them.
    Swap { i1: usize, i2: usize, s1: Vec<usize>, s2: Vec<usize> },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Wall { .. } => "A1",
            Family::Tie { .. } => "A2",
            Family::Halt { .. } => "A3",
            Family::Swap { .. } => "A4",
        }
    }
}

/// The affine hyperplane `Σ coeffs[j]·t(j) = offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    pub coeffs: Vec<Rational>,
    pub offset: Rational,
    pub family: Family,
}

impl Hyperplane {
    pub fn contains(&self, t: &[Rational]) -> bool {
        self.eval(t) == self.offset
    }

    pub fn eval(&self, t: &[Rational]) -> Rational {
        self.coeffs.iter().zip(t).filter(|(c, _)| !c.is_zero()).map(|(c, x)| c * x).sum()
    }

    // Scaled so the first nonzero coefficient is 1.
    fn canonical(&self) -> Option<(Vec<Rational>, Rational)> {
        let lead = self.coeffs.iter().find(|c| !c.is_zero())?;
        let inv = lead.recip();
        Some((self.coeffs.iter().map(|c| c * &inv).collect(), &self.offset * &inv))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FamilyCounts {
    #[serde(rename = "A1")]
    pub a1: usize,
    #[serde(rename = "A2")]
    pub a2: usize,
    #[serde(rename = "A3")]
    pub a3: usize,
    #[serde(rename = "A4")]
    pub a4: usize,
}

/// Distinct hyperplanes, each tagged with the first family that produced it.
#[derive(Debug, Clone)]
pub struct HyperplaneSet {
    pub m: usize,
    pub planes: Vec<Hyperplane>,
    pub counts: FamilyCounts,
    pub degenerate: usize,
    pub duplicates: usize,
}

#[derive(Default)]
struct Builder {
    planes: Vec<Hyperplane>,
    seen: HashSet<(Vec<Rational>, Rational)>,
    counts: FamilyCounts,
    degenerate: usize,
    duplicates: usize,
}

impl Builder {
    fn push(&mut self, h: Hyperplane) {
        let Some(key) = h.canonical() else {
            self.degenerate += 1;
            log::debug!("dropping degenerate hyperplane from {:?}", h.family);
            return;
        };
        if !self.seen.insert(key) {
            self.duplicates += 1;
            return;
        }
        match h.family {
            Family::Wall { .. } => self.counts.a1 += 1,
            Family::Tie { .. } => self.counts.a2 += 1,
            Family::Halt { .. } => self.counts.a3 += 1,
            Family::Swap { .. } => self.counts.a4 += 1,
        }
        self.planes.push(h);
    }
}

fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << m)).map(move |mask| (0..m).filter(|j| mask >> j & 1 == 1).collect())
}

pub fn hyperplanes(inst: &Instance) -> HyperplaneSet {
    let (n, m) = (inst.n(), inst.m());
    let bound = payment_bound(inst);
    let zero = Rational::zero;
    let unit = |j: usize, v: Rational| {
        let mut c = vec![zero(); m];
        c[j] = v;
        c
    };
    let mut b = Builder::default();

    for j in 0..m {
        b.push(Hyperplane { coeffs: unit(j, Rational::one()), offset: zero(), family: Family::Wall { outcome: j, upper: false } });
        b.push(Hyperplane {
            coeffs: unit(j, Rational::one()),
            offset: bound.clone(),
            family: Family::Wall { outcome: j, upper: true },
        });
    }
    for j1 in 0..m {
        for j2 in j1 + 1..m {
            let mut c = unit(j1, Rational::one());
            c[j2] = -Rational::one();
            b.push(Hyperplane { coeffs: c, offset: zero(), family: Family::Tie { j1, j2 } });
        }
    }
    let paid: Vec<usize> = (0..n).filter(|&i| inst.cost(i).is_positive()).collect();
    for order in permutations(m) {
        for &i in &paid {
            let row = &inst.probs()[i];
            for position in 0..m {
                let mut c = vec![zero(); m];
                let mut above = zero();
                for &k in &order[position + 1..] {
                    c[k] += &row[k];
                    above += &row[k];
                }
                c[order[position]] -= above;
                b.push(Hyperplane {
                    coeffs: c,
                    offset: inst.cost(i).clone(),
                    family: Family::Halt { order: order.clone(), action: i, position },
                });
            }
        }
    }
    let forms: Vec<Vec<(Vec<usize>, Vec<Rational>, Rational)>> = (0..n)
        .map(|i| {
            let row = &inst.probs()[i];
            subsets(m)
                .filter_map(|s| {
                    let mass: Rational = s.iter().map(|&j| &row[j]).sum();
                    if mass.is_zero() {
                        return None;
                    }
                    let inv = mass.recip();
                    let mut c = vec![zero(); m];
                    for &j in &s {
                        c[j] = &row[j] * &inv;
                    }
                    Some((s, c, inst.cost(i) * &inv))
                })
                .collect()
        })
        .collect();
    for (x, &i1) in paid.iter().enumerate() {
        for &i2 in &paid[x + 1..] {
            for (s1, c1, o1) in &forms[i1] {
                for (s2, c2, o2) in &forms[i2] {
                    // (c1·t − o1) = (c2·t − o2)
                    b.push(Hyperplane {
                        coeffs: c1.iter().zip(c2).map(|(a, b)| a - b).collect(),
                        offset: o1 - o2,
                        family: Family::Swap { i1, i2, s1: s1.clone(), s2: s2.clone() },
                    });
                }
            }
        }
    }
    HyperplaneSet { m, planes: b.planes, counts: b.counts, degenerate: b.degenerate, duplicates: b.duplicates }
}

/// `C(h, k)`, saturating.
pub fn binomial(h: usize, k: usize) -> u128 {
    if k > h {
        return 0;
    }
    (0..k as u128).try_fold(1u128, |acc, i| acc.checked_mul(h as u128 - i).map(|v| v / (i + 1))).unwrap_or(u128::MAX)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub point: Vec<Rational>,
    /// Indices into the hyperplane set of one defining subset.
    pub planes: Vec<usize>,
}

/// All points of `[0, L]^m` where some `m` hyperplanes meet in a single point.
/// Returned sorted by point.
pub fn enumerate_vertices(hs: &HyperplaneSet, bound: &Rational, budget: u128) -> Result<Vec<Vertex>> {
    let m = hs.m;
    let h = hs.planes.len();
    let needed = binomial(h, m);
    if needed > budget {
        return Err(Error::Capacity { what: "hyperplane subsets", needed, budget });
    }
    if h < m {
        return Ok(Vec::new());
    }
    let float: Vec<Vec<f64>> = hs
        .planes
        .iter()
        .map(|p| p.coeffs.iter().chain(std::iter::once(&p.offset)).map(Rational::to_f64).collect())
        .collect();
    let lf = bound.to_f64();
    let slack = 1e-7 * lf.max(1.0);
    let zero = Rational::zero();

    let mut found: HashMap<Vec<Rational>, Vec<usize>> = HashMap::new();
    let mut pick: Vec<usize> = (0..m).collect();
    let mut aug = vec![vec![0.0; m + 1]; m];
    loop {
        for (row, &p) in aug.iter_mut().zip(&pick) {
            row.copy_from_slice(&float[p]);
        }
        let promising = match solve_f64(&mut aug) {
            FloatSolve::NearSingular => true,
            FloatSolve::Solved(x) => x.iter().all(|v| *v >= -slack && *v <= lf + slack),
        };
        if promising {
            let a: Vec<Vec<Rational>> = pick.iter().map(|&p| hs.planes[p].coeffs.clone()).collect();
            let b: Vec<Rational> = pick.iter().map(|&p| hs.planes[p].offset.clone()).collect();
            if let Some(x) = solve_exact(&a, &b) {
                if x.iter().all(|v| v >= &zero && v <= bound) {
                    found.entry(x).or_insert_with(|| pick.clone());
                }
            }
        }
        // Next m-subset in lexicographic order.
        let Some(i) = (0..m).rev().find(|&i| pick[i] < h - m + i) else {
            break;
        };
        pick[i] += 1;
        for k in i + 1..m {
            pick[k] = pick[k - 1] + 1;
        }
    }
    let mut out: Vec<Vertex> = found.into_iter().map(|(point, planes)| Vertex { point, planes }).collect();
    out.sort_by(|a, b| a.point.cmp(&b.point));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralReport {
    pub contract: Contract,
    pub utility: Rational,
    pub strategy: NonAdaptiveStrategy,
    pub vertex_count: usize,
    pub hyperplane_counts: FamilyCounts,
}

/// Optimal contract over all payment vectors. Ties go to the
/// lexicographically smallest payments.
pub fn solve_general(inst: &Instance, budget: u128) -> Result<GeneralReport> {
    let hs = hyperplanes(inst);
    let bound = payment_bound(inst);
    let vertices = enumerate_vertices(&hs, &bound, budget)?;
    let mut best: Option<(Contract, Rational, NonAdaptiveStrategy)> = None;
    for v in &vertices {
        let t = Contract { payments: v.point.clone() };
        let (u, s) = principal_utility(inst, &t);
        if best.as_ref().is_none_or(|(_, b, _)| u > *b) {
            best = Some((t, u, s));
        }
    }
    let (contract, utility, strategy) = best.expect("box corners are always vertices");
    Ok(GeneralReport { contract, utility, strategy, vertex_count: vertices.len(), hyperplane_counts: hs.counts })
}
