//! Distances between designs and the EATE extrapolation bounds they give.

use std::collections::HashMap;

use rand::Rng;

use crate::assignment::AssignmentVector;
use crate::designs::DesignSpec;
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::metrics::c_moment;
use crate::oracle::{assignment_ate, PotentialOutcomes};
use crate::transport;

const PRUNE: f64 = 1e-15;

/// A finitely supported distribution over `{0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignDistribution {
    n: usize,
    support: Vec<AssignmentVector>,
    probs: Vec<f64>,
}

impl DesignDistribution {
    /// Merges repeated points, prunes masses below `1e-15` and
    /// renormalizes. The input must sum to 1 within `1e-12`.
    pub fn new(n: usize, points: Vec<(AssignmentVector, f64)>) -> Result<Self> {
        let mut merged: HashMap<AssignmentVector, f64> = HashMap::new();
        let mut order = Vec::new();
        for (z, p) in points {
            z.check_len(n)?;
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("invalid probability {}", p)));
            }
            if !merged.contains_key(&z) {
                order.push(z.clone());
            }
            *merged.entry(z).or_insert(0.0) += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("probabilities sum to {}, not 1", total)));
        }
        let kept: Vec<(AssignmentVector, f64)> = order
            .into_iter()
            .filter_map(|z| {
                let p = merged[&z];
                (p >= PRUNE).then_some((z, p))
            })
            .collect();
        let kept_total: f64 = kept.iter().map(|(_, p)| p).sum();
        let (support, probs) = kept.into_iter().map(|(z, p)| (z, p / kept_total)).unzip();
        Ok(DesignDistribution { n, support, probs })
    }

    pub fn from_design(design: &DesignSpec, limit: usize) -> Result<Self> {
        Self::new(design.n(), design.enumerate_support(limit)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[AssignmentVector] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AssignmentVector, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }
}

fn same_n(p: &DesignDistribution, q: &DesignDistribution) -> Result<()> {
    if p.n != q.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            found: q.n,
        });
    }
    Ok(())
}

/// `δ(P, Q) = ½ Σ |P(z) - Q(z)|` over the union of supports.
pub fn total_variation(p: &DesignDistribution, q: &DesignDistribution) -> Result<f64> {
    same_n(p, q)?;
    let mut diff: HashMap<&AssignmentVector, f64> = HashMap::new();
    for (z, w) in p.iter() {
        *diff.entry(z).or_insert(0.0) += w;
    }
    for (z, w) in q.iter() {
        *diff.entry(z).or_insert(0.0) -= w;
    }
    let mut terms: Vec<f64> = diff.values().map(|d| d.abs()).collect();
    terms.sort_by(f64::total_cmp);
    Ok((0.5 * terms.iter().sum::<f64>()).min(1.0))
}

/// Order-1 Wasserstein distance with ground cost `‖z - z'‖_r`, solved
/// exactly as a transportation problem.
pub fn wasserstein(p: &DesignDistribution, q: &DesignDistribution, r: f64) -> Result<f64> {
    same_n(p, q)?;
    if r.is_nan() || r < 1.0 {
        return Err(Error::invalid(format!("r must be >= 1, got {}", r)));
    }
    let cells = p.len().saturating_mul(q.len());
    if cells > transport::MAX_CELLS {
        return Err(Error::ProblemTooLarge {
            cells,
            limit: transport::MAX_CELLS,
        });
    }
    let cost: Vec<f64> = p
        .support
        .iter()
        .flat_map(|a| q.support.iter().map(move |b| a.lr_distance(b, r)))
        .collect();
    Ok(transport::solve(&p.probs, &q.probs, &cost)?.cost.max(0.0))
}

/// `C_(r/(r-1))`, reading `r = 1` as `C_(∞)` and `r = ∞` as `C_(1)`.
pub fn conjugate_moment(graph: &InterferenceGraph, r: f64) -> Result<f64> {
    let p = if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    };
    c_moment(graph, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub tv: f64,
    pub r: f64,
    pub w_r: f64,
    pub k_tau: f64,
    /// `2 k_τ δ(P, Q)`
    pub eate_gap_bound_tv: f64,
    /// `2 k_τ n^(-1/r) C_(r/(r-1)) W_r(P, Q)`
    pub eate_gap_bound_wasserstein: f64,
}

pub const DISTANCE_HEADER: &str = "tv,r,w_r,k_tau,bound_tv,bound_wasserstein";

impl DistanceReport {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.tv, self.r, self.w_r, self.k_tau, self.eate_gap_bound_tv, self.eate_gap_bound_wasserstein
        )
    }
}

pub fn eate_gap_bounds(
    p: &DesignDistribution,
    q: &DesignDistribution,
    k_tau: f64,
    graph: &InterferenceGraph,
    r: f64,
) -> Result<DistanceReport> {
    if !(k_tau >= 0.0 && k_tau.is_finite()) {
        return Err(Error::invalid(format!("k_tau must be finite and >= 0, got {}", k_tau)));
    }
    if graph.n() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            found: graph.n(),
        });
    }
    let tv = total_variation(p, q)?;
    let w_r = wasserstein(p, q, r)?;
    let n = p.n as f64;
    let scale = if r.is_infinite() { 1.0 } else { n.powf(-1.0 / r) };
    Ok(DistanceReport {
        tv,
        r,
        w_r,
        k_tau,
        eate_gap_bound_tv: 2.0 * k_tau * tv,
        eate_gap_bound_wasserstein: 2.0 * k_tau * scale * conjugate_moment(graph, r)? * w_r,
    })
}

/// EATE under a distribution, by summing over its support.
pub fn eate_under<O: PotentialOutcomes + ?Sized>(oracle: &O, p: &DesignDistribution) -> Result<f64> {
    let mut total = 0.0;
    for (z, w) in p.iter() {
        total += w * assignment_ate(oracle, z)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    pub max_ratio: f64,
    /// `2 k_τ n^(-1/r) C_(r/(r-1))`
    pub bound: f64,
}

/// Largest `|τ_ATE(z') - τ_ATE(z'')| / ‖z' - z''‖_r` over random pairs.
pub fn lipschitz_check<O: PotentialOutcomes + ?Sized, R: Rng + ?Sized>(
    oracle: &O,
    graph: &InterferenceGraph,
    r: f64,
    k_tau: f64,
    trials: usize,
    rng: &mut R,
) -> Result<LipschitzReport> {
    let n = oracle.n();
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let a = AssignmentVector::from_bools(&(0..n).map(|_| rng.random::<bool>()).collect::<Vec<_>>())?;
        let b = AssignmentVector::from_bools(&(0..n).map(|_| rng.random::<bool>()).collect::<Vec<_>>())?;
        let dist = a.lr_distance(&b, r);
        if dist == 0.0 {
            continue;
        }
        let gap = (assignment_ate(oracle, &a)? - assignment_ate(oracle, &b)?).abs();
        max_ratio = max_ratio.max(gap / dist);
    }
    let scale = if r.is_infinite() { 1.0 } else { (n as f64).powf(-1.0 / r) };
    Ok(LipschitzReport {
        max_ratio,
        bound: 2.0 * k_tau * scale * conjugate_moment(graph, r)?,
    })
}

/// Largest `|τ_ATE(z) - τ_ATE(z with v toggled)| - 2 k_τ c_v / n` over
/// every assignment and unit; nonpositive when the effects are bounded by
/// `k_τ` and the graph is correct.
pub fn single_flip_excess<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    graph: &InterferenceGraph,
    k_tau: f64,
    limit: usize,
) -> Result<f64> {
    let n = oracle.n();
    if n > limit || n > 30 {
        return Err(Error::SupportTooLarge {
            actual: 1u128 << n.min(127),
            limit: 1u128 << limit.min(127),
        });
    }
    let mut worst = f64::NEG_INFINITY;
    for mask in 0..(1u64 << n) {
        let z = AssignmentVector::from_mask(mask, n);
        let base = assignment_ate(oracle, &z)?;
        for v in 0..n {
            let change = (assignment_ate(oracle, &z.toggled(v))? - base).abs();
            let bound = 2.0 * k_tau * graph.out_degree(v) as f64 / n as f64;
            worst = worst.max(change - bound);
        }
    }
    Ok(worst)
}
