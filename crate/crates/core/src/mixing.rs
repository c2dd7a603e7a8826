//! Exact alpha-mixing coefficients between projected treatment vectors.
//!
//! `Z̃_i` keeps the treatments of the units that interfere with `i`
//! (itself included) and zeroes the rest; `Z̃_{-i}` additionally drops
//! `Z_i`. All probabilities come from the enumerated design support.

use std::collections::HashMap;

use crate::assignment::AssignmentVector;
use crate::data::RegularityConstants;
use crate::designs::DesignSpec;
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::metrics::dependence_matrix;

/// Largest number of atoms on the smaller side of a joint table; the
/// event scan visits `2^limit` subsets.
pub const DEFAULT_ATOM_LIMIT: usize = 16;
/// Largest design support enumerated.
pub const SUPPORT_LIMIT: usize = 1 << 20;

const FACTOR_TOL: f64 = 1e-15;

/// `α(X, Y)` for a joint probability table `joint[x][y]`.
pub fn alpha_from_joint(joint: &[Vec<f64>], limit: usize) -> Result<f64> {
    let rows = joint.len();
    let cols = joint.first().map_or(0, Vec::len);
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..cols).map(|b| joint.iter().map(|r| r[b]).sum()).collect();
    let independent = joint
        .iter()
        .zip(&px)
        .all(|(r, &pa)| r.iter().zip(&py).all(|(&p, &pb)| (p - pa * pb).abs() <= FACTOR_TOL));
    if independent {
        return Ok(0.0);
    }
    if rows <= cols {
        scan_events(joint, &px, &py, limit)
    } else {
        let transposed: Vec<Vec<f64>> = (0..cols).map(|b| joint.iter().map(|r| r[b]).collect()).collect();
        scan_events(&transposed, &py, &px, limit)
    }
}

/// For each event `A` on the row side the best column event is the set
/// of columns with positive discrepancy; complements of `A` cover the
/// negative side. Subsets are walked in Gray-code order.
fn scan_events(joint: &[Vec<f64>], px: &[f64], py: &[f64], limit: usize) -> Result<f64> {
    let m = joint.len();
    if m > limit || m >= 63 {
        return Err(Error::SupportTooLarge {
            actual: m as u128,
            limit: limit as u128,
        });
    }
    let mut pab = vec![0.0; py.len()];
    let mut pa = 0.0;
    let mut best: f64 = 0.0;
    let mut gray = 0u64;
    for step in 1u64..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let sign = if gray >> bit & 1 == 1 { 1.0 } else { -1.0 };
        pa += sign * px[bit];
        for (acc, &p) in pab.iter_mut().zip(&joint[bit]) {
            *acc += sign * p;
        }
        let gain: f64 = pab
            .iter()
            .zip(py)
            .map(|(&p, &pb)| (p - pa * pb).max(0.0))
            .sum();
        best = best.max(gain);
    }
    Ok(best.min(0.25))
}

/// Atom index of every support point under a coordinate projection.
struct Projection {
    ids: Vec<usize>,
    atoms: usize,
}

fn project(support: &[(AssignmentVector, f64)], coords: &[usize]) -> Projection {
    let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
    let ids = support
        .iter()
        .map(|(z, _)| {
            let key: Vec<u8> = coords.iter().map(|&c| z.get(c)).collect();
            let next = index.len();
            *index.entry(key).or_insert(next)
        })
        .collect();
    Projection {
        ids,
        atoms: index.len(),
    }
}

fn joint_table(support: &[(AssignmentVector, f64)], a: &Projection, b: &Projection) -> Vec<Vec<f64>> {
    let mut joint = vec![vec![0.0; b.atoms]; a.atoms];
    for ((&x, &y), (_, p)) in a.ids.iter().zip(&b.ids).zip(support) {
        joint[x][y] += p;
    }
    joint
}

fn in_neighbours(graph: &InterferenceGraph, i: usize, keep_self: bool) -> Vec<usize> {
    graph.columns()[i]
        .iter()
        .map(|&l| l as usize)
        .filter(|&l| keep_self || l != i)
        .collect()
}

fn check_units(graph: &InterferenceGraph, design: &DesignSpec, units: &[usize]) -> Result<()> {
    let n = graph.n();
    if design.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: design.n(),
        });
    }
    match units.iter().find(|&&u| u >= n) {
        Some(&index) => Err(Error::IndexOutOfRange { index, n }),
        None => Ok(()),
    }
}

/// `α(Z̃_i, Z̃_j)`.
pub fn alpha_pair(
    design: &DesignSpec,
    graph: &InterferenceGraph,
    i: usize,
    j: usize,
    limit: usize,
) -> Result<f64> {
    check_units(graph, design, &[i, j])?;
    let support = design.enumerate_support(SUPPORT_LIMIT)?;
    let a = project(&support, &in_neighbours(graph, i, true));
    let b = project(&support, &in_neighbours(graph, j, true));
    alpha_from_joint(&joint_table(&support, &a, &b), limit)
}

/// `α(Z_i, Z̃_{-i})`.
pub fn alpha_internal(design: &DesignSpec, graph: &InterferenceGraph, i: usize, limit: usize) -> Result<f64> {
    check_units(graph, design, &[i])?;
    let support = design.enumerate_support(SUPPORT_LIMIT)?;
    let a = project(&support, &[i]);
    let b = project(&support, &in_neighbours(graph, i, false));
    alpha_from_joint(&joint_table(&support, &a, &b), limit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub alpha_ext: f64,
    pub alpha_int: f64,
    /// `(i, j, α(Z̃_i, Z̃_j))` for every ordered pair with `d_ij = 0`.
    pub pair_alphas: Vec<(usize, usize, f64)>,
    /// `α(Z_i, Z̃_{-i})` by unit.
    pub unit_alphas: Vec<f64>,
    pub q: f64,
    pub s: f64,
}

impl MixingReport {
    /// `i,j,alpha` rows (one-based) followed by the two summary lines.
    pub fn to_text(&self) -> String {
        let mut out = String::from("i,j,alpha\n");
        for (i, j, a) in &self.pair_alphas {
            out.push_str(&format!("{},{},{}\n", i + 1, j + 1, a));
        }
        out.push_str(&format!("alpha_ext,{}\nalpha_int,{}\n", self.alpha_ext, self.alpha_int));
        out
    }
}

/// `x^e` with `0^0 = 0`.
fn power(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

fn exponent(num_offset: f64, v: f64) -> f64 {
    if v.is_infinite() {
        1.0
    } else {
        (v - num_offset) / v
    }
}

pub fn mixing_coefficients(
    design: &DesignSpec,
    graph: &InterferenceGraph,
    constants: &RegularityConstants,
    limit: usize,
) -> Result<MixingReport> {
    let n = graph.n();
    check_units(graph, design, &[])?;
    let support = design.enumerate_support(SUPPORT_LIMIT)?;
    let d = dependence_matrix(graph);
    let columns = graph.columns();
    let tilde: Vec<Projection> = (0..n)
        .map(|i| {
            let coords: Vec<usize> = columns[i].iter().map(|&l| l as usize).collect();
            project(&support, &coords)
        })
        .collect();

    let mut pair_alphas = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if d.get(i, j) {
                continue;
            }
            let a = alpha_from_joint(&joint_table(&support, &tilde[i], &tilde[j]), limit)?;
            pair_alphas.push((i, j, a));
        }
    }
    let unit_alphas = (0..n)
        .map(|i| {
            let own = project(&support, &[i]);
            let rest: Vec<usize> = columns[i].iter().map(|&l| l as usize).filter(|&l| l != i).collect();
            let rest = project(&support, &rest);
            alpha_from_joint(&joint_table(&support, &own, &rest), limit)
        })
        .collect::<Result<Vec<f64>>>()?;

    let eq = exponent(2.0, constants.q);
    let es = exponent(1.0, constants.s);
    let alpha_ext = pair_alphas.iter().map(|(_, _, a)| power(*a, eq)).sum::<f64>() / n as f64;
    let alpha_int = unit_alphas.iter().map(|a| power(*a, es)).sum();
    Ok(MixingReport {
        alpha_ext,
        alpha_int,
        pair_alphas,
        unit_alphas,
        q: constants.q,
        s: constants.s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUARTER: f64 = 0.25;

    #[test]
    fn anticorrelated_bits() {
        let joint = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert_eq!(alpha_from_joint(&joint, 16).unwrap(), QUARTER);
        let paired = DesignSpec::paired(vec![1, 0]).unwrap();
        let id = InterferenceGraph::identity(2);
        assert_eq!(alpha_pair(&paired, &id, 0, 1, 16).unwrap(), QUARTER);
        let complete = DesignSpec::complete(2, 1).unwrap();
        assert_eq!(alpha_pair(&complete, &id, 0, 1, 16).unwrap(), QUARTER);
    }

    #[test]
    fn independent_tables_are_zero() {
        let joint = vec![vec![0.06, 0.14], vec![0.24, 0.56]];
        assert_eq!(alpha_from_joint(&joint, 16).unwrap(), 0.0);
        let b = DesignSpec::bernoulli_uniform(4, 0.3).unwrap();
        let g = InterferenceGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(alpha_pair(&b, &g, 1, 3, 16).unwrap(), 0.0);
        assert_eq!(alpha_internal(&b, &g, 1, 16).unwrap(), 0.0);
    }

    #[test]
    fn within_pair_interference() {
        let paired = DesignSpec::paired(vec![1, 0]).unwrap();
        let g = InterferenceGraph::from_edges(2, [(1, 0)]).unwrap();
        assert_eq!(alpha_internal(&paired, &g, 0, 16).unwrap(), QUARTER);
        assert_eq!(alpha_internal(&paired, &g, 1, 16).unwrap(), 0.0);
    }

    #[test]
    fn complete_four_two() {
        let design = DesignSpec::complete(4, 2).unwrap();
        let r = mixing_coefficients(
            &design,
            &InterferenceGraph::identity(4),
            &RegularityConstants::default(),
            16,
        )
        .unwrap();
        assert_eq!(r.alpha_int, 0.0);
        for (_, _, a) in &r.pair_alphas {
            assert!((a - 1.0 / 12.0).abs() < 1e-15);
        }
        assert!((r.alpha_ext - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_to_the_zero() {
        assert_eq!(power(0.0, 0.0), 0.0);
        assert_eq!(power(0.2, 0.0), 1.0);
        assert_eq!(exponent(2.0, f64::INFINITY), 1.0);
        assert_eq!(exponent(2.0, 4.0), 0.5);
    }

    #[test]
    fn too_many_atoms() {
        // Equal treatments: full dependence, nothing factorizes.
        let n = 4;
        let support = vec![
            (AssignmentVector::zeros(n), 0.5),
            (AssignmentVector::new(vec![1; n]).unwrap(), 0.5),
        ];
        let design = DesignSpec::explicit(n, support).unwrap();
        let g = InterferenceGraph::identity(n);
        assert_eq!(alpha_pair(&design, &g, 0, 1, 16).unwrap(), QUARTER);
        let big = [vec![0.1, 0.0, 0.2], vec![0.0, 0.3, 0.0], vec![0.2, 0.0, 0.2]];
        assert!(matches!(alpha_from_joint(&big, 2), Err(Error::SupportTooLarge { .. })));
    }
}
