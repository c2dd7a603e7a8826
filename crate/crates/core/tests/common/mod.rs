//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use spillover::{AssignmentVector, FnOracle, InterferenceGraph};

/// Each off-diagonal `I_ij` set independently with probability `density`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> InterferenceGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    InterferenceGraph::from_edges(n, edges).unwrap()
}

/// A uniformly random perfect matching as a partner map.
pub fn random_pairing<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut partner = vec![0; n];
    for pair in order.chunks(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    partner
}

/// Integer interference counts from dense matrix products.
pub struct DenseCounts {
    /// `Σ_ij d_ij`
    pub d_total: u64,
    pub d_row_max: u64,
    /// `c_i = Σ_j I_ij`
    pub c: Vec<u64>,
    /// `Σ_ij e_ij` when a pairing is given.
    pub e_total: Option<u64>,
    pub r_sum: Option<u64>,
}

pub fn dense_counts(graph: &InterferenceGraph, partner: Option<&[usize]>) -> DenseCounts {
    let n = graph.n();
    let i_mat = DMatrix::<u64>::from_fn(n, n, |i, j| graph.get(i, j) as u64);
    // d_ij = 1 iff Σ_ℓ I_ℓi I_ℓj > 0.
    let d = i_mat.transpose() * &i_mat;
    let d_bool = d.map(|v| (v > 0) as u64);
    let d_total = d_bool.sum();
    let d_row_max = (0..n).map(|i| d_bool.row(i).sum()).max().unwrap_or(0);
    let c = (0..n).map(|i| i_mat.row(i).sum()).collect();
    let (e_total, r_sum) = match partner {
        Some(rho) => {
            let p = DMatrix::<u64>::from_fn(n, n, |a, b| (rho[a] == b) as u64);
            // Σ_ℓ I_ℓi I_ρ(ℓ)j = (Iᵀ P I)_ij.
            let reach = i_mat.transpose() * p * &i_mat;
            let mut e = 0;
            for i in 0..n {
                for j in 0..n {
                    if reach[(i, j)] > 0 && d_bool[(i, j)] == 0 {
                        e += 1;
                    }
                }
            }
            let r = (0..n).filter(|&i| graph.get(rho[i], i)).count() as u64;
            (Some(e), Some(r))
        }
        None => (None, None),
    };
    DenseCounts {
        d_total,
        d_row_max,
        c,
        e_total,
        r_sum,
    }
}

/// Largest eigenvalue of the dense dependence matrix.
pub fn dense_spectral_radius(graph: &InterferenceGraph) -> f64 {
    let n = graph.n();
    let i_mat = DMatrix::<f64>::from_fn(n, n, |i, j| graph.get(i, j) as u8 as f64);
    let d = (i_mat.transpose() * &i_mat).map(|v| if v > 0.0 { 1.0 } else { 0.0 });
    d.symmetric_eigenvalues().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
}

/// Outcomes drawn uniformly from [-3, 3] for every assignment: every
/// unit may interfere with every other.
pub fn random_table_oracle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FnOracle {
    let table = (0..1usize << n)
        .map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
        .collect();
    FnOracle::from_table(n, table).unwrap()
}

/// `y_i = α_i + β_i z_i + γ_i z_ρ(i)`; `γ = 0` gives no interference.
pub fn pair_spillover_oracle(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>) -> FnOracle {
    let n = alpha.len();
    FnOracle::new(n, move |z| {
        (0..n)
            .map(|i| alpha[i] + beta[i] * z.value(i) + gamma[i] * z.value(i ^ 1))
            .collect()
    })
    .unwrap()
}

/// HT written out from its definition, independent of the library's arm sums.
pub fn ht_by_hand(z: &AssignmentVector, y: &[f64], p: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mut total = 0.0;
    for i in 0..y.len() {
        if z.is_treated(i) {
            total += y[i] / p[i];
        } else {
            total -= y[i] / (1.0 - p[i]);
        }
    }
    total / n
}

/// `E[|S - n/2|^(1/r)]` with `S ~ Bin(n, 1/2)`: the exact order-1
/// Wasserstein distance under the `L_r` metric between Bernoulli(1/2) and
/// complete randomization with `n/2` treated. Any coupling flips at least
/// `|S - n/2|` coordinates, and flipping exactly that many is feasible.
pub fn w_bernoulli_complete(n: u64, r: f64) -> f64 {
    let half = n as f64 / 2.0;
    let total = 2f64.powi(n as i32);
    let mut acc = 0.0;
    let mut binom = 1.0;
    for s in 0..=n {
        acc += binom / total * (s as f64 - half).abs().powf(1.0 / r);
        binom = binom * (n - s) as f64 / (s + 1) as f64;
    }
    acc
}
