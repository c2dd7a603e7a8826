//! Interference quantification: dependence matrix, moment summaries,
//! pair-induced quantities and the spectral radius.

use crate::assignment::AssignmentVector;
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::oracle::PotentialOutcomes;

pub const DEFAULT_DETECTION_LIMIT: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Recovers `I` by toggling every coordinate in every context of the
/// remaining units. Costs `n · 2^(n-1)` pairs of evaluations.
pub fn detect_interference<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    limit: usize,
) -> Result<InterferenceGraph> {
    let n = oracle.n();
    if n > limit || n > 30 {
        return Err(Error::TooLargeForExactDetection { n, limit });
    }
    let mut rows: Vec<Vec<u32>> = (0..n).map(|i| vec![i as u32]).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        let mut hit = vec![false; n];
        for mask in 0..(1u64 << n) {
            if mask >> i & 1 == 1 {
                continue;
            }
            let z0 = AssignmentVector::from_mask(mask, n);
            let y0 = oracle.evaluate(&z0);
            let y1 = oracle.evaluate(&z0.with(i, true));
            for j in 0..n {
                if y0[j] != y1[j] {
                    hit[j] = true;
                }
            }
        }
        row.extend((0..n).filter(|&j| j != i && hit[j]).map(|j| j as u32));
    }
    InterferenceGraph::from_rows(rows)
}

/// Symmetric 0/1 matrix `d_ij`, stored as sorted rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceMatrix {
    rows: Vec<Vec<u32>>,
}

impl DependenceMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    /// `d_i`, the number of units `i` is dependent with (itself included).
    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn d_avg(&self) -> f64 {
        self.nnz() as f64 / self.n() as f64
    }

    pub fn d_max(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn d_rms(&self) -> f64 {
        let s: f64 = self.rows.iter().map(|r| (r.len() * r.len()) as f64).sum();
        (s / self.n() as f64).sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        self.rows
            .iter()
            .map(|r| {
                let mut out = vec![false; n];
                for &j in r {
                    out[j as usize] = true;
                }
                out
            })
            .collect()
    }

    fn multiply(&self, v: &[f64], out: &mut [f64]) {
        for (o, r) in out.iter_mut().zip(&self.rows) {
            *o = r.iter().map(|&j| v[j as usize]).sum();
        }
    }
}

/// `d_ij = 1` iff some `ℓ` interferes with both `i` and `j`.
pub fn dependence_matrix(graph: &InterferenceGraph) -> DependenceMatrix {
    let n = graph.n();
    let columns = graph.columns();
    let mut mark = vec![usize::MAX; n];
    let rows = (0..n)
        .map(|i| {
            let mut row = Vec::new();
            for &l in &columns[i] {
                for &j in graph.row(l as usize) {
                    if mark[j as usize] != i {
                        mark[j as usize] = i;
                        row.push(j);
                    }
                }
            }
            row.sort_unstable();
            row
        })
        .collect();
    DependenceMatrix { rows }
}

/// `C_(p) = (n⁻¹ Σ c_i^p)^(1/p)`, with `C_(∞) = max c_i`.
pub fn c_moment(graph: &InterferenceGraph, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("moment order must be >= 1, got {}", p)));
    }
    let n = graph.n();
    if p.is_infinite() {
        return Ok((0..n).map(|i| graph.out_degree(i)).max().unwrap_or(0) as f64);
    }
    let s: f64 = (0..n).map(|i| (graph.out_degree(i) as f64).powf(p)).sum();
    Ok((s / n as f64).powf(1.0 / p))
}

fn check_pairing(partner: &[usize], n: usize) -> Result<()> {
    if partner.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: partner.len(),
        });
    }
    if !n.is_multiple_of(2) {
        return Err(Error::invalid("pairing needs an even number of units"));
    }
    for (i, &j) in partner.iter().enumerate() {
        if j >= n || j == i || partner[j] != i {
            return Err(Error::invalid(format!(
                "pairing is not a fixed-point-free involution at unit {}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// `(e_avg, R_sum)` for a pairing given as a partner map.
pub fn pair_metrics(graph: &InterferenceGraph, partner: &[usize]) -> Result<(f64, usize)> {
    let n = graph.n();
    check_pairing(partner, n)?;
    let d = dependence_matrix(graph);
    let columns = graph.columns();
    let mut mark = vec![usize::MAX; n];
    let mut e_total = 0usize;
    for i in 0..n {
        // j is reachable when some ℓ interferes with i and ρ(ℓ) interferes with j.
        for &l in &columns[i] {
            for &j in graph.row(partner[l as usize]) {
                let j = j as usize;
                if mark[j] != i {
                    mark[j] = i;
                    if !d.get(i, j) {
                        e_total += 1;
                    }
                }
            }
        }
    }
    let r_sum = (0..n).filter(|&i| graph.get(partner[i], i)).count();
    Ok((e_total as f64 / n as f64, r_sum))
}

/// Largest eigenvalue of `D` by power iteration from the all-ones vector.
pub fn spectral_radius(d: &DependenceMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = d.n();
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut previous = f64::NEG_INFINITY;
    for _ in 0..max_iter {
        d.multiply(&v, &mut w);
        let num: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        let rayleigh = num / den;
        if (rayleigh - previous).abs() < tol {
            return Ok(rayleigh);
        }
        previous = rayleigh;
        // Max-normalization keeps the all-ones vector exact for regular D.
        let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / scale;
        }
    }
    Err(Error::NotConverged(max_iter))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSummary {
    pub n: usize,
    pub d_avg: f64,
    pub d_max: usize,
    pub d_rms: f64,
    pub lambda1: f64,
    /// `(p, C_(p))`, with `p = ∞` allowed.
    pub c_moments: Vec<(f64, f64)>,
    pub e_avg: Option<f64>,
    pub r_sum: Option<usize>,
}

impl InterferenceSummary {
    pub fn from_graph(graph: &InterferenceGraph, moments: &[f64]) -> Result<Self> {
        let d = dependence_matrix(graph);
        let mut summary = Self::from_dependence(&d)?;
        summary.c_moments = moments
            .iter()
            .map(|&p| Ok((p, c_moment(graph, p)?)))
            .collect::<Result<_>>()?;
        Ok(summary)
    }

    pub fn from_dependence(d: &DependenceMatrix) -> Result<Self> {
        Ok(InterferenceSummary {
            n: d.n(),
            d_avg: d.d_avg(),
            d_max: d.d_max(),
            d_rms: d.d_rms(),
            lambda1: spectral_radius(d, DEFAULT_TOL, DEFAULT_MAX_ITER)?,
            c_moments: Vec::new(),
            e_avg: None,
            r_sum: None,
        })
    }

    pub fn with_pairing(mut self, graph: &InterferenceGraph, partner: &[usize]) -> Result<Self> {
        let (e, r) = pair_metrics(graph, partner)?;
        self.e_avg = Some(e);
        self.r_sum = Some(r);
        Ok(self)
    }

    pub fn c_moment(&self, p: f64) -> Option<f64> {
        self.c_moments.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }

    /// No interference at all.
    pub fn identity(n: usize) -> Self {
        InterferenceSummary {
            n,
            d_avg: 1.0,
            d_max: 1,
            d_rms: 1.0,
            lambda1: 1.0,
            c_moments: Vec::new(),
            e_avg: None,
            r_sum: None,
        }
    }

    /// Key-value report, one quantity per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "n,{}\nd_avg,{}\nd_max,{}\nd_rms,{}\nlambda1,{}\n",
            self.n, self.d_avg, self.d_max, self.d_rms, self.lambda1
        );
        for (p, v) in &self.c_moments {
            let label = if p.is_infinite() { "inf".to_string() } else { p.to_string() };
            out.push_str(&format!("C_{},{}\n", label, v));
        }
        if let Some(e) = self.e_avg {
            out.push_str(&format!("e_avg,{}\n", e));
        }
        if let Some(r) = self.r_sum {
            out.push_str(&format!("r_sum,{}\n", r));
        }
        out
    }
}
