//! Horvitz-Thompson and Hájek point estimators, and oracles for the
//! estimands they target.
//!
//! HT with an empty arm is well defined (the empty sum is zero) and
//! returns a number. Hájek divides by the realized weight sum of each
//! arm and fails with [`Error::DegenerateAssignment`] when an arm is
//! empty.

use std::fmt;
use std::str::FromStr;

use crate::assignment::AssignmentVector;
use crate::data::ExperimentData;
use crate::designs::DesignSpec;
use crate::error::{Error, Result};
use crate::metrics::{dependence_matrix, detect_interference, DEFAULT_DETECTION_LIMIT};
use crate::numeric::neumaier_sum;
use crate::oracle::PotentialOutcomes;
use crate::par::map_indexed;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Ht,
    Hajek,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ht => "ht",
            Estimator::Hajek => "hajek",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ht" => Ok(Estimator::Ht),
            "hajek" | "há" | "ha" => Ok(Estimator::Hajek),
            other => Err(Error::invalid(format!("unknown estimator `{}`", other))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub estimator: Estimator,
    pub point: f64,
    /// `μ̂_1 = n⁻¹ Σ Z_i Y_i / p_i`
    pub arm_mean_treated: f64,
    /// `μ̂_0 = n⁻¹ Σ (1 - Z_i) Y_i / (1 - p_i)`
    pub arm_mean_control: f64,
    /// `n̂_1 = Σ Z_i / p_i`
    pub weight_sum_treated: f64,
    /// `n̂_0 = Σ (1 - Z_i) / (1 - p_i)`
    pub weight_sum_control: f64,
}

/// Inverse-probability weighted sums of both arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSums {
    pub n: usize,
    pub outcome_treated: f64,
    pub outcome_control: f64,
    pub weight_treated: f64,
    pub weight_control: f64,
    pub count_treated: usize,
}

impl ArmSums {
    /// Callers guarantee equal lengths.
    pub fn compute(z: &AssignmentVector, y: &[f64], p: &[f64]) -> Self {
        let mut s = ArmSums {
            n: z.len(),
            outcome_treated: 0.0,
            outcome_control: 0.0,
            weight_treated: 0.0,
            weight_control: 0.0,
            count_treated: 0,
        };
        for ((&zi, &yi), &pi) in z.bits().iter().zip(y).zip(p) {
            if zi == 1 {
                let w = 1.0 / pi;
                s.outcome_treated += yi * w;
                s.weight_treated += w;
                s.count_treated += 1;
            } else {
                let w = 1.0 / (1.0 - pi);
                s.outcome_control += yi * w;
                s.weight_control += w;
            }
        }
        s
    }

    fn result(&self, estimator: Estimator, point: f64) -> EstimateResult {
        let n = self.n as f64;
        EstimateResult {
            estimator,
            point,
            arm_mean_treated: self.outcome_treated / n,
            arm_mean_control: self.outcome_control / n,
            weight_sum_treated: self.weight_treated,
            weight_sum_control: self.weight_control,
        }
    }

    pub fn ht(&self) -> EstimateResult {
        let n = self.n as f64;
        self.result(Estimator::Ht, self.outcome_treated / n - self.outcome_control / n)
    }

    pub fn hajek(&self) -> Result<EstimateResult> {
        if self.count_treated == 0 {
            return Err(Error::DegenerateAssignment {
                estimator: "hajek",
                arm: "treated",
            });
        }
        if self.count_treated == self.n {
            return Err(Error::DegenerateAssignment {
                estimator: "hajek",
                arm: "control",
            });
        }
        let point =
            self.outcome_treated / self.weight_treated - self.outcome_control / self.weight_control;
        Ok(self.result(Estimator::Hajek, point))
    }

    pub fn estimate(&self, estimator: Estimator) -> Result<EstimateResult> {
        match estimator {
            Estimator::Ht => Ok(self.ht()),
            Estimator::Hajek => self.hajek(),
        }
    }
}

pub fn ht_estimate(data: &ExperimentData) -> EstimateResult {
    ArmSums::compute(data.z(), data.y(), data.p()).ht()
}

pub fn hajek_estimate(data: &ExperimentData) -> Result<EstimateResult> {
    ArmSums::compute(data.z(), data.y(), data.p()).hajek()
}

pub fn estimate(data: &ExperimentData, estimator: Estimator) -> Result<EstimateResult> {
    ArmSums::compute(data.z(), data.y(), data.p()).estimate(estimator)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimandMode {
    /// Full support enumeration, refusing supports above `limit`.
    Exact { limit: usize },
    /// Sampled assignments from the given seed.
    MonteCarlo { reps: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimandMethod {
    Exact,
    MonteCarlo {
        reps: usize,
        eate_se: f64,
        adse_se: f64,
        tau_msq_se: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimandValues {
    pub eate: f64,
    pub adse: f64,
    pub tau_msq: f64,
    pub method: EstimandMethod,
}

/// Running sums for one batch of draws (or one weighted support).
#[derive(Clone)]
struct Accumulator {
    weight: f64,
    ate: f64,
    ate_sq: f64,
    tau: Vec<f64>,
    y1: Vec<f64>,
    w1: Vec<f64>,
    y0: Vec<f64>,
    w0: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            weight: 0.0,
            ate: 0.0,
            ate_sq: 0.0,
            tau: vec![0.0; n],
            y1: vec![0.0; n],
            w1: vec![0.0; n],
            y0: vec![0.0; n],
            w0: vec![0.0; n],
        }
    }

    fn add<O: PotentialOutcomes + ?Sized>(&mut self, oracle: &O, z: &AssignmentVector, w: f64) {
        let y = oracle.evaluate(z);
        let tau = oracle.unit_effects(z);
        let ate = neumaier_sum(tau.iter().copied()) / tau.len() as f64;
        self.weight += w;
        self.ate += w * ate;
        self.ate_sq += w * ate * ate;
        for i in 0..y.len() {
            self.tau[i] += w * tau[i];
            if z.is_treated(i) {
                self.y1[i] += w * y[i];
                self.w1[i] += w;
            } else {
                self.y0[i] += w * y[i];
                self.w0[i] += w;
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.weight += other.weight;
        self.ate += other.ate;
        self.ate_sq += other.ate_sq;
        for (dst, src) in [
            (&mut self.tau, &other.tau),
            (&mut self.y1, &other.y1),
            (&mut self.w1, &other.w1),
            (&mut self.y0, &other.y0),
            (&mut self.w0, &other.w0),
        ] {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += b;
            }
        }
    }

    fn eate(&self) -> f64 {
        self.ate / self.weight
    }

    fn adse(&self) -> Result<f64> {
        let n = self.tau.len();
        let mut terms = Vec::with_capacity(n);
        for i in 0..n {
            if self.w1[i] == 0.0 || self.w0[i] == 0.0 {
                return Err(Error::invalid(format!(
                    "unit {} was never observed in both arms",
                    i + 1
                )));
            }
            terms.push(self.y1[i] / self.w1[i] - self.y0[i] / self.w0[i]);
        }
        Ok(neumaier_sum(terms) / n as f64)
    }

    fn tau_msq(&self) -> f64 {
        let n = self.tau.len();
        neumaier_sum(self.tau.iter().map(|t| (t / self.weight).powi(2))) / n as f64
    }
}

const MC_BATCHES: usize = 64;

/// EATE, ADSE and τ_msq in one pass over the support or the draws.
///
/// Monte Carlo standard errors: per-draw for EATE; batch means over
/// 64 batches for ADSE and τ_msq, which are ratios and squares of means.
pub fn estimands<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    design: &DesignSpec,
    mode: EstimandMode,
) -> Result<EstimandValues> {
    let n = oracle.n();
    if design.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: design.n(),
        });
    }
    match mode {
        EstimandMode::Exact { limit } => {
            let support = design.enumerate_support(limit)?;
            let mut acc = Accumulator::new(n);
            for (z, p) in &support {
                acc.add(oracle, z, *p);
            }
            Ok(EstimandValues {
                eate: acc.eate(),
                adse: acc.adse()?,
                tau_msq: acc.tau_msq(),
                method: EstimandMethod::Exact,
            })
        }
        EstimandMode::MonteCarlo { reps, seed } => {
            if reps < 2 {
                return Err(Error::invalid("Monte Carlo estimands need at least 2 draws"));
            }
            let batches = MC_BATCHES.min(reps);
            let parts: Vec<Accumulator> = map_indexed(batches, |b| {
                let mut acc = Accumulator::new(n);
                let lo = b * reps / batches;
                let hi = (b + 1) * reps / batches;
                for rep in lo..hi {
                    let z = design.sample(&mut stream(seed, 0, rep as u64));
                    acc.add(oracle, &z, 1.0);
                }
                acc
            });
            let mut total = Accumulator::new(n);
            for part in &parts {
                total.merge(part);
            }
            let r = reps as f64;
            let eate = total.eate();
            let draw_var = (total.ate_sq / r - eate * eate).max(0.0) * r / (r - 1.0);
            let batch_se = |values: Vec<f64>| {
                let (_, se) = crate::numeric::mean_and_se(&values);
                se
            };
            let adse_batches = parts.iter().map(|p| p.adse()).collect::<Result<Vec<_>>>();
            let adse_se = adse_batches.map(batch_se).unwrap_or(f64::NAN);
            let tau_msq_se = batch_se(parts.iter().map(Accumulator::tau_msq).collect());
            Ok(EstimandValues {
                eate,
                adse: total.adse()?,
                tau_msq: total.tau_msq(),
                method: EstimandMethod::MonteCarlo {
                    reps,
                    eate_se: (draw_var / r).sqrt(),
                    adse_se,
                    tau_msq_se,
                },
            })
        }
    }
}

pub fn eate<O: PotentialOutcomes + ?Sized>(oracle: &O, design: &DesignSpec, mode: EstimandMode) -> Result<f64> {
    estimands(oracle, design, mode).map(|v| v.eate)
}

pub fn adse<O: PotentialOutcomes + ?Sized>(oracle: &O, design: &DesignSpec, mode: EstimandMode) -> Result<f64> {
    estimands(oracle, design, mode).map(|v| v.adse)
}

pub fn tau_msq<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    design: &DesignSpec,
    mode: EstimandMode,
) -> Result<f64> {
    estimands(oracle, design, mode).map(|v| v.tau_msq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpilloverTerms {
    /// `ξ_ij(1)`
    pub xi_treated: f64,
    /// `ξ_ij(0)`
    pub xi_control: f64,
    /// `ξ̆_ij = (1 - p_i) ξ_ij(1) + p_i ξ_ij(0)`
    pub xi_breve: f64,
    /// `Y̆_i = (1 - p_i) E[Y_i | Z_i = 1] + p_i E[Y_i | Z_i = 0]`
    pub y_breve: f64,
}

fn require_bernoulli(design: &DesignSpec) -> Result<()> {
    if design.is_bernoulli() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "spillover terms are defined for Bernoulli designs, got {}",
            design.kind_name()
        )))
    }
}

/// Spillover from `j` to `i`, by exact enumeration of a Bernoulli design.
pub fn spillover_terms<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    design: &DesignSpec,
    i: usize,
    j: usize,
    limit: usize,
) -> Result<SpilloverTerms> {
    require_bernoulli(design)?;
    let n = oracle.n();
    for u in [i, j] {
        if u >= n {
            return Err(Error::IndexOutOfRange { index: u, n });
        }
    }
    let support = design.enumerate_support(limit)?;
    Ok(spillover_from_support(oracle, &support, design.marginal_prob(i)?, i, j))
}

fn spillover_from_support<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    support: &[(AssignmentVector, f64)],
    pi: f64,
    i: usize,
    j: usize,
) -> SpilloverTerms {
    let mut xi = [0.0; 2];
    let mut y_arm = [0.0; 2];
    for (z, p) in support {
        for a in [0usize, 1] {
            let base = z.with(i, a == 1);
            xi[a] += p * (oracle.outcome(i, &base.with(j, true)) - oracle.outcome(i, &base.with(j, false)));
            // Under a product design, E[Y_i | Z_i = a] = E[y_i(a; Z_{-i})].
            y_arm[a] += p * oracle.outcome(i, &base);
        }
    }
    SpilloverTerms {
        xi_treated: xi[1],
        xi_control: xi[0],
        xi_breve: (1.0 - pi) * xi[1] + pi * xi[0],
        y_breve: (1.0 - pi) * y_arm[1] + pi * y_arm[0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceDecomposition {
    pub tau_msq: f64,
    pub b1: f64,
    pub b2: f64,
    pub d_avg: f64,
}

/// `τ_msq`, `B1` and `B2` by exact enumeration of a Bernoulli design.
/// The graph defining `d_avg` is the declared one, or detected exactly.
pub fn variance_limit_decomposition<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    design: &DesignSpec,
    limit: usize,
) -> Result<VarianceDecomposition> {
    require_bernoulli(design)?;
    let n = oracle.n();
    let d_avg = match oracle.declared_graph() {
        Some(g) => dependence_matrix(g).d_avg(),
        None => dependence_matrix(&detect_interference(oracle, DEFAULT_DETECTION_LIMIT)?).d_avg(),
    };
    let support = design.enumerate_support(limit)?;
    let probs = design.marginal_probs();
    let tau_msq = estimands(oracle, design, EstimandMode::Exact { limit })?.tau_msq;
    let ys: Vec<Vec<f64>> = support.iter().map(|(z, _)| oracle.evaluate(z)).collect();

    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let t_ij = spillover_from_support(oracle, &support, probs[i], i, j);
            let t_ji = spillover_from_support(oracle, &support, probs[j], j, i);
            s1.push(t_ij.xi_breve * t_ji.xi_breve + 2.0 * t_ji.y_breve * (t_ij.xi_treated - t_ij.xi_control));

            for a in 0..2u8 {
                for b in 0..2u8 {
                    let (mut w, mut mi, mut mj, mut mij) = (0.0, 0.0, 0.0, 0.0);
                    for ((z, p), y) in support.iter().zip(&ys) {
                        if z.get(i) == a && z.get(j) == b {
                            w += p;
                            mi += p * y[i];
                            mj += p * y[j];
                            mij += p * y[i] * y[j];
                        }
                    }
                    let cov = mij / w - (mi / w) * (mj / w);
                    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    s2.push(sign * cov);
                }
            }
        }
    }
    let scale = 1.0 / (n as f64 * d_avg);
    Ok(VarianceDecomposition {
        tau_msq,
        b1: scale * neumaier_sum(s1),
        b2: scale * neumaier_sum(s2),
        d_avg,
    })
}
