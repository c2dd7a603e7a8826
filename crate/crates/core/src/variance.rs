//! Conventional variance estimator, its interference-inflated variants
//! and the intervals built from them.

use std::fmt;
use std::str::FromStr;

use crate::data::ExperimentData;
use crate::designs::DesignSpec;
use crate::error::{Error, Result};
use crate::estimators::{ArmSums, EstimandMode};
use crate::metrics::InterferenceSummary;
use crate::numeric::neumaier_sum;
use crate::oracle::PotentialOutcomes;
use crate::par::map_indexed;
use crate::rng::stream;

/// `V̂_ber = n⁻² Σ Z_i Y_i² / p_i² + n⁻² Σ (1 - Z_i) Y_i² / (1 - p_i)²`.
pub fn var_est_conventional(data: &ExperimentData) -> f64 {
    conventional_from_parts(data.z().bits(), data.y(), data.p())
}

pub(crate) fn conventional_from_parts(z: &[u8], y: &[f64], p: &[f64]) -> f64 {
    let n = z.len() as f64;
    let mut total = 0.0;
    for ((&zi, &yi), &pi) in z.iter().zip(y).zip(p) {
        let w = if zi == 1 { pi } else { 1.0 - pi };
        total += (yi / w) * (yi / w);
    }
    total / (n * n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inflation {
    /// Factor 1: the conventional estimator itself.
    None,
    /// `d_avg`
    Avg,
    /// `d_max`
    Max,
    /// Spectral radius `λ1`.
    Sr,
    Custom(f64),
}

impl Inflation {
    pub fn name(&self) -> &'static str {
        match self {
            Inflation::None => "ber",
            Inflation::Avg => "avg",
            Inflation::Max => "max",
            Inflation::Sr => "sr",
            Inflation::Custom(_) => "custom",
        }
    }

    /// Factor for this kind; `None` when the summary is needed but absent.
    pub fn factor(&self, summary: Option<&InterferenceSummary>) -> Result<f64> {
        match (self, summary) {
            (Inflation::None, _) => Ok(1.0),
            (Inflation::Custom(f), _) => Ok(*f),
            (Inflation::Avg, Some(s)) => Ok(s.d_avg),
            (Inflation::Max, Some(s)) => Ok(s.d_max as f64),
            (Inflation::Sr, Some(s)) => Ok(s.lambda1),
            (Inflation::Avg, None) => Err(Error::MissingSummaryField("d_avg")),
            (Inflation::Max, None) => Err(Error::MissingSummaryField("d_max")),
            (Inflation::Sr, None) => Err(Error::MissingSummaryField("lambda1")),
        }
    }
}

impl fmt::Display for Inflation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inflation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ber" | "none" => Ok(Inflation::None),
            "avg" => Ok(Inflation::Avg),
            "max" => Ok(Inflation::Max),
            "sr" => Ok(Inflation::Sr),
            other => Err(Error::invalid(format!("unknown variance kind `{}`", other))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub v_ber: f64,
    pub inflation: Inflation,
    pub factor: f64,
    pub value: f64,
}

pub fn inflate(v_ber: f64, summary: Option<&InterferenceSummary>, kind: Inflation) -> Result<VarianceEstimate> {
    let factor = kind.factor(summary)?;
    if !(factor.is_finite() && factor >= 0.0) {
        return Err(Error::invalid(format!("inflation factor must be finite and >= 0, got {}", factor)));
    }
    Ok(VarianceEstimate {
        v_ber,
        inflation: kind,
        factor,
        value: factor * v_ber,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    Chebyshev,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub alpha: f64,
    pub method: IntervalMethod,
}

impl ConfidenceInterval {
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0,1), got {}", alpha)))
    }
}

/// Half-width `sqrt(V / α)`.
pub fn chebyshev_interval(point: f64, variance: &VarianceEstimate, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    Ok(ConfidenceInterval {
        center: point,
        half_width: (variance.value / alpha).sqrt(),
        alpha,
        method: IntervalMethod::Chebyshev,
    })
}

/// Half-width `z_{1-α/2} sqrt(V)`; for comparison with the Chebyshev
/// interval, not backed by any coverage guarantee here.
pub fn normal_interval(point: f64, variance: &VarianceEstimate, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    Ok(ConfidenceInterval {
        center: point,
        half_width: normal_upper_quantile(alpha / 2.0) * variance.value.sqrt(),
        alpha,
        method: IntervalMethod::Normal,
    })
}

/// `x` with `P(N(0,1) > x) = tail`, by bisection on `erfc`.
fn normal_upper_quantile(tail: f64) -> f64 {
    let upper = |x: f64| 0.5 * libm::erfc(x / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One row of the interval table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRow {
    pub estimator: &'static str,
    pub point: f64,
    pub variance: VarianceEstimate,
    pub interval: ConfidenceInterval,
}

pub const INTERVAL_HEADER: &str = "estimator,point,v_ber,factor_kind,factor,value,alpha,lo,hi";

impl IntervalRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.estimator,
            self.point,
            self.variance.v_ber,
            self.variance.inflation.name(),
            self.variance.factor,
            self.variance.value,
            self.interval.alpha,
            self.interval.lo(),
            self.interval.hi()
        )
    }
}

/// One Chebyshev interval per supplied factor.
pub fn sensitivity_sweep(
    estimator: &'static str,
    point: f64,
    v_ber: f64,
    factors: &[f64],
    alpha: f64,
) -> Result<Vec<IntervalRow>> {
    factors
        .iter()
        .map(|&f| {
            let variance = inflate(v_ber, None, Inflation::Custom(f))?;
            Ok(IntervalRow {
                estimator,
                point,
                variance,
                interval: chebyshev_interval(point, &variance, alpha)?,
            })
        })
        .collect()
}

/// Design moments of the HT estimator and of `V̂_ber`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HtMoments {
    pub mean: f64,
    pub variance: f64,
    pub expected_v_ber: f64,
    /// Standard error of `variance`; `None` for exact enumeration.
    pub variance_se: Option<f64>,
}

/// `Var(τ̂_HT)` under the design, plus `E[τ̂_HT]` and `E[V̂_ber]`.
pub fn true_variance<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    design: &DesignSpec,
    mode: EstimandMode,
) -> Result<HtMoments> {
    let n = oracle.n();
    if design.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: design.n(),
        });
    }
    let p = design.marginal_probs();
    let draw = |z: &crate::AssignmentVector| {
        let y = oracle.evaluate(z);
        let ht = ArmSums::compute(z, &y, &p).ht().point;
        (ht, conventional_from_parts(z.bits(), &y, &p))
    };
    match mode {
        EstimandMode::Exact { limit } => {
            let support = design.enumerate_support(limit)?;
            let values: Vec<(f64, f64, f64)> = support
                .iter()
                .map(|(z, w)| {
                    let (ht, v) = draw(z);
                    (*w, ht, v)
                })
                .collect();
            let mean = neumaier_sum(values.iter().map(|(w, ht, _)| w * ht));
            let variance = neumaier_sum(values.iter().map(|(w, ht, _)| w * (ht - mean) * (ht - mean)));
            let expected_v_ber = neumaier_sum(values.iter().map(|(w, _, v)| w * v));
            Ok(HtMoments {
                mean,
                variance,
                expected_v_ber,
                variance_se: None,
            })
        }
        EstimandMode::MonteCarlo { reps, seed } => {
            if reps < 2 {
                return Err(Error::invalid("Monte Carlo variance needs at least 2 draws"));
            }
            let values = map_indexed(reps, |r| draw(&design.sample(&mut stream(seed, 0, r as u64))));
            let r = reps as f64;
            let mean = neumaier_sum(values.iter().map(|v| v.0)) / r;
            let dev: Vec<f64> = values.iter().map(|v| (v.0 - mean) * (v.0 - mean)).collect();
            let variance = neumaier_sum(dev.iter().copied()) / (r - 1.0);
            let (_, se) = crate::numeric::mean_and_se(&dev);
            Ok(HtMoments {
                mean,
                variance,
                expected_v_ber: neumaier_sum(values.iter().map(|v| v.1)) / r,
                variance_se: Some(se),
            })
        }
    }
}
