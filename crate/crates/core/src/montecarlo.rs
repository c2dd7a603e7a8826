//! Replication engine for the simulation study and its aggregation.
//!
//! Every `(cell, rep)` pair draws from its own stream keyed by the
//! master seed, a stable hash of the cell and the replication index, so
//! records are identical for any worker count or grid composition.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::designs::DesignSpec;
use crate::dgp::{DgpInstance, DgpKind, InterferenceSets, ScaleRule};
use crate::error::{Error, Result};
use crate::estimators::{ArmSums, Estimator};
use crate::metrics::InterferenceSummary;
use crate::numeric::neumaier_sum;
use crate::oracle::PotentialOutcomes;
use crate::par::{map_indexed, with_workers};
use crate::rng::{mix64, stream};
use crate::variance::{chebyshev_interval, conventional_from_parts, inflate, Inflation};

pub const SCHEMA_VERSION: u32 = 1;

pub const SUMMARY_HEADER: &str =
    "dgp,design,n,a_rule,estimator,bias,sd,rmse,rmse_norm,cov_ber,cov_avg,cov_max,cov_sr,reps";

pub const REPS_HEADER: &str = "dgp,design,n,a_rule,rep,eate,estimator,estimate,v_ber,variance_kind,variance,covered";

/// Coverage columns of the summary, in output order.
pub const COVERAGE_KINDS: [Inflation; 4] = [Inflation::None, Inflation::Avg, Inflation::Max, Inflation::Sr];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Bernoulli,
    Complete,
    Paired,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Bernoulli => "bernoulli",
            DesignKind::Complete => "complete",
            DesignKind::Paired => "paired",
        }
    }

    /// The design for `n` units; paired designs rank units by `keys`.
    pub fn build(self, n: usize, p: f64, keys: &[f64]) -> Result<DesignSpec> {
        match self {
            DesignKind::Bernoulli => DesignSpec::bernoulli_uniform(n, p),
            DesignKind::Complete => DesignSpec::complete_with_probability(n, p),
            DesignKind::Paired => DesignSpec::paired_by_rank(keys),
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(DesignKind::Bernoulli),
            "complete" => Ok(DesignKind::Complete),
            "paired" => Ok(DesignKind::Paired),
            other => Err(Error::invalid(format!("unknown design kind `{}`", other))),
        }
    }
}

/// `n = 10^(2 + x/8)` rounded to an even number.
pub fn log_grid_point(x: u32) -> usize {
    let raw = 10f64.powf(2.0 + x as f64 / 8.0);
    ((raw / 2.0).round() as usize * 2).max(2)
}

/// Grid points `x = first, first + step, …, last`.
pub fn log_grid(first: u32, last: u32, step: u32) -> Vec<usize> {
    (first..=last).step_by(step.max(1) as usize).map(log_grid_point).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Small,
    Medium,
    Paper,
}

impl Scale {
    /// Grid and replication count of the preset.
    pub fn grid_and_reps(self) -> (Vec<usize>, usize) {
        match self {
            Scale::Small => (log_grid(0, 8, 2), 200),
            Scale::Medium => (log_grid(0, 16, 1), 2_000),
            Scale::Paper => (log_grid(0, 24, 1), 50_000),
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Scale::Small),
            "medium" => Ok(Scale::Medium),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::invalid(format!("unknown scale `{}`", other))),
        }
    }
}

/// The interference-scale parameter of a cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellRule {
    A(ScaleRule),
    /// Adversarial construction with this `λ`.
    Lambda(f64),
}

impl fmt::Display for CellRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellRule::A(rule) => write!(f, "{}", rule),
            CellRule::Lambda(l) => write!(f, "lambda={}", l),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dgp: DgpKind,
    pub rules: Vec<CellRule>,
    pub designs: Vec<DesignKind>,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub master_seed: u64,
    /// Seed for the interference sets when they are not redrawn.
    pub graph_seed: u64,
    pub estimators: Vec<Estimator>,
    pub variance_kinds: Vec<Inflation>,
    pub redraw_graph: bool,
    pub alpha: f64,
    /// Treatment probability of the Bernoulli and complete designs.
    pub p: f64,
    /// Sample size of the normalizing cell (Bernoulli, no interference).
    pub baseline_n: usize,
}

impl SimConfig {
    pub fn new(dgp: DgpKind, rules: Vec<CellRule>, designs: Vec<DesignKind>, n_grid: Vec<usize>, reps: usize) -> Self {
        SimConfig {
            dgp,
            rules,
            designs,
            n_grid,
            reps,
            master_seed: 1,
            graph_seed: 0,
            estimators: vec![Estimator::Ht, Estimator::Hajek],
            variance_kinds: COVERAGE_KINDS.to_vec(),
            redraw_graph: true,
            alpha: 0.05,
            p: 0.5,
            baseline_n: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() || self.designs.is_empty() || self.n_grid.is_empty() {
            return Err(Error::invalid("a_rules, designs and n_grid must be nonempty"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("at least one estimator is required"));
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < 2 || n % 2 != 0) {
            return Err(Error::invalid(format!("grid sizes must be even and at least 2, got {}", n)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid(format!("p must lie in (0,1), got {}", self.p)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        for rule in &self.rules {
            let adversarial = matches!(rule, CellRule::Lambda(_));
            if adversarial != (self.dgp == DgpKind::Adversarial) {
                return Err(Error::invalid("the adversarial DGP takes lambda values and no a_rules"));
            }
        }
        Ok(())
    }

    /// Total unit evaluations, a rough cost measure.
    pub fn unit_evaluations(&self) -> f64 {
        let per_rule: f64 = self.n_grid.iter().map(|&n| n as f64).sum();
        per_rule * (self.rules.len() * self.designs.len() * self.reps) as f64
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let anchored = |key: &str, err: Error| Error::Parse {
            line: line_of(text, key),
            message: match err {
                Error::Invalid(m) => m,
                other => other.to_string(),
            },
        };
        if file.schema_version != SCHEMA_VERSION {
            return Err(anchored(
                "schema_version",
                Error::invalid(format!("unsupported schema_version {}", file.schema_version)),
            ));
        }
        let mut kind: DgpKind = file.dgp.kind.parse().map_err(|e| anchored("kind", e))?;
        if file.dgp.weighted {
            if kind != DgpKind::Random {
                return Err(anchored("weighted", Error::invalid("weighted balance applies to the random DGP only")));
            }
            kind = DgpKind::RandomWeighted;
        }
        let rules = if kind == DgpKind::Adversarial {
            if !file.dgp.a_rules.is_empty() {
                return Err(anchored("a_rules", Error::invalid("the adversarial DGP takes lambda, not a_rules")));
            }
            file.dgp.lambda.iter().map(|&l| CellRule::Lambda(l)).collect()
        } else {
            if !file.dgp.lambda.is_empty() {
                return Err(anchored("lambda", Error::invalid("lambda applies to the adversarial DGP only")));
            }
            file.dgp
                .a_rules
                .iter()
                .map(|r| r.parse().map(CellRule::A))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| anchored("a_rules", e))?
        };
        let designs = file
            .designs
            .iter()
            .map(|d| d.parse())
            .collect::<Result<Vec<DesignKind>>>()
            .map_err(|e| anchored("designs", e))?;
        let n_grid = match file.n_grid {
            GridFile::List(v) => v,
            GridFile::Log { first, last, step } => log_grid(first, last, step.unwrap_or(1)),
        };
        let mut config = SimConfig::new(kind, rules, designs, n_grid, file.reps);
        config.master_seed = file.master_seed;
        config.graph_seed = file.dgp.seed;
        if let Some(est) = &file.estimators {
            config.estimators = est
                .iter()
                .map(|e| e.parse())
                .collect::<Result<Vec<Estimator>>>()
                .map_err(|e| anchored("estimators", e))?;
        }
        if let Some(kinds) = &file.variance_kinds {
            config.variance_kinds = kinds
                .iter()
                .map(|k| k.parse())
                .collect::<Result<Vec<Inflation>>>()
                .map_err(|e| anchored("variance_kinds", e))?;
        }
        config.redraw_graph = file.redraw_graph;
        config.alpha = file.alpha;
        config.p = file.p;
        config.baseline_n = file.baseline_n;
        config.validate().map_err(|e| anchored("", e))?;
        Ok(config)
    }
}

/// One-based line of the first occurrence of `"key"`, or 1.
fn line_of(text: &str, key: &str) -> usize {
    if key.is_empty() {
        return 1;
    }
    let needle = format!("\"{}\"", key);
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    dgp: DgpFile,
    designs: Vec<String>,
    n_grid: GridFile,
    reps: usize,
    #[serde(default = "default_seed")]
    master_seed: u64,
    #[serde(default)]
    estimators: Option<Vec<String>>,
    #[serde(default)]
    variance_kinds: Option<Vec<String>>,
    #[serde(default = "default_true")]
    redraw_graph: bool,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_p")]
    p: f64,
    #[serde(default = "default_baseline")]
    baseline_n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DgpFile {
    kind: String,
    #[serde(default)]
    a_rules: Vec<String>,
    #[serde(default)]
    weighted: bool,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    lambda: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GridFile {
    List(Vec<usize>),
    /// Exponents `x` of `10^(2 + x/8)`.
    Log { first: u32, last: u32, step: Option<u32> },
}

fn default_seed() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

fn default_alpha() -> f64 {
    0.05
}

fn default_p() -> f64 {
    0.5
}

fn default_baseline() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub dgp: DgpKind,
    pub rule: CellRule,
    pub design: DesignKind,
    pub n: usize,
    /// Stream key, a hash of the fields above and `p`.
    pub key: u64,
    /// Present only to normalize the RMSE; omitted from the summary.
    pub baseline_only: bool,
}

impl Cell {
    fn new(dgp: DgpKind, rule: CellRule, design: DesignKind, n: usize, p: f64, baseline_only: bool) -> Self {
        let label = format!("{}|{}|{}|{}|{}", dgp, design, n, rule, p);
        // FNV-1a, folded through the stream mixer.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        Cell {
            dgp,
            rule,
            design,
            n,
            key: mix64(h),
            baseline_only,
        }
    }

    pub fn a_n(&self) -> f64 {
        match &self.rule {
            CellRule::A(rule) => rule.value(self.n),
            CellRule::Lambda(_) => 1.0,
        }
    }

    fn is_baseline(&self, baseline_n: usize) -> bool {
        self.design == DesignKind::Bernoulli
            && self.n == baseline_n
            && matches!(&self.rule, CellRule::A(r) if r.exponent == 0.0 && r.coef == 1.0)
    }
}

/// Grid cells in output order (rule, design, n), plus a trailing
/// baseline cell when the grid does not contain one.
pub fn cells(config: &SimConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for rule in &config.rules {
        for &design in &config.designs {
            for &n in &config.n_grid {
                out.push(Cell::new(config.dgp, rule.clone(), design, n, config.p, false));
            }
        }
    }
    if config.dgp != DgpKind::Adversarial && !out.iter().any(|c| c.is_baseline(config.baseline_n)) {
        out.push(Cell::new(
            config.dgp,
            CellRule::A(ScaleRule::constant(1.0)),
            DesignKind::Bernoulli,
            config.baseline_n,
            config.p,
            true,
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub cell: usize,
    pub rep: usize,
    pub eate_reference: f64,
    /// Per configured estimator; `None` marks an empty arm.
    pub estimates: Vec<Option<f64>>,
    pub v_ber: f64,
    /// Per configured variance kind.
    pub variances: Vec<f64>,
    /// `[estimator][variance kind]`; `None` when the estimate is missing.
    pub covered: Vec<Vec<Option<bool>>>,
}

/// Per-cell state shared by all replications.
struct CellContext {
    fixed_sets: Option<InterferenceSets>,
    fixed_summary: Option<Arc<InterferenceSummary>>,
    adversarial: Option<(DgpInstance, DesignSpec)>,
}

fn needs_summary(config: &SimConfig) -> bool {
    config.variance_kinds.iter().any(|k| matches!(k, Inflation::Avg | Inflation::Max | Inflation::Sr))
}

fn prepare(config: &SimConfig, cell: &Cell) -> Result<CellContext> {
    let mut ctx = CellContext {
        fixed_sets: None,
        fixed_summary: None,
        adversarial: None,
    };
    if let CellRule::Lambda(lambda) = cell.rule {
        let design = cell.design.build(cell.n, config.p, &vec![0.0; cell.n])?;
        let instance = DgpInstance::adversarial(cell.n, lambda, &design)?;
        if needs_summary(config) {
            ctx.fixed_summary = Some(Arc::new(instance.interference_summary()?));
        }
        ctx.adversarial = Some((instance, design));
        return Ok(ctx);
    }
    if matches!(cell.dgp, DgpKind::Random | DgpKind::RandomWeighted) && !config.redraw_graph {
        let mut rng = stream(config.graph_seed, cell.key, u64::MAX);
        let sets = InterferenceSets::random(cell.n, cell.a_n(), &mut rng);
        if needs_summary(config) {
            let summary = InterferenceSummary::from_graph(&sets.graph(cell.n), &[])?;
            ctx.fixed_summary = Some(Arc::new(summary));
        }
        ctx.fixed_sets = Some(sets);
    }
    Ok(ctx)
}

fn replicate(config: &SimConfig, index: usize, cell: &Cell, ctx: &CellContext, rep: usize) -> Result<ReplicationRecord> {
    let mut rng = stream(config.master_seed, cell.key, rep as u64);
    let owned;
    let (instance, design) = match &ctx.adversarial {
        Some((instance, design)) => (instance, design),
        None => {
            let instance =
                DgpInstance::generate_with_sets(cell.dgp, cell.n, cell.a_n(), ctx.fixed_sets.as_ref(), &mut rng)?;
            let design = cell.design.build(cell.n, config.p, instance.x())?;
            owned = (instance, design);
            (&owned.0, &owned.1)
        }
    };
    let eate_reference = match &cell.rule {
        CellRule::Lambda(_) => design.marginal_prob(0)?,
        CellRule::A(_) => 1.0,
    };
    let z = design.sample(&mut rng);
    let y = instance.evaluate(&z);
    let p = design.marginal_probs();
    let sums = ArmSums::compute(&z, &y, &p);
    let v_ber = conventional_from_parts(z.bits(), &y, &p);

    let summary = match (&ctx.fixed_summary, needs_summary(config)) {
        (Some(s), _) => Some(s.clone()),
        (None, true) => Some(Arc::new(instance.interference_summary()?)),
        (None, false) => None,
    };
    let variances = config
        .variance_kinds
        .iter()
        .map(|&kind| inflate(v_ber, summary.as_deref(), kind))
        .collect::<Result<Vec<_>>>()?;
    let estimates: Vec<Option<f64>> = config
        .estimators
        .iter()
        .map(|&e| sums.estimate(e).ok().map(|r| r.point))
        .collect();
    let covered = estimates
        .iter()
        .map(|est| {
            variances
                .iter()
                .map(|v| match est {
                    Some(point) => chebyshev_interval(*point, v, config.alpha).map(|ci| Some(ci.contains(eate_reference))),
                    None => Ok(None),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicationRecord {
        cell: index,
        rep,
        eate_reference,
        estimates,
        v_ber,
        variances: variances.iter().map(|v| v.value).collect(),
        covered,
    })
}

/// All replications of all cells, ordered by cell then rep. `workers = 0`
/// uses every available thread.
pub fn run_experiment(config: &SimConfig, workers: usize) -> Result<(Vec<Cell>, Vec<ReplicationRecord>)> {
    config.validate()?;
    let cells = cells(config);
    with_workers(workers, || {
        let contexts = map_indexed(cells.len(), |c| prepare(config, &cells[c]))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let reps = config.reps;
        let records = map_indexed(cells.len() * reps, |k| {
            let (c, rep) = (k / reps, k % reps);
            replicate(config, c, &cells[c], &contexts[c], rep)
        });
        let records = records.into_iter().collect::<Result<Vec<_>>>()?;
        Ok((cells, records))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dgp: DgpKind,
    pub design: DesignKind,
    pub n: usize,
    pub a_rule: String,
    pub a_n: f64,
    pub estimator: Estimator,
    pub bias: f64,
    pub sd: f64,
    pub rmse: f64,
    /// RMSE over the baseline cell's RMSE for the same estimator.
    pub rmse_norm: f64,
    /// Chebyshev coverage per [`COVERAGE_KINDS`] entry, when computed.
    pub coverage: [Option<f64>; 4],
    pub reps_used: usize,
    pub degenerate: usize,
}

impl SummaryRow {
    pub fn to_csv(&self) -> String {
        let cov: Vec<String> = self
            .coverage
            .iter()
            .map(|c| c.map_or_else(|| "NA".to_string(), |v| v.to_string()))
            .collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.dgp,
            self.design,
            self.n,
            self.a_rule,
            self.estimator,
            self.bias,
            self.sd,
            self.rmse,
            self.rmse_norm,
            cov.join(","),
            self.reps_used
        )
    }
}

/// Bias, population SD and RMSE of `estimates` around `reference`.
pub fn error_stats(estimates: &[f64], reference: f64) -> Result<(f64, f64, f64)> {
    if estimates.is_empty() {
        return Err(Error::invalid("cannot summarize an empty cell"));
    }
    let len = estimates.len() as f64;
    let mean = neumaier_sum(estimates.iter().copied()) / len;
    let var = neumaier_sum(estimates.iter().map(|e| (e - mean) * (e - mean))) / len;
    let mse = neumaier_sum(estimates.iter().map(|e| (e - reference) * (e - reference))) / len;
    Ok((mean - reference, var.sqrt(), mse.sqrt()))
}

struct CellStats {
    bias: f64,
    sd: f64,
    rmse: f64,
    coverage: [Option<f64>; 4],
    used: usize,
    degenerate: usize,
}

fn cell_stats(config: &SimConfig, records: &[&ReplicationRecord], e: usize) -> Result<CellStats> {
    let reference = records.first().map_or(0.0, |r| r.eate_reference);
    let used: Vec<&&ReplicationRecord> = records.iter().filter(|r| r.estimates[e].is_some()).collect();
    let estimates: Vec<f64> = used.iter().filter_map(|r| r.estimates[e]).collect();
    let (bias, sd, rmse) = error_stats(&estimates, reference)?;
    let mut coverage = [None; 4];
    for (slot, kind) in COVERAGE_KINDS.iter().enumerate() {
        if let Some(v) = config.variance_kinds.iter().position(|k| k == kind) {
            let hits = used.iter().filter(|r| r.covered[e][v] == Some(true)).count();
            coverage[slot] = Some(hits as f64 / used.len() as f64);
        }
    }
    Ok(CellStats {
        bias,
        sd,
        rmse,
        coverage,
        used: estimates.len(),
        degenerate: records.len() - estimates.len(),
    })
}

/// One row per (non-baseline cell, estimator), in cell order.
pub fn summarize(config: &SimConfig, cells: &[Cell], records: &[ReplicationRecord]) -> Result<Vec<SummaryRow>> {
    let mut by_cell: Vec<Vec<&ReplicationRecord>> = vec![Vec::new(); cells.len()];
    for r in records {
        by_cell[r.cell].push(r);
    }
    let baseline = cells.iter().position(|c| c.is_baseline(config.baseline_n));
    let mut rows = Vec::new();
    for (e, &estimator) in config.estimators.iter().enumerate() {
        let norm = match baseline {
            Some(b) => cell_stats(config, &by_cell[b], e)?.rmse,
            None => f64::NAN,
        };
        for (c, cell) in cells.iter().enumerate() {
            if cell.baseline_only {
                continue;
            }
            let stats = cell_stats(config, &by_cell[c], e)?;
            rows.push((
                c,
                e,
                SummaryRow {
                    dgp: cell.dgp,
                    design: cell.design,
                    n: cell.n,
                    a_rule: cell.rule.to_string(),
                    a_n: cell.a_n(),
                    estimator,
                    bias: stats.bias,
                    sd: stats.sd,
                    rmse: stats.rmse,
                    rmse_norm: stats.rmse / norm,
                    coverage: stats.coverage,
                    reps_used: stats.used,
                    degenerate: stats.degenerate,
                },
            ));
        }
    }
    rows.sort_by_key(|&(c, e, _)| (c, e));
    Ok(rows.into_iter().map(|(_, _, r)| r).collect())
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// Long-format dump: one line per (rep, estimator, variance kind).
pub fn reps_csv(config: &SimConfig, cells: &[Cell], records: &[ReplicationRecord]) -> String {
    let mut out = String::from(REPS_HEADER);
    out.push('\n');
    for r in records {
        let cell = &cells[r.cell];
        for (e, estimator) in config.estimators.iter().enumerate() {
            let estimate = r.estimates[e].map_or_else(|| "degenerate".to_string(), |v| v.to_string());
            for (v, kind) in config.variance_kinds.iter().enumerate() {
                let covered = r.covered[e][v].map_or("NA", |c| if c { "1" } else { "0" });
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    cell.dgp,
                    cell.design,
                    cell.n,
                    cell.rule,
                    r.rep + 1,
                    r.eate_reference,
                    estimator,
                    estimate,
                    r.v_ber,
                    kind,
                    r.variances[v],
                    covered
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Study {
    pub cells: Vec<Cell>,
    pub records: Vec<ReplicationRecord>,
    pub rows: Vec<SummaryRow>,
}

pub fn run_study(config: &SimConfig, workers: usize) -> Result<Study> {
    let (cells, records) = run_experiment(config, workers)?;
    let rows = summarize(config, &cells, &records)?;
    Ok(Study { cells, records, rows })
}
