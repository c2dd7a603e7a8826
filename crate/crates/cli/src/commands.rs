use std::fs;
use std::path::{Path, PathBuf};

use spillover::designs::DesignSpec;
use spillover::dgp::{DgpKind, ScaleRule};
use spillover::distance::{self, DesignDistribution, DISTANCE_HEADER};
use spillover::estimators::{ArmSums, Estimator};
use spillover::metrics::InterferenceSummary;
use spillover::mixing::{self, SUPPORT_LIMIT};
use spillover::montecarlo::{self, CellRule, DesignKind, Scale, SimConfig, SummaryRow};
use spillover::variance::{self, chebyshev_interval, inflate, Inflation, IntervalRow, INTERVAL_HEADER};
use spillover::{Error, ExperimentData, InterferenceGraph, RegularityConstants};

use crate::svg::{line_chart, Series};
use crate::{AnalyzeArgs, DistanceArgs, MetricsArgs, MixingArgs, ReproduceArgs, SimulateArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad input files or flags; exit 2.
    Config(String),
    /// Failure while computing; exit 3.
    Runtime(String),
    /// An estimator is undefined because an arm is empty; exit 4.
    Degenerate(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DegenerateAssignment { .. } => CliError::Degenerate(msg),
            Error::Parse { .. }
            | Error::Invalid(_)
            | Error::MissingSummaryField(_)
            | Error::DimensionMismatch { .. }
            | Error::IndexOutOfRange { .. } => CliError::Config(msg),
            _ => CliError::Runtime(msg),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))
}

fn in_file(path: &Path, e: Error) -> CliError {
    match e {
        Error::Parse { line, message } => CliError::Config(format!("{}:{}: {}", path.display(), line, message)),
        other => CliError::from(other),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {}", dir.display(), e)))?;
            }
            fs::write(p, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {}", p.display(), e)))
        }
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn load_design(path: &Path) -> Result<DesignSpec> {
    DesignSpec::from_json(&read(path)?).map_err(|e| in_file(path, e))
}

fn load_graph(path: &Path, n: Option<usize>) -> Result<InterferenceGraph> {
    InterferenceGraph::parse_edge_list(&read(path)?, n).map_err(|e| in_file(path, e))
}

fn parse_power(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("`{}` is not a number or `inf`", s))),
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = SimConfig::from_json(&read(&args.config)?).map_err(|e| in_file(&args.config, e))?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let study = montecarlo::run_study(&config, args.workers)?;
    if let Some(path) = &args.dump_reps {
        write_output(Some(path), &montecarlo::reps_csv(&config, &study.cells, &study.records))?;
    }
    for row in study.rows.iter().filter(|r| r.degenerate > 0) {
        eprintln!(
            "warning: {} of {} replications had an empty arm ({} {} n={} a_rule={})",
            row.degenerate,
            row.degenerate + row.reps_used,
            row.estimator,
            row.design,
            row.n,
            row.a_rule
        );
    }
    write_output(args.out.as_deref(), &montecarlo::summary_csv(&study.rows))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let data = ExperimentData::parse_csv(&read(&args.data)?).map_err(|e| in_file(&args.data, e))?;
    let design = load_design(&args.design)?;
    if design.n() != data.n() {
        return Err(CliError::Config(format!(
            "design has {} units but the data has {}",
            design.n(),
            data.n()
        )));
    }
    let estimator: Estimator = args.estimator.parse()?;
    let sums = ArmSums::compute(data.z(), data.y(), data.p());
    let ht = sums.ht();
    let hajek = sums.hajek()?;
    let v_ber = variance::var_est_conventional(&data);

    let mut out = format!("n,{}\ndesign,{}\n", data.n(), design.kind_name());
    if !design.is_bernoulli() {
        out.push_str("warning,variance estimator derived for Bernoulli designs\n");
    }
    out.push_str(&format!(
        "ht,{}\nhajek,{}\nn_treated,{}\nn_control,{}\nweight_treated,{}\nweight_control,{}\nv_ber,{}\n\n",
        ht.point,
        hajek.point,
        sums.count_treated,
        data.n() - sums.count_treated,
        sums.weight_treated,
        sums.weight_control,
        v_ber
    ));

    let point = match estimator {
        Estimator::Ht => ht.point,
        Estimator::Hajek => hajek.point,
    };
    let rows: Vec<IntervalRow> = if !args.factors.is_empty() {
        variance::sensitivity_sweep(estimator.name(), point, v_ber, &args.factors, args.alpha)?
    } else {
        let kind = match args.factor {
            Some(f) => Inflation::Custom(f),
            None => args.variance_kind.parse()?,
        };
        let summary = match (&args.graph, kind) {
            (Some(path), Inflation::Avg | Inflation::Max | Inflation::Sr) => {
                Some(InterferenceSummary::from_graph(&load_graph(path, Some(data.n()))?, &[])?)
            }
            _ => None,
        };
        let variance = inflate(v_ber, summary.as_ref(), kind)?;
        vec![IntervalRow {
            estimator: estimator.name(),
            point,
            variance,
            interval: chebyshev_interval(point, &variance, args.alpha)?,
        }]
    };
    out.push_str(INTERVAL_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)
}

pub fn metrics(args: &MetricsArgs) -> Result<()> {
    let graph = load_graph(&args.graph, args.n)?;
    let moments = args.moments.iter().map(|m| parse_power(m)).collect::<Result<Vec<_>>>()?;
    let mut summary = InterferenceSummary::from_graph(&graph, &moments)?;
    if let Some(path) = &args.design {
        match load_design(path)? {
            DesignSpec::Paired { partner } => summary = summary.with_pairing(&graph, &partner)?,
            _ => return Err(CliError::Config("pair metrics need a paired design".into())),
        }
    }
    write_output(args.out.as_deref(), &summary.to_text())
}

pub fn mixing(args: &MixingArgs) -> Result<()> {
    let design = load_design(&args.design)?;
    let graph = match &args.graph {
        Some(path) => load_graph(path, Some(design.n()))?,
        None => InterferenceGraph::identity(design.n()),
    };
    let constants = RegularityConstants::new(2.0, parse_power(&args.q)?, parse_power(&args.s)?)?;
    let report = mixing::mixing_coefficients(&design, &graph, &constants, args.limit)?;
    write_output(args.out.as_deref(), &report.to_text())
}

fn metric_order(metric: &str) -> Result<Option<f64>> {
    match metric {
        "tv" => Ok(None),
        m => match m.strip_prefix('w').map(parse_power) {
            Some(Ok(r)) if r >= 1.0 => Ok(Some(r)),
            _ => Err(CliError::Config(format!("unknown metric `{}`; use tv, w1, w2 or w<r>", metric))),
        },
    }
}

pub fn distance(args: &DistanceArgs) -> Result<()> {
    let a = load_design(&args.design_a)?;
    let b = load_design(&args.design_b)?;
    if a.n() != b.n() {
        return Err(CliError::Config(format!("designs have {} and {} units", a.n(), b.n())));
    }
    let order = metric_order(&args.metric)?;
    if !(args.k_tau >= 0.0 && args.k_tau.is_finite()) {
        return Err(CliError::Config(format!("k-tau must be finite and >= 0, got {}", args.k_tau)));
    }
    let p = DesignDistribution::from_design(&a, SUPPORT_LIMIT)?;
    let q = DesignDistribution::from_design(&b, SUPPORT_LIMIT)?;
    let graph = args.graph.as_ref().map(|g| load_graph(g, Some(a.n()))).transpose()?;
    let row = match (order, graph) {
        (Some(r), Some(graph)) => distance::eate_gap_bounds(&p, &q, args.k_tau, &graph, r)?.to_csv(),
        (Some(r), None) => {
            let tv = distance::total_variation(&p, &q)?;
            let w = distance::wasserstein(&p, &q, r)?;
            format!("{},{},{},{},{},NA", tv, r, w, args.k_tau, 2.0 * args.k_tau * tv)
        }
        (None, _) => {
            let tv = distance::total_variation(&p, &q)?;
            format!("{},NA,NA,{},{},NA", tv, args.k_tau, 2.0 * args.k_tau * tv)
        }
    };
    write_output(args.out.as_deref(), &format!("{}\n{}\n", DISTANCE_HEADER, row))
}

struct Recipe {
    name: &'static str,
    panels: &'static [DgpKind],
    rules: &'static [&'static str],
}

const RECIPES: [Recipe; 3] = [
    Recipe {
        name: "figB1",
        panels: &[DgpKind::Group],
        rules: &["1", "25", "8*n^0.25", "2.5*n^0.5", "0.25*n"],
    },
    Recipe {
        name: "figB2",
        panels: &[DgpKind::Random, DgpKind::RandomWeighted],
        rules: &["1", "5", "8^0.5*n^0.125", "2.5^0.5*n^0.25", "0.05*n"],
    },
    Recipe {
        name: "figB3",
        panels: &[DgpKind::OneUnit],
        rules: &["1", "24^0.5*n^0.5", "8^0.5*n^0.625", "2.5^0.5*n^0.75", "0.5*n"],
    },
];

const DESIGNS: [DesignKind; 3] = [DesignKind::Bernoulli, DesignKind::Complete, DesignKind::Paired];

/// Rough single-thread cost of one unit evaluation, in seconds.
const SECONDS_PER_UNIT: f64 = 3e-8;

/// Simulation config for one figure panel.
pub fn recipe_config(kind: DgpKind, rules: &[&str], scale: Scale, seed: u64) -> Result<SimConfig> {
    let (grid, reps) = scale.grid_and_reps();
    let rules = rules
        .iter()
        .map(|r| r.parse::<ScaleRule>().map(CellRule::A))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut config = SimConfig::new(kind, rules, DESIGNS.to_vec(), grid, reps);
    config.master_seed = seed;
    config.variance_kinds = vec![Inflation::None];
    Ok(config)
}

fn series_text(kind: DgpKind, design: DesignKind, rule: &str, rows: &[&SummaryRow]) -> String {
    let mut out = format!("# dgp={} design={} a_rule={} estimator=hajek\nn,rmse_norm\n", kind, design, rule);
    for r in rows {
        out.push_str(&format!("{},{}\n", r.n, r.rmse_norm));
    }
    out
}

pub fn reproduce(args: &ReproduceArgs) -> Result<()> {
    let recipe = RECIPES
        .iter()
        .find(|r| r.name.eq_ignore_ascii_case(&args.figure))
        .ok_or_else(|| CliError::Config(format!("unknown figure `{}`; use figB1, figB2 or figB3", args.figure)))?;
    let scale: Scale = args.scale.parse()?;
    let configs = recipe
        .panels
        .iter()
        .map(|&kind| recipe_config(kind, recipe.rules, scale, args.seed))
        .collect::<Result<Vec<_>>>()?;

    if scale == Scale::Paper {
        let units: f64 = configs.iter().map(SimConfig::unit_evaluations).sum();
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        let threads = if args.workers == 0 { threads } else { args.workers };
        let hours = units * SECONDS_PER_UNIT / threads as f64 / 3600.0;
        eprintln!(
            "paper scale: {:.2e} unit evaluations, roughly {:.1} hours on {} threads",
            units, hours, threads
        );
        if !args.confirm {
            return Err(CliError::Config("paper scale needs --confirm".into()));
        }
    }

    let dir: PathBuf = args.out.join(recipe.name);
    for config in &configs {
        let study = montecarlo::run_study(config, args.workers)?;
        let kind = config.dgp;
        write_output(
            Some(&dir.join(format!("{}_summary.csv", kind))),
            &montecarlo::summary_csv(&study.rows),
        )?;
        for design in DESIGNS {
            let mut series = Vec::new();
            for (k, rule) in config.rules.iter().enumerate() {
                let label = rule.to_string();
                let rows: Vec<&SummaryRow> = study
                    .rows
                    .iter()
                    .filter(|r| r.design == design && r.a_rule == label && r.estimator == Estimator::Hajek)
                    .collect();
                write_output(
                    Some(&dir.join("series").join(format!("{}_{}_a{}.txt", kind, design, k + 1))),
                    &series_text(kind, design, &label, &rows),
                )?;
                series.push(Series {
                    label: format!("a_n = {}", label),
                    points: rows.iter().map(|r| (r.n as f64, r.rmse_norm)).collect(),
                });
            }
            let title = format!("{} interference, {} design", kind, design);
            write_output(
                Some(&dir.join(format!("{}_{}.svg", kind, design))),
                &line_chart(&title, "n", "normalized RMSE (Hajek)", &series),
            )?;
        }
    }
    eprintln!("wrote {}", dir.display());
    Ok(())
}
