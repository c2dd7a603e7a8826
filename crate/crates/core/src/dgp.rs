//! Simulation data-generating processes: group, random (optionally
//! weighted) and one-unit interference with a balance-driven outcome
//! rule, plus an adversarial construction under which HT never converges.
//!
//! Balance outcome rule, with `X ~ U[0,3]` and `ε ~ U[0,7]`:
//!
//! ```text
//! y_i = 2 z_i + X_i + ε_i   if bal(G_i) > 0
//!       z_i + X_i + ε_i     if bal(G_i) = 0
//!       X_i + ε_i           if bal(G_i) < 0
//! ```
//!
//! where `bal(G) = Σ_{j∈G} w_j (2 z_j - 1)` and `G_i` never contains `i`.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, LogNormal, Uniform};

use crate::assignment::AssignmentVector;
use crate::designs::DesignSpec;
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;
use crate::metrics::InterferenceSummary;
use crate::oracle::PotentialOutcomes;

/// Largest unit effect of the balance rule.
pub const BALANCE_K_TAU: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DgpKind {
    Group,
    Random,
    RandomWeighted,
    OneUnit,
    Adversarial,
}

impl DgpKind {
    pub fn name(self) -> &'static str {
        match self {
            DgpKind::Group => "group",
            DgpKind::Random => "random",
            DgpKind::RandomWeighted => "random_weighted",
            DgpKind::OneUnit => "oneunit",
            DgpKind::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for DgpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DgpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" => Ok(DgpKind::Group),
            "random" => Ok(DgpKind::Random),
            "random_weighted" => Ok(DgpKind::RandomWeighted),
            "oneunit" | "one_unit" => Ok(DgpKind::OneUnit),
            "adversarial" => Ok(DgpKind::Adversarial),
            other => Err(Error::invalid(format!("unknown DGP kind `{}`", other))),
        }
    }
}

/// `a_n = c · n^e`, written as a constant or `c*n^e` where `c` may
/// itself be `a^b` (for example `24^0.5*n^0.5`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRule {
    pub text: String,
    pub coef: f64,
    pub exponent: f64,
}

impl ScaleRule {
    pub fn constant(c: f64) -> Self {
        ScaleRule {
            text: format_number(c),
            coef: c,
            exponent: 0.0,
        }
    }

    pub fn power(coef: f64, exponent: f64) -> Self {
        ScaleRule {
            text: format!("{}*n^{}", format_number(coef), format_number(exponent)),
            coef,
            exponent,
        }
    }

    /// `a_n` at sample size `n`, clamped to `[1, n]`.
    pub fn value(&self, n: usize) -> f64 {
        (self.coef * (n as f64).powf(self.exponent)).clamp(1.0, n as f64)
    }
}

fn format_number(x: f64) -> String {
    format!("{}", x)
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('^') {
        Some((base, exp)) => {
            let b: f64 = base.trim().parse().map_err(|_| bad_rule(s))?;
            let e: f64 = exp.trim().parse().map_err(|_| bad_rule(s))?;
            b.powf(e)
        }
        None => s.parse().map_err(|_| bad_rule(s))?,
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(bad_rule(s))
    }
}

fn bad_rule(s: &str) -> Error {
    Error::invalid(format!("cannot parse scale rule `{}`", s))
}

impl FromStr for ScaleRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.replace(' ', "");
        let (coef, exponent) = if let Some(idx) = t.find('n') {
            let (head, tail) = t.split_at(idx);
            let coef = match head.strip_suffix('*') {
                Some(c) => parse_number(c)?,
                None if head.is_empty() => 1.0,
                None => return Err(bad_rule(s)),
            };
            let exponent = match &tail[1..] {
                "" => 1.0,
                rest => rest
                    .strip_prefix('^')
                    .ok_or_else(|| bad_rule(s))?
                    .parse::<f64>()
                    .map_err(|_| bad_rule(s))?,
            };
            (coef, exponent)
        } else {
            (parse_number(&t)?, 0.0)
        };
        Ok(ScaleRule {
            text: t,
            coef,
            exponent,
        })
    }
}

impl fmt::Display for ScaleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub n: usize,
    pub a_n: f64,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(kind: DgpKind, n: usize, a_n: f64, seed: u64) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("n must be even and positive, got {}", n)));
        }
        if !(a_n >= 1.0 && a_n <= n as f64) {
            return Err(Error::invalid(format!("a_n must lie in [1, n], got {}", a_n)));
        }
        Ok(DgpSpec { kind, n, a_n, seed })
    }
}

/// `Σ_{j∈G} w_j (2 z_j - 1)`; zero for an empty set.
pub fn balance(g_set: &[u32], z: &AssignmentVector, weights: Option<&[f64]>) -> f64 {
    g_set
        .iter()
        .map(|&j| {
            let sign = 2.0 * z.value(j as usize) - 1.0;
            weights.map_or(sign, |w| w[j as usize] * sign)
        })
        .sum()
}

/// The sets `G_i` in compact form.
#[derive(Debug, Clone)]
pub enum InterferenceSets {
    /// `G_i` is the rest of `i`'s group; `group[i]` is the group index.
    Groups { group: Arc<Vec<u32>>, sizes: Arc<Vec<u32>> },
    /// Unit 0 interferes with units `1..reach`.
    Star { reach: usize },
    Explicit(Arc<Vec<Vec<u32>>>),
}

impl InterferenceSets {
    pub fn groups(n: usize, a_n: f64) -> Self {
        let group: Vec<u32> = (0..n)
            .map(|i| (((i + 1) as f64 / a_n).ceil() as u32).saturating_sub(1))
            .collect();
        let count = group.last().map_or(0, |&g| g as usize + 1);
        let mut sizes = vec![0u32; count];
        for &g in &group {
            sizes[g as usize] += 1;
        }
        InterferenceSets::Groups {
            group: Arc::new(group),
            sizes: Arc::new(sizes),
        }
    }

    /// Each `j ≠ i` joins `G_i` independently with probability
    /// `(a_n - 1)/(n - 1)`, drawn by geometric skipping.
    pub fn random<R: Rng + ?Sized>(n: usize, a_n: f64, rng: &mut R) -> Self {
        let prob = if n > 1 { ((a_n - 1.0) / (n as f64 - 1.0)).clamp(0.0, 1.0) } else { 0.0 };
        let sets = (0..n)
            .map(|i| {
                let mut set = Vec::new();
                if prob <= 0.0 {
                    return set;
                }
                let skip = Geometric::new(prob).expect("probability in (0,1]");
                let mut pos: u64 = 0;
                loop {
                    pos += skip.sample(rng);
                    if pos >= (n - 1) as u64 {
                        break;
                    }
                    let j = pos as usize;
                    set.push(if j < i { j } else { j + 1 } as u32);
                    pos += 1;
                }
                set
            })
            .collect();
        InterferenceSets::Explicit(Arc::new(sets))
    }

    pub fn n_groups(&self) -> Option<usize> {
        match self {
            InterferenceSets::Groups { sizes, .. } => Some(sizes.len()),
            _ => None,
        }
    }

    /// `G_i` as a list.
    pub fn set(&self, i: usize) -> Vec<u32> {
        match self {
            InterferenceSets::Groups { group, .. } => {
                let g = group[i];
                group
                    .iter()
                    .enumerate()
                    .filter(|&(j, &h)| h == g && j != i)
                    .map(|(j, _)| j as u32)
                    .collect()
            }
            InterferenceSets::Star { reach } => {
                if i >= 1 && i < *reach {
                    vec![0]
                } else {
                    Vec::new()
                }
            }
            InterferenceSets::Explicit(sets) => sets[i].clone(),
        }
    }

    /// `I_ij = 1` iff `i ∈ G_j` or `i = j`.
    pub fn graph(&self, n: usize) -> InterferenceGraph {
        let mut rows: Vec<Vec<u32>> = (0..n).map(|i| vec![i as u32]).collect();
        match self {
            InterferenceSets::Groups { group, .. } => {
                let mut members: Vec<Vec<u32>> = Vec::new();
                for (i, &g) in group.iter().enumerate() {
                    if members.len() <= g as usize {
                        members.resize(g as usize + 1, Vec::new());
                    }
                    members[g as usize].push(i as u32);
                }
                for (i, row) in rows.iter_mut().enumerate() {
                    *row = members[group[i] as usize].clone();
                }
            }
            InterferenceSets::Star { reach } => {
                rows[0] = (0..(*reach).max(1) as u32).collect();
            }
            InterferenceSets::Explicit(sets) => {
                for (j, set) in sets.iter().enumerate() {
                    for &i in set {
                        rows[i as usize].push(j as u32);
                    }
                }
            }
        }
        InterferenceGraph::from_rows(rows).expect("rows are in range")
    }
}

#[derive(Debug, Clone)]
enum Response {
    Balance,
    /// `2 z_1 z_i` for units `1..reach`, `z_i` otherwise.
    OneUnit { reach: usize },
    /// Adversarial construction over the first `k` units.
    Adversarial { scale: f64, probs: Vec<f64>, k: usize },
}

/// A DGP with its latent draws fixed; acts as a potential-outcome oracle.
#[derive(Debug, Clone)]
pub struct DgpInstance {
    kind: DgpKind,
    n: usize,
    a_n: f64,
    x: Vec<f64>,
    eps: Vec<f64>,
    weights: Option<Vec<f64>>,
    sets: InterferenceSets,
    response: Response,
    graph: OnceLock<InterferenceGraph>,
}

fn draw_latents<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let ux = Uniform::new(0.0, 3.0).expect("valid range");
    let ue = Uniform::new(0.0, 7.0).expect("valid range");
    let x = (0..n).map(|_| ux.sample(rng)).collect();
    let eps = (0..n).map(|_| ue.sample(rng)).collect();
    (x, eps)
}

fn draw_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let ln = LogNormal::new(0.0, 1.0).expect("valid parameters");
    (0..n).map(|_| ln.sample(rng)).collect()
}

impl DgpInstance {
    /// Draws latents (and, for random kinds, the sets) from `rng`:
    /// `X`, then `ε`, then weights, then the sets.
    pub fn generate<R: Rng + ?Sized>(kind: DgpKind, n: usize, a_n: f64, rng: &mut R) -> Result<Self> {
        Self::generate_with_sets(kind, n, a_n, None, rng)
    }

    /// As [`generate`](Self::generate), but reuses `sets` for the
    /// random kinds instead of drawing new ones.
    pub fn generate_with_sets<R: Rng + ?Sized>(
        kind: DgpKind,
        n: usize,
        a_n: f64,
        sets: Option<&InterferenceSets>,
        rng: &mut R,
    ) -> Result<Self> {
        DgpSpec::new(kind, n, a_n, 0)?;
        let (x, eps) = draw_latents(n, rng);
        let weights = (kind == DgpKind::RandomWeighted).then(|| draw_weights(n, rng));
        let (sets, response) = match kind {
            DgpKind::Group => (InterferenceSets::groups(n, a_n), Response::Balance),
            DgpKind::Random | DgpKind::RandomWeighted => (
                match sets {
                    Some(s) => s.clone(),
                    None => InterferenceSets::random(n, a_n, rng),
                },
                Response::Balance,
            ),
            DgpKind::OneUnit => {
                let reach = a_n.floor() as usize;
                (InterferenceSets::Star { reach }, Response::OneUnit { reach })
            }
            DgpKind::Adversarial => {
                return Err(Error::invalid("use DgpInstance::adversarial for the adversarial DGP"))
            }
        };
        Ok(DgpInstance {
            kind,
            n,
            a_n,
            x,
            eps,
            weights,
            sets,
            response,
            graph: OnceLock::new(),
        })
    }

    /// Adversarial outcomes: with `K = ⌈λ^0.5 n⌉`,
    /// `y_i = (n/K) z_1 [z_i p_i - (1 - z_i)(1 - p_i)]` for `i ≤ K`, else 0.
    /// HT then equals `z_1` on every draw while EATE equals `p_1`.
    pub fn adversarial(n: usize, lambda: f64, design: &DesignSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::invalid(format!("lambda must lie in (0,1], got {}", lambda)));
        }
        if design.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: design.n(),
            });
        }
        let k = ((lambda.sqrt() * n as f64).ceil() as usize).clamp(1, n);
        Ok(DgpInstance {
            kind: DgpKind::Adversarial,
            n,
            a_n: k as f64,
            x: vec![0.0; n],
            eps: vec![0.0; n],
            weights: None,
            sets: InterferenceSets::Star { reach: k },
            response: Response::Adversarial {
                scale: n as f64 / k as f64,
                probs: design.marginal_probs(),
                k,
            },
            graph: OnceLock::new(),
        })
    }

    pub fn from_spec(spec: &DgpSpec) -> Result<Self> {
        Self::generate(spec.kind, spec.n, spec.a_n, &mut ChaCha8Rng::seed_from_u64(spec.seed))
    }

    pub fn kind(&self) -> DgpKind {
        self.kind
    }

    pub fn a_n(&self) -> f64 {
        self.a_n
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn sets(&self) -> &InterferenceSets {
        &self.sets
    }

    pub fn graph(&self) -> &InterferenceGraph {
        self.graph.get_or_init(|| self.sets.graph(self.n))
    }

    /// Largest `|τ_i(z)|` the outcome rule allows.
    pub fn k_tau(&self) -> f64 {
        match &self.response {
            Response::Adversarial { scale, .. } => *scale,
            _ => BALANCE_K_TAU,
        }
    }

    /// Interference summary, in closed form for group and star structures.
    pub fn interference_summary(&self) -> Result<InterferenceSummary> {
        let n = self.n as f64;
        match &self.sets {
            InterferenceSets::Groups { sizes, .. } => {
                let sum = |p: i32| sizes.iter().map(|&g| (g as f64).powi(p)).sum::<f64>();
                let gmax = sizes.iter().copied().max().unwrap_or(1) as usize;
                Ok(InterferenceSummary {
                    n: self.n,
                    d_avg: sum(2) / n,
                    d_max: gmax,
                    d_rms: (sum(3) / n).sqrt(),
                    lambda1: gmax as f64,
                    c_moments: Vec::new(),
                    e_avg: None,
                    r_sum: None,
                })
            }
            InterferenceSets::Star { reach } => {
                let r = (*reach).max(1) as f64;
                Ok(InterferenceSummary {
                    n: self.n,
                    d_avg: (r * r + n - r) / n,
                    d_max: r as usize,
                    d_rms: ((r * r * r + n - r) / n).sqrt(),
                    lambda1: r,
                    c_moments: Vec::new(),
                    e_avg: None,
                    r_sum: None,
                })
            }
            InterferenceSets::Explicit(_) => InterferenceSummary::from_graph(self.graph(), &[]),
        }
    }

    fn group_balances(&self, z: &AssignmentVector) -> Option<Vec<f64>> {
        let InterferenceSets::Groups { group, sizes } = &self.sets else {
            return None;
        };
        let mut totals = vec![0i64; sizes.len()];
        for (i, &g) in group.iter().enumerate() {
            totals[g as usize] += 2 * z.get(i) as i64 - 1;
        }
        Some(
            group
                .iter()
                .enumerate()
                .map(|(i, &g)| (totals[g as usize] - (2 * z.get(i) as i64 - 1)) as f64)
                .collect(),
        )
    }

    fn balance_of(&self, i: usize, z: &AssignmentVector) -> f64 {
        match &self.sets {
            InterferenceSets::Explicit(sets) => balance(&sets[i], z, self.weights.as_deref()),
            other => balance(&other.set(i), z, self.weights.as_deref()),
        }
    }

    fn balance_multiplier(bal: f64) -> f64 {
        if bal > 0.0 {
            2.0
        } else if bal == 0.0 {
            1.0
        } else {
            0.0
        }
    }

    fn base(&self, i: usize) -> f64 {
        self.x[i] + self.eps[i]
    }

    fn adversarial_outcome(scale: f64, probs: &[f64], k: usize, i: usize, z: &AssignmentVector) -> f64 {
        if i >= k {
            return 0.0;
        }
        let p = probs[i];
        let inner = if z.is_treated(i) { p } else { -(1.0 - p) };
        scale * z.value(0) * inner
    }
}

impl PotentialOutcomes for DgpInstance {
    fn n(&self) -> usize {
        self.n
    }

    fn evaluate(&self, z: &AssignmentVector) -> Vec<f64> {
        match &self.response {
            Response::Balance => match self.group_balances(z) {
                Some(bal) => (0..self.n)
                    .map(|i| self.base(i) + z.value(i) * Self::balance_multiplier(bal[i]))
                    .collect(),
                None => (0..self.n).map(|i| self.outcome(i, z)).collect(),
            },
            _ => (0..self.n).map(|i| self.outcome(i, z)).collect(),
        }
    }

    fn declared_graph(&self) -> Option<&InterferenceGraph> {
        Some(self.graph())
    }

    fn outcome(&self, i: usize, z: &AssignmentVector) -> f64 {
        match &self.response {
            Response::Balance => self.base(i) + z.value(i) * Self::balance_multiplier(self.balance_of(i, z)),
            Response::OneUnit { reach } => {
                if i >= 1 && i < *reach {
                    self.base(i) + 2.0 * z.value(0) * z.value(i)
                } else {
                    self.base(i) + z.value(i)
                }
            }
            Response::Adversarial { scale, probs, k } => Self::adversarial_outcome(*scale, probs, *k, i, z),
        }
    }

    fn unit_effects(&self, z: &AssignmentVector) -> Vec<f64> {
        match &self.response {
            // G_i never contains i, so the balance does not move with z_i.
            Response::Balance => match self.group_balances(z) {
                Some(bal) => bal.into_iter().map(Self::balance_multiplier).collect(),
                None => (0..self.n)
                    .map(|i| Self::balance_multiplier(self.balance_of(i, z)))
                    .collect(),
            },
            Response::OneUnit { reach } => (0..self.n)
                .map(|i| if i >= 1 && i < *reach { 2.0 * z.value(0) } else { 1.0 })
                .collect(),
            Response::Adversarial { .. } => (0..self.n)
                .map(|i| self.outcome(i, &z.with(i, true)) - self.outcome(i, &z.with(i, false)))
                .collect(),
        }
    }
}

/// Closed-form `E[d_avg]` for the random DGP:
/// `n - (n-1)(1 - π)^n (1 + π)^(n-2)` with `π = (a_n - 1)/(n - 1)`.
pub fn expected_davg_random(n: usize, a_n: f64) -> Result<f64> {
    if n < 2 || !(a_n >= 1.0 && a_n <= n as f64) {
        return Err(Error::invalid(format!("need n >= 2 and 1 <= a_n <= n, got n = {}, a_n = {}", n, a_n)));
    }
    let nf = n as f64;
    let pi = (a_n - 1.0) / (nf - 1.0);
    Ok(nf - (nf - 1.0) * (1.0 - pi).powi(n as i32) * (1.0 + pi).powi(n as i32 - 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::dependence_matrix;
    use crate::oracle::toggled_unit_effects;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn balances() {
        let z = AssignmentVector::new(vec![1, 0, 1]).unwrap();
        assert_eq!(balance(&[0, 1], &z, None), 0.0);
        assert_eq!(balance(&[], &z, None), 0.0);
        let all = AssignmentVector::new(vec![1, 1, 1]).unwrap();
        assert_eq!(balance(&[0, 1, 2], &all, None), 3.0);
        let z = AssignmentVector::new(vec![1, 1]).unwrap();
        assert_eq!(balance(&[0, 1], &z, Some(&[2.0, 0.5])), 2.5);
    }

    #[test]
    fn scale_rules() {
        let r: ScaleRule = "25".parse().unwrap();
        assert_eq!(r.value(1000), 25.0);
        let r: ScaleRule = "0.25*n".parse().unwrap();
        assert_eq!(r.value(100), 25.0);
        let r: ScaleRule = "24^0.5*n^0.5".parse().unwrap();
        assert!((r.value(100) - 24f64.sqrt() * 10.0).abs() < 1e-12);
        let r: ScaleRule = "n".parse().unwrap();
        assert_eq!(r.value(10), 10.0);
        assert_eq!("100".parse::<ScaleRule>().unwrap().value(10), 10.0);
        assert!("3*m^2".parse::<ScaleRule>().is_err());
        assert!("*n".parse::<ScaleRule>().is_err());
    }

    #[test]
    fn group_structure() {
        let d = DgpInstance::generate(DgpKind::Group, 10, 4.0, &mut rng(1)).unwrap();
        assert_eq!(d.sets().n_groups(), Some(3));
        assert!((dependence_matrix(d.graph()).d_avg() - 3.6).abs() < 1e-15);
        let d = DgpInstance::generate(DgpKind::Group, 100, 25.0, &mut rng(1)).unwrap();
        assert_eq!(dependence_matrix(d.graph()).d_avg(), 25.0);
        let d = DgpInstance::generate(DgpKind::Group, 8, 1.0, &mut rng(1)).unwrap();
        assert!(d.graph().is_identity());
    }

    #[test]
    fn fast_paths_match_generic() {
        for kind in [DgpKind::Group, DgpKind::Random, DgpKind::RandomWeighted, DgpKind::OneUnit] {
            let d = DgpInstance::generate(kind, 12, 5.0, &mut rng(7)).unwrap();
            let mut r = rng(8);
            for _ in 0..50 {
                let z = AssignmentVector::from_bools(&(0..12).map(|_| r.random::<bool>()).collect::<Vec<_>>())
                    .unwrap();
                let full = d.evaluate(&z);
                for (i, &y) in full.iter().enumerate() {
                    assert_eq!(y, d.outcome(i, &z));
                }
                let fast = d.unit_effects(&z);
                for (a, b) in fast.iter().zip(toggled_unit_effects(&d, &z)) {
                    assert!((a - b).abs() < 1e-12, "{:?}", kind);
                }
            }
        }
    }

    #[test]
    fn analytic_summaries_match_generic() {
        for (kind, a) in [(DgpKind::Group, 4.0), (DgpKind::Group, 2.5), (DgpKind::OneUnit, 6.0), (DgpKind::OneUnit, 1.0)] {
            let d = DgpInstance::generate(kind, 14, a, &mut rng(3)).unwrap();
            let fast = d.interference_summary().unwrap();
            let slow = InterferenceSummary::from_graph(d.graph(), &[]).unwrap();
            assert!((fast.d_avg - slow.d_avg).abs() < 1e-12);
            assert_eq!(fast.d_max, slow.d_max);
            assert!((fast.d_rms - slow.d_rms).abs() < 1e-12);
            assert!((fast.lambda1 - slow.lambda1).abs() < 1e-8);
        }
    }

    #[test]
    fn one_unit_structure() {
        let d = DgpInstance::generate(DgpKind::OneUnit, 10, 4.0, &mut rng(2)).unwrap();
        let g = d.graph();
        assert_eq!(g.row(0), &[0, 1, 2, 3]);
        assert!((dependence_matrix(g).d_avg() - 2.2).abs() < 1e-15);
    }

    #[test]
    fn expected_davg_closed_form() {
        assert!((expected_davg_random(3, 2.0).unwrap() - 2.625).abs() < 1e-15);
        assert_eq!(expected_davg_random(10, 1.0).unwrap(), 1.0);
        assert_eq!(expected_davg_random(10, 10.0).unwrap(), 10.0);
    }

    #[test]
    fn adversarial_ht_is_first_treatment() {
        let design = DesignSpec::bernoulli_uniform(10, 0.3).unwrap();
        let d = DgpInstance::adversarial(10, 0.25, &design).unwrap();
        let p = design.marginal_probs();
        let mut r = rng(4);
        for _ in 0..100 {
            let z = design.sample(&mut r);
            let y = d.evaluate(&z);
            let ht = crate::estimators::ArmSums::compute(&z, &y, &p).ht().point;
            assert!((ht - z.value(0)).abs() < 1e-12);
            assert!(y.iter().all(|v| v.abs() <= 2.0 + 1e-12));
        }
    }
}
