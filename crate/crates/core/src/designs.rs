//! Experimental designs: sampling, marginal probabilities and exact
//! support enumeration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentVector;
use crate::error::{Error, Result};
use crate::numeric::binomial;

const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DesignSpec {
    /// Independent coin flips with per-unit probabilities.
    Bernoulli { probs: Vec<f64> },
    /// Exactly `treated` of `n` units, uniformly.
    Complete { n: usize, treated: usize },
    /// `partner[i]` is the unit paired with `i`; exactly one per pair is treated.
    Paired { partner: Vec<usize> },
    /// Finite list of assignments with probabilities.
    Explicit {
        n: usize,
        support: Vec<(AssignmentVector, f64)>,
    },
}

impl DesignSpec {
    pub fn bernoulli(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("Bernoulli design needs at least one unit"));
        }
        if let Some(i) = probs.iter().position(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::invalid(format!(
                "Bernoulli probability for unit {} is {}, must lie in (0,1)",
                i + 1,
                probs[i]
            )));
        }
        Ok(DesignSpec::Bernoulli { probs })
    }

    pub fn bernoulli_uniform(n: usize, p: f64) -> Result<Self> {
        Self::bernoulli(vec![p; n])
    }

    pub fn complete(n: usize, treated: usize) -> Result<Self> {
        if treated == 0 || treated >= n {
            return Err(Error::invalid(format!(
                "complete randomization needs 0 < m < n, got m = {}, n = {}",
                treated, n
            )));
        }
        Ok(DesignSpec::Complete { n, treated })
    }

    /// `m = ⌊p n⌋`.
    pub fn complete_with_probability(n: usize, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("p must lie in (0,1), got {}", p)));
        }
        Self::complete(n, (p * n as f64).floor() as usize)
    }

    pub fn paired(partner: Vec<usize>) -> Result<Self> {
        let n = partner.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("paired design needs even n > 0, got {}", n)));
        }
        for (i, &j) in partner.iter().enumerate() {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            if j == i || partner[j] != i {
                return Err(Error::invalid(format!(
                    "pairing is not a fixed-point-free involution at unit {}",
                    i + 1
                )));
            }
        }
        Ok(DesignSpec::Paired { partner })
    }

    /// Pairs `(0,1), (2,3), …`.
    pub fn paired_consecutive(n: usize) -> Result<Self> {
        Self::paired((0..n).map(|i| i ^ 1).collect())
    }

    /// Ranks units by `keys` and pairs adjacent ranks.
    pub fn paired_by_rank(keys: &[f64]) -> Result<Self> {
        let n = keys.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
        let mut partner = vec![0; n];
        for pair in order.chunks(2) {
            if let [a, b] = *pair {
                partner[a] = b;
                partner[b] = a;
            }
        }
        Self::paired(partner)
    }

    /// Merges duplicate points, drops zero-probability points and
    /// requires the total to be 1 within `1e-12`.
    pub fn explicit(n: usize, support: Vec<(AssignmentVector, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("explicit design needs at least one unit"));
        }
        let mut merged: std::collections::BTreeMap<AssignmentVector, f64> = Default::default();
        for (z, p) in support {
            z.check_len(n)?;
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::invalid(format!("probability {} is not a valid weight", p)));
            }
            *merged.entry(z).or_insert(0.0) += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::invalid(format!(
                "explicit design probabilities sum to {}, not 1",
                total
            )));
        }
        let support: Vec<_> = merged
            .into_iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(z, p)| (z, p / total))
            .collect();
        Ok(DesignSpec::Explicit { n, support })
    }

    pub fn n(&self) -> usize {
        match self {
            DesignSpec::Bernoulli { probs } => probs.len(),
            DesignSpec::Complete { n, .. } => *n,
            DesignSpec::Paired { partner } => partner.len(),
            DesignSpec::Explicit { n, .. } => *n,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DesignSpec::Bernoulli { .. } => "bernoulli",
            DesignSpec::Complete { .. } => "complete",
            DesignSpec::Paired { .. } => "paired",
            DesignSpec::Explicit { .. } => "explicit",
        }
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self, DesignSpec::Bernoulli { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AssignmentVector {
        match self {
            DesignSpec::Bernoulli { probs } => AssignmentVector::from_bits_unchecked(
                probs.iter().map(|&p| (rng.random::<f64>() < p) as u8).collect(),
            ),
            DesignSpec::Complete { n, treated } => {
                let mut bits = vec![0u8; *n];
                for i in rand::seq::index::sample(rng, *n, *treated) {
                    bits[i] = 1;
                }
                AssignmentVector::from_bits_unchecked(bits)
            }
            DesignSpec::Paired { partner } => {
                let mut bits = vec![0u8; partner.len()];
                for (i, &j) in partner.iter().enumerate() {
                    if i < j {
                        let first = rng.random::<bool>();
                        bits[i] = first as u8;
                        bits[j] = (!first) as u8;
                    }
                }
                AssignmentVector::from_bits_unchecked(bits)
            }
            DesignSpec::Explicit { support, .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (z, p) in support {
                    acc += p;
                    if u < acc {
                        return z.clone();
                    }
                }
                support.last().expect("non-empty support").0.clone()
            }
        }
    }

    /// `p_i = Pr(Z_i = 1)`.
    pub fn marginal_prob(&self, i: usize) -> Result<f64> {
        let n = self.n();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        Ok(match self {
            DesignSpec::Bernoulli { probs } => probs[i],
            DesignSpec::Complete { n, treated } => *treated as f64 / *n as f64,
            DesignSpec::Paired { .. } => 0.5,
            DesignSpec::Explicit { support, .. } => support
                .iter()
                .filter(|(z, _)| z.is_treated(i))
                .map(|(_, p)| p)
                .sum(),
        })
    }

    pub fn marginal_probs(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.marginal_prob(i).expect("index in range"))
            .collect()
    }

    /// Number of support points (saturating).
    pub fn support_size(&self) -> u128 {
        match self {
            DesignSpec::Bernoulli { probs } => pow2(probs.len()),
            DesignSpec::Complete { n, treated } => {
                binomial(*n as u64, *treated as u64).unwrap_or(u128::MAX)
            }
            DesignSpec::Paired { partner } => pow2(partner.len() / 2),
            DesignSpec::Explicit { support, .. } => support.len() as u128,
        }
    }

    /// Full support with exact probabilities, in a fixed order.
    pub fn enumerate_support(&self, limit: usize) -> Result<Vec<(AssignmentVector, f64)>> {
        let size = self.support_size();
        if size > limit as u128 {
            return Err(Error::SupportTooLarge {
                actual: size,
                limit: limit as u128,
            });
        }
        Ok(match self {
            DesignSpec::Bernoulli { probs } => {
                let n = probs.len();
                (0..(1u64 << n))
                    .map(|mask| {
                        let z = AssignmentVector::from_mask(mask, n);
                        let p = probs
                            .iter()
                            .enumerate()
                            .map(|(i, &p)| if z.is_treated(i) { p } else { 1.0 - p })
                            .product();
                        (z, p)
                    })
                    .collect()
            }
            DesignSpec::Complete { n, treated } => {
                let p = 1.0 / size as f64;
                combinations(*n, *treated)
                    .into_iter()
                    .map(|chosen| {
                        let mut bits = vec![0u8; *n];
                        for i in chosen {
                            bits[i] = 1;
                        }
                        (AssignmentVector::from_bits_unchecked(bits), p)
                    })
                    .collect()
            }
            DesignSpec::Paired { partner } => {
                let leaders: Vec<usize> = (0..partner.len()).filter(|&i| i < partner[i]).collect();
                let p = 1.0 / size as f64;
                (0..(1u64 << leaders.len()))
                    .map(|mask| {
                        let mut bits = vec![0u8; partner.len()];
                        for (k, &i) in leaders.iter().enumerate() {
                            let first = (mask >> k) & 1 == 1;
                            bits[i] = first as u8;
                            bits[partner[i]] = (!first) as u8;
                        }
                        (AssignmentVector::from_bits_unchecked(bits), p)
                    })
                    .collect()
            }
            DesignSpec::Explicit { support, .. } => support.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DesignFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        file.into_design()
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            DesignSpec::Bernoulli { probs } => DesignFile::Bernoulli {
                n: Some(probs.len()),
                p: ProbSpec::PerUnit(probs.clone()),
            },
            DesignSpec::Complete { n, treated } => DesignFile::Complete {
                n: *n,
                m: Some(*treated),
                p: None,
            },
            DesignSpec::Paired { partner } => DesignFile::Paired {
                pairing: partner.iter().map(|j| j + 1).collect(),
            },
            DesignSpec::Explicit { n, support } => DesignFile::Explicit {
                n: *n,
                support: support
                    .iter()
                    .map(|(z, p)| SupportPoint {
                        z: z.bits().to_vec(),
                        prob: *p,
                    })
                    .collect(),
            },
        };
        serde_json::to_string(&file).expect("design serializes")
    }
}

fn pow2(k: usize) -> u128 {
    if k >= 128 {
        u128::MAX
    } else {
        1u128 << k
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        idx[pos - 1] += 1;
        for q in pos..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ProbSpec {
    Common(f64),
    PerUnit(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportPoint {
    z: Vec<u8>,
    prob: f64,
}

/// On-disk design description.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
enum DesignFile {
    Bernoulli {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        p: ProbSpec,
    },
    Complete {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
    },
    Paired {
        pairing: Vec<usize>,
    },
    Explicit {
        n: usize,
        support: Vec<SupportPoint>,
    },
}

impl DesignFile {
    fn into_design(self) -> Result<DesignSpec> {
        match self {
            DesignFile::Bernoulli { n, p } => match (n, p) {
                (Some(n), ProbSpec::Common(p)) => DesignSpec::bernoulli_uniform(n, p),
                (None, ProbSpec::Common(_)) => {
                    Err(Error::invalid("Bernoulli design with a scalar p needs `n`"))
                }
                (n, ProbSpec::PerUnit(probs)) => {
                    if let Some(n) = n {
                        if n != probs.len() {
                            return Err(Error::DimensionMismatch {
                                expected: n,
                                found: probs.len(),
                            });
                        }
                    }
                    DesignSpec::bernoulli(probs)
                }
            },
            DesignFile::Complete { n, m, p } => match (m, p) {
                (Some(m), None) => DesignSpec::complete(n, m),
                (None, Some(p)) => DesignSpec::complete_with_probability(n, p),
                _ => Err(Error::invalid("complete design needs exactly one of `m` or `p`")),
            },
            DesignFile::Paired { pairing } => {
                if pairing.contains(&0) {
                    return Err(Error::invalid("pairing uses one-based unit labels"));
                }
                DesignSpec::paired(pairing.into_iter().map(|j| j - 1).collect())
            }
            DesignFile::Explicit { n, support } => {
                let points = support
                    .into_iter()
                    .map(|pt| Ok((AssignmentVector::new(pt.z)?, pt.prob)))
                    .collect::<Result<Vec<_>>>()?;
                DesignSpec::explicit(n, points)
            }
        }
    }
}
