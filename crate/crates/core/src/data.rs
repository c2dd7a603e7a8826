use crate::assignment::AssignmentVector;
use crate::error::{Error, Result};

/// Moment and probability bounds `k`, `q`, `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityConstants {
    pub k: f64,
    pub q: f64,
    pub s: f64,
}

impl RegularityConstants {
    pub fn new(k: f64, q: f64, s: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 2.0) {
            return Err(Error::invalid(format!("k must be finite and >= 2, got {}", k)));
        }
        if q.is_nan() || q < 2.0 {
            return Err(Error::invalid(format!("q must be >= 2, got {}", q)));
        }
        if s.is_nan() || s < 1.0 {
            return Err(Error::invalid(format!("s must be >= 1, got {}", s)));
        }
        Ok(RegularityConstants { k, q, s })
    }

    /// Bounded outcomes: `q = s = ∞`.
    pub fn bounded(k: f64) -> Result<Self> {
        Self::new(k, f64::INFINITY, f64::INFINITY)
    }
}

impl Default for RegularityConstants {
    fn default() -> Self {
        RegularityConstants {
            k: 100.0,
            q: f64::INFINITY,
            s: f64::INFINITY,
        }
    }
}

/// Observed experiment: assignment, outcomes and marginal treatment
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    z: AssignmentVector,
    y: Vec<f64>,
    p: Vec<f64>,
}

impl ExperimentData {
    pub fn new(z: AssignmentVector, y: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let n = z.len();
        for len in [y.len(), p.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if let Some(i) = p.iter().position(|&pi| !(pi > 0.0 && pi < 1.0)) {
            return Err(Error::invalid(format!(
                "p for unit {} is {}, must lie in (0,1)",
                i + 1,
                p[i]
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("outcome for unit {} is not finite", i + 1)));
        }
        Ok(ExperimentData { z, y, p })
    }

    /// Checks `p_i ∈ [1/k, 1 - 1/k]`.
    pub fn check_regularity(&self, constants: &RegularityConstants) -> Result<()> {
        let lo = 1.0 / constants.k;
        for (i, &pi) in self.p.iter().enumerate() {
            if pi < lo || pi > 1.0 - lo {
                return Err(Error::invalid(format!(
                    "p for unit {} is {}, outside [{}, {}]",
                    i + 1,
                    pi,
                    lo,
                    1.0 - lo
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &AssignmentVector {
        &self.z
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Parses the `unit,z,y,p` table. Units are one-based and must each
    /// appear exactly once.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let expected = ["unit", "z", "y", "p"];
        if header.len() != expected.len() || header.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header `unit,z,y,p`, found `{}`",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut rows: Vec<(usize, u8, f64, f64)> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let err = |what: &str, v: &str| Error::Parse {
                line,
                message: format!("invalid {} `{}`", what, v),
            };
            let unit: usize = record[0].parse().map_err(|_| err("unit", &record[0]))?;
            let z: u8 = match &record[1] {
                "0" => 0,
                "1" => 1,
                other => return Err(err("z", other)),
            };
            let y: f64 = record[2].parse().map_err(|_| err("y", &record[2]))?;
            let p: f64 = record[3].parse().map_err(|_| err("p", &record[3]))?;
            if unit == 0 {
                return Err(err("unit", "0"));
            }
            rows.push((unit, z, y, p));
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 2,
                message: "no data rows".into(),
            });
        }
        let n = rows.len();
        rows.sort_by_key(|r| r.0);
        for (expected, row) in (1..=n).zip(&rows) {
            if row.0 != expected {
                return Err(Error::invalid(format!(
                    "units must be labelled 1..{} exactly once; unit {} is missing or duplicated",
                    n, expected
                )));
            }
        }
        let z = AssignmentVector::new(rows.iter().map(|r| r.1).collect())?;
        ExperimentData::new(
            z,
            rows.iter().map(|r| r.2).collect(),
            rows.iter().map(|r| r.3).collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("unit,z,y,p\n");
        for i in 0..self.n() {
            out.push_str(&format!("{},{},{},{}\n", i + 1, self.z.get(i), self.y[i], self.p[i]));
        }
        out
    }
}
