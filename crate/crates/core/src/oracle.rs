//! Potential outcomes and the assignment-conditional effects built on them.

use std::fmt;

use crate::assignment::AssignmentVector;
use crate::error::{Error, Result};
use crate::graph::InterferenceGraph;

/// Ground-truth response surface `z ↦ (y_1(z), …, y_n(z))`.
///
/// Implementations must be deterministic and re-entrant. When a graph is
/// declared, `y_j` may only depend on coordinates `i` with `I[i][j]`.
pub trait PotentialOutcomes: Send + Sync {
    fn n(&self) -> usize;

    fn evaluate(&self, z: &AssignmentVector) -> Vec<f64>;

    fn declared_graph(&self) -> Option<&InterferenceGraph> {
        None
    }

    /// Single-unit view of [`evaluate`](Self::evaluate).
    fn outcome(&self, i: usize, z: &AssignmentVector) -> f64 {
        self.evaluate(z)[i]
    }

    /// `τ_i(z_{-i})` for every unit.
    fn unit_effects(&self, z: &AssignmentVector) -> Vec<f64> {
        if self.declared_graph().is_some() {
            (0..self.n())
                .map(|i| self.outcome(i, &z.with(i, true)) - self.outcome(i, &z.with(i, false)))
                .collect()
        } else {
            toggled_unit_effects(self, z)
        }
    }
}

/// `n + 1` full evaluations: the base assignment plus one per toggled unit.
pub fn toggled_unit_effects<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    z: &AssignmentVector,
) -> Vec<f64> {
    let base = oracle.evaluate(z);
    (0..oracle.n())
        .map(|i| {
            let flipped = oracle.evaluate(&z.toggled(i))[i];
            if z.is_treated(i) {
                base[i] - flipped
            } else {
                flipped - base[i]
            }
        })
        .collect()
}

/// `τ_i(z_{-i}) = y_i(1; z_{-i}) - y_i(0; z_{-i})`; coordinate `i` of
/// `z_rest` is ignored.
pub fn unit_effect<O: PotentialOutcomes + ?Sized>(
    oracle: &O,
    i: usize,
    z_rest: &AssignmentVector,
) -> Result<f64> {
    z_rest.check_len(oracle.n())?;
    if i >= oracle.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: oracle.n(),
        });
    }
    Ok(oracle.outcome(i, &z_rest.with(i, true)) - oracle.outcome(i, &z_rest.with(i, false)))
}

/// `τ_ATE(z) = n⁻¹ Σ_i τ_i(z_{-i})`.
pub fn assignment_ate<O: PotentialOutcomes + ?Sized>(oracle: &O, z: &AssignmentVector) -> Result<f64> {
    z.check_len(oracle.n())?;
    let effects = oracle.unit_effects(z);
    Ok(effects.iter().sum::<f64>() / effects.len() as f64)
}

type ResponseFn = dyn Fn(&AssignmentVector) -> Vec<f64> + Send + Sync;

/// Closure-backed oracle, mostly for fixtures.
pub struct FnOracle {
    n: usize,
    f: Box<ResponseFn>,
    graph: Option<InterferenceGraph>,
}

impl FnOracle {
    pub fn new<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(&AssignmentVector) -> Vec<f64> + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::invalid("oracle needs at least one unit"));
        }
        Ok(FnOracle {
            n,
            f: Box::new(f),
            graph: None,
        })
    }

    pub fn with_graph(mut self, graph: InterferenceGraph) -> Result<Self> {
        if graph.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: graph.n(),
            });
        }
        self.graph = Some(graph);
        Ok(self)
    }

    /// Outcomes listed for every assignment, indexed by the assignment's
    /// bit mask (bit `i` = unit `i`).
    pub fn from_table(n: usize, table: Vec<Vec<f64>>) -> Result<Self> {
        if n > 20 || table.len() != 1usize << n {
            return Err(Error::invalid("outcome table must have 2^n rows, n <= 20"));
        }
        if table.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("outcome table rows must have n entries"));
        }
        Self::new(n, move |z| {
            let mask = z
                .bits()
                .iter()
                .enumerate()
                .fold(0usize, |m, (i, &b)| m | ((b as usize) << i));
            table[mask].clone()
        })
    }
}

impl fmt::Debug for FnOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOracle")
            .field("n", &self.n)
            .field("declared_graph", &self.graph.is_some())
            .finish()
    }
}

impl PotentialOutcomes for FnOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn evaluate(&self, z: &AssignmentVector) -> Vec<f64> {
        let y = (self.f)(z);
        debug_assert_eq!(y.len(), self.n);
        y
    }

    fn declared_graph(&self) -> Option<&InterferenceGraph> {
        self.graph.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z(bits: &[u8]) -> AssignmentVector {
        AssignmentVector::new(bits.to_vec()).unwrap()
    }

    #[test]
    fn own_treatment_only() {
        let oracle = FnOracle::new(3, |z| (0..3).map(|i| z.value(i)).collect()).unwrap();
        assert_eq!(unit_effect(&oracle, 1, &z(&[0, 0, 1])).unwrap(), 1.0);
        assert_eq!(assignment_ate(&oracle, &z(&[1, 0, 1])).unwrap(), 1.0);
    }

    #[test]
    fn no_primary_effect() {
        let oracle = FnOracle::new(3, |z| vec![z.value(1), z.value(2), z.value(0)]).unwrap();
        for i in 0..3 {
            assert_eq!(unit_effect(&oracle, i, &z(&[1, 1, 0])).unwrap(), 0.0);
        }
    }

    #[test]
    fn treated_count_outcomes_have_unit_ate() {
        let n = 5;
        let oracle = FnOracle::new(n, move |z| vec![z.treated_count() as f64; n]).unwrap();
        for mask in 0..32 {
            let a = assignment_ate(&oracle, &AssignmentVector::from_mask(mask, n)).unwrap();
            assert_eq!(a, 1.0);
        }
    }

    #[test]
    fn matches_double_loop_on_random_table() {
        let n = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let table: Vec<Vec<f64>> = (0..16)
            .map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let oracle = FnOracle::from_table(n, table.clone()).unwrap();
        for mask in 0..16u64 {
            // Direct double loop over units and both arms.
            let mut total = 0.0;
            for i in 0..n {
                let m1 = mask | (1 << i);
                let m0 = mask & !(1 << i);
                total += table[m1 as usize][i] - table[m0 as usize][i];
            }
            let expected = total / n as f64;
            let got = assignment_ate(&oracle, &AssignmentVector::from_mask(mask, n)).unwrap();
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_and_mismatch() {
        let oracle = FnOracle::new(2, |z| vec![z.value(0), z.value(1)]).unwrap();
        assert!(unit_effect(&oracle, 2, &z(&[0, 1])).is_err());
        assert!(assignment_ate(&oracle, &z(&[0, 1, 1])).is_err());
        assert!(FnOracle::new(0, |_| vec![]).is_err());
    }

    #[test]
    fn single_unit_ate_is_unit_effect() {
        let oracle = FnOracle::new(1, |z| vec![3.0 * z.value(0) + 1.0]).unwrap();
        assert_eq!(assignment_ate(&oracle, &z(&[0])).unwrap(), 3.0);
    }
}
