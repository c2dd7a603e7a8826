use crate::error::{Error, Result};

/// Interference indicators `I[i][j]`: unit `i` interferes with unit `j`.
///
/// Stored as sorted out-neighbour rows; the diagonal is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceGraph {
    rows: Vec<Vec<u32>>,
}

impl InterferenceGraph {
    pub fn identity(n: usize) -> Self {
        assert!(n > 0);
        InterferenceGraph {
            rows: (0..n as u32).map(|i| vec![i]).collect(),
        }
    }

    /// Builds from out-neighbour lists. Duplicates are dropped and the
    /// diagonal is added.
    pub fn from_rows(mut rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("graph needs at least one unit"));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if let Some(&bad) = row.iter().find(|&&j| j as usize >= n) {
                return Err(Error::IndexOutOfRange {
                    index: bad as usize,
                    n,
                });
            }
            row.push(i as u32);
            row.sort_unstable();
            row.dedup();
        }
        Ok(InterferenceGraph { rows })
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            rows[i].push(j as u32);
        }
        Self::from_rows(rows)
    }

    pub fn from_dense(matrix: &[Vec<bool>]) -> Result<Self> {
        let n = matrix.len();
        let mut rows = Vec::with_capacity(n);
        for row in matrix {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            rows.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(j, _)| j as u32)
                    .collect(),
            );
        }
        Self::from_rows(rows)
    }

    /// Every unit interferes with every unit.
    pub fn complete(n: usize) -> Self {
        let all: Vec<u32> = (0..n as u32).collect();
        InterferenceGraph {
            rows: vec![all; n],
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].binary_search(&(j as u32)).is_ok()
    }

    /// Units that `i` interferes with, including `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    /// `c_i`: how many units `i` interferes with.
    pub fn out_degree(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Column lists: for each `j`, the units interfering with `j`.
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n()];
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                cols[j as usize].push(i as u32);
            }
        }
        cols
    }

    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![false; n];
                for &j in row {
                    dense[j as usize] = true;
                }
                dense
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().all(|r| r.len() == 1)
    }

    /// Copy with `I[i][j]` set.
    pub fn with_edge(&self, i: usize, j: usize) -> Self {
        let mut out = self.clone();
        if let Err(pos) = out.rows[i].binary_search(&(j as u32)) {
            out.rows[i].insert(pos, j as u32);
        }
        out
    }

    /// Parses an edge list with header `src,dst` (one-based units).
    /// Without an explicit `n`, the largest label sets the unit count.
    pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim().replace(' ', "") == "src,dst" => {}
            Some((idx, header)) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected header `src,dst`, found `{}`", header.trim()),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty edge list".into(),
                })
            }
        }
        let mut edges = Vec::new();
        let mut max_label = 0usize;
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 2 columns, found {}", fields.len()),
                });
            }
            let parse = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v),
                    _ => Err(Error::Parse {
                        line: idx + 1,
                        message: format!("`{}` is not a positive unit label", s),
                    }),
                }
            };
            let (src, dst) = (parse(fields[0])?, parse(fields[1])?);
            max_label = max_label.max(src).max(dst);
            edges.push((src - 1, dst - 1));
        }
        let n = match n {
            Some(n) if n < max_label => {
                return Err(Error::invalid(format!(
                    "edge list references unit {} but n = {}",
                    max_label, n
                )))
            }
            Some(n) => n,
            None => max_label,
        };
        if n == 0 {
            return Err(Error::invalid("edge list has no units"));
        }
        Self::from_edges(n, edges)
    }

    /// Writes the off-diagonal edges as a `src,dst` list.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("src,dst\n");
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row {
                if j as usize != i {
                    out.push_str(&format!("{},{}\n", i + 1, j + 1));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_always_present() {
        let g = InterferenceGraph::from_edges(3, [(0, 1)]).unwrap();
        for i in 0..3 {
            assert!(g.get(i, i));
        }
        assert!(g.get(0, 1));
        assert!(!g.get(1, 0));
    }

    #[test]
    fn edge_list_parsing() {
        let g = InterferenceGraph::parse_edge_list("src,dst\n1,2\n1,2\n3,3\n", None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.row(0), &[0, 1]);
        assert_eq!(g.edge_count(), 4);
        let round = InterferenceGraph::parse_edge_list(&g.to_edge_list(), Some(3)).unwrap();
        assert_eq!(round, g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(InterferenceGraph::parse_edge_list("a,b\n1,2\n", None).is_err());
        assert!(InterferenceGraph::parse_edge_list("src,dst\n1,2,3\n", None).is_err());
        assert!(InterferenceGraph::parse_edge_list("src,dst\n0,2\n", None).is_err());
        assert!(InterferenceGraph::parse_edge_list("src,dst\n1,5\n", Some(3)).is_err());
    }
}
