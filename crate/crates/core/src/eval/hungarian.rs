//! Minimum-cost linear assignment (Hungarian method with row and column
//! potentials, O(n^2 m) for an n x m matrix with n <= m).

use crate::error::{Error, Result};

/// Dense row-major matrix of finite costs. Either dimension may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} costs for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParam("assignment costs must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged cost rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column assigned to each row; `None` for rows left over when the
    /// matrix has more rows than columns.
    pub row_to_col: Vec<Option<usize>>,
    /// Sum of the assigned entries.
    pub total: f64,
}

impl Assignment {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
    }
}

/// Assigns `min(rows, cols)` rows to distinct columns with minimum total
/// cost. Rectangular inputs behave as if the short side were padded with
/// constant-cost dummies, which never changes the optimum.
pub fn hungarian_assign(costs: &CostMatrix) -> Assignment {
    if costs.rows <= costs.cols {
        let row_to_col = solve_wide(costs).into_iter().map(Some).collect::<Vec<_>>();
        finish(costs, row_to_col)
    } else {
        let t = costs.transposed();
        let col_to_row = solve_wide(&t);
        let mut row_to_col = vec![None; costs.rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            row_to_col[r] = Some(c);
        }
        finish(costs, row_to_col)
    }
}

fn finish(costs: &CostMatrix, row_to_col: Vec<Option<usize>>) -> Assignment {
    let total = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| costs.get(r, c)))
        .sum();
    Assignment { row_to_col, total }
}

/// Shortest-augmenting-path solver for `rows <= cols`. Returns the column of
/// every row.
fn solve_wide(a: &CostMatrix) -> Vec<usize> {
    let (n, m) = (a.rows, a.cols);
    if n == 0 {
        return Vec::new();
    }
    // 1-based internally; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    row_to_col
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one() {
        let a = hungarian_assign(&CostMatrix::from_rows(&[vec![5.0]]).unwrap());
        assert_eq!(a.row_to_col, vec![Some(0)]);
        assert_eq!(a.total, 5.0);
    }

    #[test]
    fn two_by_two_diagonal() {
        let a = hungarian_assign(&CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap());
        assert_eq!(a.row_to_col, vec![Some(0), Some(1)]);
        assert_eq!(a.total, 2.0);
    }

    #[test]
    fn rectangular_both_ways() {
        let wide = CostMatrix::from_rows(&[vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0]]).unwrap();
        let a = hungarian_assign(&wide);
        assert_eq!(a.total, 3.0);
        assert_eq!(a.row_to_col, vec![Some(1), Some(0)]);
        let tall = CostMatrix::from_rows(&[vec![4.0, 2.0], vec![1.0, 0.0], vec![2.5, 5.0]]).unwrap();
        let a = hungarian_assign(&tall);
        assert_eq!(a.total, 2.5);
        assert_eq!(a.row_to_col, vec![None, Some(1), Some(0)]);
    }

    #[test]
    fn empty_matrices() {
        let a = hungarian_assign(&CostMatrix::new(0, 4, vec![]).unwrap());
        assert!(a.row_to_col.is_empty());
        let a = hungarian_assign(&CostMatrix::new(3, 0, vec![]).unwrap());
        assert_eq!(a.row_to_col, vec![None, None, None]);
        assert_eq!(a.total, 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(CostMatrix::new(1, 2, vec![1.0]).is_err());
    }
}
