//! Test statistics: food-web compartmentalization, and Pearson and
//! likelihood-ratio statistics against (quasi-)independence fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedSet;
use crate::graph::{Graph, Table};

/// Mean pairwise predator overlap of a food web.
///
/// An edge `a -> b` means `b` eats `a`, so the predators of `a` are its
/// out-neighbours. For `i != j`, `c_ij` is the size of the intersection of
/// the two predator sets over the size of their union (0 when both are
/// empty); the result is the mean of `c_ij` over ordered pairs.
pub fn compartmentalization(g: &Graph) -> Result<f64> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Domain("compartmentalization needs at least two species".into()));
    }
    let words = n.div_ceil(64);
    let mut pred = vec![0u64; n * words];
    for u in 0..n {
        for v in 0..n {
            if g.weight(u, v) > 0 {
                pred[u * words + v / 64] |= 1 << (v % 64);
            }
        }
    }
    let row = |u: usize| &pred[u * words..(u + 1) * words];
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (mut both, mut either) = (0u32, 0u32);
            for (a, b) in row(i).iter().zip(row(j)) {
                both += (a & b).count_ones();
                either += (a | b).count_ones();
            }
            if either > 0 {
                sum += f64::from(both) / f64::from(either);
            }
        }
    }
    // c_ij is symmetric, so each unordered pair counts twice
    Ok(2.0 * sum / (n * (n - 1)) as f64)
}

/// Fitted cell means for the (quasi-)independence model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub rows: usize,
    pub cols: usize,
    /// Row-major. Fixed cells hold their observed count.
    pub m_hat: Vec<f64>,
    /// Row-major; `true` for cells excluded from the fit.
    pub fixed: Vec<bool>,
    pub row_fit: Vec<f64>,
    pub col_fit: Vec<f64>,
    pub iterations: usize,
    pub discrepancy: f64,
}

impl ExpectedCounts {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m_hat[i * self.cols + j]
    }

    #[inline]
    pub fn is_fixed(&self, i: usize, j: usize) -> bool {
        self.fixed[i * self.cols + j]
    }
}

/// Cell mask from a fixed set over the bipartite embedding of `t`.
fn cell_mask(t: &Table, f: &FixedSet) -> Result<Vec<bool>> {
    let (r, c) = (t.rows(), t.cols());
    if f.n() != r + c {
        return Err(Error::Config(format!(
            "fixed set covers {} vertices, table embedding has {}",
            f.n(),
            r + c
        )));
    }
    Ok((0..r * c).map(|k| f.contains(k / c, r + k % c)).collect())
}

/// Iterative proportional fitting of `a_i * b_j` to the free cells of `t`.
pub fn ipfp(t: &Table, fixed: &FixedSet, tol: f64, max_iter: usize) -> Result<ExpectedCounts> {
    let mask = cell_mask(t, fixed)?;
    ipfp_masked(t, &mask, tol, max_iter)
}

/// As [`ipfp`], with fixed cells given as `(row, col)` indices.
pub fn ipfp_cells(
    t: &Table,
    cells: impl IntoIterator<Item = (usize, usize)>,
    tol: f64,
    max_iter: usize,
) -> Result<ExpectedCounts> {
    ipfp(t, &t.fixed_with_cells(cells), tol, max_iter)
}

fn ipfp_masked(t: &Table, fixed: &[bool], tol: f64, max_iter: usize) -> Result<ExpectedCounts> {
    let (r, c) = (t.rows(), t.cols());
    let free = |i: usize, j: usize| !fixed[i * c + j];
    let mut row_target = vec![0.0; r];
    let mut col_target = vec![0.0; c];
    for i in 0..r {
        for j in 0..c {
            if free(i, j) {
                row_target[i] += t.get(i, j) as f64;
                col_target[j] += t.get(i, j) as f64;
            }
        }
    }
    let mut m: Vec<f64> = (0..r * c).map(|k| if fixed[k] { 0.0 } else { 1.0 }).collect();
    let mut row_fit = vec![0.0; r];
    let mut col_fit = vec![0.0; c];
    let margins = |m: &[f64], row_fit: &mut [f64], col_fit: &mut [f64]| {
        row_fit.fill(0.0);
        col_fit.fill(0.0);
        for i in 0..r {
            for j in 0..c {
                row_fit[i] += m[i * c + j];
                col_fit[j] += m[i * c + j];
            }
        }
    };
    let gap = |fit: &[f64], target: &[f64]| {
        fit.iter()
            .zip(target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };

    let mut discrepancy = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        margins(&m, &mut row_fit, &mut col_fit);
        for i in 0..r {
            let s = if row_fit[i] > 0.0 { row_target[i] / row_fit[i] } else { 0.0 };
            for j in 0..c {
                m[i * c + j] *= s;
            }
        }
        margins(&m, &mut row_fit, &mut col_fit);
        for j in 0..c {
            let s = if col_fit[j] > 0.0 { col_target[j] / col_fit[j] } else { 0.0 };
            for i in 0..r {
                m[i * c + j] *= s;
            }
        }
        margins(&m, &mut row_fit, &mut col_fit);
        discrepancy = gap(&row_fit, &row_target).max(gap(&col_fit, &col_target));
        if discrepancy < tol {
            for k in 0..r * c {
                if fixed[k] {
                    m[k] = t.cells()[k] as f64;
                }
            }
            return Ok(ExpectedCounts {
                rows: r,
                cols: c,
                m_hat: m,
                fixed: fixed.to_vec(),
                row_fit,
                col_fit,
                iterations,
                discrepancy,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations,
        discrepancy,
    })
}

fn check_shape(rows: usize, cols: usize, m: &ExpectedCounts) -> Result<()> {
    if (rows, cols) != (m.rows, m.cols) {
        return Err(Error::Domain(format!(
            "table is {rows}x{cols} but fit is {}x{}",
            m.rows, m.cols
        )));
    }
    Ok(())
}

fn chi_squared_by(m: &ExpectedCounts, cell: impl Fn(usize, usize) -> u64) -> Result<f64> {
    let mut x2 = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if m.is_fixed(i, j) {
                continue;
            }
            let t = cell(i, j) as f64;
            let e = m.get(i, j);
            if e <= 0.0 {
                if t > 0.0 {
                    return Err(Error::Domain(format!("zero expected count at ({i}, {j})")));
                }
                continue;
            }
            x2 += (t - e) * (t - e) / e;
        }
    }
    Ok(x2)
}

fn likelihood_ratio_by(m: &ExpectedCounts, cell: impl Fn(usize, usize) -> u64) -> Result<f64> {
    let mut g2 = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if m.is_fixed(i, j) {
                continue;
            }
            let t = cell(i, j);
            if t == 0 {
                continue;
            }
            let e = m.get(i, j);
            if e <= 0.0 {
                return Err(Error::Domain(format!("zero expected count at ({i}, {j})")));
            }
            let t = t as f64;
            g2 += t * (t / e).ln();
        }
    }
    Ok((2.0 * g2).max(0.0))
}

/// Pearson statistic over the free cells.
pub fn chi_squared(t: &Table, m: &ExpectedCounts) -> Result<f64> {
    check_shape(t.rows(), t.cols(), m)?;
    chi_squared_by(m, |i, j| t.get(i, j))
}

/// `G^2 = 2 sum t ln(t / m)` over the free cells.
pub fn likelihood_ratio(t: &Table, m: &ExpectedCounts) -> Result<f64> {
    check_shape(t.rows(), t.cols(), m)?;
    likelihood_ratio_by(m, |i, j| t.get(i, j))
}

/// [`chi_squared`] for a table held in its bipartite embedding.
pub fn chi_squared_embedded(g: &Graph, m: &ExpectedCounts) -> Result<f64> {
    check_shape(g.n().saturating_sub(m.cols), m.cols, m)?;
    chi_squared_by(m, |i, j| g.weight(i, m.rows + j))
}

/// [`likelihood_ratio`] for a table held in its bipartite embedding.
pub fn likelihood_ratio_embedded(g: &Graph, m: &ExpectedCounts) -> Result<f64> {
    check_shape(g.n().saturating_sub(m.cols), m.cols, m)?;
    likelihood_ratio_by(m, |i, j| g.weight(i, m.rows + j))
}
