//! 2x2 subtable Gibbs chain on tables with fixed margins.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Table;
use crate::sampler::Sampler;

/// One move: rows `i < i2`, columns `j < j2`, and the signed shift applied
/// to `(i, j)` and `(i2, j2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DsMove {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub delta: i64,
}

/// Admissible shifts `[-min(t_ij, t_i2j2), min(t_ij2, t_i2j)]`.
pub fn ds_range(t: &Table, rows: (usize, usize), cols: (usize, usize)) -> (i64, i64) {
    let (i, i2) = rows;
    let (j, j2) = cols;
    let low = -(t.get(i, j).min(t.get(i2, j2)) as i64);
    let up = t.get(i, j2).min(t.get(i2, j)) as i64;
    (low, up)
}

fn distinct_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

fn apply(t: &mut Table, m: &DsMove) {
    let (i, i2) = m.rows;
    let (j, j2) = m.cols;
    let shift = |t: &mut Table, r, c, by: i64| {
        let v = t.get(r, c) as i64 + by;
        t.set(r, c, v as u64);
    };
    shift(t, i, j, m.delta);
    shift(t, i2, j2, m.delta);
    shift(t, i, j2, -m.delta);
    shift(t, i2, j, -m.delta);
}

/// Draws a move for `t` and applies it in place.
pub fn ds_move<R: Rng + ?Sized>(t: &mut Table, rng: &mut R) -> Result<DsMove> {
    if t.rows() < 2 || t.cols() < 2 {
        return Err(Error::Frozen);
    }
    let rows = distinct_pair(rng, t.rows());
    let cols = distinct_pair(rng, t.cols());
    let (low, up) = ds_range(t, rows, cols);
    let delta = rng.random_range(low..=up);
    let m = DsMove { rows, cols, delta };
    apply(t, &m);
    Ok(m)
}

pub fn ds_step<R: Rng + ?Sized>(t: &Table, rng: &mut R) -> Result<Table> {
    let mut out = t.clone();
    ds_move(&mut out, rng)?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DsChain {
    table: Table,
    last: Option<DsMove>,
}

impl DsChain {
    pub fn new(table: Table) -> Result<Self> {
        if table.rows() < 2 || table.cols() < 2 {
            return Err(Error::Frozen);
        }
        Ok(DsChain { table, last: None })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn into_table(self) -> Table {
        self.table
    }

    pub fn last_move(&self) -> Option<DsMove> {
        self.last
    }
}

impl Sampler for DsChain {
    type State = Table;

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        let m = ds_move(&mut self.table, rng)?;
        self.last = Some(m);
        Ok(m.delta != 0)
    }

    fn state(&self) -> &Table {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_2x2_range() {
        let t = Table::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(ds_range(&t, (0, 1), (0, 1)), (-1, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut flipped = 0;
        let n = 20_000;
        for _ in 0..n {
            let s = ds_step(&t, &mut rng).unwrap();
            if s.get(0, 1) == 1 {
                assert_eq!(s.to_nested(), vec![vec![0, 1], vec![1, 0]]);
                flipped += 1;
            }
        }
        let p = flipped as f64 / n as f64;
        assert!((p - 0.5).abs() < 0.02, "{p}");
    }

    #[test]
    fn zero_table_is_fixed_point() {
        let t = Table::zeros(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ds_step(&t, &mut rng).unwrap(), t);
    }

    #[test]
    fn identity_3x3_subtables() {
        let t = Table::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        for (r, c) in [((0, 1), (0, 1)), ((0, 2), (0, 2)), ((1, 2), (1, 2))] {
            assert_eq!(ds_range(&t, r, c), (-1, 0));
        }
        // a subtable with a single diagonal one
        assert_eq!(ds_range(&t, (0, 1), (0, 2)), (0, 0));
    }

    #[test]
    fn margins_preserved() {
        let t = Table::from_rows(&[vec![3, 0, 1], vec![0, 2, 5], vec![4, 1, 0]]).unwrap();
        let (r, c) = (t.row_sums(), t.col_sums());
        let mut chain = DsChain::new(t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            chain.step(&mut rng).unwrap();
            assert_eq!(chain.table().row_sums(), r);
            assert_eq!(chain.table().col_sums(), c);
        }
    }

    #[test]
    fn degenerate_shapes_are_frozen() {
        assert!(matches!(DsChain::new(Table::zeros(1, 4)), Err(Error::Frozen)));
    }
}
