use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An `n × p` panel of observations, one row per time point.
///
/// Values are stored row-major. Construction rejects non-finite entries, so
/// every `SeriesMatrix` in circulation is finite with `n ≥ 2` and `p ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
}

impl SeriesMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || p < 1 {
            return Err(Error::InvalidParameter(format!(
                "series needs n >= 2 and p >= 1, got n={n}, p={p}"
            )));
        }
        if values.len() != n * p {
            return Err(Error::InvalidParameter(format!(
                "expected {} values for a {n}x{p} series, got {}",
                n * p,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, p, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidParameter("rows have unequal length".into()));
        }
        Self::new(n, p, rows.concat())
    }

    /// Copies a column-major nalgebra matrix (rows = time).
    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = m.shape();
        let mut values = Vec::with_capacity(n * p);
        for t in 0..n {
            values.extend(m.row(t).iter());
        }
        Self::new(n, p, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.p..(t + 1) * self.p]
    }

    pub fn rows(&self) -> impl DoubleEndedIterator<Item = &[f64]> + ExactSizeIterator {
        self.values.chunks_exact(self.p)
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.values[t * self.p + j]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.p, &self.values)
    }

    /// Rows `start..start + len` as a new series.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n {
            return Err(Error::InvalidWindow { window: len, n: self.n });
        }
        Self::new(
            len,
            self.p,
            self.values[start * self.p..(start + len) * self.p].to_vec(),
        )
    }

    /// Column means `x̄`.
    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.p];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let inv = 1.0 / self.n as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        mean
    }

    /// Applies `f` to every entry. The result must stay finite.
    pub fn map(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Result<Self> {
        let p = self.p;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k / p, k % p, v))
            .collect();
        Self::new(self.n, self.p, values)
    }
}
