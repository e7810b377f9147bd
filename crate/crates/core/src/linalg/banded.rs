use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric matrix stored by its lower band.
///
/// Entry `(i, j)` with `0 <= i - j <= bandwidth` lives at `data[i * (bandwidth + 1) + (i - j)]`.
/// Entries outside the band are structurally zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetric {
    dim: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedSymmetric {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(dim.saturating_sub(1));
        Self {
            dim,
            bandwidth,
            data: vec![0.0; dim * (bandwidth + 1)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, 0);
        for i in 0..dim {
            m.data[i] = 1.0;
        }
        m
    }

    /// Copy the band of a dense symmetric matrix. Fails if anything outside the
    /// band is non-zero.
    pub fn from_dense(m: &DMatrix<f64>, bandwidth: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("banded matrix must be square".into()));
        }
        let mut out = Self::zeros(m.nrows(), bandwidth);
        for i in 0..m.nrows() {
            for j in 0..=i {
                let v = m[(i, j)];
                if i - j <= out.bandwidth {
                    out.data[i * (out.bandwidth + 1) + (i - j)] = v;
                } else if v != 0.0 {
                    return Err(Error::Dimension(format!(
                        "entry ({i}, {j}) lies outside bandwidth {bandwidth}"
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Smallest bandwidth that holds every non-zero of a dense matrix.
    pub fn detect_bandwidth(m: &DMatrix<f64>) -> usize {
        let mut bw = 0;
        for i in 0..m.nrows() {
            for j in 0..i {
                if m[(i, j)] != 0.0 || m[(j, i)] != 0.0 {
                    bw = bw.max(i - j);
                }
            }
        }
        bw
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.bandwidth).then(|| i * (self.bandwidth + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to the symmetric pair `(i, j)`/`(j, i)`.
    ///
    /// # Panics
    /// If the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .idx(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside bandwidth {}", self.bandwidth));
        self.data[k] += v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i.saturating_sub(self.bandwidth)..=i {
                let v = self.get(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = DVector::zeros(self.dim);
        for i in 0..self.dim {
            let row = i * (self.bandwidth + 1);
            y[i] += self.data[row] * x[i];
            for d in 1..=self.bandwidth.min(i) {
                let v = self.data[row + d];
                y[i] += v * x[i - d];
                y[i - d] += v * x[i];
            }
        }
        y
    }

    /// Banded Cholesky `A = L Lᵀ`; cost `O(dim · bandwidth²)`.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let bw = self.bandwidth;
        let w = bw + 1;
        let mut l = vec![0.0; self.data.len()];
        for j in 0..self.dim {
            // diagonal
            let mut d = self.data[j * w];
            for k in j.saturating_sub(bw)..j {
                let ljk = l[j * w + (j - k)];
                d -= ljk * ljk;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { minor: j + 1 });
            }
            let d = d.sqrt();
            l[j * w] = d;
            for i in (j + 1)..(j + w).min(self.dim) {
                let mut s = self.data[i * w + (i - j)];
                for k in i.saturating_sub(bw)..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / d;
            }
        }
        Ok(BandedCholesky {
            dim: self.dim,
            bandwidth: bw,
            data: l,
        })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    dim: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bandwidth + 1) + (i - j)]
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        for i in 0..self.dim {
            let mut s = x[i];
            for k in i.saturating_sub(self.bandwidth)..i {
                s -= self.l(i, k) * x[k];
            }
            x[i] = s / self.l(i, i);
        }
        x
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        for i in (0..self.dim).rev() {
            let mut s = x[i];
            for k in (i + 1)..(i + self.bandwidth + 1).min(self.dim) {
                s -= self.l(k, i) * x[k];
            }
            x[i] = s / self.l(i, i);
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.l(i, i).ln()).sum::<f64>()
    }

    pub fn to_dense_lower(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i.saturating_sub(self.bandwidth)..=i {
                m[(i, j)] = self.l(i, j);
            }
        }
        m
    }
}
