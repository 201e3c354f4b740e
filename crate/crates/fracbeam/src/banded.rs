//! Symmetric banded matrix storage with Cholesky factorization.
//!
//! The nonlocal stiffness couples each degree of freedom only to
//! neighbours within the kernel horizon, so the reduced system is banded
//! with a bandwidth set by the horizon-to-element-length ratio. Storage
//! holds the diagonal and `bandwidth` sub-diagonals row-wise.

use crate::{Error, Result};
use nalgebra::DVector;

/// Symmetric positive definite banded matrix, lower triangle stored.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bandwidth: usize,
    /// Row-major slab: entry (i, j) with i - bandwidth <= j <= i lives at
    /// data[i * (bandwidth + 1) + (i - j)].
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero matrix of size n with the given number of sub-diagonals.
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(n.saturating_sub(1));
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored sub-diagonals.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Entry (i, j), zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > self.bandwidth {
            0.0
        } else {
            self.data[hi * (self.bandwidth + 1) + (hi - lo)]
        }
    }

    /// Adds v to the symmetric entry (i, j). Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        assert!(
            hi - lo <= self.bandwidth,
            "entry ({i}, {j}) outside bandwidth {}",
            self.bandwidth
        );
        self.data[hi * (self.bandwidth + 1) + (hi - lo)] += v;
    }

    /// y = A x using the symmetric band.
    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            let mut acc = 0.0;
            for j in lo..i {
                let a = self.data[i * (self.bandwidth + 1) + (i - j)];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            acc += self.data[i * (self.bandwidth + 1)] * x[i];
            y[i] += acc;
        }
        y
    }

    /// y = |A| |x| componentwise, the scaling term of the componentwise
    /// backward error of a computed solution.
    pub fn abs_matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            let mut acc = 0.0;
            for j in lo..i {
                let a = self.data[i * (self.bandwidth + 1) + (i - j)].abs();
                acc += a * x[j].abs();
                y[j] += a * x[i].abs();
            }
            acc += self.data[i * (self.bandwidth + 1)].abs() * x[i].abs();
            y[i] += acc;
        }
        y
    }

    /// Cholesky factorization A = L L^T within the band.
    ///
    /// Fails with a positive-definiteness error when a pivot is not
    /// strictly positive, which is also the cheapest reliable SPD test
    /// for these systems.
    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let w = self.bandwidth + 1;
        let mut l = self.data.clone();
        for j in 0..self.n {
            let lo = j.saturating_sub(self.bandwidth);
            let mut d = l[j * w];
            for k in lo..j {
                let v = l[j * w + (j - k)];
                d -= v * v;
            }
            if !(d > 0.0) {
                return Err(Error::Linalg(format!(
                    "Cholesky pivot {d:.3e} at row {j}: matrix is not positive definite"
                )));
            }
            let d = d.sqrt();
            l[j * w] = d;
            let hi = (j + self.bandwidth + 1).min(self.n);
            for i in (j + 1)..hi {
                let ilo = i.saturating_sub(self.bandwidth);
                let mut s = l[i * w + (i - j)];
                for k in ilo.max(lo)..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / d;
            }
        }
        Ok(BandedCholesky {
            n: self.n,
            bandwidth: self.bandwidth,
            l,
        })
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Solves A x = b via forward and backward substitution.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n);
        let w = self.bandwidth + 1;
        let mut x = b.clone();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            let mut s = x[i];
            for k in lo..i {
                s -= self.l[i * w + (i - k)] * x[k];
            }
            x[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bandwidth + 1).min(self.n);
            let mut s = x[i];
            for k in (i + 1)..hi {
                s -= self.l[k * w + (k - i)] * x[k];
            }
            x[i] = s / self.l[i * w];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn random_spd_banded(n: usize, bw: usize, seed: u64) -> (BandedMatrix, DMatrix<f64>) {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut banded = BandedMatrix::zeros(n, bw);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = if i == j { 4.0 + next().abs() } else { next() };
                banded.add(i, j, v);
                dense[(i, j)] += v;
                if i != j {
                    dense[(j, i)] += v;
                }
            }
        }
        (banded, dense)
    }

    #[test]
    fn matvec_matches_dense() {
        let (banded, dense) = random_spd_banded(25, 4, 7);
        let x = DVector::from_fn(25, |i, _| (i as f64 * 0.37).sin());
        let got = banded.matvec(&x);
        let want = &dense * &x;
        for i in 0..25 {
            assert_relative_eq!(got[i], want[i], max_relative = 1e-13);
        }
    }

    #[test]
    fn cholesky_solve_matches_dense_solver() {
        for (n, bw, seed) in [(10, 2, 1), (30, 5, 2), (64, 9, 3)] {
            let (banded, dense) = random_spd_banded(n, bw, seed);
            let b = DVector::from_fn(n, |i, _| ((i + 1) as f64).cos());
            let x = banded.cholesky().unwrap().solve(&b);
            let want = dense.clone().cholesky().unwrap().solve(&b);
            for i in 0..n {
                assert_relative_eq!(x[i], want[i], max_relative = 1e-10);
            }
            let residual = (&dense * &x - &b).norm() / b.norm();
            assert!(residual < 1e-12, "residual {residual}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_matrix() {
        let mut m = BandedMatrix::zeros(3, 1);
        m.add(0, 0, 1.0);
        m.add(1, 1, -2.0);
        m.add(2, 2, 1.0);
        assert!(m.cholesky().is_err());
    }

    #[test]
    fn tridiagonal_laplacian_solves_linear_profile() {
        // Second-difference matrix with unit load reproduces the known
        // quadratic profile x_i = i (n + 1 - i) / 2 for b = ones.
        let n = 12;
        let mut m = BandedMatrix::zeros(n, 1);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
        }
        let b = DVector::from_element(n, 1.0);
        let x = m.cholesky().unwrap().solve(&b);
        for i in 0..n {
            let fi = (i + 1) as f64;
            let want = fi * (n as f64 + 1.0 - fi) / 2.0;
            assert_relative_eq!(x[i], want, max_relative = 1e-12);
        }
    }

    #[test]
    fn get_reads_back_symmetric_entries() {
        let mut m = BandedMatrix::zeros(5, 2);
        m.add(3, 1, 2.5);
        assert_eq!(m.get(3, 1), 2.5);
        assert_eq!(m.get(1, 3), 2.5);
        assert_eq!(m.get(0, 4), 0.0);
    }
}
