//! Small dense/banded linear solvers for the Newton systems.

/// General banded matrix with partial pivoting, LAPACK dgbtrf-style
/// storage: `ab[row_band][col]` holds A[i][j] at
/// row_band = kl + ku + i - j, leaving kl extra rows for pivot fill-in.
pub struct BandedMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// (2*kl + ku + 1) x n, column-major bands.
    ab: Vec<f64>,
    stride: usize,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let stride = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            ab: vec![0.0; stride * n],
            stride,
            pivots: vec![0; n],
            factored: false,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "outside band: ({i}, {j})");
        (self.kl + self.ku + i - j) + j * self.stride
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let at = self.idx(i, j);
        self.ab[at] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let at = self.idx(i, j);
        self.ab[at] += v;
    }

    /// LU factorization with partial pivoting (row swaps within the band).
    pub fn factor(&mut self) -> Result<(), String> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku; // super-diagonals including fill-in
        for j in 0..n {
            // pivot search in column j, rows j..=min(j+kl, n-1)
            let last = (j + kl).min(n - 1);
            let mut piv = j;
            let mut piv_val = self.band_get(kv, j, j).abs();
            for i in j + 1..=last {
                let v = self.band_get(kv, i, j).abs();
                if v > piv_val {
                    piv_val = v;
                    piv = i;
                }
            }
            if piv_val == 0.0 {
                return Err(format!("singular banded matrix at column {j}"));
            }
            self.pivots[j] = piv;
            if piv != j {
                // swap rows j and piv across their shared band columns
                let hi = (j + kv).min(n - 1);
                for col in j..=hi {
                    let a = self.band_get(kv, j, col);
                    let b = self.band_get(kv, piv, col);
                    self.band_set(kv, j, col, b);
                    self.band_set(kv, piv, col, a);
                }
            }
            let djj = self.band_get(kv, j, j);
            for i in j + 1..=last {
                let lij = self.band_get(kv, i, j) / djj;
                self.band_set(kv, i, j, lij);
                let hi = (j + kv).min(n - 1);
                for col in j + 1..=hi {
                    let upd = self.band_get(kv, j, col) * lij;
                    let cur = self.band_get(kv, i, col);
                    self.band_set(kv, i, col, cur - upd);
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    // accessors with the widened band (kv = kl + ku super-diagonals)
    #[inline]
    fn band_get(&self, kv: usize, i: usize, j: usize) -> f64 {
        if i + kv >= j && j + self.kl >= i {
            self.ab[(self.kl + kv + i - j - self.kl) + j * self.stride]
        } else {
            0.0
        }
    }

    #[inline]
    fn band_set(&mut self, kv: usize, i: usize, j: usize, v: f64) {
        debug_assert!(i + kv >= j && j + self.kl >= i);
        self.ab[(kv + i - j) + j * self.stride] = v;
    }

    /// Solve A x = b in place after `factor`.
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored, "factor() must be called first");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        // forward: apply pivots and L
        for j in 0..n {
            let piv = self.pivots[j];
            if piv != j {
                b.swap(j, piv);
            }
            let last = (j + kl).min(n - 1);
            for i in j + 1..=last {
                b[i] -= self.band_get(kv, i, j) * b[j];
            }
        }
        // backward: U
        for j in (0..n).rev() {
            let hi = (j + kv).min(n - 1);
            for col in j + 1..=hi {
                b[j] -= self.band_get(kv, j, col) * b[col];
            }
            b[j] /= self.band_get(kv, j, j);
        }
    }
}

/// Thomas algorithm for a tridiagonal system (lower, diag, upper).
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<(), String> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    if d == 0.0 {
        return Err("zero pivot in tridiagonal solve".into());
    }
    c[0] = upper[0] / d;
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - lower[i - 1] * c[i - 1];
        if d == 0.0 {
            return Err(format!("zero pivot at row {i}"));
        }
        if i < n - 1 {
            c[i] = upper[i] / d;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Dense Gaussian elimination with partial pivoting for the small Schur
/// systems (K x K).
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<(), String> {
    let n = b.len();
    for j in 0..n {
        let mut piv = j;
        for i in j + 1..n {
            if a[i][j].abs() > a[piv][j].abs() {
                piv = i;
            }
        }
        if a[piv][j] == 0.0 {
            return Err("singular dense system".into());
        }
        a.swap(j, piv);
        b.swap(j, piv);
        for i in j + 1..n {
            let f = a[i][j] / a[j][j];
            for col in j..n {
                a[i][col] -= f * a[j][col];
            }
            b[i] -= f * b[j];
        }
    }
    for j in (0..n).rev() {
        for col in j + 1..n {
            b[j] -= a[j][col] * b[col];
        }
        b[j] /= a[j][j];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn banded_solve_matches_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let n = rng.gen_range(8..40);
            let kl = rng.gen_range(1..4usize);
            let ku = rng.gen_range(1..4usize);
            let mut dense = vec![vec![0.0; n]; n];
            let mut banded = BandedMatrix::zeros(n, kl, ku);
            for i in 0..n {
                for j in 0..n {
                    if i + ku >= j && j + kl >= i {
                        let v: f64 = rng.gen_range(-1.0..1.0)
                            + if i == j { 3.0 } else { 0.0 };
                        dense[i][j] = v;
                        banded.set(i, j, v);
                    }
                }
            }
            let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut b: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum())
                .collect();
            banded.factor().unwrap();
            banded.solve(&mut b);
            for i in 0..n {
                assert!(
                    (b[i] - x_true[i]).abs() < 1e-9,
                    "trial {trial}, row {i}: {} vs {}",
                    b[i],
                    x_true[i]
                );
            }
        }
    }

    #[test]
    fn banded_pivoting_handles_weak_diagonal() {
        // leading diagonal entry far smaller than its sub-diagonal
        let mut m = BandedMatrix::zeros(3, 1, 1);
        m.set(0, 0, 1e-14);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 1.0);
        m.set(1, 2, 1.0);
        m.set(2, 1, 1.0);
        m.set(2, 2, 2.0);
        m.factor().unwrap();
        // b for x = (1, 2, 3)
        let mut b = vec![1e-14 + 2.0, 6.0, 8.0];
        m.solve(&mut b);
        assert!((b[0] - 1.0).abs() < 1e-9);
        assert!((b[1] - 2.0).abs() < 1e-9);
        assert!((b[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn tridiagonal_and_dense_solvers() {
        let lower = [1.0, 1.0, 1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let upper = [1.0, 1.0, 1.0];
        // b for x = (1, 1, 1, 1)
        let mut b = vec![5.0, 6.0, 6.0, 5.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut b).unwrap();
        for v in &b {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let mut a = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        let mut rhs = vec![4.0, 5.0]; // x = (1, 2)
        solve_dense(&mut a, &mut rhs).unwrap();
        assert!((rhs[0] - 1.0).abs() < 1e-12 && (rhs[1] - 2.0).abs() < 1e-12);
    }
}
