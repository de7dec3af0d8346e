//! Banded matrices with block structure and an LU solver with partial
//! pivoting inside the band.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-300;

/// Square matrix whose nonzeros lie within `ml` sub-diagonals and `mu`
/// super-diagonals. Block helpers address `bs x bs` tiles; the band is
/// stored densely row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedBlockMatrix {
    n: usize,
    bs: usize,
    ml: usize,
    mu: usize,
    data: Vec<f64>,
    lu: Option<BandLu>,
}

#[derive(Debug, Clone, PartialEq)]
struct BandLu {
    /// Row-major band of U with width `ml + mu + 1` starting at the diagonal.
    u: Vec<f64>,
    /// Multipliers, `ml` per column.
    l: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedBlockMatrix {
    /// `block_rows` block rows of size `block_size`, with `lower`/`upper`
    /// block bandwidths.
    pub fn new(block_size: usize, block_rows: usize, lower: usize, upper: usize) -> Self {
        let n = block_size * block_rows;
        let ml = (block_size * (lower + 1) - 1).min(n.saturating_sub(1));
        let mu = (block_size * (upper + 1) - 1).min(n.saturating_sub(1));
        Self::with_bandwidths(n, block_size, ml, mu)
    }

    /// Scalar bandwidths; `block_size` only affects the block accessors.
    pub fn with_bandwidths(n: usize, block_size: usize, ml: usize, mu: usize) -> Self {
        BandedBlockMatrix {
            n,
            bs: block_size.max(1),
            ml,
            mu,
            data: vec![0.0; n * (ml + mu + 1)],
            lu: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::with_bandwidths(n, 1, 0, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.bs
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.ml, self.mu)
    }

    pub fn is_factored(&self) -> bool {
        self.lu.is_some()
    }

    fn in_band(&self, r: usize, c: usize) -> bool {
        r < self.n && c < self.n && c + self.ml >= r && c <= r + self.mu
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        r * (self.ml + self.mu + 1) + (c + self.ml - r)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if self.in_band(r, c) {
            self.data[self.slot(r, c)]
        } else {
            0.0
        }
    }

    /// Panics when `(r, c)` lies outside the band and `v != 0`.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        if !self.in_band(r, c) {
            assert!(v == 0.0, "entry ({r}, {c}) outside band ({}, {})", self.ml, self.mu);
            return;
        }
        let s = self.slot(r, c);
        self.data[s] = v;
        self.lu = None;
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        assert!(self.in_band(r, c), "entry ({r}, {c}) outside band ({}, {})", self.ml, self.mu);
        let s = self.slot(r, c);
        self.data[s] += v;
        self.lu = None;
    }

    pub fn block(&self, br: usize, bc: usize) -> Vec<Vec<f64>> {
        (0..self.bs)
            .map(|i| (0..self.bs).map(|j| self.get(br * self.bs + i, bc * self.bs + j)).collect())
            .collect()
    }

    pub fn add_block(&mut self, br: usize, bc: usize, block: &[Vec<f64>]) {
        for (i, row) in block.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                self.add(br * self.bs + i, bc * self.bs + j, *v);
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.ml);
                let hi = (r + self.mu).min(self.n - 1);
                (lo..=hi).map(|c| self.data[self.slot(r, c)] * x[c]).sum()
            })
            .collect()
    }

    /// Computes and caches the LU factorisation.
    pub fn factorize(&mut self) -> Result<()> {
        if self.lu.is_some() {
            return Ok(());
        }
        let (n, ml, mu) = (self.n, self.ml, self.mu);
        let w = ml + mu + 1;
        let mut u = vec![0.0; n * w];
        let at = |r: usize, c: usize| r * w + (c - r);
        // pre-pivot rows reach at most r + mu; pivoting widens that to r + ml + mu
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                let lo = r.saturating_sub(ml);
                let hi = (r + ml + mu).min(n - 1);
                let mut row = vec![0.0; hi + 1 - lo];
                for c in lo..=hi.min(r + mu) {
                    row[c - lo] = self.data[self.slot(r, c)];
                }
                row
            })
            .collect();
        let lo_of = |r: usize| r.saturating_sub(ml);
        let mut l = vec![0.0; n * ml.max(1)];
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + ml).min(n - 1);
            let mut p = k;
            let mut best = rows[k][k - lo_of(k)].abs();
            for r in k + 1..=last {
                let v = rows[r][k - lo_of(r)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > PIVOT_TOL) || !best.is_finite() {
                return Err(Error::Singular { row: k, pivot: best });
            }
            piv[k] = p;
            let hi = (k + ml + mu).min(n - 1);
            if p != k {
                for c in k..=hi {
                    let (ak, ap) = (c - lo_of(k), c - lo_of(p));
                    let tmp = rows[k][ak];
                    rows[k][ak] = rows[p][ap];
                    rows[p][ap] = tmp;
                }
            }
            let pivot = rows[k][k - lo_of(k)];
            for r in k + 1..=last {
                let f = rows[r][k - lo_of(r)] / pivot;
                l[k * ml + (r - k - 1)] = f;
                if f != 0.0 {
                    let lr = lo_of(r);
                    let lk = lo_of(k);
                    for c in k + 1..=hi {
                        let v = rows[k][c - lk];
                        rows[r][c - lr] -= f * v;
                    }
                }
                rows[r][k - lo_of(r)] = 0.0;
            }
            for c in k..=hi {
                u[at(k, c)] = rows[k][c - lo_of(k)];
            }
        }
        self.lu = Some(BandLu { u, l, piv });
        Ok(())
    }

    /// Solves `A x = rhs`, reusing the cached factorisation when present.
    pub fn solve(&mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Dimension(format!(
                "right-hand side has {} entries, matrix has {} rows",
                rhs.len(),
                self.n
            )));
        }
        self.factorize()?;
        let lu = self.lu.as_ref().expect("factorised above");
        let (n, ml, mu) = (self.n, self.ml, self.mu);
        let w = ml + mu + 1;
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, lu.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + ml).min(n - 1) {
                    x[r] -= lu.l[k * ml + (r - k - 1)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let hi = (k + ml + mu).min(n - 1);
            let mut s = x[k];
            for c in k + 1..=hi {
                s -= lu.u[k * w + (c - k)] * x[c];
            }
            x[k] = s / lu.u[k * w];
        }
        Ok(x)
    }
}

/// Convenience wrapper: factorise (or reuse) and solve.
pub fn banded_lu_solve(a: &mut BandedBlockMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    a.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let mut a = BandedBlockMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(banded_lu_solve(&mut a, &b).unwrap(), b);
    }

    #[test]
    fn two_by_two_block() {
        let mut a = BandedBlockMatrix::new(2, 1, 0, 0);
        a.add_block(0, 0, &[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = a.solve(&[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_banded_recovers_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 60;
        let mut a = BandedBlockMatrix::with_bandwidths(n, 1, 4, 4);
        for r in 0..n {
            for c in r.saturating_sub(4)..=(r + 4).min(n - 1) {
                a.set(r, c, rng.random_range(-1.0..1.0));
            }
            a.add(r, r, 3.0);
        }
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = a.mul_vec(&x);
        let y = a.solve(&b).unwrap();
        let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        let res = a.mul_vec(&y);
        let rn = res.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let bn = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(rn <= 1e-12 * bn);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a row swap
        let mut a = BandedBlockMatrix::with_bandwidths(2, 1, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        assert_eq!(a.solve(&[2.0, 5.0]).unwrap(), vec![5.0, 2.0]);
    }

    #[test]
    fn singular_matrix_reports_row() {
        let mut a = BandedBlockMatrix::with_bandwidths(3, 1, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        match a.solve(&[1.0, 1.0, 1.0]) {
            Err(Error::Singular { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn factorisation_is_cached_and_invalidated() {
        let mut a = BandedBlockMatrix::identity(3);
        a.factorize().unwrap();
        assert!(a.is_factored());
        a.solve(&[1.0, 2.0, 3.0]).unwrap();
        assert!(a.is_factored());
        a.set(1, 1, 2.0);
        assert!(!a.is_factored());
        assert_eq!(a.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 1.0, 3.0]);
    }

    #[test]
    fn out_of_band_reads_zero() {
        let a = BandedBlockMatrix::new(3, 4, 1, 1);
        assert_eq!(a.bandwidths(), (5, 5));
        assert_eq!(a.get(0, 11), 0.0);
    }
}
