//! Sparse Hamiltonians built from two-site terms, and the action of `exp(-itH)` by a
//! truncated Taylor series with scaling.
//!
//! Used where a full-ring eigendecomposition would be too slow (12 sites = 4096 states).

use super::{c64, CMat, ZERO};
use crate::error::{domain, Result};
use faer::{MatMut, MatRef};

/// Vectors advanced together by the blocked exponential.
const BLOCK: usize = 8;

/// Hermitian matrix in compressed-row form over the full ring.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<c64>,
    /// Max absolute row sum: an upper bound on the spectral radius.
    row_bound: f64,
}

impl SparseHermitian {
    /// Assemble `Σ h_k` where each `h_k` is a 4×4 matrix on sites `(x_k, y_k)`, `x_k < y_k`,
    /// of an `n`-site ring.
    pub fn from_two_site(n: usize, terms: &[(usize, usize, &CMat)]) -> Result<Self> {
        for &(x, y, h) in terms {
            if x >= y || y >= n {
                return domain(format!("bad term sites ({x},{y}) on {n} sites"));
            }
            if h.nrows() != 4 || h.ncols() != 4 {
                return domain("two-site term must be 4x4");
            }
        }
        let dim = 1usize << n;
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut row: Vec<(usize, c64)> = Vec::new();
        row_ptr.push(0);
        let mut row_bound = 0.0f64;
        for i in 0..dim {
            row.clear();
            for &(x, y, h) in terms {
                let sx = n - 1 - x;
                let sy = n - 1 - y;
                let li = (((i >> sx) & 1) << 1) | ((i >> sy) & 1);
                let base = i & !(1 << sx) & !(1 << sy);
                for lj in 0..4 {
                    let v = h[(li, lj)];
                    if v != ZERO {
                        let j = base | ((lj >> 1) << sx) | ((lj & 1) << sy);
                        row.push((j, v));
                    }
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            let mut sum = 0.0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = ZERO;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if v.norm() > 0.0 {
                    cols.push(j as u32);
                    vals.push(v);
                    sum += v.norm();
                }
            }
            row_bound = row_bound.max(sum);
            row_ptr.push(cols.len());
        }
        Ok(SparseHermitian { dim, row_ptr, cols, vals, row_bound })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_bound(&self) -> f64 {
        self.row_bound
    }

    /// `y = s · H x`
    pub fn matvec_scaled(&self, s: c64, x: &[c64], y: &mut [c64]) {
        for i in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = acc * s;
        }
    }

    pub fn matvec(&self, x: &[c64], y: &mut [c64]) {
        self.matvec_scaled(c64::new(1.0, 0.0), x, y)
    }

    /// Dense form (for small rings and tests).
    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k] as usize)] = self.vals[k];
            }
        }
        m
    }

    /// In place `X ← exp(-i t H) X` for every column of `X`.
    ///
    /// Columns are processed in interleaved blocks so each pass over the sparse matrix
    /// serves several vectors.
    pub fn expm_apply(&self, t: f64, mut x: MatMut<'_, c64>) {
        assert_eq!(x.nrows(), self.dim);
        if t == 0.0 || self.row_bound == 0.0 {
            return;
        }
        let (steps, tau) = self.step_plan(t);
        // split layout: row i holds BLOCK real parts then BLOCK imaginary parts
        let w = 2 * BLOCK;
        let mut v = vec![0.0; self.dim * w];
        let mut term = vec![0.0; self.dim * w];
        let mut next = vec![0.0; self.dim * w];
        let mut start = 0;
        while start < x.ncols() {
            let width = BLOCK.min(x.ncols() - start);
            v.iter_mut().for_each(|e| *e = 0.0);
            for i in 0..self.dim {
                for c in 0..width {
                    let z = x[(i, start + c)];
                    v[i * w + c] = z.re;
                    v[i * w + BLOCK + c] = z.im;
                }
            }
            for _ in 0..steps {
                self.taylor_step_block(tau, &mut v, &mut term, &mut next);
            }
            for i in 0..self.dim {
                for c in 0..width {
                    x[(i, start + c)] = c64::new(v[i * w + c], v[i * w + BLOCK + c]);
                }
            }
            start += width;
        }
    }

    /// `next = -i σ · H term` on the split block layout.
    fn spmm_scaled(&self, sigma: f64, term: &[f64], next: &mut [f64]) {
        let w = 2 * BLOCK;
        for i in 0..self.dim {
            let mut re = [0.0; BLOCK];
            let mut im = [0.0; BLOCK];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.vals[k];
                let j = self.cols[k] as usize * w;
                let (sr, si) = term[j..j + w].split_at(BLOCK);
                for c in 0..BLOCK {
                    re[c] += a.re * sr[c] - a.im * si[c];
                    im[c] += a.re * si[c] + a.im * sr[c];
                }
            }
            let (dr, di) = next[i * w..(i + 1) * w].split_at_mut(BLOCK);
            for c in 0..BLOCK {
                dr[c] = sigma * im[c];
                di[c] = -sigma * re[c];
            }
        }
    }

    fn taylor_step_block(&self, tau: f64, v: &mut [f64], term: &mut Vec<f64>, next: &mut Vec<f64>) {
        term.copy_from_slice(v);
        let vnorm: f64 = v.iter().map(|z| z * z).sum::<f64>().sqrt();
        let mut small = 0;
        for k in 1..80 {
            self.spmm_scaled(tau / k as f64, term, next);
            std::mem::swap(term, next);
            let mut tn = 0.0;
            for (a, b) in v.iter_mut().zip(term.iter()) {
                *a += b;
                tn += b * b;
            }
            if tn.sqrt() <= 1e-17 * vnorm {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }

    /// `exp(-i t H) v`
    pub fn expm_vec(&self, t: f64, v: &[c64]) -> Vec<c64> {
        let mut out = v.to_vec();
        if t == 0.0 || self.row_bound == 0.0 {
            return out;
        }
        let (steps, tau) = self.step_plan(t);
        let mut term = vec![ZERO; self.dim];
        let mut next = vec![ZERO; self.dim];
        for _ in 0..steps {
            self.taylor_step(tau, &mut out, &mut term, &mut next);
        }
        out
    }

    /// `exp(-i t H) X` into a new matrix.
    pub fn expm_mat(&self, t: f64, x: MatRef<'_, c64>) -> CMat {
        let mut out = x.to_owned();
        self.expm_apply(t, out.as_mut());
        out
    }

    fn step_plan(&self, t: f64) -> (usize, f64) {
        const THETA: f64 = 3.0;
        let steps = ((t.abs() * self.row_bound) / THETA).ceil().max(1.0) as usize;
        (steps, t / steps as f64)
    }

    fn taylor_step(&self, tau: f64, v: &mut [c64], term: &mut Vec<c64>, next: &mut Vec<c64>) {
        term.copy_from_slice(v);
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut small = 0;
        for k in 1..80 {
            let s = c64::new(0.0, -tau / k as f64);
            self.matvec_scaled(s, term, next);
            std::mem::swap(term, next);
            let mut tn = 0.0;
            for (a, b) in v.iter_mut().zip(term.iter()) {
                *a += b;
                tn += b.norm_sqr();
            }
            if tn.sqrt() <= 1e-17 * vnorm {
                small += 1;
                if small == 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_hermitian, haar_unitary, kron};
    use faer::Mat;

    fn random_herm(seed: u64) -> CMat {
        let u = haar_unitary(4, seed).unwrap();
        let d = Mat::from_fn(4, 4, |i, j| if i == j { c64::new(i as f64 - 1.3, 0.0) } else { ZERO });
        &u * &d * u.adjoint()
    }

    #[test]
    fn assembly_matches_dense_kron() {
        let n = 4;
        let h01 = random_herm(1);
        let h13 = random_herm(2);
        let sp = SparseHermitian::from_two_site(n, &[(0, 1, &h01), (1, 3, &h13)]).unwrap();
        let id = |k: usize| CMat::identity(1 << k, 1 << k);
        let a = kron(h01.as_ref(), id(2).as_ref());
        // h13 acts on sites 1 and 3: conjugate a kron on (1,2,3) ordering by a swap of sites 2,3.
        let mut b = CMat::zeros(16, 16);
        for i in 0..16usize {
            for j in 0..16usize {
                let same0 = (i >> 3) & 1 == (j >> 3) & 1;
                let same2 = (i >> 1) & 1 == (j >> 1) & 1;
                if same0 && same2 {
                    let li = (((i >> 2) & 1) << 1) | (i & 1);
                    let lj = (((j >> 2) & 1) << 1) | (j & 1);
                    b[(i, j)] = h13[(li, lj)];
                }
            }
        }
        let dense = a + b;
        assert!((sp.to_dense() - dense).norm_max() < 1e-14);
    }

    #[test]
    fn taylor_matches_eigendecomposition() {
        let n = 5;
        let hs: Vec<CMat> = (0..n).map(|k| random_herm(10 + k as u64)).collect();
        let terms: Vec<(usize, usize, &CMat)> = (0..n - 1).map(|x| (x, x + 1, &hs[x])).collect();
        let sp = SparseHermitian::from_two_site(n, &terms).unwrap();
        let dense = sp.to_dense();
        for t in [0.1, 1.7, -2.3] {
            let exact = expm_hermitian(dense.as_ref(), t).unwrap();
            let got = sp.expm_mat(t, CMat::identity(32, 32).as_ref());
            assert!((got - &exact).norm_max() < 1e-12, "t = {t}");
        }
    }
}
