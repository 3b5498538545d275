//! Dense complex-matrix backbone: operators on site subsets, norms, partial traces,
//! embeddings, Hermitian exponentials and Haar sampling.

pub mod krylov;
pub mod sparse;

use crate::error::{domain, Error, Result};
use crate::lattice::Region;
use faer::{Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub use faer::c64;

/// Column-major dense complex matrix.
pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Default tolerance for unitarity/Hermiticity checks.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest support handled by the dense eigen/SVD norm routines before switching to Lanczos.
const DENSE_NORM_CUTOFF: usize = 1024;

/// Complex matrix acting on an explicit set of sites.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    support: Region,
    matrix: CMat,
}

impl DenseOperator {
    pub fn new(support: Region, matrix: CMat) -> Result<Self> {
        let dim = 1usize << support.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return domain(format!(
                "matrix is {}x{} but support of {} sites needs {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols(),
                support.len()
            ));
        }
        Ok(DenseOperator { support, matrix })
    }

    pub fn identity(support: Region) -> Self {
        let dim = 1usize << support.len();
        DenseOperator { support, matrix: CMat::identity(dim, dim) }
    }

    pub fn zeros(support: Region) -> Self {
        let dim = 1usize << support.len();
        DenseOperator { support, matrix: CMat::zeros(dim, dim) }
    }

    pub fn support(&self) -> &Region {
        &self.support
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator { support: self.support.clone(), matrix: self.matrix.adjoint().to_owned() }
    }

    pub fn scale(&self, s: c64) -> Self {
        DenseOperator { support: self.support.clone(), matrix: scaled(self.matrix.as_ref(), s) }
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Lift both operands to the union of supports.
    fn aligned(&self, other: &Self) -> Result<(CMat, CMat, Region)> {
        let u = self.support.union(&other.support);
        let a = if self.support == u { self.matrix.clone() } else { self.embed(&u)?.matrix };
        let b = if other.support == u { other.matrix.clone() } else { other.embed(&u)?.matrix };
        Ok((a, b, u))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a, b, u) = self.aligned(other)?;
        Ok(DenseOperator { support: u, matrix: a + b })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let (a, b, u) = self.aligned(other)?;
        Ok(DenseOperator { support: u, matrix: a - b })
    }

    /// Operator product `self · other` on the union of supports.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b, u) = self.aligned(other)?;
        Ok(DenseOperator { support: u, matrix: a * b })
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let (a, b, u) = self.aligned(other)?;
        Ok(DenseOperator { support: u, matrix: &a * &b - &b * &a })
    }

    /// Tensor with identity on `target ∖ support`, respecting site order.
    pub fn embed(&self, target: &Region) -> Result<Self> {
        if !self.support.is_subset(target) {
            return domain("embed: support is not contained in the target region");
        }
        let rest = target.difference(&self.support);
        let ts = index_table(&self.support, target);
        let tr = index_table(&rest, target);
        let d = self.dim();
        let mut m = CMat::zeros(1 << target.len(), 1 << target.len());
        for &r in &tr {
            for b in 0..d {
                for a in 0..d {
                    let v = self.matrix[(a, b)];
                    if v != ZERO {
                        m[(ts[a] | r, ts[b] | r)] = v;
                    }
                }
            }
        }
        Ok(DenseOperator { support: target.clone(), matrix: m })
    }

    /// Unnormalized partial trace over `traced ⊆ support`.
    pub fn partial_trace(&self, traced: &Region) -> Result<Self> {
        if !traced.is_subset(&self.support) {
            return domain("partial_trace: traced region is not contained in the support");
        }
        let kept = self.support.difference(traced);
        let tk = index_table(&kept, &self.support);
        let tt = index_table(traced, &self.support);
        let dk = tk.len();
        let m = Mat::from_fn(dk, dk, |a, b| tt.iter().map(|&c| self.matrix[(tk[a] | c, tk[b] | c)]).sum());
        Ok(DenseOperator { support: kept, matrix: m })
    }

    /// Normalized reduction `2^{-|C|} tr_C(A)` onto `support ∩ keep`.
    pub fn reduce_to(&self, keep: &Region) -> Result<Self> {
        let traced = self.support.difference(keep);
        let r = self.partial_trace(&traced)?;
        Ok(r.scale(c64::new((-(traced.len() as f64)).exp2(), 0.0)))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        is_hermitian(self.matrix.as_ref(), tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        is_unitary(self.matrix.as_ref(), tol)
    }

    pub fn operator_norm(&self) -> Result<f64> {
        operator_norm(self.matrix.as_ref())
    }

    pub fn frobenius_norm(&self) -> Result<f64> {
        frobenius_norm(self.matrix.as_ref())
    }

    pub fn trace_norm(&self) -> Result<f64> {
        trace_norm(self.matrix.as_ref())
    }
}

/// For each index of the `sub` subsystem, the index in `within` with only the `sub` bits set.
///
/// Site ordering is ascending = most significant.
pub fn index_table(sub: &Region, within: &Region) -> Vec<usize> {
    let m = within.len();
    let shifts: Vec<usize> = sub
        .sites()
        .iter()
        .map(|&s| m - 1 - within.position(s).expect("sub must be inside within"))
        .collect();
    let k = sub.len();
    (0..1usize << k)
        .map(|a| {
            let mut idx = 0;
            for (j, &sh) in shifts.iter().enumerate() {
                if (a >> (k - 1 - j)) & 1 == 1 {
                    idx |= 1 << sh;
                }
            }
            idx
        })
        .collect()
}

/// Bit mask (in `within` index space) of the given sub-region.
pub fn region_mask(sub: &Region, within: &Region) -> usize {
    let m = within.len();
    sub.sites().iter().map(|&s| 1usize << (m - 1 - within.position(s).expect("sub inside within"))).sum()
}

fn check_finite(a: MatRef<'_, c64>) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Numerical("non-finite matrix entry".into()));
            }
        }
    }
    Ok(())
}

fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

/// Entrywise check `|A - A†| ≤ tol · max(1, max|A|)`.
pub fn is_hermitian(a: MatRef<'_, c64>, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = max_abs(a).max(1.0);
    for j in 0..a.ncols() {
        for i in 0..=j {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// `‖U†U − I‖_HS ≤ tol` (the Hilbert–Schmidt norm dominates the operator norm).
pub fn is_unitary(u: MatRef<'_, c64>, tol: f64) -> bool {
    if u.nrows() != u.ncols() {
        return false;
    }
    let g = u.adjoint() * u;
    let mut s = 0.0;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let d = if i == j { g[(i, j)] - ONE } else { g[(i, j)] };
            s += d.norm_sqr();
        }
    }
    s.sqrt() <= tol
}

pub fn hermitian_eigenvalues(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue solver failed: {e:?}")))
}

fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    a.singular_values().map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))
}

/// Largest singular value (largest |eigenvalue| for Hermitian input).
pub fn operator_norm(a: MatRef<'_, c64>) -> Result<f64> {
    check_finite(a)?;
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    if is_hermitian(a, 1e-13) {
        if a.nrows() > DENSE_NORM_CUTOFF {
            return Ok(krylov::hermitian_norm(a.nrows(), |x, y| dense_matvec(a, x, y), 1e-12, 300));
        }
        let ev = hermitian_eigenvalues(a)?;
        Ok(ev.iter().fold(0.0f64, |m, &x| m.max(x.abs())))
    } else {
        let sv = singular_values(a)?;
        Ok(sv.iter().fold(0.0f64, |m, &x| m.max(x)))
    }
}

/// Normalized Frobenius norm `√(tr(A†A)/dim)`.
pub fn frobenius_norm(a: MatRef<'_, c64>) -> Result<f64> {
    check_finite(a)?;
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    Ok((s / a.nrows() as f64).sqrt())
}

/// Sum of singular values.
pub fn trace_norm(a: MatRef<'_, c64>) -> Result<f64> {
    check_finite(a)?;
    if is_hermitian(a, 1e-13) {
        Ok(hermitian_eigenvalues(a)?.iter().map(|x| x.abs()).sum())
    } else {
        Ok(singular_values(a)?.iter().sum())
    }
}

/// `y = A x` for a dense matrix.
pub fn dense_matvec(a: MatRef<'_, c64>, x: &[c64], y: &mut [c64]) {
    y.iter_mut().for_each(|v| *v = ZERO);
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == ZERO {
            continue;
        }
        let col = a.col(j);
        for i in 0..a.nrows() {
            y[i] += col[i] * xj;
        }
    }
}

/// Apply `op` (supported on a subset of `within`) to a state vector of `within`, in place.
pub fn apply_local(op: &DenseOperator, within: &Region, v: &mut [c64]) -> Result<()> {
    if !op.support.is_subset(within) || v.len() != 1usize << within.len() {
        return domain("apply_local: operator support or vector length does not match");
    }
    let rest = within.difference(&op.support);
    let ts = index_table(&op.support, within);
    let tr = index_table(&rest, within);
    let d = op.dim();
    let m = op.matrix.as_ref();
    let mut x = vec![ZERO; d];
    for &r in &tr {
        for a in 0..d {
            x[a] = v[ts[a] | r];
        }
        for a in 0..d {
            v[ts[a] | r] = ZERO;
        }
        for (b, &xb) in x.iter().enumerate() {
            if xb == ZERO {
                continue;
            }
            let col = m.col(b);
            for a in 0..d {
                v[ts[a] | r] += col[a] * xb;
            }
        }
    }
    Ok(())
}

/// Spectral norm of a Hermitian map given only by its action: exact (dense) for small
/// dimensions, Lanczos otherwise.
pub fn hermitian_map_norm(dim: usize, mut apply: impl FnMut(&[c64], &mut [c64]), tol: f64) -> Result<f64> {
    if dim <= 256 {
        let mut m = CMat::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        let mut y = vec![ZERO; dim];
        for j in 0..dim {
            e[j] = ONE;
            apply(&e, &mut y);
            e[j] = ZERO;
            for i in 0..dim {
                m[(i, j)] = y[i];
            }
        }
        // symmetrize away round-off before the Hermitian solver
        let h = Mat::from_fn(dim, dim, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        let ev = hermitian_eigenvalues(h.as_ref())?;
        return Ok(ev.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
    }
    Ok(krylov::hermitian_norm(dim, apply, tol, 400))
}

/// Spectral decomposition of a Hermitian matrix: (eigenvalues, eigenvectors as columns).
pub fn eigh(h: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    if !is_hermitian(h, 1e-10) {
        return domain("matrix is not Hermitian to 1e-10");
    }
    let e = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Numerical(format!("eigen solver failed: {e:?}")))?;
    let s = e.S().column_vector();
    let vals = (0..h.nrows()).map(|i| s[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

/// `exp(-i t H)` for Hermitian `H`, via eigendecomposition.
pub fn expm_hermitian(h: MatRef<'_, c64>, t: f64) -> Result<CMat> {
    let (vals, v) = eigh(h)?;
    let d = h.nrows();
    let mut vd = v.clone();
    for (j, &l) in vals.iter().enumerate() {
        let ph = c64::cis(-l * t);
        for i in 0..d {
            vd[(i, j)] *= ph;
        }
    }
    Ok(&vd * v.adjoint())
}

/// `exp(-i t H)` on the support of `H`.
pub fn hermitian_expm(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    Ok(DenseOperator { support: h.support.clone(), matrix: expm_hermitian(h.matrix.as_ref(), t)? })
}

/// Haar-random unitary from QR of a complex Ginibre matrix, with positive diagonal of R.
pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMat> {
    if dim == 0 {
        return domain("haar_unitary: dim must be positive");
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = CMat::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = c64::new(re * s, im * s);
        }
    }
    let qr = g.qr();
    let mut q = qr.compute_Q();
    let r = qr.R();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    Ok(q)
}

/// Complex Gaussian matrix on `support`, entries of unit variance.
pub fn ginibre_operator<R: Rng + ?Sized>(support: &Region, rng: &mut R) -> DenseOperator {
    let d = 1usize << support.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = Mat::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re * s, im * s)
    });
    DenseOperator { support: support.clone(), matrix: m }
}

/// `(G + G†)/2` for a Ginibre `G`.
pub fn random_hermitian<R: Rng + ?Sized>(support: &Region, rng: &mut R) -> DenseOperator {
    let g = ginibre_operator(support, rng);
    let m = Mat::from_fn(g.dim(), g.dim(), |i, j| (g.matrix[(i, j)] + g.matrix[(j, i)].conj()) * 0.5);
    DenseOperator { support: support.clone(), matrix: m }
}

/// Seeded Haar-random unitary of dimension `dim`.
pub fn haar_unitary(dim: usize, seed: u64) -> Result<CMat> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    haar_unitary_with(dim, &mut rng)
}

/// Haar-random unitary as an operator on `support`.
pub fn haar_operator<R: Rng + ?Sized>(support: &Region, rng: &mut R) -> Result<DenseOperator> {
    DenseOperator::new(support.clone(), haar_unitary_with(1 << support.len(), rng)?)
}

/// `s · A`
pub fn scaled(a: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// Kronecker product `a ⊗ b` (a on the more significant bits).
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: DenseOperator,
}

impl DensityMatrix {
    pub fn new(op: DenseOperator) -> Result<Self> {
        if !op.is_hermitian(1e-12) {
            return domain("density matrix must be Hermitian");
        }
        let tr = op.trace();
        if (tr - ONE).norm() > 1e-12 {
            return domain(format!("density matrix trace is {tr}, not 1"));
        }
        let min = hermitian_eigenvalues(op.matrix.as_ref())?.into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return domain(format!("density matrix has negative eigenvalue {min:e}"));
        }
        Ok(DensityMatrix { op })
    }

    pub fn op(&self) -> &DenseOperator {
        &self.op
    }

    pub fn into_op(self) -> DenseOperator {
        self.op
    }

    pub fn purity(&self) -> f64 {
        let m = &self.op.matrix;
        let mut s = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                s += m[(i, j)].norm_sqr();
            }
        }
        s
    }
}
