//! Lanczos estimate of the spectral norm of a Hermitian linear map.

use super::{c64, ZERO};
use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn ritz_max_abs(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    t.self_adjoint_eigenvalues(Side::Lower)
        .map(|ev| ev.iter().fold(0.0f64, |m, &x| m.max(x.abs())))
        .unwrap_or(f64::NAN)
}

/// Largest |eigenvalue| of the Hermitian map `apply` on `C^dim`.
///
/// Full reorthogonalization; stops once the extreme Ritz value is stable to `tol` (relative),
/// on an invariant subspace, or after `max_iter` steps.
pub fn hermitian_norm(dim: usize, mut apply: impl FnMut(&[c64], &mut [c64]), tol: f64, max_iter: usize) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<c64> = (0..dim)
        .map(|_| c64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let max_iter = max_iter.min(dim).max(1);
    let mut basis: Vec<Vec<c64>> = Vec::with_capacity(max_iter);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; dim];
    let mut last = f64::NAN;
    let mut scale = 0.0f64;
    basis.push(v);
    loop {
        let k = basis.len() - 1;
        apply(&basis[k], &mut w);
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        // full reorthogonalization (twice is enough)
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bnorm = norm(&w);
        scale = scale.max(a.abs()).max(bnorm);
        let it = alpha.len();
        let done = it >= max_iter || bnorm <= 1e-14 * scale.max(f64::MIN_POSITIVE);
        if done || it % 4 == 0 {
            let cur = ritz_max_abs(&alpha, &beta);
            if done || (cur - last).abs() <= tol * cur.max(f64::MIN_POSITIVE) {
                return cur;
            }
            last = cur;
        }
        beta.push(bnorm);
        let next: Vec<c64> = w.iter().map(|x| x / bnorm).collect();
        basis.push(next);
    }
}

/// Several independent Lanczos runs advanced in lockstep, so that one call of `apply`
/// serves all still-active maps (useful when each application streams a large matrix).
///
/// `apply(active, input, output)`: column `c` of `input` is the vector for map `active[c]`.
pub fn hermitian_norms(dim: usize, count: usize, mut apply: impl FnMut(&[usize], &Mat<c64>, &mut Mat<c64>), tol: f64, max_iter: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    if dim == 0 || count == 0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<c64> = (0..dim)
        .map(|_| c64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let n0 = norm(&start);
    start.iter_mut().for_each(|x| *x /= n0);

    struct Run {
        basis: Vec<Vec<c64>>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        last: f64,
        scale: f64,
    }
    let max_iter = max_iter.min(dim).max(1);
    let mut runs: Vec<Run> = (0..count).map(|_| Run { basis: vec![start.clone()], alpha: vec![], beta: vec![], last: f64::NAN, scale: 0.0 }).collect();
    let mut active: Vec<usize> = (0..count).collect();
    while !active.is_empty() {
        let input = Mat::from_fn(dim, active.len(), |i, c| runs[active[c]].basis.last().unwrap()[i]);
        let mut output = Mat::zeros(dim, active.len());
        apply(&active, &input, &mut output);
        let mut still = Vec::with_capacity(active.len());
        for (c, &m) in active.iter().enumerate() {
            let run = &mut runs[m];
            let mut w: Vec<c64> = output.col(c).iter().copied().collect();
            let a = dot(run.basis.last().unwrap(), &w).re;
            run.alpha.push(a);
            for _ in 0..2 {
                for b in &run.basis {
                    let cc = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= cc * y);
                }
            }
            let bnorm = norm(&w);
            run.scale = run.scale.max(a.abs()).max(bnorm);
            let it = run.alpha.len();
            let done = it >= max_iter || bnorm <= 1e-14 * run.scale.max(f64::MIN_POSITIVE);
            if done || it % 4 == 0 {
                let cur = ritz_max_abs(&run.alpha, &run.beta);
                if done || (cur - run.last).abs() <= tol * cur.max(f64::MIN_POSITIVE) {
                    out[m] = cur;
                    continue;
                }
                run.last = cur;
            }
            run.beta.push(bnorm);
            run.basis.push(w.iter().map(|x| x / bnorm).collect());
            still.push(m);
        }
        active = still;
    }
    out
}
