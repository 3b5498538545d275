//! Time-ordered propagators, Heisenberg evolution, the region projector `ℙ_r`, light-cone
//! scans and the circuitization of a Hamiltonian evolution into four blocks.

mod hhkl;
mod scan;

pub use hhkl::{circuitize, cut_terms, hhkl_cut, hhkl_cut_multi, CircuitReport, EllPolicy, HhklResult};
pub use scan::{commutator_front, frobenius_leakage, leakage_scan, FrontPoint, LeakagePoint};

use crate::error::{domain, Result};
use crate::hamiltonian::{check_cap, HamiltonianModel};
use crate::lattice::{Region, RingLattice};
use crate::linalg::{c64, expm_hermitian, haar_operator, CMat, DenseOperator};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Rings up to this size use dense eigendecompositions for full propagators.
const DENSE_PROPAGATOR_MAX: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    /// `𝒯`: later times act last (leftmost).
    Forward,
    /// `𝒯̃`: earlier times leftmost.
    Anti,
}

#[derive(Debug, Clone)]
pub struct PropagatorPlan {
    pub model: HamiltonianModel,
    pub t_total: f64,
    pub dt: f64,
    pub ordering: Ordering,
}

impl PropagatorPlan {
    pub fn new(model: HamiltonianModel, t_total: f64, dt: f64, ordering: Ordering) -> Result<Self> {
        if !(t_total >= 0.0) || !(dt > 0.0) {
            return domain("need t_total ≥ 0 and dt > 0");
        }
        let steps = t_total / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return domain(format!("t_total = {t_total} is not an integer multiple of dt = {dt}"));
        }
        Ok(PropagatorPlan { model, t_total, dt, ordering })
    }

    pub fn steps(&self) -> usize {
        (self.t_total / self.dt).round() as usize
    }

    /// Grid intervals `[a, b]`, additionally split at schedule changes.
    fn pieces(&self) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = (0..=self.steps()).map(|k| k as f64 * self.dt).collect();
        if let Some(last) = cuts.last_mut() {
            *last = self.t_total;
        }
        cuts.extend(self.model.schedule.changes_before(self.t_total));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Intervals of constant Hamiltonian covering `[t0, t1]`.
fn constant_pieces(model: &HamiltonianModel, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![t0];
    cuts.extend(model.schedule.changes_before(t1).into_iter().filter(|&b| b > t0));
    cuts.push(t1);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Apply `U(t1, t0)` (or its adjoint) to every column of `x` using the sparse Hamiltonian.
pub fn evolve_columns(model: &HamiltonianModel, t0: f64, t1: f64, x: &mut CMat, adjoint: bool) -> Result<()> {
    let mut pieces = constant_pieces(model, t0, t1);
    if adjoint {
        pieces.reverse();
    }
    for (a, b) in pieces {
        let h = model.sparse_at(0.5 * (a + b))?;
        let dt = if adjoint { -(b - a) } else { b - a };
        h.expm_apply(dt, x.as_mut());
    }
    Ok(())
}

/// `exp(-i H Δ)` on the full ring for the Hamiltonian at time `t_mid`.
fn step_factor(model: &HamiltonianModel, t_mid: f64, delta: f64) -> Result<CMat> {
    let n = model.lattice.n();
    if n <= DENSE_PROPAGATOR_MAX {
        let h = model.sparse_at(t_mid)?.to_dense();
        expm_hermitian(h.as_ref(), delta)
    } else {
        let dim = 1usize << n;
        let mut x = CMat::identity(dim, dim);
        model.sparse_at(t_mid)?.expm_apply(delta, x.as_mut());
        Ok(x)
    }
}

/// Time-ordered (or anti-time-ordered) propagator on the full ring.
///
/// Steps on the `dt` grid; each step is split at schedule changes so piecewise-constant
/// schedules are integrated exactly, and runs of constant Hamiltonian are merged into one
/// exponential.
pub fn propagate(plan: &PropagatorPlan) -> Result<DenseOperator> {
    let lat = plan.model.lattice;
    check_cap(lat)?;
    let dim = 1usize << lat.n();
    let mut u = CMat::identity(dim, dim);
    if plan.t_total == 0.0 || plan.model.terms.is_empty() {
        return DenseOperator::new(lat.full(), u);
    }
    let mut pieces = plan.pieces();
    // merge consecutive pieces in the same schedule interval
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let changes = plan.model.schedule.changes_before(plan.t_total);
    for (a, b) in pieces.drain(..) {
        match merged.last_mut() {
            Some(last) if !changes.iter().any(|&c| (c - a).abs() < 1e-14) => last.1 = b,
            _ => merged.push((a, b)),
        }
    }
    for (a, b) in merged {
        let f = step_factor(&plan.model, 0.5 * (a + b), b - a)?;
        u = match plan.ordering {
            Ordering::Forward => &f * &u,
            Ordering::Anti => &u * &f,
        };
    }
    DenseOperator::new(lat.full(), u)
}

/// `U(t)` for the model's own schedule, forward ordered.
pub fn propagator(model: &HamiltonianModel, t: f64) -> Result<DenseOperator> {
    let dt = if t > 0.0 { t } else { 1.0 };
    propagate(&PropagatorPlan::new(model.clone(), t, dt, Ordering::Forward)?)
}

/// `U† A U` on the union of supports.
pub fn heisenberg(u: &DenseOperator, a: &DenseOperator) -> Result<DenseOperator> {
    u.adjoint().mul(a)?.mul(u)
}

/// `2^{-|S^c|} tr_{S^c}(A) ⊗ I_{S^c}`, returned on `A`'s support.
pub fn project_region(a: &DenseOperator, s: &Region) -> Result<DenseOperator> {
    if a.support().is_subset(s) {
        return Ok(a.clone());
    }
    a.reduce_to(s)?.embed(a.support())
}

/// Monte Carlo twirl `(1/M) Σ_m V_m† A V_m` with Haar-random `V_m` on the part of `A`'s
/// support outside `S`; converges to [`project_region`].
pub fn haar_twirl(a: &DenseOperator, s: &Region, samples: usize, seed: u64) -> Result<DenseOperator> {
    if samples == 0 {
        return domain("haar_twirl needs at least one sample");
    }
    let support = a.support().clone();
    let c = support.difference(s);
    if c.is_empty() {
        return Ok(a.clone());
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut acc = CMat::zeros(a.dim(), a.dim());
    for _ in 0..samples {
        let v = haar_operator(&c, &mut rng)?.embed(&support)?;
        acc += v.adjoint().mul(a)?.mul(&v)?.into_matrix();
    }
    DenseOperator::new(support, crate::linalg::scaled(acc.as_ref(), c64::new(1.0 / samples as f64, 0.0)))
}

/// `Ũ = (U_I ⊗ U_0)(U_L ⊗ U_R)` with block supports fixed by the ring geometry.
#[derive(Debug, Clone)]
pub struct CircuitApprox {
    pub u_l: DenseOperator,
    pub u_r: DenseOperator,
    pub u_0: DenseOperator,
    pub u_i: DenseOperator,
    assembled: DenseOperator,
}

impl CircuitApprox {
    pub fn new(lattice: RingLattice, u_l: DenseOperator, u_r: DenseOperator, u_0: DenseOperator, u_i: DenseOperator) -> Result<Self> {
        check_cap(lattice)?;
        let g = lattice.regions()?;
        if g.l < 2 {
            return domain("four-block circuits need L ≥ 2");
        }
        for (name, op, region) in [
            ("U_L", &u_l, &g.left),
            ("U_R", &u_r, &g.right),
            ("U_0", &u_0, &g.u0_support),
            ("U_I", &u_i, &g.ui_support),
        ] {
            if op.support() != region {
                return domain(format!("{name} must act on {:?}", region.sites()));
            }
            if !op.is_unitary(1e-10) {
                return domain(format!("{name} is not unitary to 1e-10"));
            }
        }
        let full = lattice.full();
        let top = u_i.embed(&full)?.mul(&u_0.embed(&full)?)?;
        let bottom = u_l.embed(&full)?.mul(&u_r.embed(&full)?)?;
        let assembled = top.mul(&bottom)?;
        Ok(CircuitApprox { u_l, u_r, u_0, u_i, assembled })
    }

    pub fn identity(lattice: RingLattice) -> Result<Self> {
        let g = lattice.regions()?;
        CircuitApprox::new(
            lattice,
            DenseOperator::identity(g.left),
            DenseOperator::identity(g.right),
            DenseOperator::identity(g.u0_support),
            DenseOperator::identity(g.ui_support),
        )
    }

    /// Independent Haar-random blocks.
    pub fn random<R: Rng + ?Sized>(lattice: RingLattice, rng: &mut R) -> Result<Self> {
        let g = lattice.regions()?;
        let u_l = haar_operator(&g.left, rng)?;
        let u_r = haar_operator(&g.right, rng)?;
        let u_0 = haar_operator(&g.u0_support, rng)?;
        let u_i = haar_operator(&g.ui_support, rng)?;
        CircuitApprox::new(lattice, u_l, u_r, u_0, u_i)
    }

    pub fn lattice(&self) -> RingLattice {
        self.assembled.support().lattice()
    }

    /// `Ũ` on the full ring.
    pub fn assembled(&self) -> &DenseOperator {
        &self.assembled
    }
}

/// `c · I` as a full-ring operator.
pub fn scaled_identity(lattice: RingLattice, c: f64) -> DenseOperator {
    DenseOperator::identity(lattice.full()).scale(c64::new(c, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_nearest_neighbor, build_powerlaw, Schedule};
    use crate::linalg::{haar_unitary, operator_norm};
    use crate::pauli::{Pauli, PauliString};

    fn lat(n: usize) -> RingLattice {
        RingLattice::new(n).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let h = build_nearest_neighbor(lat(6), 1);
        let u = propagate(&PropagatorPlan::new(h, 0.0, 0.1, Ordering::Forward).unwrap()).unwrap();
        assert!((u.matrix() - CMat::identity(64, 64)).norm_max() < 1e-15);
    }

    #[test]
    fn stepped_matches_single_exponential() {
        let h = build_powerlaw(lat(6), 2.5, 1.0, 4, true).unwrap();
        let u = propagate(&PropagatorPlan::new(h.clone(), 0.7, 0.07, Ordering::Forward).unwrap()).unwrap();
        let exact = expm_hermitian(h.dense_at(0.0).unwrap().matrix().as_ref(), 0.7).unwrap();
        assert!(operator_norm((u.matrix() - &exact).as_ref()).unwrap() < 1e-10);
        assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn schedule_ordering() {
        let base = build_nearest_neighbor(lat(4), 3);
        let nt = base.terms.len();
        let mut h = base.clone();
        h.schedule = Schedule { breaks: vec![0.0, 0.3], multipliers: vec![vec![1.0; nt], vec![-0.5; nt]] };
        h.validate().unwrap();
        let h1 = base.dense_at(0.0).unwrap();
        let u1 = expm_hermitian(h1.matrix().as_ref(), 0.3).unwrap();
        let u2 = expm_hermitian(h1.matrix().as_ref(), -0.5 * 0.2).unwrap();
        let fwd = propagate(&PropagatorPlan::new(h.clone(), 0.5, 0.05, Ordering::Forward).unwrap()).unwrap();
        assert!((fwd.matrix() - &u2 * &u1).norm_max() < 1e-12);
        let anti = propagate(&PropagatorPlan::new(h, 0.5, 0.05, Ordering::Anti).unwrap()).unwrap();
        assert!((anti.matrix() - &u1 * &u2).norm_max() < 1e-12);
    }

    #[test]
    fn plan_rejects_fractional_steps() {
        let h = build_nearest_neighbor(lat(4), 3);
        assert!(PropagatorPlan::new(h.clone(), 0.55, 0.1, Ordering::Forward).is_err());
        assert!(PropagatorPlan::new(h, 0.3, 0.1, Ordering::Forward).is_ok());
    }

    #[test]
    fn heisenberg_preserves_norms() {
        let l = lat(4);
        let u = DenseOperator::new(l.full(), haar_unitary(16, 2).unwrap()).unwrap();
        let a = DenseOperator::new(l.interval(1, 2), haar_unitary(4, 3).unwrap()).unwrap();
        let b = heisenberg(&u, &a).unwrap();
        assert!((b.operator_norm().unwrap() - 1.0).abs() < 1e-10);
        assert!((b.frobenius_norm().unwrap() - 1.0).abs() < 1e-10);
        let id = DenseOperator::identity(l.full());
        let same = heisenberg(&id, &a).unwrap();
        assert!((same.matrix() - a.embed(&l.full()).unwrap().matrix()).norm_max() < 1e-14);
    }

    #[test]
    fn projector_examples() {
        let l = lat(4);
        let s = l.interval(0, 1);
        let inside = PauliString::single(l, 1, Pauli::X).to_operator_on(&l.full()).unwrap();
        let p = project_region(&inside, &s).unwrap();
        assert!((p.matrix() - inside.matrix()).norm_max() < 1e-14);
        let outside = PauliString::single(l, 3, Pauli::X).to_operator_on(&l.full()).unwrap();
        assert!(project_region(&outside, &s).unwrap().matrix().norm_max() < 1e-14);
        let a = DenseOperator::new(l.full(), haar_unitary(16, 5).unwrap()).unwrap();
        let pa = project_region(&a, &s).unwrap();
        let ppa = project_region(&pa, &s).unwrap();
        assert!((pa.matrix() - ppa.matrix()).norm_max() < 1e-13);
    }

    #[test]
    fn twirl_converges_to_projector() {
        let l = lat(4);
        let s = l.interval(0, 1);
        let a = DenseOperator::new(l.full(), haar_unitary(16, 8).unwrap()).unwrap();
        let exact = project_region(&a, &s).unwrap();
        let mc = haar_twirl(&a, &s, 400, 1).unwrap();
        let gap = mc.sub(&exact).unwrap().frobenius_norm().unwrap();
        assert!(gap < 5.0 / 20.0, "{gap}");
        // operators already inside S are fixed sample by sample
        let inside = PauliString::single(l, 0, Pauli::Y).to_operator_on(&l.full()).unwrap();
        let fixed = haar_twirl(&inside, &s, 3, 2).unwrap();
        assert!((fixed.matrix() - inside.matrix()).norm_max() < 1e-12);
        assert!(haar_twirl(&a, &s, 0, 1).is_err());
    }

    #[test]
    fn circuit_blocks_match_geometry() {
        let l = RingLattice::with_half_width(2).unwrap();
        let ca = CircuitApprox::identity(l).unwrap();
        let g = l.regions().unwrap();
        assert_eq!(ca.u_0.support(), &g.u0_support);
        assert_eq!(ca.u_i.support(), &g.ui_support);
        assert!((ca.assembled().matrix() - CMat::identity(256, 256)).norm_max() < 1e-15);
        let bad = CircuitApprox::new(
            l,
            DenseOperator::identity(g.right.clone()),
            DenseOperator::identity(g.right),
            DenseOperator::identity(g.u0_support),
            DenseOperator::identity(g.ui_support),
        );
        assert!(bad.is_err());
    }
}
