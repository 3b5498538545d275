//! The shift unitary, the hard product states, and exact certificates that four-block
//! circuits (and hence short-time dynamics) stay far from the shift.
//!
//! Convention: `U_sh† A_x U_sh = A_{x+1}` for every single-site operator, so in the
//! Schrödinger picture `U_sh ρ U_sh†` moves every local factor one site back.

use crate::bounds::BoundParams;
use crate::error::{domain, Error, Result};
use crate::evolution::{circuitize, propagator, CircuitApprox, CircuitReport, EllPolicy};
use crate::hamiltonian::HamiltonianModel;
use crate::lattice::{Region, RingLattice};
use crate::linalg::{c64, frobenius_norm, operator_norm, trace_norm, CMat, DenseOperator, DensityMatrix, ZERO};
use faer::Mat;
use serde::Serialize;

const CERT_TOL: f64 = 1e-9;

/// Basis permutation realizing the one-site translation.
#[derive(Debug, Clone)]
pub struct ShiftUnitary {
    lattice: RingLattice,
    op: DenseOperator,
}

/// Index of `U_sh|b⟩`: the bit on site `x+1` moves to site `x` (site 0 is the top bit).
pub fn shifted_index(b: usize, n: usize) -> usize {
    let mut out = 0;
    for x in 0..n {
        let src = (x + 1) % n;
        let bit = (b >> (n - 1 - src)) & 1;
        out |= bit << (n - 1 - x);
    }
    out
}

pub fn build_shift(lattice: RingLattice) -> Result<ShiftUnitary> {
    crate::hamiltonian::check_cap(lattice)?;
    let n = lattice.n();
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for b in 0..dim {
        m[(shifted_index(b, n), b)] = c64::new(1.0, 0.0);
    }
    Ok(ShiftUnitary { lattice, op: DenseOperator::new(lattice.full(), m)? })
}

impl ShiftUnitary {
    pub fn lattice(&self) -> RingLattice {
        self.lattice
    }

    pub fn op(&self) -> &DenseOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    /// `U_sh ρ U_sh†`
    pub fn conjugate(&self, rho: &DenseOperator) -> Result<DenseOperator> {
        let full = self.lattice.full();
        let r = rho.embed(&full)?;
        DenseOperator::new(full, permute_both(r.matrix(), self.lattice.n(), false))
    }

    /// `U_sh† A U_sh` (Heisenberg picture: moves support forward by one).
    pub fn heisenberg(&self, a: &DenseOperator) -> Result<DenseOperator> {
        let full = self.lattice.full();
        let r = a.embed(&full)?;
        DenseOperator::new(full, permute_both(r.matrix(), self.lattice.n(), true))
    }
}

/// `P A P†` (or `P† A P` when `inverse`) for the shift permutation `P`, without a GEMM.
fn permute_both(a: &CMat, n: usize, inverse: bool) -> CMat {
    let dim = a.nrows();
    let perm: Vec<usize> = (0..dim).map(|b| shifted_index(b, n)).collect();
    let mut inv = vec![0; dim];
    for (b, &p) in perm.iter().enumerate() {
        inv[p] = b;
    }
    // (P A P†)[p(i), p(j)] = A[i, j]
    let fwd = if inverse { &inv } else { &perm };
    let mut out = CMat::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            out[(fwd[i], fwd[j])] = a[(i, j)];
        }
    }
    out
}

/// `⊗_{zero block}|z_x⟩⟨z_x| ⊗ ⊗_{identity block} I/2`.
#[derive(Debug, Clone)]
pub struct HardState {
    /// Bits along the zero block, in ring order starting from its first label.
    pub z: Vec<u8>,
    pub rho: DensityMatrix,
}

/// Hard initial state: zero block `{1−L..L}`, identity block `{L+1..3L}`.
pub fn hard_state(lattice: RingLattice, z: &[u8]) -> Result<HardState> {
    let g = lattice.regions()?;
    let l = g.l as i64;
    product_state(lattice, z, 1 - l)
}

/// Shifted hard state `U_sh ρ_i(z) U_sh†`: zero block `{−L..L−1}`.
pub fn final_state(lattice: RingLattice, z: &[u8]) -> Result<HardState> {
    let g = lattice.regions()?;
    let l = g.l as i64;
    product_state(lattice, z, -l)
}

/// Basis states whose zero block (starting at label `start`) reads `z`.
fn matching_indices(lattice: RingLattice, z: &[u8], start: i64) -> Result<Vec<usize>> {
    let g = lattice.regions()?;
    let l = g.l;
    if z.len() != 2 * l {
        return domain(format!("z must have 2L = {} bits, got {}", 2 * l, z.len()));
    }
    if z.iter().any(|&b| b > 1) {
        return domain("z must be a bit string");
    }
    let n = lattice.n();
    let zero_sites: Vec<usize> = (0..2 * l as i64).map(|k| lattice.site(start + k)).collect();
    Ok((0..1usize << n).filter(|&b| zero_sites.iter().zip(z).all(|(&s, &bit)| ((b >> (n - 1 - s)) & 1) as u8 == bit)).collect())
}

fn product_state(lattice: RingLattice, z: &[u8], start: i64) -> Result<HardState> {
    let idx = matching_indices(lattice, z, start)?;
    let dim = 1usize << lattice.n();
    // ρ is diagonal: weight 2^{-2L} on basis states matching z on the zero block
    let w = 1.0 / idx.len() as f64;
    let mut m = CMat::zeros(dim, dim);
    for b in idx {
        m[(b, b)] = c64::new(w, 0.0);
    }
    Ok(HardState { z: z.to_vec(), rho: DensityMatrix::new(DenseOperator::new(lattice.full(), m)?)? })
}

/// All `2^{2L}` bit strings of length `2L`, first bit slowest.
pub fn all_z(l: usize) -> Vec<Vec<u8>> {
    let k = 2 * l;
    (0..1usize << k).map(|v| (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect()).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LemmaCertificate {
    /// `‖Ũ ρ_i(z) Ũ† − ρ_f(z)‖_1`
    pub distance: f64,
    /// `‖U_L ρ_{i,L} U_L† − tr_R(U_0† ρ_f(z) U_0)‖_1`
    pub halfchain_lower: f64,
    /// `‖tr_R(U_0† ρ_f(z) U_0)‖`, at most `2^{−L−1}`.
    pub spectral: f64,
    pub spectral_cap: f64,
}

impl LemmaCertificate {
    pub fn passes(&self) -> bool {
        self.distance >= 0.5 - CERT_TOL && self.halfchain_lower <= self.distance + CERT_TOL && self.spectral <= self.spectral_cap + CERT_TOL
    }
}

/// `tr_R(U_0† ρ_f(z) U_0)` as an operator on the left half; its operator norm is at most
/// `2^{−L−1}` for every `U_0` on `{2−L..L−1}`.
pub fn reduced_final(u_0: &DenseOperator, z: &[u8]) -> Result<DenseOperator> {
    let lat = u_0.support().lattice();
    let g = lat.regions()?;
    if u_0.support() != &g.u0_support {
        return domain("reduced_final: U_0 must act on {2−L..L−1}");
    }
    let full = lat.full();
    let idx = matching_indices(lat, z, -(g.l as i64))?;
    let u0 = u_0.embed(&full)?;
    // ρ_f = w Σ_b |b⟩⟨b|, so U_0† ρ_f U_0 = w R†R with R the matching rows of U_0
    let r = Mat::from_fn(idx.len(), u0.dim(), |k, j| u0.matrix()[(idx[k], j)]);
    let w = c64::new(1.0 / idx.len() as f64, 0.0);
    let conj = DenseOperator::new(full, crate::linalg::scaled((r.adjoint() * &r).as_ref(), w))?;
    conj.partial_trace(&g.right)
}

/// `‖w (XX† − EE†)‖_1` with `E` the basis columns `idx`, evaluated on an orthonormal basis of
/// the span of `[X, E]`, outside of which the difference vanishes.
fn low_rank_distance(x: &CMat, idx: &[usize], w: f64) -> Result<f64> {
    let (dim, k) = (x.nrows(), x.ncols());
    let b = Mat::from_fn(dim, k + idx.len(), |i, j| if j < k { x[(i, j)] } else if i == idx[j - k] { c64::new(1.0, 0.0) } else { ZERO });
    let q = b.qr().compute_thin_Q();
    let a = q.adjoint() * x;
    let c = Mat::from_fn(q.ncols(), idx.len(), |j, m| q[(idx[m], j)].conj());
    let m = crate::linalg::scaled((&a * a.adjoint() - &c * c.adjoint()).as_ref(), c64::new(w, 0.0));
    // symmetrize away rounding so the Hermitian path is taken
    let m = Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    trace_norm(m.as_ref())
}

/// `U_L tr_R(ρ_i(z)) U_L†`
fn evolved_left(u_l: &DenseOperator, z: &[u8]) -> Result<DenseOperator> {
    let lat = u_l.support().lattice();
    let g = lat.regions()?;
    let rho_l = hard_state(lat, z)?.rho.op().partial_trace(&g.right)?;
    u_l.mul(&rho_l)?.mul(&u_l.adjoint())
}

/// Distance between `Ũ ρ_i(z) Ũ†` and the shifted state, with its half-chain lower bound.
pub fn lemma_shift_rho_certificate(ca: &CircuitApprox, z: &[u8]) -> Result<LemmaCertificate> {
    let lat = ca.lattice();
    let g = lat.regions()?;
    let l = g.l as i64;
    let u = ca.assembled().matrix();
    // both states are flat on 2^{2L} basis states: Ũρ_iŨ† = w XX† with X the matching columns of Ũ
    let idx_i = matching_indices(lat, z, 1 - l)?;
    let idx_f = matching_indices(lat, z, -l)?;
    let x = Mat::from_fn(u.nrows(), idx_i.len(), |i, k| u[(i, idx_i[k])]);
    let distance = low_rank_distance(&x, &idx_f, 1.0 / idx_i.len() as f64)?;
    let tau = reduced_final(&ca.u_0, z)?;
    let sigma = evolved_left(&ca.u_l, z)?;
    let halfchain_lower = sigma.sub(&tau)?.trace_norm()?;
    let spectral = tau.operator_norm()?;
    Ok(LemmaCertificate { distance, halfchain_lower, spectral, spectral_cap: (-(g.l as f64) - 1.0).exp2() })
}

#[derive(Debug, Clone, Serialize)]
pub struct JBasisWitness {
    /// Eigenvalues of `U_L ρ_{i,L} U_L†`, descending.
    pub spectrum: Vec<f64>,
    /// `2^L` eigenvalues equal `2^{−L}` and the rest vanish (to 1e−10).
    pub spectrum_ok: bool,
    /// `Σ_{j ≤ 2^L} (2^{−L} − τ_jj)` in the eigenbasis of the evolved left state.
    pub diag_sum: f64,
    /// `tr(W(σ − τ))` for the sign unitary `W = 2P − I`.
    pub sign_witness: f64,
    /// `‖σ − τ‖_1`
    pub trace_distance: f64,
}

impl JBasisWitness {
    pub fn passes(&self) -> bool {
        self.spectrum_ok && self.diag_sum >= 0.5 - CERT_TOL && self.sign_witness <= self.trace_distance + CERT_TOL && self.sign_witness >= self.diag_sum - CERT_TOL
    }
}

/// Spectral argument behind the half-chain bound: `σ = U_L ρ_{i,L} U_L†` is flat on a
/// `2^L`-dimensional subspace while `τ = tr_R(U_0† ρ_f U_0)` has norm `≤ 2^{−L−1}`.
pub fn jbasis_witness(u_l: &DenseOperator, u_0: &DenseOperator, z: &[u8]) -> Result<JBasisWitness> {
    let lat = u_l.support().lattice();
    let g = lat.regions()?;
    if u_l.support() != &g.left || u_0.support() != &g.u0_support {
        return domain("jbasis_witness: blocks must sit on the left half and the U_0 region");
    }
    let l = g.l;
    let sigma = evolved_left(u_l, z)?;
    let tau = reduced_final(u_0, z)?;
    let (vals, vecs) = crate::linalg::eigh(sigma.matrix().as_ref())?;
    let mut spectrum = vals.clone();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let rank = 1usize << l;
    let flat = (-(l as f64)).exp2();
    let spectrum_ok = spectrum.iter().enumerate().all(|(j, &x)| if j < rank { (x - flat).abs() < 1e-10 } else { x.abs() < 1e-10 });
    // P = projector on the top 2^L eigenvectors
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let d = vals.len();
    let mut tr_p_tau = 0.0;
    let mut p = CMat::zeros(d, d);
    for &k in order.iter().take(rank) {
        let v = vecs.col(k);
        let mut tv = vec![ZERO; d];
        crate::linalg::dense_matvec(tau.matrix().as_ref(), &v.iter().copied().collect::<Vec<_>>(), &mut tv);
        tr_p_tau += v.iter().zip(&tv).map(|(a, b)| a.conj() * b).sum::<c64>().re;
        for j in 0..d {
            for i in 0..d {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    let diag_sum = rank as f64 * flat - tr_p_tau;
    let w = Mat::from_fn(d, d, |i, j| p[(i, j)] * 2.0 - if i == j { c64::new(1.0, 0.0) } else { ZERO });
    let diff = sigma.matrix() - tau.matrix();
    let sign_witness = (&w * &diff).diagonal().column_vector().iter().map(|x| x.re).sum();
    let trace_distance = trace_norm(diff.as_ref())?;
    Ok(JBasisWitness { spectrum, spectrum_ok, diag_sum, sign_witness, trace_distance })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    Operator,
    Frobenius,
}

/// `‖U − U_sh‖` in the chosen norm. The Frobenius value comes from
/// `‖U − U_sh‖_F² = 2 − 2^{1−n} Re tr(U_sh† U)` and is cross-checked against the direct norm.
pub fn shift_distance(u: &DenseOperator, mode: DistanceMode) -> Result<f64> {
    let lat = u.support().lattice();
    if u.support() != &lat.full() {
        return domain("shift_distance needs an operator on the full ring");
    }
    if !u.is_unitary(1e-9) {
        return domain("shift_distance needs a unitary");
    }
    let sh = build_shift(lat)?;
    let diff = u.matrix() - sh.matrix();
    match mode {
        DistanceMode::Operator => operator_norm(diff.as_ref()),
        DistanceMode::Frobenius => {
            let via_trace = frobenius_via_trace(u.matrix(), lat.n());
            let direct = frobenius_norm(diff.as_ref())?;
            if (via_trace - direct).abs() > 1e-9 {
                return Err(Error::Numerical(format!("Frobenius trace identity {via_trace} disagrees with direct norm {direct}")));
            }
            Ok(via_trace)
        }
    }
}

/// `Re tr(U_sh† U)`
fn shift_overlap(u: &CMat, n: usize) -> f64 {
    (0..u.nrows()).map(|b| u[(shifted_index(b, n), b)].re).sum()
}

fn frobenius_via_trace(u: &CMat, n: usize) -> f64 {
    let sq = 2.0 - (1.0 - n as f64).exp2() * shift_overlap(u, n);
    sq.max(0.0).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityLink {
    pub z: Vec<u8>,
    /// `f_z = 2^{−2L} tr((I ⊗ |z⟩⟨z|) U_sh† Ũ)`
    pub f_re: f64,
    pub f_im: f64,
    /// `‖Ũ ρ_i(z) Ũ† − ρ_f(z)‖_1`
    pub distance: f64,
    /// `2(1−|f_z|)`
    pub two_gap: f64,
    /// `1 − |f_z|²`
    pub infidelity: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityChain {
    pub links: Vec<FidelityLink>,
    /// `‖Ũ−U_sh‖_F` from `2·2^{−2L} Σ_z (1 − Re f_z)`
    pub frob_from_fidelities: f64,
    /// `√(2·2^{−2L} Σ_z (1 − |f_z|))`, the chain's lower bound
    pub frob_lower: f64,
    pub frob_direct: f64,
    pub frob_identity: f64,
    pub identity_gap: f64,
}

impl FidelityChain {
    pub fn passes(&self) -> bool {
        self.links.iter().all(|l| l.ok) && self.frob_from_fidelities >= 0.25 - CERT_TOL && self.frob_lower <= self.frob_from_fidelities + CERT_TOL && self.identity_gap <= CERT_TOL
    }
}

/// Per-z fidelities between `Ũ|Ψ_i(z)⟩` and `U_sh|Ψ_i(z)⟩` (ancilla traced out analytically)
/// and the chain `2(1−|f|) ≥ 1−|f|² ≥ d²/4 ≥ 1/16` leading to `‖Ũ − U_sh‖_F ≥ 1/4`.
pub fn fidelity_chain(ca: &CircuitApprox) -> Result<FidelityChain> {
    let lat = ca.lattice();
    let g = lat.regions()?;
    let n = lat.n();
    let l = g.l;
    let u = ca.assembled().matrix();
    let zero_sites: Vec<usize> = (0..2 * l as i64).map(|k| lat.site(1 - l as i64 + k)).collect();
    let norm = (-(2.0 * l as f64)).exp2();
    let mut links = Vec::new();
    let (mut sum_re, mut sum_abs) = (0.0, 0.0);
    for z in all_z(l) {
        // tr(Π_z U_sh† U) = Σ_{b ∈ Π_z} (U_sh† U)[b,b] = Σ_b U[sh(b), b]
        let mut f = ZERO;
        for b in 0..u.nrows() {
            if zero_sites.iter().zip(&z).all(|(&s, &bit)| ((b >> (n - 1 - s)) & 1) as u8 == bit) {
                f += u[(shifted_index(b, n), b)];
            }
        }
        f *= norm;
        let d = lemma_shift_rho_certificate(ca, &z)?.distance;
        let a = f.norm();
        let two_gap = 2.0 * (1.0 - a);
        let infidelity = 1.0 - a * a;
        let ok = two_gap >= infidelity - CERT_TOL && infidelity >= d * d / 4.0 - CERT_TOL && d * d / 4.0 >= 1.0 / 16.0 - CERT_TOL;
        sum_re += 1.0 - f.re;
        sum_abs += 1.0 - a;
        links.push(FidelityLink { z, f_re: f.re, f_im: f.im, distance: d, two_gap, infidelity, ok });
    }
    let frob_from_fidelities = (2.0 * norm * sum_re).max(0.0).sqrt();
    let frob_lower = (2.0 * norm * sum_abs).max(0.0).sqrt();
    let sh = build_shift(lat)?;
    let frob_direct = frobenius_norm((u - sh.matrix()).as_ref())?;
    let frob_identity = frobenius_via_trace(u, n);
    let identity_gap = (frob_direct - frob_identity).abs().max((frob_direct - frob_from_fidelities).abs());
    Ok(FidelityChain { links, frob_from_fidelities, frob_lower, frob_direct, frob_identity, identity_gap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The circuit approximation was worse than 1/8, so the argument does not apply.
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct EndToEnd {
    pub t: f64,
    /// `‖U − Ũ‖`
    pub u_err: f64,
    /// `‖Ũ − U_sh‖`
    pub circuit_shift: f64,
    /// `‖Ũ − U_sh‖_F`
    pub circuit_shift_frob: f64,
    /// `‖U − U_sh‖`
    pub final_distance: f64,
    /// `‖U − U_sh‖_F`
    pub final_frob: f64,
    /// `‖U−U_sh‖ ≥ ‖Ũ−U_sh‖ − ‖U−Ũ‖`
    pub triangle_ok: bool,
    pub lemma_distance: f64,
    pub chain_ok: bool,
    pub ell: Option<usize>,
    pub ell_ok: bool,
    pub cut_errors: [f64; 2],
    pub cut_bounds: [f64; 2],
    pub far_bound: f64,
    pub stage_budget: f64,
    pub verdict: Verdict,
}

/// Full pipeline: evolve, circuitize, certify the circuit is far from the shift, and combine.
pub fn end_to_end(model: &HamiltonianModel, t: f64, params: &BoundParams, dt: Option<f64>) -> Result<EndToEnd> {
    let rep: CircuitReport = circuitize(model, t, params, dt, EllPolicy::Report)?;
    let lat = model.lattice;
    let u = propagator(model, t)?;
    let ut = rep.ca.assembled();
    let sh = build_shift(lat)?;
    let circuit_shift = operator_norm((ut.matrix() - sh.matrix()).as_ref())?;
    let circuit_shift_frob = shift_distance(ut, DistanceMode::Frobenius)?;
    let final_distance = shift_distance(&u, DistanceMode::Operator)?;
    let final_frob = shift_distance(&u, DistanceMode::Frobenius)?;
    let triangle_ok = final_distance >= circuit_shift - rep.err_total - 1e-12;
    let z0 = vec![0u8; 2 * lat.regions()?.l];
    let lemma = lemma_shift_rho_certificate(&rep.ca, &z0)?;
    let chain = fidelity_chain(&rep.ca)?;
    let verdict = if rep.err_total > 0.125 {
        Verdict::NotApplicable
    } else if final_distance >= 0.125 - CERT_TOL && triangle_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(EndToEnd {
        t,
        u_err: rep.err_total,
        circuit_shift,
        circuit_shift_frob,
        final_distance,
        final_frob,
        triangle_ok,
        lemma_distance: lemma.distance,
        chain_ok: chain.passes(),
        ell: rep.ell,
        ell_ok: rep.ell_ok,
        cut_errors: [rep.cut_0.err, rep.cut_i.err],
        cut_bounds: [rep.cut_0.bound, rep.cut_i.bound],
        far_bound: rep.far_bound,
        stage_budget: rep.stage_budget,
        verdict,
    })
}

/// `Region` of the hard state's zero block at the start.
pub fn zero_block(lattice: RingLattice) -> Result<Region> {
    Ok(lattice.regions()?.zero_block_i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::heisenberg;
    use crate::linalg::haar_unitary;
    use crate::pauli::{Pauli, PauliString};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lat(n: usize) -> RingLattice {
        RingLattice::new(n).unwrap()
    }

    #[test]
    fn conjugation_rule_exhaustive() {
        for n in [2, 3, 5, 8] {
            let l = lat(n);
            let sh = build_shift(l).unwrap();
            for x in 0..n as i64 {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let a = PauliString::single(l, x, p).to_operator_on(&l.full()).unwrap();
                    let b = PauliString::single(l, x + 1, p).to_operator_on(&l.full()).unwrap();
                    let got = heisenberg(sh.op(), &a).unwrap();
                    assert!((got.matrix() - b.matrix()).norm_max() < 1e-15, "n={n} x={x} {p:?}");
                    assert!((sh.heisenberg(&a).unwrap().matrix() - b.matrix()).norm_max() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn low_rank_certificate_matches_dense_formula() {
        let l = lat(8);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let ca = CircuitApprox::random(l, &mut rng).unwrap();
        let full = l.full();
        let g = l.regions().unwrap();
        for z in [vec![0, 0, 0, 0], vec![1, 0, 1, 1]] {
            let c = lemma_shift_rho_certificate(&ca, &z).unwrap();
            let u = ca.assembled();
            let rho_i = hard_state(l, &z).unwrap();
            let rho_f = final_state(l, &z).unwrap();
            let dense = u.mul(rho_i.rho.op()).unwrap().mul(&u.adjoint()).unwrap().sub(rho_f.rho.op()).unwrap().trace_norm().unwrap();
            assert!((c.distance - dense).abs() < 1e-10, "{} vs {dense}", c.distance);
            let u0 = ca.u_0.embed(&full).unwrap();
            let tau = u0.adjoint().mul(rho_f.rho.op()).unwrap().mul(&u0).unwrap().partial_trace(&g.right).unwrap();
            assert!((c.spectral - tau.operator_norm().unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_examples() {
        let sh = build_shift(lat(2)).unwrap();
        let swap = Mat::from_fn(4, 4, |i, j| if [0, 2, 1, 3][j] == i { c64::new(1.0, 0.0) } else { ZERO });
        assert_eq!(sh.matrix(), &swap);
        let sh8 = build_shift(lat(8)).unwrap();
        let mut p = CMat::identity(256, 256);
        for _ in 0..8 {
            p = sh8.matrix() * &p;
        }
        assert!((p - CMat::identity(256, 256)).norm_max() < 1e-12);
        // shift of shift is the two-site translation
        let two = sh8.matrix() * sh8.matrix();
        for b in 0..256 {
            assert_eq!(two[(shifted_index(shifted_index(b, 8), 8), b)], c64::new(1.0, 0.0));
        }
    }

    #[test]
    fn hard_states() {
        let l = RingLattice::with_half_width(2).unwrap();
        let rho = hard_state(l, &[0, 0, 0, 0]).unwrap();
        assert!((rho.rho.purity() - 1.0 / 16.0).abs() < 1e-14);
        let g = l.regions().unwrap();
        let red = rho.rho.op().partial_trace(&g.zero_block_i).unwrap();
        assert!((red.matrix() - CMat::identity(16, 16) * faer::Scale(c64::new(1.0 / 16.0, 0.0))).norm_max() < 1e-15);
        let sh = build_shift(l).unwrap();
        for z in [[0u8, 0, 0, 0], [1, 0, 1, 1]] {
            let moved = sh.conjugate(hard_state(l, &z).unwrap().rho.op()).unwrap();
            assert!((moved.matrix() - final_state(l, &z).unwrap().rho.op().matrix()).norm_max() < 1e-15);
        }
        assert!(hard_state(l, &[0, 0]).is_err());
    }

    #[test]
    fn lemma_identity_and_random() {
        let l = RingLattice::with_half_width(2).unwrap();
        let c = lemma_shift_rho_certificate(&CircuitApprox::identity(l).unwrap(), &[0; 4]).unwrap();
        assert!(c.passes(), "{c:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let ca = CircuitApprox::random(l, &mut rng).unwrap();
            let c = lemma_shift_rho_certificate(&ca, &[1, 0, 0, 1]).unwrap();
            assert!(c.passes(), "{c:?}");
            let w = jbasis_witness(&ca.u_l, &ca.u_0, &[1, 0, 0, 1]).unwrap();
            assert!(w.passes(), "{w:?}");
            assert!((w.trace_distance - c.halfchain_lower).abs() < 1e-10);
        }
    }

    #[test]
    fn distance_examples() {
        let l = lat(8);
        let sh = build_shift(l).unwrap();
        assert!(shift_distance(sh.op(), DistanceMode::Operator).unwrap() < 1e-14);
        assert!(shift_distance(sh.op(), DistanceMode::Frobenius).unwrap() < 1e-7);
        let id = DenseOperator::identity(l.full());
        let f = shift_distance(&id, DistanceMode::Frobenius).unwrap();
        assert!((f - 1.984375f64.sqrt()).abs() < 1e-14);
        for seed in 0..3 {
            let u = DenseOperator::new(l.full(), haar_unitary(256, seed).unwrap()).unwrap();
            assert!(shift_distance(&u, DistanceMode::Frobenius).unwrap() <= shift_distance(&u, DistanceMode::Operator).unwrap() + 1e-12);
        }
        assert!(shift_distance(&id.scale(c64::new(2.0, 0.0)), DistanceMode::Operator).is_err());
    }

    #[test]
    fn fidelity_chain_random() {
        let l = RingLattice::with_half_width(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ca = CircuitApprox::random(l, &mut rng).unwrap();
        let chain = fidelity_chain(&ca).unwrap();
        assert_eq!(chain.links.len(), 16);
        assert!(chain.passes(), "{chain:?}");
    }

    #[test]
    fn end_to_end_zero_time() {
        let l = RingLattice::with_half_width(2).unwrap();
        let h = crate::hamiltonian::build_nearest_neighbor(l, 2);
        let e = end_to_end(&h, 0.0, &BoundParams::default(), None).unwrap();
        assert_eq!(e.verdict, Verdict::Pass);
        assert!(e.u_err < 1e-14 && e.final_distance >= 0.125);
    }
}
