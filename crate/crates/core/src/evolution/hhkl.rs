//! Interaction-picture cuts and the four-block circuitization.
//!
//! Cutting the terms `H_cut` across one bond leaves `H_op`. With `U_op(t) = e^{-itH_op}`,
//!
//! ```text
//! U U_op† = 𝒯̃ exp(−i ∫ H_cut(t) dt),   H_cut(t) = U_op(t) H_cut U_op(t)†,
//! ```
//!
//! and replacing `H_cut(t)` by its projection onto `S_r` gives a unitary `u_0` on `S_r`.
//! By Duhamel, `‖U − u_0 U_op‖ ≤ ∫ ‖H_cut(t) − ℙ_r H_cut(t)‖ dt`.
//!
//! The anti-ordered product is integrated with the fourth-order two-node Magnus scheme,
//! and the bound integrand with the matching two-point Gauss rule.

use super::{propagator, CircuitApprox};
use crate::bounds::BoundParams;
use crate::error::{domain, Result};
use crate::hamiltonian::{check_cap, norm_tail, split_far, tail_constant, ell_rule, Bond, HamiltonianModel, ModelKind, NormMode};
use crate::lattice::{ring_distance, Region};
use crate::linalg::krylov::hermitian_norms;
use crate::linalg::sparse::SparseHermitian;
use crate::linalg::{apply_local, c64, eigh, expm_hermitian, index_table, operator_norm, CMat, DenseOperator, ZERO};
use faer::Mat;
use serde::{Deserialize, Serialize};

const NORM_TOL: f64 = 1e-9;
/// Integrand norms feed a quadrature whose own error is O(dt⁴); looser is fine.
const INTEGRAND_TOL: f64 = 1e-7;
const MAX_LANCZOS: usize = 300;
/// Rings up to this size run the dense path; larger ones go matrix-free.
const DENSE_MAX_SITES: usize = 10;

/// Outcome of one interaction-picture cut for one radius `r`.
#[derive(Debug, Clone)]
pub struct HhklResult {
    pub r: usize,
    /// `S_r`: sites within distance `r` of the cut bond.
    pub region: Region,
    pub u_0: DenseOperator,
    /// `‖U − u_0 U_op‖`
    pub err: f64,
    /// `∫ ‖H_cut(t) − ℙ_r H_cut(t)‖ dt`
    pub bound: f64,
    /// Discretization allowance `10·dt`.
    pub slack: f64,
    /// Step actually used.
    pub dt: f64,
}

impl HhklResult {
    /// `err ≤ bound + slack`
    pub fn certified(&self) -> bool {
        self.err <= self.bound + self.slack
    }
}

/// Terms whose shortest arc crosses `bond`, and the rest.
pub fn cut_terms(h: &HamiltonianModel, bond: Bond) -> Result<(HamiltonianModel, HamiltonianModel)> {
    let n = h.lattice.n();
    if bond.0 >= n {
        return domain(format!("bond ({}, {}) outside ring", bond.0, bond.0 + 1));
    }
    Ok(h.partition(|t| bond.straddled_by(t.x, t.y, ring_distance(t.x, t.y, n) + 1, n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Dense,
    MatrixFree,
}

/// Single-radius version of [`hhkl_cut_multi`]; returns `(U_op, result)`.
pub fn hhkl_cut(h: &HamiltonianModel, cut: Bond, t: f64, r: usize, dt: f64) -> Result<(DenseOperator, HhklResult)> {
    let (u_op, mut v) = hhkl_cut_multi(h, cut, t, &[r], dt)?;
    Ok((u_op, v.remove(0)))
}

/// Cut `h` at `cut` and build `u_0` on `S_r` for each requested `r`, sharing the `U_op` stepping.
pub fn hhkl_cut_multi(h: &HamiltonianModel, cut: Bond, t: f64, rs: &[usize], dt: f64) -> Result<(DenseOperator, Vec<HhklResult>)> {
    let strategy = if h.lattice.n() <= DENSE_MAX_SITES { Strategy::Dense } else { Strategy::MatrixFree };
    run_cut(h, cut, t, rs, dt, strategy)
}

struct CutTerm {
    sites: Region,
    vals: Vec<f64>,
    vecs: CMat,
}

fn run_cut(h: &HamiltonianModel, cut: Bond, t_total: f64, rs: &[usize], dt: f64, strategy: Strategy) -> Result<(DenseOperator, Vec<HhklResult>)> {
    let lat = h.lattice;
    check_cap(lat)?;
    let n = lat.n();
    if !h.is_time_independent() {
        return domain("interaction-picture cuts need a time-independent model");
    }
    if !(t_total >= 0.0) || !(dt > 0.0) {
        return domain("need T ≥ 0 and dt > 0");
    }
    if rs.is_empty() {
        return domain("no radii requested");
    }
    let bond_region = Region::from_labels(lat, [cut.0 as i64, cut.0 as i64 + 1]);
    let mut regions = Vec::with_capacity(rs.len());
    for &r in rs {
        if 2 + 2 * r > n {
            return domain(format!("S_r for r = {r} wraps the ring of {n} sites"));
        }
        regions.push(bond_region.neighborhood(r));
    }
    let (h_cut, h_op) = cut_terms(h, cut)?;
    let dim = 1usize << n;
    let full = lat.full();

    if t_total == 0.0 || h_cut.terms.is_empty() {
        let u_op = propagator(&h_op, t_total)?;
        let results = rs
            .iter()
            .zip(&regions)
            .map(|(&r, s)| HhklResult { r, region: s.clone(), u_0: DenseOperator::identity(s.clone()), err: 0.0, bound: 0.0, slack: 10.0 * dt, dt })
            .collect();
        return Ok((u_op, results));
    }

    let steps = ((t_total / dt) - 1e-9).ceil().max(1.0) as usize;
    let hstep = t_total / steps as f64;
    let sp_op = h_op.sparse_at(0.0)?;
    let sp_cut = h_cut.sparse_at(0.0)?;
    let s_max = regions.iter().max_by_key(|s| s.len()).unwrap().clone();
    let c_max = full.difference(&s_max);

    let dense_cut = (strategy == Strategy::Dense).then(|| sp_cut.to_dense());
    let terms: Vec<CutTerm> = h_cut
        .terms
        .iter()
        .map(|tm| {
            let (vals, vecs) = eigh(tm.matrix().as_ref())?;
            Ok(CutTerm { sites: Region::from_sites(lat, &[tm.x, tm.y])?, vals, vecs })
        })
        .collect::<Result<_>>()?;

    let mut y = CMat::identity(dim, dim);
    let mut t_cur = 0.0;
    let mut u0: Vec<CMat> = regions.iter().map(|s| CMat::identity(1 << s.len(), 1 << s.len())).collect();
    let mut bound = vec![0.0; rs.len()];
    let g = 3f64.sqrt() / 6.0;

    for k in 0..steps {
        let t0 = k as f64 * hstep;
        let mut nodes: Vec<Vec<CMat>> = Vec::with_capacity(2);
        let mut integrand = vec![[0.0; 2]; rs.len()];
        for (q, tau) in [t0 + hstep * (0.5 - g), t0 + hstep * (0.5 + g)].into_iter().enumerate() {
            sp_op.expm_apply(tau - t_cur, y.as_mut());
            t_cur = tau;
            // H_cut(τ) = Y H_cut Y†, reduced onto the largest region
            let (r_max, m_full) = match strategy {
                Strategy::Dense => {
                    let m = &y * dense_cut.as_ref().unwrap() * y.adjoint();
                    let op = DenseOperator::new(full.clone(), m)?;
                    (op.reduce_to(&s_max)?, Some(op))
                }
                Strategy::MatrixFree => (gram_reduce(&y, &terms, &full, &s_max, &c_max)?, None),
            };
            let reds: Vec<DenseOperator> =
                regions.iter().map(|s| if s == &s_max { Ok(r_max.clone()) } else { r_max.reduce_to(s) }).collect::<Result<_>>()?;
            let norms = match &m_full {
                Some(m) => reds
                    .iter()
                    .map(|red| operator_norm((m.matrix() - red.embed(&full)?.matrix()).as_ref()))
                    .collect::<Result<Vec<_>>>()?,
                None => {
                    // ‖Y H_cut Y† − R⊗I‖, all radii in one sweep over Y per iteration
                    hermitian_norms(
                        dim,
                        reds.len(),
                        |active, x, out| {
                            let mut t1 = y.adjoint() * x;
                            let mut col = vec![ZERO; dim];
                            let mut hc = vec![ZERO; dim];
                            for c in 0..t1.ncols() {
                                col.iter_mut().enumerate().for_each(|(i, v)| *v = t1[(i, c)]);
                                sp_cut.matvec(&col, &mut hc);
                                hc.iter().enumerate().for_each(|(i, v)| t1[(i, c)] = *v);
                            }
                            *out = &y * &t1;
                            for (c, &m) in active.iter().enumerate() {
                                col.iter_mut().enumerate().for_each(|(i, v)| *v = x[(i, c)]);
                                apply_local(&reds[m], &full, &mut col).expect("S ⊆ ring");
                                col.iter().enumerate().for_each(|(i, v)| out[(i, c)] -= *v);
                            }
                        },
                        INTEGRAND_TOL,
                        MAX_LANCZOS,
                    )
                }
            };
            for (j, v) in norms.into_iter().enumerate() {
                integrand[j][q] = v;
            }
            let per_r: Vec<CMat> = reds.into_iter().map(|r| r.into_matrix()).collect();
            nodes.push(per_r);
        }
        for j in 0..rs.len() {
            let (a1, a2) = (&nodes[0][j], &nodes[1][j]);
            // M = h/2 (A1 + A2) + i √3/12 h² [A2, A1];  u_0 ← u_0 · exp(−iM)
            let comm = a2 * a1 - a1 * a2;
            let c1 = c64::new(0.5 * hstep, 0.0);
            let c2 = c64::new(0.0, 3f64.sqrt() / 12.0 * hstep * hstep);
            let m = Mat::from_fn(a1.nrows(), a1.ncols(), |p, q| (a1[(p, q)] + a2[(p, q)]) * c1 + comm[(p, q)] * c2);
            let herm = Mat::from_fn(m.nrows(), m.ncols(), |p, q| (m[(p, q)] + m[(q, p)].conj()) * 0.5);
            let f = expm_hermitian(herm.as_ref(), 1.0)?;
            u0[j] = &u0[j] * &f;
            bound[j] += 0.5 * hstep * (integrand[j][0] + integrand[j][1]);
        }
    }
    sp_op.expm_apply(t_total - t_cur, y.as_mut());

    // measured error ‖U − u_0 U_op‖
    let mut results = Vec::with_capacity(rs.len());
    let u_full_dense = match strategy {
        Strategy::Dense => Some(expm_hermitian(h.sparse_at(0.0)?.to_dense().as_ref(), t_total)?),
        Strategy::MatrixFree => None,
    };
    let sp_full = h.sparse_at(0.0)?;
    let u0_ops: Vec<DenseOperator> = regions.iter().zip(&u0).map(|(s, m)| DenseOperator::new(s.clone(), m.clone())).collect::<Result<_>>()?;
    let errs = match &u_full_dense {
        Some(u) => u0_ops
            .iter()
            .map(|op| operator_norm((u - op.embed(&full)?.matrix() * &y).as_ref()))
            .collect::<Result<Vec<_>>>()?,
        None => matrix_free_errs(&sp_full, t_total, &u0_ops, &y, &full),
    };
    for (j, (op, err)) in u0_ops.into_iter().zip(errs).enumerate() {
        results.push(HhklResult { r: rs[j], region: regions[j].clone(), u_0: op, err, bound: bound[j], slack: 10.0 * hstep, dt: hstep });
    }
    Ok((DenseOperator::new(full, y)?, results))
}

/// `2^{-|C|} tr_C(Y H_cut Y†)` on `S` via the spectral decomposition of each cut term:
/// `Y (w ⊗ I) (w ⊗ I)† Y†` is a Gram matrix, whose partial trace is a product of thin factors.
fn gram_reduce(y: &CMat, terms: &[CutTerm], full: &Region, s: &Region, c: &Region) -> Result<DenseOperator> {
    let ts = index_table(s, full);
    let tc = index_table(c, full);
    let ds = ts.len();
    let dc = tc.len();
    let mut acc = CMat::zeros(ds, ds);
    for term in terms {
        let rest = full.difference(&term.sites);
        let tt = index_table(&term.sites, full);
        let tr = index_table(&rest, full);
        let nr = tr.len();
        for (k, &lam) in term.vals.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            // G[s, (c, m)] = Σ_ab w[ab] Y[ts[s]|tc[c], tt[ab]|tr[m]]
            let mut gmat = CMat::zeros(ds, dc * nr);
            for (m, &rm) in tr.iter().enumerate() {
                for ab in 0..4 {
                    let w = term.vecs[(ab, k)];
                    if w == ZERO {
                        continue;
                    }
                    let col = y.col(tt[ab] | rm);
                    for (ci, &cc) in tc.iter().enumerate() {
                        let dst = ci * nr + m;
                        for (si, &sv) in ts.iter().enumerate() {
                            gmat[(si, dst)] += w * col[sv | cc];
                        }
                    }
                }
            }
            let gg = &gmat * gmat.adjoint();
            let scale = c64::new(lam / dc as f64, 0.0);
            for q in 0..ds {
                for p in 0..ds {
                    acc[(p, q)] += gg[(p, q)] * scale;
                }
            }
        }
    }
    DenseOperator::new(s.clone(), acc)
}

/// `‖e^{-iHT} − u_0 Y‖` for each `u_0`, by Lanczos on the Hermitian dilation `[[0, X], [X†, 0]]`.
fn matrix_free_errs(sp: &SparseHermitian, t: f64, u0s: &[DenseOperator], y: &CMat, full: &Region) -> Vec<f64> {
    let dim = y.nrows();
    let adj: Vec<DenseOperator> = u0s.iter().map(|u| u.adjoint()).collect();
    hermitian_norms(
        2 * dim,
        u0s.len(),
        |active, x, out| {
            let k = active.len();
            let top = Mat::from_fn(dim, k, |i, c| x[(i, c)]);
            let bottom = Mat::from_fn(dim, k, |i, c| x[(dim + i, c)]);
            // X w = U w − u_0 Y w
            let uw = sp.expm_mat(t, bottom.as_ref());
            let mut yw = y * &bottom;
            // X† z = U† z − Y† u_0† z
            let uz = sp.expm_mat(-t, top.as_ref());
            let mut z = top;
            let mut col = vec![ZERO; dim];
            for (c, &m) in active.iter().enumerate() {
                col.iter_mut().enumerate().for_each(|(i, v)| *v = yw[(i, c)]);
                apply_local(&u0s[m], full, &mut col).expect("support inside ring");
                col.iter().enumerate().for_each(|(i, v)| yw[(i, c)] = *v);
                col.iter_mut().enumerate().for_each(|(i, v)| *v = z[(i, c)]);
                apply_local(&adj[m], full, &mut col).expect("support inside ring");
                col.iter().enumerate().for_each(|(i, v)| z[(i, c)] = *v);
            }
            let yz = y.adjoint() * &z;
            for c in 0..k {
                for i in 0..dim {
                    out[(i, c)] = uw[(i, c)] - yw[(i, c)];
                    out[(dim + i, c)] = uz[(i, c)] - yz[(i, c)];
                }
            }
        },
        NORM_TOL,
        MAX_LANCZOS,
    )
}

/// What to do when the far-term cutoff `ℓ` exceeds `0.1·L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EllPolicy {
    /// Refuse the configuration.
    Reject,
    /// Proceed and flag the violation in the report.
    #[default]
    Report,
}

#[derive(Debug, Clone)]
pub struct CircuitReport {
    pub ca: CircuitApprox,
    /// Measured `‖U − Ũ‖`.
    pub err_total: f64,
    /// Far-term cutoff (power-law models only).
    pub ell: Option<usize>,
    /// Whether `ℓ ≤ 0.1·L` held.
    pub ell_ok: bool,
    pub far_terms: usize,
    /// `T · Σ‖H_far‖`, the far-stage error bound.
    pub far_bound: f64,
    /// Measured `‖U − U_{-far}‖`.
    pub far_err: f64,
    pub cut_0: HhklResult,
    pub cut_i: HhklResult,
    /// Budget per stage.
    pub stage_budget: f64,
}

/// Default grid step for interaction-picture integration: `min(0.01, T/100)`.
pub fn default_dt(t: f64) -> f64 {
    if t > 0.0 {
        (t / 100.0).min(0.01)
    } else {
        0.01
    }
}

/// Approximate `U = e^{-iHT}` by `Ũ = (U_I ⊗ U_0)(U_L ⊗ U_R)`.
///
/// Power-law models first drop left–right couplings at distance `≥ ℓ` (operator-mode ℓ rule);
/// then the remainder is cut at bond `(0,1)` (giving `U_0` on `{2−L..L−1}`) and at
/// `(2L, 2L+1)` (giving `U_I` on `{L+2..3L−1}`); what is left splits exactly into the two halves.
pub fn circuitize(h: &HamiltonianModel, t: f64, params: &BoundParams, dt: Option<f64>, policy: EllPolicy) -> Result<CircuitReport> {
    let lat = h.lattice;
    check_cap(lat)?;
    let g = lat.regions()?;
    if g.l < 2 {
        return domain("circuitization needs L ≥ 2");
    }
    if !(t >= 0.0) {
        return domain("T must be ≥ 0");
    }
    let dt = dt.unwrap_or_else(|| default_dt(t));
    let l = g.l as i64;

    let (far, rest, ell) = match h.kind {
        ModelKind::PowerLaw { alpha, .. } if t > 0.0 => {
            let c_alpha = match params.c_alpha {
                Some(c) => c,
                None => tail_constant(alpha, NormMode::Operator)?,
            };
            let ell = ell_rule(t, alpha, c_alpha, NormMode::Operator)?;
            let (far, rest) = split_far(h, ell)?;
            (far, rest, Some(ell))
        }
        _ => (h.filter(|_| false), h.clone(), None),
    };
    let ell_ok = ell.is_none_or(|e| (e as f64) <= 0.1 * g.l as f64);
    if !ell_ok && policy == EllPolicy::Reject {
        return domain(format!("ℓ = {} exceeds 0.1·L = {}", ell.unwrap(), 0.1 * g.l as f64));
    }

    let r = g.l - 2;
    let (u_op1, cut_0) = hhkl_cut(&rest, Bond::between(lat, 0, 1)?, t, r, dt)?;
    let (_, rest1) = cut_terms(&rest, Bond::between(lat, 0, 1)?)?;
    let _ = u_op1;
    let (_, cut_i) = hhkl_cut(&rest1, Bond::between(lat, 2 * l, 2 * l + 1)?, t, r, dt)?;
    let (_, rest2) = cut_terms(&rest1, Bond::between(lat, 2 * l, 2 * l + 1)?)?;

    // what remains acts within the halves
    let h_l = rest2.filter(|tm| g.left.contains(tm.x) && g.left.contains(tm.y));
    let h_r = rest2.filter(|tm| g.right.contains(tm.x) && g.right.contains(tm.y));
    if h_l.terms.len() + h_r.terms.len() != rest2.terms.len() {
        return domain("cut remainder still couples the two halves (ℓ too large for this ring)");
    }
    let u_l = half_propagator(&h_l, &g.left, t)?;
    let u_r = half_propagator(&h_r, &g.right, t)?;
    let ca = CircuitApprox::new(lat, u_l, u_r, cut_0.u_0.clone(), cut_i.u_0.clone())?;

    let u = propagator(h, t)?;
    let err_total = operator_norm((u.matrix() - ca.assembled().matrix()).as_ref())?;
    let far_err = if far.terms.is_empty() {
        0.0
    } else {
        let u_rest = propagator(&rest, t)?;
        operator_norm((u.matrix() - u_rest.matrix()).as_ref())?
    };
    Ok(CircuitReport {
        ca,
        err_total,
        ell,
        ell_ok,
        far_terms: far.terms.len(),
        far_bound: t * norm_tail(&far, NormMode::Operator),
        far_err,
        cut_0,
        cut_i,
        stage_budget: 1.0 / 16.0,
    })
}

/// `e^{-iTH}` for terms living inside `region`, as an operator on `region`.
fn half_propagator(h: &HamiltonianModel, region: &Region, t: f64) -> Result<DenseOperator> {
    let mut m = CMat::zeros(1 << region.len(), 1 << region.len());
    for tm in &h.terms {
        let op = tm.operator(h.lattice).embed(region)?;
        m += op.matrix();
    }
    DenseOperator::new(region.clone(), expm_hermitian(m.as_ref(), t)?)
}
