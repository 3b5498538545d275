//! Light-cone scans: commutator fronts `‖[A_x(t), B_0]‖` and projector leakage
//! `‖A(t) − ℙ_r A(t)‖` in both norms.
//!
//! A Hermitian Pauli string is `P = I − 2Π` with `Π` the projector onto its −1 eigenspace,
//! so conjugated strings are handled through the thin factor `U·basis(Π)` without ever
//! forming a full-ring product of propagators.

use super::evolve_columns;
use crate::error::{domain, Result};
use crate::hamiltonian::{check_cap, HamiltonianModel};
use crate::linalg::{c64, hermitian_map_norm, index_table, region_mask, CMat, ZERO};
use crate::pauli::PauliString;
use faer::Mat;
use serde::Serialize;

const NORM_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontPoint {
    pub t: f64,
    pub x: i64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeakagePoint {
    pub t: f64,
    pub r: usize,
    pub frobenius: f64,
    /// Operator-norm leakage, when requested.
    pub operator: Option<f64>,
}

/// `y = V (V† x)` for a thin matrix `V`.
fn gram_apply(v: &CMat, x: &[c64], y: &mut [c64]) {
    let k = v.ncols();
    let mut w = vec![ZERO; k];
    for j in 0..k {
        let col = v.col(j);
        let mut s = ZERO;
        for i in 0..x.len() {
            s += col[i].conj() * x[i];
        }
        w[j] = s;
    }
    y.iter_mut().for_each(|e| *e = ZERO);
    for j in 0..k {
        let col = v.col(j);
        let wj = w[j];
        for i in 0..y.len() {
            y[i] += col[i] * wj;
        }
    }
}

fn sorted_times(ts: &[f64]) -> Result<Vec<usize>> {
    if ts.iter().any(|&t| !(t >= 0.0)) {
        return domain("scan times must be ≥ 0");
    }
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    Ok(order)
}

fn check_hermitian_string(p: &PauliString) -> Result<()> {
    use crate::pauli::Phase;
    if !matches!(p.phase(), Phase::ONE | Phase::MINUS_ONE) {
        return domain("Pauli string must be Hermitian (phase ±1)");
    }
    Ok(())
}

/// Thin factors `U(t)·basis` (or `U(t)†·basis` when `adjoint`) for each requested time,
/// delivered in time order to `visit`.
fn for_each_time(
    h: &HamiltonianModel,
    basis: &CMat,
    ts: &[f64],
    adjoint: bool,
    mut visit: impl FnMut(usize, &CMat) -> Result<()>,
) -> Result<()> {
    let order = sorted_times(ts)?;
    let mut cur = basis.clone();
    let mut t_cur = 0.0;
    for idx in order {
        let t = ts[idx];
        if adjoint && !h.is_time_independent() {
            cur = basis.clone();
            evolve_columns(h, 0.0, t, &mut cur, true)?;
        } else {
            // forward factors compose in time order; constant models commute for the adjoint
            evolve_columns(h, t_cur, t, &mut cur, adjoint)?;
        }
        t_cur = t;
        visit(idx, &cur)?;
    }
    Ok(())
}

/// `C(x,t) = ‖[U(t)† A_x U(t), B_0]‖` with `A_x` the string `a0` translated by `x`.
pub fn commutator_front(h: &HamiltonianModel, a0: &PauliString, b0: &PauliString, tgrid: &[f64], xgrid: &[i64]) -> Result<Vec<FrontPoint>> {
    check_cap(h.lattice)?;
    check_hermitian_string(a0)?;
    check_hermitian_string(b0)?;
    let dim = 1usize << h.lattice.n();
    let mut out = vec![FrontPoint { t: 0.0, x: 0, value: 0.0 }; tgrid.len() * xgrid.len()];
    if b0.weight() == 0 || a0.weight() == 0 {
        for (i, &t) in tgrid.iter().enumerate() {
            for (j, &x) in xgrid.iter().enumerate() {
                out[i * xgrid.len() + j] = FrontPoint { t, x, value: 0.0 };
            }
        }
        return Ok(out);
    }
    let basis = b0.minus_eigenbasis()?;
    // ‖[A_x, U B U†]‖ = ‖[U† A_x U, B]‖, and U B U† = I − 2 V V† with V = U·basis.
    for_each_time(h, &basis, tgrid, false, |i, v| {
        for (j, &x) in xgrid.iter().enumerate() {
            let ax = a0.translated(x);
            let mut t1 = vec![ZERO; dim];
            let mut t2 = vec![ZERO; dim];
            let norm = hermitian_map_norm(
                dim,
                |u, y| {
                    // y = i (A G − G A) u
                    gram_apply(v, u, &mut t1);
                    ax.apply(&t1, y);
                    ax.apply(u, &mut t2);
                    gram_apply(v, &t2, &mut t1);
                    for (yy, g) in y.iter_mut().zip(&t1) {
                        *yy = (*yy - g) * c64::new(0.0, 1.0);
                    }
                },
                NORM_TOL,
            )?;
            out[i * xgrid.len() + j] = FrontPoint { t: tgrid[i], x, value: 2.0 * norm };
        }
        Ok(())
    })?;
    Ok(out)
}

/// Leakage of `A(t) = U†AU` outside `S_r` (the support of `A` grown by `r`), on a `(t, r)` grid.
pub fn leakage_scan(h: &HamiltonianModel, a: &PauliString, rs: &[usize], ts: &[f64], with_operator: bool) -> Result<Vec<LeakagePoint>> {
    check_cap(h.lattice)?;
    check_hermitian_string(a)?;
    if a.weight() == 0 {
        return domain("leakage of the identity is trivially zero; give a non-identity string");
    }
    let lat = h.lattice;
    let full = lat.full();
    let dim = 1usize << lat.n();
    let basis = a.minus_eigenbasis()?;
    let mut out = vec![LeakagePoint { t: 0.0, r: 0, frobenius: 0.0, operator: None }; ts.len() * rs.len()];
    for_each_time(h, &basis, ts, true, |i, w| {
        // G = W W†, A(t) = I − 2G
        let g = w * w.adjoint();
        for (j, &r) in rs.iter().enumerate() {
            let s = a.support().neighborhood(r);
            let slot = &mut out[i * rs.len() + j];
            *slot = LeakagePoint { t: ts[i], r, frobenius: 0.0, operator: with_operator.then_some(0.0) };
            if s.len() == lat.n() {
                continue;
            }
            let c = full.difference(&s);
            let tsub = index_table(&s, &full);
            let tc = index_table(&c, &full);
            let cmask = region_mask(&c, &full);
            let ds = tsub.len();
            let norm_c = 1.0 / tc.len() as f64;
            let red = Mat::from_fn(ds, ds, |p, q| tc.iter().map(|&cc| g[(tsub[p] | cc, tsub[q] | cc)]).sum::<c64>() * norm_c);
            // entries of G − red⊗I: off-block entries of G, plus block entries minus red
            let mut sq = 0.0;
            for col in 0..dim {
                let gc = g.col(col);
                for row in 0..dim {
                    if (row ^ col) & cmask != 0 {
                        sq += gc[row].norm_sqr();
                    }
                }
            }
            for &cc in &tc {
                for q in 0..ds {
                    for p in 0..ds {
                        sq += (g[(tsub[p] | cc, tsub[q] | cc)] - red[(p, q)]).norm_sqr();
                    }
                }
            }
            slot.frobenius = 2.0 * (sq / dim as f64).sqrt();
            if with_operator {
                let mut xs = vec![ZERO; ds];
                let op = hermitian_map_norm(
                    dim,
                    |u, y| {
                        crate::linalg::dense_matvec(g.as_ref(), u, y);
                        for &cc in &tc {
                            for p in 0..ds {
                                xs[p] = u[tsub[p] | cc];
                            }
                            for p in 0..ds {
                                let mut acc = ZERO;
                                for q in 0..ds {
                                    acc += red[(p, q)] * xs[q];
                                }
                                y[tsub[p] | cc] -= acc;
                            }
                        }
                    },
                    NORM_TOL,
                )?;
                slot.operator = Some(2.0 * op);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// `‖A(t) − ℙ_r A(t)‖_F` for a single `(r, t)`.
pub fn frobenius_leakage(h: &HamiltonianModel, a: &PauliString, r: usize, t: f64) -> Result<f64> {
    Ok(leakage_scan(h, a, &[r], &[t], false)?[0].frobenius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{heisenberg, project_region, propagator};
    use crate::hamiltonian::{build_nearest_neighbor, build_powerlaw};
    use crate::lattice::RingLattice;
    use crate::pauli::Pauli;

    #[test]
    fn front_matches_dense_oracle() {
        let l = RingLattice::new(6).unwrap();
        let h = build_powerlaw(l, 3.0, 1.0, 2, true).unwrap();
        let a = PauliString::single(l, 0, Pauli::X);
        let b = PauliString::single(l, 0, Pauli::Z);
        let ts = [0.0, 0.4, 0.9];
        let xs = [0i64, 1, 3];
        let got = commutator_front(&h, &a, &b, &ts, &xs).unwrap();
        for p in &got {
            let u = propagator(&h, p.t).unwrap();
            let ax = heisenberg(&u, &a.translated(p.x).to_operator_on(&l.full()).unwrap()).unwrap();
            let bo = b.to_operator_on(&l.full()).unwrap();
            let c = ax.commutator(&bo).unwrap().operator_norm().unwrap();
            assert!((c - p.value).abs() < 1e-9, "{p:?} vs {c}");
            assert!(p.value <= 2.0 + 1e-12);
        }
        assert!(got[1].value < 1e-12 && got[2].value < 1e-12); // t = 0, x ≠ 0
    }

    #[test]
    fn leakage_matches_dense_oracle() {
        let l = RingLattice::new(6).unwrap();
        let h = build_nearest_neighbor(l, 4);
        let a = PauliString::single(l, 2, Pauli::Y);
        let pts = leakage_scan(&h, &a, &[0, 1, 2, 3], &[0.0, 0.6], true).unwrap();
        for p in &pts {
            let u = propagator(&h, p.t).unwrap();
            let at = heisenberg(&u, &a.to_operator_on(&l.full()).unwrap()).unwrap();
            let s = a.support().neighborhood(p.r);
            let d = at.sub(&project_region(&at, &s).unwrap()).unwrap();
            assert!((d.frobenius_norm().unwrap() - p.frobenius).abs() < 1e-10);
            assert!((d.operator_norm().unwrap() - p.operator.unwrap()).abs() < 1e-9);
            assert!(p.frobenius <= p.operator.unwrap() + 1e-12);
        }
        assert!(pts[..4].iter().all(|p| p.frobenius < 1e-12));
        assert_eq!(pts[7].frobenius, 0.0); // S_3 covers the ring
    }
}
