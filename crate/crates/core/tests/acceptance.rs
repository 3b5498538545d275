//! Acceptance run: one PASS/FAIL line per criterion with its pinned tolerance and runtime.
//!
//!     cargo test --test acceptance            # all criteria
//!     cargo test --test acceptance -- 1 9     # a subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::bounds::{self, critical_alpha, f_alpha, fit_front, g_alpha, thm1_exponent, zoo_threshold, BoundParams, FrontModel, FrontSample, ThresholdSource};
use shiftlab::cli::experiments::sample_rng;
use shiftlab::evolution::{haar_twirl, heisenberg, hhkl_cut_multi, leakage_scan, project_region, propagator, CircuitApprox};
use shiftlab::hamiltonian::{build_nearest_neighbor, build_powerlaw, Bond};
use shiftlab::lattice::{Region, RingLattice};
use shiftlab::linalg::{ginibre_operator, haar_operator, random_hermitian, CMat};
use shiftlab::pauli::PauliString;
use shiftlab::shift::{all_z, end_to_end, fidelity_chain, lemma_shift_rho_certificate, reduced_final, Verdict};
use shiftlab::super2::{liouvillian_identity_check, liouvillian_reality_check, spt, super_lemma_certificate};
use shiftlab::Result;
use std::time::Instant;

const TOL: f64 = 1e-9;

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Result<Check> {
    Ok(Check { pass, detail: detail.into() })
}

fn l2() -> RingLattice {
    RingLattice::with_half_width(2).unwrap()
}

/// 1. Trace-distance certificate, L = 2, 100 circuits × 16 z.
fn lemma_distance() -> Result<Check> {
    let zs = all_z(2);
    let mut min = f64::INFINITY;
    for i in 0..100 {
        let ca = CircuitApprox::random(l2(), &mut sample_rng(1, i))?;
        for z in &zs {
            min = min.min(lemma_shift_rho_certificate(&ca, z)?.distance);
        }
    }
    check(min >= 0.5 - TOL, format!("min ‖Ũρ_iŨ† − ρ_f‖_1 = {min:.6} ≥ 0.5 − 1e-9 over 100 circuits × {} z", zs.len()))
}

/// 2. Spectral ingredient, L = 2, 100 random U_0.
fn spectral_ingredient() -> Result<Check> {
    let g = l2().regions()?;
    let cap = 0.125 + TOL;
    let mut max = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let u0 = haar_operator(&g.u0_support, &mut rng)?;
        for z in all_z(2) {
            max = max.max(reduced_final(&u0, &z)?.operator_norm()?);
        }
    }
    check(max <= cap, format!("max ‖tr_R(U_0†ρ_fU_0)‖ = {max:.9} ≤ 0.125 + 1e-9"))
}

/// 3. Fidelity chain, L = 2, 20 circuits.
fn fidelity() -> Result<Check> {
    let (mut min_link, mut min_frob, mut max_gap) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for i in 0..20 {
        let c = fidelity_chain(&CircuitApprox::random(l2(), &mut sample_rng(3, i))?)?;
        for l in &c.links {
            min_link = min_link.min(l.two_gap);
        }
        min_frob = min_frob.min(c.frob_from_fidelities);
        max_gap = max_gap.max(c.identity_gap);
    }
    let pass = min_link >= 1.0 / 16.0 - TOL && min_frob >= 0.25 - TOL && max_gap <= TOL;
    check(pass, format!("min 2(1−|f_z|) = {min_link:.4} ≥ 1/16, min ‖Ũ−U_sh‖_F = {min_frob:.4} ≥ 1/4, trace-identity gap {max_gap:.1e} ≤ 1e-9"))
}

/// 4. Operator-space certificate, L = 2, 20 circuits.
fn super2() -> Result<Check> {
    let (mut min_half, mut min_max) = (f64::INFINITY, f64::INFINITY);
    let mut chain = true;
    for i in 0..20 {
        let c = super_lemma_certificate(&CircuitApprox::random(l2(), &mut sample_rng(4, i))?)?;
        min_half = min_half.min(c.halfchain_value);
        min_max = min_max.min(c.max_value);
        chain &= c.passes();
    }
    let pass = min_half >= 0.5 - TOL && min_max >= 0.25 - TOL && chain;
    check(pass, format!("min half-chain value = {min_half:.4} ≥ 0.5, min 256-string max = {min_max:.4} ≥ 0.25"))
}

/// 5. End-to-end, n = 8: nearest neighbour at T ∈ {0, 0.25, 0.5}, power law α = 3 at T = 0.25.
fn end_to_end_runs() -> Result<Check> {
    let lat = l2();
    let p = BoundParams::default();
    let nn = build_nearest_neighbor(lat, 5);
    let pl = build_powerlaw(lat, 3.0, 1.0, 5, true)?;
    let mut parts = Vec::new();
    let mut pass = true;
    let mut applicable = 0;
    for (name, h, t) in [("nn", &nn, 0.0), ("nn", &nn, 0.25), ("nn", &nn, 0.5), ("pl3", &pl, 0.25)] {
        let e = end_to_end(h, t, &p, None)?;
        // the measured conclusion and the triangle step are checked on every run; the
        // certified chain only where the circuit is within 1/8 of U
        pass &= e.final_distance >= 0.125 - TOL && e.triangle_ok;
        if e.u_err <= 0.125 {
            applicable += 1;
            pass &= e.verdict == Verdict::Pass;
        } else {
            pass &= e.verdict == Verdict::NotApplicable;
        }
        parts.push(format!("{name} T={t}: ‖U−Ũ‖={:.3} ‖U−U_sh‖={:.3} {:?}", e.u_err, e.final_distance, e.verdict));
    }
    pass &= applicable > 0;
    check(pass, parts.join("; "))
}

/// 6. Interaction-picture cut errors, nearest neighbour n = 12, T = 0.5, r = 0..4.
fn hhkl_decay() -> Result<Check> {
    let lat = RingLattice::new(12)?;
    let h = build_nearest_neighbor(lat, 6);
    let rs = [0usize, 1, 2, 3, 4];
    let (_, res) = hhkl_cut_multi(&h, Bond::between(lat, 0, 1)?, 0.5, &rs, 0.1)?;
    let errs: Vec<f64> = res.iter().map(|r| r.err).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let certified = res.iter().all(|r| r.certified());
    let (slope, r2) = log_linear_fit(&rs.map(|r| r as f64), &errs);
    let pass = decreasing && certified && slope < 0.0 && r2 > 0.9;
    let list: Vec<String> = errs.iter().map(|e| format!("{e:.3e}")).collect();
    check(pass, format!("err(r) = [{}], slope {slope:.3}, R² {r2:.4}, all ≤ bound + 10·dt: {certified}", list.join(", ")))
}

fn log_linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

/// 7. Haar twirl with M = 1000 against the exact projector, n = 6.
fn projector() -> Result<Check> {
    let lat = RingLattice::new(6)?;
    let h = build_nearest_neighbor(lat, 7);
    let a = PauliString::parse(lat, "Z0")?;
    let at = heisenberg(&propagator(&h, 0.5)?, &a.to_operator().embed(&lat.full())?)?;
    let s = a.support().neighborhood(1);
    let m = 1000;
    let err = haar_twirl(&at, &s, m, 7)?.sub(&project_region(&at, &s)?)?.frobenius_norm()?;
    let dim = (1usize << s.complement().len()) as f64;
    let tol = 5.0 * dim / (m as f64).sqrt();
    check(err <= tol, format!("‖twirl − ℙ_r‖_F = {err:.4e} ≤ 5·dim/√M = {tol:.4} (dim = 2^|S^c| = {dim})"))
}

fn random_region(lat: RingLattice, rng: &mut ChaCha8Rng, size: usize, avoid: &Region) -> Region {
    loop {
        let mut sites: Vec<usize> = (0..size).map(|_| rng.random_range(0..lat.n())).collect();
        sites.sort();
        sites.dedup();
        let r = Region::from_sites(lat, &sites).unwrap();
        if sites.len() == size && r.intersection(avoid).is_empty() {
            return r;
        }
    }
}

/// 8. Liouvillian structure: disjoint supports commute; Hermitian inputs give real elements.
fn liouvillian() -> Result<Check> {
    let lat = RingLattice::new(8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut max_id, mut max_im) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let hs = random_region(lat, &mut rng, 2, &lat.empty());
        let asup = random_region(lat, &mut rng, 2, &hs);
        let h = random_hermitian(&hs, &mut rng);
        let a = ginibre_operator(&asup, &mut rng);
        max_id = max_id.max(liouvillian_identity_check(&h, &a)?);
    }
    for _ in 0..50 {
        let none = lat.empty();
        let h = random_hermitian(&random_region(lat, &mut rng, 2, &none), &mut rng);
        let o1 = random_hermitian(&random_region(lat, &mut rng, 2, &none), &mut rng);
        let o2 = random_hermitian(&random_region(lat, &mut rng, 2, &none), &mut rng);
        max_im = max_im.max(liouvillian_reality_check(&h, &o1, &o2)?);
    }
    check(max_id <= 1e-10 && max_im <= 1e-10, format!("max ‖ℒ_S(I_S⊗A)‖_F = {max_id:.1e}, max |Im(O1|ℒO2)| = {max_im:.1e}, both ≤ 1e-10"))
}

/// 9. Two-copy SWAP string at L = 1.
fn spt_analogy() -> Result<Check> {
    let lat = RingLattice::with_half_width(1)?;
    let si = spt::swap_string(1, false)?;
    let sf = spt::swap_string(1, true)?;
    let v = spt::two_copy_shift(lat)?.matrix;
    let conj = (v.adjoint() * &si.matrix * &v - &sf.matrix).norm_max();
    let r = spt::inversion_unitary(lat)?.matrix;
    let inv = (&r * &r - CMat::identity(r.nrows(), r.nrows())).norm_max();
    let w = (spt::swap_circuit_unitary(lat)? - &v).norm_max();
    let mut nonsep = true;
    for layer in spt::swap_circuit_layers(lat) {
        nonsep &= !spt::separability_check(&layer)?;
    }
    let pass = conj <= 1e-12 && inv <= 1e-12 && w <= 1e-12 && nonsep;
    check(pass, format!("max|V†𝒮_iV − 𝒮_f| = {conj:.1e}, max|R² − I| = {inv:.1e} (≤ 1e-12); depth-2 SWAP circuit = V to {w:.1e}, non-separable: {nonsep}"))
}

/// 10. Crossover, branch boundaries, and fitted bounds above n = 12 scans.
fn bounds_module() -> Result<Check> {
    let ac = critical_alpha();
    let ac_err = (ac - (2.0 + std::f64::consts::FRAC_1_SQRT_2)).abs();
    let branches = branch_boundaries()?;
    let lat = RingLattice::new(12)?;
    let a = PauliString::parse(lat, "Z0")?;
    let ts = [0.25, 0.5, 0.75, 1.0];
    let rs = [1usize, 2, 3, 4, 5];
    let mut pass = ac_err <= 1e-10 && branches;
    let mut parts = vec![format!("|α_c − (2+1/√2)| = {ac_err:.1e}, branches as displayed: {branches}")];
    for alpha in [2.5, 3.0, 4.0] {
        let h = build_powerlaw(lat, alpha, 1.0, 10, true)?;
        let scan = leakage_scan(&h, &a, &rs, &ts, true)?;
        let op: Vec<FrontSample> = scan.iter().map(|p| FrontSample { t: p.t, r: p.r as f64, value: p.operator.unwrap() }).collect();
        let fr: Vec<FrontSample> = scan.iter().map(|p| FrontSample { t: p.t, r: p.r as f64, value: p.frobenius }).collect();
        let base = BoundParams::default();
        let g = fit_front(&op, FrontModel::PowerLaw { alpha }, &base)?;
        let f = fit_front(&fr, FrontModel::Frobenius { alpha }, &base)?;
        let (mut checked, mut ok) = (0, true);
        for (o, q) in op.iter().zip(&fr) {
            if let Some(b) = g_alpha(o.t, o.r, alpha, &g.params)?.value() {
                checked += 1;
                ok &= b >= o.value;
            }
            if q.r >= 2.0 {
                checked += 1;
                ok &= f_alpha(q.t, q.r, alpha, &f.params)? >= q.value;
            }
        }
        pass &= ok;
        parts.push(format!("α={alpha}: {checked} points majorized: {ok}"));
    }
    check(pass, parts.join("; "))
}

/// Exponents and subtractive constants on and just below each boundary.
fn branch_boundaries() -> Result<bool> {
    let eps = 0.01;
    let ac = 2.0 + std::f64::consts::FRAC_1_SQRT_2;
    let third = |a: f64| (a - 2.0) * (a - 1.0) / (2.0 * a - 3.0) - eps;
    let below = |a: f64| a - 1e-9;
    let cases: [(f64, f64); 8] = [
        (4.0, 1.0),
        (below(4.0), (below(4.0) - 1.0) / 3.0),
        (3.0, third(3.0)),
        (below(3.0), third(below(3.0))),
        (ac, 0.5 - eps),
        (below(ac), 0.5 - eps),
        (2.0, 0.5 - eps),
        (below(2.0), (below(2.0) - 1.0) / 2.0),
    ];
    let mut ok = cases.iter().all(|&(a, e)| thm1_exponent(a, eps).map(|x| x == e).unwrap_or(false));
    // C drops out only on (α_c, 3]
    let p = BoundParams { big_c: 0.5, ..Default::default() };
    for (a, with_c) in [(4.0, true), (3.0, false), (ac + 1e-9, false), (ac, true), (2.0, true)] {
        let t = zoo_threshold(a, 16, &p, ThresholdSource::Thm1)?;
        let bare = 16f64.powf(thm1_exponent(a, eps)?);
        ok &= t == if with_c { bare - 0.5 } else { bare };
    }
    ok &= bounds::conjecture_exponent(2.0)? == 1.0;
    Ok(ok)
}

/// 11. Norm ordering and Hölder on random operators.
fn norm_order() -> Result<Check> {
    let lat = RingLattice::new(6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let k = rng.random_range(1..=4);
        let s = random_region(lat, &mut rng, k, &lat.empty());
        let a = ginibre_operator(&s, &mut rng);
        let b = ginibre_operator(&s, &mut rng);
        let (f, o, t) = (a.frobenius_norm()?, a.operator_norm()?, a.trace_norm()?);
        let holder = a.adjoint().mul(&b)?.trace().norm() - o * b.trace_norm()?;
        worst = worst.max(f - o).max(o - t).max(holder);
    }
    check(worst <= TOL, format!("max violation of ‖A‖_F ≤ ‖A‖ ≤ ‖A‖_1 and |tr A†B| ≤ ‖A‖‖B‖_1: {worst:.2e} ≤ 1e-9"))
}

type Criterion = (usize, f64, fn() -> Result<Check>);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, 120.0, lemma_distance),
        (2, 30.0, spectral_ingredient),
        (3, 120.0, fidelity),
        (4, 300.0, super2),
        (5, 300.0, end_to_end_runs),
        (6, 600.0, hhkl_decay),
        (7, 120.0, projector),
        (8, 30.0, liouvillian),
        (9, 60.0, spt_analogy),
        (10, 900.0, bounds_module),
        (11, 30.0, norm_order),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, budget, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let clock = Instant::now();
        let res = f();
        let secs = clock.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok(c) => (c.pass && secs <= budget, c.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {id:>2}: {} [{secs:7.1}s / {budget:.0}s] {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all selected criteria pass");
}
