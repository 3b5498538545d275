//! Scan how fast an operator leaks out of its grown support in a long-range model, fit the
//! light-cone constants and check the fitted bounds sit above every measured point.
//!
//!     cargo run --release --example fit_light_cone -- 10 3.0

use shiftlab::bounds::{f_alpha, fit_front, g_alpha, BoundParams, FrontModel, FrontSample};
use shiftlab::evolution::leakage_scan;
use shiftlab::hamiltonian::build_powerlaw;
use shiftlab::lattice::RingLattice;
use shiftlab::pauli::PauliString;
use std::time::Instant;

fn main() -> shiftlab::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(10, |s| s.parse().expect("n"));
    let alpha: f64 = args.get(2).map_or(3.0, |s| s.parse().expect("alpha"));
    let lat = RingLattice::new(n)?;
    let h = build_powerlaw(lat, alpha, 1.0, 11, true)?;
    let a = PauliString::parse(lat, "Z0")?;
    let ts = [0.25, 0.5, 0.75, 1.0];
    let rs: Vec<usize> = (1..n / 2).collect();

    let clock = Instant::now();
    let scan = leakage_scan(&h, &a, &rs, &ts, true)?;
    println!("n = {n}, alpha = {alpha}: {} points in {:.1?}", scan.len(), clock.elapsed());

    let op: Vec<FrontSample> = scan.iter().map(|p| FrontSample { t: p.t, r: p.r as f64, value: p.operator.unwrap() }).collect();
    let fr: Vec<FrontSample> = scan.iter().map(|p| FrontSample { t: p.t, r: p.r as f64, value: p.frobenius }).collect();
    let base = BoundParams::default();
    let g = fit_front(&op, FrontModel::PowerLaw { alpha }, &base)?;
    let f = fit_front(&fr, FrontModel::Frobenius { alpha }, &base)?;
    println!("g_alpha: c_LR = {:.4e} ({} used, {} outside window)", g.params.c_lr, g.used, g.skipped);
    println!("f_alpha: c_FB = {:.4e} ({} used, {} skipped)", f.params.c_fb, f.used, f.skipped);

    println!("{:>5} {:>3} {:>12} {:>12} {:>12} {:>12}", "t", "r", "op leak", "g_alpha", "frob leak", "f_alpha");
    for (o, q) in op.iter().zip(&fr) {
        let gb = g_alpha(o.t, o.r, alpha, &g.params)?.value();
        let fb = if q.r >= 2.0 { Some(f_alpha(q.t, q.r, alpha, &f.params)?) } else { None };
        let show = |x: Option<f64>| x.map_or("—".to_string(), |v| format!("{v:.4e}"));
        println!("{:>5} {:>3} {:>12.4e} {:>12} {:>12.4e} {:>12}", o.t, o.r, o.value, show(gb), q.value, show(fb));
    }
    Ok(())
}
