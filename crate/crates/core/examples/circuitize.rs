//! Replace `e^{-iHT}` by four block unitaries and report each stage's error against its bound.
//!
//!     cargo run --release --example circuitize -- 0.3

use shiftlab::bounds::BoundParams;
use shiftlab::evolution::{circuitize, EllPolicy};
use shiftlab::hamiltonian::{build_nearest_neighbor, build_powerlaw};
use shiftlab::lattice::RingLattice;

fn main() -> shiftlab::Result<()> {
    let t: f64 = std::env::args().nth(1).map_or(0.3, |s| s.parse().expect("T"));
    let lat = RingLattice::with_half_width(2)?;
    let p = BoundParams::default();
    for (name, h) in [("nearest neighbour", build_nearest_neighbor(lat, 2)), ("power law α=3", build_powerlaw(lat, 3.0, 1.0, 2, true)?)] {
        let rep = circuitize(&h, t, &p, None, EllPolicy::Report)?;
        println!("{name}, T = {t}: ‖U − Ũ‖ = {:.4e}", rep.err_total);
        if let Some(ell) = rep.ell {
            println!("  far terms (ℓ = {ell}, ℓ ≤ 0.1L: {}): {} dropped, error {:.3e} ≤ {:.3e}", rep.ell_ok, rep.far_terms, rep.far_err, rep.far_bound);
        }
        for (bond, c) in [("(0,1)", &rep.cut_0), ("(2L,2L+1)", &rep.cut_i)] {
            println!("  cut {bond}: r = {}, error {:.3e} ≤ {:.3e} + {:.0e}: {}", c.r, c.err, c.bound, c.slack, c.certified());
        }
    }
    Ok(())
}
