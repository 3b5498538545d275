//! The whole argument on one ring: evolve, circuitize, certify the circuit is far from the
//! shift, and combine with the triangle inequality.
//!
//!     cargo run --release --example end_to_end

use shiftlab::bounds::BoundParams;
use shiftlab::hamiltonian::build_nearest_neighbor;
use shiftlab::lattice::RingLattice;

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::with_half_width(2)?;
    let h = build_nearest_neighbor(lat, 5);
    for t in [0.0, 0.1, 0.25, 0.5] {
        let e = shiftlab::shift::end_to_end(&h, t, &BoundParams::default(), None)?;
        println!(
            "T = {t:<4} ‖U−Ũ‖ = {:.3e}  ‖Ũ−U_sh‖ = {:.3}  ‖U−U_sh‖ = {:.3}  triangle {}  verdict {:?}",
            e.u_err, e.circuit_shift, e.final_distance, e.triangle_ok, e.verdict
        );
    }
    Ok(())
}
