//! The projector keeping the part of an operator supported on a region, computed exactly by
//! a partial trace and estimated by a Haar twirl over the complement.

use shiftlab::evolution::{haar_twirl, heisenberg, project_region, propagator};
use shiftlab::hamiltonian::build_nearest_neighbor;
use shiftlab::lattice::RingLattice;
use shiftlab::pauli::PauliString;

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::new(6)?;
    let h = build_nearest_neighbor(lat, 7);
    let a = PauliString::parse(lat, "Z0")?.to_operator().embed(&lat.full())?;
    let at = heisenberg(&propagator(&h, 0.5)?, &a)?;
    let s = lat.interval(-1, 1);
    let exact = project_region(&at, &s)?;
    println!("‖A(t) − ℙ A(t)‖_F = {:.4e} outside {:?}", at.sub(&exact)?.frobenius_norm()?, s.sites());
    for m in [10, 100, 1000] {
        let mc = haar_twirl(&at, &s, m, 3)?;
        println!("M = {m:>4}: ‖twirl − exact‖_F = {:.3e}", mc.sub(&exact)?.frobenius_norm()?);
    }
    Ok(())
}
