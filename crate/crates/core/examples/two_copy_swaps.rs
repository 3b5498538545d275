//! Two copies of the ring: a string of cross-copy SWAPs moves only at its ends under the
//! paired shift, and two layers of SWAPs realize that paired shift.

use shiftlab::lattice::RingLattice;
use shiftlab::super2::spt;

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::with_half_width(1)?;
    let si = spt::swap_string_structure(1, false)?;
    let sf = spt::swap_string_structure(1, true)?;
    println!("SWAP pairs before: {:?}", si.pairs);
    println!("SWAP pairs after:  {:?}", sf.pairs);

    let v = spt::two_copy_shift(lat)?.matrix;
    let a = spt::swap_string(1, false)?.matrix;
    let b = spt::swap_string(1, true)?.matrix;
    println!("max |V† S V − S'| = {:.1e}", (v.adjoint() * &a * &v - &b).norm_max());

    let w = spt::swap_circuit_unitary(lat)?;
    println!("depth-2 SWAP circuit vs V: {:.1e}", (&w - &v).norm_max());
    for (k, layer) in spt::swap_circuit_layers(lat).iter().enumerate() {
        println!("layer {k}: separable {}, inversion asymmetry {:.1e}", spt::separability_check(layer)?, spt::inversion_asymmetry(lat, &layer.dense()?)?);
    }
    for t in spt::boundary_commutators(1, 4)? {
        println!("bond {:?}: straddles {}, ‖[h, SWAPs]‖_F = {:.3e}", t.bond, t.straddles, t.commutator);
    }
    Ok(())
}
