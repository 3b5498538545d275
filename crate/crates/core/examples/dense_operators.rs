//! Operators on site subsets: embedding, partial traces, the three norms, Haar sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftlab::lattice::RingLattice;
use shiftlab::linalg::{ginibre_operator, haar_operator, DenseOperator};

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::new(6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = lat.interval(1, 2);
    let u = haar_operator(&s, &mut rng)?;
    println!("Haar unitary on {:?}: unitary = {}", s.sites(), u.is_unitary(1e-12));

    // embedding tensors with the identity; the partial trace undoes it up to 2^|traced|
    let big = lat.interval(0, 3);
    let e = u.embed(&big)?;
    let back = e.reduce_to(&s)?;
    println!("embed then reduce: error {:.1e}", back.sub(&u)?.frobenius_norm()?);

    // normalized Frobenius ≤ operator ≤ trace norm
    let a = ginibre_operator(&big, &mut rng);
    println!("‖A‖_F = {:.4}  ‖A‖ = {:.4}  ‖A‖_1 = {:.4}", a.frobenius_norm()?, a.operator_norm()?, a.trace_norm()?);

    let c = DenseOperator::identity(lat.interval(4, 4)).commutator(&u)?;
    println!("[I_4, U] on disjoint sites vanishes: {:.1e}", c.frobenius_norm()?);
    Ok(())
}
