//! Pauli strings: parsing, products with phases, translation, and expanding an operator in
//! the normalized Pauli basis.

use shiftlab::lattice::RingLattice;
use shiftlab::linalg::c64;
use shiftlab::pauli::{pauli_decompose, pauli_inner, pauli_reconstruct, PauliString};

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::new(4)?;
    let a = PauliString::parse(lat, "X0 Y1")?;
    let b = PauliString::parse(lat, "Y0 Z2")?;
    let ab = a.mul(&b)?;
    println!("{a} · {b} = {ab} (phase {})", ab.phase().value());
    println!("{a} translated by 3 = {}", a.translated(3));

    // (P|Q) = 2^{-n} tr(P†Q) is orthonormal on strings
    let pa = a.to_operator_on(&lat.full())?;
    let pb = b.to_operator_on(&lat.full())?;
    println!("(a|a) = {}, (a|b) = {}", pauli_inner(&pa, &pa)?, pauli_inner(&pa, &pb)?);

    // O = 0.5 X0Y1 + 2i Y0Z2, recovered from its coefficients
    let o = pa.scale(c64::new(0.5, 0.0)).add(&pb.scale(c64::new(0.0, 2.0)))?;
    let coeffs: Vec<_> = pauli_decompose(&o)?.into_iter().filter(|(_, c)| c.norm() > 1e-12).collect();
    for (p, c) in &coeffs {
        println!("  {p}: {c}");
    }
    let back = pauli_reconstruct(o.support(), &coeffs)?;
    println!("reconstruction error {:.1e}", back.sub(&o)?.frobenius_norm()?);
    Ok(())
}
