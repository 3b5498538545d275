//! Operator space as a state space: superoperators of unitaries, super-density matrices,
//! and the operator-space distance certificate with its exhaustive Pauli scan.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftlab::evolution::CircuitApprox;
use shiftlab::lattice::RingLattice;
use shiftlab::linalg::haar_operator;
use shiftlab::super2::{final_super_state, initial_super_state, product_expansion_gap, super_lemma_certificate, super_matrix};

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::with_half_width(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let u = haar_operator(&lat.interval(0, 1), &mut rng)?;
    let s = super_matrix(&u)?;
    let imag = s.col_iter().flat_map(|c| c.iter().map(|z| z.im.abs()).collect::<Vec<_>>()).fold(0.0, f64::max);
    println!("superoperator of a 2-site unitary: {}×{}, largest imaginary part {imag:.1e}", s.nrows(), s.ncols());

    // full super-states live in 4^8 dimensions; look at the right half, as the certificate does
    let right = lat.regions()?.right;
    for (name, st) in [("initial", initial_super_state(lat)?), ("final", final_super_state(lat)?)] {
        let st = st.restricted(&right)?;
        println!("{name} super-state on {:?}: super-trace {}, product expansion gap {:.1e}", st.region().sites(), st.super_trace(), product_expansion_gap(&st)?);
    }

    let ca = CircuitApprox::random(lat, &mut rng)?;
    let c = super_lemma_certificate(&ca)?;
    println!("half-chain value {:.4} (≥ 1/2); worst string {} with {:.4} (≥ 1/4); mean {:.4} over {}", c.halfchain_value, c.max_pauli, c.max_value, c.mean_value, c.scanned);
    Ok(())
}
