//! Why four-block circuits cannot be the shift: the trace-distance certificate on the hard
//! states and the fidelity chain down to a Frobenius-norm gap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftlab::evolution::CircuitApprox;
use shiftlab::lattice::RingLattice;
use shiftlab::shift::{all_z, fidelity_chain, jbasis_witness, lemma_shift_rho_certificate, shift_distance, DistanceMode};

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::with_half_width(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, ca) in [("identity", CircuitApprox::identity(lat)?), ("random", CircuitApprox::random(lat, &mut rng)?)] {
        println!("{name} circuit: ‖Ũ − U_sh‖ = {:.4}", shift_distance(ca.assembled(), DistanceMode::Operator)?);
        let worst = all_z(2).iter().map(|z| lemma_shift_rho_certificate(&ca, z)).collect::<shiftlab::Result<Vec<_>>>()?;
        let c = worst.iter().min_by(|a, b| a.distance.total_cmp(&b.distance)).unwrap();
        println!("  min over z: distance {:.4} ≥ 1/2, half-chain {:.4}, ‖τ‖ = {:.4} ≤ {}", c.distance, c.halfchain_lower, c.spectral, c.spectral_cap);
        let w = jbasis_witness(&ca.u_l, &ca.u_0, &[0, 1, 1, 0])?;
        println!("  spectral witness passes: {}", w.passes());
        let chain = fidelity_chain(&ca)?;
        println!("  ‖Ũ − U_sh‖_F = {:.4} (≥ 1/4), chain lower bound {:.4}, passes {}", chain.frob_from_fidelities, chain.frob_lower, chain.passes());
    }
    Ok(())
}
