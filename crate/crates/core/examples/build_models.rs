//! Random two-site Hamiltonians: nearest neighbour and power law, their far/cut splits,
//! and the JSON model file format.
//!
//!     cargo run --example build_models -- model.json

use shiftlab::hamiltonian::{build_nearest_neighbor, build_powerlaw, ell_rule, norm_tail, split_cut, split_far, Bond, HamiltonianModel, NormMode};
use shiftlab::lattice::RingLattice;

fn main() -> shiftlab::Result<()> {
    let lat = RingLattice::new(8)?;
    let nn = build_nearest_neighbor(lat, 3);
    println!("nearest neighbour: {} terms", nn.terms.len());

    let h = build_powerlaw(lat, 2.5, 1.0, 3, true)?;
    println!("power law α = 2.5: {} terms, Σ‖H_xy‖ = {:.4}", h.terms.len(), norm_tail(&h, NormMode::Operator));
    for t in h.terms.iter().filter(|t| t.x == 0) {
        println!("  ‖H_0{}‖ = {:.4}", t.y, t.operator_norm());
    }

    let ell = ell_rule(1.0, 3.5, 2.0, NormMode::Operator)?;
    let (far, _) = split_far(&h, 3)?;
    println!("ℓ rule at T = 1, α = 3.5: ℓ = {ell}; terms across the halves at distance ≥ 3: {}", far.terms.len());
    let (cut, rest) = split_cut(&h, Bond::between(lat, 0, 1)?, 3)?;
    println!("straddling bond (0,1) within 3: {} terms, rest {}", cut.terms.len(), rest.terms.len());

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, serde_json::to_string_pretty(&h.to_file()).expect("json"))?;
        let f = serde_json::from_str(&std::fs::read_to_string(&path)?).expect("json");
        let back = HamiltonianModel::from_file(&f)?;
        println!("wrote {path}; round trip equal: {}", back == h);
    }
    Ok(())
}
