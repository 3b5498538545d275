//! Ring geometry: distances, grown regions and the named blocks of the four-block circuit.
//!
//!     cargo run --example ring_geometry -- 2

use shiftlab::lattice::{set_distance, RingLattice};

fn main() -> shiftlab::Result<()> {
    let l: usize = std::env::args().nth(1).map_or(2, |s| s.parse().expect("L"));
    let lat = RingLattice::with_half_width(l)?;
    let g = lat.regions()?;
    println!("ring of n = {} sites (L = {l}); labels are taken mod n, site 0 is the top bit", lat.n());
    for (name, r) in [
        ("left half", &g.left),
        ("right half", &g.right),
        ("U_0 block", &g.u0_support),
        ("U_I block", &g.ui_support),
        ("zero block (start)", &g.zero_block_i),
        ("identity block (start)", &g.identity_block_i),
        ("zero block (shifted)", &g.zero_block_f),
        ("identity block (shifted)", &g.identity_block_f),
    ] {
        println!("{name:>26}: {:?}", r.sites());
    }
    let a = lat.interval(0, 0);
    for r in 0..=lat.n() / 2 {
        println!("site 0 grown by {r}: {:?}", a.neighborhood(r).sites());
    }
    println!("distance(U_0 block, U_I block) = {}", set_distance(&g.u0_support, &g.ui_support)?);
    println!("ring distance 1 ↔ {} = {}", lat.n() - 1, lat.ring_distance(1, lat.n() - 1)?);
    Ok(())
}
