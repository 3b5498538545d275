//! Commutator front `‖[A_x(t), B_0]‖` for a nearest-neighbour ring: the light cone in numbers.
//!
//!     cargo run --release --example light_cone_scan -- 10

use shiftlab::evolution::commutator_front;
use shiftlab::hamiltonian::build_nearest_neighbor;
use shiftlab::lattice::RingLattice;
use shiftlab::pauli::PauliString;

fn main() -> shiftlab::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(8, |s| s.parse().expect("n"));
    let lat = RingLattice::new(n)?;
    let h = build_nearest_neighbor(lat, 1);
    let a = PauliString::parse(lat, "X0")?;
    let b = PauliString::parse(lat, "Z0")?;
    let ts = [0.0, 0.5, 1.0, 1.5, 2.0];
    let xs: Vec<i64> = (1..=(n / 2) as i64).collect();
    let front = commutator_front(&h, &a, &b, &ts, &xs)?;
    print!("{:>5}", "t\\x");
    for x in &xs {
        print!("{x:>11}");
    }
    println!();
    for (i, t) in ts.iter().enumerate() {
        print!("{t:>5}");
        for p in &front[i * xs.len()..(i + 1) * xs.len()] {
            print!("{:>11.3e}", p.value);
        }
        println!();
    }
    Ok(())
}
