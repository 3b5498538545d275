//! Hardness time thresholds across α, the crossover α_c, and the conjectured exponents.

use shiftlab::bounds::{conjecture_exponent, critical_alpha, thm1_exponent, zoo_threshold, BoundParams, ThresholdSource};

fn main() -> shiftlab::Result<()> {
    let p = BoundParams::default();
    println!("α_c = {:.12} (2 + 1/√2 = {:.12})", critical_alpha(), 2.0 + std::f64::consts::FRAC_1_SQRT_2);
    println!("{:>6} {:>9} {:>9} {:>10} {:>10} {:>10}", "α", "exponent", "conj.", "thm1 L=64", "thm4 L=64", "thm6 L=64");
    for alpha in [1.5, 2.0, 2.5, 2.8, 3.0, 3.5, 4.0, 5.0] {
        let cell = |s| zoo_threshold(alpha, 64, &p, s).map_or("—".to_string(), |x| format!("{x:.3}"));
        println!(
            "{alpha:>6} {:>9.4} {:>9.4} {:>10} {:>10} {:>10}",
            thm1_exponent(alpha, p.epsilon)?,
            conjecture_exponent(alpha)?,
            cell(ThresholdSource::Thm1),
            cell(ThresholdSource::Thm4),
            cell(ThresholdSource::Thm6)
        );
    }
    Ok(())
}
