//! Property-based invariants across modules.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftlab::bounds::{fit_front, g_alpha, zoo_threshold, BoundParams, FrontModel, FrontSample, ThresholdSource};
use shiftlab::cli::config::ExperimentConfig;
use shiftlab::cli::output::fmt_e12;
use shiftlab::lattice::{ring_distance, Region, RingLattice};
use shiftlab::linalg::{ginibre_operator, haar_operator};
use shiftlab::pauli::{pauli_decompose, pauli_reconstruct, Pauli, PauliString};
use shiftlab::shift::shifted_index;
use shiftlab::super2::spt::{inversion_map, Chain};

fn letter(i: u8) -> Pauli {
    Pauli::from_index(i as usize % 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_distance_is_a_metric(n in 2usize..13, x in 0usize..12, y in 0usize..12, z in 0usize..12) {
        let (x, y, z) = (x % n, y % n, z % n);
        prop_assert_eq!(ring_distance(x, y, n), ring_distance(y, x, n));
        prop_assert!(ring_distance(x, y, n) <= n / 2);
        prop_assert!(ring_distance(x, z, n) <= ring_distance(x, y, n) + ring_distance(y, z, n));
        prop_assert_eq!(ring_distance(x, x, n), 0);
    }

    #[test]
    fn regions_grow_and_translate(n in 3usize..13, a in 0i64..12, len in 0i64..4, r in 0usize..4, k in -12i64..12) {
        let lat = RingLattice::new(n).unwrap();
        let s = lat.interval(a, a + len);
        prop_assert!(s.is_subset(&s.neighborhood(r)));
        prop_assert!(s.neighborhood(r).is_subset(&s.neighborhood(r + 1)));
        prop_assert_eq!(s.shifted(k).shifted(-k), s.clone());
        prop_assert_eq!(s.union(&s.complement()), lat.full());
    }

    #[test]
    fn shift_permutation_has_order_n(n in 2usize..11, b in 0usize..1024) {
        let b = b % (1 << n);
        let mut c = b;
        for _ in 0..n {
            c = shifted_index(c, n);
        }
        prop_assert_eq!(c, b);
        prop_assert_eq!(shifted_index(b, n).count_ones(), b.count_ones());
    }

    #[test]
    fn pauli_products_and_translations(n in 2usize..8, la in prop::collection::vec(0u8..4, 8), lb in prop::collection::vec(0u8..4, 8), k in -8i64..8) {
        let lat = RingLattice::new(n).unwrap();
        let full = lat.full();
        let a = PauliString::on_region(&full, &la[..n].iter().map(|&i| letter(i)).collect::<Vec<_>>()).unwrap();
        let b = PauliString::on_region(&full, &lb[..n].iter().map(|&i| letter(i)).collect::<Vec<_>>()).unwrap();
        // matrices multiply like the strings
        let ab = a.mul(&b).unwrap().to_operator_on(&full).unwrap();
        let direct = a.to_operator_on(&full).unwrap().mul(&b.to_operator_on(&full).unwrap()).unwrap();
        prop_assert!(ab.sub(&direct).unwrap().frobenius_norm().unwrap() < 1e-12);
        prop_assert_eq!(a.translated(k).translated(-k), a.clone());
        prop_assert_eq!(a.translated(k).weight(), a.weight());
    }

    #[test]
    fn pauli_expansion_round_trips(k in 1usize..4, seed in any::<u64>()) {
        let lat = RingLattice::new(6).unwrap();
        let s = lat.interval(1, k as i64);
        let a = ginibre_operator(&s, &mut ChaCha8Rng::seed_from_u64(seed));
        let c = pauli_decompose(&a).unwrap();
        prop_assert_eq!(c.len(), 1 << (2 * k));
        let back = pauli_reconstruct(&s, &c).unwrap();
        prop_assert!(back.sub(&a).unwrap().frobenius_norm().unwrap() < 1e-12);
    }

    #[test]
    fn norms_are_ordered_and_unitaries_isometric(k in 1usize..4, seed in any::<u64>()) {
        let lat = RingLattice::new(6).unwrap();
        let s = lat.interval(0, k as i64 - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ginibre_operator(&s, &mut rng);
        let u = haar_operator(&s, &mut rng).unwrap();
        let (f, o, t) = (a.frobenius_norm().unwrap(), a.operator_norm().unwrap(), a.trace_norm().unwrap());
        prop_assert!(f <= o + 1e-9 && o <= t + 1e-9);
        let ua = u.mul(&a).unwrap();
        prop_assert!((ua.operator_norm().unwrap() - o).abs() < 1e-9);
        prop_assert!((ua.trace_norm().unwrap() - t).abs() < 1e-9);
        // partial trace of an embedding returns the operator
        let big = Region::from_sites(lat, &[0, 1, 2, 3, 4]).unwrap();
        prop_assert!(a.embed(&big).unwrap().reduce_to(&s).unwrap().sub(&a).unwrap().frobenius_norm().unwrap() < 1e-12);
    }

    #[test]
    fn inversion_is_an_involution(l in 1usize..4, x in 0usize..12, b in any::<bool>()) {
        let lat = RingLattice::with_half_width(l).unwrap();
        let x = x % lat.n();
        let c = if b { Chain::A } else { Chain::B };
        let (y, d) = inversion_map(x, c, lat);
        prop_assert_ne!(c, d);
        prop_assert_eq!(inversion_map(y, d, lat), (x, c));
    }

    // the √(L/log L) shapes only increase once log L > 2
    #[test]
    fn thresholds_grow_with_l(alpha in 1.05f64..6.0, l in 8usize..200) {
        let p = BoundParams::default();
        for s in [ThresholdSource::Thm1, ThresholdSource::Thm6] {
            let a = zoo_threshold(alpha, l, &p, s).unwrap();
            let b = zoo_threshold(alpha, l + 1, &p, s).unwrap();
            prop_assert!(b >= a, "{s:?} α={alpha} L={l}: {a} > {b}");
        }
    }

    #[test]
    fn g_alpha_decays_in_r(alpha in 2.05f64..6.0, t in 0.01f64..1.0, r in 2.0f64..20.0) {
        let p = BoundParams::default();
        if let (Some(a), Some(b)) = (g_alpha(t, r, alpha, &p).unwrap().value(), g_alpha(t, r + 1.0, alpha, &p).unwrap().value()) {
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn fitted_fronts_majorize(mu in 0.3f64..3.0, v in 0.3f64..3.0, c in 0.01f64..10.0, noise in prop::collection::vec(0.5f64..2.0, 16)) {
        let mut scan = Vec::new();
        for (i, w) in noise.iter().enumerate() {
            let (t, r) = (0.25 * (1 + i % 4) as f64, (1 + i / 4) as f64);
            scan.push(FrontSample { t, r, value: w * c * (mu * (v * t - r)).exp() });
        }
        if let Ok(fit) = fit_front(&scan, FrontModel::Exponential, &BoundParams::default()) {
            let p = fit.params;
            for s in &scan {
                prop_assert!(p.c_lr * (p.mu * (p.v * s.t - s.r)).exp() >= s.value);
            }
        }
    }

    #[test]
    fn csv_numbers_round_trip(x in -1e300f64..1e300) {
        let s = fmt_e12(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-12 * x.abs());
        prop_assert!(s.contains("e+") || s.contains("e-"));
    }

    #[test]
    fn config_round_trips(seed in any::<u32>(), samples in 1usize..500, t in 0.0f64..5.0) {
        let mut c = ExperimentConfig::default();
        c.seed = seed as u64;
        c.samples = Some(samples);
        c.time.t = t;
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        prop_assert_eq!(back, c);
    }
}
