//! Two copies of the ring: copy `A` shifted forward, copy `B` backward, under an
//! inversion symmetry that swaps the copies and a separability constraint that forbids
//! coupling them.
//!
//! Slots: `[x]_A` is slot `x`, `[x]_B` is slot `n + x`; slot 0 is the most significant bit.

use crate::error::{domain, Error, Result};
use crate::lattice::RingLattice;
use crate::linalg::{c64, expm_hermitian, frobenius_norm, CMat, ONE, ZERO};
use crate::shift::build_shift;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Largest doubled system formed densely.
pub const MAX_TWO_COPY_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chain {
    A,
    B,
}

impl Chain {
    pub fn other(self) -> Chain {
        match self {
            Chain::A => Chain::B,
            Chain::B => Chain::A,
        }
    }
}

pub fn slot(site: usize, chain: Chain, n: usize) -> usize {
    match chain {
        Chain::A => site,
        Chain::B => n + site,
    }
}

fn check_two_copy_cap(n: usize) -> Result<()> {
    if 2 * n > MAX_TWO_COPY_QUBITS {
        return Err(Error::Resource(format!("two copies of {n} sites exceed the {MAX_TWO_COPY_QUBITS}-qubit dense cap")));
    }
    Ok(())
}

/// Dense operator on both copies.
#[derive(Debug, Clone)]
pub struct TwoCopyOperator {
    pub n: usize,
    pub matrix: CMat,
    /// Sites where the operator acts nontrivially, per copy.
    pub support_a: Vec<usize>,
    pub support_b: Vec<usize>,
    /// Whether the operator factorizes across the copies.
    pub separable: bool,
}

/// Unitary moving the content of slot `s` to slot `perm[s]`, so that `P X_s P† = X_{perm[s]}`.
pub fn slot_permutation(perm: &[usize]) -> Result<CMat> {
    let q = perm.len();
    if q > MAX_TWO_COPY_QUBITS {
        return Err(Error::Resource(format!("permutation on {q} qubits")));
    }
    let mut seen = vec![false; q];
    for &p in perm {
        if p >= q || std::mem::replace(&mut seen[p], true) {
            return domain("not a permutation of the slots");
        }
    }
    let dim = 1usize << q;
    let mut m = CMat::zeros(dim, dim);
    for b in 0..dim {
        let mut out = 0;
        for (s, &p) in perm.iter().enumerate() {
            out |= ((b >> (q - 1 - s)) & 1) << (q - 1 - p);
        }
        m[(out, b)] = ONE;
    }
    Ok(m)
}

/// Bond-centered inversion combined with copy exchange: `[x]_A ↦ [4L+1−x]_B`, `[x]_B ↦ [4L+1−x]_A`.
pub fn inversion_map(x: usize, chain: Chain, lattice: RingLattice) -> (usize, Chain) {
    let n = lattice.n();
    ((n + 1 - x % n) % n, chain.other())
}

/// Slot image of every slot under [`inversion_map`].
pub fn inversion_permutation(lattice: RingLattice) -> Vec<usize> {
    let n = lattice.n();
    [Chain::A, Chain::B]
        .into_iter()
        .flat_map(|c| (0..n).map(move |x| (x, c)))
        .map(|(x, c)| {
            let (y, d) = inversion_map(x, c, lattice);
            slot(y, d, n)
        })
        .collect()
}

pub fn inversion_unitary(lattice: RingLattice) -> Result<TwoCopyOperator> {
    let n = lattice.n();
    check_two_copy_cap(n)?;
    Ok(TwoCopyOperator { n, matrix: slot_permutation(&inversion_permutation(lattice))?, support_a: (0..n).collect(), support_b: (0..n).collect(), separable: false })
}

/// `U_sh ⊗ U_sh^{-1}`: copy `A` operators move forward one site, copy `B` operators back.
pub fn two_copy_shift(lattice: RingLattice) -> Result<TwoCopyOperator> {
    let n = lattice.n();
    check_two_copy_cap(n)?;
    let sh = build_shift(lattice)?;
    let matrix = crate::linalg::kron(sh.matrix().as_ref(), sh.matrix().adjoint().to_owned().as_ref());
    Ok(TwoCopyOperator { n, matrix, support_a: (0..n).collect(), support_b: (0..n).collect(), separable: true })
}

/// Which region of the SWAP string a label falls in.
fn in_swap_region(label: i64, l: usize, lattice: RingLattice) -> bool {
    let l = l as i64;
    (l + 1..=3 * l).any(|x| lattice.site(x) == lattice.site(label))
}

/// Structural form of the SWAP string: a scalar times a product of cross-copy SWAPs.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapString {
    pub l: usize,
    pub shifted: bool,
    /// `(site in A, site in B)` pairs that are swapped.
    pub pairs: Vec<(usize, usize)>,
    /// `2^{-4L}` from the normalized identities on both zero blocks.
    pub scale: f64,
}

/// SWAPs `[x]_A ↔ [4L+1−x]_B` for `x ∈ [L+1, 3L]`, normalized identities elsewhere.
/// With `shifted`, the Heisenberg image under `U_sh ⊗ U_sh^{-1}`: pairs `[x+1]_A ↔ [4L−x]_B`.
pub fn swap_string_structure(l: usize, shifted: bool) -> Result<SwapString> {
    let lattice = RingLattice::with_half_width(l)?;
    let n = lattice.n() as i64;
    let (da, db) = if shifted { (1, -1) } else { (0, 0) };
    let pairs = (l as i64 + 1..=3 * l as i64).map(|x| (lattice.site(x + da), lattice.site(n + 1 - x + db))).collect();
    Ok(SwapString { l, shifted, pairs, scale: (-(4.0 * l as f64)).exp2() })
}

impl SwapString {
    pub fn to_dense(&self) -> Result<TwoCopyOperator> {
        let n = 4 * self.l;
        check_two_copy_cap(n)?;
        let mut perm: Vec<usize> = (0..2 * n).collect();
        for &(a, b) in &self.pairs {
            perm.swap(slot(a, Chain::A, n), slot(b, Chain::B, n));
        }
        let m = slot_permutation(&perm)?;
        let mut support_a: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        let mut support_b: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        support_a.sort_unstable();
        support_b.sort_unstable();
        Ok(TwoCopyOperator { n, matrix: crate::linalg::scaled(m.as_ref(), c64::new(self.scale, 0.0)), support_a, support_b, separable: false })
    }
}

pub fn swap_string(l: usize, shifted: bool) -> Result<TwoCopyOperator> {
    swap_string_structure(l, shifted)?.to_dense()
}

/// The inversion permutation acting only on labels `[L+1, 3L]` of both copies.
pub fn restricted_inversion(lattice: RingLattice) -> Result<CMat> {
    let g = lattice.regions()?;
    let n = lattice.n();
    let full = inversion_permutation(lattice);
    let perm: Vec<usize> = (0..2 * n).map(|s| if g.identity_block_i.contains(s % n) { full[s] } else { s }).collect();
    slot_permutation(&perm)
}

/// A site tagged with its copy; a missing tag is an error wherever separability is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSite {
    pub site: usize,
    pub chain: Option<Chain>,
}

#[derive(Debug, Clone)]
pub struct TwoCopyTerm {
    /// Sites in the order of the matrix's tensor factors (first = most significant).
    pub sites: Vec<TaggedSite>,
    pub matrix: CMat,
}

#[derive(Debug, Clone)]
pub struct TwoCopyModel {
    pub n: usize,
    pub terms: Vec<TwoCopyTerm>,
}

fn tagged(site: usize, chain: Chain) -> TaggedSite {
    TaggedSite { site, chain: Some(chain) }
}

fn term_slots(term: &TwoCopyTerm, n: usize) -> Result<Vec<usize>> {
    term.sites
        .iter()
        .map(|s| match s.chain {
            Some(c) if s.site < n => Ok(slot(s.site, c, n)),
            Some(_) => domain(format!("site {} outside a ring of {n}", s.site)),
            None => domain(format!("site {} has no copy tag", s.site)),
        })
        .collect()
}

/// `m` (on `slots`, in order) embedded into the full `q`-qubit space.
fn embed_slots(m: &CMat, slots: &[usize], q: usize) -> CMat {
    let k = slots.len();
    let dim = 1usize << q;
    let local = |b: usize| slots.iter().enumerate().fold(0, |acc, (j, &s)| acc | (((b >> (q - 1 - s)) & 1) << (k - 1 - j)));
    let mask = slots.iter().fold(0, |acc, &s| acc | (1 << (q - 1 - s)));
    let spread = |loc: usize| slots.iter().enumerate().fold(0, |acc, (j, &s)| acc | (((loc >> (k - 1 - j)) & 1) << (q - 1 - s)));
    let mut out = CMat::zeros(dim, dim);
    for b in 0..dim {
        let rest = b & !mask;
        let lb = local(b);
        for la in 0..1usize << k {
            let v = m[(la, lb)];
            if v != ZERO {
                out[(rest | spread(la), b)] += v;
            }
        }
    }
    out
}

impl TwoCopyModel {
    pub fn dense(&self) -> Result<CMat> {
        check_two_copy_cap(self.n)?;
        let q = 2 * self.n;
        let mut h = CMat::zeros(1 << q, 1 << q);
        for t in &self.terms {
            let slots = term_slots(t, self.n)?;
            if t.matrix.nrows() != 1 << slots.len() {
                return domain("term matrix does not match its site count");
            }
            h += embed_slots(&t.matrix, &slots, q);
        }
        Ok(h)
    }
}

/// True iff no term couples the two copies.
pub fn separability_check(h: &TwoCopyModel) -> Result<bool> {
    let mut ok = true;
    for t in &h.terms {
        term_slots(t, h.n)?;
        let first = t.sites.first().and_then(|s| s.chain);
        ok &= t.sites.iter().all(|s| s.chain == first);
    }
    Ok(ok)
}

/// `π Π_singlet`, whose unit-time evolution is exactly the SWAP.
pub fn swap_generator() -> CMat {
    let h = 0.5 * std::f64::consts::PI;
    // Π_singlet = (I − SWAP)/2 in the basis |00⟩,|01⟩,|10⟩,|11⟩
    let mut m = CMat::zeros(4, 4);
    m[(1, 1)] = c64::new(h, 0.0);
    m[(2, 2)] = c64::new(h, 0.0);
    m[(1, 2)] = c64::new(-h, 0.0);
    m[(2, 1)] = c64::new(-h, 0.0);
    m
}

/// Two layers of cross-copy SWAPs, `[x]_A ↔ [x]_B` then `[x]_A ↔ [x+1]_B`, each generated by
/// unit-time evolution under a sum of [`swap_generator`] terms.
pub fn swap_circuit_layers(lattice: RingLattice) -> [TwoCopyModel; 2] {
    let n = lattice.n();
    let layer = |offset: usize| TwoCopyModel {
        n,
        terms: (0..n).map(|x| TwoCopyTerm { sites: vec![tagged(x, Chain::A), tagged((x + offset) % n, Chain::B)], matrix: swap_generator() }).collect(),
    };
    [layer(0), layer(1)]
}

/// `e^{-iH_2} e^{-iH_1}` for the two SWAP layers.
pub fn swap_circuit_unitary(lattice: RingLattice) -> Result<CMat> {
    let [l1, l2] = swap_circuit_layers(lattice);
    let u1 = expm_hermitian(l1.dense()?.as_ref(), 1.0)?;
    let u2 = expm_hermitian(l2.dense()?.as_ref(), 1.0)?;
    Ok(u2 * u1)
}

/// `‖R M R† − M‖_max`.
pub fn inversion_asymmetry(lattice: RingLattice, m: &CMat) -> Result<f64> {
    let r = inversion_unitary(lattice)?.matrix;
    Ok((&r * m * r.adjoint() - m).norm_max())
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| c64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    CMat::from_fn(d, d, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Separable, inversion-symmetric nearest-neighbor model: a random bond term on copy `A`
/// for each bond `(x, x+1)` together with its image on copy `B`. Terms come in those pairs.
pub fn r_symmetric_model(lattice: RingLattice, seed: u64) -> TwoCopyModel {
    let n = lattice.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(2 * n);
    for x in 0..n {
        let h = random_hermitian(4, &mut rng);
        let y = (x + 1) % n;
        let (xb, _) = inversion_map(x, Chain::A, lattice);
        let (yb, _) = inversion_map(y, Chain::A, lattice);
        terms.push(TwoCopyTerm { sites: vec![tagged(x, Chain::A), tagged(y, Chain::A)], matrix: h.clone() });
        terms.push(TwoCopyTerm { sites: vec![tagged(xb, Chain::B), tagged(yb, Chain::B)], matrix: h });
    }
    TwoCopyModel { n, terms }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTerm {
    /// Bond `(x, x+1)` of copy `A` (its mirror on `B` is included).
    pub bond: (usize, usize),
    /// Whether the bond crosses between the identity block and the SWAP region.
    pub straddles: bool,
    /// `‖[h + R h R†, 2^{4L} 𝒮_i]‖_F`, with the bare SWAP string so the scale is O(1).
    pub commutator: f64,
}

/// Per mirrored pair of [`r_symmetric_model`], the commutator with the SWAP string.
pub fn boundary_commutators(l: usize, seed: u64) -> Result<Vec<BoundaryTerm>> {
    let lattice = RingLattice::with_half_width(l)?;
    let n = lattice.n();
    check_two_copy_cap(n)?;
    let model = r_symmetric_model(lattice, seed);
    let s = swap_string(l, false)?;
    let bare = crate::linalg::scaled(s.matrix.as_ref(), c64::new((4.0 * l as f64).exp2(), 0.0));
    let mut out = Vec::with_capacity(n);
    for (x, pair) in model.terms.chunks(2).enumerate() {
        let h = TwoCopyModel { n, terms: pair.to_vec() }.dense()?;
        let c = &h * &bare - &bare * &h;
        let y = (x + 1) % n;
        let straddles = in_swap_region(x as i64, l, lattice) != in_swap_region(y as i64, l, lattice);
        out.push(BoundaryTerm { bond: (x, y), straddles, commutator: frobenius_norm(c.as_ref())? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    fn l1() -> RingLattice {
        RingLattice::with_half_width(1).unwrap()
    }

    #[test]
    fn inversion_is_an_involution() {
        let lat = l1();
        assert_eq!(inversion_map(1, Chain::A, lat), (0, Chain::B)); // [1]_A ↦ [4L]_B ≡ [0]_B
        for c in [Chain::A, Chain::B] {
            for x in 0..4 {
                let (y, d) = inversion_map(x, c, lat);
                assert_eq!(inversion_map(y, d, lat), (x, c));
            }
        }
        let p = inversion_permutation(lat);
        assert!(p.iter().enumerate().all(|(s, &t)| p[t] == s));
        let r = inversion_unitary(lat).unwrap().matrix;
        assert!((&r * &r - CMat::identity(256, 256)).norm_max() < 1e-15);
    }

    #[test]
    fn two_copy_shift_is_inversion_symmetric() {
        let lat = l1();
        let v = two_copy_shift(lat).unwrap();
        assert!(inversion_asymmetry(lat, &v.matrix).unwrap() < 1e-15);
        // a single-copy shift is not
        let sh = build_shift(lat).unwrap();
        let vv = crate::linalg::kron(sh.matrix().as_ref(), sh.matrix().as_ref());
        assert!(inversion_asymmetry(lat, &vv).unwrap() > 0.5);
    }

    #[test]
    fn swap_string_conjugates_to_its_shifted_form() {
        let lat = l1();
        let si = swap_string(1, false).unwrap();
        let sf = swap_string(1, true).unwrap();
        let v = two_copy_shift(lat).unwrap().matrix;
        let moved = v.adjoint() * &si.matrix * &v;
        assert!((&moved - &sf.matrix).norm_max() < 1e-15);
        assert!(crate::linalg::is_hermitian(si.matrix.as_ref(), 1e-15));
        // 𝒮_i = 2^{-4L} × (inversion restricted to the SWAP region)
        let r = restricted_inversion(lat).unwrap();
        assert!((crate::linalg::scaled(r.as_ref(), c64::new(2f64.powi(-4), 0.0)) - &si.matrix).norm_max() < 1e-15);
        assert_eq!(si.support_a, vec![2, 3]);
        assert_eq!(sf.support_a, vec![0, 3]);
        assert_eq!(sf.support_b, vec![1, 2]);
    }

    #[test]
    fn swap_factor_spectrum() {
        let swap = expm_hermitian(swap_generator().as_ref(), 1.0).unwrap();
        let ev = hermitian_eigenvalues(swap.as_ref()).unwrap();
        let minus = ev.iter().filter(|&&e| (e + 1.0).abs() < 1e-12).count();
        let plus = ev.iter().filter(|&&e| (e - 1.0).abs() < 1e-12).count();
        assert_eq!((minus, plus), (1, 3));
        assert!((swap[(1, 2)].re - 1.0).abs() < 1e-12 && (swap[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_two_swaps_realize_the_shift_pair() {
        let lat = l1();
        let w = swap_circuit_unitary(lat).unwrap();
        let v = two_copy_shift(lat).unwrap().matrix;
        assert!((&w - &v).norm_max() < 1e-12);
        for layer in swap_circuit_layers(lat) {
            assert!(!separability_check(&layer).unwrap());
            assert!(inversion_asymmetry(lat, &layer.dense().unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn separability() {
        let lat = l1();
        let m = r_symmetric_model(lat, 3);
        assert!(separability_check(&m).unwrap());
        assert!(separability_check(&TwoCopyModel { n: 4, terms: vec![] }).unwrap());
        assert!(inversion_asymmetry(lat, &m.dense().unwrap()).unwrap() < 1e-12);
        let untagged = TwoCopyModel { n: 4, terms: vec![TwoCopyTerm { sites: vec![TaggedSite { site: 0, chain: None }], matrix: CMat::identity(2, 2) }] };
        assert!(separability_check(&untagged).is_err());
    }

    #[test]
    fn only_boundaries_evolve() {
        let terms = boundary_commutators(1, 17).unwrap();
        assert_eq!(terms.len(), 4);
        for t in &terms {
            if t.straddles {
                assert!(t.commutator > 1e-3, "{t:?}");
            } else {
                assert!(t.commutator < 1e-10, "{t:?}");
            }
        }
        // L = 1: SWAP region {2, 3}; bonds (1,2) and (3,0) straddle
        let straddling: Vec<_> = terms.iter().filter(|t| t.straddles).map(|t| t.bond).collect();
        assert_eq!(straddling, vec![(1, 2), (3, 0)]);
    }

    #[test]
    fn caps() {
        assert!(matches!(swap_string(2, false), Err(Error::Resource(_))));
        let s = swap_string_structure(3, true).unwrap();
        assert_eq!(s.pairs.len(), 6);
    }
}
