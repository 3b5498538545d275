//! Pauli strings and the normalized operator inner product.

use crate::error::{domain, Error, Result};
use crate::lattice::{Region, RingLattice};
use crate::linalg::{c64, CMat, DenseOperator, ONE, ZERO};
use std::fmt;

/// Largest region for full Pauli enumeration/decomposition (4^8 strings).
pub const MAX_PAULI_SITES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i]
    }

    /// Bit flip and phase of the column `b`: `P|b⟩ = phase·|b ⊕ flip⟩`.
    fn act(self, b: usize) -> (usize, c64) {
        match self {
            Pauli::I => (0, ONE),
            Pauli::X => (1, ONE),
            Pauli::Y => (1, if b == 0 { c64::new(0.0, 1.0) } else { c64::new(0.0, -1.0) }),
            Pauli::Z => (0, if b == 0 { ONE } else { -ONE }),
        }
    }

    pub fn matrix(self) -> CMat {
        CMat::from_fn(2, 2, |i, j| {
            let (f, ph) = self.act(j);
            if i == j ^ f { ph } else { ZERO }
        })
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-site product `a·b = phase · c`, phase as a power of `i`.
    fn product(a: Pauli, b: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (p, 0),
            (p, q) if p == q => (I, 0),
            (X, Y) => (Z, 1),
            (Y, Z) => (X, 1),
            (Z, X) => (Y, 1),
            (Y, X) => (Z, 3),
            (Z, Y) => (X, 3),
            (X, Z) => (Y, 3),
            _ => unreachable!(),
        }
    }
}

/// Global phase of a Pauli string: `i^k`, `k ∈ {0,1,2,3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn value(self) -> c64 {
        [ONE, c64::new(0.0, 1.0), -ONE, c64::new(0.0, -1.0)][self.0 as usize]
    }

    fn times(self, k: u8) -> Phase {
        Phase((self.0 + k) % 4)
    }
}

/// Tensor product of single-site Paulis over the whole ring, with a phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    lattice: RingLattice,
    letters: Vec<Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn identity(lattice: RingLattice) -> Self {
        PauliString { lattice, letters: vec![Pauli::I; lattice.n()], phase: Phase::ONE }
    }

    pub fn single(lattice: RingLattice, site: i64, p: Pauli) -> Self {
        let mut s = Self::identity(lattice);
        s.letters[lattice.site(site)] = p;
        s
    }

    /// Letters for each site of `region` in ascending order.
    pub fn on_region(region: &Region, letters: &[Pauli]) -> Result<Self> {
        if region.len() != letters.len() {
            return domain("letter count does not match region size");
        }
        let mut s = Self::identity(region.lattice());
        for (&site, &p) in region.sites().iter().zip(letters) {
            s.letters[site] = p;
        }
        Ok(s)
    }

    /// Parse the text form `"X0 Z3"` (letter + site, identities omitted; `"I"` for identity).
    pub fn parse(lattice: RingLattice, text: &str) -> Result<Self> {
        let mut s = Self::identity(lattice);
        for tok in text.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let p = match chars.next() {
                Some('I') => Pauli::I,
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                _ => return Err(Error::Parse(format!("bad Pauli token '{tok}'"))),
            };
            let site: usize = chars.as_str().parse().map_err(|_| Error::Parse(format!("bad site in '{tok}'")))?;
            if site >= lattice.n() {
                return domain(format!("site {site} outside ring of {}", lattice.n()));
            }
            if s.letters[site] != Pauli::I {
                return Err(Error::Parse(format!("site {site} given twice")));
            }
            s.letters[site] = p;
        }
        Ok(s)
    }

    pub fn lattice(&self) -> RingLattice {
        self.lattice
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site]
    }

    /// Sites carrying a non-identity letter.
    pub fn support(&self) -> Region {
        let sites: Vec<usize> = (0..self.letters.len()).filter(|&s| self.letters[s] != Pauli::I).collect();
        Region::from_sites(self.lattice, &sites).expect("sites in range")
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Translate by `k` sites around the ring.
    pub fn translated(&self, k: i64) -> Self {
        let mut s = Self::identity(self.lattice);
        for (site, &p) in self.letters.iter().enumerate() {
            s.letters[self.lattice.site(site as i64 + k)] = p;
        }
        s.phase = self.phase;
        s
    }

    /// Product `self · other` with composed phase.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.lattice != other.lattice {
            return domain("Pauli strings on different rings");
        }
        let mut phase = self.phase.times(other.phase.0);
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (c, k) = Pauli::product(a, b);
                phase = phase.times(k);
                c
            })
            .collect();
        Ok(PauliString { lattice: self.lattice, letters, phase })
    }

    /// Dense matrix on `region` (which must contain the string's support).
    pub fn to_operator_on(&self, region: &Region) -> Result<DenseOperator> {
        if !self.support().is_subset(region) {
            return domain("region does not contain the Pauli string's support");
        }
        let letters: Vec<Pauli> = region.sites().iter().map(|&s| self.letters[s]).collect();
        let dim = 1usize << region.len();
        let mut m = CMat::zeros(dim, dim);
        let ph = self.phase.value();
        for b in 0..dim {
            let (row, v) = local_column(&letters, b);
            m[(row, b)] = v * ph;
        }
        DenseOperator::new(region.clone(), m)
    }

    /// `out = P v` for a full-ring state vector.
    pub fn apply(&self, v: &[c64], out: &mut [c64]) {
        let n = self.letters.len();
        let mut flip = 0usize;
        for (s, &p) in self.letters.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= 1 << (n - 1 - s);
            }
        }
        let ph = self.phase.value();
        for (b, &vb) in v.iter().enumerate() {
            let mut f = ph;
            for (s, &p) in self.letters.iter().enumerate() {
                if p != Pauli::I {
                    f *= p.act((b >> (n - 1 - s)) & 1).1;
                }
            }
            out[b ^ flip] = f * vb;
        }
    }

    /// `P|b⟩ = phase[b] |b ⊕ flip⟩` on the full ring.
    pub fn signed_permutation(&self) -> (usize, Vec<c64>) {
        let n = self.letters.len();
        let mut flip = 0usize;
        for (s, &p) in self.letters.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip |= 1 << (n - 1 - s);
            }
        }
        let ph = self.phase.value();
        let phases = (0..1usize << n)
            .map(|b| {
                self.letters
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p != Pauli::I)
                    .fold(ph, |f, (s, &p)| f * p.act((b >> (n - 1 - s)) & 1).1)
            })
            .collect();
        (flip, phases)
    }

    /// Orthonormal basis (columns, full ring) of the −1 eigenspace of a Hermitian
    /// non-identity string (phase ±1), built from product eigenvectors.
    pub fn minus_eigenbasis(&self) -> Result<CMat> {
        if self.weight() == 0 || !matches!(self.phase, Phase::ONE | Phase::MINUS_ONE) {
            return domain("need a Hermitian, non-identity Pauli string");
        }
        let n = self.letters.len();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // local eigenvector with eigenvalue (-1)^e, as amplitudes on |0>,|1>
        let local = |p: Pauli, e: usize| -> [c64; 2] {
            match (p, e) {
                (Pauli::I, _) | (Pauli::Z, 0) => [ONE, ZERO],
                (Pauli::Z, _) => [ZERO, ONE],
                (Pauli::X, 0) => [c64::new(h, 0.0), c64::new(h, 0.0)],
                (Pauli::X, _) => [c64::new(h, 0.0), c64::new(-h, 0.0)],
                (Pauli::Y, 0) => [c64::new(h, 0.0), c64::new(0.0, h)],
                (Pauli::Y, _) => [c64::new(h, 0.0), c64::new(0.0, -h)],
            }
        };
        let support: Vec<usize> = (0..n).filter(|&s| self.letters[s] != Pauli::I).collect();
        let free: Vec<usize> = (0..n).filter(|&s| self.letters[s] == Pauli::I).collect();
        let want_parity = if self.phase == Phase::ONE { 1 } else { 0 };
        let w = support.len();
        let dim = 1usize << n;
        let mut out = CMat::zeros(dim, dim / 2);
        let mut col = 0;
        for e in 0..1usize << w {
            if e.count_ones() as usize % 2 != want_parity {
                continue;
            }
            // product state on the support
            let mut amps: Vec<(usize, c64)> = vec![(0, ONE)];
            for (j, &s) in support.iter().enumerate() {
                let v = local(self.letters[s], (e >> (w - 1 - j)) & 1);
                let bit = 1usize << (n - 1 - s);
                amps = amps
                    .iter()
                    .flat_map(|&(i, a)| [(i, a * v[0]), (i | bit, a * v[1])])
                    .filter(|(_, a)| *a != ZERO)
                    .collect();
            }
            for f in 0..1usize << free.len() {
                let mut base = 0;
                for (j, &s) in free.iter().enumerate() {
                    if (f >> (free.len() - 1 - j)) & 1 == 1 {
                        base |= 1 << (n - 1 - s);
                    }
                }
                for &(i, a) in &amps {
                    out[(i | base, col)] = a;
                }
                col += 1;
            }
        }
        Ok(out)
    }

    /// Dense matrix on the string's own support.
    pub fn to_operator(&self) -> DenseOperator {
        self.to_operator_on(&self.support()).expect("own support")
    }
}

/// Column `b` of a phase-1 Pauli string given as letters on consecutive bits (first = MSB).
fn local_column(letters: &[Pauli], b: usize) -> (usize, c64) {
    let k = letters.len();
    let mut row = b;
    let mut v = ONE;
    for (j, &p) in letters.iter().enumerate() {
        let sh = k - 1 - j;
        let (f, ph) = p.act((b >> sh) & 1);
        row ^= f << sh;
        v *= ph;
    }
    (row, v)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase.0 {
            1 => write!(f, "i·")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i·")?,
            _ => {}
        }
        let toks: Vec<String> = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(s, p)| format!("{}{s}", p.letter()))
            .collect();
        if toks.is_empty() {
            write!(f, "I")
        } else {
            write!(f, "{}", toks.join(" "))
        }
    }
}

/// Normalized inner product `2^{-k} tr(O1† O2)`; both operands must share a support.
pub fn pauli_inner(o1: &DenseOperator, o2: &DenseOperator) -> Result<c64> {
    if o1.support() != o2.support() {
        return domain("pauli_inner: operands have different supports");
    }
    let (a, b) = (o1.matrix(), o2.matrix());
    let d = o1.dim();
    let mut s = ZERO;
    for j in 0..d {
        for i in 0..d {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    Ok(s / d as f64)
}

/// Letters of the `idx`-th string in enumeration order over `k` sites.
pub fn letters_of_index(idx: usize, k: usize) -> Vec<Pauli> {
    (0..k).map(|j| Pauli::from_index((idx >> (2 * (k - 1 - j))) & 3)).collect()
}

/// All `4^|region|` phase-1 strings on `region`, lexicographic in (I,X,Y,Z) with the
/// lowest site varying slowest.
pub fn enumerate_paulis(region: &Region) -> Result<Vec<PauliString>> {
    if region.len() > MAX_PAULI_SITES {
        return Err(Error::Resource(format!("enumerating Pauli strings on {} sites", region.len())));
    }
    let k = region.len();
    (0..1usize << (2 * k)).map(|idx| PauliString::on_region(region, &letters_of_index(idx, k))).collect()
}

/// Coefficient `(P|A)` of every string on `A`'s support, in enumeration order.
pub fn pauli_decompose(a: &DenseOperator) -> Result<Vec<(PauliString, c64)>> {
    let region = a.support();
    let k = region.len();
    if k > MAX_PAULI_SITES {
        return Err(Error::Resource(format!("decomposing an operator on {k} sites")));
    }
    let m = a.matrix();
    let d = a.dim();
    let mut out = Vec::with_capacity(1 << (2 * k));
    for idx in 0..1usize << (2 * k) {
        let letters = letters_of_index(idx, k);
        let mut s = ZERO;
        for b in 0..d {
            let (row, v) = local_column(&letters, b);
            s += v.conj() * m[(row, b)];
        }
        out.push((PauliString::on_region(region, &letters)?, s / d as f64));
    }
    Ok(out)
}

/// `Σ c_P P` on `region`.
pub fn pauli_reconstruct(region: &Region, coeffs: &[(PauliString, c64)]) -> Result<DenseOperator> {
    let d = 1usize << region.len();
    let mut m = CMat::zeros(d, d);
    for (p, c) in coeffs {
        let op = p.to_operator_on(region)?;
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] += op.matrix()[(i, j)] * c;
            }
        }
    }
    DenseOperator::new(region.clone(), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(n: usize) -> RingLattice {
        RingLattice::new(n).unwrap()
    }

    #[test]
    fn enumeration_order() {
        let l = lat(4);
        let one = enumerate_paulis(&l.interval(0, 0)).unwrap();
        let names: Vec<String> = one.iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["I", "X0", "Y0", "Z0"]);
        let two = enumerate_paulis(&l.interval(0, 1)).unwrap();
        assert_eq!(two.len(), 16);
        assert_eq!(two[0].to_string(), "I");
        assert_eq!(two[1].to_string(), "X1");
        assert_eq!(two[15].to_string(), "Z0 Z1");
        assert_eq!(enumerate_paulis(&l.interval(0, 2)).unwrap().len(), 64);
        assert!(enumerate_paulis(&lat(12).interval(0, 8)).is_err());
    }

    #[test]
    fn products_compose_phases() {
        let l = lat(4);
        let x = PauliString::single(l, 0, Pauli::X);
        let y = PauliString::single(l, 0, Pauli::Y);
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.letter(0), Pauli::Z);
        assert_eq!(xy.phase(), Phase::I);
        let dense = x.to_operator().mul(&y.to_operator()).unwrap();
        let expect = xy.to_operator_on(&l.interval(0, 0)).unwrap();
        assert!((dense.matrix() - expect.matrix()).norm_max() < 1e-15);
    }

    #[test]
    fn minus_basis_spans_negative_eigenspace() {
        let l = lat(3);
        for text in ["X0", "Y1 Z2", "X0 Y1 Z2"] {
            let p = PauliString::parse(l, text).unwrap();
            let v = p.minus_eigenbasis().unwrap();
            let full = p.to_operator_on(&l.full()).unwrap();
            // P = I - 2 V V†
            let rec = CMat::identity(8, 8) - (&v * v.adjoint()) * faer::Scale(c64::new(2.0, 0.0));
            assert!((rec - full.matrix()).norm_max() < 1e-14, "{text}");
            let mut out = vec![ZERO; 8];
            let e: Vec<c64> = (0..8).map(|i| c64::new(i as f64, 1.0)).collect();
            p.apply(&e, &mut out);
            let mut direct = vec![ZERO; 8];
            crate::linalg::dense_matvec(full.matrix().as_ref(), &e, &mut direct);
            assert!(out.iter().zip(&direct).all(|(a, b)| (a - b).norm() < 1e-14));
        }
    }

    #[test]
    fn text_roundtrip() {
        let l = lat(8);
        let p = PauliString::parse(l, "X0 Z3").unwrap();
        assert_eq!(p.to_string(), "X0 Z3");
        assert_eq!(PauliString::parse(l, "I").unwrap().weight(), 0);
        assert!(PauliString::parse(l, "Q1").is_err());
        assert!(PauliString::parse(l, "X9").is_err());
    }

    #[test]
    fn inner_examples() {
        let l = lat(4);
        let s = l.interval(0, 0);
        let x = PauliString::single(l, 0, Pauli::X).to_operator_on(&s).unwrap();
        let z = PauliString::single(l, 0, Pauli::Z).to_operator_on(&s).unwrap();
        assert!((pauli_inner(&x, &x).unwrap() - ONE).norm() < 1e-15);
        assert!(pauli_inner(&x, &z).unwrap().norm() < 1e-15);
        let s2 = l.interval(0, 1);
        let rho = DenseOperator::identity(s2.clone()).scale(c64::new(0.25, 0.0));
        let id = DenseOperator::identity(s2);
        assert!((pauli_inner(&id, &rho).unwrap().re - 0.25).abs() < 1e-15);
        assert!(pauli_inner(&x, &id).is_err());
    }

    #[test]
    fn decompose_projector() {
        let l = lat(4);
        let p0 = DenseOperator::new(l.interval(0, 0), faer::mat![[ONE, ZERO], [ZERO, ZERO]]).unwrap();
        let c = pauli_decompose(&p0).unwrap();
        let vals: Vec<f64> = c.iter().map(|(_, v)| v.re).collect();
        assert_eq!(vals, [0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn orthonormal_on_three_sites() {
        let l = lat(4);
        let r = l.interval(0, 2);
        let ps: Vec<DenseOperator> = enumerate_paulis(&r).unwrap().iter().map(|p| p.to_operator_on(&r).unwrap()).collect();
        for (i, a) in ps.iter().enumerate() {
            for (j, b) in ps.iter().enumerate() {
                let v = pauli_inner(a, b).unwrap();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - c64::new(e, 0.0)).norm() < 1e-14);
            }
        }
    }
}
