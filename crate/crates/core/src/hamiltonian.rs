//! Random two-site Hamiltonians on the ring and their far/cut decompositions.

use crate::error::{domain, Error, Result};
use crate::lattice::{ring_distance, RingLattice};
use crate::linalg::sparse::SparseHermitian;
use crate::linalg::{c64, frobenius_norm, operator_norm, scaled, CMat, DenseOperator};
use crate::pauli::{letters_of_index, Pauli, PauliString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Which norm a decomposition tail or ℓ rule refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    Operator,
    Frobenius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    NearestNeighbor,
    PowerLaw { alpha: f64, k: f64 },
}

/// A traceless Hermitian two-site term `Σ c_P P` over the 15 non-identity strings on `(x, y)`,
/// `x < y`, in enumeration order (XI … skipped II … ZZ).
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub x: usize,
    pub y: usize,
    pub coeffs: [f64; 15],
    matrix: CMat,
}

fn two_site_paulis() -> &'static [CMat; 15] {
    use std::sync::OnceLock;
    static P: OnceLock<[CMat; 15]> = OnceLock::new();
    P.get_or_init(|| {
        std::array::from_fn(|k| {
            let l = letters_of_index(k + 1, 2);
            crate::linalg::kron(l[0].matrix().as_ref(), l[1].matrix().as_ref())
        })
    })
}

impl Term {
    pub fn new(x: usize, y: usize, coeffs: [f64; 15]) -> Result<Self> {
        if x >= y {
            return domain(format!("term sites must satisfy x < y, got ({x},{y})"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerical("non-finite term coefficient".into()));
        }
        let ps = two_site_paulis();
        let mut m = CMat::zeros(4, 4);
        for (c, p) in coeffs.iter().zip(ps) {
            if *c != 0.0 {
                m += scaled(p.as_ref(), c64::new(*c, 0.0));
            }
        }
        Ok(Term { x, y, coeffs, matrix: m })
    }

    /// 4×4 matrix, site `x` on the more significant bit.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn operator(&self, lattice: RingLattice) -> DenseOperator {
        let r = crate::lattice::Region::from_sites(lattice, &[self.x, self.y]).expect("valid sites");
        DenseOperator::new(r, self.matrix.clone()).expect("4x4")
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(self.matrix.as_ref()).expect("finite")
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self.matrix.as_ref()).expect("finite")
    }

    fn scaled(&self, s: f64) -> Term {
        let mut c = self.coeffs;
        c.iter_mut().for_each(|v| *v *= s);
        Term::new(self.x, self.y, c).expect("valid")
    }
}

/// Piecewise-constant multipliers: on `[breaks[k], breaks[k+1])` term `j` is scaled by
/// `multipliers[k][j]`; the last interval extends to infinity. Empty = time independent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub breaks: Vec<f64>,
    pub multipliers: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn constant() -> Self {
        Schedule::default()
    }

    pub fn is_constant(&self) -> bool {
        self.breaks.is_empty()
    }

    fn validate(&self, n_terms: usize) -> Result<()> {
        if self.breaks.is_empty() {
            return if self.multipliers.is_empty() { Ok(()) } else { domain("multipliers without breaks") };
        }
        if self.breaks[0] != 0.0 || self.breaks.windows(2).any(|w| w[1] <= w[0]) {
            return domain("schedule breaks must start at 0 and increase");
        }
        if self.multipliers.len() != self.breaks.len() || self.multipliers.iter().any(|m| m.len() != n_terms) {
            return domain("schedule needs one multiplier row per break and one entry per term");
        }
        if self.multipliers.iter().flatten().any(|m| !(m.abs() <= 1.0)) {
            return domain("schedule multipliers must lie in [-1, 1] to respect the norm budget");
        }
        Ok(())
    }

    fn interval(&self, t: f64) -> Option<usize> {
        if self.breaks.is_empty() {
            None
        } else {
            Some(self.breaks.iter().rposition(|&b| b <= t).unwrap_or(0))
        }
    }

    /// Times in `(0, t)` at which the Hamiltonian changes.
    pub fn changes_before(&self, t: f64) -> Vec<f64> {
        self.breaks.iter().copied().filter(|&b| b > 0.0 && b < t).collect()
    }
}

/// Collection of two-site traceless terms with a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub lattice: RingLattice,
    pub kind: ModelKind,
    pub terms: Vec<Term>,
    pub schedule: Schedule,
}

/// Gaussian coefficients on the nine genuinely two-body strings; single-site strings stay
/// zero so that terms on distinct pairs are exactly Frobenius-orthogonal.
fn random_coeffs<R: Rng>(rng: &mut R) -> [f64; 15] {
    std::array::from_fn(|k| {
        let l = letters_of_index(k + 1, 2);
        if l[0] != Pauli::I && l[1] != Pauli::I {
            rng.sample(StandardNormal)
        } else {
            0.0
        }
    })
}

fn term_with_norm<R: Rng>(x: usize, y: usize, norm: f64, rng: &mut R) -> Term {
    let raw = Term::new(x, y, random_coeffs(rng)).expect("valid");
    let s = norm / raw.operator_norm();
    raw.scaled(s)
}

/// Random power-law model: one term per unordered pair, with `‖H_xy‖ = K d^{-α}` when
/// saturating, else a uniform fraction of it.
pub fn build_powerlaw(lattice: RingLattice, alpha: f64, k: f64, seed: u64, saturate: bool) -> Result<HamiltonianModel> {
    if !(alpha > 1.0) {
        return domain(format!("power-law exponent must exceed 1, got {alpha}"));
    }
    if !(k > 0.0) {
        return domain(format!("coupling scale K must be positive, got {k}"));
    }
    let n = lattice.n();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for x in 0..n {
        for y in x + 1..n {
            let d = ring_distance(x, y, n) as f64;
            let mut budget = k * d.powf(-alpha);
            if !saturate {
                budget *= rng.random::<f64>();
            }
            terms.push(term_with_norm(x, y, budget, &mut rng));
        }
    }
    Ok(HamiltonianModel { lattice, kind: ModelKind::PowerLaw { alpha, k }, terms, schedule: Schedule::constant() })
}

/// Random nearest-neighbour model: one unit-norm term on each bond `(x, x+1)`.
pub fn build_nearest_neighbor(lattice: RingLattice, seed: u64) -> HamiltonianModel {
    let n = lattice.n();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|x| (x.min((x + 1) % n), x.max((x + 1) % n))).collect();
    pairs.dedup();
    if n == 2 {
        pairs.truncate(1);
    }
    let terms = pairs.into_iter().map(|(x, y)| term_with_norm(x, y, 1.0, &mut rng)).collect();
    HamiltonianModel { lattice, kind: ModelKind::NearestNeighbor, terms, schedule: Schedule::constant() }
}

impl HamiltonianModel {
    pub fn new(lattice: RingLattice, kind: ModelKind, terms: Vec<Term>, schedule: Schedule) -> Result<Self> {
        let m = HamiltonianModel { lattice, kind, terms, schedule };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lattice.n();
        for t in &self.terms {
            if t.y >= n {
                return domain(format!("term site {} outside ring of {n}", t.y));
            }
            let d = ring_distance(t.x, t.y, n);
            let norm = t.operator_norm();
            match self.kind {
                ModelKind::NearestNeighbor => {
                    if d != 1 {
                        return domain(format!("nearest-neighbour model has a term at distance {d}"));
                    }
                    if norm > 1.0 + 1e-12 {
                        return domain(format!("nearest-neighbour term norm {norm} exceeds 1"));
                    }
                }
                ModelKind::PowerLaw { alpha, k } => {
                    if norm > k * (d as f64).powf(-alpha) + 1e-12 {
                        return domain(format!("term ({},{}) exceeds the power-law budget", t.x, t.y));
                    }
                }
            }
        }
        self.schedule.validate(self.terms.len())
    }

    pub fn is_time_independent(&self) -> bool {
        self.schedule.is_constant()
    }

    /// Same lattice, kind and schedule restricted to the terms where `keep` holds.
    pub fn filter(&self, mut keep: impl FnMut(&Term) -> bool) -> HamiltonianModel {
        let idx: Vec<usize> = (0..self.terms.len()).filter(|&i| keep(&self.terms[i])).collect();
        let schedule = Schedule {
            breaks: self.schedule.breaks.clone(),
            multipliers: self.schedule.multipliers.iter().map(|row| idx.iter().map(|&i| row[i]).collect()).collect(),
        };
        HamiltonianModel {
            lattice: self.lattice,
            kind: self.kind,
            terms: idx.iter().map(|&i| self.terms[i].clone()).collect(),
            schedule,
        }
    }

    /// Split into (terms satisfying `pred`, the rest).
    pub fn partition(&self, pred: impl Fn(&Term) -> bool) -> (HamiltonianModel, HamiltonianModel) {
        (self.filter(|t| pred(t)), self.filter(|t| !pred(t)))
    }

    /// Terms with their multipliers at time `t`.
    pub fn scaled_terms_at(&self, t: f64) -> Vec<(usize, usize, CMat)> {
        let row = self.schedule.interval(t);
        self.terms
            .iter()
            .enumerate()
            .filter_map(|(j, term)| {
                let m = row.map_or(1.0, |k| self.schedule.multipliers[k][j]);
                (m != 0.0).then(|| (term.x, term.y, scaled(term.matrix().as_ref(), c64::new(m, 0.0))))
            })
            .collect()
    }

    /// Sparse full-ring Hamiltonian at time `t`.
    pub fn sparse_at(&self, t: f64) -> Result<SparseHermitian> {
        check_cap(self.lattice)?;
        let st = self.scaled_terms_at(t);
        let refs: Vec<(usize, usize, &CMat)> = st.iter().map(|(x, y, m)| (*x, *y, m)).collect();
        SparseHermitian::from_two_site(self.lattice.n(), &refs)
    }

    /// Dense full-ring Hamiltonian at time `t`.
    pub fn dense_at(&self, t: f64) -> Result<DenseOperator> {
        let m = self.sparse_at(t)?.to_dense();
        DenseOperator::new(self.lattice.full(), m)
    }

    /// Serializable form.
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            n: self.lattice.n(),
            kind: self.kind,
            terms: self.terms.iter().map(|t| TermFile { pair: [t.x, t.y], coeffs: t.coeffs.to_vec() }).collect(),
            schedule: self.schedule.clone(),
        }
    }

    pub fn from_file(f: &ModelFile) -> Result<Self> {
        let lattice = RingLattice::new(f.n)?;
        let terms = f
            .terms
            .iter()
            .map(|t| {
                let c: [f64; 15] = t.coeffs.as_slice().try_into().map_err(|_| Error::Parse("term needs 15 coefficients".into()))?;
                Term::new(t.pair[0], t.pair[1], c)
            })
            .collect::<Result<Vec<_>>>()?;
        HamiltonianModel::new(lattice, f.kind, terms, f.schedule.clone())
    }
}

/// JSON layout of a model: pairs, 15 real Pauli coefficients per term, schedule grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub n: usize,
    pub kind: ModelKind,
    pub terms: Vec<TermFile>,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermFile {
    pub pair: [usize; 2],
    pub coeffs: Vec<f64>,
}

/// Reject rings beyond the dense-simulation cap.
pub fn check_cap(lattice: RingLattice) -> Result<()> {
    if lattice.n() > crate::lattice::MAX_SITES {
        return Err(Error::Resource(format!(
            "{} sites exceed the dense cap of {}",
            lattice.n(),
            crate::lattice::MAX_SITES
        )));
    }
    Ok(())
}

/// Terms coupling the left half `{1..2L}` to the right half with ring distance `≥ ell`.
pub fn split_far(h: &HamiltonianModel, ell: usize) -> Result<(HamiltonianModel, HamiltonianModel)> {
    if ell == 0 {
        return domain("ell must be positive");
    }
    let regions = h.lattice.regions()?;
    let n = h.lattice.n();
    Ok(h.partition(|t| {
        regions.left.contains(t.x) != regions.left.contains(t.y) && ring_distance(t.x, t.y, n) >= ell
    }))
}

/// The bond between sites `b` and `b+1 (mod n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond(pub usize);

impl Bond {
    /// Bond from an adjacent label pair `(a, a+1)`.
    pub fn between(lattice: RingLattice, a: i64, b: i64) -> Result<Bond> {
        let (sa, sb) = (lattice.site(a), lattice.site(b));
        if (sa + 1) % lattice.n() != sb {
            return domain(format!("({a},{b}) is not a bond (a, a+1)"));
        }
        Ok(Bond(sa))
    }

    /// Whether a pair at `(x, y)` couples across this bond along an arc shorter than `ell`.
    pub fn straddled_by(self, x: usize, y: usize, ell: usize, n: usize) -> bool {
        let crosses = |u: usize, w: usize| {
            let s = (w + n - u) % n;
            s > 0 && s < ell && (self.0 + n - u) % n < s
        };
        crosses(x, y) || crosses(y, x)
    }
}

/// Terms straddling `cut` with separation `< ell`, and the rest.
pub fn split_cut(h: &HamiltonianModel, cut: Bond, ell: usize) -> Result<(HamiltonianModel, HamiltonianModel)> {
    let n = h.lattice.n();
    if cut.0 >= n {
        return domain(format!("bond ({}, {}) outside ring", cut.0, cut.0 + 1));
    }
    Ok(h.partition(|t| cut.straddled_by(t.x, t.y, ell, n)))
}

/// `Σ_{r≥1} r^{-s}` truncated at 10⁶ plus the integral remainder bound.
fn zeta_upper(s: f64) -> f64 {
    const CUT: usize = 1_000_000;
    let head: f64 = (1..=CUT).rev().map(|r| (r as f64).powf(-s)).sum();
    head + (CUT as f64).powf(1.0 - s) / (s - 1.0)
}

/// Tail constant used by [`ell_rule`]: operator mode `2Σ_r r^{1-α}` (α > 2),
/// Frobenius mode `2(Σ_r r^{1-2α})^{1/2}` (α > 1).
pub fn tail_constant(alpha: f64, mode: NormMode) -> Result<f64> {
    match mode {
        NormMode::Operator if alpha > 2.0 => Ok(2.0 * zeta_upper(alpha - 1.0)),
        NormMode::Frobenius if alpha > 1.0 => Ok(2.0 * zeta_upper(2.0 * alpha - 1.0).sqrt()),
        _ => domain(format!("tail constant undefined for alpha = {alpha} in {mode:?} mode")),
    }
}

/// Cut-off distance `ℓ = ⌈(16 c_α T)^{1/(α-2)}⌉` (operator) or `⌈(16 c_α T)^{1/(α-1)}⌉` (Frobenius).
pub fn ell_rule(t: f64, alpha: f64, c_alpha: f64, mode: NormMode) -> Result<usize> {
    if !(t > 0.0) {
        return domain("ell_rule needs T > 0");
    }
    if !(c_alpha > 0.0) {
        return domain("c_alpha must be positive");
    }
    let p = match mode {
        NormMode::Operator if alpha > 2.0 => alpha - 2.0,
        NormMode::Frobenius if alpha > 1.0 => alpha - 1.0,
        _ => return domain(format!("alpha = {alpha} outside the range of {mode:?} mode")),
    };
    let x = (16.0 * c_alpha * t).powf(1.0 / p);
    // guard against 2.9999999999 from rounding in the power
    let r = x.round();
    let v = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
    Ok(v.max(1.0) as usize)
}

/// Operator mode `Σ‖H_xy‖`; Frobenius mode `(Σ‖H_xy‖_F²)^{1/2}`.
pub fn norm_tail(h_far: &HamiltonianModel, mode: NormMode) -> f64 {
    match mode {
        NormMode::Operator => h_far.terms.iter().map(Term::operator_norm).fold(0.0, |a, b| a + b),
        NormMode::Frobenius => h_far.terms.iter().map(|t| t.frobenius_norm().powi(2)).fold(0.0, |a, b| a + b).sqrt(),
    }
}

/// Two-site Pauli string of a term coefficient index (0..15), for reporting.
pub fn coeff_label(lattice: RingLattice, x: usize, y: usize, k: usize) -> PauliString {
    let l = letters_of_index(k + 1, 2);
    let mut p = PauliString::single(lattice, x as i64, l[0]);
    if l[1] != Pauli::I {
        p = p.mul(&PauliString::single(lattice, y as i64, l[1])).expect("same ring");
    }
    p
}

/// Sum of all terms as a dense full-ring operator at time `t`, zero if no terms.
pub fn assemble(h: &HamiltonianModel, t: f64) -> Result<DenseOperator> {
    if h.terms.is_empty() {
        return Ok(DenseOperator::zeros(h.lattice.full()));
    }
    h.dense_at(t)
}
