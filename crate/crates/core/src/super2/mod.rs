//! Operator space treated as a state space.
//!
//! Operators are vectors `|O)` with inner product `(O|O') = 2^{-k} tr(O†O')`; Pauli strings
//! form an orthonormal basis (enumeration order of [`enumerate_paulis`]). A unitary acts as the
//! superunitary `𝒰|O) = |U†OU)`. Superspace matrices are only ever formed for a few sites
//! (`4^k × 4^k`); larger objects are handled at the operator level.

pub mod spt;

use crate::error::{domain, Error, Result};
use crate::evolution::CircuitApprox;
use crate::lattice::{Region, RingLattice};
use crate::linalg::{c64, frobenius_norm, trace_norm, CMat, DenseOperator, I, ZERO};
use crate::pauli::{enumerate_paulis, pauli_decompose, pauli_inner, PauliString};
use crate::shift::build_shift;
use serde::{Serialize, Serializer};

/// Largest region whose superspace matrices are formed explicitly (256-dimensional).
pub const MAX_SUPER_SITES: usize = 4;

const CERT_TOL: f64 = 1e-9;

fn check_super_cap(k: usize) -> Result<()> {
    if k > MAX_SUPER_SITES {
        return Err(Error::Resource(format!("superspace on {k} sites (4^{k} dimensions); cap is {MAX_SUPER_SITES}")));
    }
    Ok(())
}

/// `𝒰|O) = |U†OU)`, on the union of both supports.
pub fn super_apply(u: &DenseOperator, o: &DenseOperator) -> Result<DenseOperator> {
    if u.support().lattice() != o.support().lattice() {
        return domain("super_apply: operands live on different rings");
    }
    let region = u.support().union(o.support());
    let ue = u.embed(&region)?;
    let oe = o.embed(&region)?;
    ue.adjoint().mul(&oe)?.mul(&ue)
}

/// Coordinates `(P|O)` in the Pauli basis of `O`'s support.
pub fn super_vector(o: &DenseOperator) -> Result<Vec<c64>> {
    Ok(pauli_decompose(o)?.into_iter().map(|(_, c)| c).collect())
}

/// Matrix elements `(P|𝒰|Q) = 2^{-k} tr(P U†QU)` on `U`'s support. Real for a unitary `U`,
/// since both strings are Hermitian.
pub fn super_matrix(u: &DenseOperator) -> Result<CMat> {
    let region = u.support();
    check_super_cap(region.len())?;
    let basis = enumerate_paulis(region)?;
    let mut m = CMat::zeros(basis.len(), basis.len());
    for (q, p) in basis.iter().enumerate() {
        let col = super_vector(&super_apply(u, &p.to_operator_on(region)?)?)?;
        for (row, v) in col.into_iter().enumerate() {
            m[(row, q)] = v;
        }
    }
    Ok(m)
}

/// `‖(𝒰 − 𝒰_sh)|O)‖_F = ‖U†OU − U_sh†OU_sh‖_F` for a full-ring `U` and `‖O‖ = 1`.
pub fn super_distance_on(u: &DenseOperator, o: &DenseOperator) -> Result<f64> {
    let lat = u.support().lattice();
    let full = lat.full();
    if u.support() != &full {
        return domain("super_distance_on: U must act on the whole ring");
    }
    let norm = o.operator_norm()?;
    if (norm - 1.0).abs() > CERT_TOL {
        return domain(format!("super_distance_on: O must have unit operator norm, got {norm}"));
    }
    let sh = build_shift(lat)?;
    let moved = super_apply(u, o)?;
    moved.sub(&sh.heisenberg(o)?)?.frobenius_norm()
}

/// A super-density-matrix: either explicit on at most four sites, or a product of
/// `|I)(I|` on a frozen block and `ℐ/4` (the normalized super-identity) on a mixed block.
#[derive(Debug, Clone)]
pub enum SuperState {
    Explicit { region: Region, matrix: CMat },
    Product { frozen: Region, mixed: Region },
}

impl SuperState {
    pub fn product(frozen: Region, mixed: Region) -> Result<Self> {
        if !frozen.intersection(&mixed).is_empty() {
            return domain("frozen and mixed blocks overlap");
        }
        Ok(SuperState::Product { frozen, mixed })
    }

    pub fn region(&self) -> Region {
        match self {
            SuperState::Explicit { region, .. } => region.clone(),
            SuperState::Product { frozen, mixed } => frozen.union(mixed),
        }
    }

    /// Super-trace (1 for a valid state).
    pub fn super_trace(&self) -> c64 {
        match self {
            SuperState::Explicit { matrix, .. } => (0..matrix.nrows()).map(|i| matrix[(i, i)]).sum(),
            SuperState::Product { .. } => c64::new(1.0, 0.0),
        }
    }

    /// Partial super-trace down to `keep` (product form only; factors are trace one).
    pub fn restricted(&self, keep: &Region) -> Result<Self> {
        match self {
            SuperState::Product { frozen, mixed } => SuperState::product(frozen.intersection(keep), mixed.intersection(keep)),
            SuperState::Explicit { .. } => domain("restriction of an explicit super-state is not supported"),
        }
    }

    /// Explicit `4^k × 4^k` matrix in the Pauli basis of [`SuperState::region`].
    pub fn to_explicit(&self) -> Result<CMat> {
        match self {
            SuperState::Explicit { matrix, .. } => Ok(matrix.clone()),
            SuperState::Product { frozen, mixed } => {
                let region = frozen.union(mixed);
                check_super_cap(region.len())?;
                let k = region.len();
                let dim = 1usize << (2 * k);
                // diagonal: weight 4^{-|mixed|} on strings that are I on every frozen site
                let frozen_digits: Vec<usize> = frozen.sites().iter().map(|&s| region.position(s).unwrap()).collect();
                let w = 0.25f64.powi(mixed.len() as i32);
                let mut m = CMat::zeros(dim, dim);
                for idx in 0..dim {
                    if frozen_digits.iter().all(|&j| (idx >> (2 * (k - 1 - j))) & 3 == 0) {
                        m[(idx, idx)] = c64::new(w, 0.0);
                    }
                }
                Ok(m)
            }
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> Result<bool> {
        Ok(crate::linalg::is_hermitian(self.to_explicit()?.as_ref(), tol))
    }
}

/// `⊗_{zero block} |I)(I| ⊗ ⊗_{identity block} ℐ/4`
pub fn initial_super_state(lattice: RingLattice) -> Result<SuperState> {
    let g = lattice.regions()?;
    SuperState::product(g.zero_block_i, g.identity_block_i)
}

/// `𝒰_sh ℛ_i 𝒰_sh†`: both blocks move one site forward, since `𝒰_sh|P_x) = |P_{x+1})`.
pub fn final_super_state(lattice: RingLattice) -> Result<SuperState> {
    let g = lattice.regions()?;
    SuperState::product(g.zero_block_i.shifted(1), g.identity_block_i.shifted(1))
}

/// Largest entrywise gap between the explicit product form and `4^{-m} Σ_P |P)(P|`
/// over strings `P` on the mixed block, assembled from operator-level Pauli coordinates.
pub fn product_expansion_gap(state: &SuperState) -> Result<f64> {
    let (frozen, mixed) = match state {
        SuperState::Product { frozen, mixed } => (frozen, mixed),
        SuperState::Explicit { .. } => return domain("expansion check needs a product-form state"),
    };
    let region = frozen.union(mixed);
    check_super_cap(region.len())?;
    let explicit = state.to_explicit()?;
    let dim = explicit.nrows();
    let w = 0.25f64.powi(mixed.len() as i32);
    let mut sum = CMat::zeros(dim, dim);
    for p in enumerate_paulis(mixed)? {
        let v = super_vector(&p.to_operator_on(&region)?)?;
        for j in 0..dim {
            if v[j] == ZERO {
                continue;
            }
            for i in 0..dim {
                sum[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    Ok((&sum - &explicit).norm_max())
}

fn as_text<S: Serializer>(p: &PauliString, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Operator-space certificate that a four-block circuit is far from the shift.
#[derive(Debug, Clone, Serialize)]
pub struct SuperLemmaCertificate {
    /// `‖𝒰_R ℛ_i^R 𝒰_R† − ℛ_f^R‖_1` on the right half: a lower bound on `‖𝒰̃ℛ_i𝒰̃† − ℛ_f‖_{1,F}`.
    pub halfchain_value: f64,
    #[serde(serialize_with = "as_text")]
    pub max_pauli: PauliString,
    /// `max_P ‖(𝒰̃ − 𝒰_sh)|P)‖_F` over strings on the identity block.
    pub max_value: f64,
    /// Average of the same quantity; the triangle-inequality chain needs `halfchain ≤ 2·mean`.
    pub mean_value: f64,
    pub scanned: usize,
}

impl SuperLemmaCertificate {
    pub fn passes(&self) -> bool {
        self.halfchain_value >= 0.5 - CERT_TOL
            && self.max_value >= 0.25 - CERT_TOL
            && self.max_value <= 2.0 + CERT_TOL
            && self.halfchain_value <= 2.0 * self.mean_value + CERT_TOL
    }
}

/// `‖PŨ − ŨP'‖_F` with `P' = U_sh†PU_sh`, which equals `‖(𝒰̃ − 𝒰_sh)|P)‖_F`.
fn pauli_gap(u: &CMat, p: &PauliString, n: usize) -> f64 {
    let (f1, ph1) = p.signed_permutation();
    let (f2, ph2) = p.translated(1).signed_permutation();
    let dim = 1usize << n;
    let mut s = 0.0;
    // (PŨ)[b⊕f1, j] = ph1[b] Ũ[b, j];  (ŨP')[i, j] = ph2[j] Ũ[i, j⊕f2]
    for j in 0..dim {
        let jj = j ^ f2;
        for b in 0..dim {
            let i = b ^ f1;
            s += (ph1[b] * u[(b, j)] - ph2[j] * u[(i, jj)]).norm_sqr();
        }
    }
    (s / dim as f64).sqrt()
}

/// Half-chain super-trace-norm witness and exhaustive Pauli scan for a circuit on `L = 2`.
///
/// `𝒰̃ = 𝒰_{LR} ∘ 𝒰_{I0}`; the first layer leaves `ℛ_i` invariant, `𝒰_L` drops out under the
/// partial super-trace over the left half, and what remains is a 256-dimensional comparison on
/// the right half, where `ℛ_f` holds one more `ℐ/4` factor than `ℛ_i`.
pub fn super_lemma_certificate(ca: &CircuitApprox) -> Result<SuperLemmaCertificate> {
    let lat = ca.lattice();
    let g = lat.regions()?;
    check_super_cap(g.right.len())?;
    let rho_i = initial_super_state(lat)?.restricted(&g.right)?.to_explicit()?;
    let rho_f = final_super_state(lat)?.restricted(&g.right)?.to_explicit()?;
    let s = super_matrix(&ca.u_r)?;
    let pulled = s.adjoint() * &rho_f * &s;
    let halfchain_value = trace_norm((&rho_i - &pulled).as_ref())?;

    let strings = enumerate_paulis(&g.identity_block_i)?;
    let u = ca.assembled().matrix();
    let n = lat.n();
    let workers = std::thread::available_parallelism().map(|w| w.get()).unwrap_or(1).min(strings.len());
    let chunk = strings.len().div_ceil(workers);
    let values: Vec<f64> = std::thread::scope(|scope| {
        let handles: Vec<_> = strings.chunks(chunk).map(|part| scope.spawn(move || part.iter().map(|p| pauli_gap(u, p, n)).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("scan worker panicked")).collect()
    });
    // first maximizer in enumeration order
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok(SuperLemmaCertificate {
        halfchain_value,
        max_pauli: strings[best].clone(),
        max_value: values[best],
        mean_value: values.iter().sum::<f64>() / values.len() as f64,
        scanned: values.len(),
    })
}

/// `‖i[H_S, I_S ⊗ A_{S^c}]‖_F` for disjoint supports; zero up to rounding.
pub fn liouvillian_identity_check(h_term: &DenseOperator, a: &DenseOperator) -> Result<f64> {
    if !h_term.support().intersection(a.support()).is_empty() {
        return domain("liouvillian_identity_check: supports overlap");
    }
    if !h_term.is_hermitian(1e-12) {
        return domain("liouvillian_identity_check: H_term must be Hermitian");
    }
    let region = h_term.support().union(a.support());
    let c = h_term.embed(&region)?.commutator(&a.embed(&region)?)?.scale(I);
    frobenius_norm(c.matrix().as_ref())
}

/// `|Im (O1|i[H, O2])|`, which vanishes for Hermitian inputs.
pub fn liouvillian_reality_check(h: &DenseOperator, o1: &DenseOperator, o2: &DenseOperator) -> Result<f64> {
    for (name, op) in [("H", h), ("O1", o1), ("O2", o2)] {
        if !op.is_hermitian(1e-12) {
            return domain(format!("liouvillian_reality_check: {name} is not Hermitian"));
        }
    }
    let region = h.support().union(o1.support()).union(o2.support());
    let lo2 = h.embed(&region)?.commutator(&o2.embed(&region)?)?.scale(I);
    Ok(pauli_inner(&o1.embed(&region)?, &lo2)?.im.abs())
}
