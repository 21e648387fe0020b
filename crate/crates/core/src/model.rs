//! Operators of the two-atom / single-mode system and its thermal Liouvillian.
//!
//! The composite space is ordered `atom1 ⊗ atom2 ⊗ cavity`. Each atom uses
//! `|g⟩ = 0`, `|e⟩ = 1`; the cavity uses Fock states `|0⟩ … |cutoff⟩`. The
//! basis state `|a1 a2 n⟩` therefore sits at index `(2·a1 + a2)(cutoff + 1) + n`.
//!
//! Dynamics run in the interaction picture on resonance, so the coherent part
//! is `H = g Σ_i (a† σ_i⁻ + σ_i⁺ a)` and the bare frequencies are metadata.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{vectorize, devectorize, ComplexMatrix, DensityMatrix, LinalgError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidParams(Vec<ParamViolation>),
    #[error("cavity cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("atom index must be 1 or 2, got {0}")]
    InvalidAtomIndex(usize),
    #[error("expected a 2x2 single-atom operator, got {0}x{1}")]
    NotSingleAtom(usize, usize),
    #[error("state dimension {got} does not match the model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One violated parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Physical parameters in units of the coupling `g`.
///
/// `gamma` and `kappa` are the coefficients that multiply the atomic and
/// cavity dissipators exactly as they appear in the master equation (the
/// sandwich terms carry a factor 2, so the population decay rates are `2γ`
/// and `2κ`). `n_t` and `m_t` are the effective photon numbers of the noise
/// driving the atoms and the cavity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub g: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub n_t: f64,
    pub m_t: f64,
    pub cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
}

pub const DEFAULT_CUTOFF: usize = 5;

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            gamma: 0.0,
            kappa: 0.0,
            n_t: 0.0,
            m_t: 0.0,
            cutoff: DEFAULT_CUTOFF,
            omega_a: None,
            omega_c: None,
        }
    }
}

impl ModelParams {
    pub fn new(gamma: f64, kappa: f64, n_t: f64, m_t: f64) -> Self {
        Self {
            gamma,
            kappa,
            n_t,
            m_t,
            ..Self::default()
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        let mut check = |field: &'static str, ok: bool, message: String| {
            if !ok {
                out.push(ParamViolation { field, message });
            }
        };
        // g = 0 is admitted so the atoms and the cavity can be decoupled.
        check("g", self.g.is_finite() && self.g >= 0.0, format!("must be >= 0, got {}", self.g));
        for (field, value) in [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("n_t", self.n_t),
            ("m_t", self.m_t),
        ] {
            check(field, value.is_finite() && value >= 0.0, format!("must be >= 0, got {value}"));
        }
        check("cutoff", self.cutoff >= 1, format!("must be >= 1, got {}", self.cutoff));
        for (field, value) in [("omega_a", self.omega_a), ("omega_c", self.omega_c)] {
            if let Some(w) = value {
                check(field, w.is_finite(), format!("must be finite, got {w}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(v))
        }
    }

    /// Hilbert-space dimension `4 (cutoff + 1)`.
    pub fn dim(&self) -> usize {
        hilbert_dim(self.cutoff)
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![2, 2, self.cutoff + 1]
    }

    /// Effective atomic relaxation rate `2γ(2n_T + 1)`.
    pub fn gamma_eff(&self) -> f64 {
        2.0 * self.gamma * (2.0 * self.n_t + 1.0)
    }

    /// Effective cavity relaxation rate `2κ(2m_T + 1)`.
    pub fn kappa_eff(&self) -> f64 {
        2.0 * self.kappa * (2.0 * self.m_t + 1.0)
    }
}

pub fn hilbert_dim(cutoff: usize) -> usize {
    4 * (cutoff + 1)
}

/// Index of `|a1 a2 n⟩` (`a = 0` ground, `1` excited).
pub fn basis_index(atom1: usize, atom2: usize, photons: usize, cutoff: usize) -> usize {
    debug_assert!(atom1 < 2 && atom2 < 2 && photons <= cutoff);
    (2 * atom1 + atom2) * (cutoff + 1) + photons
}

/// Inverse of [`basis_index`].
pub fn basis_labels(index: usize, cutoff: usize) -> (usize, usize, usize) {
    let atoms = index / (cutoff + 1);
    (atoms / 2, atoms % 2, index % (cutoff + 1))
}

/// Atomic lowering operator `σ⁻ = |g⟩⟨e|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).expect("static 2x2")
}

/// Truncated cavity annihilation operator on `|0⟩ … |cutoff⟩`.
pub fn annihilation(cutoff: usize) -> Result<ComplexMatrix, ModelError> {
    if cutoff < 1 {
        return Err(ModelError::InvalidCutoff(cutoff));
    }
    let d = cutoff + 1;
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Lifts a single-atom operator onto the composite space.
pub fn embed_atom_op(
    op: &ComplexMatrix,
    atom_index: usize,
    cutoff: usize,
) -> Result<ComplexMatrix, ModelError> {
    if op.shape() != (2, 2) {
        return Err(ModelError::NotSingleAtom(op.rows(), op.cols()));
    }
    if cutoff < 1 {
        return Err(ModelError::InvalidCutoff(cutoff));
    }
    let id2 = ComplexMatrix::identity(2);
    let idc = ComplexMatrix::identity(cutoff + 1);
    match atom_index {
        1 => Ok(op.kron(&id2).kron(&idc)),
        2 => Ok(id2.kron(op).kron(&idc)),
        other => Err(ModelError::InvalidAtomIndex(other)),
    }
}

/// Lifts a cavity operator onto the composite space.
pub fn embed_cavity_op(op: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::identity(4).kron(op)
}

/// The three jump operators on the composite space.
#[derive(Clone, Debug)]
pub struct SystemOperators {
    pub cutoff: usize,
    pub sigma1: ComplexMatrix,
    pub sigma2: ComplexMatrix,
    pub a: ComplexMatrix,
}

impl SystemOperators {
    pub fn new(cutoff: usize) -> Result<Self, ModelError> {
        let sm = sigma_minus();
        Ok(Self {
            cutoff,
            sigma1: embed_atom_op(&sm, 1, cutoff)?,
            sigma2: embed_atom_op(&sm, 2, cutoff)?,
            a: embed_cavity_op(&annihilation(cutoff)?),
        })
    }

    pub fn dim(&self) -> usize {
        hilbert_dim(self.cutoff)
    }

    /// `N = σ₁⁺σ₁⁻ + σ₂⁺σ₂⁻ + a†a`.
    pub fn excitation_number(&self) -> ComplexMatrix {
        ComplexMatrix::diag(
            &excitation_numbers(self.cutoff)
                .into_iter()
                .map(|n| C64::new(n as f64, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    pub fn photon_number(&self) -> ComplexMatrix {
        &self.a.dagger() * &self.a
    }

    /// `σ_i⁺σ_i⁻` for atom 1 or 2.
    pub fn excited_projector(&self, atom_index: usize) -> Result<ComplexMatrix, ModelError> {
        let s = match atom_index {
            1 => &self.sigma1,
            2 => &self.sigma2,
            other => return Err(ModelError::InvalidAtomIndex(other)),
        };
        Ok(&s.dagger() * s)
    }
}

/// Total excitation number of every basis state.
pub fn excitation_numbers(cutoff: usize) -> Vec<usize> {
    (0..hilbert_dim(cutoff))
        .map(|k| {
            let (a1, a2, n) = basis_labels(k, cutoff);
            a1 + a2 + n
        })
        .collect()
}

/// Permutation matrix exchanging the two atoms.
pub fn atom_swap(cutoff: usize) -> ComplexMatrix {
    let d = hilbert_dim(cutoff);
    ComplexMatrix::from_fn(d, d, |i, j| {
        let (a1, a2, n) = basis_labels(j, cutoff);
        if i == basis_index(a2, a1, n, cutoff) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Resonant interaction-picture Hamiltonian `g Σ_i (a† σ_i⁻ + σ_i⁺ a)`.
pub fn hamiltonian(params: &ModelParams) -> Result<ComplexMatrix, ModelError> {
    params.validate()?;
    let ops = SystemOperators::new(params.cutoff)?;
    Ok(hamiltonian_from(&ops, params.g))
}

fn hamiltonian_from(ops: &SystemOperators, g: f64) -> ComplexMatrix {
    let a_dag = ops.a.dagger();
    let mut h = ComplexMatrix::zeros(ops.dim(), ops.dim());
    for s in [&ops.sigma1, &ops.sigma2] {
        let down = &a_dag * s;
        h += &down;
        h += &down.dagger();
    }
    h.scale(C64::new(g, 0.0))
}

/// Linear map on `D × D` matrices represented by its `D² × D²` matrix in the
/// column-stacking convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self, ModelError> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(ModelError::DimensionMismatch {
                expected: dim * dim,
                got: matrix.rows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `devectorize(L · vectorize(ρ))`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, ModelError> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                got: rho.rows(),
            });
        }
        Ok(devectorize(&self.matrix.matvec(&vectorize(rho)))?)
    }
}

#[derive(Clone, Debug)]
struct SparseEntries {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseEntries {
    fn of(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m[(i, j)];
                if z != C64::new(0.0, 0.0) {
                    entries.push((i, j, z));
                }
            }
        }
        Self { entries }
    }
}

/// `ρ ↦ Σ_k c_k · L_k ρ R_k`, kept in operator form so that the full
/// superoperator or any coherence sector of it can be assembled on demand.
#[derive(Clone, Debug)]
pub struct SandwichSum {
    dim: usize,
    terms: Vec<(C64, SparseEntries, SparseEntries)>,
}

impl SandwichSum {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    fn push(&mut self, coefficient: f64, left: &ComplexMatrix, right: &ComplexMatrix) {
        self.push_complex(C64::new(coefficient, 0.0), left, right);
    }

    fn push_complex(&mut self, coefficient: C64, left: &ComplexMatrix, right: &ComplexMatrix) {
        if coefficient == C64::new(0.0, 0.0) {
            return;
        }
        self.terms
            .push((coefficient, SparseEntries::of(left), SparseEntries::of(right)));
    }

    /// `Lindblad-form dissipator c · (2 J ρ J† − J†J ρ − ρ J†J)`.
    fn push_dissipator(&mut self, rate: f64, jump: &ComplexMatrix) {
        let jump_dag = jump.dagger();
        let number = &jump_dag * jump;
        let id = ComplexMatrix::identity(self.dim);
        self.push(2.0 * rate, jump, &jump_dag);
        self.push(-rate, &number, &id);
        self.push(-rate, &id, &number);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Calls `f(row, col, value)` for every contribution to the vectorized matrix.
    fn for_each_entry(&self, mut f: impl FnMut(usize, usize, C64)) {
        let d = self.dim;
        // vec(L ρ R)[i + jD] = Σ L[i,k] R[l,j] vec(ρ)[k + lD]
        for (c, left, right) in &self.terms {
            for &(i, k, lv) in &left.entries {
                for &(l, j, rv) in &right.entries {
                    f(i + j * d, k + l * d, c * lv * rv);
                }
            }
        }
    }

    pub fn superoperator(&self) -> Superoperator {
        let n = self.dim * self.dim;
        let mut m = ComplexMatrix::zeros(n, n);
        self.for_each_entry(|r, c, z| m[(r, c)] += z);
        Superoperator {
            dim: self.dim,
            matrix: m,
        }
    }

    /// Restriction to the vectorized indices of one coherence sector.
    pub fn sector_block(&self, sector: &Sector) -> ComplexMatrix {
        let mut position = vec![usize::MAX; self.dim * self.dim];
        for (p, &v) in sector.indices.iter().enumerate() {
            position[v] = p;
        }
        let n = sector.indices.len();
        let mut m = ComplexMatrix::zeros(n, n);
        self.for_each_entry(|r, c, z| {
            let (pr, pc) = (position[r], position[c]);
            if pr != usize::MAX && pc != usize::MAX {
                m[(pr, pc)] += z;
            }
        });
        m
    }

    /// Largest entry coupling `sector` to vectorized indices outside it.
    pub fn sector_leakage(&self, sector: &Sector) -> f64 {
        let mut inside = vec![false; self.dim * self.dim];
        for &v in &sector.indices {
            inside[v] = true;
        }
        let mut worst: f64 = 0.0;
        self.for_each_entry(|r, c, z| {
            if inside[r] != inside[c] {
                worst = worst.max(z.norm());
            }
        });
        worst
    }
}

/// Set of vectorized indices `(i, j)` with `N_i − N_j = order`, where `N` is
/// the total excitation number. Every term of the generator maps a sector
/// into itself.
#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub order: i64,
    pub indices: Vec<usize>,
}

/// All coherence sectors of the column-stacked space, ordered by `order`.
pub fn coherence_sectors(cutoff: usize) -> Vec<Sector> {
    let n = excitation_numbers(cutoff);
    let d = n.len();
    let max = *n.iter().max().expect("non-empty") as i64;
    (-max..=max)
        .map(|order| Sector {
            order,
            indices: (0..d * d)
                .filter(|&v| n[v % d] as i64 - n[v / d] as i64 == order)
                .collect(),
        })
        .collect()
}

/// The generator split into its coherent part and the four thermal channels.
#[derive(Clone, Debug)]
pub struct LiouvillianTerms {
    pub dim: usize,
    /// `−i[H, ρ]`.
    pub coherent: SandwichSum,
    /// `(n_T + 1)γ Σ_i D[σ_i⁻]`.
    pub atom_emission: SandwichSum,
    /// `n_T γ Σ_i D[σ_i⁺]`.
    pub atom_absorption: SandwichSum,
    /// `(m_T + 1)κ D[a]`.
    pub cavity_emission: SandwichSum,
    /// `m_T κ D[a†]`.
    pub cavity_absorption: SandwichSum,
}

impl LiouvillianTerms {
    pub fn new(params: &ModelParams) -> Result<Self, ModelError> {
        params.validate()?;
        let ops = SystemOperators::new(params.cutoff)?;
        let d = ops.dim();
        let id = ComplexMatrix::identity(d);
        let h = hamiltonian_from(&ops, params.g);

        let mut coherent = SandwichSum::new(d);
        coherent.push_complex(C64::new(0.0, -1.0), &h, &id);
        coherent.push_complex(C64::new(0.0, 1.0), &id, &h);

        let mut atom_emission = SandwichSum::new(d);
        let mut atom_absorption = SandwichSum::new(d);
        for s in [&ops.sigma1, &ops.sigma2] {
            atom_emission.push_dissipator((params.n_t + 1.0) * params.gamma, s);
            atom_absorption.push_dissipator(params.n_t * params.gamma, &s.dagger());
        }
        let mut cavity_emission = SandwichSum::new(d);
        cavity_emission.push_dissipator((params.m_t + 1.0) * params.kappa, &ops.a);
        let mut cavity_absorption = SandwichSum::new(d);
        cavity_absorption.push_dissipator(params.m_t * params.kappa, &ops.a.dagger());

        Ok(Self {
            dim: d,
            coherent,
            atom_emission,
            atom_absorption,
            cavity_emission,
            cavity_absorption,
        })
    }

    pub fn parts(&self) -> [&SandwichSum; 5] {
        [
            &self.coherent,
            &self.atom_emission,
            &self.atom_absorption,
            &self.cavity_emission,
            &self.cavity_absorption,
        ]
    }

    /// Full `D² × D²` generator.
    pub fn superoperator(&self) -> Superoperator {
        let n = self.dim * self.dim;
        let mut m = ComplexMatrix::zeros(n, n);
        for part in self.parts() {
            part.for_each_entry(|r, c, z| m[(r, c)] += z);
        }
        Superoperator {
            dim: self.dim,
            matrix: m,
        }
    }

    pub fn sector_block(&self, sector: &Sector) -> ComplexMatrix {
        let mut block = self.coherent.sector_block(sector);
        for part in &self.parts()[1..] {
            block += &part.sector_block(sector);
        }
        block
    }

    pub fn sector_leakage(&self, sector: &Sector) -> f64 {
        self.parts()
            .iter()
            .map(|p| p.sector_leakage(sector))
            .fold(0.0, f64::max)
    }
}

/// Full Liouvillian superoperator `ρ ↦ −i[H, ρ] + 𝓛(ρ)`.
pub fn liouvillian(params: &ModelParams) -> Result<Superoperator, ModelError> {
    Ok(LiouvillianTerms::new(params)?.superoperator())
}

fn dissipator(jump: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let jump_dag = jump.dagger();
    let number = &jump_dag * jump;
    let sandwich = &(jump * rho) * &jump_dag;
    &(&sandwich * 2.0) - &(&(&number * rho) + &(rho * &number))
}

/// `−i[H, ρ] + 𝓛(ρ)` evaluated by direct matrix products.
pub fn apply_generator(
    params: &ModelParams,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix, ModelError> {
    params.validate()?;
    if rho.shape() != (params.dim(), params.dim()) {
        return Err(ModelError::DimensionMismatch {
            expected: params.dim(),
            got: rho.rows(),
        });
    }
    let ops = SystemOperators::new(params.cutoff)?;
    let h = hamiltonian_from(&ops, params.g);
    let mut out = h.commutator(rho)?.scale(C64::new(0.0, -1.0));
    let (n_t, m_t) = (params.n_t, params.m_t);
    for s in [&ops.sigma1, &ops.sigma2] {
        out += &(&dissipator(s, rho) * ((n_t + 1.0) * params.gamma));
        out += &(&dissipator(&s.dagger(), rho) * (n_t * params.gamma));
    }
    out += &(&dissipator(&ops.a, rho) * ((m_t + 1.0) * params.kappa));
    out += &(&dissipator(&ops.a.dagger(), rho) * (m_t * params.kappa));
    Ok(out)
}

/// [`apply_generator`] for a validated state.
pub fn apply_generator_to_state(
    params: &ModelParams,
    rho: &DensityMatrix,
) -> Result<ComplexMatrix, ModelError> {
    apply_generator(params, rho.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::testutil::random_density;
    use crate::qmath::{expm, herm_eig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const Z: C64 = C64::new(0.0, 0.0);

    fn ket(cutoff: usize, a1: usize, a2: usize, n: usize) -> Vec<C64> {
        let mut v = vec![Z; hilbert_dim(cutoff)];
        v[basis_index(a1, a2, n, cutoff)] = C64::new(1.0, 0.0);
        v
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn fig2() -> ModelParams {
        ModelParams::new(0.1, 1.5, 0.7, 0.0)
    }

    #[test]
    fn params_collect_every_violation() {
        let p = ModelParams {
            g: -1.0,
            gamma: -1.0,
            n_t: f64::NAN,
            cutoff: 0,
            ..ModelParams::default()
        };
        let fields: Vec<_> = p.violations().iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["g", "gamma", "n_t", "cutoff"]);
        assert!(ModelParams::default().validate().is_ok());
    }

    #[test]
    fn annihilation_examples() {
        assert_eq!(
            annihilation(1).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()
        );
        let a = annihilation(5).unwrap();
        let number = &a.dagger() * &a;
        let want = ComplexMatrix::diag(&(0..6).map(|n| C64::new(n as f64, 0.0)).collect::<Vec<_>>());
        assert!(number.max_abs_diff(&want) < 1e-14);
        let comm = a.commutator(&a.dagger()).unwrap();
        let mut want = ComplexMatrix::identity(6);
        want[(5, 5)] = C64::new(-5.0, 0.0);
        assert!(comm.max_abs_diff(&want) < 1e-14);
        assert_eq!(annihilation(0), Err(ModelError::InvalidCutoff(0)));
    }

    #[test]
    fn embed_atom_op_examples() {
        let c = 5;
        let s1 = embed_atom_op(&sigma_minus(), 1, c).unwrap();
        let s2 = embed_atom_op(&sigma_minus(), 2, c).unwrap();
        assert_eq!(s1.rows(), 24);
        assert_eq!(s1.matvec(&ket(c, 1, 0, 0)), ket(c, 0, 0, 0));
        assert!(s2.matvec(&ket(c, 0, 0, 0)).iter().all(|z| *z == Z));
        assert_eq!(s1.commutator(&s2).unwrap().max_abs(), 0.0);
        assert_eq!(embed_atom_op(&sigma_minus(), 3, c), Err(ModelError::InvalidAtomIndex(3)));
        assert!(matches!(
            embed_atom_op(&ComplexMatrix::identity(3), 1, c),
            Err(ModelError::NotSingleAtom(3, 3))
        ));
    }

    #[test]
    fn hamiltonian_examples() {
        let p = ModelParams::default().with_coupling(0.7);
        let c = p.cutoff;
        let h = hamiltonian(&p).unwrap();
        assert_eq!(h.hermitian_asymmetry(), 0.0);
        assert!(h.matvec(&ket(c, 0, 0, 0)).iter().all(|z| *z == Z));
        let out = h.matvec(&ket(c, 0, 0, 1));
        let want: Vec<C64> = ket(c, 1, 0, 0)
            .iter()
            .zip(ket(c, 0, 1, 0))
            .map(|(x, y)| (x + y) * 0.7)
            .collect();
        assert!(max_diff(&out, &want) < 1e-15);
        let i_eg0 = basis_index(1, 0, 0, c);
        let i_ee0 = basis_index(1, 1, 0, c);
        let i_gg1 = basis_index(0, 0, 1, c);
        assert!((h[(i_eg0, i_gg1)] - C64::new(0.7, 0.0)).norm() < 1e-15);
        assert_eq!(h[(i_ee0, i_gg1)], Z);
    }

    #[test]
    fn hamiltonian_conserves_excitations() {
        let ops = SystemOperators::new(5).unwrap();
        let h = hamiltonian(&fig2()).unwrap();
        assert!(h.commutator(&ops.excitation_number()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn atom_exchange_symmetry() {
        let p = ModelParams::new(0.3, 0.8, 0.4, 1.1).with_cutoff(3);
        let swap = atom_swap(p.cutoff);
        let h = hamiltonian(&p).unwrap();
        assert!((&(&swap * &h) * &swap).max_abs_diff(&h) < 1e-12);
        // Conjugation by a permutation lifts to swap^T ⊗ swap on vec(ρ).
        let lifted = swap.transpose().kron(&swap);
        let l = liouvillian(&p).unwrap();
        let conj = &(&lifted * l.matrix()) * &lifted.transpose();
        assert!(conj.max_abs_diff(l.matrix()) < 1e-12);
    }

    #[test]
    fn vacuum_is_stationary_without_noise() {
        let p = ModelParams::new(0.1, 1.5, 0.0, 0.0);
        let vac = ComplexMatrix::outer(&ket(5, 0, 0, 0), &ket(5, 0, 0, 0));
        let l = liouvillian(&p).unwrap();
        assert!(l.apply(&vac).unwrap().max_abs() < 1e-12);
        assert!(apply_generator(&p, &vac).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let p = ModelParams::new(0.2, 0.6, 0.9, 1.3).with_cutoff(3);
        let l = liouvillian(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let rho = random_density(&mut rng, &p.dims());
            let out = l.apply(rho.matrix()).unwrap();
            assert!(out.trace().norm() < 1e-10);
            assert!(out.hermitian_asymmetry() < 1e-10);
        }
    }

    #[test]
    fn superoperator_and_direct_paths_agree() {
        let p = ModelParams::new(0.15, 1.1, 0.7, 0.4);
        let l = liouvillian(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let rho = random_density(&mut rng, &p.dims());
            let via_super = l.apply(rho.matrix()).unwrap();
            let direct = apply_generator_to_state(&p, &rho).unwrap();
            assert!(via_super.max_abs_diff(&direct) < 1e-12);
            assert!(direct.trace().norm() < 1e-12);
        }
        let wrong = ComplexMatrix::identity(8);
        assert!(matches!(
            apply_generator(&p, &wrong),
            Err(ModelError::DimensionMismatch { expected: 24, got: 8 })
        ));
    }

    #[test]
    fn zero_noise_leaves_pumping_channels_empty() {
        let terms = LiouvillianTerms::new(&ModelParams::new(0.3, 0.5, 0.0, 0.0)).unwrap();
        assert!(terms.atom_absorption.is_zero());
        assert!(terms.cavity_absorption.is_zero());
        assert_eq!(terms.atom_absorption.superoperator().matrix().max_abs(), 0.0);
        assert!(!terms.atom_emission.is_zero() && !terms.cavity_emission.is_zero());
    }

    /// Thermal-cavity oracle: detailed balance between `n` and `n+1`
    /// (`(m+1) p_{n+1} = m p_n`) fixes a geometric distribution with mean `m`
    /// (up to truncation), so the null state of the decoupled cavity has
    /// `⟨a†a⟩ ≈ m_T`.
    #[test]
    fn decoupled_thermal_cavity_null_state() {
        // Atoms need their own dissipation, or their state is not fixed.
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.5).with_coupling(0.0).with_cutoff(15);
        let terms = LiouvillianTerms::new(&p).unwrap();
        let zero_order = coherence_sectors(p.cutoff).into_iter().find(|s| s.order == 0).unwrap();
        let block = terms.sector_block(&zero_order);
        let svd = crate::qmath::svd_ascending(&block, true).unwrap();
        assert!(svd.values[0] < 1e-12 && svd.values[1] > 1e-6);
        let v = svd.right_vectors.unwrap();
        let d = p.dim();
        let mut full = vec![Z; d * d];
        for (k, &idx) in zero_order.indices.iter().enumerate() {
            full[idx] = v[(k, 0)];
        }
        let rho = devectorize(&full).unwrap();
        let rho = rho.scale(C64::new(1.0, 0.0) / rho.trace());
        let ops = SystemOperators::new(p.cutoff).unwrap();
        let photons = (&rho * &ops.photon_number()).trace().re;
        assert!((photons - 0.5).abs() < 1e-4, "⟨a†a⟩ = {photons}");
    }

    #[test]
    fn sector_blocks_are_exact_restrictions() {
        let p = ModelParams::new(0.2, 0.9, 0.6, 0.8).with_cutoff(2);
        let terms = LiouvillianTerms::new(&p).unwrap();
        let full = terms.superoperator();
        let sectors = coherence_sectors(p.cutoff);
        assert_eq!(sectors.iter().map(|s| s.indices.len()).sum::<usize>(), p.dim() * p.dim());
        for s in &sectors {
            assert_eq!(terms.sector_leakage(s), 0.0, "sector {}", s.order);
            let block = terms.sector_block(s);
            for (r, &vr) in s.indices.iter().enumerate() {
                for (c, &vc) in s.indices.iter().enumerate() {
                    assert!((block[(r, c)] - full.matrix()[(vr, vc)]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn unitary_limit_preserves_spectrum() {
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0).with_cutoff(2);
        let l = liouvillian(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let rho = random_density(&mut rng, &p.dims());
        let prop = expm(&l.matrix().scale(C64::new(10.0, 0.0))).unwrap();
        let evolved = devectorize(&prop.matvec(&vectorize(rho.matrix()))).unwrap();
        let before = herm_eig(rho.matrix()).unwrap().values;
        let after = herm_eig(&evolved.hermitian_part()).unwrap().values;
        assert!(max_diff(
            &before.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
            &after.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()
        ) < 1e-9);
    }
}
