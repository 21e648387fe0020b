//! Correlation measures on the two-atom state.
//!
//! Entropies are in bits. Two-qubit states use the basis `|a b⟩` at index
//! `2a + b` with `|g⟩ = 0`, `|e⟩ = 1`; the local measurement defining the
//! classical correlation acts on the second qubit.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

use crate::qmath::{herm_eig, ComplexMatrix, DensityMatrix, LinalgError, C64};
use crate::simplex;

/// Resolution of the coarse `(θ, φ)` grid that seeds the simplex.
pub const COARSE_GRID: usize = 48;
/// Simplex diameter (radians) at which refinement stops.
pub const SIMPLEX_TOL: f64 = 1e-6;
/// Safety cap on refinement evaluations.
pub const SIMPLEX_MAX_EVALS: usize = 5_000;
/// Eigenvalues this close to 0 or 1 are clipped onto the boundary.
pub const EIGEN_CLIP_TOL: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVE_EIGEN_TOL` mean the input is not a state.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-8;
/// Outcomes rarer than this contribute no conditional entropy.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error("expected a two-qubit state with dims [2, 2], got {0:?}")]
    NotTwoQubit(Vec<usize>),
    #[error("expected a composite state with dims [2, 2, n], got {0:?}")]
    NotAtomsAndCavity(Vec<usize>),
    #[error("eigenvalue {0:e} below -{NEGATIVE_EIGEN_TOL:e}: not a density matrix")]
    NotAState(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T, E = CorrelationError> = std::result::Result<T, E>;

/// Projective measurement `{|ψ₁⟩⟨ψ₁|, |ψ₂⟩⟨ψ₂|}` with
/// `|ψ₁⟩ = cos θ |g⟩ + e^{iφ} sin θ |e⟩` and
/// `|ψ₂⟩ = e^{−iφ} sin θ |g⟩ − cos θ |e⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    /// Angles are wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: theta.rem_euclid(TAU),
            phi: phi.rem_euclid(TAU),
        }
    }

    pub fn kets(&self) -> [[C64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let phase = C64::from_polar(1.0, self.phi);
        [
            [C64::new(c, 0.0), phase * s],
            [phase.conj() * s, C64::new(-c, 0.0)],
        ]
    }

    pub fn projectors(&self) -> [ComplexMatrix; 2] {
        self.kets().map(|k| ComplexMatrix::outer(&k, &k))
    }
}

/// Correlations of one two-qubit state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub discord: f64,
    pub concurrence: f64,
    pub optimal_basis: MeasurementBasis,
    pub optimizer_evaluations: usize,
}

fn h(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// `−Σ λ log₂ λ` with the clipping rules for numerically negative eigenvalues.
fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &v in values {
        if v < -NEGATIVE_EIGEN_TOL {
            return Err(CorrelationError::NotAState(v));
        }
        // Anything left below zero is numerical noise and contributes nothing.
        let v = if v < EIGEN_CLIP_TOL {
            0.0
        } else if v > 1.0 - EIGEN_CLIP_TOL {
            1.0
        } else {
            v
        };
        s += h(v);
    }
    Ok(s)
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_spectrum(&herm_eig(rho.matrix())?.values)
}

/// Entropy of a unit-trace 2×2 Hermitian matrix `[[a, b], [b*, d]]`.
fn qubit_entropy(a: f64, d: f64, b: C64) -> f64 {
    let half_gap = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    let mean = 0.5 * (a + d);
    h((mean + half_gap).min(1.0)) + h((mean - half_gap).max(0.0))
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(CorrelationError::NotTwoQubit(rho.dims().to_vec()));
    }
    Ok(())
}

/// `S(ρᵃ) + S(ρᵇ) − S(ρᵃᵇ)`.
pub fn mutual_information(rho_ab: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho_ab)?;
    let sa = entropy(&rho_ab.partial_trace(&[0])?)?;
    let sb = entropy(&rho_ab.partial_trace(&[1])?)?;
    Ok(sa + sb - entropy(rho_ab)?)
}

/// `Σ_k p_k S(ρ_k)` for the measurement on the second qubit, without input checks.
fn conditional_entropy_raw(m: &ComplexMatrix, basis: MeasurementBasis) -> f64 {
    let mut total = 0.0;
    for psi in basis.kets() {
        // σ[a, a'] = Σ_{b, b'} ψ*_b ρ[(a b), (a' b')] ψ_{b'}
        let block = |a: usize, a2: usize| -> C64 {
            let mut z = C64::new(0.0, 0.0);
            for b in 0..2 {
                for b2 in 0..2 {
                    z += psi[b].conj() * m[(2 * a + b, 2 * a2 + b2)] * psi[b2];
                }
            }
            z
        };
        let (s00, s11, s01) = (block(0, 0).re, block(1, 1).re, block(0, 1));
        let p = s00 + s11;
        if p < MIN_OUTCOME_PROBABILITY {
            continue;
        }
        total += p * qubit_entropy(s00 / p, s11 / p, s01 / p);
    }
    total
}

/// Entropy of the first qubit after measuring the second in `basis`.
pub fn conditional_entropy(rho_ab: &DensityMatrix, basis: MeasurementBasis) -> Result<f64> {
    check_two_qubit(rho_ab)?;
    Ok(conditional_entropy_raw(rho_ab.matrix(), basis))
}

/// Maximized classical correlation and where the optimum was found.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalCorrelation {
    pub value: f64,
    pub basis: MeasurementBasis,
    pub evaluations: usize,
}

/// `max_{θ,φ} S(ρᵃ) − S(ρ | {B_k})`: a `COARSE_GRID²` scan over
/// `θ ∈ [0, π]`, `φ ∈ [0, 2π)` followed by simplex refinement from the best
/// grid point.
pub fn classical_correlation(rho_ab: &DensityMatrix) -> Result<ClassicalCorrelation> {
    check_two_qubit(rho_ab)?;
    let sa = entropy(&rho_ab.partial_trace(&[0])?)?;
    let m = rho_ab.matrix();
    let objective = |[theta, phi]: [f64; 2]| {
        conditional_entropy_raw(m, MeasurementBasis { theta, phi })
    };

    let d_theta = PI / (COARSE_GRID - 1) as f64;
    let d_phi = TAU / COARSE_GRID as f64;
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..COARSE_GRID {
        for j in 0..COARSE_GRID {
            let x = [i as f64 * d_theta, j as f64 * d_phi];
            let v = objective(x);
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    let refined = simplex::minimize(objective, best.0, [d_theta, d_phi], SIMPLEX_TOL, SIMPLEX_MAX_EVALS);
    let (point, value) = if refined.value <= best.1 {
        (refined.point, refined.value)
    } else {
        best
    };
    Ok(ClassicalCorrelation {
        value: (sa - value).max(0.0),
        basis: MeasurementBasis::new(point[0], point[1]),
        evaluations: COARSE_GRID * COARSE_GRID + refined.evaluations,
    })
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
pub fn concurrence(rho_ab: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho_ab)?;
    let rho = rho_ab.matrix();
    // σy ⊗ σy has entries ±1 on the anti-diagonal: diag-reversed (−1, 1, 1, −1).
    let flip_sign = [-1.0, 1.0, 1.0, -1.0];
    let rho_tilde = ComplexMatrix::from_fn(4, 4, |i, j| {
        rho[(3 - i, 3 - j)].conj() * (flip_sign[i] * flip_sign[j])
    });
    let eig = herm_eig(rho)?;
    let roots: Vec<C64> = eig
        .values
        .iter()
        .map(|&v| C64::new(v.max(0.0).sqrt(), 0.0))
        .collect();
    let sqrt_rho = &(&eig.vectors * &ComplexMatrix::diag(&roots)) * &eig.vectors.dagger();
    let r = (&(&sqrt_rho * &rho_tilde) * &sqrt_rho).hermitian_part();
    let mut lambdas: Vec<f64> = herm_eig(&r)?.values.into_iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Mutual information, classical correlation, discord and concurrence.
pub fn discord(rho_ab: &DensityMatrix) -> Result<CorrelationReport> {
    let mutual_information = mutual_information(rho_ab)?;
    let cc = classical_correlation(rho_ab)?;
    Ok(CorrelationReport {
        mutual_information,
        classical_correlation: cc.value,
        discord: mutual_information - cc.value,
        concurrence: concurrence(rho_ab)?,
        optimal_basis: cc.basis,
        optimizer_evaluations: cc.evaluations,
    })
}

/// Two-atom reduced state of a `[2, 2, n]` composite state.
pub fn atoms_state(rho_full: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = rho_full.dims();
    if dims.len() != 3 || dims[0] != 2 || dims[1] != 2 {
        return Err(CorrelationError::NotAtomsAndCavity(dims.to_vec()));
    }
    Ok(rho_full.partial_trace(&[0, 1])?)
}

/// Traces out the cavity and reports the correlations between the atoms.
pub fn atoms_report(rho_full: &DensityMatrix) -> Result<CorrelationReport> {
    discord(&atoms_state(rho_full)?)
}

/// Exchanges the two qubits, so that measuring the second qubit of the result
/// measures the first qubit of the input.
pub fn swap_qubits(rho_ab: &DensityMatrix) -> Result<DensityMatrix> {
    check_two_qubit(rho_ab)?;
    let perm = [0, 2, 1, 3];
    let m = rho_ab.matrix();
    Ok(DensityMatrix::structural(
        ComplexMatrix::from_fn(4, 4, |i, j| m[(perm[i], perm[j])]),
        vec![2, 2],
    )?)
}

/// Largest change of the conditional entropy when `φ` moves away from 0 at a
/// few fixed `θ`. States reachable from `|g g 0⟩` give zero up to rounding.
pub fn phase_invariance_defect(rho_ab: &DensityMatrix) -> Result<f64> {
    check_two_qubit(rho_ab)?;
    let m = rho_ab.matrix();
    let mut worst: f64 = 0.0;
    for theta in [0.3, 0.7, 1.1] {
        let base = conditional_entropy_raw(m, MeasurementBasis { theta, phi: 0.0 });
        for phi in [0.9, 2.3, 4.1] {
            let v = conditional_entropy_raw(m, MeasurementBasis { theta, phi });
            worst = worst.max((v - base).abs());
        }
    }
    Ok(worst)
}

/// Whether every entry has imaginary part at most `tol`.
pub fn is_real(rho: &DensityMatrix, tol: f64) -> bool {
    rho.matrix().as_slice().iter().all(|z| z.im.abs() <= tol)
}
