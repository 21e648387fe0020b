//! Independent discord oracle for two-qubit states, written against the
//! Bloch representation
//! `ρ = ¼ (I + r·σ ⊗ I + I ⊗ s·σ + Σ T_ij σ_i ⊗ σ_j)`.
//!
//! Measuring qubit b along the unit vector `n` gives outcome `±` with
//! probability `(1 ± s·n)/2` and leaves qubit a with Bloch vector
//! `(r ± T n) / (1 ± s·n)`.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use cavity_discord::{ComplexMatrix, DensityMatrix, C64};
use rand::Rng;

pub const ORACLE_THETA: usize = 720;
pub const ORACLE_PHI: usize = 1440;

pub struct Bloch {
    pub r: [f64; 3],
    pub s: [f64; 3],
    pub t: [[f64; 3]; 3],
}

fn pauli(k: usize) -> [[C64; 2]; 2] {
    let (z, o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        _ => [[o, z], [z, -o]],
    }
}

/// `Tr[ρ (σ_j ⊗ σ_k)]` with index `2a + b`.
fn pauli_expectation(rho: &ComplexMatrix, j: usize, k: usize) -> f64 {
    let (pj, pk) = (pauli(j), pauli(k));
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    acc += rho[(2 * a + b, 2 * a2 + b2)] * pj[a2][a] * pk[b2][b];
                }
            }
        }
    }
    acc.re
}

impl Bloch {
    pub fn of(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let mut out = Bloch { r: [0.0; 3], s: [0.0; 3], t: [[0.0; 3]; 3] };
        for i in 0..3 {
            out.r[i] = pauli_expectation(m, i + 1, 0);
            out.s[i] = pauli_expectation(m, 0, i + 1);
            for j in 0..3 {
                out.t[i][j] = pauli_expectation(m, i + 1, j + 1);
            }
        }
        out
    }

    fn reduced_a_entropy(&self) -> f64 {
        bloch_entropy(norm(self.r))
    }

    /// Conditional entropy for measurement direction `n`.
    pub fn conditional_entropy(&self, n: [f64; 3]) -> f64 {
        let sn = dot(self.s, n);
        let tn = [dot(self.t[0], n), dot(self.t[1], n), dot(self.t[2], n)];
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let p = 0.5 * (1.0 + sign * sn);
            if p < 1e-14 {
                continue;
            }
            let v = [
                (self.r[0] + sign * tn[0]) / (1.0 + sign * sn),
                (self.r[1] + sign * tn[1]) / (1.0 + sign * sn),
                (self.r[2] + sign * tn[2]) / (1.0 + sign * sn),
            ];
            total += p * bloch_entropy(norm(v));
        }
        total
    }

    pub fn objective(&self, theta: f64, phi: f64) -> f64 {
        self.reduced_a_entropy() - self.conditional_entropy(direction(theta, phi))
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn h(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn bloch_entropy(r: f64) -> f64 {
    let r = r.min(1.0);
    h(0.5 * (1.0 + r)) + h(0.5 * (1.0 - r))
}

/// Bloch direction of `cos θ |g⟩ + e^{iφ} sin θ |e⟩` with `|g⟩` the `σz = +1` state.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (s2, c2) = (2.0 * theta).sin_cos();
    [s2 * phi.cos(), s2 * phi.sin(), c2]
}

pub struct OracleResult {
    /// Best value on the 720 × 1440 grid.
    pub grid: f64,
    /// Best value after successive grid zooms around the grid optimum.
    pub zoomed: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Classical correlation by exhaustive search: 720 points in θ ∈ [0, π] by
/// 1440 in φ ∈ [0, 2π), then repeated 41 × 41 subgrids over the neighbourhood
/// of the incumbent, shrinking tenfold each round, down to 1e-9 rad spacing.
pub fn classical_correlation(rho: &DensityMatrix) -> OracleResult {
    classical_correlation_over(rho, PI)
}

/// As [`classical_correlation`] with θ restricted to `[0, theta_max]`.
pub fn classical_correlation_over(rho: &DensityMatrix, theta_max: f64) -> OracleResult {
    let b = Bloch::of(rho);
    let dt = theta_max / (ORACLE_THETA - 1) as f64;
    let dp = TAU / ORACLE_PHI as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..ORACLE_THETA {
        let theta = i as f64 * dt;
        for j in 0..ORACLE_PHI {
            let phi = j as f64 * dp;
            let v = b.objective(theta, phi);
            if v > best.0 {
                best = (v, theta, phi);
            }
        }
    }
    let grid = best.0;
    let (mut ht, mut hp) = (dt, dp);
    while ht > 1e-9 {
        let (_, t0, p0) = best;
        for i in -20..=20 {
            for j in -20..=20 {
                let theta = (t0 + i as f64 * ht / 10.0).clamp(0.0, theta_max);
                let phi = p0 + j as f64 * hp / 10.0;
                let v = b.objective(theta, phi);
                if v > best.0 {
                    best = (v, theta, phi);
                }
            }
        }
        ht /= 10.0;
        hp /= 10.0;
    }
    OracleResult {
        grid,
        zoomed: best.0,
        theta: best.1,
        phi: best.2,
    }
}

/// Ginibre-distributed mixed state `G G† / Tr(G G†)`.
pub fn random_state(rng: &mut impl Rng, dim: usize, dims: Vec<usize>) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &g * &g.dagger();
    let tr = m.trace();
    DensityMatrix::new(m.scale(C64::new(1.0, 0.0) / tr).hermitian_part(), dims).unwrap()
}

/// `p |Φ⁺⟩⟨Φ⁺| + (1 − p) I/4`.
pub fn werner(p: f64) -> DensityMatrix {
    let q = (1.0 - p) / 4.0;
    let m = ComplexMatrix::from_fn(4, 4, |i, j| {
        let bell = if (i == 0 || i == 3) && (j == 0 || j == 3) { 0.5 * p } else { 0.0 };
        let mixed = if i == j { q } else { 0.0 };
        C64::new(bell + mixed, 0.0)
    });
    DensityMatrix::new(m, vec![2, 2]).unwrap()
}

/// Werner-state classical correlation in closed form:
/// `C = ½[(1−p) log₂(1−p) + (1+p) log₂(1+p)]`.
pub fn werner_classical(p: f64) -> f64 {
    0.5 * ((1.0 - p) * (1.0 - p).log2() + (1.0 + p) * (1.0 + p).log2())
}
