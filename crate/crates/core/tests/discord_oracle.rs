mod support;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use cavity_discord::correlations::{
    classical_correlation, concurrence, conditional_entropy, discord, mutual_information,
    MeasurementBasis,
};
use cavity_discord::{ComplexMatrix, DensityMatrix, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle::{self, Bloch};

fn random_states(seed: u64, n: usize) -> Vec<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| oracle::random_state(&mut rng, 4, vec![2, 2])).collect()
}

fn random_unitary(rng: &mut impl Rng) -> ComplexMatrix {
    // exp(iH) for a random Hermitian H, written out for 2×2.
    let (a, b, c, d) = (
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(0.0..FRAC_PI_2),
    );
    let phase = C64::from_polar(1.0, a);
    let (s, co) = d.sin_cos();
    ComplexMatrix::from_fn(2, 2, |i, j| {
        phase
            * match (i, j) {
                (0, 0) => C64::from_polar(co, b),
                (0, 1) => C64::from_polar(s, c),
                (1, 0) => -C64::from_polar(s, -c),
                _ => C64::from_polar(co, -b),
            }
    })
}

fn conjugate(rho: &DensityMatrix, u: &ComplexMatrix) -> DensityMatrix {
    let m = &(u * rho.matrix()) * &u.dagger();
    DensityMatrix::new(m.hermitian_part(), rho.dims().to_vec()).unwrap()
}

#[test]
fn bloch_conditional_entropy_agrees_with_projector_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for rho in random_states(3, 20) {
        let b = Bloch::of(&rho);
        for _ in 0..20 {
            let (theta, phi) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU));
            let lib = conditional_entropy(&rho, MeasurementBasis::new(theta, phi)).unwrap();
            let ora = b.conditional_entropy(oracle::direction(theta, phi));
            assert!((lib - ora).abs() < 1e-12, "{lib} vs {ora}");
        }
    }
}

#[test]
fn werner_states_match_closed_form_and_exhaustive_grid() {
    for p in [0.3, 0.5, 0.8] {
        let rho = oracle::werner(p);
        let exact = oracle::werner_classical(p);
        let grid = oracle::classical_correlation(&rho);
        let lib = classical_correlation(&rho).unwrap().value;
        assert!((grid.zoomed - exact).abs() < 1e-12);
        assert!((lib - grid.zoomed).abs() < 1e-6, "p={p}: {lib} vs {}", grid.zoomed);
    }
    let report = discord(&oracle::werner(0.5)).unwrap();
    let mi = 2.0 - (-(0.625 * 0.625f64.log2()) - 3.0 * 0.125 * 0.125f64.log2());
    assert!((report.mutual_information - mi).abs() < 1e-12);
    let d = mi - oracle::classical_correlation(&oracle::werner(0.5)).zoomed;
    assert!((report.discord - d).abs() < 1e-6);
    assert!((report.discord - 0.2625).abs() < 1e-4);
}

#[test]
fn random_states_match_exhaustive_grid() {
    for (k, rho) in random_states(2024, 8).iter().enumerate() {
        let grid = oracle::classical_correlation(rho);
        let lib = classical_correlation(rho).unwrap().value;
        assert!(grid.zoomed >= grid.grid);
        assert!(lib >= grid.grid - 1e-9, "state {k}: below the raw grid optimum");
        assert!((lib - grid.zoomed).abs() < 1e-6, "state {k}: {lib} vs {}", grid.zoomed);
    }
}

#[test]
fn half_range_in_theta_covers_all_measurements() {
    for rho in random_states(77, 3) {
        let full = oracle::classical_correlation(&rho);
        let half = oracle::classical_correlation_over(&rho, FRAC_PI_2);
        assert!((full.zoomed - half.zoomed).abs() < 1e-8);
    }
}

#[test]
fn bell_state_is_maximally_correlated() {
    let r = 0.5f64.sqrt();
    let bell = DensityMatrix::pure(
        &[C64::new(r, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0)],
        vec![2, 2],
    )
    .unwrap();
    let report = discord(&bell).unwrap();
    assert!((report.discord - 1.0).abs() < 1e-9);
    assert!((report.concurrence - 1.0).abs() < 1e-9);
    assert!((report.mutual_information - 2.0).abs() < 1e-9);
}

#[test]
fn measurement_side_matters_only_through_the_state() {
    // Measuring qubit 1 of ρ is measuring qubit 2 of the swapped state; the
    // oracle built on the swapped Bloch data must see the same optimum.
    for rho in random_states(5, 3) {
        let swapped = cavity_discord::correlations::swap_qubits(&rho).unwrap();
        let lib = classical_correlation(&swapped).unwrap().value;
        let ora = oracle::classical_correlation(&swapped).zoomed;
        assert!((lib - ora).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlations_are_ordered(seed in any::<u64>()) {
        let rho = &random_states(seed, 1)[0];
        let report = discord(rho).unwrap();
        prop_assert!(report.classical_correlation >= 0.0);
        prop_assert!(report.classical_correlation <= report.mutual_information + 1e-9);
        prop_assert!(report.discord >= -1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&report.concurrence));
    }

    #[test]
    fn separable_states_have_zero_concurrence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = ComplexMatrix::zeros(4, 4);
        let weights: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in weights {
            let a = oracle::random_state(&mut rng, 2, vec![2]);
            let b = oracle::random_state(&mut rng, 2, vec![2]);
            sum += &(&a.matrix().kron(b.matrix()) * (w / total));
        }
        let rho = DensityMatrix::new(sum.hermitian_part(), vec![2, 2]).unwrap();
        prop_assert!(concurrence(&rho).unwrap() < 1e-9);
    }

    #[test]
    fn local_unitaries_leave_correlations_unchanged(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = oracle::random_state(&mut rng, 4, vec![2, 2]);
        let u = random_unitary(&mut rng).kron(&random_unitary(&mut rng));
        let moved = conjugate(&rho, &u);
        let (a, b) = (discord(&rho).unwrap(), discord(&moved).unwrap());
        prop_assert!((a.concurrence - b.concurrence).abs() < 1e-9);
        prop_assert!((a.discord - b.discord).abs() < 1e-6);
        prop_assert!((mutual_information(&rho).unwrap() - mutual_information(&moved).unwrap()).abs() < 1e-10);
    }
}
