//! Time evolution, steady states, settling times and cutoff audits.
//!
//! The generator maps every coherence sector (fixed difference of total
//! excitation number between ket and bra) into itself, so `L` is block
//! diagonal after a permutation of the column-stacked basis. Propagators and
//! singular values are computed blockwise; the result is the same as working
//! with the full `D² × D²` matrix, at a fraction of the cost.

use log::{debug, warn};
use thiserror::Error;

use crate::correlations::{atoms_report, CorrelationError};
use crate::model::{
    basis_index, coherence_sectors, excitation_numbers, LiouvillianTerms, ModelError, ModelParams,
    Sector, SystemOperators,
};
use crate::qmath::{
    expm, herm_eigenvalues, svd_ascending, ComplexMatrix, DensityMatrix, LinalgError, C64,
};

/// Default propagation step, in units of `1/g`.
pub const DEFAULT_DT: f64 = 0.02;
/// Default horizon for time series, in units of `1/g`.
pub const DEFAULT_T_MAX: f64 = 200.0;
/// Trace drift below which a step is not renormalized.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-12;
/// Minimum eigenvalue below which an evolved state is flagged.
pub const POSITIVITY_FLAG: f64 = -1e-6;
/// A steady state is accepted as unique only above this second singular value.
pub const MIN_SPECTRAL_GAP: f64 = 1e-8;
/// Largest admissible generator residual of a steady state.
pub const MAX_STEADY_RESIDUAL: f64 = 1e-9;
/// Steady states with an eigenvalue below `-STEADY_POSITIVITY_TOL` are rejected.
pub const STEADY_POSITIVITY_TOL: f64 = 1e-7;
/// Cutoffs above this are never tried by [`cutoff_audit`].
pub const MAX_AUDIT_CUTOFF: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid time grid: dt = {dt}, t_max = {t_max} (need dt > 0 and t_max >= dt)")]
    InvalidTimeGrid { dt: f64, t_max: f64 },
    #[error("initial state has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("propagator has non-finite entries")]
    NonFinitePropagator,
    #[error("no dissipative channel (gamma = kappa = 0); the steady state is not defined")]
    NoDissipation,
    #[error("non-unique steady state: second singular value {gap:e} is below {MIN_SPECTRAL_GAP:e}")]
    NonUniqueSteadyState { gap: f64 },
    #[error("steady state has eigenvalue {min_eigenvalue:e} below -{STEADY_POSITIVITY_TOL:e}")]
    NegativeSteadyState { min_eigenvalue: f64 },
    #[error("steady-state residual {residual:e} exceeds {MAX_STEADY_RESIDUAL:e}")]
    SteadyResidual { residual: f64 },
    #[error("null vector has vanishing trace")]
    TracelessNullVector,
    #[error("series length {series} does not match {times} time points")]
    LengthMismatch { series: usize, times: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("observable did not converge below cutoff {max_cutoff} (last change {last_change:e})")]
    NoCutoffConvergence { max_cutoff: usize, last_change: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Correlation(#[from] CorrelationError),
}

pub type Result<T, E = DynamicsError> = std::result::Result<T, E>;

/// `|g g 0⟩⟨g g 0|`.
pub fn initial_state(params: &ModelParams) -> Result<DensityMatrix> {
    params.validate()?;
    let mut ket = vec![C64::new(0.0, 0.0); params.dim()];
    ket[basis_index(0, 0, 0, params.cutoff)] = C64::new(1.0, 0.0);
    Ok(DensityMatrix::pure(&ket, params.dims())?)
}

/// `exp(L·dt)` stored per coherence sector.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim: usize,
    dt: f64,
    blocks: Vec<(Sector, ComplexMatrix)>,
}

impl Propagator {
    /// Propagator on the sectors listed in `orders` (all sectors when `None`).
    pub fn new(params: &ModelParams, dt: f64, orders: Option<&[i64]>) -> Result<Self> {
        let terms = LiouvillianTerms::new(params)?;
        let mut blocks = Vec::new();
        for sector in coherence_sectors(params.cutoff) {
            if orders.is_some_and(|o| !o.contains(&sector.order)) {
                continue;
            }
            let generator = terms.sector_block(&sector).scale(C64::new(dt, 0.0));
            let prop = expm(&generator).map_err(|e| match e {
                LinalgError::NonFinite { .. } => DynamicsError::NonFinitePropagator,
                other => other.into(),
            })?;
            blocks.push((sector, prop));
        }
        Ok(Self {
            dim: params.dim(),
            dt,
            blocks,
        })
    }

    /// Propagator covering exactly the sectors on which `rho` has support.
    pub fn for_state(params: &ModelParams, dt: f64, rho: &ComplexMatrix) -> Result<Self> {
        let orders = support_orders(params.cutoff, rho);
        Self::new(params, dt, Some(&orders))
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step, `ρ ↦ devec(exp(L dt) vec ρ)`. Components on sectors the
    /// propagator was not built for are dropped.
    pub fn step(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        let src = rho.as_slice();
        let mut out = ComplexMatrix::zeros(d, d);
        // vec index v = i + j·d maps to row-major i·d + j.
        let at = |v: usize| (v % d) * d + v / d;
        for (sector, prop) in &self.blocks {
            let local: Vec<C64> = sector.indices.iter().map(|&v| src[at(v)]).collect();
            if local.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            for (k, z) in prop.matvec(&local).into_iter().enumerate() {
                let v = sector.indices[k];
                out[(v % d, v / d)] = z;
            }
        }
        out
    }
}

/// Coherence orders on which `rho` has nonzero entries.
pub fn support_orders(cutoff: usize, rho: &ComplexMatrix) -> Vec<i64> {
    let n = excitation_numbers(cutoff);
    let mut orders: Vec<i64> = Vec::new();
    for i in 0..rho.rows() {
        for j in 0..rho.cols() {
            if rho[(i, j)] != C64::new(0.0, 0.0) {
                let k = n[i] as i64 - n[j] as i64;
                if !orders.contains(&k) {
                    orders.push(k);
                }
            }
        }
    }
    orders.sort_unstable();
    orders
}

/// Smallest eigenvalue of a Hermitian matrix; when it is block diagonal in
/// total excitation number, the blocks are diagonalized separately.
pub fn min_eigenvalue(cutoff: usize, rho: &ComplexMatrix) -> Result<f64> {
    let n = excitation_numbers(cutoff);
    let d = n.len();
    let block_diagonal =
        (0..d).all(|i| (0..d).all(|j| n[i] == n[j] || rho[(i, j)] == C64::new(0.0, 0.0)));
    if !block_diagonal {
        return Ok(herm_eigenvalues(&rho.hermitian_part())?[0]);
    }
    let max_n = *n.iter().max().expect("non-empty");
    let mut worst = f64::INFINITY;
    for level in 0..=max_n {
        let idx: Vec<usize> = (0..d).filter(|&k| n[k] == level).collect();
        let block = ComplexMatrix::from_fn(idx.len(), idx.len(), |a, b| rho[(idx[a], idx[b])]);
        worst = worst.min(herm_eigenvalues(&block.hermitian_part())?[0]);
    }
    Ok(worst)
}

/// One stored point of a trajectory.
#[derive(Clone, Debug)]
pub struct Frame {
    pub time: f64,
    pub state: DensityMatrix,
    /// Sum of all trace corrections applied so far.
    pub cumulative_drift: f64,
    /// `|Tr ρ − 1|` of this step before any renormalization.
    pub trace_error: f64,
    /// Hermiticity defect of this step before re-Hermitization.
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

/// Lazily evaluated evolution from a fixed initial state.
pub struct Evolution {
    propagator: Propagator,
    cutoff: usize,
    dims: Vec<usize>,
    current: ComplexMatrix,
    step: usize,
    steps: usize,
    cumulative_drift: f64,
}

impl Evolution {
    pub fn new(params: &ModelParams, rho0: &DensityMatrix, t_max: f64, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite() && t_max.is_finite() && t_max >= dt) {
            return Err(DynamicsError::InvalidTimeGrid { dt, t_max });
        }
        if rho0.dim() != params.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: params.dim(),
                got: rho0.dim(),
            });
        }
        let propagator = Propagator::for_state(params, dt, rho0.matrix())?;
        // Tolerate floating-point representation of t_max / dt.
        let steps = (t_max / dt + 1e-9).floor() as usize;
        Ok(Self {
            propagator,
            cutoff: params.cutoff,
            dims: params.dims(),
            current: rho0.matrix().clone(),
            step: 0,
            steps,
            cumulative_drift: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn frame(&self, trace_error: f64, hermiticity_error: f64) -> Result<Frame> {
        let min_eig = min_eigenvalue(self.cutoff, &self.current)?;
        if min_eig < POSITIVITY_FLAG {
            warn!(
                "step {}: eigenvalue {min_eig:e} below the positivity flag {POSITIVITY_FLAG:e}",
                self.step
            );
        }
        Ok(Frame {
            time: self.step as f64 * self.propagator.dt,
            state: DensityMatrix::structural(self.current.clone(), self.dims.clone())?,
            cumulative_drift: self.cumulative_drift,
            trace_error,
            hermiticity_error,
            min_eigenvalue: min_eig,
        })
    }
}

impl Iterator for Evolution {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.step > self.steps {
            return None;
        }
        if self.step == 0 {
            let out = self.frame(0.0, 0.0);
            self.step = 1;
            return Some(out);
        }
        let raw = self.propagator.step(&self.current);
        let hermiticity_error = raw.hermitian_asymmetry();
        let mut next = raw.hermitian_part();
        let trace = next.trace().re;
        let trace_error = (trace - 1.0).abs();
        if trace_error > RENORMALIZE_THRESHOLD {
            self.cumulative_drift += trace_error;
            debug!(
                "step {}: renormalizing trace {trace} (cumulative drift {:e})",
                self.step, self.cumulative_drift
            );
            next = next.scale(C64::new(1.0 / trace, 0.0));
        }
        self.current = next;
        let out = self.frame(trace_error, hermiticity_error);
        self.step += 1;
        Some(out)
    }
}

/// Trajectory stored on the uniform grid `0, dt, 2dt, …`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub params: ModelParams,
    pub cumulative_drift: f64,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn series(&self, f: impl FnMut(&DensityMatrix) -> f64) -> Vec<f64> {
        self.states.iter().map(f).collect()
    }
}

/// Evolves `rho0` under the time-independent generator and keeps every step.
pub fn evolve(
    params: &ModelParams,
    rho0: &DensityMatrix,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    let evolution = Evolution::new(params, rho0, t_max, dt)?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(evolution.len()),
        states: Vec::with_capacity(evolution.len()),
        params: params.clone(),
        cumulative_drift: 0.0,
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    for frame in evolution {
        let frame = frame?;
        traj.times.push(frame.time);
        traj.cumulative_drift = frame.cumulative_drift;
        traj.max_trace_error = traj.max_trace_error.max(frame.trace_error);
        traj.max_hermiticity_error = traj.max_hermiticity_error.max(frame.hermiticity_error);
        traj.min_eigenvalue = traj.min_eigenvalue.min(frame.min_eigenvalue);
        traj.states.push(frame.state);
    }
    Ok(traj)
}

/// State reached at time `t` by a single propagator `exp(L t)`.
pub fn state_at(params: &ModelParams, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(DynamicsError::InvalidTimeGrid { dt: t, t_max: t });
    }
    let prop = Propagator::for_state(params, t, rho0.matrix())?;
    let rho = prop.step(rho0.matrix()).hermitian_part();
    let tr = rho.trace().re;
    Ok(DensityMatrix::structural(rho.scale(C64::new(1.0 / tr, 0.0)), params.dims())?)
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: DensityMatrix,
    /// Frobenius norm of the generator applied to `state`.
    pub residual: f64,
    /// Second-smallest singular value of the full Liouvillian.
    pub spectral_gap: f64,
}

/// Unique trace-one null vector of the Liouvillian.
pub fn steady_state(params: &ModelParams) -> Result<SteadyState> {
    params.validate()?;
    if params.gamma <= 0.0 && params.kappa <= 0.0 {
        return Err(DynamicsError::NoDissipation);
    }
    let terms = LiouvillianTerms::new(params)?;
    let d = params.dim();
    let mut singular_values = Vec::with_capacity(d * d);
    let mut null = None;
    for sector in coherence_sectors(params.cutoff) {
        let block = terms.sector_block(&sector);
        let svd = svd_ascending(&block, sector.order == 0)?;
        if sector.order == 0 {
            let v = svd.right_vectors.as_ref().expect("vectors requested");
            null = Some((sector.clone(), (0..v.rows()).map(|i| v[(i, 0)]).collect::<Vec<_>>()));
        }
        singular_values.extend(svd.values);
    }
    singular_values.sort_by(f64::total_cmp);
    let spectral_gap = singular_values[1];
    if spectral_gap < MIN_SPECTRAL_GAP {
        return Err(DynamicsError::NonUniqueSteadyState { gap: spectral_gap });
    }

    let (sector, vector) = null.expect("order-zero sector always exists");
    let mut rho = ComplexMatrix::zeros(d, d);
    for (k, &v) in sector.indices.iter().enumerate() {
        rho[(v % d, v / d)] = vector[k];
    }
    let trace = rho.trace();
    if trace.norm() < 1e-12 {
        return Err(DynamicsError::TracelessNullVector);
    }
    let rho = rho.scale(C64::new(1.0, 0.0) / trace).hermitian_part();
    let min_eig = min_eigenvalue(params.cutoff, &rho)?;
    if min_eig < -STEADY_POSITIVITY_TOL {
        return Err(DynamicsError::NegativeSteadyState {
            min_eigenvalue: min_eig,
        });
    }
    let state = DensityMatrix::structural(rho, params.dims())?;
    let residual = crate::model::apply_generator(params, state.matrix())?.frobenius_norm();
    if residual > MAX_STEADY_RESIDUAL {
        return Err(DynamicsError::SteadyResidual { residual });
    }
    Ok(SteadyState {
        state,
        residual,
        spectral_gap,
    })
}

/// Outcome of [`settle_time`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Settling {
    /// The series stays within the tolerance of its final value from this time on.
    At(f64),
    /// The settled tail is shorter than [`MIN_SETTLED_FRACTION`] of the trajectory.
    NotSettled { last_excursion: f64 },
}

impl Settling {
    pub fn time(self) -> Option<f64> {
        match self {
            Settling::At(t) => Some(t),
            Settling::NotSettled { .. } => None,
        }
    }
}

/// Fraction of the trajectory that must lie inside the tolerance band for a
/// series to count as settled.
pub const MIN_SETTLED_FRACTION: f64 = 0.1;

/// Earliest time after which `series` stays within `tol` of its final value.
pub fn settle_time_on(times: &[f64], series: &[f64], tol: f64) -> Result<Settling> {
    if series.len() != times.len() || times.is_empty() {
        return Err(DynamicsError::LengthMismatch {
            series: series.len(),
            times: times.len(),
        });
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(DynamicsError::InvalidTolerance(tol));
    }
    let last = *series.last().expect("non-empty");
    let settled_from = match series.iter().rposition(|x| (x - last).abs() > tol) {
        None => 0,
        Some(k) => k + 1,
    };
    let t0 = times[0];
    let t_end = *times.last().expect("non-empty");
    let t_settle = times[settled_from];
    if settled_from > 0 && (t_end - t_settle) < MIN_SETTLED_FRACTION * (t_end - t0) {
        return Ok(Settling::NotSettled {
            last_excursion: times[settled_from - 1],
        });
    }
    Ok(Settling::At(t_settle))
}

pub fn settle_time(traj: &Trajectory, series: &[f64], tol: f64) -> Result<Settling> {
    settle_time_on(&traj.times, series, tol)
}

/// Scalar steady-state quantities that [`cutoff_audit`] can track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Discord,
    ClassicalCorrelation,
    MutualInformation,
    Concurrence,
    PhotonNumber,
    AtomExcitation,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::Discord,
        Observable::ClassicalCorrelation,
        Observable::MutualInformation,
        Observable::Concurrence,
        Observable::PhotonNumber,
        Observable::AtomExcitation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Discord => "discord",
            Observable::ClassicalCorrelation => "classical_correlation",
            Observable::MutualInformation => "mutual_information",
            Observable::Concurrence => "concurrence",
            Observable::PhotonNumber => "photon_number",
            Observable::AtomExcitation => "atom_excitation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    /// Value of the observable on a composite state with the given cutoff.
    pub fn evaluate(self, state: &DensityMatrix, cutoff: usize) -> Result<f64> {
        Ok(match self {
            Observable::PhotonNumber => {
                state.expectation(&SystemOperators::new(cutoff)?.photon_number()).re
            }
            Observable::AtomExcitation => {
                state.expectation(&SystemOperators::new(cutoff)?.excited_projector(1)?).re
            }
            other => {
                let report = atoms_report(state)?;
                match other {
                    Observable::Discord => report.discord,
                    Observable::ClassicalCorrelation => report.classical_correlation,
                    Observable::MutualInformation => report.mutual_information,
                    Observable::Concurrence => report.concurrence,
                    _ => unreachable!(),
                }
            }
        })
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Steady-state value of `observable` at every cutoff tried by the audit.
#[derive(Clone, Debug)]
pub struct CutoffAudit {
    pub cutoff: usize,
    pub values: Vec<(usize, f64)>,
}

/// Smallest cutoff `c` such that the steady-state observable changes by less
/// than `tol` between `c` and `c + 2`.
pub fn cutoff_audit(params: &ModelParams, observable: Observable, tol: f64) -> Result<CutoffAudit> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(DynamicsError::InvalidTolerance(tol));
    }
    params.validate()?;
    let mut values: Vec<(usize, f64)> = Vec::new();
    let value_at = |c: usize, values: &mut Vec<(usize, f64)>| -> Result<f64> {
        if let Some(&(_, v)) = values.iter().find(|(k, _)| *k == c) {
            return Ok(v);
        }
        let p = params.clone().with_cutoff(c);
        let v = observable.evaluate(&steady_state(&p)?.state, c)?;
        debug!("cutoff audit: {observable} at cutoff {c} = {v}");
        values.push((c, v));
        Ok(v)
    };
    let mut last_change = f64::INFINITY;
    for c in 1..=MAX_AUDIT_CUTOFF - 2 {
        let low = value_at(c, &mut values)?;
        let high = value_at(c + 2, &mut values)?;
        last_change = (high - low).abs();
        if last_change < tol {
            values.sort_by_key(|&(k, _)| k);
            return Ok(CutoffAudit { cutoff: c, values });
        }
    }
    Err(DynamicsError::NoCutoffConvergence {
        max_cutoff: MAX_AUDIT_CUTOFF,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{atom_swap, liouvillian};
    use crate::qmath::testutil::random_density;
    use crate::qmath::{trace_distance, vectorize, devectorize};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_state_properties() {
        let p = ModelParams::new(0.1, 1.5, 0.7, 0.0);
        let rho = initial_state(&p).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        let ops = SystemOperators::new(p.cutoff).unwrap();
        assert_eq!(rho.expectation(&ops.photon_number()).norm(), 0.0);
        assert_eq!(rho.expectation(&ops.excited_projector(1).unwrap()).norm(), 0.0);
        assert_eq!(rho.expectation(&ops.excited_projector(2).unwrap()).norm(), 0.0);
        let swap = atom_swap(p.cutoff);
        assert_eq!(&(&swap * rho.matrix()) * &swap, *rho.matrix());
    }

    #[test]
    fn blockwise_propagator_matches_full_expm() {
        let p = ModelParams::new(0.2, 0.7, 0.5, 0.9).with_cutoff(2);
        let full = expm(&liouvillian(&p).unwrap().matrix().scale(C64::new(0.3, 0.0))).unwrap();
        let blocks = Propagator::new(&p, 0.3, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let rho = random_density(&mut rng, &p.dims());
        let via_full = devectorize(&full.matvec(&vectorize(rho.matrix()))).unwrap();
        assert!(blocks.step(rho.matrix()).max_abs_diff(&via_full) < 1e-12);
    }

    #[test]
    fn vacuum_without_noise_is_frozen() {
        let p = ModelParams::new(0.1, 1.5, 0.0, 0.0);
        let rho0 = initial_state(&p).unwrap();
        let traj = evolve(&p, &rho0, 5.0, 0.02).unwrap();
        assert_eq!(traj.times.len(), 251);
        for s in &traj.states {
            assert!(s.matrix().max_abs_diff(rho0.matrix()) < 1e-14);
        }
    }

    #[test]
    fn closed_evolution_conserves_excitations() {
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0);
        let mut ket = vec![C64::new(0.0, 0.0); p.dim()];
        ket[basis_index(0, 0, 1, p.cutoff)] = C64::new(1.0, 0.0);
        let rho0 = DensityMatrix::pure(&ket, p.dims()).unwrap();
        let number = SystemOperators::new(p.cutoff).unwrap().excitation_number();
        let traj = evolve(&p, &rho0, 20.0, 0.05).unwrap();
        for s in &traj.states {
            assert!((s.expectation(&number).re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn semigroup_and_exchange_symmetry() {
        let p = ModelParams::new(0.1, 1.5, 0.7, 0.3);
        let rho0 = initial_state(&p).unwrap();
        let two_small = evolve(&p, &rho0, 0.2, 0.1).unwrap();
        let one_big = evolve(&p, &rho0, 0.2, 0.2).unwrap();
        let d = trace_distance(two_small.final_state(), one_big.final_state()).unwrap();
        assert!(d <= 1e-10, "trace distance {d:e}");
        let swap = atom_swap(p.cutoff);
        let traj = evolve(&p, &rho0, 10.0, 0.5).unwrap();
        for s in &traj.states {
            let swapped = &(&swap * s.matrix()) * &swap;
            assert!(swapped.max_abs_diff(s.matrix()) < 1e-9);
        }
        assert!(traj.max_trace_error < 1e-9);
        assert!(traj.max_hermiticity_error < 1e-10);
        assert!(traj.min_eigenvalue > -1e-8);
    }

    #[test]
    fn evolve_rejects_bad_input() {
        let p = ModelParams::new(0.1, 1.0, 0.0, 0.0);
        let rho0 = initial_state(&p).unwrap();
        assert!(matches!(evolve(&p, &rho0, 1.0, 0.0), Err(DynamicsError::InvalidTimeGrid { .. })));
        assert!(matches!(evolve(&p, &rho0, 0.01, 0.02), Err(DynamicsError::InvalidTimeGrid { .. })));
        let other = initial_state(&p.clone().with_cutoff(2)).unwrap();
        assert!(matches!(
            evolve(&p, &other, 1.0, 0.1),
            Err(DynamicsError::DimensionMismatch { expected: 24, got: 12 })
        ));
    }

    /// Two-level rate equation: up-rate `2γ n_T`, down-rate `2γ(n_T + 1)`,
    /// so the stationary excited population is `n_T / (2 n_T + 1)`.
    #[test]
    fn decoupled_atoms_reach_thermal_population() {
        for n_t in [0.5, 1.0, 3.0] {
            let p = ModelParams::new(1.0, 1.0, n_t, 0.0).with_coupling(0.0);
            let ss = steady_state(&p).unwrap();
            let ops = SystemOperators::new(p.cutoff).unwrap();
            let want = n_t / (2.0 * n_t + 1.0);
            for atom in [1, 2] {
                let pop = ss.state.expectation(&ops.excited_projector(atom).unwrap()).re;
                assert!((pop - want).abs() < 1e-8, "n_T = {n_t}: {pop} vs {want}");
            }
        }
    }

    #[test]
    fn decoupled_cavity_reaches_thermal_occupation() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.5).with_coupling(0.0).with_cutoff(15);
        let ss = steady_state(&p).unwrap();
        let n = Observable::PhotonNumber.evaluate(&ss.state, p.cutoff).unwrap();
        assert!((n - 0.5).abs() < 1e-4, "{n}");
    }

    #[test]
    fn frozen_subsystem_is_non_unique() {
        let p = ModelParams::new(1.0, 0.0, 1.0, 0.0).with_coupling(0.0);
        assert!(matches!(steady_state(&p), Err(DynamicsError::NonUniqueSteadyState { .. })));
        let closed = ModelParams::new(0.0, 0.0, 0.0, 0.0);
        assert_eq!(steady_state(&closed).unwrap_err(), DynamicsError::NoDissipation);
    }

    #[test]
    fn steady_state_certificates() {
        let p = ModelParams::new(0.1, 1.5, 0.7, 0.0);
        let ss = steady_state(&p).unwrap();
        assert!(ss.residual <= MAX_STEADY_RESIDUAL);
        assert!(ss.spectral_gap > MIN_SPECTRAL_GAP);
        assert!(ss.state.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn steady_state_gap_matches_full_svd() {
        let p = ModelParams::new(0.3, 0.8, 0.4, 0.6).with_cutoff(2);
        let full = svd_ascending(liouvillian(&p).unwrap().matrix(), false).unwrap();
        let ss = steady_state(&p).unwrap();
        assert!((ss.spectral_gap - full.values[1]).abs() < 1e-10);
        assert!(full.values[0] < 1e-12);
    }

    #[test]
    fn steady_state_matches_long_evolution() {
        let p = ModelParams::new(0.1, 1.5, 0.7, 0.0);
        let ss = steady_state(&p).unwrap();
        let long = state_at(&p, &initial_state(&p).unwrap(), 10.0 / p.gamma).unwrap();
        assert!(trace_distance(&ss.state, &long).unwrap() < 1e-6);
    }

    #[test]
    fn settle_time_examples() {
        let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
        let constant = vec![0.3; times.len()];
        assert_eq!(settle_time_on(&times, &constant, 1e-6).unwrap(), Settling::At(0.0));
        let decay: Vec<f64> = times.iter().map(|t| (-t).exp()).collect();
        let t = settle_time_on(&times, &decay, 0.01).unwrap().time().unwrap();
        assert!((t - 0.01f64.ln().abs()).abs() < 0.02, "{t}");
        let ramp: Vec<f64> = times.clone();
        assert!(matches!(settle_time_on(&times, &ramp, 0.01).unwrap(), Settling::NotSettled { .. }));
        assert!(settle_time_on(&times, &ramp[1..], 0.01).is_err());
    }

    #[test]
    fn vacuum_audit_needs_the_smallest_cutoff() {
        let p = ModelParams::new(0.1, 1.5, 0.0, 0.0);
        assert_eq!(cutoff_audit(&p, Observable::PhotonNumber, 1e-6).unwrap().cutoff, 1);
        assert_eq!(cutoff_audit(&p, Observable::Discord, 1e-6).unwrap().cutoff, 1);
        assert!(cutoff_audit(&p, Observable::Discord, 0.0).is_err());
    }

    #[test]
    fn observable_names_round_trip() {
        for o in Observable::ALL {
            assert_eq!(Observable::from_name(o.name()), Some(o));
        }
        assert_eq!(Observable::from_name("nope"), None);
    }
}
