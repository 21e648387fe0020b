//! Discord settling time converted to seconds.

use std::f64::consts::TAU;

use cavity_discord::correlations::atoms_report;
use cavity_discord::dynamics::{initial_state, settle_time_on, DynamicsError, Evolution, Settling};
use cavity_discord::model::ModelParams;
use serde::Serialize;
use thiserror::Error;

/// `g / 2π` of the experimental estimate, in Hz.
pub const EXPERIMENT_G_HZ: f64 = 100e6;
/// `g² / (γ κ)` of the experimental estimate.
pub const EXPERIMENT_COOPERATIVITY_RATIO: f64 = 20.0;
/// Relative tolerance on `γ κ = g² / 20`.
pub const PRODUCT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SettlingError {
    #[error("physical coupling must be finite and > 0 rad/s, got {0}")]
    InvalidCoupling(f64),
    #[error("tolerance fraction must be finite and > 0, got {0}")]
    InvalidFraction(f64),
    #[error("gamma * kappa = {product} but the estimate requires g^2/20 = {expected} (units of g)")]
    ProductConstraint { product: f64, expected: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Angular coupling `2π f` in rad/s for `g / 2π = f` Hz.
pub fn angular(frequency_hz: f64) -> f64 {
    TAU * frequency_hz
}

/// Converts a time in units of `1/g` to seconds.
pub fn to_seconds(t: f64, physical_g: f64) -> f64 {
    t / physical_g
}

/// `γ = κ = g / √20` in units of `g`.
pub fn experiment_rates() -> (f64, f64) {
    let r = EXPERIMENT_COOPERATIVITY_RATIO.sqrt().recip();
    (r, r)
}

#[derive(Clone, Debug, Serialize)]
pub struct SettlingReport {
    pub params: ModelParams,
    /// rad/s.
    pub physical_g: f64,
    pub plateau: f64,
    pub tolerance: f64,
    /// Settling time in units of `1/g`; `None` when the series never settles.
    pub settle_time: Option<f64>,
    pub settle_seconds: Option<f64>,
    /// Last time outside the band when the series did not settle.
    pub last_excursion: Option<f64>,
}

/// Settling of a dimensionless series, reported in seconds.
pub fn series_settling(
    times: &[f64],
    series: &[f64],
    physical_g: f64,
    tol: f64,
) -> Result<(Settling, Option<f64>), SettlingError> {
    if !(physical_g.is_finite() && physical_g > 0.0) {
        return Err(SettlingError::InvalidCoupling(physical_g));
    }
    let s = settle_time_on(times, series, tol)?;
    Ok((s, s.time().map(|t| to_seconds(t, physical_g))))
}

/// Evolves from `|g g 0⟩`, records the discord at every step and reports when
/// it stays within `fraction · |plateau|` of its final value.
pub fn settling_report(
    params: &ModelParams,
    physical_g: f64,
    fraction: f64,
    t_max: f64,
    dt: f64,
) -> Result<SettlingReport, SettlingError> {
    if !(physical_g.is_finite() && physical_g > 0.0) {
        return Err(SettlingError::InvalidCoupling(physical_g));
    }
    if !(fraction.is_finite() && fraction > 0.0) {
        return Err(SettlingError::InvalidFraction(fraction));
    }
    let expected = params.g * params.g / EXPERIMENT_COOPERATIVITY_RATIO;
    let product = params.gamma * params.kappa;
    if (product - expected).abs() > PRODUCT_TOL * expected {
        return Err(SettlingError::ProductConstraint { product, expected });
    }
    let rho0 = initial_state(params)?;
    let mut times = Vec::new();
    let mut series = Vec::new();
    for frame in Evolution::new(params, &rho0, t_max, dt)? {
        let frame = frame?;
        times.push(frame.time);
        series.push(atoms_report(&frame.state).map_err(DynamicsError::from)?.discord);
    }
    let plateau = *series.last().expect("evolution yields the initial state");
    let tolerance = fraction * plateau.abs();
    let (settling, seconds) = series_settling(&times, &series, physical_g, tolerance)?;
    Ok(SettlingReport {
        params: params.clone(),
        physical_g,
        plateau,
        tolerance,
        settle_time: settling.time(),
        settle_seconds: seconds,
        last_excursion: match settling {
            Settling::NotSettled { last_excursion } => Some(last_excursion),
            Settling::At(_) => None,
        },
    })
}
