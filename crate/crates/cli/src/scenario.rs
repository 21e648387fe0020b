//! Runs a validated scenario into deterministic rows.

use std::cmp::Ordering;

use cavity_discord::correlations::{
    atoms_report, atoms_state, is_real, phase_invariance_defect, swap_qubits, CorrelationReport,
};
use cavity_discord::dynamics::{initial_state, steady_state, DynamicsError, Evolution};
use cavity_discord::model::ModelParams;
use cavity_discord::DensityMatrix;
use log::{debug, warn};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::{AxisVar, Mode, ScenarioConfig};

/// Phase-invariance defect above which a real two-atom state is reported.
pub const PHASE_DEFECT_WARN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measures {
    pub discord: f64,
    pub classical_correlation: f64,
    pub mutual_information: f64,
    pub concurrence: f64,
}

impl From<&CorrelationReport> for Measures {
    fn from(r: &CorrelationReport) -> Self {
        Self {
            discord: r.discord,
            classical_correlation: r.classical_correlation,
            mutual_information: r.mutual_information,
            concurrence: r.concurrence,
        }
    }
}

/// One output row. Evolve rows carry `time`, `trace_drift` and
/// `min_eigenvalue`; steady rows carry `residual` and `spectral_gap`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub point: Vec<(AxisVar, f64)>,
    pub time: Option<f64>,
    pub measures: Option<Measures>,
    pub trace_drift: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub residual: Option<f64>,
    pub spectral_gap: Option<f64>,
    pub error: Option<String>,
}

impl Row {
    fn at(point: &[(AxisVar, f64)]) -> Self {
        Row {
            point: point.to_vec(),
            time: None,
            measures: None,
            trace_drift: None,
            min_eigenvalue: None,
            residual: None,
            spectral_gap: None,
            error: None,
        }
    }

    fn failed(point: &[(AxisVar, f64)], time: Option<f64>, error: impl ToString) -> Self {
        Row {
            time,
            error: Some(error.to_string()),
            ..Row::at(point)
        }
    }

    pub fn value(&self, var: AxisVar) -> Option<f64> {
        self.point.iter().find(|(v, _)| *v == var).map(|&(_, x)| x)
    }

    fn cmp_key(&self, other: &Row) -> Ordering {
        self.point
            .iter()
            .zip(&other.point)
            .map(|((_, a), (_, b))| a.total_cmp(b))
            .chain(std::iter::once(
                self.time.unwrap_or(f64::NEG_INFINITY).total_cmp(&other.time.unwrap_or(f64::NEG_INFINITY)),
            ))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

/// Validity extremes over every state the run produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Largest entry of `S ρ_ab S − ρ_ab` with `S` the atom swap.
    pub max_swap_asymmetry: f64,
    /// Largest phase-invariance defect among real two-atom states.
    pub max_phase_defect: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_swap_asymmetry: 0.0,
            max_phase_defect: 0.0,
        }
    }
}

impl Diagnostics {
    pub fn absorb(&mut self, o: &Diagnostics) {
        self.max_trace_error = self.max_trace_error.max(o.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(o.max_hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(o.min_eigenvalue);
        self.max_swap_asymmetry = self.max_swap_asymmetry.max(o.max_swap_asymmetry);
        self.max_phase_defect = self.max_phase_defect.max(o.max_phase_defect);
    }

    /// Folds in the swap asymmetry and phase defect of the two-atom state.
    pub fn check_atoms(&mut self, rho_full: &DensityMatrix) -> Result<(), String> {
        let ab = atoms_state(rho_full).map_err(|e| e.to_string())?;
        let swapped = swap_qubits(&ab).map_err(|e| e.to_string())?;
        self.max_swap_asymmetry = self.max_swap_asymmetry.max(swapped.matrix().max_abs_diff(ab.matrix()));
        if is_real(&ab, 1e-12) {
            let defect = phase_invariance_defect(&ab).map_err(|e| e.to_string())?;
            if defect > PHASE_DEFECT_WARN {
                warn!("real two-atom state with phase-dependent conditional entropy (defect {defect:e})");
            }
            self.max_phase_defect = self.max_phase_defect.max(defect);
        }
        Ok(())
    }
}

/// A state kept for `--dump-states`: the steady state, or the final state of
/// an evolution.
#[derive(Clone, Debug)]
pub struct StateRecord {
    pub point: Vec<(AxisVar, f64)>,
    pub time: Option<f64>,
    pub state: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub mode: Mode,
    pub axes: Vec<AxisVar>,
    pub rows: Vec<Row>,
    pub states: Vec<StateRecord>,
    pub diagnostics: Diagnostics,
}

impl RunResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

struct PointResult {
    rows: Vec<Row>,
    state: Option<StateRecord>,
    diagnostics: Diagnostics,
}

fn run_steady(params: &ModelParams, point: &[(AxisVar, f64)], keep: bool) -> PointResult {
    let mut diagnostics = Diagnostics::default();
    let solved = steady_state(params).map_err(|e| e.to_string()).and_then(|s| {
        let report = atoms_report(&s.state).map_err(|e| e.to_string())?;
        diagnostics.check_atoms(&s.state)?;
        Ok((s, report))
    });
    match solved {
        Ok((s, report)) => {
            diagnostics.max_trace_error = (s.state.trace() - 1.0).abs();
            diagnostics.max_hermiticity_error = s.state.matrix().hermitian_asymmetry();
            diagnostics.min_eigenvalue = s.state.min_eigenvalue();
            let row = Row {
                measures: Some(Measures::from(&report)),
                residual: Some(s.residual),
                spectral_gap: Some(s.spectral_gap),
                ..Row::at(point)
            };
            PointResult {
                rows: vec![row],
                state: keep.then(|| StateRecord {
                    point: point.to_vec(),
                    time: None,
                    state: s.state,
                }),
                diagnostics,
            }
        }
        Err(e) => {
            warn!("steady state at {point:?} failed: {e}");
            PointResult {
                rows: vec![Row::failed(point, None, e)],
                state: None,
                diagnostics,
            }
        }
    }
}

fn run_evolve(cfg: &ScenarioConfig, params: &ModelParams, point: &[(AxisVar, f64)], keep: bool) -> PointResult {
    let mut diagnostics = Diagnostics::default();
    let mut rows = Vec::new();
    let evolution = initial_state(params)
        .and_then(|rho0| Evolution::new(params, &rho0, cfg.time.t_max, cfg.time.dt));
    let evolution = match evolution {
        Ok(e) => e,
        Err(e) => {
            return PointResult {
                rows: vec![Row::failed(point, None, e)],
                state: None,
                diagnostics,
            }
        }
    };
    let last = evolution.len() - 1;
    let mut final_state = None;
    for (k, frame) in evolution.enumerate() {
        let frame = match frame {
            Ok(f) => f,
            Err(e) => {
                rows.push(Row::failed(point, Some(k as f64 * cfg.time.dt), e));
                break;
            }
        };
        diagnostics.max_trace_error = diagnostics.max_trace_error.max(frame.trace_error);
        diagnostics.max_hermiticity_error = diagnostics.max_hermiticity_error.max(frame.hermiticity_error);
        diagnostics.min_eigenvalue = diagnostics.min_eigenvalue.min(frame.min_eigenvalue);
        if k % cfg.time.stride == 0 || k == last {
            let measured = atoms_report(&frame.state)
                .map_err(DynamicsError::from)
                .map_err(|e| e.to_string())
                .and_then(|r| diagnostics.check_atoms(&frame.state).map(|()| r));
            rows.push(match measured {
                Ok(report) => Row {
                    time: Some(frame.time),
                    measures: Some(Measures::from(&report)),
                    trace_drift: Some(frame.cumulative_drift),
                    min_eigenvalue: Some(frame.min_eigenvalue),
                    ..Row::at(point)
                },
                Err(e) => Row::failed(point, Some(frame.time), e),
            });
        }
        if k == last && keep {
            final_state = Some(StateRecord {
                point: point.to_vec(),
                time: Some(frame.time),
                state: frame.state,
            });
        }
    }
    debug!("evolved {point:?}: {} rows", rows.len());
    PointResult {
        rows,
        state: final_state,
        diagnostics,
    }
}

fn run_point(cfg: &ScenarioConfig, point: &[(AxisVar, f64)]) -> PointResult {
    let params = cfg.params_at(point);
    let keep = cfg.dump_states.is_some();
    match cfg.mode {
        Mode::Evolve => run_evolve(cfg, &params, point, keep),
        Mode::Steady | Mode::Sweep => run_steady(&params, point, keep),
    }
}

/// Solves every parameter point. A failing point yields a row with its error
/// instead of aborting the run; rows come back sorted by axis values, then
/// time, whatever order the points were computed in.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunResult {
    let points = cfg.points();
    #[cfg(feature = "parallel")]
    let results: Vec<PointResult> = points.par_iter().map(|p| run_point(cfg, p)).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<PointResult> = points.iter().map(|p| run_point(cfg, p)).collect();

    let mut out = RunResult {
        mode: cfg.mode,
        axes: cfg.axes.iter().map(|a| a.name).collect(),
        rows: Vec::new(),
        states: Vec::new(),
        diagnostics: Diagnostics::default(),
    };
    for r in results {
        out.rows.extend(r.rows);
        out.states.extend(r.state);
        out.diagnostics.absorb(&r.diagnostics);
    }
    out.rows.sort_by(Row::cmp_key);
    out
}
