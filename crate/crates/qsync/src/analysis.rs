//! Derived diagnostics: synchronization lifetime, information backflow, and
//! parameter sweeps (including the Bessel-zero drive tuning).

use crate::bessel::jn_zero;
use crate::dynamics::{solve_ode, AmplitudeTrajectory, SystemParams, TimeGrid};
use crate::error::{Error, Result};
use crate::state::{
    density_matrix, husimi_grid, sync_measure, InitialState, QGrid, SyncSeries,
};

/// `S(phi, t)` along a freshly solved trajectory.
pub fn sync_series(
    params: &SystemParams,
    init: &InitialState,
    grid: &TimeGrid,
    phi: f64,
) -> Result<SyncSeries> {
    let traj = solve_ode(params, grid)?;
    sync_series_from(&traj, init, phi)
}

/// `S(phi, t)` derived from an existing trajectory, so callers that need
/// both the amplitude and the phase measure solve only once.
pub fn sync_series_from(
    traj: &AmplitudeTrajectory,
    init: &InitialState,
    phi: f64,
) -> Result<SyncSeries> {
    if !phi.is_finite() {
        return Err(Error::invalid(format!("phi must be finite, got {phi}")));
    }
    let values = traj
        .values
        .iter()
        .map(|&b| Ok(sync_measure(&density_matrix(init, b)?, phi)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SyncSeries {
        phi,
        grid: traj.grid,
        values,
    })
}

/// Time at which `|S|` falls below `epsilon` for good (within the window).
///
/// Returns 0 when the series never reaches `epsilon`, the window end when it
/// never drops below it, and the linearly interpolated crossing otherwise.
pub fn sync_lifetime(series: &SyncSeries, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let last_locked = series
        .values
        .iter()
        .rposition(|s| s.abs() >= epsilon);
    let Some(i) = last_locked else {
        return Ok(0.0);
    };
    if i == series.values.len() - 1 {
        return Ok(series.grid.t_max); // still locked when the window closes
    }
    let s_hi = series.values[i].abs();
    let s_lo = series.values[i + 1].abs();
    let frac = (s_hi - epsilon) / (s_hi - s_lo);
    Ok(series.time(i) + frac * series.grid.dt())
}

/// Maximal intervals on which the excited-state survival probability
/// `|B(t)|^2` grows: memory-induced information backflow from the reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct BackflowReport {
    /// Disjoint, time-ordered `(start, end)` intervals.
    pub intervals: Vec<(f64, f64)>,
    /// Total probability regained, summed over the intervals.
    pub total_gain: f64,
}

impl BackflowReport {
    pub fn is_markovian_like(&self) -> bool {
        self.intervals.is_empty()
    }
}

pub fn backflow_intervals(traj: &AmplitudeTrajectory) -> BackflowReport {
    // Ignore increments at the rounding floor so weak-coupling monotone
    // decay does not produce spurious micro-intervals.
    const GAIN_FLOOR: f64 = 1e-12;
    let population: Vec<f64> = traj.values.iter().map(|b| b.norm_sqr()).collect();
    let mut intervals = Vec::new();
    let mut total_gain = 0.0;
    let mut run_start: Option<usize> = None;
    for i in 0..population.len() - 1 {
        let rising = population[i + 1] > population[i] + GAIN_FLOOR;
        match (rising, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(start)) => {
                intervals.push((traj.time(start), traj.time(i)));
                total_gain += population[i] - population[start];
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = run_start {
        let end = population.len() - 1;
        intervals.push((traj.time(start), traj.time(end)));
        total_gain += population[end] - population[start];
    }
    BackflowReport {
        intervals,
        total_gain,
    }
}

/// Local maxima of `|S(t)|`: the oscillation envelope used to read decay
/// rates off strongly non-Markovian series.
pub fn envelope(series: &SyncSeries) -> Vec<(f64, f64)> {
    let abs: Vec<f64> = series.values.iter().map(|s| s.abs()).collect();
    let mut peaks = Vec::new();
    for i in 1..abs.len().saturating_sub(1) {
        if abs[i] >= abs[i - 1] && abs[i] > abs[i + 1] {
            peaks.push((series.time(i), abs[i]));
        }
    }
    peaks
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Drive frequency; with `ratio_lock` set, `d` follows as `lock * omega`.
    Omega,
    /// Modulation amplitude at fixed frequency.
    D,
    /// Drive ratio `d / omega` at fixed frequency.
    Ratio,
}

/// Observable recorded per sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepObservable {
    /// Sync series, lifetime and extrema.
    Sync,
    /// Amplitude trajectory, retention and backflow.
    Amplitude,
    /// Husimi mesh at the end of the window.
    QSnapshot { n_theta: usize, n_phi: usize },
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Locks `d = ratio_lock * omega` during frequency sweeps.
    pub ratio_lock: Option<f64>,
    pub observable: SweepObservable,
    /// Observation phase for sync observables.
    pub phi: f64,
    /// Lifetime threshold for sync observables.
    pub sync_epsilon: f64,
}

impl SweepSpec {
    pub fn new(
        base: SystemParams,
        variable: SweepVariable,
        values: Vec<f64>,
        observable: SweepObservable,
    ) -> Self {
        SweepSpec {
            base,
            variable,
            values,
            ratio_lock: None,
            observable,
            phi: 0.0,
            sync_epsilon: 0.01,
        }
    }

    /// Parameter set for one swept value. Always well-formed as a struct;
    /// validation happens row by row inside [`run_sweep`].
    pub fn row_params(&self, value: f64) -> SystemParams {
        let mut p = self.base;
        p.modulation_on = true;
        match self.variable {
            SweepVariable::Omega => {
                p.omega = value;
                if let Some(lock) = self.ratio_lock {
                    p.d = lock * value;
                }
            }
            SweepVariable::D => p.d = value,
            SweepVariable::Ratio => p.d = value * self.base.omega,
        }
        p
    }
}

#[derive(Debug, Clone)]
pub enum SweepOutcome {
    Sync {
        lifetime: f64,
        max_abs: f64,
        final_abs: f64,
        series: SyncSeries,
    },
    Amplitude {
        min_abs: f64,
        final_abs: f64,
        backflow: BackflowReport,
        trajectory: AmplitudeTrajectory,
    },
    QSnapshot {
        normalization: f64,
        max_q: f64,
        grid: QGrid,
    },
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub params: SystemParams,
    /// Per-row failures (bad parameters, solver divergence) land here
    /// without aborting the remaining rows.
    pub outcome: std::result::Result<SweepOutcome, String>,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub phi: f64,
    pub rows: Vec<SweepRow>,
}

pub fn run_sweep(spec: &SweepSpec, init: &InitialState, grid: &TimeGrid) -> Result<SweepTable> {
    if spec.values.is_empty() {
        return Err(Error::invalid("sweep needs at least one value"));
    }
    if spec.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sweep values must be finite"));
    }
    if !(spec.sync_epsilon > 0.0 && spec.sync_epsilon.is_finite()) {
        return Err(Error::invalid("sync_epsilon must be positive"));
    }
    let rows = spec
        .values
        .iter()
        .map(|&value| {
            let params = spec.row_params(value);
            let outcome = sweep_row_outcome(spec, &params, init, grid)
                .map_err(|e| e.to_string());
            SweepRow {
                value,
                params,
                outcome,
            }
        })
        .collect();
    Ok(SweepTable {
        variable: spec.variable,
        phi: spec.phi,
        rows,
    })
}

fn sweep_row_outcome(
    spec: &SweepSpec,
    params: &SystemParams,
    init: &InitialState,
    grid: &TimeGrid,
) -> Result<SweepOutcome> {
    params.validate()?;
    let trajectory = solve_ode(params, grid)?;
    match spec.observable {
        SweepObservable::Sync => {
            let series = sync_series_from(&trajectory, init, spec.phi)?;
            Ok(SweepOutcome::Sync {
                lifetime: sync_lifetime(&series, spec.sync_epsilon)?,
                max_abs: series.max_abs(),
                final_abs: series.final_abs(),
                series,
            })
        }
        SweepObservable::Amplitude => Ok(SweepOutcome::Amplitude {
            min_abs: trajectory.min_abs(),
            final_abs: trajectory.final_abs(),
            backflow: backflow_intervals(&trajectory),
            trajectory,
        }),
        SweepObservable::QSnapshot { n_theta, n_phi } => {
            let b = *trajectory.values.last().expect("grid has >= 3 points");
            let state = density_matrix(init, b)?;
            let grid = husimi_grid(&state, n_theta, n_phi)?;
            let max_q = grid.max_point().2;
            Ok(SweepOutcome::QSnapshot {
                normalization: grid.normalization,
                max_q,
                grid,
            })
        }
    }
}

/// One row of a Bessel-zero tuning comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    /// 0 for the untuned reference, otherwise the zero index `k`.
    pub k: u32,
    pub params: SystemParams,
    pub drive_ratio: f64,
    pub lifetime: f64,
    pub max_abs: f64,
    pub final_abs: f64,
    pub series: SyncSeries,
}

#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn reference(&self) -> &ComparisonRow {
        &self.rows[0]
    }

    pub fn tuned(&self) -> &[ComparisonRow] {
        &self.rows[1..]
    }
}

/// Compare the sync lifetime of the untuned base drive against drives tuned
/// to successive zeros of `J_0` (`d = j_{0,k} omega`), everything else held
/// fixed. The first row is always the untuned reference.
pub fn bessel_zero_comparison(
    base: &SystemParams,
    ks: &[u32],
    init: &InitialState,
    grid: &TimeGrid,
    phi: f64,
    epsilon: f64,
) -> Result<ComparisonTable> {
    base.validate()?;
    if !base.modulation_on {
        return Err(Error::invalid(
            "zero-tuning comparison needs a modulated base drive",
        ));
    }
    if ks.is_empty() {
        return Err(Error::invalid("need at least one zero index"));
    }
    if ks.contains(&0) {
        return Err(Error::invalid("zero indices count from k = 1"));
    }
    let mut rows = Vec::with_capacity(ks.len() + 1);
    rows.push(comparison_row(0, *base, init, grid, phi, epsilon)?);
    for &k in ks {
        let mut params = *base;
        params.d = jn_zero(0, k)? * base.omega;
        rows.push(comparison_row(k, params, init, grid, phi, epsilon)?);
    }
    Ok(ComparisonTable { rows })
}

fn comparison_row(
    k: u32,
    params: SystemParams,
    init: &InitialState,
    grid: &TimeGrid,
    phi: f64,
    epsilon: f64,
) -> Result<ComparisonRow> {
    let series = sync_series(&params, init, grid, phi)?;
    Ok(ComparisonRow {
        k,
        drive_ratio: params.drive_ratio(),
        lifetime: sync_lifetime(&series, epsilon)?,
        max_abs: series.max_abs(),
        final_abs: series.final_abs(),
        series,
        params,
    })
}
