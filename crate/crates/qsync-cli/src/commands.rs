//! Subcommand implementations. Each command runs the physics, writes one
//! dataset per trajectory/mesh plus a `*_meta.json` sidecar into the output
//! directory, and prints the artifact paths (one `wrote ...` line each) so
//! runs compose well in scripts. All output is deterministic: rerunning a
//! command reproduces every file byte for byte.

use std::path::{Path, PathBuf};

use qsync::analysis::{
    backflow_intervals, run_sweep, sync_lifetime, sync_series_from, BackflowReport,
    SweepObservable, SweepOutcome, SweepSpec, SweepVariable,
};
use qsync::bessel::BesselZeroTable;
use qsync::dynamics::{
    solve_ode, solve_volterra, SystemParams, TimeGrid, DEFAULT_ATOL, DEFAULT_RTOL,
};
use qsync::error::{Error, Result};
use qsync::num_complex::Complex64;
use qsync::state::{density_matrix, husimi_grid, InitialState, QGrid};
use serde_json::json;

use crate::config::{OutputFormat, RunConfig};
use crate::figures::{self, Figure};
use crate::output::{write_atomic, write_metadata, Dataset};

/// Default Husimi mesh; fine enough that the spherical quadrature of Q
/// holds 1 to a few parts in 1e7.
pub const DEFAULT_N_THETA: usize = 65;
pub const DEFAULT_N_PHI: usize = 64;

/// Default lifetime threshold on |S|.
pub const DEFAULT_EPSILON: f64 = 0.01;

fn params_json(p: &SystemParams) -> serde_json::Value {
    json!({
        "lambda_over_gamma": p.lambda,
        "d_over_gamma": p.d,
        "omega_over_gamma": p.omega,
        "modulation_on": p.modulation_on,
    })
}

fn grid_json(grid: &TimeGrid, params: &SystemParams) -> serde_json::Value {
    json!({
        "t_max_gamma": grid.t_max,
        "n_steps": grid.n_steps,
        "dt": grid.dt(),
        "resolution_warnings": grid.resolution_warnings(params),
    })
}

fn grid_json_plain(grid: &TimeGrid) -> serde_json::Value {
    json!({
        "t_max_gamma": grid.t_max,
        "n_steps": grid.n_steps,
        "dt": grid.dt(),
    })
}

fn init_json(init: &InitialState) -> serde_json::Value {
    json!({
        "c_g": [init.c_g.re, init.c_g.im],
        "c_e": [init.c_e.re, init.c_e.im],
    })
}

fn backflow_json(report: &BackflowReport) -> serde_json::Value {
    json!({
        "intervals": report.intervals,
        "total_gain": report.total_gain,
        "markovian_like": report.is_markovian_like(),
    })
}

fn push_qgrid(data: &mut Dataset, q: &QGrid) {
    for (i, &theta) in q.thetas.iter().enumerate() {
        for (j, &phi) in q.phis.iter().enumerate() {
            data.push(vec![theta, phi, q.value(i, j)]);
        }
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

/// `simulate`: integrate B(t) over the configured window and write the
/// trajectory. With `verify`, re-solve via the Volterra quadrature route and
/// record the sup-norm disagreement of |B|.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, verify: bool) -> Result<()> {
    cfg.validate()?;
    let params = cfg.params();
    let grid = cfg.grid()?;
    let init = cfg.initial_state()?;
    let traj = solve_ode(&params, &grid)?;

    let mut data = Dataset::new("amplitude", vec!["gamma_t", "re_b", "im_b", "pop_e"]);
    for (i, b) in traj.values.iter().enumerate() {
        data.push(vec![traj.time(i), b.re, b.im, b.norm_sqr()]);
    }

    let mut meta = json!({
        "command": "simulate",
        "config": cfg.serialize(),
        "params": params_json(&params),
        "grid": grid_json(&grid, &params),
        "initial_state": init_json(&init),
        "solver": {
            "method": "dormand_prince_5_4",
            "rtol": DEFAULT_RTOL,
            "atol": DEFAULT_ATOL,
        },
        "final_abs_b": traj.final_abs(),
        "max_abs_b": traj.max_abs(),
        "min_abs_b": traj.min_abs(),
    });
    if verify {
        let check = solve_volterra(&params, &grid)?;
        let sup = traj.sup_abs_diff(&check);
        meta["verify_sup_abs_diff"] = json!(sup);
        println!("verify: sup |B_ode - B_volterra| = {sup:.3e}");
    }

    let paths = vec![
        data.write(out, cfg.output_format)?,
        write_metadata(out, "amplitude_meta", &meta)?,
    ];
    report_written(&paths);
    Ok(())
}

/// `sync`: S(phi, t) along the trajectory, its lifetime against `epsilon`,
/// and the backflow intervals of the survival probability.
pub fn cmd_sync(cfg: &RunConfig, out: &Path, epsilon: f64, verify: bool) -> Result<()> {
    cfg.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let params = cfg.params();
    let grid = cfg.grid()?;
    let init = cfg.initial_state()?;
    let traj = solve_ode(&params, &grid)?;
    let series = sync_series_from(&traj, &init, cfg.phi)?;
    let lifetime = sync_lifetime(&series, epsilon)?;
    let backflow = backflow_intervals(&traj);

    let mut data = Dataset::new("sync", vec!["gamma_t", "s_value"]);
    for (i, s) in series.values.iter().enumerate() {
        data.push(vec![series.time(i), *s]);
    }
    let mut meta = json!({
        "command": "sync",
        "config": cfg.serialize(),
        "params": params_json(&params),
        "grid": grid_json(&grid, &params),
        "initial_state": init_json(&init),
        "phi": cfg.phi,
        "epsilon": epsilon,
        "lifetime_gamma_t": lifetime,
        "max_abs_s": series.max_abs(),
        "final_abs_s": series.final_abs(),
        "backflow": backflow_json(&backflow),
    });
    if verify {
        let check = solve_volterra(&params, &grid)?;
        let sup = traj.sup_abs_diff(&check);
        meta["verify_sup_abs_diff"] = json!(sup);
        println!("verify: sup |B_ode - B_volterra| = {sup:.3e}");
    }

    println!("sync lifetime (epsilon = {epsilon}): gamma t = {lifetime:.6}");
    let paths = vec![
        data.write(out, cfg.output_format)?,
        write_metadata(out, "sync_meta", &meta)?,
    ];
    report_written(&paths);
    Ok(())
}

/// `qfunc`: Husimi Q meshes at the requested snapshot times. Times must lie
/// inside the simulated window; each snaps to the nearest grid point.
pub fn cmd_qfunc(
    cfg: &RunConfig,
    out: &Path,
    times: &[f64],
    n_theta: usize,
    n_phi: usize,
    verify: bool,
) -> Result<()> {
    cfg.validate()?;
    let params = cfg.params();
    let grid = cfg.grid()?;
    let init = cfg.initial_state()?;
    let requested: Vec<f64> = if times.is_empty() {
        vec![grid.t_max]
    } else {
        times.to_vec()
    };
    for &t in &requested {
        if !t.is_finite() || !(0.0..=grid.t_max).contains(&t) {
            return Err(Error::invalid(format!(
                "snapshot time {t} lies outside the simulated window [0, {}]",
                grid.t_max
            )));
        }
    }
    let traj = solve_ode(&params, &grid)?;

    let mut snapshots = Vec::new();
    let mut paths = Vec::new();
    for &t in &requested {
        let idx = ((t / grid.dt()).round() as usize).min(grid.n_steps);
        let b = traj.values[idx];
        let state = density_matrix(&init, b)?;
        let q = husimi_grid(&state, n_theta, n_phi)?;
        let name = format!("qfunc_t_{}", figures::value_label(t));
        let mut data = Dataset::new(name.clone(), vec!["theta", "phi", "q"]);
        push_qgrid(&mut data, &q);
        paths.push(data.write(out, cfg.output_format)?);
        let (max_theta, max_phi, max_q) = q.max_point();
        snapshots.push(json!({
            "dataset": name,
            "requested_t": t,
            "grid_t": traj.time(idx),
            "grid_index": idx,
            "abs_b": b.norm(),
            "normalization": q.normalization,
            "max": { "theta": max_theta, "phi": max_phi, "q": max_q },
        }));
    }
    let mut meta = json!({
        "command": "qfunc",
        "config": cfg.serialize(),
        "params": params_json(&params),
        "grid": grid_json(&grid, &params),
        "initial_state": init_json(&init),
        "mesh": { "n_theta": n_theta, "n_phi": n_phi },
        "snapshots": snapshots,
    });
    if verify {
        let check = solve_volterra(&params, &grid)?;
        let sup = traj.sup_abs_diff(&check);
        meta["verify_sup_abs_diff"] = json!(sup);
        println!("verify: sup |B_ode - B_volterra| = {sup:.3e}");
    }
    paths.push(write_metadata(out, "qfunc_meta", &meta)?);
    report_written(&paths);
    Ok(())
}

fn variable_name(v: SweepVariable) -> &'static str {
    match v {
        SweepVariable::Omega => "omega",
        SweepVariable::D => "d",
        SweepVariable::Ratio => "ratio",
    }
}

fn observable_json(o: &SweepObservable) -> serde_json::Value {
    match o {
        SweepObservable::Sync => json!({ "kind": "sync" }),
        SweepObservable::Amplitude => json!({ "kind": "amplitude" }),
        SweepObservable::QSnapshot { n_theta, n_phi } => {
            json!({ "kind": "qgrid", "n_theta": n_theta, "n_phi": n_phi })
        }
    }
}

/// `sweep`: rerun the configured window for each swept value and record the
/// chosen observable. Rows that fail (bad parameters, divergence) land in
/// the metadata as error strings without aborting the remaining rows. With
/// `verify`, a subset of successful rows (first, middle, last) is re-run
/// through the Volterra quadrature route and the disagreement recorded.
pub fn cmd_sweep(
    cfg: &RunConfig,
    out: &Path,
    variable: SweepVariable,
    values: Vec<f64>,
    ratio_lock: Option<f64>,
    observable: SweepObservable,
    verify: bool,
) -> Result<()> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let init = cfg.initial_state()?;
    let mut spec = SweepSpec::new(cfg.params(), variable, values, observable);
    spec.ratio_lock = ratio_lock;
    spec.phi = cfg.phi;
    let table = run_sweep(&spec, &init, &grid)?;

    let mut rows_meta = Vec::new();
    let mut paths = Vec::new();
    for row in &table.rows {
        let name = format!("sweep_{}", figures::value_label(row.value));
        match &row.outcome {
            Ok(SweepOutcome::Sync {
                lifetime,
                max_abs,
                final_abs,
                series,
            }) => {
                let mut data = Dataset::new(name.clone(), vec!["gamma_t", "s_value"]);
                for (i, s) in series.values.iter().enumerate() {
                    data.push(vec![series.time(i), *s]);
                }
                paths.push(data.write(out, cfg.output_format)?);
                rows_meta.push(json!({
                    "value": row.value,
                    "params": params_json(&row.params),
                    "dataset": name,
                    "lifetime_gamma_t": lifetime,
                    "max_abs_s": max_abs,
                    "final_abs_s": final_abs,
                }));
            }
            Ok(SweepOutcome::Amplitude {
                min_abs,
                final_abs,
                backflow,
                trajectory,
            }) => {
                let mut data =
                    Dataset::new(name.clone(), vec!["gamma_t", "re_b", "im_b", "pop_e"]);
                for (i, b) in trajectory.values.iter().enumerate() {
                    data.push(vec![trajectory.time(i), b.re, b.im, b.norm_sqr()]);
                }
                paths.push(data.write(out, cfg.output_format)?);
                rows_meta.push(json!({
                    "value": row.value,
                    "params": params_json(&row.params),
                    "dataset": name,
                    "min_abs_b": min_abs,
                    "final_abs_b": final_abs,
                    "backflow": backflow_json(backflow),
                }));
            }
            Ok(SweepOutcome::QSnapshot {
                normalization,
                max_q,
                grid: qgrid,
            }) => {
                let mut data = Dataset::new(name.clone(), vec!["theta", "phi", "q"]);
                push_qgrid(&mut data, qgrid);
                paths.push(data.write(out, cfg.output_format)?);
                rows_meta.push(json!({
                    "value": row.value,
                    "params": params_json(&row.params),
                    "dataset": name,
                    "normalization": normalization,
                    "max_q": max_q,
                }));
            }
            Err(message) => {
                eprintln!("sweep row {} failed: {message}", row.value);
                rows_meta.push(json!({
                    "value": row.value,
                    "params": params_json(&row.params),
                    "error": message,
                }));
            }
        }
    }
    if verify {
        // The rows ran on the ODE path; cross-check a cheap, deterministic
        // subset (first, middle, last successful row) against the Volterra
        // quadrature route.
        let good: Vec<usize> = table
            .rows
            .iter()
            .enumerate()
            .filter(|(_, row)| row.outcome.is_ok())
            .map(|(i, _)| i)
            .collect();
        let mut subset = vec![];
        if let (Some(&first), Some(&last)) = (good.first(), good.last()) {
            subset.extend([first, good[good.len() / 2], last]);
            subset.dedup();
        }
        for i in subset {
            let row_params = &table.rows[i].params;
            let a = solve_ode(row_params, &grid)?;
            let b = solve_volterra(row_params, &grid)?;
            let sup = a.sup_abs_diff(&b);
            rows_meta[i]["verify_sup_abs_diff"] = json!(sup);
            println!(
                "verify row {}: sup |B_ode - B_volterra| = {sup:.3e}",
                table.rows[i].value
            );
        }
    }
    let meta = json!({
        "command": "sweep",
        "config": cfg.serialize(),
        "variable": variable_name(spec.variable),
        "values": spec.values,
        "ratio_lock": spec.ratio_lock,
        "observable": observable_json(&spec.observable),
        "phi": spec.phi,
        "sync_epsilon": spec.sync_epsilon,
        "grid": grid_json(&grid, &cfg.params()),
        "initial_state": init_json(&init),
        "rows": rows_meta,
    });
    paths.push(write_metadata(out, "sweep_meta", &meta)?);
    report_written(&paths);
    Ok(())
}

/// `zeros`: print the first `count` positive zeros of `J_order` to stdout,
/// ten decimal places each (at least ten significant digits; every zero
/// exceeds 1).
pub fn cmd_zeros(order: u32, count: usize) -> Result<()> {
    let table = BesselZeroTable::compute(order, count)?;
    println!("  k  j_{{{},k}}", table.order);
    for (i, z) in table.zeros.iter().enumerate() {
        println!("{:>3}  {z:.10}", i + 1);
    }
    Ok(())
}

/// `figures`: run one canned recipe and write its datasets, metadata and a
/// companion gnuplot script.
pub fn cmd_figures(id: &str, out: &Path, format: OutputFormat) -> Result<()> {
    let figure = figures::recipe(id)?;
    let init = InitialState::equal_superposition();
    let mut paths = Vec::new();
    let meta = match &figure {
        Figure::Husimi {
            id,
            note,
            mesh,
            panels,
        } => {
            let mut panels_meta = Vec::new();
            for panel in panels {
                let (b, grid_desc) = if panel.snapshot_t == 0.0 {
                    (Complex64::new(1.0, 0.0), serde_json::Value::Null)
                } else {
                    let grid = TimeGrid::default_for(&panel.params, panel.snapshot_t)?;
                    let traj = solve_ode(&panel.params, &grid)?;
                    (
                        *traj.values.last().expect("grid has >= 2 points"),
                        grid_json(&grid, &panel.params),
                    )
                };
                let state = density_matrix(&init, b)?;
                let q = husimi_grid(&state, mesh.0, mesh.1)?;
                let name = format!("{id}_{}", panel.label);
                let mut data = Dataset::new(name.clone(), vec!["theta", "phi", "q"]);
                push_qgrid(&mut data, &q);
                paths.push(data.write(out, format)?);
                let (max_theta, max_phi, max_q) = q.max_point();
                let mut panel_meta = json!({
                    "label": panel.label,
                    "dataset": name,
                    "params": params_json(&panel.params),
                    "snapshot_t": panel.snapshot_t,
                    "abs_b": b.norm(),
                    "normalization": q.normalization,
                    "max": { "theta": max_theta, "phi": max_phi, "q": max_q },
                    "grid": grid_desc,
                });
                if let Some(r) = panel.drive_ratio {
                    panel_meta["d_over_omega"] = json!(r);
                }
                panels_meta.push(panel_meta);
            }
            json!({
                "figure": id,
                "kind": "husimi",
                "note": note,
                "mesh": { "n_theta": mesh.0, "n_phi": mesh.1 },
                "initial_state": init_json(&init),
                "panels": panels_meta,
            })
        }
        Figure::Sync {
            id,
            note,
            grid,
            curves,
        } => {
            let mut curves_meta = Vec::new();
            for curve in curves {
                let traj = solve_ode(&curve.params, grid)?;
                let series = sync_series_from(&traj, &init, 0.0)?;
                let lifetime = sync_lifetime(&series, DEFAULT_EPSILON)?;
                let name = format!("{id}_{}", curve.label);
                let mut data = Dataset::new(name.clone(), vec!["gamma_t", "s_value"]);
                for (i, s) in series.values.iter().enumerate() {
                    data.push(vec![series.time(i), *s]);
                }
                paths.push(data.write(out, format)?);
                let mut curve_meta = json!({
                    "label": curve.label,
                    "dataset": name,
                    "params": params_json(&curve.params),
                    "lifetime_gamma_t": lifetime,
                    "max_abs_s": series.max_abs(),
                    "final_abs_s": series.final_abs(),
                    "resolution_warnings": grid.resolution_warnings(&curve.params),
                });
                if let Some(r) = curve.drive_ratio {
                    curve_meta["d_over_omega"] = json!(r);
                }
                curves_meta.push(curve_meta);
            }
            json!({
                "figure": id,
                "kind": "sync",
                "note": note,
                "grid": grid_json_plain(grid),
                "phi": 0.0,
                "sync_epsilon": DEFAULT_EPSILON,
                "initial_state": init_json(&init),
                "curves": curves_meta,
            })
        }
    };
    paths.push(write_metadata(out, &format!("{}_meta", figure.id()), &meta)?);
    let script_path = out.join(format!("{}.gnuplot", figure.id()));
    write_atomic(&script_path, figures::gnuplot_script(&figure).as_bytes())?;
    paths.push(script_path);
    report_written(&paths);
    Ok(())
}
