//! Run orchestration: build a scenario from a [`RunConfig`], integrate it,
//! and emit the diagnostics CSV, optional snapshots, and the JSON
//! manifest. Also hosts the resolution sweep with its Richardson
//! convergence summary and the small query commands used by the CLI.

use crate::config::{EosSpec, RunConfig};
use crate::diag;
use crate::eos::{BarotropicFluid, EntropicPolytrope, EquationOfState};
use crate::evolve::{self, EvolveParams};
use crate::grid::{FieldSet, Grid};
use crate::initial::ConstraintReport;
use crate::output::{self, CsvWriter, CSV_COLUMNS, CSV_SCHEMA};
use crate::scenario;
use crate::state::State;
use crate::{Error, Result};
use std::path::PathBuf;

/// Files and summary data produced by [`run`].
#[derive(Debug)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub rows: usize,
    pub final_time: f64,
}

fn evolve_params(cfg: &RunConfig) -> EvolveParams {
    EvolveParams {
        fd_order: cfg.fd_order,
        cfl: cfg.cfl,
        ko_eps: cfg.ko_eps,
        kappa: cfg.kappa,
    }
}

fn sobolev_patch(cfg: &RunConfig) -> usize {
    cfg.sobolev_patch
        .unwrap_or((cfg.n / 2).max(cfg.fd_order + 1))
        .min(cfg.n)
}

/// One diagnostics CSV row (see [`CSV_COLUMNS`] for the schema).
fn diagnostics_row<E: EquationOfState>(
    t: f64,
    fs: &FieldSet,
    eos: &E,
    cfg: &RunConfig,
) -> Result<Vec<f64>> {
    let params = evolve_params(cfg);
    let res = diag::residual_fields(fs, eos, &params)?;
    let norms = res.norms();
    let patch = sobolev_patch(cfg);
    let h1 = |field: &[f64]| diag::ul_sobolev_norm(&fs.grid, field, 1, patch, cfg.fd_order);
    let monitors = diag::trace_monitors(fs, eos);
    let z0 = &fs.data[0];
    let st0 = State(*z0);
    let hubble_trace = (0..3).map(|a| st0.extr(a, a)).sum::<f64>() / 3.0;
    let speeds = diag::characteristic_speeds(z0, eos, cfg.kappa, [1.0, 0.0, 0.0])?;
    let row = vec![
        t,
        st0.rho(),
        hubble_trace,
        norms.torsion,
        h1(&res.torsion)?,
        norms.riemann_decomp,
        h1(&res.riemann_decomp)?,
        norms.friedrich,
        h1(&res.friedrich)?,
        norms.euler,
        h1(&res.euler)?,
        norms.euler_time,
        h1(&res.euler_time)?,
        norms.entropy_grad,
        h1(&res.entropy_grad)?,
        monitors.weyl_e_trace,
        monitors.weyl_b_trace,
        monitors.eos_drift,
        *speeds.first().unwrap(),
        *speeds.last().unwrap(),
        diag::m0_min_eigenvalue(z0, eos, cfg.kappa)?,
        diag::induced_metric_max_eigenvalue(z0)?,
    ];
    debug_assert_eq!(row.len(), CSV_COLUMNS.len());
    Ok(row)
}

fn manifest_value(
    cfg: &RunConfig,
    grid: &Grid,
    eos_name: &str,
    wall_s: f64,
    exit_status: i32,
    error: Option<&str>,
    outputs: &[PathBuf],
) -> serde_json::Value {
    serde_json::json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "schema": { "manifest": 1, "csv": CSV_SCHEMA, "csv_columns": CSV_COLUMNS },
        "config": {
            "scenario": cfg.scenario.name(),
            "n": cfg.n,
            "t_final": cfg.t_final,
            "cfl": cfg.cfl,
            "fd_order": cfg.fd_order,
            "ko": cfg.ko_eps,
            "kappa": cfg.kappa,
            "cadence": cfg.cadence,
            "eos": cfg.eos.label(),
            "rmass": cfg.scenario_params.rmass,
            "entropy": cfg.scenario_params.entropy,
            "amplitude": cfg.scenario_params.amplitude,
            "entropy_amplitude": cfg.scenario_params.entropy_amplitude,
            "beta": cfg.scenario_params.beta,
            "snapshots": cfg.write_snapshots,
            "sobolev_patch": sobolev_patch(cfg),
        },
        "overrides": cfg.overrides,
        "grid": { "n": grid.n, "h": grid.h },
        "eos": eos_name,
        "wall_time_s": wall_s,
        "exit_status": exit_status,
        "error": error,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    })
}

/// Execute a full run: scenario construction, RK4 integration to
/// `t_final` with diagnostics at the configured cadence, and file output.
/// The manifest is written even when the evolution fails, with the error
/// and a nonzero recorded exit status.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    match &cfg.eos {
        EosSpec::EntropicPolytrope { gamma } => run_with(&EntropicPolytrope::new(*gamma), cfg, None),
        EosSpec::Barotropic { k, gamma } => run_with(&BarotropicFluid::new(*k, *gamma), cfg, None),
    }
}

fn run_with<E: EquationOfState>(
    eos: &E,
    cfg: &RunConfig,
    file_tag: Option<&str>,
) -> Result<RunOutcome> {
    let start = std::time::Instant::now();
    std::fs::create_dir_all(&cfg.out)?;
    let tag = file_tag.unwrap_or("");
    let csv_path = cfg.out.join(format!("diag{tag}.csv"));
    let manifest_path = cfg.out.join(format!("manifest{tag}.json"));

    let grid = Grid::unit_box(cfg.n);
    let params = evolve_params(cfg);
    let mut fs = scenario::build(
        cfg.scenario,
        grid,
        eos,
        cfg.kappa,
        cfg.fd_order,
        &cfg.scenario_params,
    )?;

    let dt0 = evolve::cfl_dt(grid.h, &params);
    let steps = if cfg.t_final > 0.0 {
        (cfg.t_final / dt0).ceil().max(1.0) as usize
    } else {
        0
    };
    let dt = if steps > 0 { cfg.t_final / steps as f64 } else { 0.0 };

    let mut csv = CsvWriter::new(csv_path.clone());
    let mut snapshots = Vec::new();
    let mut rows = 0usize;
    let mut t = 0.0;

    let mut ws = evolve::Workspace::new(&fs);
    let mut failure: Option<Error> = None;
    'run: {
        match diagnostics_row(t, &fs, eos, cfg) {
            Ok(row) => {
                csv.row(&row);
                rows += 1;
            }
            Err(e) => {
                failure = Some(e);
                break 'run;
            }
        }
        if cfg.write_snapshots {
            let p = cfg.out.join(format!("snapshot{tag}_t0.bin"));
            if let Err(e) = output::write_snapshot(&p, t, &fs) {
                failure = Some(e);
                break 'run;
            }
            snapshots.push(p);
        }
        for step in 1..=steps {
            if let Err(e) = evolve::step(&mut fs, eos, &params, dt, &mut ws) {
                failure = Some(e);
                break 'run;
            }
            t = dt * step as f64;
            if step % cfg.cadence == 0 || step == steps {
                match diagnostics_row(t, &fs, eos, cfg) {
                    Ok(row) => {
                        csv.row(&row);
                        rows += 1;
                    }
                    Err(e) => {
                        failure = Some(e);
                        break 'run;
                    }
                }
            }
        }
        if cfg.write_snapshots && steps > 0 {
            let p = cfg.out.join(format!("snapshot{tag}_final.bin"));
            if let Err(e) = output::write_snapshot(&p, t, &fs) {
                failure = Some(e);
                break 'run;
            }
            snapshots.push(p);
        }
    }

    let csv_path = csv.finish()?;
    let mut outputs = vec![csv_path.clone()];
    outputs.extend(snapshots.iter().cloned());
    let (status, err_text) = match &failure {
        None => (0, None),
        Some(e) => (3, Some(e.to_string())),
    };
    let manifest = manifest_value(
        cfg,
        &grid,
        &eos.name(),
        start.elapsed().as_secs_f64(),
        status,
        err_text.as_deref(),
        &outputs,
    );
    output::write_manifest(&manifest_path, &manifest)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(RunOutcome {
            csv: csv_path,
            manifest: manifest_path,
            snapshots,
            rows,
            final_time: t,
        }),
    }
}

/// Result of a resolution sweep: per-resolution run outcomes plus the
/// Richardson convergence orders of the residual sup norms between
/// consecutive resolutions.
#[derive(Debug)]
pub struct SweepOutcome {
    pub runs: Vec<RunOutcome>,
    pub summary: PathBuf,
    /// `(quantity, errors per n, orders between consecutive n)`.
    pub orders: Vec<(String, Vec<f64>, Vec<f64>)>,
}

/// Residual columns used for the convergence summary.
const SWEEP_QUANTITIES: &[&str] = &[
    "torsion_linf",
    "riemann_decomp_linf",
    "friedrich_linf",
    "euler_linf",
    "entropy_grad_linf",
];

fn csv_final_row(path: &PathBuf) -> Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Other("empty CSV".into()))?
        .split(',')
        .collect();
    let last = lines
        .last()
        .ok_or_else(|| Error::Other("CSV has no data rows".into()))?;
    let vals: Vec<f64> = last
        .split(',')
        .map(|s| s.parse().map_err(|_| Error::Other(format!("bad CSV value {s:?}"))))
        .collect::<Result<_>>()?;
    Ok(header
        .iter()
        .zip(vals)
        .map(|(h, v)| (h.to_string(), v))
        .collect())
}

/// Run the configured scenario at each resolution in `ns` and summarize
/// the convergence of the final-time residual norms.
pub fn sweep(cfg: &RunConfig, ns: &[usize]) -> Result<SweepOutcome> {
    if ns.len() < 2 {
        return Err(Error::Config("sweep needs at least two resolutions".into()));
    }
    let mut runs = Vec::new();
    for &n in ns {
        let mut sub = cfg.clone();
        sub.n = n;
        // keep the patch proportional to the grid so norms are comparable
        sub.sobolev_patch = None;
        let tag = format!("_n{n}");
        let outcome = match &cfg.eos {
            EosSpec::EntropicPolytrope { gamma } => {
                run_with(&EntropicPolytrope::new(*gamma), &sub, Some(&tag))
            }
            EosSpec::Barotropic { k, gamma } => {
                run_with(&BarotropicFluid::new(*k, *gamma), &sub, Some(&tag))
            }
        }?;
        runs.push(outcome);
    }
    let finals: Vec<Vec<(String, f64)>> = runs
        .iter()
        .map(|r| csv_final_row(&r.csv))
        .collect::<Result<_>>()?;
    let lookup = |row: &[(String, f64)], key: &str| -> f64 {
        row.iter()
            .find(|(h, _)| h == key)
            .map(|(_, v)| *v)
            .expect("schema column")
    };
    let mut orders = Vec::new();
    let mut buf = String::from("quantity");
    for &n in ns {
        buf.push_str(&format!(",err_n{n}"));
    }
    for w in ns.windows(2) {
        buf.push_str(&format!(",order_n{}_n{}", w[0], w[1]));
    }
    buf.push('\n');
    for &q in SWEEP_QUANTITIES {
        let errs: Vec<f64> = finals.iter().map(|row| lookup(row, q)).collect();
        let ords: Vec<f64> = errs
            .windows(2)
            .zip(ns.windows(2))
            .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
            .collect();
        buf.push_str(q);
        for e in &errs {
            buf.push_str(&format!(",{}", output::fmt(*e)));
        }
        for o in &ords {
            buf.push_str(&format!(",{}", output::fmt(*o)));
        }
        buf.push('\n');
        orders.push((q.to_string(), errs, ords));
    }
    let summary = cfg.out.join("convergence.csv");
    output::write_atomic(&summary, buf.as_bytes())?;
    Ok(SweepOutcome {
        runs,
        summary,
        orders,
    })
}

/// Constraint status of a configuration's t=0 data, for `check-initial-data`.
#[derive(Debug, Clone, Copy)]
pub struct InitialDataReport {
    /// Hamiltonian/momentum residuals of the raw Cauchy data.
    pub constraints: ConstraintReport,
    /// Sup of |tr E|, |tr B| on the built state.
    pub weyl_traces: (f64, f64),
    /// Sup of |rho - P(r, s)|.
    pub eos_drift: f64,
    /// Sup norms of the evolution-side constraint residuals at t=0.
    pub torsion: f64,
    pub riemann_decomp: f64,
}

pub fn check_initial_data(cfg: &RunConfig) -> Result<InitialDataReport> {
    match &cfg.eos {
        EosSpec::EntropicPolytrope { gamma } => check_with(&EntropicPolytrope::new(*gamma), cfg),
        EosSpec::Barotropic { k, gamma } => check_with(&BarotropicFluid::new(*k, *gamma), cfg),
    }
}

fn check_with<E: EquationOfState>(eos: &E, cfg: &RunConfig) -> Result<InitialDataReport> {
    let grid = Grid::unit_box(cfg.n);
    let data = scenario::cauchy_data(cfg.scenario, grid, eos, cfg.kappa, &cfg.scenario_params)?;
    let constraints =
        crate::initial::constraint_residuals(&grid, &data, eos, cfg.kappa, cfg.fd_order);
    let fs = crate::initial::build_state(grid, &data, eos, cfg.kappa, cfg.fd_order)?;
    let monitors = diag::trace_monitors(&fs, eos);
    let norms = diag::residual_fields(&fs, eos, &evolve_params(cfg))?.norms();
    Ok(InitialDataReport {
        constraints,
        weyl_traces: (monitors.weyl_e_trace, monitors.weyl_b_trace),
        eos_drift: monitors.eos_drift,
        torsion: norms.torsion,
        riemann_decomp: norms.riemann_decomp,
    })
}

/// Sorted characteristic spectrum of the configuration's t=0 state at the
/// first grid point, in the given unit direction.
pub fn speeds(cfg: &RunConfig, xi: [f64; 3]) -> Result<Vec<f64>> {
    match &cfg.eos {
        EosSpec::EntropicPolytrope { gamma } => speeds_with(&EntropicPolytrope::new(*gamma), cfg, xi),
        EosSpec::Barotropic { k, gamma } => speeds_with(&BarotropicFluid::new(*k, *gamma), cfg, xi),
    }
}

fn speeds_with<E: EquationOfState>(eos: &E, cfg: &RunConfig, xi: [f64; 3]) -> Result<Vec<f64>> {
    let grid = Grid::unit_box(cfg.n);
    let fs = scenario::build(
        cfg.scenario,
        grid,
        eos,
        cfg.kappa,
        cfg.fd_order,
        &cfg.scenario_params,
    )?;
    diag::characteristic_speeds(&fs.data[0], eos, cfg.kappa, xi)
}
