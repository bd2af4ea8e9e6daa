//! Backend dispatch for grid evaluations and the standard result schema.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tfim_chain::ChainBackend;
use tfim_collective::CollectiveSolver;
use tfim_core::metrology::to_db;
use tfim_core::{Estimate, ExactSolver, Lattice, ModelSpec, ObservableReport, SubsystemGeometry};
use tfim_sse::{combine_reports, point_seed, QmcReport, Representation, SseModel, SseParams, SseRun};

use crate::config::{BackendKind, RunConfig};
use crate::error::{CliError, Result};
use crate::table::{Cell, Table};

/// Identifier of this build: crate version plus the commit it was built from.
pub fn build_id() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), option_env!("TFIM_BUILD_COMMIT").unwrap_or("unknown"))
}

/// Where QMC points keep their resumable state.
#[derive(Debug, Clone)]
pub struct Checkpointing {
    pub dir: PathBuf,
    pub resume: bool,
    pub every: usize,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub g: f64,
    pub temperature: f64,
    pub seed: Option<u64>,
    pub report: std::result::Result<ObservableReport, String>,
}

pub fn qmc_params(config: &RunConfig, g: f64, temperature: f64) -> SseParams {
    SseParams {
        thermalization: config.qmc.thermalization,
        sweeps: config.qmc.sweeps,
        bins: config.qmc.bins,
        seed: point_seed(config.qmc.seed, g, temperature),
    }
}

/// Evaluates every grid point on a pool of `workers` threads. Rows come back in grid order.
pub fn evaluate(config: &RunConfig, workers: usize, checkpoint: Option<&Checkpointing>) -> Result<Vec<PointResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    if let Some(c) = checkpoint {
        std::fs::create_dir_all(&c.dir)?;
    }
    Ok(pool.install(|| match config.backend {
        BackendKind::Oracle | BackendKind::Collective => by_field(config),
        BackendKind::Chain => {
            let backend = ChainBackend::new(config.spec.n_sites());
            config
                .grid()
                .into_par_iter()
                .map(|(g, t)| PointResult { g, temperature: t, seed: None, report: tfim_core::ObservableBackend::observables(&backend, g, t) })
                .collect()
        }
        BackendKind::Qmc => config
            .grid()
            .into_par_iter()
            .enumerate()
            .map(|(k, (g, t))| {
                let params = qmc_params(config, g, t);
                let spec = config.spec.with_g(g).with_temperature(t);
                let path = checkpoint.map(|c| (c, c.dir.join(format!("point-{k:04}"))));
                let report = qmc_point(&spec, &params, path.as_ref().map(|(c, p)| (*c, p.as_path())));
                PointResult { g, temperature: t, seed: Some(params.seed), report }
            })
            .collect(),
    }))
}

/// Oracle and collective solvers serve every temperature of one field.
fn by_field(config: &RunConfig) -> Vec<PointResult> {
    let rows: Vec<Vec<PointResult>> = config
        .g_grid
        .par_iter()
        .map(|&g| {
            let spec = config.spec.with_g(g);
            match config.backend {
                BackendKind::Oracle => match ExactSolver::new(&spec) {
                    Ok(s) => config.t_grid.iter().map(|&t| point(g, t, s.observables(t).map_err(|e| e.to_string()))).collect(),
                    Err(e) => config.t_grid.iter().map(|&t| point(g, t, Err(e.to_string()))).collect(),
                },
                BackendKind::Collective => match CollectiveSolver::new(spec.n_sites(), g) {
                    Ok(s) => config.t_grid.iter().map(|&t| point(g, t, s.observables(t).map_err(|e| e.to_string()))).collect(),
                    Err(e) => config.t_grid.iter().map(|&t| point(g, t, Err(e.to_string()))).collect(),
                },
                _ => unreachable!("by_field serves the oracle and collective backends"),
            }
        })
        .collect();
    rows.into_iter().flatten().collect()
}

fn point(g: f64, temperature: f64, report: std::result::Result<ObservableReport, String>) -> PointResult {
    PointResult { g, temperature, seed: None, report }
}

fn drive(mut run: SseRun, path: Option<&Path>, every: usize) -> std::result::Result<SseRun, String> {
    while !run.is_finished() {
        run.advance(every).map_err(|e| e.to_string())?;
        if let Some(p) = path {
            run.save(p).map_err(|e| format!("{}: {e}", p.display()))?;
        }
    }
    Ok(run)
}

/// One QMC representation, checkpointed to `<stem>.<x|z>.ckpt` when requested.
pub fn qmc_run(
    spec: &ModelSpec,
    repr: Representation,
    params: &SseParams,
    subsystems: &[SubsystemGeometry],
    checkpoint: Option<(&Checkpointing, &Path)>,
) -> std::result::Result<QmcReport, String> {
    tfim_sse::validate_qmc_spec(spec).map_err(|e| e.to_string())?;
    let lattice = Lattice::for_spec(spec);
    let model = SseModel::new(&lattice, spec.field(), spec.beta(), repr).map_err(|e| e.to_string())?;
    let run = match checkpoint {
        Some((c, stem)) => {
            let path = stem.with_extension(format!("{}.ckpt", if repr == Representation::XBasis { "x" } else { "z" }));
            let run = if c.resume && path.exists() {
                SseRun::load(&path, model, *params, subsystems.to_vec()).map_err(|e| format!("{}: {e}", path.display()))?
            } else {
                SseRun::new(model, *params, subsystems.to_vec()).map_err(|e| e.to_string())?
            };
            drive(run, Some(&path), c.every)?
        }
        None => drive(SseRun::new(model, *params, subsystems.to_vec()).map_err(|e| e.to_string())?, None, usize::MAX)?,
    };
    Ok(run.report())
}

/// Both QMC representations of one grid point merged into an observable record.
pub fn qmc_point(spec: &ModelSpec, params: &SseParams, checkpoint: Option<(&Checkpointing, &Path)>) -> std::result::Result<ObservableReport, String> {
    let (x, z) = rayon::join(
        || qmc_run(spec, Representation::XBasis, params, &[], checkpoint),
        || qmc_run(spec, Representation::ZBasis, params, &[], checkpoint),
    );
    combine_reports(spec, x?, z?).map(|o| o.report).map_err(|e| e.to_string())
}

fn field(r: &ObservableReport, name: &str) -> Option<Estimate> {
    match name {
        "jx_mean" => Some(r.jx_mean),
        "var_jy" => Some(r.var_jy),
        "var_jz" => Some(r.var_jz),
        "qv_jz" => Some(r.qv_jz),
        "qfi_jz" => r.qfi_jz,
        "xi_r_sq" => Some(r.xi_r_sq),
        "chi_sq" => r.chi_sq,
        "energy" => r.energy,
        _ => None,
    }
}

/// Fixed column order: g, T, N, values, errors, dB, metadata.
pub fn result_columns(observables: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = vec!["g".into(), "T_over_J".into(), "N".into()];
    cols.extend(observables.iter().cloned());
    cols.extend(observables.iter().map(|o| format!("{o}_err")));
    if observables.iter().any(|o| o == "xi_r_sq") {
        cols.push("inverse_xi_r_sq_db".into());
        cols.push("no_squeezing".into());
    }
    cols.extend(["backend", "seed", "build_id", "flags", "error"].map(String::from));
    cols
}

pub fn result_table(config: &RunConfig, results: &[PointResult]) -> Table {
    let mut table = Table::new(result_columns(&config.observables));
    let n = config.spec.n_sites() as i64;
    let build = build_id();
    for p in results {
        let mut row = vec![Cell::Num(p.g), Cell::Num(p.temperature), Cell::Int(n)];
        let report = p.report.as_ref().ok();
        let est: Vec<Option<Estimate>> = config.observables.iter().map(|o| report.and_then(|r| field(r, o))).collect();
        row.extend(est.iter().map(|e| Cell::opt(e.map(|e| e.value))));
        row.extend(est.iter().map(|e| Cell::opt(e.map(|e| e.error))));
        if config.wants("xi_r_sq") {
            let inv = report.map(|r| r.inverse_xi_sq().value);
            row.push(Cell::opt(inv.map(to_db)));
            row.push(inv.map(|x| Cell::Bool(x <= 1.0)).unwrap_or(Cell::Empty));
        }
        row.push(Cell::text(config.backend.name()));
        row.push(p.seed.map(|s| Cell::text(format!("{s:#018x}"))).unwrap_or(Cell::Empty));
        row.push(Cell::text(build.clone()));
        let flags = report.map(|r| r.flags.iter().map(flag_name).collect::<Vec<_>>().join(";")).unwrap_or_default();
        row.push(if flags.is_empty() { Cell::Empty } else { Cell::Text(flags) });
        row.push(p.report.as_ref().err().map(|e| Cell::text(e.clone())).unwrap_or(Cell::Empty));
        table.push(row);
    }
    table
}

pub fn flag_name(f: &tfim_core::Flag) -> String {
    serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_else(|| format!("{f:?}"))
}
