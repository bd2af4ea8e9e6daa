//! Desk-scale recipes behind `reproduce <id>`, each with pass/fail checks.

use std::path::PathBuf;

use rayon::prelude::*;
use tfim_chain::{chain_observables, solve_chain, var_jy_subsystem, ChainOptions};
use tfim_collective::CollectiveSolver;
use tfim_core::metrology::check_inequality_chain;
use tfim_core::model::{G_C_2D, G_C_3D};
use tfim_core::{fit_power_law, FitPoint, Flag, ModelSpec, ObservableReport, ScalingFit, SubsystemGeometry, SubsystemShape};
use tfim_sse::{point_seed, QmcReport, Representation, SseParams};

use crate::config::QmcOverrides;
use crate::error::{CliError, Result};
use crate::run::{qmc_point, qmc_run, Checkpointing};
use crate::table::{Cell, Table};

/// Combined standard errors allowed before an inequality counts as violated.
pub const CHAIN_SIGMAS: f64 = 3.0;
/// Relative slack for exact backends.
pub const CHAIN_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Informational checks never fail the recipe.
    pub gating: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into(), gating: true }
    }

    pub fn info(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { gating: false, ..Check::new(name, passed, detail) }
    }

    pub fn line(&self) -> String {
        let tag = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO",
        };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub table: Table,
    pub checks: Vec<Check>,
    /// QMC consistency flags raised anywhere in the recipe.
    pub qmc_flags: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { table: Table::new(["series", "g", "T_over_J", "N", "quantity", "value", "error"].map(String::from).to_vec()), ..Default::default() }
    }

    fn row(&mut self, series: &str, g: f64, t: f64, n: usize, quantity: &str, value: f64, error: f64) {
        self.table.push(vec![
            Cell::text(series),
            Cell::Num(g),
            Cell::Num(t),
            Cell::Int(n as i64),
            Cell::text(quantity),
            Cell::Num(value),
            Cell::Num(error),
        ]);
    }

    fn report_rows(&mut self, series: &str, r: &ObservableReport) {
        let (g, t, n) = (r.g, r.temperature, r.n_sites);
        let inv = r.inverse_xi_sq();
        self.row(series, g, t, n, "jx_mean", r.jx_mean.value, r.jx_mean.error);
        self.row(series, g, t, n, "var_jy", r.var_jy.value, r.var_jy.error);
        self.row(series, g, t, n, "var_jz", r.var_jz.value, r.var_jz.error);
        self.row(series, g, t, n, "qv_jz", r.qv_jz.value, r.qv_jz.error);
        self.row(series, g, t, n, "xi_r_sq", r.xi_r_sq.value, r.xi_r_sq.error);
        self.row(series, g, t, n, "inverse_xi_r_sq", inv.value, inv.error);
        self.row(series, g, t, n, "inverse_xi_r_sq_db", tfim_core::metrology::to_db(inv.value), 0.0);
        self.row(series, g, t, n, "qv_lower_4qv_over_n", 4.0 * r.qv_jz.value / n as f64, 4.0 * r.qv_jz.error / n as f64);
        self.row(series, g, t, n, "qv_upper_12qv_over_n", 12.0 * r.qv_jz.value / n as f64, 12.0 * r.qv_jz.error / n as f64);
        if let Some(chi) = r.inverse_chi_sq() {
            self.row(series, g, t, n, "inverse_chi_sq", chi.value, chi.error);
        }
    }

    fn qmc_flags_of(&mut self, flags: &[Flag], context: &str) {
        for f in flags {
            if matches!(f, Flag::ThermalizationFailure | Flag::SandwichViolation) {
                self.qmc_flags.push(format!("{context}: {}", crate::run::flag_name(f)));
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.gating)
    }
}

/// Run-time knobs shared by all recipes.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub thermalization: Option<usize>,
    pub sweeps: Option<usize>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub checkpoint: Option<Checkpointing>,
}

impl Options {
    pub fn from_overrides(q: &QmcOverrides) -> Self {
        Options { thermalization: q.thermalization, sweeps: q.sweeps, bins: q.bins, seed: q.seed, checkpoint: None }
    }

    /// QMC parameters for one point, starting from recipe defaults.
    fn params(&self, thermalization: usize, sweeps: usize, g: f64, t: f64) -> SseParams {
        SseParams {
            thermalization: self.thermalization.unwrap_or(thermalization),
            sweeps: self.sweeps.unwrap_or(sweeps),
            bins: self.bins.unwrap_or(32),
            seed: point_seed(self.seed.unwrap_or(1), g, t),
        }
    }

    fn stem(&self, name: String) -> Option<(&Checkpointing, PathBuf)> {
        self.checkpoint.as_ref().map(|c| (c, c.dir.join(name)))
    }
}

pub struct Recipe {
    pub id: &'static str,
    pub title: &'static str,
    pub run: fn(&Options) -> Result<Outcome>,
}

pub const RECIPES: [Recipe; 10] = [
    Recipe { id: "fig1b", title: "subsystem J^y variance below the shot-noise limit at the critical point", run: fig1b },
    Recipe { id: "fig1c", title: "finite-size scaling of the squeezing parameter", run: fig1c },
    Recipe { id: "fig2a", title: "quantum-critical trajectory, d=1 chain N=50", run: fig2a },
    Recipe { id: "fig2b", title: "quantum-critical trajectory, d=2 QMC", run: fig2b },
    Recipe { id: "fig2c", title: "quantum-critical trajectory, d=3 QMC", run: fig2c },
    Recipe { id: "fig2d", title: "quantum-critical trajectory, d=inf N=1000", run: fig2d },
    Recipe { id: "fig3a", title: "squeezing map around the critical point, d=2 QMC", run: fig3a },
    Recipe { id: "fig3b", title: "squeezing map around the critical point, d=inf N=500", run: fig3b },
    Recipe { id: "sm-fig4", title: "squeezing maps for d=1 (chain) and d=3 (QMC)", run: sm_fig4 },
    Recipe { id: "sm-fig5", title: "large-field squeezing against first-order perturbation theory", run: sm_fig5 },
];

pub fn find(id: &str) -> Option<&'static Recipe> {
    RECIPES.iter().find(|r| r.id == id)
}

fn numerical<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Numerical(format!("{context}: {e}"))
}

fn fit(points: &[FitPoint], context: &str) -> Result<ScalingFit> {
    fit_power_law(points).map_err(numerical(context))
}

fn chain_check(out: &mut Outcome, series: &str, reports: &[ObservableReport]) {
    let mut bad = Vec::new();
    for r in reports {
        for v in check_inequality_chain(r, CHAIN_SIGMAS, CHAIN_REL_TOL) {
            bad.push(format!("g={} T={}: {} ({} vs {})", r.g, r.temperature, v.relation, v.lhs, v.rhs));
        }
    }
    let detail = if bad.is_empty() { format!("{} points, zero violations", reports.len()) } else { bad.join("; ") };
    out.checks.push(Check::new(format!("{series} inequality chain"), bad.is_empty(), detail));
}

/// The four QMC-backed series share this driver: both representations per point.
fn qmc_scan(out: &mut Outcome, opts: &Options, series: &str, d: u8, l: usize, points: &[(f64, f64)], sweeps: usize) -> Result<Vec<ObservableReport>> {
    let reports: Vec<std::result::Result<ObservableReport, String>> = points
        .par_iter()
        .enumerate()
        .map(|(k, &(g, t))| {
            let spec = ModelSpec::hypercubic(d, l, g, t);
            let params = opts.params(sweeps / 10, sweeps, g, t);
            let stem = opts.stem(format!("{series}-{k:04}"));
            qmc_point(&spec, &params, stem.as_ref().map(|(c, p)| (*c, p.as_path())))
        })
        .collect();
    let mut ok = Vec::new();
    for r in reports {
        let r = r.map_err(numerical(series))?;
        out.qmc_flags_of(&r.flags, &format!("{series} g={} T={}", r.g, r.temperature));
        out.report_rows(series, &r);
        ok.push(r);
    }
    Ok(ok)
}

fn x_basis(opts: &Options, spec: &ModelSpec, sweeps: usize, subsystems: &[SubsystemGeometry], name: String) -> Result<QmcReport> {
    let params = opts.params(sweeps / 10, sweeps, spec.g, spec.temperature);
    let stem = opts.stem(name);
    qmc_run(spec, Representation::XBasis, &params, subsystems, stem.as_ref().map(|(c, p)| (*c, p.as_path()))).map_err(numerical("qmc"))
}

fn collective(n: usize, g: f64, t: f64) -> Result<ObservableReport> {
    CollectiveSolver::new(n, g).and_then(|s| s.observables(t)).map_err(numerical("collective"))
}

fn chain(n: usize, g: f64, t: f64, qfi: bool) -> Result<ObservableReport> {
    let sol = solve_chain(n, g, t).map_err(numerical("chain"))?;
    chain_observables(&sol, &ChainOptions { compute_qfi: qfi, ..Default::default() }).map_err(numerical("chain"))
}

pub const FIG1B_ELLS: [usize; 4] = [2, 4, 6, 8];

/// d=2 part of fig1b: Var(J^y_A)/N_A for centred squares at g_c, βJ = 2L.
pub fn subsystem_trend(opts: &Options, l: usize, sweeps: usize) -> Result<(Outcome, Vec<(usize, f64, f64)>)> {
    let mut out = Outcome::new();
    let t = 1.0 / (2.0 * l as f64);
    let spec = ModelSpec::hypercubic(2, l, G_C_2D, t);
    let geoms: Vec<SubsystemGeometry> =
        FIG1B_ELLS.iter().map(|&ell| SubsystemGeometry::centered(SubsystemShape::Square, ell, 2, l)).collect::<std::result::Result<_, _>>().map_err(numerical("subsystem"))?;
    let r = x_basis(opts, &spec, sweeps, &geoms, "fig1b-d2".into())?;
    out.qmc_flags_of(&r.flags, "fig1b d=2");
    let mut per_site = Vec::new();
    for (geom, est) in &r.subsystems {
        let na = geom.len();
        let (v, e) = (est.mean / na as f64, est.error / na as f64);
        out.row("d=2", G_C_2D, t, na, "var_jy_a_per_site", v, e);
        per_site.push((na, v, e));
    }
    let decreasing = per_site.windows(2).all(|w| w[1].1 < w[0].1);
    out.checks.push(Check::new(
        "d=2 Var(J^y_A)/N_A decreasing",
        decreasing,
        per_site.iter().map(|(n, v, e)| format!("N_A={n}: {v:.5}±{e:.5}")).collect::<Vec<_>>().join(", "),
    ));
    let below: Vec<&(usize, f64, f64)> = per_site.iter().zip(FIG1B_ELLS).filter(|(_, ell)| *ell >= 4).map(|(p, _)| p).collect();
    out.checks.push(Check::new("d=2 Var(J^y_A)/N_A < 1/4 for ell >= 4", below.iter().all(|p| p.1 < 0.25), format!("max {:.5}", below.iter().map(|p| p.1).fold(f64::MIN, f64::max))));
    let f = fit(&per_site.iter().map(|&(n, v, e)| FitPoint::new(n as f64, v, e)).collect::<Vec<_>>(), "subsystem fit")?;
    let zeta = -f.exponent;
    out.row("d=2 fit", G_C_2D, t, l * l, "zeta_prime", zeta, f.exponent_error);
    out.checks.push(Check::info(
        "d=2 fitted zeta' consistent with 0.24 (3 sigma)",
        (zeta - 0.24).abs() <= 3.0 * f.exponent_error,
        format!("zeta' = {zeta:.4} ± {:.4}", f.exponent_error),
    ));
    Ok((out, per_site))
}

fn fig1b(opts: &Options) -> Result<Outcome> {
    let (mut out, _) = subsystem_trend(opts, 16, 50_000)?;
    let sol = solve_chain(64, 0.6, 0.0).map_err(numerical("chain"))?;
    for ell in [4, 8, 16, 32] {
        let geom = SubsystemGeometry::centered(SubsystemShape::Segment, ell, 1, 64).map_err(numerical("segment"))?;
        out.row("d=1", 0.6, 0.0, ell, "var_jy_a_per_site", var_jy_subsystem(&sol, &geom.sites) / ell as f64, 0.0);
    }
    for n in [100, 200, 400, 700, 1000] {
        let r = collective(n, 1.0, 0.0)?;
        out.row("d=inf", 1.0, 0.0, n, "var_jy_a_per_site", r.var_jy.value / n as f64, 0.0);
    }
    Ok(out)
}

pub const CRITICAL_SIZES: [usize; 5] = [100, 200, 400, 700, 1000];

/// d=∞ at g = 1, T = 0: ξ_R² and χ² fits and their agreement at the largest N.
pub fn critical_scaling() -> Result<Outcome> {
    let mut out = Outcome::new();
    let reports: Vec<ObservableReport> = CRITICAL_SIZES.par_iter().map(|&n| collective(n, 1.0, 0.0)).collect::<Result<_>>()?;
    let (mut xi, mut chi) = (Vec::new(), Vec::new());
    for r in &reports {
        let c = r.chi_sq.ok_or_else(|| CliError::Numerical("collective report without chi^2".into()))?;
        out.row("d=inf", 1.0, 0.0, r.n_sites, "xi_r_sq", r.xi_r_sq.value, 0.0);
        out.row("d=inf", 1.0, 0.0, r.n_sites, "chi_sq", c.value, 0.0);
        xi.push(FitPoint::new(r.n_sites as f64, r.xi_r_sq.value, 0.0));
        chi.push(FitPoint::new(r.n_sites as f64, c.value, 0.0));
    }
    for (name, pts) in [("xi_r_sq", &xi), ("chi_sq", &chi)] {
        let f = fit(pts, name)?;
        out.row("d=inf fit", 1.0, 0.0, 0, &format!("{name}_exponent"), f.exponent, f.exponent_error);
        out.checks.push(Check::new(format!("d=inf {name} exponent -1/3 ± 0.05"), (f.exponent + 1.0 / 3.0).abs() <= 0.05, format!("{:.4} ± {:.4}", f.exponent, f.exponent_error)));
    }
    let last = reports.last().expect("sizes");
    let c = last.chi_sq.expect("checked").value;
    let rel = (last.xi_r_sq.value - c).abs() / c;
    out.checks.push(Check::new("d=inf |xi^2 - chi^2|/chi^2 < 1e-2 at N=1000", rel < 1e-2, format!("{rel:.4e}")));
    Ok(out)
}

fn fig1c(_: &Options) -> Result<Outcome> {
    let mut out = critical_scaling()?;
    let sizes = [16, 24, 32, 48, 64];
    let xi: Vec<f64> = sizes.par_iter().map(|&n| chain(n, 0.62, 0.0, false).map(|r| r.xi_r_sq.value)).collect::<Result<_>>()?;
    for (&n, &x) in sizes.iter().zip(&xi) {
        out.row("d=1", 0.62, 0.0, n, "xi_r_sq", x, 0.0);
    }
    out.checks.push(Check::info("d=1 squeezing present but bounded", xi.iter().all(|&x| x < 1.0 && x > 0.3), format!("{xi:.4?}")));
    Ok(out)
}

const TRAJECTORY_T: [f64; 8] = [0.1, 0.15, 0.25, 0.35, 0.5, 0.7, 1.0, 1.5];

fn fig2a(_: &Options) -> Result<Outcome> {
    let mut out = Outcome::new();
    let reports: Vec<ObservableReport> = TRAJECTORY_T.par_iter().map(|&t| chain(50, 0.5, t, true)).collect::<Result<_>>()?;
    for r in &reports {
        out.report_rows("d=1", r);
    }
    chain_check(&mut out, "d=1", &reports);
    Ok(out)
}

fn trajectory_qmc(opts: &Options, series: &str, d: u8, l: usize, gc: f64, sweeps: usize) -> Result<Outcome> {
    let mut out = Outcome::new();
    let points: Vec<(f64, f64)> = TRAJECTORY_T.iter().map(|&t| (gc, t)).collect();
    let reports = qmc_scan(&mut out, opts, series, d, l, &points, sweeps)?;
    chain_check(&mut out, series, &reports);
    Ok(out)
}

fn fig2b(opts: &Options) -> Result<Outcome> {
    trajectory_qmc(opts, "d=2", 2, 8, G_C_2D, 40_000)
}

fn fig2c(opts: &Options) -> Result<Outcome> {
    trajectory_qmc(opts, "d=3", 3, 4, G_C_3D, 40_000)
}

fn fig2d(_: &Options) -> Result<Outcome> {
    let mut out = Outcome::new();
    let solver = CollectiveSolver::new(1000, 1.0).map_err(numerical("collective"))?;
    let reports: Vec<ObservableReport> = TRAJECTORY_T.par_iter().map(|&t| solver.observables(t).map_err(numerical("collective"))).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for r in &reports {
        out.report_rows("d=inf", r);
        if let Some(c) = r.chi_sq {
            worst = worst.max((r.xi_r_sq.value - c.value).abs() / c.value);
        }
    }
    chain_check(&mut out, "d=inf", &reports);
    out.checks.push(Check::info("d=inf xi^2 and chi^2 coincide (1e-2)", worst < 1e-2, format!("max relative difference {worst:.3e}")));
    Ok(out)
}

fn squeezing_present(out: &mut Outcome, series: &str, reports: &[ObservableReport]) {
    let best = reports
        .iter()
        .map(|r| (r, r.inverse_xi_sq()))
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(r, inv)| (r.g, r.temperature, inv));
    let (passed, detail) = match best {
        Some((g, t, inv)) => (inv.value - 3.0 * inv.error > 1.0, format!("max xi^-2 = {:.4} ± {:.4} at g={g}, T={t}", inv.value, inv.error)),
        None => (false, "no points".into()),
    };
    out.checks.push(Check::new(format!("{series} squeezing region present"), passed, detail));
}

fn fig3a(opts: &Options) -> Result<Outcome> {
    let mut out = Outcome::new();
    let gs = [1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0];
    let ts = [0.15, 0.3, 0.5, 0.8, 1.2];
    let points: Vec<(f64, f64)> = gs.iter().flat_map(|&g| ts.iter().map(move |&t| (g, t))).collect();
    let reports = qmc_scan(&mut out, opts, "d=2", 2, 8, &points, 20_000)?;
    chain_check(&mut out, "d=2", &reports);
    squeezing_present(&mut out, "d=2", &reports);
    Ok(out)
}

pub fn fig3b_grid() -> (Vec<f64>, Vec<f64>) {
    ((0..=14).map(|k| 0.6 + 0.1 * k as f64).collect(), vec![0.02, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0])
}

fn fig3b(_: &Options) -> Result<Outcome> {
    let mut out = Outcome::new();
    let (gs, ts) = fig3b_grid();
    let rows: Vec<Vec<ObservableReport>> = gs
        .par_iter()
        .map(|&g| {
            let s = CollectiveSolver::new(500, g).map_err(numerical("collective"))?;
            ts.iter().map(|&t| s.observables(t).map_err(numerical("collective"))).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let reports: Vec<ObservableReport> = rows.into_iter().flatten().collect();
    for r in &reports {
        out.report_rows("d=inf", r);
    }
    chain_check(&mut out, "d=inf", &reports);
    squeezing_present(&mut out, "d=inf", &reports);
    let coldest = reports.iter().filter(|r| r.temperature == ts[0]).max_by(|a, b| a.inverse_xi_sq().value.total_cmp(&b.inverse_xi_sq().value)).expect("grid");
    out.checks.push(Check::new(
        "d=inf strongest squeezing near the critical point",
        (0.9..=1.3).contains(&coldest.g),
        format!("argmax over g at T={}: g={}", ts[0], coldest.g),
    ));
    Ok(out)
}

fn sm_fig4(opts: &Options) -> Result<Outcome> {
    let mut out = Outcome::new();
    let gs: Vec<f64> = (0..9).map(|k| 0.2 + 0.1 * k as f64).collect();
    let ts = [0.05, 0.1, 0.2, 0.4, 0.8];
    let points: Vec<(f64, f64)> = gs.iter().flat_map(|&g| ts.iter().map(move |&t| (g, t))).collect();
    let chain_reports: Vec<ObservableReport> = points.par_iter().map(|&(g, t)| chain(50, g, t, false)).collect::<Result<_>>()?;
    for r in &chain_reports {
        out.report_rows("d=1", r);
    }
    chain_check(&mut out, "d=1", &chain_reports);
    squeezing_present(&mut out, "d=1", &chain_reports);
    let gs3 = [2.0, 2.3, 2.579, 2.9, 3.5];
    let ts3 = [0.2, 0.5, 1.0];
    let points3: Vec<(f64, f64)> = gs3.iter().flat_map(|&g| ts3.iter().map(move |&t| (g, t))).collect();
    let qmc_reports = qmc_scan(&mut out, opts, "d=3", 3, 4, &points3, 20_000)?;
    chain_check(&mut out, "d=3", &qmc_reports);
    squeezing_present(&mut out, "d=3", &qmc_reports);
    Ok(out)
}

pub const LARGE_G: [f64; 4] = [4.0, 8.0, 16.0, 32.0];

/// d=2 QMC at L=16, βJ=16: 1 − ξ_R² against 1/g with a 0.5/g² allowance.
pub fn large_field_qmc(opts: &Options, sweeps: usize) -> Result<Outcome> {
    let mut out = Outcome::new();
    let reports: Vec<QmcReport> = LARGE_G
        .par_iter()
        .map(|&g| x_basis(opts, &ModelSpec::hypercubic(2, 16, g, 1.0 / 16.0), sweeps, &[], format!("sm-fig5-{g}")))
        .collect::<Result<_>>()?;
    for (&g, r) in LARGE_G.iter().zip(&reports) {
        out.qmc_flags_of(&r.flags, &format!("sm-fig5 g={g}"));
        let xi = r.xi_r_sq.ok_or_else(|| CliError::Numerical(format!("no squeezing estimate at g={g}")))?;
        let gap = 1.0 - xi.value;
        out.row("d=2", g, 1.0 / 16.0, 256, "one_minus_xi_r_sq", gap, xi.error);
        out.row("d=2", g, 1.0 / 16.0, 256, "first_order", 1.0 / g, 0.0);
        let allowed = 2.0 * xi.error + 0.5 / (g * g);
        out.checks.push(Check::new(
            format!("d=2 g={g}: 1 - xi^2 vs 1/g"),
            (gap - 1.0 / g).abs() <= allowed,
            format!("{gap:.5} ± {:.5} vs {:.5} (allowed {allowed:.5})", xi.error, 1.0 / g),
        ));
    }
    Ok(out)
}

/// d=∞ at g=20: ξ_R² against 1 − 1/(4g).
pub fn large_field_collective(out: &mut Outcome, n: usize) -> Result<()> {
    let g = 20.0;
    let r = collective(n, g, 0.0)?;
    let want = tfim_collective::perturbative_xi_for(tfim_core::Dimension::Infinite, g);
    out.row("d=inf", g, 0.0, n, "xi_r_sq", r.xi_r_sq.value, 0.0);
    out.row("d=inf", g, 0.0, n, "first_order", want, 0.0);
    let diff = (r.xi_r_sq.value - want).abs();
    out.checks.push(Check::new(format!("d=inf g=20 N={n}: |xi^2 - (1 - 1/(4g))| < 5e-3"), diff < 5e-3, format!("{:.5} vs {want:.5}", r.xi_r_sq.value)));
    Ok(())
}

fn sm_fig5(opts: &Options) -> Result<Outcome> {
    let mut out = large_field_qmc(opts, 20_000)?;
    large_field_collective(&mut out, 1000)?;
    Ok(out)
}
