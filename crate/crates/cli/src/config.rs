//! Run configuration files (TOML) with field-path error reporting.

use std::path::{Path, PathBuf};

use tfim_core::{Boundary, Dimension, ModelSpec};
use toml::{Table, Value};

use crate::error::{CliError, Result};

/// Largest N accepted by the dense oracle.
pub const MAX_ORACLE_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Oracle,
    Chain,
    Collective,
    Qmc,
}

impl BackendKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "oracle" => Some(BackendKind::Oracle),
            "chain" => Some(BackendKind::Chain),
            "collective" => Some(BackendKind::Collective),
            "qmc" => Some(BackendKind::Qmc),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Oracle => "oracle",
            BackendKind::Chain => "chain",
            BackendKind::Collective => "collective",
            BackendKind::Qmc => "qmc",
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == BackendKind::Qmc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    /// Format implied by a file extension, CSV otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Observables in output column order.
pub const OBSERVABLES: [&str; 8] = ["jx_mean", "var_jy", "var_jz", "qv_jz", "qfi_jz", "xi_r_sq", "chi_sq", "energy"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcControls {
    pub thermalization: usize,
    pub sweeps: usize,
    pub bins: usize,
    pub seed: u64,
    /// Sweeps between checkpoint writes.
    pub checkpoint_every: usize,
}

impl Default for QmcControls {
    fn default() -> Self {
        QmcControls { thermalization: 10_000, sweeps: 100_000, bins: 32, seed: 1, checkpoint_every: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub backend: BackendKind,
    pub observables: Vec<String>,
    pub g_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub qmc: QmcControls,
    pub checkpoint: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().trim().to_string()))?;
        from_table(&table)
    }

    /// Number of grid points.
    pub fn points(&self) -> usize {
        self.g_grid.len() * self.t_grid.len()
    }

    /// Grid points in row order (g outer, T inner).
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.g_grid.iter().flat_map(|&g| self.t_grid.iter().map(move |&t| (g, t))).collect()
    }

    pub fn wants(&self, observable: &str) -> bool {
        self.observables.iter().any(|o| o == observable)
    }
}

/// Typed access to a TOML table that remembers the dotted path.
struct Fields<'a> {
    path: String,
    table: &'a Table,
}

fn err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

impl<'a> Fields<'a> {
    fn root(table: &'a Table) -> Self {
        Fields { path: String::new(), table }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        for k in self.table.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(err(&self.key(k), format!("unknown key (expected one of: {})", keys.join(", "))));
            }
        }
        Ok(())
    }

    fn sub(&self, k: &str) -> Result<Option<Fields<'a>>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(Fields { path: self.key(k), table: t })),
            Some(_) => Err(err(&self.key(k), "expected a table")),
        }
    }

    fn has(&self, k: &str) -> bool {
        self.table.contains_key(k)
    }

    fn f64(&self, k: &str) -> Result<Option<f64>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(v) => number(v).map(Some).ok_or_else(|| err(&self.key(k), "expected a number")),
        }
    }

    fn usize(&self, k: &str) -> Result<Option<usize>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(err(&self.key(k), "expected a non-negative integer")),
        }
    }

    fn str(&self, k: &str) -> Result<Option<&'a str>> {
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(err(&self.key(k), "expected a string")),
        }
    }

    /// A list of numbers or a {start, stop, steps} range.
    fn grid(&self, k: &str) -> Result<Option<Vec<f64>>> {
        let path = self.key(k);
        match self.table.get(k) {
            None => Ok(None),
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.iter().enumerate() {
                    out.push(number(v).ok_or_else(|| err(&format!("{path}[{i}]"), "expected a number"))?);
                }
                if out.is_empty() {
                    return Err(err(&path, "grid must not be empty"));
                }
                Ok(Some(out))
            }
            Some(Value::Table(t)) => {
                let f = Fields { path: path.clone(), table: t };
                f.allow(&["start", "stop", "steps"])?;
                let start = f.f64("start")?.ok_or_else(|| err(&f.key("start"), "missing"))?;
                let stop = f.f64("stop")?.ok_or_else(|| err(&f.key("stop"), "missing"))?;
                let steps = f.usize("steps")?.ok_or_else(|| err(&f.key("steps"), "missing"))?;
                if steps == 0 {
                    return Err(err(&f.key("steps"), "must be at least 1"));
                }
                if steps == 1 {
                    return Ok(Some(vec![start]));
                }
                Ok(Some((0..steps).map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64).collect()))
            }
            Some(_) => Err(err(&path, "expected an array of numbers or a {start, stop, steps} table")),
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn temperature_of_beta(path: &str, beta: f64) -> Result<f64> {
    if beta > 0.0 && beta.is_finite() {
        Ok(1.0 / beta)
    } else if beta == f64::INFINITY {
        Ok(0.0)
    } else {
        Err(err(path, "beta must be positive"))
    }
}

fn check_temperature(path: &str, t: f64) -> Result<f64> {
    if t >= 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(err(path, "temperature must be finite and non-negative"))
    }
}

fn from_table(table: &Table) -> Result<RunConfig> {
    let root = Fields::root(table);
    root.allow(&["backend", "observables", "model", "scan", "qmc", "output"])?;

    let backend_name = root.str("backend")?.ok_or_else(|| err("backend", "missing (oracle, chain, collective or qmc)"))?;
    let backend = BackendKind::parse(backend_name).ok_or_else(|| err("backend", format!("unknown backend {backend_name:?}")))?;

    let observables = match table.get("observables") {
        None => OBSERVABLES.iter().map(|s| s.to_string()).collect(),
        Some(Value::Array(a)) => {
            let mut out: Vec<String> = Vec::new();
            for (i, v) in a.iter().enumerate() {
                let name = v.as_str().ok_or_else(|| err(&format!("observables[{i}]"), "expected a string"))?;
                if !OBSERVABLES.contains(&name) {
                    return Err(err(&format!("observables[{i}]"), format!("unknown observable {name:?}")));
                }
                if !out.iter().any(|o| o == name) {
                    out.push(name.to_string());
                }
            }
            if out.is_empty() {
                return Err(err("observables", "observable list must not be empty"));
            }
            OBSERVABLES.iter().filter(|o| out.iter().any(|x| x == *o)).map(|s| s.to_string()).collect()
        }
        Some(_) => return Err(err("observables", "expected an array of strings")),
    };

    let model = root.sub("model")?.ok_or_else(|| err("model", "missing"))?;
    model.allow(&["d", "size", "boundary", "g", "T", "beta", "coupling"])?;
    let dimension = match model.table.get("d") {
        None => return Err(err("model.d", "missing")),
        Some(Value::Integer(d)) if (1..=3).contains(d) => Dimension::Finite(*d as u8),
        Some(Value::String(s)) => Dimension::parse(s).map_err(|e| err("model.d", e))?,
        Some(_) => return Err(err("model.d", "expected 1, 2, 3 or \"inf\"")),
    };
    let size = model.usize("size")?.ok_or_else(|| err("model.size", "missing"))?;
    if size == 0 {
        return Err(err("model.size", "must be positive"));
    }
    let boundary = match model.str("boundary")? {
        None if backend == BackendKind::Chain || dimension == Dimension::Finite(1) => Boundary::Open,
        None => Boundary::Periodic,
        Some("open") => Boundary::Open,
        Some("periodic") => Boundary::Periodic,
        Some(b) => return Err(err("model.boundary", format!("expected \"open\" or \"periodic\", got {b:?}"))),
    };
    if let Some(j) = model.f64("coupling")? {
        if j != 1.0 {
            return Err(err("model.coupling", "energies are in units of J; coupling must be 1"));
        }
    }
    if model.has("T") && model.has("beta") {
        return Err(err("model", "give either T or beta, not both"));
    }
    let g = model.f64("g")?;
    if let Some(g) = g {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(err("model.g", "must be finite and non-negative"));
        }
    }
    let t = match (model.f64("T")?, model.f64("beta")?) {
        (Some(t), _) => Some(check_temperature("model.T", t)?),
        (_, Some(b)) => Some(temperature_of_beta("model.beta", b)?),
        _ => None,
    };

    let (mut g_grid, mut t_grid) = (None, None);
    if let Some(scan) = root.sub("scan")? {
        scan.allow(&["g", "T", "beta"])?;
        if scan.has("T") && scan.has("beta") {
            return Err(err("scan", "give either T or beta, not both"));
        }
        g_grid = scan.grid("g")?;
        if let Some(gs) = &g_grid {
            if let Some(i) = gs.iter().position(|g| !(*g >= 0.0) || !g.is_finite()) {
                return Err(err(&format!("scan.g[{i}]"), "must be finite and non-negative"));
            }
        }
        if let Some(ts) = scan.grid("T")? {
            for (i, t) in ts.iter().enumerate() {
                check_temperature(&format!("scan.T[{i}]"), *t)?;
            }
            t_grid = Some(ts);
        }
        if let Some(bs) = scan.grid("beta")? {
            let ts: Result<Vec<f64>> = bs.iter().enumerate().map(|(i, b)| temperature_of_beta(&format!("scan.beta[{i}]"), *b)).collect();
            t_grid = Some(ts?);
        }
    }
    let g_grid = match (g_grid, g) {
        (Some(grid), _) => grid,
        (None, Some(g)) => vec![g],
        (None, None) => return Err(err("model.g", "missing (or give scan.g)")),
    };
    let t_grid = match (t_grid, t) {
        (Some(grid), _) => grid,
        (None, Some(t)) => vec![t],
        (None, None) => return Err(err("model.T", "missing (or give model.beta, scan.T or scan.beta)")),
    };
    let spec = ModelSpec::new(dimension, size, g_grid[0], t_grid[0], boundary);

    let mut qmc = QmcControls::default();
    let mut checkpoint = None;
    if let Some(q) = root.sub("qmc")? {
        let o = qmc_overrides(&q)?;
        qmc = o.apply(qmc);
        checkpoint = o.checkpoint;
        check_qmc(&qmc)?;
    }

    let (mut output, mut format) = (None, None);
    if let Some(o) = root.sub("output")? {
        o.allow(&["path", "format"])?;
        output = o.str("path")?.map(PathBuf::from);
        if let Some(f) = o.str("format")? {
            format = Some(Format::parse(f).ok_or_else(|| err("output.format", format!("expected \"csv\" or \"json\", got {f:?}")))?);
        }
    }

    let config = RunConfig { spec, backend, observables, g_grid, t_grid, qmc, checkpoint, output, format };
    validate(&config)?;
    Ok(config)
}

/// QMC settings given explicitly in a `[qmc]` table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QmcOverrides {
    pub thermalization: Option<usize>,
    pub sweeps: Option<usize>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_every: Option<usize>,
}

impl QmcOverrides {
    pub fn apply(&self, base: QmcControls) -> QmcControls {
        QmcControls {
            thermalization: self.thermalization.unwrap_or(base.thermalization),
            sweeps: self.sweeps.unwrap_or(base.sweeps),
            bins: self.bins.unwrap_or(base.bins),
            seed: self.seed.unwrap_or(base.seed),
            checkpoint_every: self.checkpoint_every.unwrap_or(base.checkpoint_every),
        }
    }

    /// A file holding only a `[qmc]` table, as accepted by `reproduce --config`.
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().trim().to_string()))?;
        let root = Fields::root(&table);
        root.allow(&["qmc"])?;
        let Some(q) = root.sub("qmc")? else { return Ok(Self::default()) };
        let o = qmc_overrides(&q)?;
        check_qmc(&o.apply(QmcControls::default()))?;
        Ok(o)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn qmc_overrides(q: &Fields) -> Result<QmcOverrides> {
    q.allow(&["thermalization", "sweeps", "bins", "seed", "checkpoint", "checkpoint_every"])?;
    Ok(QmcOverrides {
        thermalization: q.usize("thermalization")?,
        sweeps: q.usize("sweeps")?,
        bins: q.usize("bins")?,
        seed: q.usize("seed")?.map(|s| s as u64),
        checkpoint: q.str("checkpoint")?.map(PathBuf::from),
        checkpoint_every: q.usize("checkpoint_every")?,
    })
}

fn check_qmc(qmc: &QmcControls) -> Result<()> {
    if qmc.bins < tfim_sse::binning::MIN_BINS {
        return Err(err("qmc.bins", format!("need at least {} bins", tfim_sse::binning::MIN_BINS)));
    }
    if qmc.sweeps < 2 * qmc.bins {
        return Err(err("qmc.sweeps", "need at least two sweeps per bin"));
    }
    if qmc.checkpoint_every == 0 {
        return Err(err("qmc.checkpoint_every", "must be positive"));
    }
    Ok(())
}

/// Backend and geometry compatibility.
pub fn validate(c: &RunConfig) -> Result<()> {
    let spec = &c.spec;
    let n = spec.n_sites();
    match c.backend {
        BackendKind::Chain => {
            if spec.dimension != Dimension::Finite(1) {
                return Err(err("backend", "chain backend needs model.d = 1"));
            }
            if spec.boundary != Boundary::Open {
                return Err(err("model.boundary", "chain backend needs open boundaries"));
            }
            if n < 2 {
                return Err(err("model.size", "chain needs at least 2 sites"));
            }
        }
        BackendKind::Collective => {
            if spec.dimension != Dimension::Infinite {
                return Err(err("backend", "collective backend needs model.d = \"inf\""));
            }
        }
        BackendKind::Qmc => {
            if !matches!(spec.dimension, Dimension::Finite(2) | Dimension::Finite(3)) {
                return Err(err("backend", "qmc backend needs model.d = 2 or 3"));
            }
            if spec.boundary != Boundary::Periodic {
                return Err(err("model.boundary", "qmc backend needs periodic boundaries"));
            }
            if spec.size < 2 {
                return Err(err("model.size", "qmc needs L >= 2"));
            }
            if let Some(i) = c.t_grid.iter().position(|&t| t <= 0.0) {
                let path = if c.t_grid.len() > 1 { format!("scan.T[{i}]") } else { "model.T".to_string() };
                return Err(err(&path, "qmc needs T > 0"));
            }
        }
        BackendKind::Oracle => {
            if n > MAX_ORACLE_SITES {
                return Err(err("model.size", format!("oracle backend handles N <= {MAX_ORACLE_SITES}, got N = {n}")));
            }
        }
    }
    if c.backend != BackendKind::Qmc && c.checkpoint.is_some() {
        return Err(err("qmc.checkpoint", "checkpoints apply to the qmc backend only"));
    }
    spec.validate().map_err(|e| err("model", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
backend = "collective"
[model]
d = "inf"
size = 50
g = 1.0
T = 0.1
"#;

    fn message(text: &str) -> String {
        match RunConfig::parse(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.backend, BackendKind::Collective);
        assert_eq!(c.spec.dimension, Dimension::Infinite);
        assert_eq!(c.grid(), vec![(1.0, 0.1)]);
        assert_eq!(c.observables.len(), OBSERVABLES.len());
    }

    #[test]
    fn beta_and_ranges() {
        let c = RunConfig::parse(
            r#"
backend = "chain"
observables = ["xi_r_sq", "jx_mean"]
[model]
d = 1
size = 10
beta = 4
[scan]
g = { start = 0.5, stop = 1.5, steps = 3 }
"#,
        )
        .unwrap();
        assert_eq!(c.g_grid, vec![0.5, 1.0, 1.5]);
        assert_eq!(c.t_grid, vec![0.25]);
        assert_eq!(c.observables, vec!["jx_mean", "xi_r_sq"]);
        assert_eq!(c.spec.boundary, Boundary::Open);
    }

    #[test]
    fn errors_name_the_field() {
        assert!(message(&BASE.replace("size = 50", "size = -3")).starts_with("model.size:"));
        assert!(message(&BASE.replace("T = 0.1", "T = 0.1\nbeta = 3")).starts_with("model:"));
        assert!(message(&BASE.replace("g = 1.0", "g = \"big\"")).starts_with("model.g:"));
        assert!(message(&format!("{BASE}[scan]\ng = [1.0, \"x\"]")).starts_with("scan.g[1]:"));
        assert!(message(&format!("observables = []\n{BASE}")).starts_with("observables:"));
        assert!(message(&format!("observables = [\"spin\"]\n{BASE}")).starts_with("observables[0]:"));
        assert!(message(&BASE.replace("[model]", "[model]\nsizee = 3")).starts_with("model.sizee:"));
        assert!(message(&format!("{BASE}[scan]\nT = []")).starts_with("scan.T:"));
    }

    #[test]
    fn backend_compatibility() {
        assert!(message(&BASE.replace("d = \"inf\"", "d = 2")).starts_with("backend:"));
        let qmc = BASE.replace("collective", "qmc").replace("d = \"inf\"", "d = 2").replace("size = 50", "size = 4");
        assert!(RunConfig::parse(&qmc).is_ok());
        assert!(message(&qmc.replace("T = 0.1", "T = 0.0")).starts_with("model.T:"));
        assert!(message(&qmc.replace("[model]", "[model]\nboundary = \"open\"")).starts_with("model.boundary:"));
        let oracle = BASE.replace("collective", "oracle").replace("d = \"inf\"", "d = 2").replace("size = 50", "size = 5");
        assert!(message(&oracle).starts_with("model.size:"));
        assert!(message(&format!("{BASE}[qmc]\ncheckpoint = \"x\"")).starts_with("qmc.checkpoint:"));
    }

    #[test]
    fn qmc_controls() {
        let text = BASE.replace("collective", "qmc").replace("d = \"inf\"", "d = 3").replace("size = 50", "size = 3");
        let c = RunConfig::parse(&format!("{text}[qmc]\nsweeps = 640\nseed = 9")).unwrap();
        assert_eq!((c.qmc.sweeps, c.qmc.seed, c.qmc.bins), (640, 9, 32));
        assert!(message(&format!("{text}[qmc]\nbins = 4")).starts_with("qmc.bins:"));
    }
}
