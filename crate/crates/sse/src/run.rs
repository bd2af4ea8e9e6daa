//! Complete QMC runs: thermalization, measurement, binning and reports.

use std::collections::BTreeMap;

use tfim_core::{Dimension, Estimate, Flag, Lattice, ModelSpec, SubsystemGeometry};

use crate::binning::{jackknife, Binner, QmcEstimate, MIN_BINS};
use crate::chain::{Representation, SseChain, SseModel, YySample};
use crate::error::{Result, SseError};

/// Energy drift between bin halves, in combined standard errors, that flags poor thermalization.
pub const DRIFT_TOL: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SseParams {
    pub thermalization: usize,
    pub sweeps: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for SseParams {
    fn default() -> Self {
        SseParams { thermalization: 10_000, sweeps: 100_000, bins: 32, seed: 1 }
    }
}

impl SseParams {
    pub fn validate(&self) -> Result<()> {
        if self.bins < MIN_BINS {
            return Err(SseError::InvalidSetup(format!("need at least {MIN_BINS} bins, got {}", self.bins)));
        }
        if self.sweeps < 2 * self.bins {
            return Err(SseError::InvalidSetup(format!("{} sweeps cannot fill {} bins", self.sweeps, self.bins)));
        }
        Ok(())
    }

    fn fine_size(&self) -> usize {
        self.sweeps / (2 * self.bins)
    }
}

/// Results of one run in one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct QmcReport {
    pub representation: Representation,
    pub n_sites: usize,
    pub beta: f64,
    pub field: f64,
    pub estimates: BTreeMap<String, QmcEstimate>,
    /// ⟨S^y_0 S^y_r⟩ by periodic displacement r (x basis).
    pub yy_by_displacement: Vec<QmcEstimate>,
    /// Var(J^y_A) for each configured subsystem (x basis).
    pub subsystems: Vec<(SubsystemGeometry, QmcEstimate)>,
    /// Jackknife ξ_R² (x basis).
    pub xi_r_sq: Option<Estimate>,
    pub flags: Vec<Flag>,
    pub mean_order: f64,
    pub cutoff: usize,
    pub loops_per_sweep: usize,
    pub mean_loop_length: f64,
    pub aborted_loops: u64,
}

impl QmcReport {
    pub fn get(&self, name: &str) -> Option<&QmcEstimate> {
        self.estimates.get(name)
    }
}

/// Resumable run state.
#[derive(Debug, Clone)]
pub struct SseRun {
    pub chain: SseChain,
    pub params: SseParams,
    pub subsystems: Vec<SubsystemGeometry>,
    pub(crate) counts: Vec<Vec<usize>>,
    pub thermalized: usize,
    pub measured: usize,
    pub(crate) max_n: usize,
    pub(crate) therm_legs: u64,
    pub(crate) therm_loops: u64,
    pub(crate) therm_n: u64,
    pub(crate) binner: Binner,
}

fn stream(repr: Representation) -> u64 {
    match repr {
        Representation::XBasis => 0,
        Representation::ZBasis => 1,
    }
}

impl SseRun {
    pub fn new(model: SseModel, params: SseParams, subsystems: Vec<SubsystemGeometry>) -> Result<Self> {
        params.validate()?;
        if !subsystems.is_empty() && !model.is_periodic() {
            return Err(SseError::InvalidSetup("subsystem variances need a periodic hypercube".into()));
        }
        if subsystems.iter().flat_map(|g| &g.sites).any(|&s| s >= model.n_sites()) {
            return Err(SseError::InvalidSetup("subsystem site outside the lattice".into()));
        }
        let counts: Vec<Vec<usize>> = subsystems.iter().map(|g| g.displacement_counts(&model.lattice)).collect();
        let channels = Self::channel_count(&model, subsystems.len());
        let repr = model.representation;
        let chain = SseChain::new(model, params.seed, stream(repr));
        Ok(SseRun {
            chain,
            params,
            subsystems,
            counts,
            thermalized: 0,
            measured: 0,
            max_n: 0,
            therm_legs: 0,
            therm_loops: 0,
            therm_n: 0,
            binner: Binner::new(channels, params.fine_size()),
        })
    }

    pub(crate) fn channel_count(model: &SseModel, subsystems: usize) -> usize {
        match model.representation {
            Representation::XBasis => 3 + subsystems + if model.is_periodic() { model.n_sites() } else { 0 },
            Representation::ZBasis => 3,
        }
    }

    pub fn total_sweeps(&self) -> usize {
        self.params.thermalization + 2 * self.params.bins * self.params.fine_size()
    }

    pub fn done(&self) -> usize {
        self.thermalized + self.measured
    }

    pub fn is_finished(&self) -> bool {
        self.done() >= self.total_sweeps()
    }

    /// Runs at most `budget` sweeps; returns true once the run is complete.
    pub fn advance(&mut self, budget: usize) -> Result<bool> {
        for _ in 0..budget {
            if self.is_finished() {
                break;
            }
            if self.thermalized < self.params.thermalization {
                self.thermalization_sweep()?;
            } else {
                self.measurement_sweep();
            }
        }
        Ok(self.is_finished())
    }

    fn thermalization_sweep(&mut self) -> Result<()> {
        let before = self.chain.stats.clone();
        self.chain.sweep(None);
        let n = self.chain.n_ops();
        self.max_n = self.max_n.max(n);
        self.chain.adjust_cutoff(self.max_n)?;
        self.thermalized += 1;
        if self.chain.model.representation == Representation::XBasis {
            self.therm_legs += self.chain.stats.legs - before.legs;
            self.therm_loops += self.chain.stats.loops - before.loops;
            self.therm_n += n as u64;
            if self.therm_loops > 0 && self.therm_legs > 0 {
                let mean_len = self.therm_legs as f64 / self.therm_loops as f64;
                let mean_n = self.therm_n as f64 / self.thermalized as f64;
                let target = (2.0 * mean_n / mean_len).ceil() as usize;
                self.chain.loops_per_sweep = target.clamp(1, 64 * self.chain.model.n_sites() + 1024);
            }
        }
        Ok(())
    }

    fn measurement_sweep(&mut self) {
        let model = &self.chain.model;
        let n_sites = model.n_sites();
        let mut sample = Vec::with_capacity(self.binner.channels());
        match model.representation {
            Representation::XBasis => {
                let mut yy = YySample::new(n_sites);
                self.chain.sweep(Some(&mut yy));
                sample.push(self.chain.energy());
                sample.push(self.chain.jx_sample());
                sample.push(n_sites as f64 * yy.row_sum());
                for c in &self.counts {
                    sample.push(c.iter().enumerate().map(|(r, &k)| k as f64 * yy.correlation(r)).sum());
                }
                if self.chain.model.is_periodic() {
                    sample.extend((0..n_sites).map(|r| yy.correlation(r)));
                }
            }
            Representation::ZBasis => {
                self.chain.sweep(None);
                let (jz_sq, integral) = self.chain.jz_samples();
                sample.push(self.chain.energy());
                sample.push(jz_sq);
                sample.push(jz_sq - integral);
            }
        }
        self.binner.push(&sample);
        self.measured += 1;
    }

    pub fn report(&self) -> QmcReport {
        let model = &self.chain.model;
        let repr = model.representation;
        let n_sites = model.n_sites();
        let mut estimates = BTreeMap::new();
        estimates.insert("energy".to_string(), self.binner.estimate(0));
        let mut yy_by_displacement = Vec::new();
        let mut subsystems = Vec::new();
        let mut xi_r_sq = None;
        match repr {
            Representation::XBasis => {
                estimates.insert("jx_mean".to_string(), self.binner.estimate(1));
                estimates.insert("var_jy".to_string(), self.binner.estimate(2));
                for (k, g) in self.subsystems.iter().enumerate() {
                    subsystems.push((g.clone(), self.binner.estimate(3 + k)));
                }
                if model.is_periodic() {
                    let base = 3 + self.subsystems.len();
                    yy_by_displacement = (0..n_sites).map(|r| self.binner.estimate(base + r)).collect();
                }
                let (jx, vy) = (self.binner.bins(1), self.binner.bins(2));
                let n = n_sites as f64;
                let (value, error) = jackknife(&[&jx, &vy], |x| n * x[1] / (x[0] * x[0]));
                if value.is_finite() {
                    xi_r_sq = Some(Estimate::new(value, error));
                }
            }
            Representation::ZBasis => {
                estimates.insert("var_jz".to_string(), self.binner.estimate(1));
                estimates.insert("qv_jz".to_string(), self.binner.estimate(2));
            }
        }
        let mut flags = Vec::new();
        if self.binner.drift(0) > DRIFT_TOL {
            flags.push(Flag::ThermalizationFailure);
        }
        let correlated = estimates.values().chain(subsystems.iter().map(|(_, e)| e)).any(|e| e.autocorrelated);
        if correlated {
            flags.push(Flag::Autocorrelation);
        }
        let stats = &self.chain.stats;
        QmcReport {
            representation: repr,
            n_sites,
            beta: model.beta,
            field: model.field,
            estimates,
            yy_by_displacement,
            subsystems,
            xi_r_sq,
            flags,
            mean_order: model.beta * (model.energy_offset() - self.binner.estimate(0).mean),
            cutoff: self.chain.string.cutoff(),
            loops_per_sweep: self.chain.loops_per_sweep,
            mean_loop_length: if stats.loops > 0 { stats.legs as f64 / stats.loops as f64 } else { 0.0 },
            aborted_loops: stats.aborted,
        }
    }
}

/// Checks that `spec` is a periodic hypercube of dimension 2 or 3 at T > 0.
pub fn validate_qmc_spec(spec: &ModelSpec) -> Result<()> {
    spec.validate()?;
    match spec.dimension {
        Dimension::Finite(2) | Dimension::Finite(3) => {}
        d => return Err(SseError::InvalidSetup(format!("QMC runs on d = 2 or 3 lattices, got {d:?}"))),
    }
    if spec.boundary != tfim_core::Boundary::Periodic {
        return Err(SseError::InvalidSetup("QMC needs periodic boundaries".into()));
    }
    if !(spec.temperature > 0.0) {
        return Err(SseError::InvalidSetup("QMC needs T > 0".into()));
    }
    Ok(())
}

/// Builds a run for `spec` in the given representation.
pub fn sse_run(spec: &ModelSpec, representation: Representation, params: &SseParams, subsystems: &[SubsystemGeometry]) -> Result<SseRun> {
    validate_qmc_spec(spec)?;
    let lattice = Lattice::for_spec(spec);
    let model = SseModel::new(&lattice, spec.field(), spec.beta(), representation)?;
    SseRun::new(model, *params, subsystems.to_vec())
}

/// Runs a complete simulation and returns its report.
pub fn run_sse(spec: &ModelSpec, representation: Representation, params: &SseParams, subsystems: &[SubsystemGeometry]) -> Result<QmcReport> {
    let mut run = sse_run(spec, representation, params, subsystems)?;
    run.advance(usize::MAX)?;
    Ok(run.report())
}
