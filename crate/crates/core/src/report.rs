use serde::{Deserialize, Serialize};

/// A value with its standard error (zero for exact backends).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    /// True when `self` and `other` differ by at most `k` combined standard errors
    /// (plus an absolute slack for exact comparisons).
    pub fn agrees_with(&self, other: &Estimate, k: f64, slack: f64) -> bool {
        let sigma = self.error.hypot(other.error);
        (self.value - other.value).abs() <= k * sigma + slack
    }
}

/// Conditions a backend wants the caller to know about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Ground-state gap below 1e-10 J at T = 0.
    DegenerateGround,
    /// |⟨J^x⟩| smaller than three of its standard errors.
    DivisionHazard,
    /// Imaginary-time quadrature not converged.
    QuadratureUnconverged,
    /// Real-time correlator not decayed at the edge of the window.
    TruncatedWindow,
    /// Energy drift between the two halves of the bins.
    ThermalizationFailure,
    /// Error estimate not stable under doubling of the bin size.
    Autocorrelation,
    /// Pfaffian conditioning degraded.
    IllConditioned,
    /// Computed χ^{-2} outside the QV sandwich.
    SandwichViolation,
}

/// Unified output record of every backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableReport {
    pub n_sites: usize,
    pub g: f64,
    pub temperature: f64,
    pub jx_mean: Estimate,
    pub var_jy: Estimate,
    pub var_jz: Estimate,
    pub qv_jz: Estimate,
    pub qfi_jz: Option<Estimate>,
    pub xi_r_sq: Estimate,
    pub chi_sq: Option<Estimate>,
    pub energy: Option<Estimate>,
    pub flags: Vec<Flag>,
}

impl ObservableReport {
    /// ξ_R^{-2}.
    pub fn inverse_xi_sq(&self) -> Estimate {
        invert(self.xi_r_sq)
    }

    /// χ^{-2} = QFI/N, when available.
    pub fn inverse_chi_sq(&self) -> Option<Estimate> {
        self.qfi_jz.map(|q| {
            let n = self.n_sites as f64;
            Estimate::new(q.value / n, q.error / n)
        })
    }

    pub fn flag(&mut self, flag: Flag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }

    pub fn has_flag(&self, flag: &Flag) -> bool {
        self.flags.contains(flag)
    }
}

fn invert(e: Estimate) -> Estimate {
    let v = 1.0 / e.value;
    Estimate::new(v, e.error * v * v)
}
