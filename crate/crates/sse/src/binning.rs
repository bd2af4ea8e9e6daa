//! Bin averages, error bars and autocorrelation checks for Markov-chain series.

use tfim_core::Estimate;

/// Fewest bins accepted for an error bar.
pub const MIN_BINS: usize = 20;
/// Relative change of the error under bin-size doubling that flags autocorrelation.
pub const AUTOCORRELATION_TOL: f64 = 0.2;

/// Mean and standard error of one observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcEstimate {
    pub mean: f64,
    pub error: f64,
    pub bins: usize,
    /// Sweeps per bin.
    pub bin_size: usize,
    /// Integrated autocorrelation time in sweeps.
    pub tau_int: f64,
    pub autocorrelated: bool,
}

impl QmcEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean, self.error)
    }
}

/// Mean and standard error of the mean from independent bin values.
pub fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn merge_pairs(values: &[f64]) -> Vec<f64> {
    values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Jackknife mean and error of f applied to per-bin channel values.
pub fn jackknife(channels: &[&[f64]], f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let k = channels[0].len();
    let totals: Vec<f64> = channels.iter().map(|c| c.iter().sum()).collect();
    let full: Vec<f64> = totals.iter().map(|t| t / k as f64).collect();
    let center = f(&full);
    if k < 2 {
        return (center, 0.0);
    }
    let leave_out: Vec<f64> = (0..k)
        .map(|b| {
            let x: Vec<f64> = channels.iter().zip(&totals).map(|(c, t)| (t - c[b]) / (k - 1) as f64).collect();
            f(&x)
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / k as f64;
    let var = leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (k - 1) as f64 / k as f64;
    (center, var.sqrt())
}

/// Streaming accumulator over a fixed set of scalar channels.
///
/// Samples are grouped into fine bins; reported errors use pairs of fine bins,
/// and the autocorrelation check compares the two bin sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Binner {
    pub(crate) channels: usize,
    pub(crate) fine_size: usize,
    pub(crate) open: Vec<f64>,
    pub(crate) filled: usize,
    pub(crate) fine: Vec<Vec<f64>>,
    pub(crate) sum: Vec<f64>,
    pub(crate) sum_sq: Vec<f64>,
    pub(crate) samples: usize,
}

impl Binner {
    pub fn new(channels: usize, fine_size: usize) -> Self {
        assert!(fine_size > 0);
        Binner {
            channels,
            fine_size,
            open: vec![0.0; channels],
            filled: 0,
            fine: vec![Vec::new(); channels],
            sum: vec![0.0; channels],
            sum_sq: vec![0.0; channels],
            samples: 0,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn push(&mut self, sample: &[f64]) {
        debug_assert_eq!(sample.len(), self.channels);
        for (c, &x) in sample.iter().enumerate() {
            self.open[c] += x;
            self.sum[c] += x;
            self.sum_sq[c] += x * x;
        }
        self.samples += 1;
        self.filled += 1;
        if self.filled == self.fine_size {
            for c in 0..self.channels {
                self.fine[c].push(self.open[c] / self.fine_size as f64);
                self.open[c] = 0.0;
            }
            self.filled = 0;
        }
    }

    /// Completed bins of twice the fine size.
    pub fn bins(&self, channel: usize) -> Vec<f64> {
        merge_pairs(&self.fine[channel])
    }

    pub fn estimate(&self, channel: usize) -> QmcEstimate {
        let fine = &self.fine[channel];
        let coarse = merge_pairs(fine);
        let (mean, error) = mean_and_error(&coarse);
        let (_, fine_error) = mean_and_error(&fine[..2 * coarse.len()]);
        let n = self.samples as f64;
        let raw_mean = self.sum[channel] / n;
        let raw_var = (self.sum_sq[channel] / n - raw_mean * raw_mean).max(0.0);
        let bin_size = 2 * self.fine_size;
        let tau_int = if raw_var > 0.0 { 0.5 * bin_size as f64 * error * error * coarse.len() as f64 / raw_var } else { 0.0 };
        let autocorrelated = fine_error > 0.0 && ((error - fine_error) / fine_error).abs() > AUTOCORRELATION_TOL;
        QmcEstimate { mean, error, bins: coarse.len(), bin_size, tau_int, autocorrelated }
    }

    /// Difference of the two half-run means in units of its standard error.
    pub fn drift(&self, channel: usize) -> f64 {
        let bins = self.bins(channel);
        let half = bins.len() / 2;
        if half < 2 {
            return 0.0;
        }
        let (a, ea) = mean_and_error(&bins[..half]);
        let (b, eb) = mean_and_error(&bins[half..2 * half]);
        let sigma = ea.hypot(eb);
        if sigma == 0.0 {
            if a == b {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (a - b).abs() / sigma
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn white_noise_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut b = Binner::new(1, 100);
        for _ in 0..6400 {
            b.push(&[rng.gen::<f64>()]);
        }
        let e = b.estimate(0);
        assert_eq!(e.bins, 32);
        assert!((e.mean - 0.5).abs() < 4.0 * e.error);
        let expected = (1.0f64 / 12.0 / 6400.0).sqrt();
        assert!((e.error / expected - 1.0).abs() < 0.4);
        assert!(e.tau_int < 1.5);
    }

    #[test]
    fn correlated_series_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut b = Binner::new(1, 40);
        let mut x = 0.0;
        for _ in 0..2560 {
            x = 0.995 * x + rng.gen::<f64>() - 0.5;
            b.push(&[x]);
        }
        let e = b.estimate(0);
        assert!(e.autocorrelated);
        assert!(e.tau_int > 20.0);
    }

    #[test]
    fn jackknife_of_linear_function_is_plain_error() {
        let a = [1.0, 2.0, 3.0, 4.0, 6.0];
        let (m, e) = jackknife(&[&a], |x| 2.0 * x[0]);
        let (m0, e0) = mean_and_error(&a);
        assert!((m - 2.0 * m0).abs() < 1e-12 && (e - 2.0 * e0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_no_drift() {
        let mut b = Binner::new(2, 2);
        for _ in 0..64 {
            b.push(&[1.0, -2.0]);
        }
        assert_eq!(b.drift(0), 0.0);
        assert_eq!(b.estimate(1).error, 0.0);
    }
}
