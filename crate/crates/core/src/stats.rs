//! Summary statistics for Monte Carlo output.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = CompensatedSum::new();
    s.extend(values);
    s.value()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    compensated_sum(values.iter().map(|x| (x - m) * (x - m))) / (n - 1) as f64
}

/// Integrated autocorrelation time with Sokal's self-consistent window
/// (`c = 5`). Never below `1/2`.
pub fn integrated_autocorrelation(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 4 {
        return 0.5;
    }
    let m = mean(values);
    let c0 = compensated_sum(values.iter().map(|x| (x - m) * (x - m))) / n as f64;
    if c0 <= 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n / 2 {
        let ct =
            compensated_sum((0..n - t).map(|i| (values[i] - m) * (values[i + t] - m))) / n as f64;
        tau += ct / c0;
        if (t as f64) >= 5.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableStats {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub tau_int: f64,
    pub n: usize,
}

impl ObservableStats {
    /// Standard error inflated by `2 tau_int`.
    pub fn from_series(name: impl Into<String>, values: &[f64]) -> Self {
        let n = values.len();
        let tau = integrated_autocorrelation(values);
        let stderr = if n > 1 {
            (2.0 * tau * variance(values) / n as f64).sqrt()
        } else {
            0.0
        };
        ObservableStats {
            name: name.into(),
            mean: mean(values),
            stderr,
            tau_int: tau,
            n,
        }
    }

    /// Number of standard errors between the mean and `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.stderr
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

/// Pearson goodness-of-fit against equal expected counts; returns `(statistic, p)`.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return (0.0, 1.0);
    }
    let expected = total as f64 / k as f64;
    let stat = compensated_sum(counts.iter().map(|&c| {
        let diff = c as f64 - expected;
        diff * diff / expected
    }));
    let dist = ChiSquared::new((k - 1) as f64).expect("positive degrees of freedom");
    (stat, dist.sf(stat))
}
