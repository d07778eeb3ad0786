//! Binned jackknife and integrated autocorrelation time.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Monte Carlo estimate of an expectation value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    /// Integrated autocorrelation time in units of samples (0.5 if uncorrelated).
    pub tau: f64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn consistent_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Sokal's window constant for the automatic windowing procedure.
const WINDOW_C: f64 = 6.0;

/// Integrated autocorrelation time `1/2 + sum_{s=1}^{W} rho(s)` with the
/// window `W` chosen as the smallest lag satisfying `W >= 6 tau(W)`.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 2 {
        return 0.5;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 <= 0.0 || !c0.is_finite() {
        return 0.5;
    }
    let mut tau = 0.5;
    for lag in 1..n / 2 {
        let c: f64 = series[..n - lag]
            .iter()
            .zip(&series[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64;
        tau += c / c0;
        if lag as f64 >= WINDOW_C * tau {
            break;
        }
    }
    tau.max(0.5)
}

/// Jackknife over `bin_size`-blocked data for an arbitrary function of the
/// means of several equally long series.
///
/// Returns `(estimate, stderr)` where `estimate` is `f` at the full means.
pub fn jackknife_fn<F>(series: &[&[f64]], bin_size: usize, f: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if series.is_empty() {
        return domain("jackknife needs at least one series");
    }
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        return domain("jackknife series must have equal length");
    }
    if bin_size == 0 {
        return domain("bin size must be at least 1");
    }
    if n < 2 * bin_size {
        return domain(format!("series of length {n} too short for bin size {bin_size}"));
    }
    let nb = n / bin_size;
    let used = nb * bin_size;
    let bins: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            s[..used]
                .chunks(bin_size)
                .map(|c| c.iter().sum::<f64>() / bin_size as f64)
                .collect()
        })
        .collect();
    let totals: Vec<f64> = bins.iter().map(|b| b.iter().sum::<f64>()).collect();
    let full: Vec<f64> = totals.iter().map(|t| t / nb as f64).collect();
    let estimate = f(&full);

    let mut leave_out = vec![0.0; series.len()];
    let mut jk = Vec::with_capacity(nb);
    for i in 0..nb {
        for (k, b) in bins.iter().enumerate() {
            leave_out[k] = (totals[k] - b[i]) / (nb - 1) as f64;
        }
        jk.push(f(&leave_out));
    }
    let jk_mean = jk.iter().sum::<f64>() / nb as f64;
    let var = jk.iter().map(|v| (v - jk_mean).powi(2)).sum::<f64>() * (nb - 1) as f64 / nb as f64;
    Ok((estimate, var.max(0.0).sqrt()))
}

/// Binned jackknife estimate of the mean.
pub fn jackknife(series: &[f64], bin_size: usize) -> Result<McEstimate> {
    let (mean, stderr) = jackknife_fn(&[series], bin_size, |m| m[0])?;
    Ok(McEstimate {
        mean,
        stderr,
        n: series.len(),
        tau: integrated_autocorrelation(series),
    })
}

/// Bin size chosen from the autocorrelation time, keeping at least 20 bins.
pub fn auto_bin_size(series: &[f64]) -> usize {
    let tau = integrated_autocorrelation(series);
    let b = (4.0 * tau).ceil() as usize;
    b.clamp(1, (series.len() / 20).max(1))
}

/// Jackknife with [`auto_bin_size`].
pub fn estimate(series: &[f64]) -> Result<McEstimate> {
    jackknife(series, auto_bin_size(series))
}
