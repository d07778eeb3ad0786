use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exact::RectLoop;
use crate::group::Irrep;

/// Size function `sigma` of a loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaGauge {
    Area,
    Length,
}

impl SigmaGauge {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "area" => Ok(SigmaGauge::Area),
            "length" | "perimeter" => Ok(SigmaGauge::Length),
            other => domain(format!("unknown sigma gauge `{other}` (expected area or length)")),
        }
    }

    pub fn sigma(self, lp: &RectLoop) -> f64 {
        match self {
            SigmaGauge::Area => lp.area(),
            SigmaGauge::Length => lp.perimeter(),
        }
    }
}

/// Largest growth exponent of the ratios, in powers of `1/sigma`, that still passes.
pub const GROWTH_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub irrep: String,
    pub sigma: Vec<f64>,
    /// `(d - value) / sigma`
    pub ratios: Vec<f64>,
    /// Largest ratio on the curve.
    pub bound: f64,
    /// Ratio at the smallest `sigma`.
    pub limit_slope: f64,
    /// Local exponent `s` of `ratio ~ sigma^-s` over the last two points.
    pub growth_exponent: f64,
    pub monotone: bool,
    pub pass: bool,
}

/// Regularity check on `(sigma, value)` pairs sorted by strictly decreasing `sigma`.
///
/// Passes when the ratios stop growing toward small `sigma`: the local
/// power-law exponent over the two smallest loops is at most [`GROWTH_LIMIT`].
pub fn verify_regularity_sigma(curve: &[(f64, f64)], irrep: &Irrep) -> Result<RegularityReport> {
    if curve.len() < 3 {
        return domain(format!("regularity needs at least 3 points, got {}", curve.len()));
    }
    if let Some(&(s, _)) = curve.iter().find(|(s, _)| !(*s > 0.0 && s.is_finite())) {
        return domain(format!("sigma must be positive, got {s}"));
    }
    if curve.windows(2).any(|w| w[1].0 >= w[0].0) {
        return domain("curve must be sorted by strictly decreasing sigma");
    }
    let d = irrep.dim_f64();
    let sigma: Vec<f64> = curve.iter().map(|p| p.0).collect();
    let ratios: Vec<f64> = curve.iter().map(|&(s, v)| (d - v) / s).collect();
    let n = ratios.len();
    let (r0, r1) = (ratios[n - 2], ratios[n - 1]);
    let growth_exponent = if r1 <= 0.0 || r1 <= r0 {
        0.0
    } else if r0 <= 0.0 {
        f64::INFINITY
    } else {
        (r1 / r0).ln() / (sigma[n - 2] / sigma[n - 1]).ln()
    };
    Ok(RegularityReport {
        irrep: irrep.to_string(),
        bound: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        limit_slope: r1,
        monotone: ratios.windows(2).all(|w| w[1] >= w[0]),
        pass: growth_exponent <= GROWTH_LIMIT,
        growth_exponent,
        sigma,
        ratios,
    })
}

/// Regularity check on loop data with `sigma` chosen by `gauge`.
pub fn verify_regularity(curve: &[(RectLoop, f64)], irrep: &Irrep, gauge: SigmaGauge) -> Result<RegularityReport> {
    let pts: Vec<(f64, f64)> = curve.iter().map(|(lp, v)| (gauge.sigma(lp), *v)).collect();
    verify_regularity_sigma(&pts, irrep)
}
