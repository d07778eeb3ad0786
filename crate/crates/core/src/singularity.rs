//! Separation of the refined heat-kernel lattice measure from the Haar measure.
//!
//! The lattice measure on `N` plaquettes is a product of `N` independent
//! factors `K_{T/N}` relative to the product Haar measure. By Kakutani's
//! dichotomy two such infinite products are mutually singular exactly when
//! the product of the per-factor Hellinger affinities tends to zero, so the
//! scan tracks `N ln H(T/N)` as `N` grows.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exact::{wilson_exact_loop, CouplingSpec, RectLoop};
use crate::group::{character, haar_integrate, GroupId, Irrep, Quadrature};
use crate::heat_kernel::{HeatKernel, HeatKernelSpec, MIN_TIME};

/// Truncation tolerance for affinity evaluation on U(1) and SU(2).
///
/// A truncation error `e` in `K_t` enters the affinity as roughly `sqrt(e)`
/// wherever `K_t` is tiny, so the default tolerance is too loose here.
pub const AFFINITY_EPS: f64 = 1e-30;

/// Heat-kernel spec used for affinities: [`AFFINITY_EPS`] on U(1) and SU(2),
/// the default tolerance on SU(3) where the irrep count grows quadratically.
pub fn affinity_spec(group: GroupId, t: f64) -> Result<HeatKernelSpec> {
    let spec = HeatKernelSpec::new(group, t)?;
    match group {
        GroupId::Su3 => Ok(spec),
        _ => spec.with_eps(AFFINITY_EPS),
    }
}

/// `int sqrt(K_t) dHaar`, with the mass of negative truncation excursions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Affinity {
    pub value: f64,
    pub error: f64,
    /// `int max(-K_t, 0) dHaar`, removed before the square root.
    pub clamped_mass: f64,
}

pub fn hellinger_affinity(kernel: &HeatKernel, quad: Quadrature) -> Result<Affinity> {
    let g = kernel.group();
    let h = haar_integrate(g, |x| Complex64::new(kernel.density_raw(x).max(0.0).sqrt(), 0.0), quad)?;
    let clamped = haar_integrate(g, |x| Complex64::new((-kernel.density_raw(x)).max(0.0), 0.0), quad)?;
    Ok(Affinity {
        value: h.value.re,
        error: h.error,
        clamped_mass: clamped.value.re,
    })
}

/// Small-time U(1) model `(2t/pi)^(1/4)`.
pub fn circle_affinity_model(t: f64) -> f64 {
    (2.0 * t / PI).powf(0.25)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub t: f64,
    pub affinity: Option<f64>,
    pub log_product: Option<f64>,
    /// `N ln((2T/(pi N))^(1/4))`, U(1) only.
    pub model: Option<f64>,
    pub clamped_mass: f64,
    /// Why the row was not evaluated.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityScanReport {
    pub group: GroupId,
    pub total_time: f64,
    pub rows: Vec<ScanRow>,
    pub strictly_decreasing: bool,
    /// Log-product falling at a non-slowing rate in `ln N`.
    pub diverging: bool,
    pub rationale: &'static str,
}

const RATIONALE: &str = "product measures of independent plaquette factors are either equivalent or mutually \
singular; they are singular when the product of per-factor Hellinger affinities tends to zero, i.e. when \
N ln H(T/N) diverges to minus infinity under refinement";

impl SingularityScanReport {
    fn evaluated(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.log_product.map(|l| (r.n, l)))
            .collect()
    }

    /// CSV with columns `N,t,H,log_product` (empty cells for unevaluated rows).
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["N", "t", "H", "log_product"])?;
        let cell = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                format!("{:e}", r.t),
                cell(r.affinity),
                cell(r.log_product),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Affinity and log-product at each refinement level `N` for heat time `T = g2 * area`.
pub fn refinement_scan(group: GroupId, total_area: f64, g2: f64, ns: &[usize]) -> Result<SingularityScanReport> {
    let c = CouplingSpec::new(g2)?;
    if !(total_area > 0.0 && total_area.is_finite()) {
        return domain(format!("total area must be positive, got {total_area}"));
    }
    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return domain("refinement levels must be positive and strictly increasing");
    }
    let total = c.heat_time(total_area);
    let quad = Quadrature::default_for(group);
    let rows: Vec<ScanRow> = ns
        .par_iter()
        .map(|&n| {
            let t = total / n as f64;
            let model = (group == GroupId::Circle).then(|| n as f64 * circle_affinity_model(t).ln());
            if t < MIN_TIME {
                return Ok(ScanRow {
                    n,
                    t,
                    affinity: None,
                    log_product: None,
                    model,
                    clamped_mass: 0.0,
                    skipped: Some(format!("t = {t:e} below the minimum heat time {MIN_TIME:e}")),
                });
            }
            let a = hellinger_affinity(&HeatKernel::new(affinity_spec(group, t)?)?, quad)?;
            Ok(ScanRow {
                n,
                t,
                affinity: Some(a.value),
                log_product: Some(n as f64 * a.value.ln()),
                model,
                clamped_mass: a.clamped_mass,
                skipped: None,
            })
        })
        .collect::<Result<_>>()?;
    let mut report = SingularityScanReport {
        group,
        total_time: total,
        rows,
        strictly_decreasing: false,
        diverging: false,
        rationale: RATIONALE,
    };
    let ev = report.evaluated();
    report.strictly_decreasing = ev.len() >= 2 && ev.windows(2).all(|w| w[1].1 < w[0].1);
    let slopes: Vec<f64> = ev
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / ((w[1].0 as f64).ln() - (w[0].0 as f64).ln()))
        .collect();
    report.diverging = report.strictly_decreasing && slopes.len() >= 2 && slopes.windows(2).all(|s| s[1] <= s[0]);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongCouplingReport {
    pub irrep: String,
    /// `(g2, <tr rho(h)>)`
    pub rows: Vec<(f64, f64)>,
    /// `int chi dHaar`
    pub haar_value: f64,
    pub strictly_decreasing: bool,
    /// `|last value - haar value|`
    pub final_gap: f64,
}

/// Closed-form loop values along increasing `g2`, compared with the Haar expectation.
pub fn strong_coupling_check(irrep: &Irrep, lp: &RectLoop, g2_list: &[f64]) -> Result<StrongCouplingReport> {
    if irrep.is_trivial() {
        return domain("strong-coupling check needs a nontrivial irrep");
    }
    if g2_list.is_empty() {
        return domain("strong-coupling check needs at least one coupling");
    }
    let rows: Vec<(f64, f64)> = g2_list
        .iter()
        .map(|&g2| Ok((g2, wilson_exact_loop(irrep, lp, CouplingSpec::new(g2)?))))
        .collect::<Result<_>>()?;
    let haar = haar_integrate(
        irrep.group,
        |x| character(irrep, x).unwrap_or_default(),
        Quadrature::default_for(irrep.group),
    )?;
    let last = rows.last().map(|r| r.1).unwrap_or_default();
    Ok(StrongCouplingReport {
        irrep: irrep.to_string(),
        strictly_decreasing: rows.windows(2).all(|w| w[0].0 < w[1].0 && w[1].1 < w[0].1),
        final_gap: (last - haar.value.re).abs(),
        haar_value: haar.value.re,
        rows,
    })
}
