//! Static potentials, area/perimeter law fits and Casimir scaling.
//!
//! All Wilson loop values here are normalized, `W = <tr rho(h)> / d_rho`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exact::{wilson_exact_loop, CouplingSpec, RectLoop};
use crate::group::Irrep;

/// Absolute slack added to the plateau comparison.
pub const PLATEAU_ABS_TOL: f64 = 1e-10;
/// Multiple of the combined error allowed between the last two potential estimates.
pub const PLATEAU_SIGMA: f64 = 2.0;
/// Relative Casimir-scaling tolerance for Monte Carlo fits.
pub const CASIMIR_TOL_MC: f64 = 0.02;
/// Relative Casimir-scaling tolerance for exact data.
pub const CASIMIR_TOL_EXACT: f64 = 1e-8;

/// One normalized rectangular Wilson loop measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopPoint {
    pub lp: RectLoop,
    pub w: f64,
    pub stderr: f64,
}

/// Exact normalized values on the given loops.
pub fn exact_loop_points(irrep: &Irrep, loops: &[RectLoop], c: CouplingSpec) -> Vec<LoopPoint> {
    loops
        .iter()
        .map(|lp| LoopPoint {
            lp: *lp,
            w: wilson_exact_loop(irrep, lp, c) / irrep.dim_f64(),
            stderr: 0.0,
        })
        .collect()
}

/// Fixed narrow width `r`, growing temporal extents.
pub fn narrow_loop_family(r: f64, dts: &[f64]) -> Result<Vec<RectLoop>> {
    dts.iter().map(|&dt| RectLoop::new(r, dt)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialEstimate {
    pub dt: f64,
    pub v: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialExtraction {
    pub r: f64,
    pub estimates: Vec<PotentialEstimate>,
    /// Estimate at the largest `dt`.
    pub v: f64,
    pub stderr: f64,
    /// Last two estimates agree within the plateau tolerance.
    pub converged: bool,
}

/// `V(dt) = -ln W / dt` along the loops of width `r`.
pub fn extract_potential(points: &[LoopPoint], r: f64) -> Result<PotentialExtraction> {
    let mut sel: Vec<&LoopPoint> = points
        .iter()
        .filter(|p| (p.lp.r - r).abs() <= 1e-12 * r.abs().max(1.0))
        .collect();
    if let Some(p) = sel.iter().find(|p| !(p.w > 0.0)) {
        return domain(format!(
            "Wilson loop value must be positive, got {} at dt={}",
            p.w, p.lp.dt
        ));
    }
    sel.sort_by(|a, b| a.lp.dt.total_cmp(&b.lp.dt));
    sel.dedup_by(|a, b| a.lp.dt == b.lp.dt);
    if sel.len() < 3 {
        return domain(format!("need at least 3 distinct dt at r={r}, got {}", sel.len()));
    }
    let estimates: Vec<PotentialEstimate> = sel
        .iter()
        .map(|p| PotentialEstimate {
            dt: p.lp.dt,
            v: -p.w.ln() / p.lp.dt,
            stderr: p.stderr / (p.w * p.lp.dt),
        })
        .collect();
    let n = estimates.len();
    let (a, b) = (&estimates[n - 2], &estimates[n - 1]);
    let converged = (b.v - a.v).abs() <= PLATEAU_SIGMA * a.stderr.hypot(b.stderr) + PLATEAU_ABS_TOL;
    Ok(PotentialExtraction {
        r,
        v: b.v,
        stderr: b.stderr,
        converged,
        estimates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LawKind {
    Area,
    Perimeter,
    Ambiguous,
}

/// Weighted least-squares fit `-ln W = sigma A + mu P + c0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialFit {
    pub sigma: f64,
    pub mu: f64,
    pub c0: f64,
    /// `sqrt(sum w_i r_i^2)`
    pub residual_norm: f64,
    /// Covariance of `(sigma, mu, c0)` under the supplied errors (unit errors if none).
    pub covariance: [[f64; 3]; 3],
    pub law: LawKind,
}

impl PotentialFit {
    pub fn sigma_stderr(&self) -> f64 {
        self.covariance[0][0].sqrt()
    }

    /// Correlation coefficient between `sigma` and `mu`.
    pub fn sigma_mu_correlation(&self) -> f64 {
        self.covariance[0][1] / (self.covariance[0][0] * self.covariance[1][1]).sqrt()
    }
}

const RANK_TOL: f64 = 1e-10;

pub fn fit_area_perimeter(points: &[LoopPoint]) -> Result<PotentialFit> {
    if points.len() < 4 {
        return domain(format!(
            "area/perimeter fit needs at least 4 points, got {}",
            points.len()
        ));
    }
    if let Some(p) = points.iter().find(|p| !(p.w > 0.0)) {
        return domain(format!("Wilson loop value must be positive, got {}", p.w));
    }
    let weighted = points.iter().all(|p| p.stderr > 0.0);
    let n = points.len();
    let mut x = DMatrix::<f64>::zeros(n, 3);
    let mut y = DVector::<f64>::zeros(n);
    for (i, p) in points.iter().enumerate() {
        let s = if weighted { p.w / p.stderr } else { 1.0 };
        x[(i, 0)] = s * p.lp.area();
        x[(i, 1)] = s * p.lp.perimeter();
        x[(i, 2)] = s;
        y[i] = -s * p.w.ln();
    }
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= RANK_TOL * smax {
        return Err(Error::DegenerateInput(
            "area and perimeter design matrix is rank deficient".into(),
        ));
    }
    let beta = svd.solve(&y, 0.0).map_err(|e| Error::Evaluation(e.to_string()))?;
    let r = &y - &x * &beta;
    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateInput("normal matrix is singular".into()))?;
    let covariance = std::array::from_fn(|i| std::array::from_fn(|j| xtx_inv[(i, j)]));

    let mean_a = points.iter().map(|p| p.lp.area()).sum::<f64>() / n as f64;
    let mean_p = points.iter().map(|p| p.lp.perimeter()).sum::<f64>() / n as f64;
    let (area_part, perim_part) = (beta[0].abs() * mean_a, beta[1].abs() * mean_p);
    let law = if area_part > 10.0 * perim_part {
        LawKind::Area
    } else if perim_part > 10.0 * area_part {
        LawKind::Perimeter
    } else {
        LawKind::Ambiguous
    };
    Ok(PotentialFit {
        sigma: beta[0],
        mu: beta[1],
        c0: beta[2],
        residual_norm: r.norm(),
        covariance,
        law,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasimirRow {
    pub irrep: String,
    pub sigma: f64,
    pub measured_ratio: f64,
    pub predicted_ratio: f64,
    /// Relative deviation, absolute when the prediction is zero.
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasimirScalingReport {
    pub reference: String,
    pub tolerance: f64,
    pub rows: Vec<CasimirRow>,
    pub pass: bool,
}

/// Compare `sigma_rho / sigma_ref` with `c_rho / c_ref`.
pub fn casimir_scaling_report(
    fits: &[(Irrep, PotentialFit)],
    reference: &Irrep,
    tol: f64,
) -> Result<CasimirScalingReport> {
    let Some((_, rf)) = fits
        .iter()
        .find(|(r, _)| r.group == reference.group && r.label == reference.label)
    else {
        return domain(format!("no fit for the reference irrep {reference}"));
    };
    if !(rf.sigma > 0.0) {
        return domain(format!("reference string tension must be positive, got {}", rf.sigma));
    }
    let rows: Vec<CasimirRow> = fits
        .iter()
        .map(|(r, f)| {
            let measured = f.sigma / rf.sigma;
            let predicted = r.casimir / reference.casimir;
            let deviation = if predicted == 0.0 {
                measured.abs()
            } else {
                (measured / predicted - 1.0).abs()
            };
            CasimirRow {
                irrep: r.to_string(),
                sigma: f.sigma,
                measured_ratio: measured,
                predicted_ratio: predicted,
                deviation,
                pass: deviation <= tol,
            }
        })
        .collect();
    Ok(CasimirScalingReport {
        reference: reference.to_string(),
        tolerance: tol,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::static_potential_exact;
    use crate::group::{irrep_data, GroupId, IrrepLabel};

    fn su2(k: u32) -> Irrep {
        irrep_data(GroupId::Su2, IrrepLabel::TwiceSpin(k)).unwrap()
    }

    fn grid() -> Vec<RectLoop> {
        let mut v = Vec::new();
        for r in [0.5, 1.0, 2.0] {
            for dt in [1.0, 2.0, 3.0, 5.0] {
                v.push(RectLoop::new(r, dt).unwrap());
            }
        }
        v
    }

    fn synthetic(loops: &[RectLoop], sigma: f64, mu: f64) -> Vec<LoopPoint> {
        loops
            .iter()
            .map(|lp| LoopPoint {
                lp: *lp,
                w: (-sigma * lp.area() - mu * lp.perimeter()).exp(),
                stderr: 0.0,
            })
            .collect()
    }

    #[test]
    fn exact_potential_is_flat() {
        let c = CouplingSpec::new(1.0).unwrap();
        let loops = narrow_loop_family(2.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let ex = extract_potential(&exact_loop_points(&su2(1), &loops, c), 2.0).unwrap();
        let want = static_potential_exact(&su2(1), 2.0, c).unwrap();
        assert!((want - 0.75).abs() < 1e-15);
        assert!(ex.estimates.iter().all(|e| (e.v - want).abs() < 1e-14));
        let mean = ex.estimates.iter().map(|e| e.v).sum::<f64>() / 4.0;
        let var = ex.estimates.iter().map(|e| (e.v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(var < 1e-12);
        assert!(ex.converged && (ex.v - want).abs() < 1e-14);
    }

    #[test]
    fn perimeter_correction_is_not_a_plateau() {
        let (sigma, mu, r) = (0.4, 0.1, 1.0);
        let loops = narrow_loop_family(r, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let ex = extract_potential(&synthetic(&loops, sigma, mu), r).unwrap();
        for e in &ex.estimates {
            // oracle: sigma r + 2 mu + 2 mu r / dt
            assert!((e.v - (sigma * r + 2.0 * mu + 2.0 * mu * r / e.dt)).abs() < 1e-12);
        }
        assert!(!ex.converged);
        // the 1/dt correction hides inside 5% loop errors
        let mut noisy = synthetic(&loops, sigma, mu);
        for p in &mut noisy {
            p.stderr = 0.05 * p.w;
        }
        assert!(extract_potential(&noisy, r).unwrap().converged);
    }

    #[test]
    fn free_case_and_errors() {
        let loops = narrow_loop_family(1.0, &[1.0, 2.0, 3.0]).unwrap();
        let ex = extract_potential(&synthetic(&loops, 0.0, 0.0), 1.0).unwrap();
        assert!(ex.estimates.iter().all(|e| e.v == 0.0));
        let mut bad = synthetic(&loops, 0.1, 0.0);
        bad[1].w = 0.0;
        assert!(extract_potential(&bad, 1.0).is_err());
        assert!(extract_potential(&synthetic(&loops[..2], 0.1, 0.0), 1.0).is_err());
    }

    #[test]
    fn exact_area_law_fit() {
        for g2 in [0.5, 1.0, 2.0] {
            let c = CouplingSpec::new(g2).unwrap();
            for k in 1..4 {
                let r = su2(k);
                let fit = fit_area_perimeter(&exact_loop_points(&r, &grid(), c)).unwrap();
                assert!((fit.sigma - 0.5 * g2 * r.casimir).abs() < 1e-10);
                assert!(fit.mu.abs() < 1e-10 && fit.c0.abs() < 1e-10);
                assert_eq!(fit.law, LawKind::Area);
                assert!(fit.residual_norm < 1e-10);
            }
        }
    }

    #[test]
    fn pure_perimeter_law() {
        let fit = fit_area_perimeter(&synthetic(&grid(), 0.0, 0.3)).unwrap();
        assert!(fit.sigma.abs() < 1e-10 && (fit.mu - 0.3).abs() < 1e-10);
        assert_eq!(fit.law, LawKind::Perimeter);
    }

    #[test]
    fn similar_shapes_report_correlation() {
        let loops: Vec<RectLoop> = [0.5, 1.0, 1.5, 2.0, 3.0]
            .iter()
            .map(|&s| RectLoop::new(s, 2.0 * s).unwrap())
            .collect();
        let fit = fit_area_perimeter(&synthetic(&loops, 0.2, 0.05)).unwrap();
        assert!((fit.sigma - 0.2).abs() < 1e-10 && (fit.mu - 0.05).abs() < 1e-10);
        let rho = fit.sigma_mu_correlation();
        assert!(rho.is_finite() && rho.abs() > 0.5, "{rho}");
    }

    #[test]
    fn degenerate_designs() {
        let same: Vec<RectLoop> = vec![RectLoop::new(1.0, 2.0).unwrap(); 5];
        assert!(matches!(
            fit_area_perimeter(&synthetic(&same, 0.2, 0.0)),
            Err(Error::DegenerateInput(_))
        ));
        // constant perimeter: P = 2 (r + dt) = 8, so mu and c0 are confounded
        let loops: Vec<RectLoop> = [1.0, 1.5, 2.0, 3.0]
            .iter()
            .map(|&r| RectLoop::new(r, 4.0 - r).unwrap())
            .collect();
        assert!(matches!(
            fit_area_perimeter(&synthetic(&loops, 0.2, 0.0)),
            Err(Error::DegenerateInput(_))
        ));
        assert!(fit_area_perimeter(&synthetic(&grid()[..3], 0.2, 0.0)).is_err());
    }

    #[test]
    fn weighted_fit_uses_errors() {
        let mut pts = synthetic(&grid(), 0.3, 0.0);
        for p in &mut pts {
            p.stderr = 0.01 * p.w;
        }
        let fit = fit_area_perimeter(&pts).unwrap();
        assert!((fit.sigma - 0.3).abs() < 1e-10);
        assert!(fit.sigma_stderr() > 0.0 && fit.sigma_stderr() < 0.01);
    }

    #[test]
    fn casimir_scaling() {
        let loops = grid();
        let fits_for = |g: GroupId, labels: &[IrrepLabel], g2: f64| -> Vec<(Irrep, PotentialFit)> {
            let c = CouplingSpec::new(g2).unwrap();
            labels
                .iter()
                .map(|&l| {
                    let r = irrep_data(g, l).unwrap();
                    (r, fit_area_perimeter(&exact_loop_points(&r, &loops, c)).unwrap())
                })
                .collect()
        };
        let labels = [
            IrrepLabel::TwiceSpin(0),
            IrrepLabel::TwiceSpin(1),
            IrrepLabel::TwiceSpin(2),
        ];
        for g2 in [0.5, 3.0] {
            let rep = casimir_scaling_report(&fits_for(GroupId::Su2, &labels, g2), &su2(1), CASIMIR_TOL_EXACT).unwrap();
            assert!(rep.pass);
            assert!((rep.rows[2].measured_ratio - 8.0 / 3.0).abs() < 1e-9);
            assert!(rep.rows[0].sigma.abs() < 1e-12 && rep.rows[0].measured_ratio.abs() < 1e-10);
        }
        let u = fits_for(GroupId::Circle, &[IrrepLabel::Charge(1), IrrepLabel::Charge(3)], 1.0);
        let rep = casimir_scaling_report(&u, &u[0].0, CASIMIR_TOL_EXACT).unwrap();
        assert!((rep.rows[1].measured_ratio - 9.0).abs() < 1e-8);
        let trivial = fits_for(GroupId::Su2, &labels[..1], 1.0);
        assert!(casimir_scaling_report(&trivial, &su2(0), 0.02).is_err());
        assert!(casimir_scaling_report(&trivial, &su2(1), 0.02).is_err());
    }
}
