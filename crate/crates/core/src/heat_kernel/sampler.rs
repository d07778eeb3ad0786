use std::f64::consts::PI;

use rand::Rng;

use super::HeatKernel;
use crate::error::{Error, Result};
use crate::group::character::{su2_weyl, su3_weyl};
use crate::group::element::random_unit_vector;
use crate::group::{haar_sample, ClassPoint, GroupElement, GroupId, Su2, Su3};

/// Intervals of the tabulated class-angle CDF for U(1) and SU(2).
pub const CDF_NODES: usize = 8192;
/// Cells per torus direction for the SU(3) joint table.
pub const SU3_CELLS: usize = 256;

#[derive(Debug, Clone)]
enum Table {
    /// Density `f_i` at `theta_i = i h` and cumulative mass at the nodes.
    Line { h: f64, pdf: Vec<f64>, cdf: Vec<f64> },
    /// Cumulative cell masses over the row-major `SU3_CELLS^2` torus grid.
    Torus { h: f64, cdf: Vec<f64> },
}

/// Exact sampler for the heat-kernel measure.
///
/// The class coordinate is drawn by inverse transform from a tabulated CDF
/// of `K_t * weyl_density`, then conjugated by a Haar-random element. On the
/// line the density is taken piecewise linear between nodes, so the CDF is
/// piecewise quadratic and inverted in closed form. For SU(3) the joint
/// density on the torus is tabulated cell by cell (midpoint masses) and
/// sampled uniformly inside the chosen cell.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct HeatKernelSampler {
    group: GroupId,
    t: f64,
    table: Table,
}

impl HeatKernelSampler {
    pub fn new(kernel: &HeatKernel) -> Result<Self> {
        let group = kernel.group();
        let table = match group {
            GroupId::Circle | GroupId::Su2 => {
                let n = CDF_NODES;
                let h = 2.0 * PI / n as f64;
                let pdf: Vec<f64> = (0..=n)
                    .map(|i| {
                        let theta = i as f64 * h;
                        match group {
                            GroupId::Circle => kernel.density(&ClassPoint::Circle(theta)) / (2.0 * PI),
                            _ => kernel.density(&ClassPoint::Su2(theta)) * su2_weyl(theta),
                        }
                    })
                    .collect();
                let mut cdf = Vec::with_capacity(n + 1);
                cdf.push(0.0);
                let mut acc = 0.0;
                for w in pdf.windows(2) {
                    acc += 0.5 * h * (w[0] + w[1]);
                    cdf.push(acc);
                }
                check_total(acc)?;
                Table::Line { h, pdf, cdf }
            }
            GroupId::Su3 => {
                let n = SU3_CELLS;
                let h = 2.0 * PI / n as f64;
                let mut cdf = Vec::with_capacity(n * n);
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                        acc += kernel.density(&ClassPoint::Su3(a, b)) * su3_weyl(a, b) * h * h;
                        cdf.push(acc);
                    }
                }
                check_total(acc)?;
                Table::Torus { h, cdf }
            }
        };
        Ok(HeatKernelSampler {
            group,
            t: kernel.t(),
            table,
        })
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Tabulated CDF of the class angle at `theta` (U(1) and SU(2) only).
    pub fn class_cdf(&self, theta: f64) -> Option<f64> {
        match &self.table {
            Table::Line { h, pdf, cdf } => {
                let total = *cdf.last().unwrap();
                let x = theta.clamp(0.0, 2.0 * PI);
                let i = ((x / h).floor() as usize).min(pdf.len() - 2);
                let u = x - i as f64 * h;
                let slope = (pdf[i + 1] - pdf[i]) / h;
                Some((cdf[i] + pdf[i] * u + 0.5 * slope * u * u) / total)
            }
            Table::Torus { .. } => None,
        }
    }

    /// Draw a class coordinate.
    pub fn sample_class<R: Rng + ?Sized>(&self, rng: &mut R) -> ClassPoint {
        match &self.table {
            Table::Line { h, pdf, cdf } => {
                let total = *cdf.last().unwrap();
                let target = rng.random::<f64>() * total;
                // first node with cdf > target
                let i = cdf.partition_point(|&c| c <= target).clamp(1, cdf.len() - 1) - 1;
                let r = target - cdf[i];
                let (f0, f1) = (pdf[i], pdf[i + 1]);
                let slope = (f1 - f0) / h;
                let disc = (f0 * f0 + 2.0 * slope * r).max(0.0);
                let denom = f0 + disc.sqrt();
                let u = if denom > 0.0 {
                    (2.0 * r / denom).min(*h)
                } else {
                    0.5 * h
                };
                let theta = (i as f64 * h + u).min(2.0 * PI);
                match self.group {
                    GroupId::Circle => ClassPoint::Circle(crate::group::wrap_angle(theta)),
                    _ => ClassPoint::Su2(theta),
                }
            }
            Table::Torus { h, cdf } => {
                let total = *cdf.last().unwrap();
                let target = rng.random::<f64>() * total;
                let idx = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
                let (i, j) = (idx / SU3_CELLS, idx % SU3_CELLS);
                let a = (i as f64 + rng.random::<f64>()) * h;
                let b = (j as f64 + rng.random::<f64>()) * h;
                ClassPoint::Su3(a, b)
            }
        }
    }

    /// Draw a group element from the heat-kernel measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match self.sample_class(rng) {
            ClassPoint::Circle(theta) => GroupElement::Circle(theta),
            ClassPoint::Su2(theta) => GroupElement::Su2(Su2::from_axis_angle(random_unit_vector(rng), theta)),
            ClassPoint::Su3(a, b) => {
                let g = haar_sample(GroupId::Su3, rng);
                GroupElement::Su3(Su3::diagonal(a, b)).conjugated_by(&g)
            }
        }
    }
}

fn check_total(total: f64) -> Result<()> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Evaluation(format!("tabulated heat-kernel mass is {total}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{character, irrep_data, IrrepLabel};
    use crate::heat_kernel::{hk_coefficient, HeatKernelSpec};
    use crate::seeded_rng;

    fn sampler(g: GroupId, t: f64) -> HeatKernelSampler {
        let k = HeatKernel::new(HeatKernelSpec::new(g, t).unwrap()).unwrap();
        HeatKernelSampler::new(&k).unwrap()
    }

    fn mean_and_err(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn circle_mean_matches_coefficient() {
        let s = sampler(GroupId::Circle, 1.0);
        let mut rng = seeded_rng(11);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| match s.sample(&mut rng) {
                GroupElement::Circle(t) => t.cos(),
                _ => unreachable!(),
            })
            .collect();
        let (m, e) = mean_and_err(&xs);
        assert!((m - (-0.5f64).exp()).abs() < 3.0 * e, "{m} +- {e}");
    }

    #[test]
    fn su2_mean_matches_coefficient() {
        let s = sampler(GroupId::Su2, 1.0);
        let r = irrep_data(GroupId::Su2, IrrepLabel::TwiceSpin(1)).unwrap();
        let mut rng = seeded_rng(12);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| character(&r, &s.sample(&mut rng).class_of()).unwrap().re / 2.0)
            .collect();
        let (m, e) = mean_and_err(&xs);
        assert!((m - 0.6873).abs() < 3.0 * e + 5e-5, "{m} +- {e}");
    }

    #[test]
    fn sampler_soundness_all_irreps() {
        for g in [GroupId::Circle, GroupId::Su2, GroupId::Su3] {
            let t = 0.7;
            let s = sampler(g, t);
            let mut rng = seeded_rng(13);
            let samples: Vec<ClassPoint> = (0..40_000).map(|_| s.sample(&mut rng).class_of()).collect();
            for r in crate::group::enumerate_irreps(g, 4.0).unwrap() {
                let xs: Vec<f64> = samples
                    .iter()
                    .map(|x| character(&r, x).unwrap().re / r.dim_f64())
                    .collect();
                let (m, e) = mean_and_err(&xs);
                let want = hk_coefficient(&r, t).unwrap();
                // SU(3) cell tabulation carries a small O(h^2) bias
                let slack = if g == GroupId::Su3 { 2e-3 } else { 0.0 };
                assert!((m - want).abs() < 3.0 * e + slack + 1e-12, "{r}: {m} +- {e} vs {want}");
            }
        }
    }

    #[test]
    fn cdf_interpolation_error_is_small() {
        for g in [GroupId::Circle, GroupId::Su2] {
            let t = 0.25;
            let s = sampler(g, t);
            let k = HeatKernel::new(HeatKernelSpec::new(g, t).unwrap()).unwrap();
            // reference: fine trapezoid on [0, x]
            for &x in &[0.05, 0.3, 1.0, 2.5, 4.0] {
                let m = 200_000;
                let h = x / m as f64;
                let f = |th: f64| match g {
                    GroupId::Circle => k.density(&ClassPoint::Circle(th)) / (2.0 * PI),
                    _ => k.density(&ClassPoint::Su2(th)) * su2_weyl(th),
                };
                let mut acc = 0.5 * (f(0.0) + f(x));
                for i in 1..m {
                    acc += f(i as f64 * h);
                }
                let want = acc * h;
                let got = s.class_cdf(x).unwrap();
                assert!((got - want).abs() < 1e-6, "{g} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = sampler(GroupId::Su2, 0.4);
        let a = s.sample(&mut seeded_rng(5));
        let b = s.sample(&mut seeded_rng(5));
        assert_eq!(a, b);
    }

    #[test]
    fn strong_coupling_samples_look_haar() {
        let s = sampler(GroupId::Circle, 60.0);
        let mut rng = seeded_rng(6);
        let mut xs: Vec<f64> = (0..20_000)
            .map(|_| match s.sample(&mut rng) {
                GroupElement::Circle(t) => t / (2.0 * PI),
                _ => unreachable!(),
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &u)| (u - i as f64 / n).abs().max(((i + 1) as f64 / n - u).abs()))
            .fold(0.0, f64::max);
        // asymptotic Kolmogorov critical value at the 1% level
        assert!(d < 1.628 / n.sqrt(), "D = {d}");
    }
}
