use num_complex::Complex64;
use serde::Serialize;

use super::{EXACT_TOL, SIGMA_MULTIPLE};
use crate::error::{domain, Result};
use crate::lattice::{ChainOutput, LatticeRect, Observable};
use crate::stats::{auto_bin_size, jackknife_fn};

/// Loops whose joint expectation is compared with the product of their expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSet {
    /// `Observable::Loop` entries recorded by the chain.
    pub members: Vec<Observable>,
    /// Accept loops that share plaquettes (used to exhibit dependence).
    pub allow_overlap: bool,
}

impl LoopSet {
    pub fn disjoint(members: Vec<Observable>) -> Self {
        LoopSet {
            members,
            allow_overlap: false,
        }
    }

    pub fn overlapping(members: Vec<Observable>) -> Self {
        LoopSet {
            members,
            allow_overlap: true,
        }
    }

    fn rects(&self) -> Result<Vec<LatticeRect>> {
        self.members
            .iter()
            .map(|o| match o {
                Observable::Loop { rect, .. } => Ok(*rect),
                other => domain(format!("{} is not a single fixed loop", other.label())),
            })
            .collect()
    }

    fn label(&self) -> String {
        self.members
            .iter()
            .map(Observable::label)
            .collect::<Vec<_>>()
            .join(" * ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceCase {
    pub case: String,
    /// `<prod W_i>` as `[re, im]`.
    pub joint: [f64; 2],
    /// `prod <W_i>` as `[re, im]`.
    pub product: [f64; 2],
    /// `|<prod W_i> - prod <W_i>|`
    pub residual: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub overlapping: bool,
    pub loops: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub cases: Vec<IndependenceCase>,
    pub max_residual: f64,
    pub pass: bool,
    /// Every set had fewer than two loops.
    pub vacuous: bool,
}

impl IndependenceReport {
    fn from_cases(cases: Vec<IndependenceCase>) -> Self {
        IndependenceReport {
            max_residual: cases.iter().map(|c| c.residual).fold(0.0, f64::max),
            pass: cases.iter().all(|c| c.pass),
            vacuous: cases.iter().all(|c| c.loops < 2),
            cases,
        }
    }
}

fn complex_product(m: &[f64], k: usize) -> Complex64 {
    (0..k).map(|i| Complex64::new(m[2 * i], m[2 * i + 1])).product()
}

/// Factorization test on jointly recorded chain samples.
///
/// Residual errors come from a binned jackknife over the per-sweep loop
/// values and their per-sweep product.
pub fn verify_independence(sets: &[LoopSet], chain: &ChainOutput) -> Result<IndependenceReport> {
    let mut cases = Vec::with_capacity(sets.len());
    for set in sets {
        let rects = set.rects()?;
        let mut overlapping = false;
        for (i, a) in rects.iter().enumerate() {
            for b in &rects[i + 1..] {
                if !a.disjoint(b) {
                    overlapping = true;
                }
            }
        }
        if overlapping && !set.allow_overlap {
            return domain(format!(
                "loops {} share a plaquette; declare the overlap to test it",
                set.label()
            ));
        }
        let cols: Vec<usize> = set
            .members
            .iter()
            .map(|o| {
                let l = o.label();
                chain
                    .labels
                    .iter()
                    .position(|x| *x == l)
                    .ok_or_else(|| crate::Error::Domain(format!("chain did not record {l}")))
            })
            .collect::<Result<_>>()?;
        if cols.len() < 2 {
            cases.push(IndependenceCase {
                case: set.label(),
                joint: [0.0; 2],
                product: [0.0; 2],
                residual: 0.0,
                stderr: 0.0,
                tolerance: 0.0,
                pass: true,
                overlapping: false,
                loops: cols.len(),
            });
            continue;
        }
        let k = cols.len();
        let mut data: Vec<Vec<f64>> = Vec::with_capacity(2 * k + 2);
        for &c in &cols {
            data.push(chain.series[c].iter().map(|z| z.re).collect());
            data.push(chain.series[c].iter().map(|z| z.im).collect());
        }
        let joint: Vec<Complex64> = (0..chain.len())
            .map(|s| cols.iter().map(|&c| chain.series[c][s]).product())
            .collect();
        data.push(joint.iter().map(|z| z.re).collect());
        data.push(joint.iter().map(|z| z.im).collect());
        let refs: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let bin = data.iter().map(|s| auto_bin_size(s)).max().unwrap_or(1);
        let (res_re, se_re) = jackknife_fn(&refs, bin, |m| m[2 * k] - complex_product(m, k).re)?;
        let (res_im, se_im) = jackknife_fn(&refs, bin, |m| m[2 * k + 1] - complex_product(m, k).im)?;
        let means: Vec<f64> = data.iter().map(|s| s.iter().sum::<f64>() / s.len() as f64).collect();
        let product = complex_product(&means, k);
        let residual = res_re.hypot(res_im);
        let stderr = se_re.hypot(se_im);
        let tolerance = SIGMA_MULTIPLE * stderr;
        cases.push(IndependenceCase {
            case: set.label(),
            joint: [means[2 * k], means[2 * k + 1]],
            product: [product.re, product.im],
            residual,
            stderr,
            tolerance,
            pass: residual <= tolerance,
            overlapping,
            loops: k,
        });
    }
    Ok(IndependenceReport::from_cases(cases))
}

/// Exact joint value and single-loop factors of one loop set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactFactorization {
    pub label: String,
    pub joint: f64,
    pub factors: Vec<f64>,
}

/// Factorization test on exact values with absolute tolerance.
pub fn verify_factorization_exact(cases: &[ExactFactorization]) -> IndependenceReport {
    let cases = cases
        .iter()
        .map(|c| {
            let product: f64 = c.factors.iter().product();
            let residual = if c.factors.len() < 2 {
                0.0
            } else {
                (c.joint - product).abs()
            };
            IndependenceCase {
                case: c.label.clone(),
                joint: [c.joint, 0.0],
                product: [product, 0.0],
                residual,
                stderr: 0.0,
                tolerance: EXACT_TOL,
                pass: residual <= EXACT_TOL,
                overlapping: false,
                loops: c.factors.len(),
            }
        })
        .collect();
    IndependenceReport::from_cases(cases)
}

/// `<e^{i theta_in} e^{i theta_out}>` for nested U(1) loops of areas `a_in < a_out`.
///
/// The inner holonomy angle is Gaussian with variance `g2 a_in`; the outer
/// angle adds an independent Gaussian of variance `g2 (a_out - a_in)`.
pub fn concentric_joint_exact(g2: f64, a_in: f64, a_out: f64) -> Result<f64> {
    if !(0.0 < a_in && a_in < a_out) {
        return domain(format!("need 0 < a_in < a_out, got {a_in} and {a_out}"));
    }
    Ok((-2.0 * g2 * a_in).exp() * (-0.5 * g2 * (a_out - a_in)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{irrep_data, GroupId, IrrepLabel};
    use crate::lattice::{run_chain, ActionSpec, ChainSpec, Lattice2D};

    fn u1(n: i64) -> crate::Irrep {
        irrep_data(GroupId::Circle, IrrepLabel::Charge(n)).unwrap()
    }

    fn lp(x: usize, t: usize, w: usize, h: usize) -> Observable {
        Observable::Loop {
            rect: LatticeRect::new(x, t, w, h),
            irrep: u1(1),
        }
    }

    fn u1_chain(obs: &[Observable], seed: u64) -> ChainOutput {
        let spec = ChainSpec::new(
            Lattice2D::new(4, 4, 1.0).unwrap(),
            GroupId::Circle,
            ActionSpec::HeatKernel { t: 0.5 },
            6200,
            200,
        )
        .unwrap();
        run_chain(&spec, obs, seed).unwrap()
    }

    #[test]
    fn disjoint_plaquettes_factorize() {
        let obs = [lp(0, 0, 1, 1), lp(2, 1, 1, 1), lp(1, 0, 1, 1)];
        let chain = u1_chain(&obs, 61);
        let rep = verify_independence(
            &[
                LoopSet::disjoint(vec![obs[0], obs[1]]),
                LoopSet::disjoint(vec![obs[0], obs[2]]),
            ],
            &chain,
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.cases.iter().all(|c| c.stderr > 0.0));
    }

    #[test]
    fn nested_loops_are_flagged() {
        let obs = [lp(1, 1, 1, 1), lp(0, 0, 2, 2)];
        let chain = u1_chain(&obs, 62);
        let err = verify_independence(&[LoopSet::disjoint(obs.to_vec())], &chain);
        assert!(err.is_err());
        let rep = verify_independence(&[LoopSet::overlapping(obs.to_vec())], &chain).unwrap();
        assert!(!rep.pass);
        // heat times: inner 0.5, outer 2
        let want = concentric_joint_exact(1.0, 0.5, 2.0).unwrap();
        let c = &rep.cases[0];
        assert!(
            (c.joint[0] - want).abs() < 4.0 * c.stderr + 0.01,
            "{} vs {want}",
            c.joint[0]
        );
        assert!(c.overlapping);
    }

    #[test]
    fn single_loop_is_vacuous() {
        let obs = [lp(0, 0, 1, 1)];
        let chain = u1_chain(&obs, 63);
        let rep = verify_independence(&[LoopSet::disjoint(obs.to_vec())], &chain).unwrap();
        assert!(rep.pass && rep.vacuous);
    }

    #[test]
    fn concentric_counterexample_exact() {
        let (g2, a_in, a_out) = (1.0, 0.5, 2.0);
        // oracle: quadrature of E[e^{2 i phi}] E[e^{i psi}] for centred Gaussians
        let gauss_char = |n: f64, var: f64| {
            let m = 20_000;
            let lim = 12.0 * var.sqrt();
            let h = 2.0 * lim / m as f64;
            (0..=m)
                .map(|i| {
                    let x = -lim + i as f64 * h;
                    let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                    w * (n * x).cos() * (-x * x / (2.0 * var)).exp()
                })
                .sum::<f64>()
                * h
                / (2.0 * std::f64::consts::PI * var).sqrt()
        };
        let oracle = gauss_char(2.0, g2 * a_in) * gauss_char(1.0, g2 * (a_out - a_in));
        let joint = concentric_joint_exact(g2, a_in, a_out).unwrap();
        assert!((joint - oracle).abs() < 1e-12);
        let f_in = (-0.5 * g2 * a_in).exp();
        let f_out = (-0.5 * g2 * a_out).exp();
        let rep = verify_factorization_exact(&[ExactFactorization {
            label: "nested".into(),
            joint,
            factors: vec![f_in, f_out],
        }]);
        assert!(!rep.pass);
        let ok = verify_factorization_exact(&[ExactFactorization {
            label: "disjoint".into(),
            joint: f_in * f_out,
            factors: vec![f_in, f_out],
        }]);
        assert!(ok.pass && !ok.vacuous);
        assert!(concentric_joint_exact(1.0, 2.0, 1.0).is_err());
    }
}
