use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::character::{su2_weyl, su3_weyl};
use super::{ClassPoint, GroupId};
use crate::error::{Error, Result};

/// Composite trapezoid rule on the class domain.
///
/// `nodes` is the number of intervals per dimension. The integrands met in
/// practice are smooth and periodic, for which the rule converges
/// geometrically and is exact on trigonometric polynomials of degree below
/// `nodes`. The error estimate compares against the rule on every other
/// node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrature {
    pub nodes: usize,
}

impl Quadrature {
    pub fn new(nodes: usize) -> Self {
        Quadrature { nodes }
    }

    /// 2048 intervals for U(1) and SU(2), 256 x 256 for SU(3).
    pub fn default_for(group: GroupId) -> Self {
        match group {
            GroupId::Circle | GroupId::Su2 => Quadrature { nodes: 2048 },
            GroupId::Su3 => Quadrature { nodes: 256 },
        }
    }

    pub fn doubled(&self) -> Self {
        Quadrature { nodes: self.nodes * 2 }
    }

    /// Nodes with their Haar weights (Weyl density folded in) on the fine
    /// grid and on the coarse grid of every other node.
    pub fn nodes(&self, group: GroupId) -> Vec<QuadNode> {
        let n = self.nodes.max(2) & !1;
        let h = 2.0 * PI / n as f64;
        match group {
            GroupId::Circle => (0..n)
                .map(|j| QuadNode {
                    point: ClassPoint::Circle(j as f64 * h),
                    weight: 1.0 / n as f64,
                    coarse_weight: if j % 2 == 0 { 2.0 / n as f64 } else { 0.0 },
                })
                .collect(),
            GroupId::Su2 => (0..=n)
                .map(|j| {
                    let theta = j as f64 * h;
                    let end = if j == 0 || j == n { 0.5 } else { 1.0 };
                    let w = su2_weyl(theta);
                    QuadNode {
                        point: ClassPoint::Su2(theta),
                        weight: end * h * w,
                        coarse_weight: if j % 2 == 0 { 2.0 * end * h * w } else { 0.0 },
                    }
                })
                .collect(),
            GroupId::Su3 => {
                let mut out = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let (a, b) = (i as f64 * h, j as f64 * h);
                        let w = su3_weyl(a, b) * h * h;
                        let coarse = if i % 2 == 0 && j % 2 == 0 { 4.0 * w } else { 0.0 };
                        out.push(QuadNode {
                            point: ClassPoint::Su3(a, b),
                            weight: w,
                            coarse_weight: coarse,
                        });
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub point: ClassPoint,
    pub weight: f64,
    pub coarse_weight: f64,
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

/// `int f dHaar` over the group for a class function `f`.
pub fn haar_integrate<F>(group: GroupId, f: F, quad: Quadrature) -> Result<Integral>
where
    F: Fn(&ClassPoint) -> Complex64,
{
    let mut fine = Complex64::new(0.0, 0.0);
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for node in quad.nodes(group) {
        let v = f(&node.point);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Evaluation(format!("integrand is {v} at {:?}", node.point)));
        }
        fine += v * node.weight;
        coarse += v * node.coarse_weight;
        magnitude += v.norm() * node.weight;
    }
    Ok(Integral {
        value: fine,
        error: (fine - coarse).norm() + 16.0 * f64::EPSILON * magnitude,
    })
}
