use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ClassPoint, GroupId, Irrep, IrrepLabel};
use crate::error::{domain, Result};

/// Below this modulus the SU(3) Weyl denominator is treated as singular and
/// the character is evaluated as a Schur polynomial instead.
pub(crate) const SU3_DENOMINATOR_FLOOR: f64 = 1e-8;

/// Trace `tr rho(g)` of the irrep on the class `x`.
pub fn character(irrep: &Irrep, x: &ClassPoint) -> Result<Complex64> {
    match (irrep.label, *x) {
        (IrrepLabel::Charge(n), ClassPoint::Circle(theta)) => Ok(Complex64::from_polar(1.0, n as f64 * theta)),
        (IrrepLabel::TwiceSpin(k), ClassPoint::Su2(theta)) => Ok(Complex64::new(su2_character(k, theta), 0.0)),
        (IrrepLabel::Dynkin(p, q), ClassPoint::Su3(a, b)) => {
            Ok(Su3CharacterTable::new(a, b, (p + q + 2) as usize).character(p, q))
        }
        _ => domain(format!("class point {x:?} does not match irrep {irrep}")),
    }
}

/// `sin((k+1) theta/2) / sin(theta/2)` as the Chebyshev polynomial
/// `U_k(cos(theta/2))`, which has no removable singularity to worry about.
pub(crate) fn su2_character(k: u32, theta: f64) -> f64 {
    let x = (0.5 * theta).cos();
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fill `out[k] = U_k(cos(theta/2))` for all `k < out.len()`.
pub(crate) fn su2_characters_into(theta: f64, out: &mut [f64]) {
    let x = (0.5 * theta).cos();
    let (mut prev, mut cur) = (0.0, 1.0);
    for slot in out.iter_mut() {
        *slot = cur;
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
}

/// Density of the Haar measure pushed forward to class coordinates.
pub fn weyl_density(group: GroupId, x: &ClassPoint) -> Result<f64> {
    match (group, *x) {
        (GroupId::Circle, ClassPoint::Circle(_)) => Ok(1.0 / (2.0 * PI)),
        (GroupId::Su2, ClassPoint::Su2(theta)) => Ok(su2_weyl(theta)),
        (GroupId::Su3, ClassPoint::Su3(a, b)) => Ok(su3_weyl(a, b)),
        _ => domain(format!("class point {x:?} does not belong to {group}")),
    }
}

pub(crate) fn su2_weyl(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    s * s / PI
}

pub(crate) fn su3_weyl(a: f64, b: f64) -> f64 {
    let c = -a - b;
    let f = |u: f64, v: f64| {
        let s = (0.5 * (u - v)).sin();
        4.0 * s * s
    };
    f(a, b) * f(a, c) * f(b, c) / (6.0 * 4.0 * PI * PI)
}

/// Cached powers of the three SU(3) eigenvalues at one class point, from
/// which characters of many irreps are read off cheaply.
///
/// Characters come from the Weyl alternant ratio; when the Vandermonde
/// denominator drops below `1e-8` (coincident eigen-angles) they are taken
/// from the Jacobi-Trudi determinant `h_{p+q} h_q - h_{p+q+1} h_{q-1}` in
/// complete homogeneous symmetric polynomials, which is regular everywhere.
pub struct Su3CharacterTable {
    powers: [Vec<Complex64>; 3],
    denominator: Complex64,
    complete: Option<Vec<Complex64>>,
}

impl Su3CharacterTable {
    /// Precompute for labels with `p + q + 2 <= max_level`.
    pub fn new(theta1: f64, theta2: f64, max_level: usize) -> Self {
        let angles = [theta1, theta2, -theta1 - theta2];
        let powers = angles.map(|t| {
            (0..=max_level)
                .map(|m| Complex64::from_polar(1.0, m as f64 * t))
                .collect::<Vec<_>>()
        });
        let z = [powers[0][1], powers[1][1], powers[2][1]];
        let denominator = (z[0] - z[1]) * (z[0] - z[2]) * (z[1] - z[2]);
        let complete = if denominator.norm() < SU3_DENOMINATOR_FLOOR {
            Some(complete_homogeneous(z, max_level))
        } else {
            None
        };
        Su3CharacterTable {
            powers,
            denominator,
            complete,
        }
    }

    pub fn uses_fallback(&self) -> bool {
        self.complete.is_some()
    }

    pub fn character(&self, p: u32, q: u32) -> Complex64 {
        if let Some(h) = &self.complete {
            return schur(h, p, q);
        }
        let a0 = (p + q + 2) as usize;
        let a1 = (q + 1) as usize;
        let z = &self.powers;
        // rows: exponent a0, a1, 0
        let m = |i: usize, a: usize| z[i][a];
        let numerator =
            m(0, a0) * (m(1, a1) - m(2, a1)) - m(1, a0) * (m(0, a1) - m(2, a1)) + m(2, a0) * (m(0, a1) - m(1, a1));
        numerator / self.denominator
    }

    /// Character computed via the Jacobi-Trudi route regardless of the
    /// denominator size.
    pub fn character_schur(&self, p: u32, q: u32) -> Complex64 {
        let z = [self.powers[0][1], self.powers[1][1], self.powers[2][1]];
        let level = self.powers[0].len() - 1;
        schur(&complete_homogeneous(z, level), p, q)
    }
}

fn complete_homogeneous(z: [Complex64; 3], max_level: usize) -> Vec<Complex64> {
    let e1 = z[0] + z[1] + z[2];
    let e2 = z[0] * z[1] + z[0] * z[2] + z[1] * z[2];
    let e3 = z[0] * z[1] * z[2];
    let mut h = vec![Complex64::new(0.0, 0.0); max_level + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for k in 1..=max_level {
        let mut v = e1 * h[k - 1];
        if k >= 2 {
            v -= e2 * h[k - 2];
        }
        if k >= 3 {
            v += e3 * h[k - 3];
        }
        h[k] = v;
    }
    h
}

fn schur(h: &[Complex64], p: u32, q: u32) -> Complex64 {
    let l1 = (p + q) as usize;
    let l2 = q as usize;
    let lower = if l2 == 0 { Complex64::new(0.0, 0.0) } else { h[l2 - 1] };
    h[l1] * h[l2] - h[l1 + 1] * lower
}
