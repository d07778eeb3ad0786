use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{wrap_angle, ClassPoint, GroupId};

/// Unit quaternion `a + i (b sigma_x + c sigma_y + d sigma_z)`, i.e. the
/// matrix `[[a + i d, c + i b], [-c + i b, a - i d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2(pub [f64; 4]);

impl Su2 {
    pub const IDENTITY: Su2 = Su2([1.0, 0.0, 0.0, 0.0]);

    /// `exp(i theta/2 n.sigma)`; trace `2 cos(theta/2)`.
    pub fn from_axis_angle(axis: [f64; 3], theta: f64) -> Su2 {
        let (s, c) = (0.5 * theta).sin_cos();
        Su2([c, s * axis[0], s * axis[1], s * axis[2]])
    }

    pub fn mul(&self, o: &Su2) -> Su2 {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        // (a1 + i v1.s)(a2 + i v2.s) = a1a2 - v1.v2 + i (a1 v2 + a2 v1 - v1 x v2).s
        Su2([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + a2 * b1 - (c1 * d2 - d1 * c2),
            a1 * c2 + a2 * c1 - (d1 * b2 - b1 * d2),
            a1 * d2 + a2 * d1 - (b1 * c2 - c1 * b2),
        ])
    }

    pub fn inverse(&self) -> Su2 {
        let [a, b, c, d] = self.0;
        Su2([a, -b, -c, -d])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Su2 {
        let n = self.norm();
        Su2(self.0.map(|x| x / n))
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.0[0]
    }

    pub fn to_matrix(&self) -> [[Complex64; 2]; 2] {
        let [a, b, c, d] = self.0;
        [
            [Complex64::new(a, d), Complex64::new(c, b)],
            [Complex64::new(-c, b), Complex64::new(a, -d)],
        ]
    }
}

/// SU(3) element as a dense complex 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su3(pub Matrix3<Complex64>);

impl Su3 {
    pub fn identity() -> Su3 {
        Su3(Matrix3::identity())
    }

    pub fn diagonal(theta1: f64, theta2: f64) -> Su3 {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = Complex64::from_polar(1.0, theta1);
        m[(1, 1)] = Complex64::from_polar(1.0, theta2);
        m[(2, 2)] = Complex64::from_polar(1.0, -theta1 - theta2);
        Su3(m)
    }

    /// Embed an SU(2) element in the rows/columns `(i, j)`.
    pub fn embed_su2(u: &Su2, i: usize, j: usize) -> Su3 {
        let s = u.to_matrix();
        let mut m = Matrix3::identity();
        m[(i, i)] = s[0][0];
        m[(i, j)] = s[0][1];
        m[(j, i)] = s[1][0];
        m[(j, j)] = s[1][1];
        Su3(m)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Gram-Schmidt the first two rows and complete with the conjugated
    /// cross product, which fixes `det = 1`.
    pub fn reunitarized(&self) -> Su3 {
        let row = |i: usize| [self.0[(i, 0)], self.0[(i, 1)], self.0[(i, 2)]];
        let (u, v) = orthonormal_pair(row(0), row(1));
        Su3(from_rows(u, v))
    }

    pub fn unitarity_defect(&self) -> f64 {
        let p = self.0 * self.0.adjoint() - Matrix3::identity();
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }

    /// Eigen-angles sorted ascending in `[0, 2pi)`.
    pub fn eigen_angles(&self) -> [f64; 3] {
        let mut th = su3_eigenvalues(self.trace()).map(|z| wrap_angle(z.arg()));
        th.sort_by(f64::total_cmp);
        th
    }
}

fn normalize3(v: [Complex64; 3]) -> [Complex64; 3] {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

fn orthonormal_pair(u: [Complex64; 3], v: [Complex64; 3]) -> ([Complex64; 3], [Complex64; 3]) {
    let u = normalize3(u);
    let proj: Complex64 = (0..3).map(|k| u[k].conj() * v[k]).sum();
    let v = normalize3([v[0] - proj * u[0], v[1] - proj * u[1], v[2] - proj * u[2]]);
    (u, v)
}

fn from_rows(u: [Complex64; 3], v: [Complex64; 3]) -> Matrix3<Complex64> {
    let w = [
        (u[1] * v[2] - u[2] * v[1]).conj(),
        (u[2] * v[0] - u[0] * v[2]).conj(),
        (u[0] * v[1] - u[1] * v[0]).conj(),
    ];
    Matrix3::new(u[0], u[1], u[2], v[0], v[1], v[2], w[0], w[1], w[2])
}

/// Roots of `z^3 - a z^2 + conj(a) z - 1`, the characteristic polynomial of
/// an SU(3) matrix with trace `a`. Cardano followed by Newton polishing;
/// results are projected onto the unit circle.
pub(crate) fn su3_eigenvalues(a: Complex64) -> [Complex64; 3] {
    let one = Complex64::new(1.0, 0.0);
    let poly = |z: Complex64| ((z - a) * z + a.conj()) * z - one;
    let dpoly = |z: Complex64| (z * 3.0 - a * 2.0) * z + a.conj();

    let p = a.conj() - a * a / 3.0;
    let q = -a * a * a * (2.0 / 27.0) + a * a.conj() / 3.0 - one;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let c1 = -q / 2.0 + disc;
    let c2 = -q / 2.0 - disc;
    let cube = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut roots = [a / 3.0; 3];
    if cube.norm() > 1e-300 {
        let u0 = cube.powf(1.0 / 3.0);
        let mut u = u0;
        for r in roots.iter_mut() {
            *r += u - p / (u * 3.0);
            u *= omega;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let d = dpoly(*r);
            if d.norm() < 1e-12 {
                break;
            }
            let step = poly(*r) / d;
            *r -= step;
            if step.norm() < 1e-16 {
                break;
            }
        }
        *r /= r.norm();
    }
    roots
}

/// A concrete group element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupElement {
    Circle(f64),
    Su2(Su2),
    Su3(Su3),
}

impl GroupElement {
    pub fn identity(group: GroupId) -> Self {
        match group {
            GroupId::Circle => GroupElement::Circle(0.0),
            GroupId::Su2 => GroupElement::Su2(Su2::IDENTITY),
            GroupId::Su3 => GroupElement::Su3(Su3::identity()),
        }
    }

    pub fn group(&self) -> GroupId {
        match self {
            GroupElement::Circle(_) => GroupId::Circle,
            GroupElement::Su2(_) => GroupId::Su2,
            GroupElement::Su3(_) => GroupId::Su3,
        }
    }

    /// Group product `self * other`. Panics on mixed groups.
    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        match (self, other) {
            (GroupElement::Circle(a), GroupElement::Circle(b)) => GroupElement::Circle(wrap_angle(a + b)),
            (GroupElement::Su2(a), GroupElement::Su2(b)) => GroupElement::Su2(a.mul(b)),
            (GroupElement::Su3(a), GroupElement::Su3(b)) => GroupElement::Su3(Su3(a.0 * b.0)),
            _ => panic!("cannot multiply elements of different groups"),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Circle(a) => GroupElement::Circle(wrap_angle(-a)),
            GroupElement::Su2(a) => GroupElement::Su2(a.inverse()),
            GroupElement::Su3(a) => GroupElement::Su3(Su3(a.0.adjoint())),
        }
    }

    /// `g * self * g^-1`
    pub fn conjugated_by(&self, g: &GroupElement) -> GroupElement {
        g.mul(self).mul(&g.inverse())
    }

    /// Project back onto the group after accumulated rounding.
    pub fn renormalized(&self) -> GroupElement {
        match self {
            GroupElement::Circle(a) => GroupElement::Circle(wrap_angle(*a)),
            GroupElement::Su2(a) => GroupElement::Su2(a.normalized()),
            GroupElement::Su3(a) => GroupElement::Su3(a.reunitarized()),
        }
    }

    /// `tr g` in the defining representation.
    pub fn trace(&self) -> Complex64 {
        match self {
            GroupElement::Circle(a) => Complex64::from_polar(1.0, *a),
            GroupElement::Su2(a) => Complex64::new(a.trace(), 0.0),
            GroupElement::Su3(a) => a.trace(),
        }
    }

    /// Conjugacy-class coordinates of this element.
    pub fn class_of(&self) -> ClassPoint {
        match self {
            GroupElement::Circle(a) => ClassPoint::Circle(wrap_angle(*a)),
            GroupElement::Su2(u) => {
                let a = (u.0[0] / u.norm()).clamp(-1.0, 1.0);
                ClassPoint::Su2(2.0 * a.acos())
            }
            GroupElement::Su3(m) => {
                let th = m.eigen_angles();
                ClassPoint::Su3(th[0], th[1])
            }
        }
    }

    /// Deviation from the group's normalisation constraint.
    pub fn normalization_defect(&self) -> f64 {
        match self {
            GroupElement::Circle(_) => 0.0,
            GroupElement::Su2(u) => (u.norm() - 1.0).abs(),
            GroupElement::Su3(m) => m.unitarity_defect().max((m.determinant() - 1.0).norm()),
        }
    }
}

pub(crate) fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

fn gaussian_c3<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 3] {
    std::array::from_fn(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Draw an element from the normalised Haar measure.
pub fn haar_sample<R: Rng + ?Sized>(group: GroupId, rng: &mut R) -> GroupElement {
    match group {
        GroupId::Circle => GroupElement::Circle(rng.random::<f64>() * 2.0 * PI),
        GroupId::Su2 => loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-12 {
                break GroupElement::Su2(Su2(q.map(|x| x / n)));
            }
        },
        GroupId::Su3 => {
            let (u, v) = orthonormal_pair(gaussian_c3(rng), gaussian_c3(rng));
            GroupElement::Su3(Su3(from_rows(u, v)))
        }
    }
}
