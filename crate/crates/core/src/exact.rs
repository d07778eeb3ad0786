//! Closed-form Wilson loops of two-dimensional Yang-Mills on the plane.
//!
//! For a non-self-overlapping loop of area `A`,
//! `<tr rho(h)> = d_rho exp(-g^2 c_rho A / 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::group::Irrep;

/// Rectangular loop with spatial extent `r` and temporal extent `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectLoop {
    pub r: f64,
    pub dt: f64,
}

impl RectLoop {
    pub fn new(r: f64, dt: f64) -> Result<Self> {
        if !(r > 0.0 && dt > 0.0 && r.is_finite() && dt.is_finite()) {
            return domain(format!("loop extents must be positive, got r={r}, dt={dt}"));
        }
        Ok(RectLoop { r, dt })
    }

    /// Square loop of the given area.
    pub fn square(area: f64) -> Result<Self> {
        let side = area.sqrt();
        RectLoop::new(side, side)
    }

    pub fn area(&self) -> f64 {
        self.r * self.dt
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.r + self.dt)
    }
}

/// Squared coupling `g^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub g2: f64,
}

impl CouplingSpec {
    pub fn new(g2: f64) -> Result<Self> {
        if !(g2 > 0.0 && g2.is_finite()) {
            return domain(format!("g^2 must be positive, got {g2}"));
        }
        Ok(CouplingSpec { g2 })
    }

    /// Heat-kernel time attached to a region of the given area.
    pub fn heat_time(&self, area: f64) -> f64 {
        self.g2 * area
    }
}

pub fn wilson_exact(irrep: &Irrep, area: f64, c: CouplingSpec) -> f64 {
    irrep.dim_f64() * (-0.5 * c.g2 * irrep.casimir * area).exp()
}

/// `ln <tr rho(h)>`, finite where the value itself underflows.
pub fn log_wilson_exact(irrep: &Irrep, area: f64, c: CouplingSpec) -> f64 {
    irrep.dim_f64().ln() - 0.5 * c.g2 * irrep.casimir * area
}

pub fn wilson_exact_loop(irrep: &Irrep, lp: &RectLoop, c: CouplingSpec) -> f64 {
    wilson_exact(irrep, lp.area(), c)
}

/// Product of single-loop expectations for loops the caller declares
/// disjoint. An empty list yields the empty product and `empty = true`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiLoopValue {
    pub value: f64,
    pub empty: bool,
}

pub fn multi_loop_exact(pairs: &[(Irrep, RectLoop)], c: CouplingSpec) -> MultiLoopValue {
    MultiLoopValue {
        value: pairs.iter().map(|(r, l)| wilson_exact_loop(r, l, c)).product(),
        empty: pairs.is_empty(),
    }
}

/// `V(r) = -lim_{dt -> inf} ln(W/d) / dt = g^2 c r / 2`.
pub fn static_potential_exact(irrep: &Irrep, r: f64, c: CouplingSpec) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("separation must be positive, got {r}"));
    }
    Ok(string_tension(irrep, c) * r)
}

/// Area-law coefficient `g^2 c_rho / 2`.
pub fn string_tension(irrep: &Irrep, c: CouplingSpec) -> f64 {
    0.5 * c.g2 * irrep.casimir
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{haar_integrate, irrep_data, GroupId, IrrepLabel, Quadrature};
    use crate::heat_kernel::{HeatKernel, HeatKernelSpec};
    use proptest::prelude::*;

    fn su2(k: u32) -> Irrep {
        irrep_data(GroupId::Su2, IrrepLabel::TwiceSpin(k)).unwrap()
    }
    fn u1(n: i64) -> Irrep {
        irrep_data(GroupId::Circle, IrrepLabel::Charge(n)).unwrap()
    }
    fn g(g2: f64) -> CouplingSpec {
        CouplingSpec::new(g2).unwrap()
    }

    #[test]
    fn su2_fundamental_unit_area() {
        let v = wilson_exact(&su2(1), 1.0, g(1.0));
        assert!((v - 1.374_578_557_581_944).abs() < 1e-12);
        // oracle: integrate chi against the heat-kernel density
        let k = HeatKernel::new(HeatKernelSpec::new(GroupId::Su2, 1.0).unwrap()).unwrap();
        let q = haar_integrate(
            GroupId::Su2,
            |x| crate::group::character(&su2(1), x).unwrap() * k.density_raw(x),
            Quadrature::default_for(GroupId::Su2),
        )
        .unwrap();
        assert!((q.value.re - v).abs() < 1e-10);
    }

    #[test]
    fn trivial_irrep_is_one() {
        for a in [0.1, 1.0, 50.0] {
            assert_eq!(wilson_exact(&GroupId::Su3.trivial(), a, g(3.0)), 1.0);
        }
    }

    #[test]
    fn charge_two_is_fourth_power() {
        for a in [0.3, 1.0, 2.5] {
            let w1 = wilson_exact(&u1(1), a, g(0.7));
            let w2 = wilson_exact(&u1(2), a, g(0.7));
            assert!((w2 - w1.powi(4)).abs() < 1e-15);
            assert!((w2 - (-2.0 * 0.7 * a).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn multi_loop_products() {
        let l1 = RectLoop::new(1.0, 1.0).unwrap();
        let l2 = RectLoop::new(1.0, 2.0).unwrap();
        let v = multi_loop_exact(&[(u1(1), l1), (u1(1), l2)], g(1.0));
        assert!((v.value - (-1.5f64).exp()).abs() < 1e-15);
        let with_trivial = multi_loop_exact(&[(u1(1), l1), (u1(0), l2), (u1(1), l2)], g(1.0));
        assert_eq!(with_trivial.value, v.value);
        let single = multi_loop_exact(&[(su2(2), l2)], g(1.0));
        assert_eq!(single.value, wilson_exact_loop(&su2(2), &l2, g(1.0)));
        let empty = multi_loop_exact(&[], g(1.0));
        assert!(empty.empty && empty.value == 1.0);
    }

    #[test]
    fn potentials() {
        for n in 1..4 {
            let v = static_potential_exact(&u1(n), 1.5, g(2.0)).unwrap();
            let v1 = static_potential_exact(&u1(1), 1.5, g(2.0)).unwrap();
            assert!((v - (n * n) as f64 * v1).abs() < 1e-14);
        }
        assert_eq!(static_potential_exact(&u1(0), 3.0, g(1.0)).unwrap(), 0.0);
        let v = static_potential_exact(&su2(1), 2.0, g(1.0)).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        // finite-dt evaluation of -ln(W/d)/dt
        let dt = 1e3;
        let ln_w = log_wilson_exact(&su2(1), 2.0 * dt, g(1.0)) - 2f64.ln();
        assert!((-ln_w / dt - v).abs() < 1e-9);
        assert!(static_potential_exact(&su2(1), 0.0, g(1.0)).is_err());
    }

    #[test]
    fn string_tensions() {
        let ratio = string_tension(&su2(2), g(1.0)) / string_tension(&su2(1), g(1.0));
        assert!((ratio - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(string_tension(&su2(0), g(1.0)), 0.0);
        assert!((string_tension(&u1(3), g(2.0)) - 9.0).abs() < 1e-14);
        // oracle: slope of -ln(W/d) against area on tiny areas
        let (a1, a2) = (1e-4, 2e-4);
        let f = |a: f64| -(wilson_exact(&u1(3), a, g(2.0))).ln();
        assert!(((f(a2) - f(a1)) / (a2 - a1) - 9.0).abs() < 1e-8);
    }

    #[test]
    fn loop_validation() {
        assert!(RectLoop::new(0.0, 1.0).is_err());
        assert!(CouplingSpec::new(-1.0).is_err());
        let l = RectLoop::new(2.0, 3.0).unwrap();
        assert_eq!((l.area(), l.perimeter()), (6.0, 10.0));
        assert!(l.area() <= (l.perimeter() / 4.0).powi(2));
    }

    proptest! {
        #[test]
        fn universality_identity(a in 0.01f64..5.0, g2 in 0.1f64..3.0, k in 0u32..8) {
            let c = g(g2);
            let reference = su2(1);
            let rho = su2(k);
            let lhs = wilson_exact(&rho, a, c) / rho.dim_f64();
            let rhs = (wilson_exact(&reference, a, c) / 2.0).powf(rho.casimir / reference.casimir);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn multiplicative_in_area(a1 in 0.0f64..3.0, a2 in 0.0f64..3.0, n in -4i64..5) {
            let r = u1(n);
            let c = g(1.3);
            let lhs = wilson_exact(&r, a1 + a2, c);
            let rhs = wilson_exact(&r, a1, c) * wilson_exact(&r, a2, c);
            prop_assert!((lhs - rhs).abs() < 1e-14);
        }

        #[test]
        fn monotone_decreasing(a in 0.01f64..4.0, da in 0.01f64..1.0, k in 1u32..6) {
            let c = g(1.0);
            prop_assert!(wilson_exact(&su2(k), a + da, c) < wilson_exact(&su2(k), a, c));
            prop_assert!(wilson_exact(&su2(k), a, g(1.0 + da)) < wilson_exact(&su2(k), a, c));
            prop_assert!(wilson_exact(&su2(k + 1), a, c) / su2(k + 1).dim_f64() < wilson_exact(&su2(k), a, c) / su2(k).dim_f64());
        }
    }
}
