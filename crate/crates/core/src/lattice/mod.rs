//! Two-dimensional link lattice with open boundaries.
//!
//! Sites are `(x, t)` with `0 <= x <= nx`, `0 <= t <= nt`. The horizontal
//! link `H(x, t)` runs from `(x, t)` to `(x + 1, t)` and the vertical link
//! `V(x, t)` from `(x, t)` to `(x, t + 1)`. The plaquette at `(x, t)` is
//! `H(x, t) V(x + 1, t) H(x, t + 1)^-1 V(x, t)^-1`.

mod metropolis;
mod region;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::group::{character, haar_sample, GroupElement, GroupId, Irrep};

pub use metropolis::{
    metropolis_sweep, run_chain, run_replicas, ActionSpec, ChainOutput, ChainSpec, Metropolis, Observable,
};
pub use region::{region_product_sample, region_product_series};

/// Plaquette grid of `nx * nt` faces, each of physical area `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice2D {
    pub nx: usize,
    pub nt: usize,
    pub a: f64,
}

impl Lattice2D {
    pub fn new(nx: usize, nt: usize, a: f64) -> Result<Self> {
        if nx == 0 || nt == 0 {
            return domain(format!("lattice needs at least one plaquette, got {nx}x{nt}"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return domain(format!("plaquette area must be positive, got {a}"));
        }
        Ok(Lattice2D { nx, nt, a })
    }

    /// Heat-kernel time of one plaquette at coupling `g2`.
    pub fn plaquette_time(&self, g2: f64) -> f64 {
        g2 * self.a
    }

    pub fn n_horizontal(&self) -> usize {
        self.nx * (self.nt + 1)
    }

    pub fn n_vertical(&self) -> usize {
        (self.nx + 1) * self.nt
    }

    pub fn n_links(&self) -> usize {
        self.n_horizontal() + self.n_vertical()
    }

    pub fn n_plaquettes(&self) -> usize {
        self.nx * self.nt
    }

    fn h_index(&self, x: usize, t: usize) -> usize {
        t * self.nx + x
    }

    fn v_index(&self, x: usize, t: usize) -> usize {
        self.n_horizontal() + t * (self.nx + 1) + x
    }
}

/// Axis-aligned rectangle of `w * h` plaquettes with lower-left corner `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeRect {
    pub x: usize,
    pub t: usize,
    pub w: usize,
    pub h: usize,
}

impl LatticeRect {
    pub fn new(x: usize, t: usize, w: usize, h: usize) -> Self {
        LatticeRect { x, t, w, h }
    }

    pub fn plaquettes(&self) -> usize {
        self.w * self.h
    }

    pub fn fits(&self, lattice: &Lattice2D) -> bool {
        self.w >= 1 && self.h >= 1 && self.x + self.w <= lattice.nx && self.t + self.h <= lattice.nt
    }

    /// True if the rectangles share no plaquette (shared edges are allowed).
    pub fn disjoint(&self, o: &LatticeRect) -> bool {
        self.x + self.w <= o.x || o.x + o.w <= self.x || self.t + self.h <= o.t || o.t + o.h <= self.t
    }
}

/// One group element per link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfiguration {
    lattice: Lattice2D,
    group: GroupId,
    links: Vec<GroupElement>,
}

impl LinkConfiguration {
    /// All links set to the identity.
    pub fn cold(lattice: Lattice2D, group: GroupId) -> Self {
        LinkConfiguration {
            lattice,
            group,
            links: vec![GroupElement::identity(group); lattice.n_links()],
        }
    }

    /// Independent Haar-random links.
    pub fn hot<R: Rng + ?Sized>(lattice: Lattice2D, group: GroupId, rng: &mut R) -> Self {
        LinkConfiguration {
            lattice,
            group,
            links: (0..lattice.n_links()).map(|_| haar_sample(group, rng)).collect(),
        }
    }

    pub fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn links(&self) -> &[GroupElement] {
        &self.links
    }

    pub fn horizontal(&self, x: usize, t: usize) -> &GroupElement {
        &self.links[self.lattice.h_index(x, t)]
    }

    pub fn vertical(&self, x: usize, t: usize) -> &GroupElement {
        &self.links[self.lattice.v_index(x, t)]
    }

    pub fn set_horizontal(&mut self, x: usize, t: usize, g: GroupElement) {
        let i = self.lattice.h_index(x, t);
        self.links[i] = g;
    }

    pub fn set_vertical(&mut self, x: usize, t: usize, g: GroupElement) {
        let i = self.lattice.v_index(x, t);
        self.links[i] = g;
    }

    /// Holonomy of the plaquette at `(x, t)`.
    pub fn plaquette(&self, x: usize, t: usize) -> GroupElement {
        self.horizontal(x, t)
            .mul(self.vertical(x + 1, t))
            .mul(&self.horizontal(x, t + 1).inverse())
            .mul(&self.vertical(x, t).inverse())
    }

    /// Ordered link product around the rectangle, starting at its lower-left corner.
    pub fn loop_holonomy(&self, rect: &LatticeRect) -> Result<GroupElement> {
        if !rect.fits(&self.lattice) {
            return domain(format!(
                "rectangle {rect:?} does not fit a {}x{} lattice",
                self.lattice.nx, self.lattice.nt
            ));
        }
        let mut u = GroupElement::identity(self.group);
        for i in 0..rect.w {
            u = u.mul(self.horizontal(rect.x + i, rect.t));
        }
        for j in 0..rect.h {
            u = u.mul(self.vertical(rect.x + rect.w, rect.t + j));
        }
        for i in (0..rect.w).rev() {
            u = u.mul(&self.horizontal(rect.x + i, rect.t + rect.h).inverse());
        }
        for j in (0..rect.h).rev() {
            u = u.mul(&self.vertical(rect.x, rect.t + j).inverse());
        }
        Ok(u.renormalized())
    }

    /// Apply `U(x -> y) -> g(x) U g(y)^-1` with independent Haar `g` at every site.
    pub fn random_gauge_transform<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let (nx, nt) = (self.lattice.nx, self.lattice.nt);
        let g: Vec<GroupElement> = (0..(nx + 1) * (nt + 1)).map(|_| haar_sample(self.group, rng)).collect();
        let site = |x: usize, t: usize| &g[t * (nx + 1) + x];
        for t in 0..=nt {
            for x in 0..nx {
                let u = site(x, t).mul(self.horizontal(x, t)).mul(&site(x + 1, t).inverse());
                self.set_horizontal(x, t, u);
            }
        }
        for t in 0..nt {
            for x in 0..=nx {
                let u = site(x, t).mul(self.vertical(x, t)).mul(&site(x, t + 1).inverse());
                self.set_vertical(x, t, u);
            }
        }
    }
}

/// Character of the rectangle's holonomy in `irrep`.
pub fn measure_wilson(cfg: &LinkConfiguration, rect: &LatticeRect, irrep: &Irrep) -> Result<Complex64> {
    if irrep.group != cfg.group {
        return domain(format!("irrep {irrep} does not belong to group {}", cfg.group));
    }
    character(irrep, &cfg.loop_holonomy(rect)?.class_of())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{irrep_data, IrrepLabel};
    use crate::seeded_rng;

    #[test]
    fn geometry_counts() {
        let l = Lattice2D::new(3, 2, 0.5).unwrap();
        assert_eq!(l.n_horizontal(), 9);
        assert_eq!(l.n_vertical(), 8);
        assert_eq!(l.n_plaquettes(), 6);
        assert!(Lattice2D::new(0, 2, 1.0).is_err());
        assert!(Lattice2D::new(2, 2, 0.0).is_err());
        assert!(LatticeRect::new(1, 0, 2, 2).fits(&l));
        assert!(!LatticeRect::new(2, 0, 2, 1).fits(&l));
        assert!(LatticeRect::new(0, 0, 1, 1).disjoint(&LatticeRect::new(1, 0, 1, 1)));
        assert!(!LatticeRect::new(0, 0, 2, 2).disjoint(&LatticeRect::new(1, 1, 1, 1)));
    }

    #[test]
    fn cold_configuration_gives_dimension() {
        let l = Lattice2D::new(4, 4, 1.0).unwrap();
        for g in [GroupId::Circle, GroupId::Su2, GroupId::Su3] {
            let cfg = LinkConfiguration::cold(l, g);
            for r in crate::group::enumerate_irreps(g, 3.0).unwrap() {
                let w = measure_wilson(&cfg, &LatticeRect::new(1, 1, 2, 3), &r).unwrap();
                assert!((w - r.dim_f64()).norm() < 1e-10, "{r}");
            }
        }
    }

    #[test]
    fn unit_rectangle_is_the_plaquette() {
        let l = Lattice2D::new(3, 3, 1.0).unwrap();
        let mut rng = seeded_rng(31);
        for g in [GroupId::Circle, GroupId::Su2, GroupId::Su3] {
            let cfg = LinkConfiguration::hot(l, g, &mut rng);
            let r = g.fundamental();
            let a = measure_wilson(&cfg, &LatticeRect::new(1, 2, 1, 1), &r).unwrap();
            let b = character(&r, &cfg.plaquette(1, 2).class_of()).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn abelian_loop_is_sum_of_plaquettes() {
        let l = Lattice2D::new(3, 3, 1.0).unwrap();
        let cfg = LinkConfiguration::hot(l, GroupId::Circle, &mut seeded_rng(32));
        let rect = LatticeRect::new(0, 1, 3, 2);
        let mut sum = 0.0;
        for x in 0..3 {
            for t in 1..3 {
                if let GroupElement::Circle(a) = cfg.plaquette(x, t) {
                    sum += a;
                }
            }
        }
        let r = irrep_data(GroupId::Circle, IrrepLabel::Charge(1)).unwrap();
        let w = measure_wilson(&cfg, &rect, &r).unwrap();
        assert!((w - Complex64::from_polar(1.0, sum)).norm() < 1e-10);
    }

    #[test]
    fn gauge_invariance() {
        let l = Lattice2D::new(4, 3, 1.0).unwrap();
        let mut rng = seeded_rng(33);
        for g in [GroupId::Circle, GroupId::Su2, GroupId::Su3] {
            let cfg = LinkConfiguration::hot(l, g, &mut rng);
            let mut moved = cfg.clone();
            moved.random_gauge_transform(&mut rng);
            assert_ne!(cfg, moved);
            let rects = [
                LatticeRect::new(0, 0, 1, 1),
                LatticeRect::new(1, 0, 3, 2),
                LatticeRect::new(0, 0, 4, 3),
            ];
            for r in crate::group::enumerate_irreps(g, 4.0).unwrap() {
                for rect in &rects {
                    let a = measure_wilson(&cfg, rect, &r).unwrap();
                    let b = measure_wilson(&moved, rect, &r).unwrap();
                    assert!((a - b).norm() < 1e-10, "{r} {rect:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn out_of_range_rectangle_rejected() {
        let l = Lattice2D::new(2, 2, 1.0).unwrap();
        let cfg = LinkConfiguration::cold(l, GroupId::Su2);
        let r = GroupId::Su2.fundamental();
        assert!(measure_wilson(&cfg, &LatticeRect::new(1, 1, 2, 1), &r).is_err());
        assert!(measure_wilson(&cfg, &LatticeRect::new(0, 0, 0, 1), &r).is_err());
        assert!(measure_wilson(&cfg, &LatticeRect::new(0, 0, 1, 1), &GroupId::Circle.fundamental()).is_err());
    }
}
