//! Direct sampler for the holonomy around a region of `k` plaquettes.
//!
//! With open boundaries the plaquette variables are independent and each is
//! distributed as `K_t`, so the boundary holonomy of a `k`-plaquette region
//! is a product of `k` independent draws, distributed as `K_{kt}`.

use rand::Rng;

use crate::error::{domain, Result};
use crate::group::{character, GroupElement, Irrep};
use crate::heat_kernel::HeatKernelSampler;
use crate::seeded_rng;

/// `Re chi(h_1 ... h_k)` for `k` independent heat-kernel draws.
pub fn region_product_sample<R: Rng + ?Sized>(
    k: usize,
    sampler: &HeatKernelSampler,
    irrep: &Irrep,
    rng: &mut R,
) -> Result<f64> {
    if k == 0 {
        return domain("region must contain at least one plaquette");
    }
    if irrep.group != sampler.group() {
        return domain(format!("irrep {irrep} does not belong to group {}", sampler.group()));
    }
    let mut h = sampler.sample(rng);
    for _ in 1..k {
        h = h.mul(&sampler.sample(rng));
    }
    Ok(character(irrep, &GroupElement::renormalized(&h).class_of())?.re)
}

/// `n` independent region samples from a fresh stream seeded with `seed`.
pub fn region_product_series(
    k: usize,
    sampler: &HeatKernelSampler,
    irrep: &Irrep,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| region_product_sample(k, sampler, irrep, &mut rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{irrep_data, GroupId, IrrepLabel};
    use crate::heat_kernel::{HeatKernel, HeatKernelSpec};
    use crate::stats::jackknife;

    fn sampler(g: GroupId, t: f64) -> HeatKernelSampler {
        HeatKernelSampler::new(&HeatKernel::new(HeatKernelSpec::new(g, t).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn single_plaquette_is_one_draw() {
        let s = sampler(GroupId::Su2, 0.4);
        let r = GroupId::Su2.fundamental();
        let a = region_product_sample(1, &s, &r, &mut seeded_rng(3)).unwrap();
        let b = character(&r, &s.sample(&mut seeded_rng(3)).class_of()).unwrap().re;
        assert!((a - b).abs() < 1e-12);
        assert!(region_product_sample(0, &s, &r, &mut seeded_rng(3)).is_err());
    }

    #[test]
    fn circle_four_plaquettes() {
        let s = sampler(GroupId::Circle, 0.25);
        let r = irrep_data(GroupId::Circle, IrrepLabel::Charge(1)).unwrap();
        let xs = region_product_series(4, &s, &r, 100_000, 51).unwrap();
        let e = jackknife(&xs, 1).unwrap();
        assert!(e.consistent_with((-0.5f64).exp(), 3.0), "{e:?}");
    }

    #[test]
    fn su2_two_plaquettes() {
        let s = sampler(GroupId::Su2, 0.5);
        let r = GroupId::Su2.fundamental();
        let xs = region_product_series(2, &s, &r, 100_000, 52).unwrap();
        let e = jackknife(&xs, 1).unwrap();
        assert!(e.consistent_with(2.0 * (-3.0f64 / 8.0).exp(), 3.0), "{e:?}");
    }
}
