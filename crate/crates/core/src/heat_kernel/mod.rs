//! Heat-kernel measure on a compact group.
//!
//! The density with respect to Haar measure is the character expansion
//!
//! ```text
//! K_t(x) = sum_rho d_rho exp(-t c_rho / 2) chi_rho(x)
//! ```
//!
//! so that `int chi_rho K_t dHaar / d_rho = exp(-t c_rho / 2)`. With
//! `t = g^2 |beta|` this is exactly the plaquette measure whose Wilson loops
//! are `d_rho exp(-g^2 c_rho |beta| / 2)`.
//!
//! Truncation keeps every irrep with `d_rho exp(-t c_rho/2) >= eps`. For U(1)
//! at `t < 0.5` the Poisson-dual image sum
//! `sqrt(2 pi / t) sum_m exp(-(theta - 2 pi m)^2 / 2t)` is used instead.

mod sampler;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::group::{
    character::su2_characters_into, haar_integrate, ClassPoint, GroupId, Irrep, IrrepLabel, Quadrature,
    Su3CharacterTable,
};

pub use sampler::{HeatKernelSampler, CDF_NODES, SU3_CELLS};

/// Below this time U(1) switches to the dual image sum.
pub const CIRCLE_DUAL_THRESHOLD: f64 = 0.5;
/// Smallest time the SU(2)/SU(3) character series is meant to be used at.
pub const MIN_TIME: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelSpec {
    pub group: GroupId,
    /// Heat time `t = g^2 * area`.
    pub t: f64,
    /// Truncation tolerance on `d_rho exp(-t c_rho/2)`.
    pub eps: f64,
    pub max_terms: usize,
}

impl HeatKernelSpec {
    pub const DEFAULT_EPS: f64 = 1e-14;
    pub const DEFAULT_MAX_TERMS: usize = 200_000;

    pub fn new(group: GroupId, t: f64) -> Result<Self> {
        let spec = HeatKernelSpec {
            group,
            t,
            eps: Self::DEFAULT_EPS,
            max_terms: Self::DEFAULT_MAX_TERMS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        self.max_terms = max_terms;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return domain(format!("heat time must be positive, got {}", self.t));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return domain(format!("truncation tolerance must lie in (0, 1), got {}", self.eps));
        }
        if self.max_terms == 0 {
            return domain("max_terms must be positive");
        }
        Ok(())
    }
}

/// Normalised Fourier coefficient `exp(-t c_rho / 2)`.
pub fn hk_coefficient(irrep: &Irrep, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat time must be positive, got {t}"));
    }
    Ok((-0.5 * t * irrep.casimir).exp())
}

/// Which expansion evaluates the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesKind {
    /// Dual series for U(1) below [`CIRCLE_DUAL_THRESHOLD`], characters otherwise.
    Auto,
    Character,
    /// U(1) only.
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
enum Terms {
    /// `a_n = exp(-t n^2/2)` for `n = 0..=N`.
    Circle(Vec<f64>),
    /// `(k+1) exp(-t c_k/2)` for `k = 0..=K`.
    Su2(Vec<f64>),
    /// `(p, q, d exp(-t c/2))`
    Su3 {
        terms: Vec<(u32, u32, f64)>,
        max_level: usize,
    },
}

/// A truncated heat kernel ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatKernel {
    spec: HeatKernelSpec,
    dual: bool,
    terms: Terms,
    tail_bound: f64,
}

impl HeatKernel {
    pub fn new(spec: HeatKernelSpec) -> Result<Self> {
        Self::with_series(spec, SeriesKind::Auto)
    }

    pub fn with_series(spec: HeatKernelSpec, kind: SeriesKind) -> Result<Self> {
        spec.validate()?;
        let dual = match (kind, spec.group) {
            (SeriesKind::Dual, GroupId::Circle) => true,
            (SeriesKind::Dual, g) => return domain(format!("no dual series for {g}")),
            (SeriesKind::Auto, GroupId::Circle) => spec.t < CIRCLE_DUAL_THRESHOLD,
            _ => false,
        };
        let (terms, tail_bound) = match spec.group {
            GroupId::Circle => circle_terms(&spec),
            GroupId::Su2 => su2_terms(&spec),
            GroupId::Su3 => su3_terms(&spec),
        }?;
        Ok(HeatKernel {
            spec,
            dual,
            terms,
            tail_bound: if dual { 0.0 } else { tail_bound },
        })
    }

    pub fn spec(&self) -> &HeatKernelSpec {
        &self.spec
    }

    pub fn group(&self) -> GroupId {
        self.spec.group
    }

    pub fn t(&self) -> f64 {
        self.spec.t
    }

    pub fn uses_dual_series(&self) -> bool {
        self.dual
    }

    /// Bound on `sup_x |K_t(x) - truncated(x)|`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Number of irreps kept in the character series.
    pub fn term_count(&self) -> usize {
        match &self.terms {
            Terms::Circle(a) => 2 * a.len() - 1,
            Terms::Su2(a) => a.len(),
            Terms::Su3 { terms, .. } => terms.len(),
        }
    }

    /// Irreps kept in the character series.
    pub fn irreps(&self) -> Vec<Irrep> {
        let g = self.spec.group;
        let mk = |l| crate::group::irrep_data(g, l).expect("valid label");
        match &self.terms {
            Terms::Circle(a) => {
                let n = a.len() as i64 - 1;
                (-n..=n).map(|n| mk(IrrepLabel::Charge(n))).collect()
            }
            Terms::Su2(a) => (0..a.len() as u32).map(|k| mk(IrrepLabel::TwiceSpin(k))).collect(),
            Terms::Su3 { terms, .. } => terms.iter().map(|&(p, q, _)| mk(IrrepLabel::Dynkin(p, q))).collect(),
        }
    }

    /// Density before clamping; may dip slightly below zero from truncation.
    pub fn density_raw(&self, x: &ClassPoint) -> f64 {
        match (&self.terms, *x) {
            (Terms::Circle(a), ClassPoint::Circle(theta)) => {
                if self.dual {
                    circle_dual(self.spec.t, theta)
                } else {
                    circle_series(a, theta)
                }
            }
            (Terms::Su2(a), ClassPoint::Su2(theta)) => {
                let mut chi = vec![0.0; a.len()];
                su2_characters_into(theta, &mut chi);
                a.iter().zip(&chi).map(|(w, c)| w * c).sum()
            }
            (Terms::Su3 { terms, max_level }, ClassPoint::Su3(t1, t2)) => {
                let table = Su3CharacterTable::new(t1, t2, *max_level);
                terms.iter().map(|&(p, q, w)| w * table.character(p, q).re).sum()
            }
            _ => panic!("class point {x:?} does not belong to {}", self.spec.group),
        }
    }

    /// Density with respect to Haar measure, clamped at zero.
    pub fn density(&self, x: &ClassPoint) -> f64 {
        self.density_raw(x).max(0.0)
    }

    /// Fourier coefficient `int chi_rho K_t dHaar / d_rho` recovered by
    /// quadrature from the density.
    pub fn coefficient_by_quadrature(&self, irrep: &Irrep, quad: Quadrature) -> Result<f64> {
        let v = haar_integrate(
            self.spec.group,
            |x| crate::group::character(irrep, x).expect("matching group").conj() * self.density_raw(x),
            quad,
        )?;
        Ok(v.value.re / irrep.dim_f64())
    }
}

/// Clamped heat-kernel density at a single class point.
pub fn hk_density(spec: &HeatKernelSpec, x: &ClassPoint) -> Result<f64> {
    if x.group() != spec.group {
        return domain(format!("class point {x:?} does not belong to {}", spec.group));
    }
    Ok(HeatKernel::new(*spec)?.density(x))
}

fn circle_series(a: &[f64], theta: f64) -> f64 {
    // 1 + 2 sum a_n cos(n theta), cos(n theta) by Chebyshev recurrence
    let c = theta.cos();
    let (mut prev, mut cur) = (c, 1.0);
    let mut sum = 0.0;
    for (n, w) in a.iter().enumerate() {
        if n == 0 {
            sum += w;
        } else {
            let next = 2.0 * c * cur - prev;
            prev = cur;
            cur = next;
            sum += 2.0 * w * cur;
        }
    }
    sum
}

fn circle_dual(t: f64, theta: f64) -> f64 {
    let x = theta.rem_euclid(2.0 * PI);
    let x = if x > PI { x - 2.0 * PI } else { x };
    let pref = (2.0 * PI / t).sqrt();
    (-4..=4)
        .map(|m| {
            let d = x - 2.0 * PI * m as f64;
            (-d * d / (2.0 * t)).exp()
        })
        .sum::<f64>()
        * pref
}

fn truncation_error(terms: usize, tail_bound: f64) -> Error {
    Error::Truncation { terms, tail_bound }
}

fn circle_terms(spec: &HeatKernelSpec) -> Result<(Terms, f64)> {
    let t = spec.t;
    let mut a = Vec::new();
    let mut n = 0u64;
    loop {
        let w = (-0.5 * t * (n * n) as f64).exp();
        if w < spec.eps {
            break;
        }
        if 2 * a.len() + 1 > spec.max_terms {
            let tail = circle_tail(t, n);
            return Err(truncation_error(spec.max_terms, tail));
        }
        a.push(w);
        n += 1;
    }
    Ok((Terms::Circle(a), circle_tail(t, n)))
}

fn circle_tail(t: f64, from: u64) -> f64 {
    let mut tail = 0.0;
    let mut n = from;
    loop {
        let w = 2.0 * (-0.5 * t * (n * n) as f64).exp();
        tail += w;
        if w < 1e-300 || w < tail * 1e-17 {
            break;
        }
        n += 1;
    }
    tail
}

fn su2_weight(t: f64, k: u64) -> (f64, f64) {
    let d = (k + 1) as f64;
    let c = (k * (k + 2)) as f64 / 4.0;
    (d, d * (-0.5 * t * c).exp())
}

fn su2_terms(spec: &HeatKernelSpec) -> Result<(Terms, f64)> {
    let mut a = Vec::new();
    let mut k = 0u64;
    loop {
        let (_, w) = su2_weight(spec.t, k);
        if w < spec.eps {
            break;
        }
        if a.len() + 1 > spec.max_terms {
            return Err(truncation_error(spec.max_terms, su2_tail(spec.t, k)));
        }
        a.push(w);
        k += 1;
    }
    Ok((Terms::Su2(a), su2_tail(spec.t, k)))
}

fn su2_tail(t: f64, from: u64) -> f64 {
    let mut tail = 0.0;
    let mut k = from;
    let mut prev = f64::INFINITY;
    loop {
        let (d, w) = su2_weight(t, k);
        let term = d * w;
        tail += term;
        if term < prev && (term < 1e-300 || term < tail * 1e-17) {
            break;
        }
        prev = term;
        k += 1;
    }
    tail
}

fn su3_weight(t: f64, p: u64, q: u64) -> (f64, f64) {
    let d = ((p + 1) * (q + 1) * (p + q + 2) / 2) as f64;
    let c = (p * p + q * q + p * q + 3 * p + 3 * q) as f64 / 3.0;
    (d, d * (-0.5 * t * c).exp())
}

/// Upper bound of `d exp(-t c/2)` over the shell `p + q = s`.
fn su3_envelope(t: f64, s: u64) -> f64 {
    let s = s as f64;
    (s + 2.0).powi(3) / 8.0 * (-0.5 * t * (0.25 * s * s + s)).exp()
}

fn su3_terms(spec: &HeatKernelSpec) -> Result<(Terms, f64)> {
    let t = spec.t;
    let mut terms = Vec::new();
    let mut tail = 0.0;
    let mut s = 0u64;
    loop {
        if su3_envelope(t, s) < spec.eps {
            break;
        }
        for p in 0..=s {
            let q = s - p;
            let (d, w) = su3_weight(t, p, q);
            if w >= spec.eps {
                if terms.len() + 1 > spec.max_terms {
                    return Err(truncation_error(spec.max_terms, tail + su3_tail(t, s)));
                }
                terms.push((p as u32, q as u32, w));
            } else {
                tail += d * w;
            }
        }
        s += 1;
    }
    tail += su3_tail(t, s);
    let max_level = terms.iter().map(|&(p, q, _)| (p + q + 2) as usize).max().unwrap_or(2);
    Ok((Terms::Su3 { terms, max_level }, tail))
}

fn su3_tail(t: f64, from: u64) -> f64 {
    let mut tail = 0.0;
    let mut s = from;
    let mut prev = f64::INFINITY;
    loop {
        let shell: f64 = (0..=s)
            .map(|p| {
                let (d, w) = su3_weight(t, p, s - p);
                d * w
            })
            .sum();
        tail += shell;
        if shell < prev && (shell < 1e-300 || shell < tail * 1e-17) {
            break;
        }
        prev = shell;
        s += 1;
    }
    tail
}

/// Result of the convolution self-consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemigroupCheck {
    /// `sup |(K_s * K_t)(x) - K_{s+t}(x)|` over the test grid.
    pub residual: f64,
    /// Truncation tails of the three kernels plus a rounding envelope.
    pub tail_bound: f64,
}

/// Compare `K_s * K_t` against `K_{s+t}`.
///
/// The Fourier coefficients of `K_s` and `K_t` are recovered from their
/// densities by quadrature, multiplied irrep by irrep, and resynthesised;
/// the result is compared with the directly evaluated `K_{s+t}` on a test
/// grid.
pub fn semigroup_residual(group: GroupId, s: f64, t: f64, quad: Quadrature) -> Result<SemigroupCheck> {
    let ks = HeatKernel::new(HeatKernelSpec::new(group, s)?)?;
    let kt = HeatKernel::new(HeatKernelSpec::new(group, t)?)?;
    let kst = HeatKernel::new(HeatKernelSpec::new(group, s + t)?)?;
    let irreps = kst.irreps();

    let mut cs = vec![Complex64::new(0.0, 0.0); irreps.len()];
    let mut ct = vec![Complex64::new(0.0, 0.0); irreps.len()];
    let max_level = irreps
        .iter()
        .map(|r| match r.label {
            IrrepLabel::Dynkin(p, q) => (p + q + 2) as usize,
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    for node in quad.nodes(group) {
        let ws = node.weight * ks.density_raw(&node.point);
        let wt = node.weight * kt.density_raw(&node.point);
        let chis = characters_at(&irreps, &node.point, max_level);
        for (i, chi) in chis.iter().enumerate() {
            cs[i] += chi.conj() * ws;
            ct[i] += chi.conj() * wt;
        }
    }

    let grid = test_grid(group);
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in &grid {
        let chis = characters_at(&irreps, x, max_level);
        let conv: f64 = irreps
            .iter()
            .zip(&chis)
            .enumerate()
            .map(|(i, (r, chi))| {
                let d = r.dim_f64();
                (cs[i] / d * ct[i] / d * d * chi).re
            })
            .sum();
        let direct = kst.density_raw(x);
        residual = residual.max((conv - direct).abs());
        scale = scale.max(direct.abs());
    }
    let identity_value = kst.density_raw(&ClassPoint::identity(group));
    let rounding = 1024.0 * f64::EPSILON * identity_value.max(scale).max(1.0);
    Ok(SemigroupCheck {
        residual,
        tail_bound: ks.tail_bound() + kt.tail_bound() + kst.tail_bound() + rounding,
    })
}

fn characters_at(irreps: &[Irrep], x: &ClassPoint, max_level: usize) -> Vec<Complex64> {
    match *x {
        ClassPoint::Su3(a, b) => {
            let table = Su3CharacterTable::new(a, b, max_level);
            irreps
                .iter()
                .map(|r| match r.label {
                    IrrepLabel::Dynkin(p, q) => table.character(p, q),
                    _ => unreachable!(),
                })
                .collect()
        }
        _ => irreps
            .iter()
            .map(|r| crate::group::character(r, x).expect("matching group"))
            .collect(),
    }
}

/// Evaluation grid used by the self-consistency checks.
pub fn test_grid(group: GroupId) -> Vec<ClassPoint> {
    let tau = 2.0 * PI;
    match group {
        GroupId::Circle => (0..64).map(|i| ClassPoint::Circle(tau * i as f64 / 64.0)).collect(),
        GroupId::Su2 => (0..=64).map(|i| ClassPoint::Su2(tau * i as f64 / 64.0)).collect(),
        GroupId::Su3 => (0..12)
            .flat_map(|i| (0..12).map(move |j| ClassPoint::Su3(tau * i as f64 / 12.0, tau * j as f64 / 12.0)))
            .collect(),
    }
}
