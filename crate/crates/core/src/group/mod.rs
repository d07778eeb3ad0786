//! Representation theory and Haar integration on U(1), SU(2) and SU(3).
//!
//! Casimir convention: U(1) charge `n` has `c = n^2`, SU(2) spin `j = k/2`
//! has `c = j(j+1)`, SU(3) Dynkin label `(p, q)` has
//! `c = (p^2 + q^2 + pq + 3p + 3q) / 3`. Heat-kernel times and closed-form
//! Wilson loops in the rest of the crate use the same convention.

pub(crate) mod character;
pub(crate) mod element;
mod quadrature;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use character::{character, weyl_density, Su3CharacterTable};
pub use element::{haar_sample, GroupElement, Su2, Su3};
pub use quadrature::{haar_integrate, Integral, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupId {
    /// U(1)
    #[serde(rename = "u1", alias = "circle")]
    Circle,
    Su2,
    Su3,
}

impl GroupId {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u1" | "circle" | "u(1)" => Ok(GroupId::Circle),
            "su2" | "su(2)" => Ok(GroupId::Su2),
            "su3" | "su(3)" => Ok(GroupId::Su3),
            other => domain(format!("unknown group `{other}` (expected u1, su2 or su3)")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupId::Circle => "u1",
            GroupId::Su2 => "su2",
            GroupId::Su3 => "su3",
        }
    }

    pub fn identity(self) -> GroupElement {
        GroupElement::identity(self)
    }

    /// Irrep with the smallest nonzero Casimir (charge 1, spin 1/2, the triplet).
    pub fn fundamental(self) -> Irrep {
        let label = match self {
            GroupId::Circle => IrrepLabel::Charge(1),
            GroupId::Su2 => IrrepLabel::TwiceSpin(1),
            GroupId::Su3 => IrrepLabel::Dynkin(1, 0),
        };
        irrep_data(self, label).expect("fundamental label is valid")
    }

    pub fn trivial(self) -> Irrep {
        let label = match self {
            GroupId::Circle => IrrepLabel::Charge(0),
            GroupId::Su2 => IrrepLabel::TwiceSpin(0),
            GroupId::Su3 => IrrepLabel::Dynkin(0, 0),
        };
        irrep_data(self, label).expect("trivial label is valid")
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Highest-weight label of an irreducible representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrrepLabel {
    /// U(1) charge.
    Charge(i64),
    /// SU(2) twice the spin, `k = 2j`.
    TwiceSpin(u32),
    /// SU(3) Dynkin pair `(p, q)`.
    Dynkin(u32, u32),
}

impl IrrepLabel {
    pub fn is_trivial(self) -> bool {
        matches!(
            self,
            IrrepLabel::Charge(0) | IrrepLabel::TwiceSpin(0) | IrrepLabel::Dynkin(0, 0)
        )
    }

    fn group(self) -> GroupId {
        match self {
            IrrepLabel::Charge(_) => GroupId::Circle,
            IrrepLabel::TwiceSpin(_) => GroupId::Su2,
            IrrepLabel::Dynkin(..) => GroupId::Su3,
        }
    }

    /// Parse a label in the textual form used by the CLI: `2` or `-1` for
    /// U(1), `3` for SU(2), `1:1` (or `1/1`) for SU(3).
    pub fn parse(group: GroupId, s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || crate::Error::Domain(format!("invalid {group} irrep label `{s}`"));
        match group {
            GroupId::Circle => s.parse::<i64>().map(IrrepLabel::Charge).map_err(|_| bad()),
            GroupId::Su2 => s.parse::<u32>().map(IrrepLabel::TwiceSpin).map_err(|_| bad()),
            GroupId::Su3 => {
                let (p, q) = s.split_once([':', '/']).ok_or_else(bad)?;
                let p = p.trim().parse::<u32>().map_err(|_| bad())?;
                let q = q.trim().parse::<u32>().map_err(|_| bad())?;
                Ok(IrrepLabel::Dynkin(p, q))
            }
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Charge(n) => write!(f, "n={n}"),
            IrrepLabel::TwiceSpin(k) => write!(f, "k={k}"),
            IrrepLabel::Dynkin(p, q) => write!(f, "({p},{q})"),
        }
    }
}

/// An irreducible representation together with its dimension and Casimir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Irrep {
    pub group: GroupId,
    pub label: IrrepLabel,
    pub dim: u64,
    pub casimir: f64,
}

impl Irrep {
    pub fn is_trivial(&self) -> bool {
        self.label.is_trivial()
    }

    pub fn dim_f64(&self) -> f64 {
        self.dim as f64
    }

    /// Same representation under a Casimir convention scaled by `factor`.
    pub fn rescaled(&self, factor: f64) -> Irrep {
        Irrep {
            casimir: self.casimir * factor,
            ..*self
        }
    }

    /// Label of the conjugate representation.
    pub fn conjugate(&self) -> Irrep {
        let label = match self.label {
            IrrepLabel::Charge(n) => IrrepLabel::Charge(-n),
            IrrepLabel::TwiceSpin(k) => IrrepLabel::TwiceSpin(k),
            IrrepLabel::Dynkin(p, q) => IrrepLabel::Dynkin(q, p),
        };
        Irrep { label, ..*self }
    }
}

impl fmt::Display for Irrep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.label)
    }
}

/// Dimension and Casimir of an irrep; rejects labels of the wrong group.
pub fn irrep_data(group: GroupId, label: IrrepLabel) -> Result<Irrep> {
    if label.group() != group {
        return domain(format!("label {label} does not belong to group {group}"));
    }
    let (dim, casimir) = match label {
        IrrepLabel::Charge(n) => (1, (n * n) as f64),
        IrrepLabel::TwiceSpin(k) => {
            let k = k as u64;
            (k + 1, (k * (k + 2)) as f64 / 4.0)
        }
        IrrepLabel::Dynkin(p, q) => {
            let (p, q) = (p as u64, q as u64);
            let dim = (p + 1) * (q + 1) * (p + q + 2) / 2;
            let num = p * p + q * q + p * q + 3 * p + 3 * q;
            (dim, num as f64 / 3.0)
        }
    };
    Ok(Irrep {
        group,
        label,
        dim,
        casimir,
    })
}

/// All irreps with Casimir at most `casimir_cutoff`, ordered by
/// `(casimir, label)`.
pub fn enumerate_irreps(group: GroupId, casimir_cutoff: f64) -> Result<Vec<Irrep>> {
    if !(casimir_cutoff >= 0.0) || !casimir_cutoff.is_finite() {
        return domain(format!("casimir cutoff must be finite and >= 0, got {casimir_cutoff}"));
    }
    let within = |c: f64| c <= casimir_cutoff * (1.0 + 1e-14) + 1e-14;
    let mut out = Vec::new();
    match group {
        GroupId::Circle => {
            let nmax = casimir_cutoff.sqrt().floor() as i64 + 1;
            for n in -nmax..=nmax {
                let irrep = irrep_data(group, IrrepLabel::Charge(n))?;
                if within(irrep.casimir) {
                    out.push(irrep);
                }
            }
        }
        GroupId::Su2 => {
            // c = k(k+2)/4 >= k^2/4
            let kmax = (2.0 * casimir_cutoff.sqrt()).floor() as u32 + 1;
            for k in 0..=kmax {
                let irrep = irrep_data(group, IrrepLabel::TwiceSpin(k))?;
                if within(irrep.casimir) {
                    out.push(irrep);
                }
            }
        }
        GroupId::Su3 => {
            // c >= (p^2 + 3p)/3 >= p^2/3
            let pmax = (3.0 * casimir_cutoff).sqrt().floor() as u32 + 1;
            for p in 0..=pmax {
                for q in 0..=pmax {
                    let irrep = irrep_data(group, IrrepLabel::Dynkin(p, q))?;
                    if within(irrep.casimir) {
                        out.push(irrep);
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.casimir.total_cmp(&b.casimir).then(a.label.cmp(&b.label)));
    Ok(out)
}

/// Conjugacy-class coordinates.
///
/// * `Circle(theta)`: `theta` in `[0, 2pi)`.
/// * `Su2(theta)`: `theta` in `[0, 2pi]`, eigenvalues `exp(+-i theta/2)`.
/// * `Su3(theta1, theta2)`: eigen-angles on the maximal torus
///   `[0, 2pi)^2`, with `theta3 = -theta1 - theta2`. The torus covers each
///   class six times; [`weyl_density`] carries the `1/6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassPoint {
    Circle(f64),
    Su2(f64),
    Su3(f64, f64),
}

impl ClassPoint {
    pub fn group(&self) -> GroupId {
        match self {
            ClassPoint::Circle(_) => GroupId::Circle,
            ClassPoint::Su2(_) => GroupId::Su2,
            ClassPoint::Su3(..) => GroupId::Su3,
        }
    }

    pub fn identity(group: GroupId) -> Self {
        match group {
            GroupId::Circle => ClassPoint::Circle(0.0),
            GroupId::Su2 => ClassPoint::Su2(0.0),
            GroupId::Su3 => ClassPoint::Su3(0.0, 0.0),
        }
    }

    pub fn in_domain(&self) -> bool {
        let tau = 2.0 * PI;
        match *self {
            ClassPoint::Circle(t) => (0.0..tau).contains(&t),
            ClassPoint::Su2(t) => (0.0..=tau).contains(&t),
            ClassPoint::Su3(a, b) => (0.0..tau).contains(&a) && (0.0..tau).contains(&b),
        }
    }

    /// The group element `diag(...)` representing this class.
    pub fn representative(&self) -> GroupElement {
        match *self {
            ClassPoint::Circle(t) => GroupElement::Circle(t),
            ClassPoint::Su2(t) => GroupElement::Su2(Su2::from_axis_angle([0.0, 0.0, 1.0], t)),
            ClassPoint::Su3(a, b) => GroupElement::Su3(Su3::diagonal(a, b)),
        }
    }
}

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let tau = 2.0 * PI;
    let w = theta.rem_euclid(tau);
    if w >= tau {
        0.0
    } else {
        w
    }
}
