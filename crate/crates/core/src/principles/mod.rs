//! Decision procedures for universality, independence and regularity of
//! Wilson loop expectation data.

mod independence;
mod regularity;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exact::{wilson_exact, CouplingSpec};
use crate::group::{character, haar_integrate, GroupId, Irrep, Quadrature};

pub use independence::{
    concentric_joint_exact, verify_factorization_exact, verify_independence, ExactFactorization, IndependenceReport,
    LoopSet,
};
pub use regularity::{verify_regularity, verify_regularity_sigma, RegularityReport, SigmaGauge, GROWTH_LIMIT};

/// Absolute tolerance applied to data without statistical errors.
pub const EXACT_TOL: f64 = 1e-10;
/// Multiple of the propagated standard error accepted for Monte Carlo data.
pub const SIGMA_MULTIPLE: f64 = 3.0;
/// Normalized values below this are not exponentiated.
pub const UNDERFLOW_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationEntry {
    pub irrep: Irrep,
    pub loop_id: String,
    /// `<tr rho(h)>`
    pub value: f64,
    /// Zero for exact data.
    pub stderr: f64,
}

/// Wilson loop expectations keyed by irrep and loop.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExpectationTable {
    entries: Vec<ExpectationEntry>,
}

impl ExpectationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, irrep: Irrep, loop_id: impl Into<String>, value: f64, stderr: f64) -> Result<()> {
        if !value.is_finite() || !(stderr >= 0.0 && stderr.is_finite()) {
            return domain(format!("invalid table entry value={value} stderr={stderr}"));
        }
        if value.abs() > irrep.dim_f64() + SIGMA_MULTIPLE * stderr + 1e-12 {
            return domain(format!("|{value}| exceeds the dimension of {irrep}"));
        }
        self.entries.push(ExpectationEntry {
            irrep,
            loop_id: loop_id.into(),
            value,
            stderr,
        });
        Ok(())
    }

    /// Closed-form table over every irrep and area, loops labelled `A=<area>`.
    pub fn from_exact(irreps: &[Irrep], areas: &[f64], c: CouplingSpec) -> Result<Self> {
        let mut t = Self::new();
        for &a in areas {
            for r in irreps {
                t.push(*r, format!("A={a}"), wilson_exact(r, a, c), 0.0)?;
            }
        }
        Ok(t)
    }

    pub fn entries(&self) -> &[ExpectationEntry] {
        &self.entries
    }

    fn loop_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !ids.contains(&e.loop_id.as_str()) {
                ids.push(&e.loop_id);
            }
        }
        ids
    }
}

/// Residual of one checked case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResidual {
    pub case: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// The reference value underflowed and was not exponentiated.
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityReport {
    pub reference: String,
    pub cases: Vec<CaseResidual>,
    pub max_residual: f64,
    pub pass: bool,
    /// Only the reference irrep was present.
    pub vacuous: bool,
    pub inconclusive: bool,
}

/// Check `v/d = (v_ref/d_ref)^(c/c_ref)` on every non-reference entry.
pub fn verify_universality(table: &ExpectationTable, reference: &Irrep) -> Result<UniversalityReport> {
    if reference.is_trivial() {
        return domain("universality reference must be a nontrivial irrep");
    }
    let mut cases = Vec::new();
    for id in table.loop_ids() {
        let rows: Vec<&ExpectationEntry> = table.entries.iter().filter(|e| e.loop_id == id).collect();
        let Some(r) = rows
            .iter()
            .find(|e| e.irrep.group == reference.group && e.irrep.label == reference.label)
        else {
            return domain(format!("loop {id} has no value for the reference irrep {reference}"));
        };
        let x_raw = r.value / reference.dim_f64();
        let inconclusive = x_raw < UNDERFLOW_EPS;
        let x_ref = x_raw.clamp(UNDERFLOW_EPS, 1.0);
        let se_ref = r.stderr / reference.dim_f64();
        for e in rows.iter().filter(|e| e.irrep.label != reference.label) {
            let p = e.irrep.casimir / reference.casimir;
            let predicted = if inconclusive && p > 0.0 { 0.0 } else { x_ref.powf(p) };
            let x = e.value / e.irrep.dim_f64();
            let residual = (x - predicted).abs();
            let tolerance = if e.stderr == 0.0 && r.stderr == 0.0 {
                EXACT_TOL
            } else {
                let dpred = p * x_ref.powf(p - 1.0) * se_ref;
                SIGMA_MULTIPLE * (e.stderr / e.irrep.dim_f64()).hypot(dpred)
            };
            cases.push(CaseResidual {
                case: format!("{} @ {id}", e.irrep),
                residual,
                tolerance,
                pass: residual <= tolerance,
                inconclusive,
            });
        }
    }
    Ok(UniversalityReport {
        reference: reference.to_string(),
        max_residual: cases.iter().map(|c| c.residual).fold(0.0, f64::max),
        pass: cases.iter().all(|c| c.pass),
        vacuous: cases.is_empty(),
        inconclusive: cases.iter().any(|c| c.inconclusive),
        cases,
    })
}

/// Single-plaquette expectations under the Wilson weight, with their universality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilsonDefectReport {
    pub group: GroupId,
    pub beta: f64,
    /// `(irrep, <chi>)` by quadrature.
    pub expectations: Vec<(String, f64)>,
    pub universality: UniversalityReport,
}

impl WilsonDefectReport {
    /// Largest universality residual.
    pub fn max_defect(&self) -> f64 {
        self.universality.max_residual
    }
}

/// `<chi_rho>` under `exp(beta Re tr U) / Z` by Haar quadrature.
pub fn wilson_action_expectation(group: GroupId, beta: f64, irrep: &Irrep, quad: Quadrature) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return domain(format!("Wilson coupling must be nonnegative, got {beta}"));
    }
    let shift = beta * group.fundamental().dim_f64();
    let weight = |x: &crate::ClassPoint| (beta * x.representative().trace().re - shift).exp();
    let z = haar_integrate(group, |x| Complex64::new(weight(x), 0.0), quad)?;
    let num = haar_integrate(group, |x| character(irrep, x).unwrap_or_default() * weight(x), quad)?;
    Ok(num.value.re / z.value.re)
}

/// Universality residuals of the Wilson-action plaquette measure.
pub fn wilson_action_defect(
    group: GroupId,
    beta: f64,
    reference: &Irrep,
    irreps: &[Irrep],
    quad: Quadrature,
) -> Result<WilsonDefectReport> {
    let mut table = ExpectationTable::new();
    let mut expectations = Vec::new();
    let mut all: Vec<Irrep> = vec![*reference];
    all.extend(irreps.iter().filter(|r| r.label != reference.label));
    for r in &all {
        if r.group != group {
            return domain(format!("irrep {r} does not belong to group {group}"));
        }
        let v = wilson_action_expectation(group, beta, r, quad)?;
        expectations.push((r.to_string(), v));
        table.push(*r, "plaquette", v, 0.0)?;
    }
    Ok(WilsonDefectReport {
        group,
        beta,
        expectations,
        universality: verify_universality(&table, reference)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_irreps, irrep_data, IrrepLabel};
    use proptest::prelude::*;

    fn u1(n: i64) -> Irrep {
        irrep_data(GroupId::Circle, IrrepLabel::Charge(n)).unwrap()
    }

    fn nontrivial(g: GroupId) -> Vec<Irrep> {
        enumerate_irreps(g, 7.0)
            .unwrap()
            .into_iter()
            .filter(|r| !r.is_trivial())
            .collect()
    }

    #[test]
    fn exact_tables_pass_for_every_reference() {
        for g in [GroupId::Circle, GroupId::Su2, GroupId::Su3] {
            let irreps = nontrivial(g);
            let table =
                ExpectationTable::from_exact(&irreps, &[0.25, 1.0, 4.0], CouplingSpec::new(1.0).unwrap()).unwrap();
            for r in &irreps {
                let rep = verify_universality(&table, r).unwrap();
                assert!(rep.pass && !rep.vacuous, "{g} ref {r}");
                assert!(rep.max_residual < 1e-12, "{g} ref {r}: {}", rep.max_residual);
            }
        }
    }

    #[test]
    fn missing_reference_and_trivial_reference() {
        let mut t = ExpectationTable::new();
        t.push(u1(2), "a", 0.5, 0.0).unwrap();
        assert!(verify_universality(&t, &u1(1)).is_err());
        assert!(verify_universality(&t, &u1(0)).is_err());
        assert!(t.push(u1(1), "a", 1.5, 0.0).is_err());
    }

    #[test]
    fn reference_only_is_vacuous() {
        let mut t = ExpectationTable::new();
        t.push(u1(1), "a", 0.5, 0.0).unwrap();
        let rep = verify_universality(&t, &u1(1)).unwrap();
        assert!(rep.pass && rep.vacuous);
    }

    fn bessel_ratio_oracle(n: i32, beta: f64) -> f64 {
        // independent trapezoid quadrature of the modified Bessel integrals
        let m = 20_000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..m {
            let x = std::f64::consts::TAU * i as f64 / m as f64;
            let w = (beta * (x.cos() - 1.0)).exp();
            num += w * (n as f64 * x).cos();
            den += w;
        }
        num / den
    }

    #[test]
    fn wilson_action_contrast() {
        let q = Quadrature::default_for(GroupId::Circle);
        let rep = wilson_action_defect(GroupId::Circle, 1.0, &u1(1), &[u1(2)], q).unwrap();
        let oracle = (bessel_ratio_oracle(2, 1.0) - bessel_ratio_oracle(1, 1.0).powi(4)).abs();
        assert!((rep.max_defect() - oracle).abs() < 1e-10);
        assert!((rep.max_defect() - 0.067).abs() < 0.002, "{}", rep.max_defect());
        assert!(!rep.universality.pass);
    }

    #[test]
    fn wilson_action_haar_point_is_inconclusive() {
        let q = Quadrature::default_for(GroupId::Circle);
        let rep = wilson_action_defect(GroupId::Circle, 0.0, &u1(1), &[u1(2), u1(3)], q).unwrap();
        assert!(rep.expectations[1..].iter().all(|(_, v)| v.abs() < 1e-14));
        assert!(rep.universality.pass && rep.universality.inconclusive);
    }

    #[test]
    fn wilson_action_weak_coupling() {
        // large-argument expansion I_n(z) ~ e^z/sqrt(2 pi z) (1 - (m-1)/(8z) + (m-1)(m-9)/(2 (8z)^2)), m = 4n^2
        let ratio = |n: f64, z: f64| {
            let s = |n: f64| {
                let m = 4.0 * n * n;
                1.0 - (m - 1.0) / (8.0 * z) + (m - 1.0) * (m - 9.0) / (2.0 * (8.0 * z).powi(2))
            };
            s(n) / s(0.0)
        };
        let beta = 50.0;
        let q = Quadrature::default_for(GroupId::Circle);
        let rep = wilson_action_defect(GroupId::Circle, beta, &u1(1), &[u1(2)], q).unwrap();
        let laplace = (ratio(2.0, beta) - ratio(1.0, beta).powi(4)).abs();
        assert!(
            (rep.max_defect() - laplace).abs() < 1e-4,
            "{} vs {laplace}",
            rep.max_defect()
        );
        let mid = wilson_action_defect(GroupId::Circle, 5.0, &u1(1), &[u1(2)], q).unwrap();
        assert!(rep.max_defect() < mid.max_defect() && mid.max_defect() < 0.067);
    }

    #[test]
    fn mc_tolerance_uses_propagated_errors() {
        let mut t = ExpectationTable::new();
        t.push(u1(1), "a", 0.6, 0.01).unwrap();
        t.push(u1(2), "a", 0.6f64.powi(4) + 0.02, 0.01).unwrap();
        let rep = verify_universality(&t, &u1(1)).unwrap();
        let want = 3.0 * (0.01f64).hypot(4.0 * 0.6f64.powi(3) * 0.01);
        assert!((rep.cases[0].tolerance - want).abs() < 1e-15);
        assert!(rep.pass);
    }

    proptest! {
        #[test]
        fn casimir_rescaling_leaves_residuals(f in 0.1f64..10.0, g2 in 0.2f64..3.0) {
            let irreps = nontrivial(GroupId::Su2);
            let mut a = ExpectationTable::new();
            let mut b = ExpectationTable::new();
            for r in &irreps {
                // Wilson-action-like data that is not universal
                let v = r.dim_f64() * (-(r.casimir).sqrt() * g2).exp();
                a.push(*r, "x", v, 0.0).unwrap();
                b.push(r.rescaled(f), "x", v, 0.0).unwrap();
            }
            let ra = verify_universality(&a, &irreps[0]).unwrap();
            let rb = verify_universality(&b, &irreps[0].rescaled(f)).unwrap();
            for (x, y) in ra.cases.iter().zip(&rb.cases) {
                prop_assert!((x.residual - y.residual).abs() < 1e-12);
            }
        }
    }
}
