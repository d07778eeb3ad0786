use std::fs::File;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ActionKind, RunConfig};
use super::report::ReportCase;
use crate::confinement::{
    casimir_scaling_report, exact_loop_points, extract_potential, fit_area_perimeter, narrow_loop_family, LoopPoint,
    CASIMIR_TOL_EXACT, CASIMIR_TOL_MC,
};
use crate::error::{domain, Result};
use crate::exact::{static_potential_exact, wilson_exact, CouplingSpec, RectLoop};
use crate::group::{Irrep, Quadrature};
use crate::heat_kernel::{HeatKernel, HeatKernelSampler, HeatKernelSpec};
use crate::lattice::{
    region_product_series, run_replicas, ActionSpec, ChainOutput, ChainSpec, Lattice2D, LatticeRect, Observable,
};
use crate::principles::{
    concentric_joint_exact, verify_factorization_exact, verify_independence, verify_regularity, verify_universality,
    wilson_action_defect, wilson_action_expectation, ExactFactorization, ExpectationTable, LoopSet, EXACT_TOL,
    GROWTH_LIMIT, SIGMA_MULTIPLE,
};
use crate::singularity::refinement_scan;
use crate::stats::{estimate, jackknife, McEstimate};

/// What a command produced before it is wrapped into a report.
pub(crate) struct CommandOutput {
    pub cases: Vec<ReportCase>,
    pub pass: bool,
    pub details: Value,
    pub artifacts: Vec<String>,
}

fn coupling(cfg: &RunConfig) -> Result<CouplingSpec> {
    CouplingSpec::new(cfg.g2)
}

/// Configured irreps with the reference appended when missing.
fn irreps_with_reference(cfg: &RunConfig) -> Vec<Irrep> {
    let mut v = cfg.irreps.clone();
    if !v.iter().any(|r| r.label == cfg.reference.label) {
        v.push(cfg.reference);
    }
    v
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn write_rows(out: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_path(out.join(name))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(name.to_string())
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn mc_estimate(series: &[f64], bin: Option<usize>) -> Result<McEstimate> {
    match bin {
        Some(b) => jackknife(series, b),
        None => estimate(series),
    }
}

pub(crate) fn wilson_exact_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let c = coupling(cfg)?;
    let tol = cfg.tol.unwrap_or(EXACT_TOL);
    let areas = cfg.areas.clone().unwrap_or_else(|| vec![0.25, 1.0, 4.0]);
    let quad = Quadrature::default_for(cfg.group);
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    for &a in &areas {
        let kernel = HeatKernel::new(HeatKernelSpec::new(cfg.group, c.heat_time(a))?)?;
        for r in &cfg.irreps {
            let value = wilson_exact(r, a, c);
            let oracle = r.dim_f64() * kernel.coefficient_by_quadrature(r, quad)?;
            let case = ReportCase::compare(format!("{r} A={a}"), value, oracle, tol);
            rows.push(vec![
                r.to_string(),
                fmt(a),
                fmt(cfg.g2),
                fmt(value),
                fmt(oracle),
                fmt(case.residual),
            ]);
            cases.push(case);
        }
    }
    let csv = write_rows(
        &cfg.out,
        "wilson_exact.csv",
        &["irrep", "area", "g2", "value", "quadrature", "residual"],
        &rows,
    )?;
    Ok(CommandOutput {
        pass: cases.iter().all(|c| c.pass),
        cases,
        details: json!({ "tolerance": tol }),
        artifacts: vec![csv],
    })
}

pub(crate) fn verify_universality_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let areas = cfg.areas.clone().unwrap_or_else(|| vec![0.25, 1.0, 4.0]);
    let table = ExpectationTable::from_exact(&irreps_with_reference(cfg), &areas, coupling(cfg)?)?;
    let report = verify_universality(&table, &cfg.reference)?;
    let rows: Vec<Vec<String>> = table
        .entries()
        .iter()
        .map(|e| vec![e.irrep.to_string(), e.loop_id.clone(), fmt(e.value)])
        .collect();
    let csv = write_rows(&cfg.out, "universality_table.csv", &["irrep", "loop", "value"], &rows)?;
    Ok(CommandOutput {
        cases: report.cases.iter().map(ReportCase::from_residual).collect(),
        pass: report.pass,
        details: to_value(&report)?,
        artifacts: vec![csv],
    })
}

pub(crate) fn compare_actions_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let report = wilson_action_defect(
        cfg.group,
        cfg.beta_w,
        &cfg.reference,
        &cfg.irreps,
        Quadrature::default_for(cfg.group),
    )?;
    let mut cases: Vec<ReportCase> = report
        .universality
        .cases
        .iter()
        .map(ReportCase::from_residual)
        .collect();
    for c in &mut cases {
        c.case = format!("wilson beta={} {}", cfg.beta_w, c.case);
    }
    Ok(CommandOutput {
        pass: report.universality.pass,
        details: json!({ "max_defect": report.max_defect(), "wilson": to_value(&report)? }),
        cases,
        artifacts: vec![],
    })
}

pub(crate) fn verify_regularity_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let c = coupling(cfg)?;
    let mut areas = cfg
        .areas
        .clone()
        .unwrap_or_else(|| (1..=6).map(|k| 10f64.powi(-k)).collect());
    areas.sort_by(|a, b| b.total_cmp(a));
    let curve: Vec<(RectLoop, f64)> = areas
        .iter()
        .map(|&a| Ok((RectLoop::square(a)?, wilson_exact(&cfg.reference, a, c))))
        .collect::<Result<_>>()?;
    let report = verify_regularity(&curve, &cfg.reference, cfg.gauge)?;
    let rows: Vec<Vec<String>> = report
        .sigma
        .iter()
        .zip(&report.ratios)
        .zip(&curve)
        .map(|((s, q), (_, v))| vec![fmt(*s), fmt(*v), fmt(*q)])
        .collect();
    let csv = write_rows(&cfg.out, "regularity.csv", &["sigma", "value", "ratio"], &rows)?;
    let case = ReportCase {
        case: format!("{} growth exponent", cfg.reference),
        value: report.growth_exponent,
        expected: None,
        residual: report.growth_exponent,
        tolerance: GROWTH_LIMIT,
        pass: report.pass,
    };
    Ok(CommandOutput {
        cases: vec![case],
        pass: report.pass,
        details: to_value(&report)?,
        artifacts: vec![csv],
    })
}

pub(crate) fn singularity_scan_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let report = refinement_scan(cfg.group, cfg.area, cfg.g2, &cfg.ns)?;
    report.write_csv(File::create(cfg.out.join("scan.csv"))?)?;
    let mut cases = Vec::new();
    let mut prev: Option<f64> = None;
    for row in &report.rows {
        let Some(lp) = row.log_product else { continue };
        cases.push(ReportCase {
            case: format!("N={}", row.n),
            value: lp,
            expected: row.model,
            residual: row.model.map_or(0.0, |m| (lp - m).abs()),
            tolerance: 0.0,
            pass: prev.is_none_or(|p| lp < p),
        });
        prev = Some(lp);
    }
    Ok(CommandOutput {
        pass: cases.iter().all(|c| c.pass),
        cases,
        details: to_value(&report)?,
        artifacts: vec!["scan.csv".into()],
    })
}

fn lattice(cfg: &RunConfig) -> Result<Lattice2D> {
    Lattice2D::new(cfg.nx, cfg.nt, cfg.a)
}

fn chain_spec(cfg: &RunConfig) -> Result<ChainSpec> {
    let lat = lattice(cfg)?;
    let action = match cfg.action {
        ActionKind::HeatKernel => ActionSpec::HeatKernel {
            t: lat.plaquette_time(cfg.g2),
        },
        ActionKind::Wilson => ActionSpec::Wilson { beta: cfg.beta_w },
    };
    ChainSpec::new(lat, cfg.group, action, cfg.sweeps, cfg.therm)
}

fn replica_seeds(seed: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| seed.wrapping_add(i)).collect()
}

fn write_chains(out: &Path, chains: &[ChainOutput]) -> Result<Vec<String>> {
    chains
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let name = format!("chain_{i}.csv");
            ch.write_csv(File::create(out.join(&name))?)?;
            Ok(name)
        })
        .collect()
}

pub(crate) fn verify_independence_cmd(cfg: &RunConfig, seed: u64) -> Result<CommandOutput> {
    if cfg.action != ActionKind::HeatKernel {
        return domain("verify-independence runs on the heat-kernel action");
    }
    if cfg.nx < 3 || cfg.nt < 2 {
        return domain(format!(
            "verify-independence needs nx >= 3 and nt >= 2, got {}x{}",
            cfg.nx, cfg.nt
        ));
    }
    let irrep = cfg.reference;
    let lp = |x, t, w, h| Observable::Loop {
        rect: LatticeRect::new(x, t, w, h),
        irrep,
    };
    let (p0, p_adj, p_far) = (lp(0, 0, 1, 1), lp(1, 0, 1, 1), lp(cfg.nx - 1, cfg.nt - 1, 1, 1));
    let (inner, outer) = (lp(0, 0, 1, 1), lp(0, 0, 2, 2));
    let obs = [p0, p_adj, p_far, outer];
    let sets = [
        LoopSet::disjoint(vec![p0, p_adj]),
        LoopSet::disjoint(vec![p0, p_far]),
        LoopSet::overlapping(vec![inner, outer]),
    ];
    let chains = run_replicas(&chain_spec(cfg)?, &obs, &replica_seeds(seed, cfg.replicas))?;
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    let mut replicas = Vec::new();
    for (i, ch) in chains.iter().enumerate() {
        let rep = verify_independence(&sets, ch)?;
        for c in &rep.cases {
            // nested loops must be flagged as dependent
            let pass = if c.overlapping { !c.pass } else { c.pass };
            rows.push(vec![
                i.to_string(),
                c.case.clone(),
                fmt(c.joint[0]),
                fmt(c.product[0]),
                fmt(c.residual),
                fmt(c.stderr),
                c.pass.to_string(),
            ]);
            cases.push(ReportCase {
                case: format!(
                    "replica {i}: {}{}",
                    c.case,
                    if c.overlapping { " (expect dependent)" } else { "" }
                ),
                value: c.joint[0],
                expected: Some(c.product[0]),
                residual: c.residual,
                tolerance: c.tolerance,
                pass,
            });
        }
        replicas
            .push(json!({ "seed": ch.seed, "acceptance": ch.acceptance, "step": ch.step, "report": to_value(&rep)? }));
    }
    let mut details = json!({ "replicas": replicas });
    if irrep.group == crate::GroupId::Circle && irrep.casimir == 1.0 {
        let c = coupling(cfg)?;
        let a_in = cfg.a;
        let a_out = 4.0 * cfg.a;
        let exact = verify_factorization_exact(&[ExactFactorization {
            label: "nested exact".into(),
            joint: concentric_joint_exact(cfg.g2, a_in, a_out)?,
            factors: vec![wilson_exact(&irrep, a_in, c), wilson_exact(&irrep, a_out, c)],
        }]);
        let ec = &exact.cases[0];
        cases.push(ReportCase {
            case: "nested exact (expect dependent)".into(),
            value: ec.joint[0],
            expected: Some(ec.product[0]),
            residual: ec.residual,
            tolerance: ec.tolerance,
            pass: !ec.pass,
        });
        details["nested_exact"] = to_value(&exact)?;
    }
    let mut artifacts = vec![write_rows(
        &cfg.out,
        "independence.csv",
        &[
            "replica",
            "case",
            "joint_re",
            "product_re",
            "residual",
            "stderr",
            "factorizes",
        ],
        &rows,
    )?];
    artifacts.extend(write_chains(&cfg.out, &chains)?);
    Ok(CommandOutput {
        pass: cases.iter().all(|c| c.pass),
        cases,
        details,
        artifacts,
    })
}

/// Normalized loop values, exact or sampled as products of independent plaquettes of area `a`.
fn loop_points(
    cfg: &RunConfig,
    irrep: &Irrep,
    loops: &[RectLoop],
    seed: Option<u64>,
    stream: u64,
) -> Result<Vec<LoopPoint>> {
    let c = coupling(cfg)?;
    let Some(seed) = seed else {
        return Ok(exact_loop_points(irrep, loops, c));
    };
    let kernel = HeatKernel::new(HeatKernelSpec::new(cfg.group, c.heat_time(cfg.a))?)?;
    let sampler = HeatKernelSampler::new(&kernel)?;
    let d = irrep.dim_f64();
    loops
        .iter()
        .enumerate()
        .map(|(i, lp)| {
            let k = (lp.area() / cfg.a).round();
            if k < 1.0 || (k * cfg.a - lp.area()).abs() > 1e-9 * lp.area() {
                return domain(format!(
                    "loop {}x{} is not a whole number of plaquettes of area {}",
                    lp.r, lp.dt, cfg.a
                ));
            }
            let s = seed.wrapping_add(stream.wrapping_mul(1 << 20)).wrapping_add(i as u64);
            let series = region_product_series(k as usize, &sampler, irrep, cfg.samples, s)?;
            let est = mc_estimate(&series, cfg.bin)?;
            Ok(LoopPoint {
                lp: *lp,
                w: est.mean / d,
                stderr: est.stderr / d,
            })
        })
        .collect()
}

fn mc_seed(cfg: &RunConfig, command: &str) -> Result<Option<u64>> {
    if cfg.samples == 0 {
        Ok(None)
    } else {
        cfg.require_seed(command).map(Some)
    }
}

fn point_rows(irrep: &Irrep, pts: &[LoopPoint], rows: &mut Vec<Vec<String>>) {
    for p in pts {
        rows.push(vec![
            irrep.to_string(),
            fmt(p.lp.r),
            fmt(p.lp.dt),
            fmt(p.lp.area()),
            fmt(p.lp.perimeter()),
            fmt(p.w),
            fmt(p.stderr),
        ]);
    }
}

const POINT_HEADER: [&str; 7] = ["irrep", "r", "dt", "area", "perimeter", "w", "stderr"];

pub(crate) fn potential_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let seed = mc_seed(cfg, "potential")?;
    let c = coupling(cfg)?;
    let mut cases = Vec::new();
    let mut rows = Vec::new();
    let mut extractions = Vec::new();
    for (ii, irrep) in cfg.irreps.iter().enumerate() {
        for (ri, &r) in cfg.r.iter().enumerate() {
            let pts = loop_points(
                cfg,
                irrep,
                &narrow_loop_family(r, &cfg.dts)?,
                seed,
                (ii * cfg.r.len() + ri) as u64,
            )?;
            point_rows(irrep, &pts, &mut rows);
            let ex = extract_potential(&pts, r)?;
            let want = static_potential_exact(irrep, r, c)?;
            let tolerance = match seed {
                None => cfg.tol.unwrap_or(EXACT_TOL),
                Some(_) => SIGMA_MULTIPLE * ex.stderr,
            };
            let mut case = ReportCase::compare(format!("{irrep} r={r}"), ex.v, want, tolerance);
            case.pass &= ex.converged;
            cases.push(case);
            extractions.push(json!({ "irrep": irrep.to_string(), "extraction": to_value(&ex)? }));
        }
    }
    let csv = write_rows(&cfg.out, "potential_loops.csv", &POINT_HEADER, &rows)?;
    Ok(CommandOutput {
        pass: cases.iter().all(|c| c.pass),
        cases,
        details: json!({ "source": if seed.is_some() { "monte-carlo" } else { "exact" }, "potentials": extractions }),
        artifacts: vec![csv],
    })
}

pub(crate) fn casimir_scaling_cmd(cfg: &RunConfig) -> Result<CommandOutput> {
    let seed = mc_seed(cfg, "casimir-scaling")?;
    let mut loops = Vec::new();
    for &r in &cfg.r {
        loops.extend(narrow_loop_family(r, &cfg.dts)?);
    }
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (ii, irrep) in irreps_with_reference(cfg).iter().enumerate() {
        if irrep.is_trivial() {
            continue;
        }
        let pts = loop_points(cfg, irrep, &loops, seed, ii as u64)?;
        point_rows(irrep, &pts, &mut rows);
        fits.push((*irrep, fit_area_perimeter(&pts)?));
    }
    let tol = cfg.tol.unwrap_or(if seed.is_some() {
        CASIMIR_TOL_MC
    } else {
        CASIMIR_TOL_EXACT
    });
    let report = casimir_scaling_report(&fits, &cfg.reference, tol)?;
    let cases = report
        .rows
        .iter()
        .map(|r| ReportCase {
            case: format!("{} / {}", r.irrep, report.reference),
            value: r.measured_ratio,
            expected: Some(r.predicted_ratio),
            residual: r.deviation,
            tolerance: tol,
            pass: r.pass,
        })
        .collect();
    let fit_json: Vec<Value> = fits
        .iter()
        .map(|(r, f)| Ok(json!({ "irrep": r.to_string(), "fit": to_value(f)? })))
        .collect::<Result<_>>()?;
    let csv = write_rows(&cfg.out, "casimir_loops.csv", &POINT_HEADER, &rows)?;
    Ok(CommandOutput {
        cases,
        pass: report.pass,
        details: json!({ "source": if seed.is_some() { "monte-carlo" } else { "exact" }, "fits": fit_json, "scaling": to_value(&report)? }),
        artifacts: vec![csv],
    })
}

/// Exact `<Re chi>` on a region of `k` plaquettes under the configured action.
fn mc_expected(cfg: &RunConfig, irrep: &Irrep, k: usize) -> Result<f64> {
    let d = irrep.dim_f64();
    match cfg.action {
        ActionKind::HeatKernel => Ok(wilson_exact(irrep, k as f64 * cfg.a, coupling(cfg)?)),
        ActionKind::Wilson => {
            let one = wilson_action_expectation(cfg.group, cfg.beta_w, irrep, Quadrature::default_for(cfg.group))?;
            Ok(d * (one / d).powi(k as i32))
        }
    }
}

pub(crate) fn mc_run_cmd(cfg: &RunConfig, seed: u64) -> Result<CommandOutput> {
    let mut obs = Vec::new();
    for irrep in &cfg.irreps {
        obs.push(Observable::Translated {
            w: 1,
            h: 1,
            irrep: *irrep,
        });
        if cfg.nx >= 2 && cfg.nt >= 2 {
            obs.push(Observable::Translated {
                w: 2,
                h: 2,
                irrep: *irrep,
            });
        }
    }
    let chains = run_replicas(&chain_spec(cfg)?, &obs, &replica_seeds(seed, cfg.replicas))?;
    let mut cases = Vec::new();
    let mut replicas = Vec::new();
    for (i, ch) in chains.iter().enumerate() {
        let mut ests = Vec::new();
        for (j, o) in obs.iter().enumerate() {
            let est = mc_estimate(&ch.real_series(j), cfg.bin)?;
            let want = mc_expected(cfg, o.irrep(), o.plaquettes())?;
            cases.push(ReportCase::compare(
                format!("replica {i}: {}", o.label()),
                est.mean,
                want,
                SIGMA_MULTIPLE * est.stderr,
            ));
            ests.push(json!({ "observable": o.label(), "estimate": to_value(&est)? }));
        }
        replicas.push(json!({ "seed": ch.seed, "acceptance": ch.acceptance, "step": ch.step, "frozen": ch.frozen, "estimates": ests }));
    }
    Ok(CommandOutput {
        pass: cases.iter().all(|c| c.pass),
        cases,
        details: json!({ "replicas": replicas }),
        artifacts: write_chains(&cfg.out, &chains)?,
    })
}
