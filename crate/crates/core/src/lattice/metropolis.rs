use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{measure_wilson, Lattice2D, LatticeRect, LinkConfiguration};
use crate::error::{domain, Result};
use crate::group::element::random_unit_vector;
use crate::group::{character, GroupElement, GroupId, Irrep, Su2, Su3};
use crate::heat_kernel::{HeatKernel, HeatKernelSpec};
use crate::seeded_rng;
use crate::stats::{estimate, McEstimate};

/// Plaquette weight of the lattice measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSpec {
    /// `w(U) = K_t(U)`
    HeatKernel { t: f64 },
    /// `w(U) = exp(beta Re tr U)`
    Wilson { beta: f64 },
}

impl ActionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ActionSpec::HeatKernel { t } if !(t > 0.0 && t.is_finite()) => {
                domain(format!("heat-kernel time must be positive, got {t}"))
            }
            ActionSpec::Wilson { beta } if !(beta >= 0.0 && beta.is_finite()) => {
                domain(format!("Wilson coupling must be nonnegative, got {beta}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
enum Weight {
    Kernel(HeatKernel),
    Wilson(f64),
}

impl Weight {
    fn log_weight(&self, u: &GroupElement) -> f64 {
        match self {
            Weight::Kernel(k) => k.density(&u.class_of()).ln(),
            Weight::Wilson(beta) => beta * u.trace().re,
        }
    }
}

const TARGET_ACCEPTANCE: f64 = 0.5;

/// Single-link Metropolis updater.
///
/// Proposals left-multiply the link by a random element whose rotation
/// angle is uniform in `[-step, step]`; the proposal is symmetric, so the
/// acceptance ratio is the ratio of plaquette weights.
#[derive(Debug, Clone)]
pub struct Metropolis {
    group: GroupId,
    weight: Weight,
    step: f64,
}

impl Metropolis {
    pub fn new(group: GroupId, action: ActionSpec) -> Result<Self> {
        action.validate()?;
        let weight = match action {
            ActionSpec::HeatKernel { t } => Weight::Kernel(HeatKernel::new(HeatKernelSpec::new(group, t)?)?),
            ActionSpec::Wilson { beta } => Weight::Wilson(beta),
        };
        Ok(Metropolis {
            group,
            weight,
            step: 1.0,
        })
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step >= 0.0 && step.is_finite()) {
            return domain(format!("proposal step must be nonnegative, got {step}"));
        }
        self.step = step.min(max_step(self.group));
        Ok(self)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// A zero step proposes the identity and the chain never moves.
    pub fn is_frozen(&self) -> bool {
        self.step == 0.0
    }

    /// Rescale the step toward the target acceptance.
    pub fn tune(&mut self, acceptance: f64) {
        let factor = (acceptance / TARGET_ACCEPTANCE).clamp(0.7, 1.4);
        self.step = (self.step * factor).min(max_step(self.group));
    }

    fn proposal<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let angle = self.step * (2.0 * rng.random::<f64>() - 1.0);
        match self.group {
            GroupId::Circle => GroupElement::Circle(angle),
            GroupId::Su2 => GroupElement::Su2(Su2::from_axis_angle(random_unit_vector(rng), angle)),
            GroupId::Su3 => {
                let (i, j) = [(0, 1), (0, 2), (1, 2)][rng.random_range(0..3)];
                let u = Su2::from_axis_angle(random_unit_vector(rng), angle);
                GroupElement::Su3(Su3::embed_su2(&u, i, j))
            }
        }
    }

    fn local_log_weight(&self, cfg: &LinkConfiguration, plaquettes: &[(usize, usize)]) -> f64 {
        plaquettes
            .iter()
            .map(|&(x, t)| self.weight.log_weight(&cfg.plaquette(x, t)))
            .sum()
    }

    fn update<R: Rng + ?Sized>(
        &self,
        cfg: &mut LinkConfiguration,
        link: Link,
        plaquettes: &[(usize, usize)],
        rng: &mut R,
    ) -> bool {
        let old = *link.get(cfg);
        let before = self.local_log_weight(cfg, plaquettes);
        link.set(cfg, self.proposal(rng).mul(&old).renormalized());
        let after = self.local_log_weight(cfg, plaquettes);
        let accept = after.is_finite() && rng.random::<f64>() < (after - before).exp();
        if !accept {
            link.set(cfg, old);
        }
        accept
    }
}

fn max_step(group: GroupId) -> f64 {
    match group {
        GroupId::Circle => PI,
        _ => 2.0 * PI,
    }
}

#[derive(Debug, Clone, Copy)]
enum Link {
    H(usize, usize),
    V(usize, usize),
}

impl Link {
    fn get<'a>(&self, cfg: &'a LinkConfiguration) -> &'a GroupElement {
        match *self {
            Link::H(x, t) => cfg.horizontal(x, t),
            Link::V(x, t) => cfg.vertical(x, t),
        }
    }

    fn set(&self, cfg: &mut LinkConfiguration, g: GroupElement) {
        match *self {
            Link::H(x, t) => cfg.set_horizontal(x, t, g),
            Link::V(x, t) => cfg.set_vertical(x, t, g),
        }
    }
}

/// One pass of single-link updates over every link; returns the acceptance rate.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    cfg: &mut LinkConfiguration,
    metropolis: &Metropolis,
    rng: &mut R,
) -> Result<f64> {
    if cfg.group() != metropolis.group {
        return domain(format!(
            "configuration of {} cannot be updated with a {} action",
            cfg.group(),
            metropolis.group
        ));
    }
    let l = *cfg.lattice();
    let mut accepted = 0usize;
    let mut touched = Vec::with_capacity(2);
    for t in 0..=l.nt {
        for x in 0..l.nx {
            touched.clear();
            if t < l.nt {
                touched.push((x, t));
            }
            if t > 0 {
                touched.push((x, t - 1));
            }
            accepted += metropolis.update(cfg, Link::H(x, t), &touched, rng) as usize;
        }
    }
    for t in 0..l.nt {
        for x in 0..=l.nx {
            touched.clear();
            if x < l.nx {
                touched.push((x, t));
            }
            if x > 0 {
                touched.push((x - 1, t));
            }
            accepted += metropolis.update(cfg, Link::V(x, t), &touched, rng) as usize;
        }
    }
    Ok(accepted as f64 / l.n_links() as f64)
}

/// Quantity recorded once per sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// Character of one fixed rectangle.
    Loop { rect: LatticeRect, irrep: Irrep },
    /// Character of a `w x h` rectangle averaged over all its placements.
    Translated { w: usize, h: usize, irrep: Irrep },
}

impl Observable {
    pub fn irrep(&self) -> &Irrep {
        match self {
            Observable::Loop { irrep, .. } | Observable::Translated { irrep, .. } => irrep,
        }
    }

    /// Plaquettes enclosed by the loop.
    pub fn plaquettes(&self) -> usize {
        match self {
            Observable::Loop { rect, .. } => rect.plaquettes(),
            Observable::Translated { w, h, .. } => w * h,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Observable::Loop { rect, irrep } => {
                format!("wilson_{}x{}_at_{}_{}_{}", rect.w, rect.h, rect.x, rect.t, irrep)
            }
            Observable::Translated { w, h, irrep } => format!("wilson_{w}x{h}_mean_{irrep}"),
        }
    }

    fn check(&self, lattice: &Lattice2D, group: GroupId) -> Result<()> {
        if self.irrep().group != group {
            return domain(format!("observable {} does not belong to group {group}", self.label()));
        }
        let fits = match self {
            Observable::Loop { rect, .. } => rect.fits(lattice),
            Observable::Translated { w, h, .. } => LatticeRect::new(0, 0, *w, *h).fits(lattice),
        };
        if !fits {
            return domain(format!("observable {} does not fit the lattice", self.label()));
        }
        Ok(())
    }

    pub fn measure(&self, cfg: &LinkConfiguration) -> Result<Complex64> {
        match self {
            Observable::Loop { rect, irrep } => measure_wilson(cfg, rect, irrep),
            Observable::Translated { w, h, irrep } => {
                let l = cfg.lattice();
                let mut acc = Complex64::new(0.0, 0.0);
                let mut n = 0usize;
                for t in 0..=l.nt - h {
                    for x in 0..=l.nx - w {
                        let rect = LatticeRect::new(x, t, *w, *h);
                        acc += if *w == 1 && *h == 1 {
                            character(irrep, &cfg.plaquette(x, t).class_of())?
                        } else {
                            measure_wilson(cfg, &rect, irrep)?
                        };
                        n += 1;
                    }
                }
                Ok(acc / n as f64)
            }
        }
    }
}

/// Parameters of one Markov chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub lattice: Lattice2D,
    pub group: GroupId,
    pub action: ActionSpec,
    /// Total sweeps including thermalization.
    pub n_sweeps: usize,
    pub n_therm: usize,
    pub initial_step: f64,
}

impl ChainSpec {
    pub fn new(
        lattice: Lattice2D,
        group: GroupId,
        action: ActionSpec,
        n_sweeps: usize,
        n_therm: usize,
    ) -> Result<Self> {
        action.validate()?;
        if n_sweeps <= n_therm {
            return domain(format!("need n_sweeps > n_therm, got {n_sweeps} and {n_therm}"));
        }
        Ok(ChainSpec {
            lattice,
            group,
            action,
            n_sweeps,
            n_therm,
            initial_step: 1.0,
        })
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.initial_step = step;
        self
    }
}

/// Recorded series of one chain; `series[i][s]` is observable `i` after sweep `n_therm + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub seed: u64,
    pub labels: Vec<String>,
    pub series: Vec<Vec<Complex64>>,
    /// Mean acceptance over the recorded sweeps.
    pub acceptance: f64,
    /// Step after thermalization.
    pub step: f64,
    pub frozen: bool,
}

impl ChainOutput {
    pub fn len(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn real_series(&self, i: usize) -> Vec<f64> {
        self.series[i].iter().map(|z| z.re).collect()
    }

    /// Jackknife estimate of the real part of observable `i`.
    pub fn estimate(&self, i: usize) -> Result<McEstimate> {
        estimate(&self.real_series(i))
    }

    /// CSV with a `sweep` column and one real-part column per observable.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["sweep".to_string()];
        header.extend(self.labels.iter().cloned());
        out.write_record(&header)?;
        for s in 0..self.len() {
            let mut row = vec![s.to_string()];
            row.extend(self.series.iter().map(|col| format!("{:e}", col[s].re)));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Cold start, tuned thermalization, then one sample per sweep per observable.
pub fn run_chain(spec: &ChainSpec, observables: &[Observable], seed: u64) -> Result<ChainOutput> {
    if spec.n_sweeps <= spec.n_therm {
        return domain(format!(
            "need n_sweeps > n_therm, got {} and {}",
            spec.n_sweeps, spec.n_therm
        ));
    }
    for o in observables {
        o.check(&spec.lattice, spec.group)?;
    }
    let mut metropolis = Metropolis::new(spec.group, spec.action)?.with_step(spec.initial_step)?;
    let mut rng = seeded_rng(seed);
    let mut cfg = LinkConfiguration::cold(spec.lattice, spec.group);
    for _ in 0..spec.n_therm {
        let acc = metropolis_sweep(&mut cfg, &metropolis, &mut rng)?;
        metropolis.tune(acc);
    }
    let n = spec.n_sweeps - spec.n_therm;
    let mut series = vec![Vec::with_capacity(n); observables.len()];
    let mut acc_sum = 0.0;
    for _ in 0..n {
        acc_sum += metropolis_sweep(&mut cfg, &metropolis, &mut rng)?;
        for (col, o) in series.iter_mut().zip(observables) {
            col.push(o.measure(&cfg)?);
        }
    }
    Ok(ChainOutput {
        seed,
        labels: observables.iter().map(Observable::label).collect(),
        series,
        acceptance: acc_sum / n as f64,
        step: metropolis.step(),
        frozen: metropolis.is_frozen(),
    })
}

/// Independent chains, one per seed, returned in seed order.
pub fn run_replicas(spec: &ChainSpec, observables: &[Observable], seeds: &[u64]) -> Result<Vec<ChainOutput>> {
    seeds.par_iter().map(|&s| run_chain(spec, observables, s)).collect()
}
