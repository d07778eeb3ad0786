use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{irrep_data, GroupId, Irrep, IrrepLabel};
use crate::principles::SigmaGauge;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "YM2_OUT";
pub const DEFAULT_OUT: &str = "ym2-out";

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: &[&str] = &[
    "group", "irreps", "ref", "g2", "areas", "area", "Ns", "beta-w", "gauge", "nx", "nt", "a", "action", "sweeps",
    "therm", "bin", "replicas", "samples", "seed", "r", "dts", "tol", "out",
];

/// Raw key/value settings in increasing precedence order of application.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim().trim_start_matches("--").to_string();
            check_key(&k)?;
            m.insert(k, v.trim().to_string());
        }
        Ok(RawConfig(m))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key)?;
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Entries of `other` replace ours.
    pub fn overlay(&mut self, other: &RawConfig) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn check_key(k: &str) -> Result<()> {
    if KEYS.contains(&k) {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown setting `{k}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    HeatKernel,
    Wilson,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub group: GroupId,
    pub irreps: Vec<Irrep>,
    pub reference: Irrep,
    pub g2: f64,
    /// Loop areas; each command has its own default when unset.
    pub areas: Option<Vec<f64>>,
    pub area: f64,
    pub ns: Vec<usize>,
    pub beta_w: f64,
    pub gauge: SigmaGauge,
    pub nx: usize,
    pub nt: usize,
    pub a: f64,
    pub action: ActionKind,
    pub sweeps: usize,
    pub therm: usize,
    /// Jackknife bin size; automatic when unset.
    pub bin: Option<usize>,
    pub replicas: usize,
    /// Monte Carlo samples per loop; 0 selects exact data where a command supports both.
    pub samples: usize,
    pub seed: Option<u64>,
    pub r: Vec<f64>,
    pub dts: Vec<f64>,
    pub tol: Option<f64>,
    pub out: PathBuf,
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{s}` for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse_num(key, x))
        .collect()
}

fn parse_irrep(group: GroupId, s: &str) -> Result<Irrep> {
    irrep_data(group, IrrepLabel::parse(group, s)?)
}

impl RunConfig {
    /// Resolve raw settings; `env_out` is the value of [`OUT_ENV`], used when no `out` flag is set.
    pub fn resolve(raw: &RawConfig, flag_out: bool, env_out: Option<&str>) -> Result<Self> {
        let get = |k: &str, d: &str| raw.get(k).unwrap_or(d).to_string();
        let group = GroupId::parse(&get("group", "su2"))?;
        let irreps: Vec<Irrep> = get("irreps", "1")
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_irrep(group, s))
            .collect::<Result<_>>()?;
        if irreps.is_empty() {
            return Err(Error::Config("irreps must not be empty".into()));
        }
        let reference = match raw.get("ref") {
            Some(s) => parse_irrep(group, s)?,
            None => irreps
                .iter()
                .copied()
                .find(|r| !r.is_trivial())
                .unwrap_or_else(|| group.fundamental()),
        };
        let action = match get("action", "heat-kernel").as_str() {
            "heat-kernel" | "heat_kernel" | "hk" => ActionKind::HeatKernel,
            "wilson" => ActionKind::Wilson,
            other => return Err(Error::Config(format!("unknown action `{other}`"))),
        };
        let out = match (flag_out, env_out) {
            (false, Some(e)) if !e.is_empty() => PathBuf::from(e),
            _ => PathBuf::from(get("out", DEFAULT_OUT)),
        };
        let cfg = RunConfig {
            group,
            irreps,
            reference,
            g2: parse_num("g2", &get("g2", "1"))?,
            areas: raw.get("areas").map(|s| parse_list("areas", s)).transpose()?,
            area: parse_num("area", &get("area", "1"))?,
            ns: parse_list("Ns", &get("Ns", "4,16,64,256"))?,
            beta_w: parse_num("beta-w", &get("beta-w", "1"))?,
            gauge: SigmaGauge::parse(&get("gauge", "area"))?,
            nx: parse_num("nx", &get("nx", "4"))?,
            nt: parse_num("nt", &get("nt", "4"))?,
            a: parse_num("a", &get("a", "0.5"))?,
            action,
            sweeps: parse_num("sweeps", &get("sweeps", "5000"))?,
            therm: parse_num("therm", &get("therm", "500"))?,
            bin: raw.get("bin").map(|s| parse_num("bin", s)).transpose()?,
            replicas: parse_num("replicas", &get("replicas", "1"))?,
            samples: parse_num("samples", &get("samples", "0"))?,
            seed: raw.get("seed").map(|s| parse_num("seed", s)).transpose()?,
            r: parse_list("r", &get("r", "1,2"))?,
            dts: parse_list("dts", &get("dts", "1,2,4,8"))?,
            tol: raw.get("tol").map(|s| parse_num("tol", s)).transpose()?,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.g2 > 0.0 && self.g2.is_finite()) {
            return bad(format!("g2 must be positive, got {}", self.g2));
        }
        if self.areas.iter().flatten().any(|a| !(*a > 0.0)) || !(self.area > 0.0) || !(self.a > 0.0) {
            return bad("areas must be positive".into());
        }
        if !(self.beta_w >= 0.0) {
            return bad(format!("beta-w must be nonnegative, got {}", self.beta_w));
        }
        if self.nx == 0 || self.nt == 0 || self.replicas == 0 || self.bin == Some(0) {
            return bad("nx, nt, bin and replicas must be positive".into());
        }
        if self.sweeps <= self.therm {
            return bad(format!("sweeps ({}) must exceed therm ({})", self.sweeps, self.therm));
        }
        if self.r.iter().chain(&self.dts).any(|x| !(*x > 0.0)) {
            return bad("loop extents must be positive".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return bad(format!("tol must be positive, got {t}"));
            }
        }
        Ok(())
    }

    /// The seed, required by stochastic commands.
    pub fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config(format!("{command} is stochastic and needs --seed")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> RawConfig {
        let mut r = RawConfig::new();
        for (k, v) in pairs {
            r.set(k, *v).unwrap();
        }
        r
    }

    #[test]
    fn parses_file_format() {
        let r = RawConfig::parse_text("# run\ngroup = u1\n\nirreps=1,2 # two\n--g2 = 0.5\n").unwrap();
        assert_eq!(r.get("group"), Some("u1"));
        assert_eq!(r.get("irreps"), Some("1,2"));
        assert_eq!(r.get("g2"), Some("0.5"));
        assert!(RawConfig::parse_text("colour = red").is_err());
        assert!(RawConfig::parse_text("group u1").is_err());
    }

    #[test]
    fn precedence() {
        let mut base = raw(&[("g2", "2"), ("out", "from-file")]);
        base.overlay(&raw(&[("g2", "3")]));
        let c = RunConfig::resolve(&base, false, Some("from-env")).unwrap();
        assert_eq!(c.g2, 3.0);
        assert_eq!(c.out, PathBuf::from("from-env"));
        let c = RunConfig::resolve(&base, true, Some("from-env")).unwrap();
        assert_eq!(c.out, PathBuf::from("from-file"));
        let c = RunConfig::resolve(&RawConfig::new(), false, None).unwrap();
        assert_eq!(c.out, PathBuf::from(DEFAULT_OUT));
    }

    #[test]
    fn irreps_and_reference() {
        let c = RunConfig::resolve(&raw(&[("group", "su3"), ("irreps", "0:0,1:1,2:0")]), false, None).unwrap();
        assert_eq!(c.irreps.len(), 3);
        assert_eq!(c.reference.label, IrrepLabel::Dynkin(1, 1));
        assert!(RunConfig::resolve(&raw(&[("group", "su2"), ("irreps", "1:1")]), false, None).is_err());
        assert!(RunConfig::resolve(&raw(&[("g2", "-1")]), false, None).is_err());
        assert!(RunConfig::resolve(&raw(&[("sweeps", "10"), ("therm", "10")]), false, None).is_err());
        assert!(RunConfig::resolve(&raw(&[("seed", "x")]), false, None).is_err());
    }
}
