//! Command-line front end: configuration, dispatch and report persistence.

mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use config::{ActionKind, RawConfig, RunConfig, DEFAULT_OUT, OUT_ENV};
pub use report::{Report, ReportCase, Verdict, VERSION};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    WilsonExact,
    VerifyUniversality,
    VerifyIndependence,
    VerifyRegularity,
    CompareActions,
    SingularityScan,
    Potential,
    CasimirScaling,
    McRun,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, false).map_err(|_| Error::Config(format!("unknown command `{s}`")))
    }

    /// Commands whose output depends on a random stream in every configuration.
    pub fn always_stochastic(self) -> bool {
        matches!(self, Command::VerifyIndependence | Command::McRun)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ym2",
    version,
    args_override_self = true,
    about = "Exact and Monte Carlo Wilson loops for two-dimensional Yang-Mills"
)]
struct Cli {
    command: Command,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// u1, su2 or su3
    #[arg(long)]
    group: Option<String>,
    /// Comma-separated labels: n (u1), 2j (su2), p:q (su3).
    #[arg(long)]
    irreps: Option<String>,
    /// Reference irrep; defaults to the first nontrivial entry of --irreps.
    #[arg(long = "ref")]
    reference: Option<String>,
    #[arg(long)]
    g2: Option<String>,
    #[arg(long)]
    areas: Option<String>,
    /// Total area for the refinement scan.
    #[arg(long)]
    area: Option<String>,
    /// Refinement levels for the scan.
    #[arg(long = "Ns")]
    ns: Option<String>,
    #[arg(long = "beta-w")]
    beta_w: Option<String>,
    /// area or length
    #[arg(long)]
    gauge: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    nt: Option<String>,
    /// Plaquette area.
    #[arg(long)]
    a: Option<String>,
    /// heat-kernel or wilson
    #[arg(long)]
    action: Option<String>,
    #[arg(long)]
    sweeps: Option<String>,
    #[arg(long)]
    therm: Option<String>,
    #[arg(long)]
    bin: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    /// Samples per loop; nonzero switches potential and casimir-scaling to Monte Carlo data.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Loop widths.
    #[arg(long)]
    r: Option<String>,
    /// Loop temporal extents.
    #[arg(long)]
    dts: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cli {
    fn flags(&self) -> Result<RawConfig> {
        let mut raw = RawConfig::new();
        let pairs: [(&str, &Option<String>); 22] = [
            ("group", &self.group),
            ("irreps", &self.irreps),
            ("ref", &self.reference),
            ("g2", &self.g2),
            ("areas", &self.areas),
            ("area", &self.area),
            ("Ns", &self.ns),
            ("beta-w", &self.beta_w),
            ("gauge", &self.gauge),
            ("nx", &self.nx),
            ("nt", &self.nt),
            ("a", &self.a),
            ("action", &self.action),
            ("sweeps", &self.sweeps),
            ("therm", &self.therm),
            ("bin", &self.bin),
            ("replicas", &self.replicas),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("r", &self.r),
            ("dts", &self.dts),
            ("tol", &self.tol),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                raw.set(k, v.clone())?;
            }
        }
        if let Some(o) = &self.out {
            raw.set("out", o.to_string_lossy().into_owned())?;
        }
        Ok(raw)
    }
}

/// Finished command: the report and where it was written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub report_path: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.pass {
            0
        } else {
            1
        }
    }
}

/// Run `command`, writing its JSON report and CSV series into `config.out`.
pub fn dispatch(command: Command, config: &RunConfig) -> Result<Outcome> {
    let name = command.name();
    let seed = if command.always_stochastic()
        || config.samples > 0 && matches!(command, Command::Potential | Command::CasimirScaling)
    {
        Some(config.require_seed(&name)?)
    } else {
        None
    };
    std::fs::create_dir_all(&config.out)?;
    let out = match command {
        Command::WilsonExact => commands::wilson_exact_cmd(config)?,
        Command::VerifyUniversality => commands::verify_universality_cmd(config)?,
        Command::VerifyRegularity => commands::verify_regularity_cmd(config)?,
        Command::CompareActions => commands::compare_actions_cmd(config)?,
        Command::SingularityScan => commands::singularity_scan_cmd(config)?,
        Command::Potential => commands::potential_cmd(config)?,
        Command::CasimirScaling => commands::casimir_scaling_cmd(config)?,
        Command::VerifyIndependence => commands::verify_independence_cmd(config, seed.expect("checked"))?,
        Command::McRun => commands::mc_run_cmd(config, seed.expect("checked"))?,
    };
    let report = Report {
        command: name.clone(),
        version: VERSION.to_string(),
        seed,
        config: config.clone(),
        verdict: if out.pass { Verdict::Pass } else { Verdict::Fail },
        pass: out.pass,
        cases: out.cases,
        artifacts: out.artifacts,
        details: out.details,
    };
    let report_path = config.out.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&report_path, text)?;
    Ok(Outcome { report, report_path })
}

/// Resolve a configuration from parsed flags, the optional config file and the environment.
fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::from_file(p)?,
        None => RawConfig::new(),
    };
    raw.overlay(&cli.flags()?);
    let env_out = std::env::var(OUT_ENV).ok();
    RunConfig::resolve(&raw, cli.out.is_some(), env_out.as_deref())
}

/// Parse `args` (including the program name), run the command and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = resolve(&cli).and_then(|cfg| dispatch(cli.command, &cfg));
    match result {
        Ok(o) => {
            println!(
                "{}: {} ({} cases) -> {}",
                o.report.command,
                if o.report.pass { "PASS" } else { "FAIL" },
                o.report.cases.len(),
                o.report_path.display()
            );
            o.exit_code()
        }
        Err(e) => {
            eprintln!("ym2 {}: {e}", cli.command.name());
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, &str)], out: &std::path::Path) -> RunConfig {
        let mut raw = RawConfig::new();
        for (k, v) in pairs {
            raw.set(k, *v).unwrap();
        }
        raw.set("out", out.to_string_lossy().into_owned()).unwrap();
        RunConfig::resolve(&raw, true, None).unwrap()
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::value_variants() {
            assert_eq!(Command::parse(&c.name()).unwrap(), *c);
        }
        assert_eq!(Command::McRun.name(), "mc-run");
        assert!(Command::parse("plot").is_err());
    }

    #[test]
    fn universality_example_passes() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(
            &[
                ("group", "su2"),
                ("g2", "1"),
                ("areas", "0.25,1,4"),
                ("irreps", "1,2,3"),
                ("ref", "1"),
            ],
            dir.path(),
        );
        let o = dispatch(Command::VerifyUniversality, &c).unwrap();
        assert_eq!(o.exit_code(), 0);
        assert_eq!(o.report.verdict, Verdict::Pass);
        assert!(o.report.cases.iter().all(|c| c.residual < 1e-12));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&o.report_path).unwrap()).unwrap();
        for key in ["command", "version", "seed", "config", "cases", "verdict"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn compare_actions_example_fails() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(&[("group", "u1"), ("beta-w", "1"), ("irreps", "1,2")], dir.path());
        let o = dispatch(Command::CompareActions, &c).unwrap();
        assert_eq!(o.exit_code(), 1);
        let defect = o.report.details["max_defect"].as_f64().unwrap();
        assert!((defect - 0.067).abs() < 0.002, "{defect}");
    }

    #[test]
    fn stochastic_commands_need_a_seed() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(&[("group", "u1"), ("sweeps", "200"), ("therm", "50")], dir.path());
        assert!(matches!(dispatch(Command::McRun, &c), Err(Error::Config(_))));
        let c = cfg(&[("samples", "100")], dir.path());
        assert!(matches!(dispatch(Command::Potential, &c), Err(Error::Config(_))));
    }

    #[test]
    fn exact_potential_and_casimir() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(&[("group", "su2"), ("irreps", "1,2"), ("g2", "0.7")], dir.path());
        assert_eq!(dispatch(Command::Potential, &c).unwrap().exit_code(), 0);
        let o = dispatch(Command::CasimirScaling, &c).unwrap();
        assert_eq!(o.exit_code(), 0);
        let k2 = o.report.cases.iter().find(|c| c.case.starts_with("su2:k=2")).unwrap();
        assert!((k2.value - 8.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn exit_codes_from_run() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_string_lossy().into_owned();
        assert_eq!(run(["ym2", "no-such-command"]), 2);
        assert_eq!(run(["ym2", "verify-universality", "--group", "so5", "--out", &out]), 2);
        assert_eq!(
            run([
                "ym2",
                "verify-regularity",
                "--group",
                "u1",
                "--irreps",
                "1",
                "--out",
                &out
            ]),
            0
        );
        assert_eq!(
            run([
                "ym2",
                "compare-actions",
                "--group",
                "u1",
                "--irreps",
                "1,2",
                "--out",
                &out
            ]),
            1
        );
    }
}
