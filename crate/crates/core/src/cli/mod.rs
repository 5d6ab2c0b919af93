//! The `jumppath` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification criterion failed, 2 usage or
//! configuration error.

mod config;

pub use config::{Ini, RunConfig};

use std::fs;
use std::io::{self, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimate::{EstimateResult, Estimator, CSV_HEADER};
use crate::kernel::KernelParams;
use crate::rng;
use crate::simulate::{simulate_path, Domain, SimConfig};
use crate::verify::{self, Report, REPORT_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding the configured master seed.
pub const SEED_ENV: &str = "JUMPPATH_SEED";

pub const ESTIMATORS: [&str; 6] = ["exit", "hitting", "occupation", "resolvent", "density", "tube"];

#[derive(Debug, Parser)]
#[command(name = "jumppath", version, about = "Simulate and verify truncated stable-like jump processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config file and JUMPPATH_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths and dump them as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of paths; with more than one, path `i` goes to `<out>.<i>.csv`.
        #[arg(long, default_value_t = 1)]
        paths: usize,
    },
    /// Run one estimator and emit a CSV row.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// One of exit, hitting, occupation, resolvent, density, tube.
        #[arg(long)]
        estimator: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run verification scenarios.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run a whole suite; only `default` exists.
        #[arg(long)]
        suite: Option<String>,
        /// Run the named scenario; may be repeated.
        #[arg(long)]
        scenario: Vec<String>,
        /// Print the scenario names and exit.
        #[arg(long)]
        list: bool,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Simulate { common, paths } => cmd_simulate(common, *paths),
        Command::Estimate { common, estimator, n } => cmd_estimate(common, estimator.as_deref(), *n),
        Command::Verify {
            common,
            suite,
            scenario,
            list,
        } => cmd_verify(common, suite.as_deref(), scenario, *list),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

struct Loaded {
    config: Option<RunConfig>,
    hash: String,
    seed: u64,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn short_hash(data: &[u8]) -> String {
    hex(&Sha256::digest(data)[..8])
}

fn load(common: &Common, required: bool) -> Result<Loaded> {
    let (config, hash) = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg = RunConfig::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            (Some(cfg), short_hash(text.as_bytes()))
        }
        None if required => return Err(Error::Config("--config is required for this command".into())),
        None => (None, "none".to_string()),
    };
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    let seed = common
        .seed
        .or(env_seed)
        .or(config.as_ref().map(|c| c.seed))
        .unwrap_or(0);
    Ok(Loaded { config, hash, seed })
}

fn open_out(path: Option<&FsPath>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn comment_header(hash: &str, seed: u64) -> String {
    format!("# config_hash={hash} seed={seed}")
}

fn params_hash(params: &KernelParams, eps_min: f64) -> String {
    let canonical = format!(
        "d={} alpha={} kappa1={} kappa2={} modulation={} eps_min={eps_min}",
        params.dim(),
        params.alpha(),
        params.kappa1(),
        params.kappa2(),
        params.modulation_kind().name()
    );
    short_hash(canonical.as_bytes())
}

pub fn cmd_simulate(common: &Common, paths: usize) -> Result<i32> {
    let loaded = load(common, true)?;
    let cfg = loaded.config.expect("required");
    if paths == 0 {
        return Err(Error::Config("--paths must be at least 1".into()));
    }
    let x0 = cfg.point_or_origin("sim", "x0")?;
    let mut sim = SimConfig::new(cfg.eps_min, cfg.t_max)?.with_seed(loaded.seed);
    if let Some(dom) = cfg.domain("sim", "domain")? {
        sim = sim.with_domain(dom);
    }
    for i in 0..paths {
        let path = simulate_path(&cfg.kernel, &x0, &sim, &mut rng::stream(loaded.seed, i as u64))?;
        let target = match (&common.out, paths) {
            (Some(p), 1) => Some(p.clone()),
            (Some(p), _) => Some(p.with_extension(format!("{i}.csv"))),
            (None, _) => None,
        };
        let mut out = open_out(target.as_deref())?;
        writeln!(out, "{}", comment_header(&loaded.hash, loaded.seed)).map_err(io_err)?;
        path.write_csv(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)?;
        eprintln!(
            "path {i}: {} jumps, final position {:?} at t = {}, {}",
            path.jumps(),
            path.last_position(),
            path.t_final(),
            path.stop_reason().as_str()
        );
    }
    Ok(EXIT_OK)
}

fn run_estimator(cfg: &RunConfig, est: &Estimator, name: &str) -> Result<EstimateResult> {
    let s = "estimate";
    let x = cfg.point_or_origin(s, "x")?;
    match name {
        "exit" => est.mean_exit_time(&x, &cfg.required_domain(s, "domain")?),
        "hitting" => est.hitting_prob(&x, &cfg.required_domain(s, "target")?, &cfg.required_domain(s, "domain")?),
        "occupation" => {
            let cube = cfg.required_domain(s, "domain")?;
            let set = cfg.domain(s, "set")?.unwrap_or_else(|| cube.clone());
            est.occupation(&x, &cube, &set)
        }
        "resolvent" => {
            let lambda: f64 = cfg.ini.get(s, "lambda")?;
            let set = cfg.domain(s, "set")?.unwrap_or_else(|| Domain::space(cfg.dim()));
            est.resolvent(&x, &set, lambda)
        }
        "density" => {
            let t: f64 = cfg.ini.get(s, "t")?;
            let y = cfg.point(s, "y")?;
            let h: f64 = cfg.ini.get_or(s, "bandwidth", crate::estimate::DEFAULT_BANDWIDTH)?;
            match cfg.domain(s, "killing")? {
                Some(k) => est.killed_density(t, &x, &y, h, &k),
                None => est.density(t, &x, &y, h),
            }
        }
        "tube" => {
            let tube = cfg.tube(s)?;
            est.tube_probability(tube.start(), &tube)
        }
        other => Err(Error::Config(format!(
            "unknown estimator '{other}'; expected one of {}",
            ESTIMATORS.join(", ")
        ))),
    }
}

pub fn cmd_estimate(common: &Common, estimator: Option<&str>, n: Option<usize>) -> Result<i32> {
    let loaded = load(common, true)?;
    let cfg = loaded.config.expect("required");
    let name = match estimator {
        Some(name) => name.to_string(),
        None => cfg.ini.get_str("estimate", "estimator")?.to_string(),
    };
    if !ESTIMATORS.contains(&name.as_str()) {
        return Err(Error::Config(format!(
            "unknown estimator '{name}'; expected one of {}",
            ESTIMATORS.join(", ")
        )));
    }
    let n = match n {
        Some(n) => n,
        None => cfg.ini.get("estimate", "n")?,
    };
    let mut est = Estimator::new(cfg.kernel.clone(), cfg.eps_min, n, loaded.seed)?.with_threads(common.threads)?;
    if cfg.ini.has("estimate", "max_horizon") {
        est = est.with_max_horizon(cfg.ini.get("estimate", "max_horizon")?)?;
    }
    let result = run_estimator(&cfg, &est, &name)?;
    if result.censoring_flagged() {
        log::warn!("{:.4} of the paths were censored; the estimate is biased low", result.censored_frac);
    }
    let scenario = common
        .config
        .as_ref()
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut out = open_out(common.out.as_deref())?;
    writeln!(out, "{}", comment_header(&loaded.hash, loaded.seed)).map_err(io_err)?;
    writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
    writeln!(out, "{}", result.csv_row(&scenario, &name, &params_hash(&cfg.kernel, cfg.eps_min))).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(common: &Common, suite: Option<&str>, names: &[String], list: bool) -> Result<i32> {
    if list {
        for name in verify::scenario_names() {
            println!("{name}");
        }
        return Ok(EXIT_OK);
    }
    let loaded = load(common, false)?;
    let mut scenarios = verify::default_suite(loaded.seed);
    match (suite, names.is_empty()) {
        (Some("default"), true) => {}
        (Some(other), true) => return Err(Error::Config(format!("unknown suite '{other}'"))),
        (None, false) => {
            if let Some(bad) = names.iter().find(|n| !verify::scenario_names().contains(&n.as_str())) {
                return Err(Error::Config(format!(
                    "unknown scenario '{bad}'; expected one of {}",
                    verify::scenario_names().join(", ")
                )));
            }
            scenarios.retain(|s| names.contains(&s.name));
        }
        (Some(_), false) => return Err(Error::Config("use either --suite or --scenario, not both".into())),
        (None, true) => return Err(Error::Config("nothing to run: pass --suite default or --scenario".into())),
    }
    let mut reports: Vec<Report> = Vec::new();
    for mut scn in scenarios {
        scn.threads = common.threads;
        let report = verify::run_scenario(&scn)?;
        print!("{}", report.summary());
        reports.push(report);
    }
    let mut out = open_out(common.out.as_deref())?;
    writeln!(out, "{}", comment_header(&loaded.hash, loaded.seed)).map_err(io_err)?;
    writeln!(out, "{REPORT_HEADER}").map_err(io_err)?;
    for r in &reports {
        write!(out, "{}", r.csv_rows()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    let passed = reports.iter().all(Report::passed);
    println!("overall: {}", if passed { "PASS" } else { "FAIL" });
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

/// Entry point of the `jumppath` binary.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(std::env::args_os())
}
