//! The `qng` command line: every pipeline stage as a subcommand writing JSON or
//! CSV, each output file accompanied by a `<file>.manifest.json` sidecar.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error or malformed input.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{certify, Criterion, ThresholdTable};
use crate::error::Error;
use crate::fock::PhononDistribution;
use crate::prep::{ladder_prepare, sequence_duration, HeatingSchedule, PrepConfig};
use crate::rabi::{fit_populations, mc_uncertainty, sampling_plan, synthetic_trace, RabiConfig, RabiTrace};
use crate::sensing::{default_u_grid, log_grid, SensingReport};
use crate::thermal::{channel_sweep, lindblad_first_order, pulse_to_nbar, sweep_csv, thermal_depth};
use crate::units::{parse_angular_frequency, parse_rate, parse_time};
use crate::wigner::{count_negative_annuli, default_radii, negativity_depth_of, uniform_radii, wigner_radial};

/// Environment variable overriding the threshold cache directory.
pub const CACHE_ENV: &str = "QNG_CACHE_DIR";
const CACHE_FILE: &str = "thresholds.json";

#[derive(Debug, Parser)]
#[command(name = "qng", version, about = "Quantum non-Gaussianity analysis of phonon-number distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genuine and basic thresholds for a range of n (JSON table).
    Thresholds(ThresholdsArgs),
    /// Compare P_n of a distribution against both thresholds (JSON).
    Certify(CertifyArgs),
    /// Thermal depth of a criterion (JSON).
    Depth(DepthArgs),
    /// Apply the additive thermal channel at one n̄ (JSON) or a sweep (CSV).
    Thermalize(ThermalizeArgs),
    /// Fisher information, σ and metrological ratio over a grid of |α|² (CSV or JSON).
    Sense(SenseArgs),
    /// Fit phonon populations to a blue-sideband Rabi trace (JSON).
    Fit(FitArgs),
    /// Simulate ladder preparation of a Fock state (JSON).
    Simulate(SimulateArgs),
    /// Radial Wigner function of a distribution (CSV); prints the number of negative annuli.
    Wigner(WignerArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when omitted (no manifest is written then).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    /// n or an inclusive range `a..b`.
    #[arg(long, value_parser = parse_range)]
    pub n: (usize, usize),
    #[arg(long, value_enum, default_value_t = CriterionArg::Both)]
    pub criterion: CriterionArg,
    /// Ignore and do not update the threshold cache.
    #[arg(long)]
    pub no_cache: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Genuine,
    Basic,
    Both,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Distribution JSON file.
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub no_cache: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Initial state `fock:N` or `thermal:NBAR`.
    #[arg(long, conflicts_with = "dist", required_unless_present = "dist")]
    pub state: Option<String>,
    /// Initial state from a distribution JSON file.
    #[arg(long)]
    pub dist: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DepthCriterionArg {
    Genuine,
    Basic,
    WignerNegativity,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Phonon number whose P_n is tested; defaults to N of `fock:N`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub criterion: DepthCriterionArg,
    /// Fraction of each negative peak that must survive (wigner-negativity only).
    #[arg(long, default_value_t = crate::wigner::DEFAULT_RETAIN)]
    pub retain: f64,
    #[arg(long)]
    pub no_cache: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    /// Exact phase-averaged Gaussian displacement channel.
    Gaussian,
    /// First-order expansion with coefficient n̄.
    FirstOrder,
}

#[derive(Debug, Args)]
pub struct ThermalizeArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Added mean phonons: a value, a comma list, or `lo:hi:count` (linear).
    #[arg(long, conflicts_with = "tau", required_unless_present = "tau")]
    pub nbar: Option<String>,
    /// Recoil pulse durations with units (comma list, e.g. `1us,2us`), converted
    /// with the vacuum calibration of 115 phonons per ms.
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long, value_enum, default_value_t = ChannelArg::Gaussian)]
    pub channel: ChannelArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SenseArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// `default` (60 log-spaced points on [1e-6, 1]), `lo:hi:points` (log) or a comma list.
    #[arg(long, default_value = "default")]
    pub grid: String,
    /// Number of repetitions N.
    #[arg(long, default_value_t = 1)]
    pub shots: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RabiArgs {
    /// Carrier Rabi frequency, e.g. `2pi*69.7kHz` or `4.38e5rad/s`.
    #[arg(long, default_value = "2pi*69.7kHz", value_parser = parse_angular_frequency_arg)]
    pub omega_c: f64,
    /// Lamb–Dicke parameter.
    #[arg(long, default_value_t = 0.0632)]
    pub eta: f64,
    /// Decay rate of the ground-state oscillation, e.g. `2pi*0.054kHz`.
    #[arg(long, default_value = "2pi*0.054kHz", value_parser = parse_angular_frequency_arg)]
    pub gamma0: f64,
    /// Decay exponent x in γ_n = (n+1)^x γ_0.
    #[arg(long, default_value_t = 0.7)]
    pub x: f64,
}

impl RabiArgs {
    fn config(&self, shots: u64) -> Result<RabiConfig, CliError> {
        RabiConfig::new(self.omega_c, self.eta, self.gamma0, self.x, shots).map_err(CliError::usage)
    }

    fn record(&self, p: &mut BTreeMap<String, String>) {
        p.insert("omega_c".into(), format!("{}rad/s", self.omega_c));
        p.insert("eta".into(), self.eta.to_string());
        p.insert("gamma0".into(), format!("{}rad/s", self.gamma0));
        p.insert("x".into(), self.x.to_string());
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Trace CSV with header `time_us,p_g,shots`.
    #[arg(long)]
    pub trace: PathBuf,
    #[command(flatten)]
    pub rabi: RabiArgs,
    /// Highest fitted population.
    #[arg(long)]
    pub n_max: usize,
    /// Monte-Carlo resampling draws for uncertainties (0 disables, otherwise ≥ 100).
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    PerPulse,
    EndOfSequence,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n_target: usize,
    #[command(flatten)]
    pub rabi: RabiArgs,
    /// Motional heating rate, e.g. `2.7/s`.
    #[arg(long, default_value = "0/s", value_parser = parse_rate_arg)]
    pub heating_rate: f64,
    /// Ground-state population after cooling.
    #[arg(long, default_value_t = 1.0)]
    pub p0: f64,
    /// Fraction transferred per π pulse.
    #[arg(long, default_value_t = 1.0)]
    pub efficiency: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::PerPulse)]
    pub schedule: ScheduleArg,
    /// Also write a synthetic Rabi trace of the prepared state to this CSV file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Shots per trace point.
    #[arg(long, default_value_t = 100)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Largest radius; defaults to √(2N) + 5.
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long, default_value_t = crate::wigner::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Provenance written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub seed: Option<u64>,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }
}

/// Path of the manifest sidecar of an output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(e) => write!(f, "error: {e}"),
        }
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("'{s}' is not n or a range a..b");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(format!("range '{s}' must satisfy 1 ≤ a ≤ b"));
    }
    Ok((a, b))
}

fn parse_angular_frequency_arg(s: &str) -> Result<f64, String> {
    parse_angular_frequency(s).map_err(|e| e.to_string())
}

fn parse_rate_arg(s: &str) -> Result<f64, String> {
    parse_rate(s).map_err(|e| e.to_string())
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse().map_err(|_| CliError::Usage(format!("{what}: '{s}' is not a number")))
}

/// A single value, a comma list, or `lo:hi:count` (linear).
fn parse_values(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(|v| parse_f64(v, what)).collect(),
        3 => {
            let lo = parse_f64(parts[0], what)?;
            let hi = parse_f64(parts[1], what)?;
            let count: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{what}: bad point count in '{s}'")))?;
            if count < 2 {
                return Err(CliError::Usage(format!("{what}: sweep needs at least 2 points")));
            }
            Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
        }
        _ => Err(CliError::Usage(format!("{what}: '{s}' is neither a list nor lo:hi:count"))),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if s == "default" {
        return Ok(default_u_grid());
    }
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let lo = parse_f64(parts[0], "grid")?;
        let hi = parse_f64(parts[1], "grid")?;
        let points: usize = parts[2].trim().parse().map_err(|_| CliError::Usage(format!("grid: bad point count in '{s}'")))?;
        if !(lo > 0.0 && hi > lo && points >= 2) {
            return Err(CliError::Usage(format!("grid '{s}' needs 0 < lo < hi and at least 2 points")));
        }
        log_grid(lo, hi, points)
    } else {
        parse_values(s, "grid")?
    };
    if grid.iter().any(|&u| !(u > 0.0)) {
        return Err(CliError::Usage("grid values must be positive".into()));
    }
    Ok(grid)
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_dist(path: &Path) -> Result<PhononDistribution, CliError> {
    let text = read_input(path)?;
    PhononDistribution::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_trace(path: &Path) -> Result<RabiTrace, CliError> {
    let text = read_input(path)?;
    RabiTrace::from_csv(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_state(spec: &str) -> Result<PhononDistribution, CliError> {
    let bad = || CliError::Usage(format!("state '{spec}': expected fock:N or thermal:NBAR"));
    let (kind, value) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "fock" => Ok(PhononDistribution::fock(value.trim().parse().map_err(|_| bad())?)),
        "thermal" => Ok(PhononDistribution::thermal(value.trim().parse().map_err(|_| bad())?)?),
        _ => Err(bad()),
    }
}

fn cache_path() -> PathBuf {
    let dir = std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("phonon-qng"));
    dir.join(CACHE_FILE)
}

/// Threshold table backed by the on-disk cache. An unreadable cache is ignored.
fn open_table(no_cache: bool) -> ThresholdTable {
    if no_cache {
        return ThresholdTable::new();
    }
    ThresholdTable::load(&cache_path()).unwrap_or_default()
}

fn close_table(table: &ThresholdTable, no_cache: bool) {
    if no_cache {
        return;
    }
    let path = cache_path();
    // merge with whatever another process wrote meanwhile
    if let Ok(disk) = ThresholdTable::load(&path) {
        for r in disk.records() {
            if table.get(r.n, r.criterion).is_none() {
                table.insert(r);
            }
        }
    }
    if let Err(e) = table.save(&path) {
        eprintln!("warning: could not update threshold cache {}: {e}", path.display());
    }
}

fn emit(out: &OutArgs, mut manifest: RunManifest, body: &str) -> Result<(), CliError> {
    match &out.out {
        None => {
            std::io::stdout().write_all(body.as_bytes()).map_err(Error::from)?;
        }
        Some(path) => {
            std::fs::write(path, body).map_err(Error::from)?;
            manifest.outputs.push(path.display().to_string());
            let text = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
            std::fs::write(manifest_path(path), text + "\n").map_err(Error::from)?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

fn thresholds(args: &ThresholdsArgs) -> Result<(), CliError> {
    let (a, b) = args.n;
    let table = open_table(args.no_cache);
    let criteria: &[Criterion] = match args.criterion {
        CriterionArg::Genuine => &[Criterion::Genuine],
        CriterionArg::Basic => &[Criterion::Basic],
        CriterionArg::Both => &[Criterion::Genuine, Criterion::Basic],
    };
    if args.criterion == CriterionArg::Both {
        table.fill(a..=b)?;
    }
    let mut records = Vec::new();
    for &c in criteria {
        for n in a..=b {
            records.push(table.get_or_compute(n, c)?);
        }
    }
    close_table(&table, args.no_cache);
    let mut m = RunManifest::new("thresholds");
    m.param("n", format!("{a}..{b}"));
    m.param("criterion", format!("{:?}", args.criterion).to_lowercase());
    emit(&args.out, m, &json(&records)?)
}

fn certify_cmd(args: &CertifyArgs) -> Result<(), CliError> {
    let dist = read_dist(&args.dist)?;
    let table = open_table(args.no_cache);
    let result = certify(&dist, args.n, &table)?;
    close_table(&table, args.no_cache);
    let mut m = RunManifest::new("certify");
    m.param("n", args.n);
    m.inputs.push(args.dist.display().to_string());
    emit(&args.out, m, &json(&result)?)
}

fn depth(args: &DepthArgs) -> Result<(), CliError> {
    let mut m = RunManifest::new("depth");
    let (dist, implied_n) = match (&args.state.state, &args.state.dist) {
        (Some(spec), _) => {
            m.param("state", spec);
            let n = spec.strip_prefix("fock:").and_then(|v| v.trim().parse().ok());
            (parse_state(spec)?, n)
        }
        (None, Some(path)) => {
            m.inputs.push(path.display().to_string());
            (read_dist(path)?, None)
        }
        (None, None) => return Err(CliError::Usage("give --state or --dist".into())),
    };
    let n = args
        .n
        .or(implied_n)
        .ok_or_else(|| CliError::Usage("--n is required unless the state is fock:N".into()))?;
    m.param("n", n);
    m.param("criterion", format!("{:?}", args.criterion));
    let report = match args.criterion {
        DepthCriterionArg::WignerNegativity => {
            m.param("retain", args.retain);
            negativity_depth_of(&dist, n, args.retain)?
        }
        DepthCriterionArg::Genuine | DepthCriterionArg::Basic => {
            let c = if args.criterion == DepthCriterionArg::Genuine { Criterion::Genuine } else { Criterion::Basic };
            let table = open_table(args.no_cache);
            let r = thermal_depth(&dist, n, c, &table)?;
            close_table(&table, args.no_cache);
            r
        }
    };
    emit(&args.out, m, &json(&report)?)
}

fn thermalize(args: &ThermalizeArgs) -> Result<(), CliError> {
    let dist = read_dist(&args.dist)?;
    let mut m = RunManifest::new("thermalize");
    m.inputs.push(args.dist.display().to_string());
    m.param("channel", format!("{:?}", args.channel));
    let nbars = match (&args.nbar, &args.tau) {
        (Some(s), _) => {
            m.param("nbar", s);
            parse_values(s, "nbar")?
        }
        (None, Some(s)) => {
            m.param("tau", s);
            s.split(',')
                .map(|t| parse_time(t).map_err(CliError::usage).and_then(|t| Ok(pulse_to_nbar(t)?)))
                .collect::<Result<Vec<_>, _>>()?
        }
        (None, None) => return Err(CliError::Usage("give --nbar or --tau".into())),
    };
    let outputs = match args.channel {
        ChannelArg::Gaussian => channel_sweep(&dist, &nbars)?,
        ChannelArg::FirstOrder => nbars.iter().map(|&e| lindblad_first_order(&dist, e)).collect::<Result<_, _>>()?,
    };
    let body = if outputs.len() == 1 { outputs[0].to_json()? + "\n" } else { sweep_csv(&nbars, &outputs) };
    emit(&args.out, m, &body)
}

fn sense(args: &SenseArgs) -> Result<(), CliError> {
    let dist = read_dist(&args.dist)?;
    let grid = parse_grid(&args.grid)?;
    let report = SensingReport::compute(&dist, &grid, args.shots)?;
    let mut m = RunManifest::new("sense");
    m.inputs.push(args.dist.display().to_string());
    m.param("grid", &args.grid);
    m.param("shots", args.shots);
    let body = match args.format {
        FormatArg::Csv => report.to_csv(),
        FormatArg::Json => report.to_json()? + "\n",
    };
    emit(&args.out, m, &body)
}

#[derive(Serialize)]
struct FitOutput {
    fit: crate::rabi::RabiFit,
    uncertainty: Option<crate::rabi::McUncertainty>,
}

fn fit(args: &FitArgs) -> Result<(), CliError> {
    let trace = read_trace(&args.trace)?;
    let cfg = args.rabi.config(trace.shots)?;
    let fit = fit_populations(&trace, &cfg, args.n_max)?;
    let uncertainty = match args.draws {
        0 => None,
        d => Some(mc_uncertainty(&trace, &cfg, args.n_max, d, args.seed)?),
    };
    let mut m = RunManifest::new("fit");
    m.inputs.push(args.trace.display().to_string());
    args.rabi.record(&mut m.parameters);
    m.param("n_max", args.n_max);
    m.param("draws", args.draws);
    m.seed = Some(args.seed);
    emit(&args.out, m, &json(&FitOutput { fit, uncertainty })?)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let rabi = args.rabi.config(args.shots)?;
    let cfg = PrepConfig {
        n_target: args.n_target,
        rabi,
        heating_rate: args.heating_rate,
        p0_init: args.p0,
        pulse_efficiency: args.efficiency,
        heating: match args.schedule {
            ScheduleArg::PerPulse => HeatingSchedule::PerPulse,
            ScheduleArg::EndOfSequence => HeatingSchedule::EndOfSequence,
        },
    };
    cfg.validate().map_err(CliError::usage)?;
    let dist = ladder_prepare(&cfg)?;
    let mut m = RunManifest::new("simulate");
    args.rabi.record(&mut m.parameters);
    m.param("n_target", args.n_target);
    m.param("heating_rate", format!("{}/s", args.heating_rate));
    m.param("p0", args.p0);
    m.param("efficiency", args.efficiency);
    m.param("schedule", format!("{:?}", args.schedule));
    m.param("sequence_duration_s", sequence_duration(&cfg));
    if let Some(path) = &args.trace {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let trace = synthetic_trace(&dist, &sampling_plan(args.n_target, &rabi), &rabi, &mut rng)?;
        std::fs::write(path, trace.to_csv()).map_err(Error::from)?;
        m.outputs.push(path.display().to_string());
        m.param("shots", args.shots);
        m.seed = Some(args.seed);
    }
    emit(&args.out, m, &(dist.to_json()? + "\n"))
}

fn wigner(args: &WignerArgs) -> Result<(), CliError> {
    let dist = read_dist(&args.dist)?;
    let radii = match args.s_max {
        None if args.samples == crate::wigner::DEFAULT_SAMPLES => default_radii(&dist),
        s_max => {
            let s_max = s_max.unwrap_or((2.0 * dist.truncation() as f64).sqrt() + 5.0);
            if !(s_max > 0.0) || args.samples < 2 {
                return Err(CliError::Usage("need s_max > 0 and at least 2 samples".into()));
            }
            uniform_radii(s_max, args.samples)
        }
    };
    let w = wigner_radial(&dist, &radii);
    let annuli = count_negative_annuli(&w)?;
    eprintln!("negative annuli: {annuli}; normalization {:.8}", w.normalization());
    let mut m = RunManifest::new("wigner");
    m.inputs.push(args.dist.display().to_string());
    m.param("samples", args.samples);
    m.param("s_max", radii.last().copied().unwrap_or(0.0));
    m.param("negative_annuli", annuli);
    emit(&args.out, m, &w.to_csv())
}

/// Executes a parsed command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Thresholds(a) => thresholds(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Depth(a) => depth(a),
        Command::Thermalize(a) => thermalize(a),
        Command::Sense(a) => sense(a),
        Command::Fit(a) => fit(a),
        Command::Simulate(a) => simulate(a),
        Command::Wigner(a) => wigner(a),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..6").unwrap(), (1, 6));
        assert_eq!(parse_range("1..=6").unwrap(), (1, 6));
        assert_eq!(parse_range("4").unwrap(), (4, 4));
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("5..2").is_err());
    }

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0:1:3", "x").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_values("0.1,0.2", "x").unwrap(), vec![0.1, 0.2]);
        assert!(parse_values("a", "x").is_err());
        assert_eq!(parse_grid("default").unwrap().len(), 60);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(manifest_path(Path::new("out/t.json")), PathBuf::from("out/t.json.manifest.json"));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
