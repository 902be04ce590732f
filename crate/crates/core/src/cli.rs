//! Command-line front end: config parsing, subcommands and CSV output.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Powers
//! carry an explicit unit (`-10 dB`, `0.1 lin`), angles carry `deg` or `rad`.
//!
//! ```text
//! mode = multipath
//! antennas = 32
//! paths = 3
//! pilot_len = 3
//! data_len = 97
//! pilot_snr = -10 dB
//! data_snr = -10 dB
//! noise_var = 1 lin
//! trials = 2000
//! seed = 7
//! angles = -30 deg, 0 deg, 30 deg
//! sweep_axis = pd
//! sweep_values = -30 dB, -20 dB, -10 dB, 0 dB
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::array::{AnglePolicy, GainModel, PilotKind};
use crate::sim::{
    draw_trial, run_sweep, run_trial, run_trials, snr_cdfs, AngleStage, ExperimentSpec, Mode,
    SnrCdfs, Sweep, SweepAxis, SweepResult,
};
use crate::subspace::{
    bartlett_spectrum, find_peaks, forward_backward_smooth, music_spectrum, sample_covariance,
    subarray_covariances, SubarrayPlan,
};
use crate::{linear_to_db, Error, Result};

pub const SWEEP_HEADER: [&str; 13] = [
    "sweep_value",
    "e_cp_sim",
    "e_cp_theory",
    "e_lp_sim",
    "e_lp_theory",
    "nrmse_cp",
    "nrmse_lp",
    "gamma_cp_sim_db",
    "gamma_cp_approx_db",
    "gamma_lp_sim_db",
    "gamma_upper_db",
    "failure_rate",
    "trials",
];

/// Exit status when a run completes but some point failed too often.
pub const EXIT_FAILURE_CEILING: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "chanest",
    version,
    about = "Pilot LS vs subspace-aided channel estimation simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep one parameter and tabulate errors and SNRs against theory.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// One of m, pt, pd, rho.
        #[arg(long)]
        axis: Option<String>,
    },
    /// Receive-SNR distribution of both estimators.
    Cdf {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bartlett and MUSIC spectra of a single realization.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// los or multipath.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub oracle_angles: bool,
    /// Worker threads for trials (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Parsed configuration file plus run-level settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ExperimentSpec,
    pub output_dir: Option<PathBuf>,
    pub verbosity: u8,
    pub threads: Option<usize>,
    pub max_failure_rate: f64,
    paths_set: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: ExperimentSpec::preset(),
            output_dir: None,
            verbosity: 1,
            threads: None,
            max_failure_rate: 0.05,
            paths_set: false,
        }
    }
}

const KEYS: &[&str] = &[
    "mode",
    "antennas",
    "paths",
    "pilot_len",
    "data_len",
    "pilot_snr",
    "data_snr",
    "noise_var",
    "trials",
    "seed",
    "angle_stage",
    "angles",
    "angle_range",
    "min_separation",
    "gain_model",
    "pilot",
    "path_block",
    "subarrays",
    "grid_range",
    "grid_step",
    "refine_peaks",
    "sweep_axis",
    "sweep_values",
    "joint_power",
    "max_failure_rate",
    "output_dir",
    "verbosity",
    "threads",
];

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn split_unit(s: &str) -> (f64, String) {
    let s = s.trim();
    let cut = s
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(s.len());
    // "1e-3 lin": the exponent marker is numeric, units start after the number
    let (num, unit) = s.split_at(cut);
    (
        num.trim().parse().unwrap_or(f64::NAN),
        unit.trim().to_ascii_lowercase(),
    )
}

/// Power ratio with explicit unit, returned in dB.
pub fn parse_power_db(s: &str) -> Result<f64> {
    let (v, unit) = split_unit(s);
    if v.is_nan() {
        return Err(Error::Config(format!("'{s}' is not a number")));
    }
    match unit.as_str() {
        "db" => Ok(v),
        "lin" => {
            if v > 0.0 {
                Ok(linear_to_db(v))
            } else {
                Err(Error::Config(format!(
                    "linear power must be positive, got '{s}'"
                )))
            }
        }
        "" => Err(Error::Config(format!(
            "'{s}' needs a unit suffix (dB or lin)"
        ))),
        other => Err(Error::Config(format!(
            "unknown power unit '{other}' in '{s}'"
        ))),
    }
}

/// Power with explicit unit, returned in linear scale (zero allowed as `0 lin`).
pub fn parse_power_linear(s: &str) -> Result<f64> {
    let (v, unit) = split_unit(s);
    if unit == "lin" && v == 0.0 {
        return Ok(0.0);
    }
    parse_power_db(s).map(crate::db_to_linear)
}

/// Angle with `deg` or `rad` suffix, returned in radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    let (v, unit) = split_unit(s);
    if v.is_nan() {
        return Err(Error::Config(format!("'{s}' is not a number")));
    }
    match unit.as_str() {
        "deg" => Ok(v.to_radians()),
        "rad" => Ok(v),
        "" => Err(Error::Config(format!(
            "'{s}' needs a unit suffix (deg or rad)"
        ))),
        other => Err(Error::Config(format!(
            "unknown angle unit '{other}' in '{s}'"
        ))),
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').map(|x| f(x.trim())).collect()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{s}' is not a valid number")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("'{s}' is not a boolean"))),
    }
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s.trim().to_ascii_lowercase().as_str() {
        "los" => Ok(Mode::Los),
        "multipath" => Ok(Mode::Multipath),
        other => Err(Error::Config(format!(
            "unknown mode '{other}', expected los or multipath"
        ))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        let mut angle_range: Option<(f64, f64)> = None;
        let mut min_sep: Option<f64> = None;
        let mut fixed: Option<Vec<f64>> = None;
        let mut axis: Option<SweepAxis> = None;
        let mut raw_values: Option<(usize, String)> = None;
        let mut joint = true;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(line_no, "expected 'key = value'"))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if !KEYS.contains(&key.as_str()) {
                return Err(cfg_err(line_no, format!("unknown key '{key}'")));
            }
            if !seen.insert(key.clone()) {
                return Err(cfg_err(line_no, format!("duplicate key '{key}'")));
            }
            let s = &mut cfg.spec;
            let r: Result<()> = (|| {
                match key.as_str() {
                    "mode" => s.mode = parse_mode(value)?,
                    "antennas" => s.num_antennas = parse_num(value)?,
                    "paths" => {
                        s.num_paths = parse_num(value)?;
                        cfg.paths_set = true;
                    }
                    "pilot_len" => s.pilot_len = parse_num(value)?,
                    "data_len" => s.data_len = parse_num(value)?,
                    "pilot_snr" => s.pilot_snr_db = parse_power_db(value)?,
                    "data_snr" => s.data_snr_db = parse_power_db(value)?,
                    "noise_var" => s.noise_var = parse_power_linear(value)?,
                    "trials" => s.num_trials = parse_num(value)?,
                    "seed" => s.base_seed = parse_num(value)?,
                    "angle_stage" => {
                        s.angle_stage = match value.to_ascii_lowercase().as_str() {
                            "estimated" => AngleStage::Estimated,
                            "oracle" => AngleStage::Oracle,
                            other => {
                                return Err(Error::Config(format!("unknown angle_stage '{other}'")))
                            }
                        }
                    }
                    "angles" => fixed = Some(parse_list(value, parse_angle)?),
                    "angle_range" => {
                        let v = parse_list(value, parse_angle)?;
                        if v.len() != 2 {
                            return Err(Error::Config("angle_range needs two angles".into()));
                        }
                        angle_range = Some((v[0], v[1]));
                    }
                    "min_separation" => min_sep = Some(parse_angle(value)?),
                    "gain_model" => {
                        s.gain_model = match value.to_ascii_lowercase().as_str() {
                            "rayleigh" => GainModel::Rayleigh,
                            "unit" => GainModel::UnitModulus,
                            other => {
                                return Err(Error::Config(format!("unknown gain_model '{other}'")))
                            }
                        }
                    }
                    "pilot" => {
                        s.pilot_kind = match value.to_ascii_lowercase().as_str() {
                            "ones" => PilotKind::Ones,
                            "random" => PilotKind::RandomPhase,
                            other => return Err(Error::Config(format!("unknown pilot '{other}'"))),
                        }
                    }
                    "path_block" => s.path_block_len = parse_num(value)?,
                    "subarrays" => s.num_subarrays = Some(parse_num(value)?),
                    "grid_range" => {
                        let v = parse_list(value, parse_angle)?;
                        if v.len() != 2 {
                            return Err(Error::Config("grid_range needs two angles".into()));
                        }
                        s.grid.low_deg = v[0].to_degrees();
                        s.grid.high_deg = v[1].to_degrees();
                    }
                    "grid_step" => s.grid.step_deg = parse_angle(value)?.to_degrees(),
                    "refine_peaks" => s.refine_peaks = parse_bool(value)?,
                    "sweep_axis" => axis = Some(SweepAxis::parse(value)?),
                    "sweep_values" => raw_values = Some((line_no, value.to_string())),
                    "joint_power" => joint = parse_bool(value)?,
                    "max_failure_rate" => cfg.max_failure_rate = parse_num(value)?,
                    "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                    "verbosity" => cfg.verbosity = parse_num(value)?,
                    "threads" => cfg.threads = Some(parse_num(value)?),
                    _ => unreachable!("key list checked above"),
                }
                Ok(())
            })();
            r.map_err(|e| match e {
                Error::Config(m) => cfg_err(line_no, m),
                other => cfg_err(line_no, other),
            })?;
        }

        if let Some(angles) = fixed {
            if angle_range.is_some() || min_sep.is_some() {
                return Err(Error::Config(
                    "'angles' cannot be combined with angle_range/min_separation".into(),
                ));
            }
            if !cfg.paths_set {
                cfg.spec.num_paths = angles.len();
                cfg.paths_set = true;
            }
            cfg.spec.angle_policy = AnglePolicy::Fixed(angles);
        } else if angle_range.is_some() || min_sep.is_some() {
            let AnglePolicy::Uniform {
                low,
                high,
                min_separation,
            } = AnglePolicy::default()
            else {
                unreachable!()
            };
            let (low, high) = angle_range.unwrap_or((low, high));
            cfg.spec.angle_policy = AnglePolicy::Uniform {
                low,
                high,
                min_separation: min_sep.unwrap_or(min_separation),
            };
        }

        if let Some((line_no, text)) = raw_values {
            let axis = axis.ok_or_else(|| cfg_err(line_no, "sweep_values needs sweep_axis"))?;
            let values = parse_sweep_values(axis, &text).map_err(|e| cfg_err(line_no, e))?;
            cfg.spec.sweep = Some(Sweep {
                axis,
                values,
                joint_power: joint,
            });
        } else if let Some(axis) = axis {
            cfg.spec.sweep = Some(Sweep {
                axis,
                values: axis.default_values(),
                joint_power: joint,
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies command-line overrides, then validates.
    pub fn with_overrides(mut self, args: &CommonArgs) -> Result<Self> {
        if let Some(seed) = args.seed {
            self.spec.base_seed = seed;
        }
        if let Some(n) = args.trials {
            self.spec.num_trials = n;
        }
        if let Some(m) = &args.mode {
            self.spec.mode = parse_mode(m)?;
        }
        if args.oracle_angles {
            self.spec.angle_stage = AngleStage::Oracle;
        }
        if let Some(t) = args.threads {
            self.threads = Some(t);
        }
        self.finish()
    }

    fn finish(mut self) -> Result<Self> {
        if self.spec.mode == Mode::Los && !self.paths_set {
            self.spec.num_paths = 1;
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::Config("max_failure_rate must lie in [0, 1]".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.spec.validate()?;
        Ok(self)
    }

    fn output_path(&self, explicit: Option<&Path>, default_name: &str) -> PathBuf {
        match explicit {
            Some(p) => p.to_path_buf(),
            None => self
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("out"))
                .join(default_name),
        }
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
        match self.threads {
            None => f(),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?
                .install(f),
        }
    }
}

fn parse_sweep_values(axis: SweepAxis, text: &str) -> Result<Vec<f64>> {
    match axis {
        SweepAxis::PilotSnr | SweepAxis::DataSnr => parse_list(text, parse_power_db),
        SweepAxis::Antennas | SweepAxis::PilotLen => {
            parse_list(text, |s| parse_num::<usize>(s).map(|v| v as f64))
        }
    }
}

/// Formats with 12 significant digits, shortest round-trip text.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded:?}")
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = SWEEP_HEADER.join(",");
    out.push('\n');
    for p in &result.points {
        let cols = [
            p.value,
            p.e_cp_sim,
            p.e_cp_theory,
            p.e_lp_sim,
            p.e_lp_theory,
            p.nrmse_cp,
            p.nrmse_lp,
            p.gamma_cp_sim_db(),
            p.gamma_cp_approx_db(),
            p.gamma_lp_sim_db(),
            p.gamma_upper_db(),
            p.failure_rate,
        ];
        let row: Vec<String> = cols.iter().map(|&v| fmt_num(v)).collect();
        let _ = writeln!(out, "{},{}", row.join(","), p.trials);
    }
    out
}

/// One parsed row of a sweep CSV, columns in header order.
pub type SweepRow = [f64; 13];

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Empty("sweep csv"))?;
    if header != SWEEP_HEADER.join(",") {
        return Err(Error::Config(format!("unexpected header '{header}'")));
    }
    lines
        .map(|l| {
            let cells: Vec<f64> = l.split(',').map(parse_num).collect::<Result<_>>()?;
            cells
                .try_into()
                .map_err(|c: Vec<f64>| Error::Config(format!("row has {} columns", c.len())))
        })
        .collect()
}

pub fn cdf_csv(cdfs: &SnrCdfs) -> String {
    let mut out = String::from("method,snr_db,cdf\n");
    for (name, series) in [("conventional", &cdfs.conventional), ("issac", &cdfs.issac)] {
        for (v, p) in series.values.iter().zip(&series.probabilities) {
            let _ = writeln!(out, "{name},{},{}", fmt_num(*v), fmt_num(*p));
        }
    }
    out
}

pub fn percentile_csv(cdfs: &SnrCdfs) -> String {
    let mut out = String::from("method,p10_db,p50_db,p90_db,samples\n");
    for (name, s) in [("conventional", &cdfs.conventional), ("issac", &cdfs.issac)] {
        let _ = writeln!(
            out,
            "{name},{},{},{},{}",
            fmt_num(s.p10),
            fmt_num(s.p50),
            fmt_num(s.p90),
            s.values.len()
        );
    }
    out
}

/// Result of a subcommand: where it wrote and whether the failure ceiling held.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub output: PathBuf,
    pub failure_rate: f64,
    pub summary: String,
}

impl CommandOutcome {
    pub fn exit_code(&self, cfg: &RunConfig) -> i32 {
        if self.failure_rate > cfg.max_failure_rate {
            EXIT_FAILURE_CEILING
        } else {
            0
        }
    }
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    axis: Option<&str>,
    out: Option<&Path>,
) -> Result<CommandOutcome> {
    let mut spec = cfg.spec.clone();
    match (axis, spec.sweep.as_mut()) {
        (Some(a), Some(sw)) => {
            let a = SweepAxis::parse(a)?;
            if a != sw.axis {
                sw.axis = a;
                sw.values = a.default_values();
            }
        }
        (Some(a), None) => {
            let a = SweepAxis::parse(a)?;
            spec.sweep = Some(Sweep {
                axis: a,
                values: a.default_values(),
                joint_power: true,
            });
        }
        (None, Some(_)) => {}
        (None, None) => {
            return Err(Error::Config(format!(
                "no sweep axis given; use --axis or sweep_axis with one of: {}",
                SweepAxis::NAMES.join(", ")
            )))
        }
    }
    let result = cfg.in_pool(|| run_sweep(&spec))?;
    let path = cfg.output_path(out, "sweep.csv");
    create_parent(&path)?;
    fs::write(&path, sweep_csv(&result))?;
    let mut summary = String::new();
    for p in &result.points {
        let _ = writeln!(
            summary,
            "{}={}: e_cp {:.4} (theory {:.4})  e_lp {:.4} (theory {:.4})  gamma_cp {:.2} dB  gamma_lp {:.2} dB  failures {}/{}",
            result.axis.name(),
            p.value,
            p.e_cp_sim,
            p.e_cp_theory,
            p.e_lp_sim,
            p.e_lp_theory,
            p.gamma_cp_sim_db(),
            p.gamma_lp_sim_db(),
            p.failures,
            p.trials
        );
    }
    Ok(CommandOutcome {
        output: path,
        failure_rate: result.max_failure_rate(),
        summary,
    })
}

pub fn cmd_cdf(cfg: &RunConfig, out: Option<&Path>) -> Result<CommandOutcome> {
    let trials = cfg.in_pool(|| run_trials(&cfg.spec))?;
    let cdfs = snr_cdfs(&trials)?;
    let path = cfg.output_path(out, "cdf.csv");
    create_parent(&path)?;
    fs::write(&path, cdf_csv(&cdfs))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cdf");
    fs::write(
        path.with_file_name(format!("{stem}_percentiles.csv")),
        percentile_csv(&cdfs),
    )?;
    Ok(CommandOutcome {
        output: path,
        failure_rate: cdfs.failures as f64 / cdfs.trials as f64,
        summary: format!(
            "90th percentile receive SNR: conventional {:.3} dB, issac {:.3} dB ({} of {} trials failed)\n",
            cdfs.conventional.p90, cdfs.issac.p90, cdfs.failures, cdfs.trials
        ),
    })
}

/// Spectra of trial 0 of the configured experiment.
pub fn cmd_spectrum(cfg: &RunConfig, out: Option<&Path>) -> Result<CommandOutcome> {
    let spec = &cfg.spec;
    let trial = run_trial(spec, 0)?;
    let (_, block) = draw_trial(spec, 0)?;
    let grid = spec.grid.angles()?;
    let bartlett = bartlett_spectrum(&sample_covariance(&block)?, &grid)?;
    let music = match spec.mode {
        Mode::Los => None,
        Mode::Multipath => {
            let plan = match spec.num_subarrays {
                Some(p) => SubarrayPlan::new(spec.num_antennas, p)?,
                None => SubarrayPlan::for_sources(spec.num_antennas, spec.num_paths)?,
            };
            let fb = forward_backward_smooth(&subarray_covariances(&block, &plan)?)?;
            Some(music_spectrum(&fb, spec.num_paths, &grid)?)
        }
    };
    let mut csv = String::from(if music.is_some() {
        "angle_deg,bartlett,music\n"
    } else {
        "angle_deg,bartlett\n"
    });
    for (i, theta) in grid.iter().enumerate() {
        let _ = write!(
            csv,
            "{},{}",
            fmt_num(theta.to_degrees()),
            fmt_num(bartlett.values[i])
        );
        if let Some(m) = &music {
            let _ = write!(csv, ",{}", fmt_num(m.values[i]));
        }
        csv.push('\n');
    }
    let path = cfg.output_path(out, "spectrum.csv");
    create_parent(&path)?;
    fs::write(&path, csv)?;

    let deg = |v: &[f64]| {
        v.iter()
            .map(|a| format!("{:.3}", a.to_degrees()))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let peaks = find_peaks(
        music.as_ref().unwrap_or(&bartlett),
        spec.num_paths,
        spec.refine_peaks,
    )
    .map(|e| deg(&e.angles))
    .unwrap_or_else(|e| format!("none ({e})"));
    Ok(CommandOutcome {
        output: path,
        failure_rate: if trial.failed() { 1.0 } else { 0.0 },
        summary: format!(
            "true angles [{}] deg; spectral peaks [{}] deg\n",
            deg(&trial.true_angles),
            peaks
        ),
    })
}

/// Runs a parsed command line; returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let (common, axis) = match &cli.command {
        Command::Sweep { common, axis } => (common, axis.as_deref()),
        Command::Cdf { common } | Command::Spectrum { common } => (common, None),
    };
    let base = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.with_overrides(common)?;
    let out = common.out.as_deref();
    let outcome = match &cli.command {
        Command::Sweep { .. } => cmd_sweep(&cfg, axis, out)?,
        Command::Cdf { .. } => cmd_cdf(&cfg, out)?,
        Command::Spectrum { .. } => cmd_spectrum(&cfg, out)?,
    };
    if cfg.verbosity > 0 {
        print!("{}", outcome.summary);
        println!("wrote {}", outcome.output.display());
    }
    let code = outcome.exit_code(&cfg);
    if code != 0 {
        eprintln!(
            "failure rate {:.3} exceeds ceiling {:.3}",
            outcome.failure_rate, cfg.max_failure_rate
        );
    }
    Ok(code)
}
