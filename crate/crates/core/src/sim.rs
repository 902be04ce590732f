//! Paired Monte Carlo trials, parameter sweeps and SNR distributions.
//!
//! Each trial draws one channel and one received block and runs both
//! estimators on that same block. Trial `i` of a run is fully determined by
//! `(base_seed, i)`: it reads a ChaCha8 stream selected by its index, so
//! results do not depend on how trials are scheduled across threads, and
//! aggregates are reduced in trial order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::array::{
    generate_pilot_sequence, sample_angles, sample_gains, simulate_reception, AnglePolicy,
    GainModel, PathSet, PilotKind, ReceivedBlock, TransmissionConfig, UlaGeometry,
};
use crate::estimators::{
    empirical_snr, estimate_gain_los, estimate_gains_multipath, los_beam_snr, ls_conventional,
    mrc_beamformer, pilot_snr, snr_cp_approx, ClosedFormPredictions, LinkParams,
};
use crate::subspace::{
    bartlett_spectrum, find_peaks, forward_backward_smooth, music_spectrum, sample_covariance,
    subarray_covariances, GridSpec, SubarrayPlan,
};
use crate::{linear_to_db, CVector, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Single path, Bartlett angle search.
    Los,
    /// `L` coherent paths, spatial smoothing plus MUSIC.
    Multipath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleStage {
    Estimated,
    /// Hand the true angles to the gain stage.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Antennas,
    PilotSnr,
    DataSnr,
    PilotLen,
}

impl SweepAxis {
    pub const NAMES: [&'static str; 4] = ["m", "pt", "pd", "rho"];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(SweepAxis::Antennas),
            "pt" => Ok(SweepAxis::PilotSnr),
            "pd" => Ok(SweepAxis::DataSnr),
            "rho" => Ok(SweepAxis::PilotLen),
            other => Err(Error::Config(format!(
                "unknown sweep axis '{other}', expected one of: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Antennas => "m",
            SweepAxis::PilotSnr => "pt",
            SweepAxis::DataSnr => "pd",
            SweepAxis::PilotLen => "rho",
        }
    }

    /// Default sweep points; SNR axes in dB.
    pub fn default_values(&self) -> Vec<f64> {
        match self {
            SweepAxis::Antennas => vec![8.0, 16.0, 32.0, 64.0],
            SweepAxis::PilotSnr => (0..=10).map(|k| -20.0 + 2.0 * k as f64).collect(),
            SweepAxis::DataSnr => (0..=7).map(|k| -30.0 + 5.0 * k as f64).collect(),
            SweepAxis::PilotLen => vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// On the data-SNR axis, move the pilot SNR along with it.
    pub joint_power: bool,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub num_antennas: usize,
    pub num_paths: usize,
    pub angle_policy: AnglePolicy,
    pub gain_model: GainModel,
    pub pilot_kind: PilotKind,
    pub pilot_len: usize,
    pub data_len: usize,
    /// `10 log10(P_t / noise_var)`; relative to unit power when `noise_var == 0`.
    pub pilot_snr_db: f64,
    pub data_snr_db: f64,
    pub noise_var: f64,
    pub num_trials: usize,
    pub base_seed: u64,
    pub mode: Mode,
    pub angle_stage: AngleStage,
    pub grid: GridSpec,
    pub refine_peaks: bool,
    /// Subarray count for smoothing; `None` picks `ceil(L/2) + 1`.
    pub num_subarrays: Option<usize>,
    /// Trials sharing one angle draw (gains are redrawn every trial).
    pub path_block_len: usize,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self::preset()
    }
}

impl ExperimentSpec {
    /// M = 32, L = 3, rho = 3, transmit SNRs -10 dB, 100 snapshots per block.
    pub fn preset() -> Self {
        Self {
            num_antennas: 32,
            num_paths: 3,
            angle_policy: AnglePolicy::default(),
            gain_model: GainModel::Rayleigh,
            pilot_kind: PilotKind::Ones,
            pilot_len: 3,
            data_len: 97,
            pilot_snr_db: -10.0,
            data_snr_db: -10.0,
            noise_var: 1.0,
            num_trials: 2000,
            base_seed: 0,
            mode: Mode::Multipath,
            angle_stage: AngleStage::Estimated,
            grid: GridSpec::default(),
            refine_peaks: true,
            num_subarrays: None,
            path_block_len: 1,
            sweep: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.num_paths == 0 {
            return Err(Error::Config("paths must be at least 1".into()));
        }
        if self.mode == Mode::Los && self.num_paths != 1 {
            return Err(Error::Config(format!(
                "los mode needs exactly one path, got {}",
                self.num_paths
            )));
        }
        if self.pilot_len == 0 {
            return Err(Error::Config("pilot_len must be at least 1".into()));
        }
        if self.path_block_len == 0 {
            return Err(Error::Config("path_block must be at least 1".into()));
        }
        if self.num_paths > self.num_antennas {
            return Err(Error::Config(format!(
                "{} paths exceed {} antennas",
                self.num_paths, self.num_antennas
            )));
        }
        if let AnglePolicy::Fixed(a) = &self.angle_policy {
            if a.len() != self.num_paths {
                return Err(Error::Config(format!(
                    "{} fixed angles for {} paths",
                    a.len(),
                    self.num_paths
                )));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(Error::Config("sweep needs at least one value".into()));
            }
        }
        self.transmission()?;
        UlaGeometry::new(self.num_antennas)?;
        if self.angle_stage == AngleStage::Estimated {
            self.grid.angles()?;
            if self.mode == Mode::Multipath {
                self.subarray_plan()?;
            }
        }
        Ok(())
    }

    pub fn transmission(&self) -> Result<TransmissionConfig> {
        let reference = if self.noise_var > 0.0 {
            self.noise_var
        } else {
            1.0
        };
        let cfg = TransmissionConfig {
            pilot_len: self.pilot_len,
            data_len: self.data_len,
            pilot_power: crate::db_to_linear(self.pilot_snr_db) * reference,
            data_power: crate::db_to_linear(self.data_snr_db) * reference,
            noise_var: self.noise_var,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        let tx = self.transmission()?;
        Ok(LinkParams {
            num_antennas: self.num_antennas,
            num_paths: self.num_paths,
            pilot_len: self.pilot_len,
            pilot_power: tx.pilot_power,
            data_power: tx.data_power,
            noise_var: tx.noise_var,
        })
    }

    fn subarray_plan(&self) -> Result<SubarrayPlan> {
        let plan = match self.num_subarrays {
            Some(p) => SubarrayPlan::new(self.num_antennas, p)?,
            None => SubarrayPlan::for_sources(self.num_antennas, self.num_paths)?,
        };
        plan.check_supports(self.num_paths)?;
        Ok(plan)
    }

    /// Copy of this spec moved to one point of a sweep.
    pub fn at_sweep_point(&self, axis: SweepAxis, value: f64, joint_power: bool) -> Result<Self> {
        let mut s = self.clone();
        s.sweep = None;
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!(
                    "sweep value {v} is not a positive integer"
                )))
            }
        };
        match axis {
            SweepAxis::Antennas => s.num_antennas = as_count(value)?,
            SweepAxis::PilotLen => s.pilot_len = as_count(value)?,
            SweepAxis::PilotSnr => s.pilot_snr_db = value,
            SweepAxis::DataSnr => {
                s.data_snr_db = value;
                if joint_power {
                    s.pilot_snr_db = value;
                }
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOutcome {
    /// `||h_hat - h||^2`.
    pub sq_error: f64,
    /// Realized `P_d |v^H h|^2 / noise_var`.
    pub snr: f64,
    /// `|v^H h|^2 / ||h||^2`, in `[0, 1]`.
    pub beam_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_index: usize,
    pub h_norm_sq: f64,
    pub true_angles: Vec<f64>,
    pub estimated_angles: Option<Vec<f64>>,
    /// Absolute errors after sorted pairing, radians.
    pub angle_errors: Option<Vec<f64>>,
    pub conventional: Option<MethodOutcome>,
    pub issac: Option<MethodOutcome>,
    /// `P_d ||h||^2 / noise_var`.
    pub snr_upper: f64,
    pub gamma_cp_approx: f64,
    /// Beam-mismatch SNR for a single path, the upper bound otherwise.
    pub gamma_lp_theory: f64,
    pub failure: Option<String>,
}

impl TrialResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Per-run state shared by all trials of one parameter point.
struct TrialContext<'a> {
    spec: &'a ExperimentSpec,
    geom: UlaGeometry,
    tx: TransmissionConfig,
    grid: Vec<f64>,
    plan: Option<SubarrayPlan>,
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl<'a> TrialContext<'a> {
    fn new(spec: &'a ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let estimated = spec.angle_stage == AngleStage::Estimated;
        Ok(Self {
            spec,
            geom: UlaGeometry::new(spec.num_antennas)?,
            tx: spec.transmission()?,
            grid: if estimated {
                spec.grid.angles()?
            } else {
                Vec::new()
            },
            plan: if estimated && spec.mode == Mode::Multipath {
                Some(spec.subarray_plan()?)
            } else {
                None
            },
        })
    }

    fn estimate_angles(&self, block: &ReceivedBlock) -> Result<Vec<f64>> {
        let spec = self.spec;
        let spectrum = match self.plan {
            None => bartlett_spectrum(&sample_covariance(block)?, &self.grid)?,
            Some(plan) => {
                let fb = forward_backward_smooth(&subarray_covariances(block, &plan)?)?;
                music_spectrum(&fb, spec.num_paths, &self.grid)?
            }
        };
        Ok(find_peaks(&spectrum, spec.num_paths, spec.refine_peaks)?.angles)
    }

    fn draw(&self, trial_index: usize) -> Result<(PathSet, CVector, ReceivedBlock)> {
        let spec = self.spec;
        let block_index = (trial_index / spec.path_block_len) as u64;
        let angles = sample_angles(
            spec.num_paths,
            &mut trial_rng(spec.base_seed, 2 * block_index + 1),
            &spec.angle_policy,
        )?;
        let mut rng = trial_rng(spec.base_seed, 2 * trial_index as u64);
        let gains = sample_gains(spec.num_paths, &mut rng, spec.gain_model);
        let paths = PathSet::new(angles, gains)?;
        let h = paths.synthesize_channel(&self.geom);
        let phi = generate_pilot_sequence(spec.pilot_len, spec.pilot_kind, &mut rng)?;
        let block = simulate_reception(&h, &self.tx, &phi, &mut rng)?;
        Ok((paths, h, block))
    }

    fn run(&self, trial_index: usize) -> Result<TrialResult> {
        let spec = self.spec;
        let (paths, h, block) = self.draw(trial_index)?;

        let h_norm_sq = h.norm_squared();
        let tx = &self.tx;
        let snr_upper = tx.data_power * h_norm_sq / tx.noise_var;
        let snr_t = pilot_snr(tx.pilot_power, h_norm_sq, spec.num_antennas, tx.noise_var);
        let (gamma_cp_approx, _) = snr_cp_approx(
            spec.num_antennas,
            spec.pilot_len,
            snr_t,
            tx.data_power,
            h_norm_sq,
            tx.noise_var,
        );

        let mut result = TrialResult {
            trial_index,
            h_norm_sq,
            true_angles: paths.angles().to_vec(),
            estimated_angles: None,
            angle_errors: None,
            conventional: None,
            issac: None,
            snr_upper,
            gamma_cp_approx,
            gamma_lp_theory: snr_upper,
            failure: None,
        };
        let mut failures = Vec::new();

        let outcome = |h_hat: &crate::estimators::ChannelEstimate| -> Result<MethodOutcome> {
            let v = mrc_beamformer(h_hat)?;
            Ok(score(&v, &h, &h_hat.h_hat, tx))
        };

        match ls_conventional(&block, tx.pilot_power).and_then(|e| outcome(&e)) {
            Ok(o) => result.conventional = Some(o),
            Err(e) => failures.push(format!("conventional: {e}")),
        }

        let angles = match spec.angle_stage {
            AngleStage::Oracle => Ok(paths.angles().to_vec()),
            AngleStage::Estimated => self.estimate_angles(&block),
        };
        let issac = angles.and_then(|est| {
            result.angle_errors = Some(match_angles(&est, paths.angles())?);
            result.estimated_angles = Some(est.clone());
            let estimate = match spec.mode {
                Mode::Los => {
                    result.gamma_lp_theory = los_beam_snr(
                        est[0],
                        paths.angles()[0],
                        tx.data_power,
                        h_norm_sq,
                        tx.noise_var,
                        spec.num_antennas,
                    )?;
                    estimate_gain_los(&block, est[0], tx.pilot_power)?.1
                }
                Mode::Multipath => estimate_gains_multipath(&block, &est, tx.pilot_power)?.1,
            };
            outcome(&estimate)
        });
        match issac {
            Ok(o) => result.issac = Some(o),
            Err(e) => failures.push(format!("issac: {e}")),
        }

        if !failures.is_empty() {
            result.failure = Some(failures.join("; "));
        }
        Ok(result)
    }
}

fn score(v: &CVector, h: &CVector, h_hat: &CVector, tx: &TransmissionConfig) -> MethodOutcome {
    let gain = v.dotc(h).norm_sqr();
    let hn = h.norm_squared();
    MethodOutcome {
        sq_error: (h_hat - h).norm_squared(),
        snr: empirical_snr(v, h, tx.data_power, tx.noise_var),
        beam_efficiency: if hn > 0.0 { gain / hn } else { 0.0 },
    }
}

/// Runs trial `trial_index` of `spec`.
pub fn run_trial(spec: &ExperimentSpec, trial_index: usize) -> Result<TrialResult> {
    TrialContext::new(spec)?.run(trial_index)
}

/// Paths, channel and received block of trial `trial_index`, as `run_trial` sees them.
pub fn draw_trial(spec: &ExperimentSpec, trial_index: usize) -> Result<(PathSet, ReceivedBlock)> {
    let (paths, _, block) = TrialContext::new(spec)?.draw(trial_index)?;
    Ok((paths, block))
}

/// Runs all `spec.num_trials` trials (in parallel), ordered by trial index.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<TrialResult>> {
    let ctx = TrialContext::new(spec)?;
    (0..spec.num_trials)
        .into_par_iter()
        .map(|i| ctx.run(i))
        .collect()
}

/// Pairs sorted estimates with sorted truths and returns absolute differences.
pub fn match_angles(estimated: &[f64], truth: &[f64]) -> Result<Vec<f64>> {
    if estimated.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimated angles for {} paths",
            estimated.len(),
            truth.len()
        )));
    }
    let mut e = estimated.to_vec();
    let mut t = truth.to_vec();
    e.sort_by(f64::total_cmp);
    t.sort_by(f64::total_cmp);
    Ok(e.iter().zip(&t).map(|(a, b)| (a - b).abs()).collect())
}

/// `sqrt(mean sq_error) / sqrt(mean ||h||^2)`.
pub fn nrmse(sq_errors: &[f64], h_norms_sq: &[f64]) -> Result<f64> {
    if sq_errors.is_empty() || h_norms_sq.is_empty() {
        return Err(Error::Empty("nrmse input"));
    }
    if sq_errors.len() != h_norms_sq.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} errors, {} channel norms",
            sq_errors.len(),
            h_norms_sq.len()
        )));
    }
    Ok((mean(sq_errors) / mean(h_norms_sq)).sqrt())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Aggregates of one sweep point. Means run over non-failed trials only.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub e_cp_sim: f64,
    pub e_cp_theory: f64,
    pub e_lp_sim: f64,
    pub e_lp_theory: f64,
    pub nrmse_cp: f64,
    pub nrmse_lp: f64,
    /// Linear SNRs.
    pub gamma_cp_sim: f64,
    pub gamma_cp_approx: f64,
    pub gamma_lp_sim: f64,
    pub gamma_lp_theory: f64,
    pub gamma_upper: f64,
    pub mean_angle_error_deg: Option<f64>,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
}

impl SweepPoint {
    pub fn gamma_cp_sim_db(&self) -> f64 {
        linear_to_db(self.gamma_cp_sim)
    }
    pub fn gamma_cp_approx_db(&self) -> f64 {
        linear_to_db(self.gamma_cp_approx)
    }
    pub fn gamma_lp_sim_db(&self) -> f64 {
        linear_to_db(self.gamma_lp_sim)
    }
    pub fn gamma_upper_db(&self) -> f64 {
        linear_to_db(self.gamma_upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn max_failure_rate(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.failure_rate)
            .fold(0.0, f64::max)
    }
}

/// Reduces the trials of one parameter point, in trial order.
pub fn aggregate(value: f64, spec: &ExperimentSpec, trials: &[TrialResult]) -> Result<SweepPoint> {
    let link = spec.link_params()?;
    let theory = ClosedFormPredictions::compute(&link, 0.0);
    let ok: Vec<&TrialResult> = trials.iter().filter(|t| !t.failed()).collect();
    let failures = trials.len() - ok.len();
    let pick = |f: &dyn Fn(&TrialResult) -> f64| -> Vec<f64> { ok.iter().map(|t| f(t)).collect() };
    let avg = |v: Vec<f64>| if v.is_empty() { f64::NAN } else { mean(&v) };

    let cp = |t: &TrialResult| t.conventional.expect("non-failed trial");
    let lp = |t: &TrialResult| t.issac.expect("non-failed trial");
    let cp_err = pick(&|t| cp(t).sq_error);
    let lp_err = pick(&|t| lp(t).sq_error);
    let h_norms = pick(&|t| t.h_norm_sq);
    let angle_err: Vec<f64> = ok
        .iter()
        .filter(|_| spec.angle_stage == AngleStage::Estimated)
        .filter_map(|t| t.angle_errors.as_ref().map(|e| mean(e).to_degrees()))
        .collect();

    Ok(SweepPoint {
        value,
        e_cp_sim: avg(cp_err.clone()),
        e_cp_theory: theory.e_cp,
        e_lp_sim: avg(lp_err.clone()),
        e_lp_theory: theory.e_lp,
        nrmse_cp: nrmse(&cp_err, &h_norms).unwrap_or(f64::NAN),
        nrmse_lp: nrmse(&lp_err, &h_norms).unwrap_or(f64::NAN),
        gamma_cp_sim: avg(pick(&|t| cp(t).snr)),
        gamma_cp_approx: avg(pick(&|t| t.gamma_cp_approx)),
        gamma_lp_sim: avg(pick(&|t| lp(t).snr)),
        gamma_lp_theory: avg(pick(&|t| t.gamma_lp_theory)),
        gamma_upper: avg(pick(&|t| t.snr_upper)),
        mean_angle_error_deg: if angle_err.is_empty() {
            None
        } else {
            Some(mean(&angle_err))
        },
        trials: trials.len(),
        failures,
        failure_rate: failures as f64 / trials.len() as f64,
    })
}

/// Runs every point of `spec.sweep`.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    let sweep = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("experiment has no sweep axis".into()))?;
    spec.validate()?;
    let points = sweep
        .values
        .iter()
        .map(|&v| {
            let point = spec.at_sweep_point(sweep.axis, v, sweep.joint_power)?;
            let trials = run_trials(&point)?;
            aggregate(v, &point, &trials)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: sweep.axis,
        points,
    })
}

/// Empirical distribution of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSeries {
    /// Ascending.
    pub values: Vec<f64>,
    /// `probabilities[i] = (i + 1) / n`.
    pub probabilities: Vec<f64>,
    pub p10: f64,
    pub p50: f64,
    pub p90: f64,
}

impl CdfSeries {
    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|v| *v <= x) as f64 / self.values.len() as f64
    }

    /// Linear interpolation between order statistics at rank `q (n - 1)`.
    pub fn percentile(&self, q: f64) -> f64 {
        percentile_sorted(&self.values, q)
    }
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn empirical_cdf(values: &[f64]) -> Result<CdfSeries> {
    if values.is_empty() {
        return Err(Error::Empty("cdf input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(CdfSeries {
        probabilities: (1..=sorted.len()).map(|i| i as f64 / n).collect(),
        p10: percentile_sorted(&sorted, 0.1),
        p50: percentile_sorted(&sorted, 0.5),
        p90: percentile_sorted(&sorted, 0.9),
        values: sorted,
    })
}

/// Receive-SNR distributions (dB) of both methods over non-failed trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrCdfs {
    pub conventional: CdfSeries,
    pub issac: CdfSeries,
    pub trials: usize,
    pub failures: usize,
}

pub fn snr_cdfs(trials: &[TrialResult]) -> Result<SnrCdfs> {
    let ok: Vec<&TrialResult> = trials.iter().filter(|t| !t.failed()).collect();
    let db = |f: &dyn Fn(&TrialResult) -> Option<MethodOutcome>| -> Vec<f64> {
        ok.iter()
            .filter_map(|t| f(t))
            .map(|o| linear_to_db(o.snr))
            .collect()
    };
    Ok(SnrCdfs {
        conventional: empirical_cdf(&db(&|t| t.conventional))?,
        issac: empirical_cdf(&db(&|t| t.issac))?,
        trials: trials.len(),
        failures: trials.len() - ok.len(),
    })
}

pub fn run_cdf(spec: &ExperimentSpec) -> Result<SnrCdfs> {
    snr_cdfs(&run_trials(spec)?)
}
