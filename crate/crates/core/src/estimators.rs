//! Channel estimators, receive beamforming and the closed-form predictions
//! they are checked against.

use std::fmt;

use crate::array::{ReceivedBlock, UlaGeometry};
use crate::subspace::hermitian_eigendecomposition;
use crate::{CMatrix, CVector, Cx, Error, Result};

/// Largest accepted condition number of `A^H(angles) A(angles)`.
pub const MAX_GRAM_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Least squares on the pilots alone.
    Conventional,
    /// Angle from the Bartlett scan, single gain from beamformed pilots.
    IssacLos,
    /// Angles from smoothed MUSIC, gains from the beamformed pilot projection.
    IssacMultipath,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Conventional => "conventional",
            Method::IssacLos => "issac_los",
            Method::IssacMultipath => "issac_multipath",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: CVector,
    pub method: Method,
    pub angles: Option<Vec<f64>>,
    pub gains: Option<Vec<Cx>>,
}

fn check_pilots(block: &ReceivedBlock) -> Result<usize> {
    let rho = block.pilot_len();
    if rho == 0 || block.pilot_obs.ncols() != rho {
        return Err(Error::InvalidArgument(format!(
            "gain estimation needs pilots (sequence {rho}, observed {})",
            block.pilot_obs.ncols()
        )));
    }
    Ok(rho)
}

/// `sum_n y_t(n) conj(phi(n))`, the pilot-matched sum of the observations.
fn pilot_correlate(block: &ReceivedBlock) -> CVector {
    let phi_conj =
        CVector::from_iterator(block.pilot_len(), block.pilot_seq.iter().map(|p| p.conj()));
    &block.pilot_obs * phi_conj
}

/// Conventional LS: `h_hat = (1/sqrt(P_t rho^2)) sum_i y_t(i) conj(phi(i))`.
pub fn ls_conventional(block: &ReceivedBlock, pilot_power: f64) -> Result<ChannelEstimate> {
    let rho = check_pilots(block)?;
    let scale = 1.0 / (pilot_power.sqrt() * rho as f64);
    Ok(ChannelEstimate {
        h_hat: pilot_correlate(block) * Cx::new(scale, 0.0),
        method: Method::Conventional,
        angles: None,
        gains: None,
    })
}

/// Single-path gain through a beam steered at `theta_hat`.
///
/// The beamformed pilot projection `y' = a^H(theta_hat)/sqrt(M) * sum y_t
/// phi^* / sqrt(P_t rho^2)` is divided by `sqrt(M)`, which is exact when the
/// estimated angle is the true one.
pub fn estimate_gain_los(
    block: &ReceivedBlock,
    theta_hat: f64,
    pilot_power: f64,
) -> Result<(Cx, ChannelEstimate)> {
    let rho = check_pilots(block)?;
    let m = block.num_antennas();
    let geom = UlaGeometry::new(m)?;
    let a = geom.steering_vector(theta_hat)?;
    let sqrt_m = (m as f64).sqrt();
    let beamformed = a.dotc(&pilot_correlate(block)) / sqrt_m;
    let projected = beamformed / (pilot_power.sqrt() * rho as f64);
    let gain = projected / sqrt_m;
    Ok((
        gain,
        ChannelEstimate {
            h_hat: a * gain,
            method: Method::IssacLos,
            angles: Some(vec![theta_hat]),
            gains: Some(vec![gain]),
        },
    ))
}

/// Multipath gains through the beam matrix `W = A^H(angles)/sqrt(M)`.
///
/// Solves `(A^H A) alpha = sqrt(M/P_t) * (1/rho) W Y_t conj(phi)` with the
/// Gram matrix built from the estimated angles.
pub fn estimate_gains_multipath(
    block: &ReceivedBlock,
    angles: &[f64],
    pilot_power: f64,
) -> Result<(Vec<Cx>, ChannelEstimate)> {
    let rho = check_pilots(block)?;
    let m = block.num_antennas();
    let l = angles.len();
    if l == 0 || l > m {
        return Err(Error::InvalidArgument(format!(
            "cannot fit {l} paths on {m} antennas"
        )));
    }
    let a = UlaGeometry::new(m)?.steering_matrix(angles)?;
    let sqrt_m = (m as f64).sqrt();
    let projected = a.adjoint() * pilot_correlate(block) / Cx::new(sqrt_m * rho as f64, 0.0);
    let rhs = projected * Cx::new(sqrt_m / pilot_power.sqrt(), 0.0);
    let gram = a.adjoint() * &a;
    let gains = solve_gram(gram, rhs)?;
    let h_hat = &a * &gains;
    let gains: Vec<Cx> = gains.iter().copied().collect();
    Ok((
        gains.clone(),
        ChannelEstimate {
            h_hat,
            method: Method::IssacMultipath,
            angles: Some(angles.to_vec()),
            gains: Some(gains),
        },
    ))
}

fn solve_gram(gram: CMatrix, rhs: CVector) -> Result<CVector> {
    let eig = hermitian_eigendecomposition(&gram)?;
    let lo = eig.values[0];
    let hi = eig.values[eig.values.len() - 1];
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if cond.is_nan() || cond > MAX_GRAM_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let chol = gram.cholesky().ok_or(Error::IllConditioned(cond))?;
    Ok(chol.solve(&rhs))
}

/// Maximum-ratio combiner `h_hat / ||h_hat||`.
pub fn mrc_beamformer(est: &ChannelEstimate) -> Result<CVector> {
    let norm = est.h_hat.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroEstimate);
    }
    Ok(&est.h_hat / Cx::new(norm, 0.0))
}

/// Realized receive SNR `P_d |v^H h|^2 / noise_var`.
pub fn empirical_snr(v: &CVector, h: &CVector, data_power: f64, noise_var: f64) -> f64 {
    data_power * v.dotc(h).norm_sqr() / noise_var
}

/// `SNR_t = P_t ||h||^2 / (M noise_var)`, the per-antenna pilot SNR.
pub fn pilot_snr(pilot_power: f64, h_norm_sq: f64, num_antennas: usize, noise_var: f64) -> f64 {
    pilot_power * h_norm_sq / (num_antennas as f64 * noise_var)
}

/// Large-array approximation of the conventional receive SNR.
///
/// Returns `(gamma, xi)` with `xi = (1 - 1/M) / (rho SNR_t + 1)` and
/// `gamma = P_d ||h||^2 / noise_var * (1 - xi)`.
pub fn snr_cp_approx(
    num_antennas: usize,
    pilot_len: usize,
    snr_t: f64,
    data_power: f64,
    h_norm_sq: f64,
    noise_var: f64,
) -> (f64, f64) {
    let xi = (1.0 - 1.0 / num_antennas as f64) / (pilot_len as f64 * snr_t + 1.0);
    (data_power * h_norm_sq / noise_var * (1.0 - xi), xi)
}

/// SNR after steering a unit beam at `theta_hat` on a single path from `theta`:
/// `P_d ||h||^2 / noise_var * |a^H(theta_hat) a(theta)|^2 / M^2`.
pub fn los_beam_snr(
    theta_hat: f64,
    theta: f64,
    data_power: f64,
    h_norm_sq: f64,
    noise_var: f64,
    num_antennas: usize,
) -> Result<f64> {
    let g = UlaGeometry::new(num_antennas)?;
    let inner = g
        .steering_vector(theta_hat)?
        .dotc(&g.steering_vector(theta)?);
    let m = num_antennas as f64;
    Ok(data_power * h_norm_sq / noise_var * inner.norm_sqr() / (m * m))
}

/// Closed-form mean squared channel error `E||h_hat - h||^2`.
///
/// Conventional: `M noise_var / (P_t rho)`; subspace estimators:
/// `L noise_var / (P_t rho)` (with `L = 1` for the single-path case).
pub fn mmse_closed_form(
    method: Method,
    num_antennas: usize,
    num_paths: usize,
    pilot_power: f64,
    pilot_len: usize,
    noise_var: f64,
) -> f64 {
    let per_dim = noise_var / (pilot_power * pilot_len as f64);
    match method {
        Method::Conventional => num_antennas as f64 * per_dim,
        Method::IssacLos => per_dim,
        Method::IssacMultipath => num_paths as f64 * per_dim,
    }
}

/// Linear SNRs from one realized beamformer next to its predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    pub empirical_gamma: f64,
    pub theory_value: f64,
    pub upper_bound: f64,
}

impl SnrReport {
    /// Cauchy-Schwarz: a unit-norm beamformer cannot beat the matched filter.
    pub fn within_bound(&self) -> bool {
        self.empirical_gamma <= self.upper_bound * (1.0 + 1e-9)
    }
}

/// Every closed-form prediction for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormPredictions {
    pub e_cp: f64,
    pub e_lp: f64,
    pub gamma_cp_approx: f64,
    pub gamma_upper: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub num_antennas: usize,
    pub num_paths: usize,
    pub pilot_len: usize,
    pub pilot_power: f64,
    pub data_power: f64,
    pub noise_var: f64,
}

impl ClosedFormPredictions {
    pub fn compute(p: &LinkParams, h_norm_sq: f64) -> Self {
        let lp_method = if p.num_paths == 1 {
            Method::IssacLos
        } else {
            Method::IssacMultipath
        };
        let snr_t = pilot_snr(p.pilot_power, h_norm_sq, p.num_antennas, p.noise_var);
        let (gamma_cp_approx, xi) = snr_cp_approx(
            p.num_antennas,
            p.pilot_len,
            snr_t,
            p.data_power,
            h_norm_sq,
            p.noise_var,
        );
        Self {
            e_cp: mmse_closed_form(
                Method::Conventional,
                p.num_antennas,
                p.num_paths,
                p.pilot_power,
                p.pilot_len,
                p.noise_var,
            ),
            e_lp: mmse_closed_form(
                lp_method,
                p.num_antennas,
                p.num_paths,
                p.pilot_power,
                p.pilot_len,
                p.noise_var,
            ),
            gamma_cp_approx,
            gamma_upper: p.data_power * h_norm_sq / p.noise_var,
            xi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{
        generate_pilot_sequence, sample_paths, simulate_reception, AnglePolicy, PathSet, PilotKind,
        TransmissionConfig,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn preset_cfg(noise_var: f64, pilot_len: usize) -> TransmissionConfig {
        TransmissionConfig {
            pilot_len,
            data_len: 4,
            pilot_power: 0.1,
            data_power: 0.1,
            noise_var,
        }
    }

    fn draw_block(
        paths: &PathSet,
        m: usize,
        cfg: &TransmissionConfig,
        rng: &mut ChaCha8Rng,
    ) -> (CVector, ReceivedBlock) {
        let g = UlaGeometry::new(m).unwrap();
        let h = paths.synthesize_channel(&g);
        let phi = generate_pilot_sequence(cfg.pilot_len, PilotKind::RandomPhase, rng).unwrap();
        let b = simulate_reception(&h, cfg, &phi, rng).unwrap();
        (h, b)
    }

    /// Exact LS gain using the (normally unknown) true steering vector.
    fn exact_los_gain(block: &ReceivedBlock, theta_hat: f64, theta: f64, pt: f64) -> Cx {
        let g = UlaGeometry::new(block.num_antennas()).unwrap();
        let a_hat = g.steering_vector(theta_hat).unwrap();
        let a = g.steering_vector(theta).unwrap();
        let rho = block.pilot_len() as f64;
        let mut acc = c(0.0, 0.0);
        for n in 0..block.pilot_len() {
            let y = a_hat.dotc(&block.pilot_obs.column(n)) / a_hat.norm();
            acc += y * block.pilot_seq[n].conj();
        }
        let projected = acc / (pt.sqrt() * rho);
        a_hat.norm() * projected / a_hat.dotc(&a)
    }

    #[test]
    fn noiseless_ls_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
        let (h, b) = draw_block(&p, 16, &preset_cfg(0.0, 3), &mut rng);
        let est = ls_conventional(&b, 0.1).unwrap();
        assert!((est.h_hat - h).norm() < 1e-12);
    }

    #[test]
    fn ls_needs_pilots() {
        let b = ReceivedBlock {
            pilot_obs: CMatrix::zeros(4, 0),
            data_obs: CMatrix::zeros(4, 1),
            pilot_seq: vec![],
            data_syms: vec![c(1.0, 0.0)],
        };
        assert!(ls_conventional(&b, 1.0).is_err());
        assert!(estimate_gain_los(&b, 0.0, 1.0).is_err());
        assert!(estimate_gains_multipath(&b, &[0.0], 1.0).is_err());
    }

    fn mean_ls_error(pilot_len: usize, trials: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = preset_cfg(1.0, pilot_len);
        let mut acc = 0.0;
        for _ in 0..trials {
            let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
            let (h, b) = draw_block(&p, 32, &cfg, &mut rng);
            acc += (ls_conventional(&b, 0.1).unwrap().h_hat - h).norm_squared();
        }
        acc / trials as f64
    }

    #[test]
    fn ls_error_matches_closed_form_and_halves_with_double_pilots() {
        let e3 = mean_ls_error(3, 10_000, 10);
        let expect = mmse_closed_form(Method::Conventional, 32, 3, 0.1, 3, 1.0);
        assert_relative_eq!(expect, 32.0 / 0.3, epsilon = 1e-9);
        assert!((e3 / expect - 1.0).abs() < 0.03, "{e3} vs {expect}");
        let e6 = mean_ls_error(6, 10_000, 11);
        assert!((e6 / (expect / 2.0) - 1.0).abs() < 0.03, "{e6}");
    }

    #[test]
    fn mrc_examples() {
        let est = |v: Vec<Cx>| ChannelEstimate {
            h_hat: CVector::from_vec(v),
            method: Method::Conventional,
            angles: None,
            gains: None,
        };
        let v = mrc_beamformer(&est(vec![c(2.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(v, CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(
            mrc_beamformer(&est(vec![c(0.0, 0.0); 3])),
            Err(Error::ZeroEstimate)
        );

        let h = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7)]);
        let v1 = mrc_beamformer(&est(h.iter().copied().collect())).unwrap();
        let v2 = mrc_beamformer(&est((&h * c(-3.0, 1.5)).iter().copied().collect())).unwrap();
        assert_relative_eq!(v1.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(v1.dotc(&h).norm(), v2.dotc(&h).norm(), epsilon = 1e-12);
    }

    #[test]
    fn empirical_snr_examples() {
        let g = UlaGeometry::new(8).unwrap();
        let a = g.steering_vector(0.4).unwrap();
        let alpha = c(0.6, -1.1);
        let h = &a * alpha;
        let v = &h / c(h.norm(), 0.0);
        assert_relative_eq!(
            empirical_snr(&v, &h, 0.5, 2.0),
            0.5 * h.norm_squared() / 2.0,
            epsilon = 1e-12
        );
        let v_perp = CVector::from_vec(vec![
            c(1.0, 0.0),
            c(-1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]) / c(2f64.sqrt(), 0.0);
        let h_bs = g.steering_vector(0.0).unwrap();
        assert!(empirical_snr(&v_perp, &h_bs, 1.0, 1.0) < 1e-30);
        let beam = &a / c(8f64.sqrt(), 0.0);
        assert_relative_eq!(
            empirical_snr(&beam, &h, 0.5, 2.0),
            0.5 * alpha.norm_sqr() * 8.0 / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cp_approximation_values() {
        // M=32, rho=3, SNR_t=0.1: xi = (1 - 1/32)/1.3
        let (gamma, xi) = snr_cp_approx(32, 3, 0.1, 0.1, 32.0, 1.0);
        assert_relative_eq!(xi, 0.96875 / 1.3, epsilon = 1e-15);
        assert_relative_eq!(xi, 0.745192307692, epsilon = 1e-11);
        assert_relative_eq!(gamma, 3.2 * (1.0 - xi), epsilon = 1e-12);
        let (_, xi1) = snr_cp_approx(1, 3, 0.0, 1.0, 1.0, 1.0);
        assert_eq!(xi1, 0.0);
        let (g_big, xi_big) = snr_cp_approx(32, 3, 1e12, 0.1, 32.0, 1.0);
        assert!(xi_big < 1e-12);
        assert_relative_eq!(g_big, 3.2, epsilon = 1e-10);
        assert_relative_eq!(pilot_snr(0.1, 32.0, 32, 1.0), 0.1);
    }

    #[test]
    fn closed_form_values() {
        assert_relative_eq!(
            mmse_closed_form(Method::Conventional, 32, 3, 0.1, 3, 1.0),
            106.666_666_666_666_67,
            epsilon = 1e-9
        );
        let los = mmse_closed_form(Method::IssacLos, 32, 1, 0.1, 3, 1.0);
        assert_relative_eq!(los, 3.333_333_333_333_333, epsilon = 1e-12);
        assert_relative_eq!(
            mmse_closed_form(Method::Conventional, 32, 1, 0.1, 3, 1.0) / los,
            32.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            mmse_closed_form(Method::IssacMultipath, 32, 3, 0.1, 3, 1.0),
            10.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn predictions_ratio_invariant() {
        for (m, l) in [(8, 1), (32, 3), (64, 2)] {
            let p = LinkParams {
                num_antennas: m,
                num_paths: l,
                pilot_len: 3,
                pilot_power: 0.2,
                data_power: 0.1,
                noise_var: 1.0,
            };
            let c = ClosedFormPredictions::compute(&p, 50.0);
            assert_relative_eq!(c.e_cp, m as f64 * c.e_lp / l as f64, epsilon = 1e-12);
            assert!(c.xi < 1.0 && c.xi >= 0.0);
            assert!(c.gamma_cp_approx <= c.gamma_upper);
        }
    }

    #[test]
    fn los_gain_noiseless_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta = 0.37;
        let alpha = c(-0.4, 0.9);
        let p = PathSet::new(vec![theta], vec![alpha]).unwrap();
        let (h, b) = draw_block(&p, 16, &preset_cfg(0.0, 3), &mut rng);
        let (g, est) = estimate_gain_los(&b, theta, 0.1).unwrap();
        assert!((g - alpha).norm() < 1e-12);
        assert!((&est.h_hat - h).norm() < 1e-12);
        // the exact LS form agrees when the angle is right
        assert!((exact_los_gain(&b, theta, theta, 0.1) - alpha).norm() < 1e-12);
    }

    #[test]
    fn los_gain_mismatch_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (theta, theta_hat) = (0.2, 0.23);
        let alpha = c(1.0, 0.5);
        let p = PathSet::new(vec![theta], vec![alpha]).unwrap();
        let (_, b) = draw_block(&p, 16, &preset_cfg(0.0, 2), &mut rng);
        let (g, _) = estimate_gain_los(&b, theta_hat, 0.1).unwrap();
        let geom = UlaGeometry::new(16).unwrap();
        let factor = geom
            .steering_vector(theta_hat)
            .unwrap()
            .dotc(&geom.steering_vector(theta).unwrap())
            / 16.0;
        assert!((g - alpha * factor).norm() < 1e-12);
        // the exact form (with the true steering vector) removes the bias
        assert!((exact_los_gain(&b, theta_hat, theta, 0.1) - alpha).norm() < 1e-10);
    }

    #[test]
    fn los_gain_error_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cfg = preset_cfg(1.0, 3);
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let theta = rand::Rng::random_range(&mut rng, -1.0..1.0);
            let phase = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
            let p = PathSet::new(vec![theta], vec![Cx::from_polar(1.0, phase)]).unwrap();
            let (h, b) = draw_block(&p, 32, &cfg, &mut rng);
            let (_, est) = estimate_gain_los(&b, theta, 0.1).unwrap();
            acc += (est.h_hat - h).norm_squared();
        }
        let mean = acc / trials as f64;
        assert!((mean / (10.0 / 3.0) - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn multipath_noiseless_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
        let (h, b) = draw_block(&p, 32, &preset_cfg(0.0, 3), &mut rng);
        let (gains, est) = estimate_gains_multipath(&b, p.angles(), 0.1).unwrap();
        for (g, a) in gains.iter().zip(p.gains()) {
            assert!((g - a).norm() < 1e-10);
        }
        assert!((&est.h_hat - h).norm() < 1e-10);
    }

    #[test]
    fn multipath_error_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cfg = preset_cfg(1.0, 3);
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
            let (h, b) = draw_block(&p, 32, &cfg, &mut rng);
            let (_, est) = estimate_gains_multipath(&b, p.angles(), 0.1).unwrap();
            acc += (est.h_hat - h).norm_squared();
        }
        let mean = acc / trials as f64;
        assert!((mean / 10.0 - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn multipath_with_one_path_matches_los() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = PathSet::new(vec![-0.6], vec![c(0.3, 0.2)]).unwrap();
        let (_, b) = draw_block(&p, 12, &preset_cfg(1.0, 3), &mut rng);
        let (g_los, e_los) = estimate_gain_los(&b, -0.58, 0.1).unwrap();
        let (g_mp, e_mp) = estimate_gains_multipath(&b, &[-0.58], 0.1).unwrap();
        assert!((g_los - g_mp[0]).norm() < 1e-12);
        assert!((e_los.h_hat - e_mp.h_hat).norm() < 1e-12);
    }

    #[test]
    fn collided_angles_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = PathSet::new(vec![0.1], vec![c(1.0, 0.0)]).unwrap();
        let (_, b) = draw_block(&p, 16, &preset_cfg(1.0, 3), &mut rng);
        assert!(matches!(
            estimate_gains_multipath(&b, &[0.1, 0.1 + 1e-9], 0.1),
            Err(Error::IllConditioned(_))
        ));
        assert!(estimate_gains_multipath(&b, &[0.0; 17], 0.1).is_err());
    }

    #[test]
    fn multipath_oracle_with_true_gram() {
        // the (unobservable) true-angle Gram form is unbiased under small angle error
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = PathSet::new(
            vec![-0.5, 0.1, 0.6],
            vec![c(1.0, 0.0), c(0.0, -1.0), c(0.5, 0.5)],
        )
        .unwrap();
        let (_, b) = draw_block(&p, 32, &preset_cfg(0.0, 3), &mut rng);
        let hat = [-0.501, 0.1005, 0.598];
        let g = UlaGeometry::new(32).unwrap();
        let a_hat = g.steering_matrix(&hat).unwrap();
        let a = g.steering_matrix(p.angles()).unwrap();
        let phi = CVector::from_iterator(3, b.pilot_seq.iter().map(|x| x.conj()));
        let y = a_hat.adjoint() * (&b.pilot_obs * phi) / c(32f64.sqrt() * 3.0, 0.0);
        let exact = (a_hat.adjoint() * &a)
            .lu()
            .solve(&(y * c(32f64.sqrt() / 0.1f64.sqrt(), 0.0)))
            .unwrap();
        for (e, t) in exact.iter().zip(p.gains()) {
            assert!((e - t).norm() < 1e-9);
        }
        let (approx, _) = estimate_gains_multipath(&b, &hat, 0.1).unwrap();
        let bias: f64 = approx
            .iter()
            .zip(p.gains())
            .map(|(e, t)| (e - t).norm())
            .sum();
        assert!(bias > 1e-6);
    }

    #[test]
    fn reconstruction_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
        let (_, b) = draw_block(&p, 32, &preset_cfg(1.0, 3), &mut rng);
        let (_, est) = estimate_gains_multipath(&b, &[-0.3, 0.2, 0.7], 0.1).unwrap();
        let a = UlaGeometry::new(32)
            .unwrap()
            .steering_matrix(est.angles.as_ref().unwrap())
            .unwrap();
        let alpha = CVector::from_vec(est.gains.clone().unwrap());
        assert!((a * alpha - &est.h_hat).norm() <= 1e-12 * est.h_hat.norm());
    }

    #[test]
    fn los_beam_snr_examples() {
        let (pd, hn, nv) = (0.1, 32.0, 1.0);
        assert_relative_eq!(
            los_beam_snr(0.3, 0.3, pd, hn, nv, 32).unwrap(),
            3.2,
            epsilon = 1e-12
        );
        let theta = 0.2f64;
        let off = (theta.sin() + 2.0 / 32.0).asin();
        assert!(los_beam_snr(off, theta, pd, hn, nv, 32).unwrap() < 1e-20);
        assert_relative_eq!(
            los_beam_snr(-1.0, 1.2, pd, hn, nv, 1).unwrap(),
            3.2,
            epsilon = 1e-12
        );
    }

    proptest! {
        #[test]
        fn unit_beamformer_never_beats_matched_filter(seed in any::<u64>(), m in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = CVector::from_fn(m, |_, _| crate::array::complex_gaussian(&mut rng, 1.0));
            let raw = CVector::from_fn(m, |_, _| crate::array::complex_gaussian(&mut rng, 1.0));
            let v = &raw / c(raw.norm(), 0.0);
            let report = SnrReport {
                empirical_gamma: empirical_snr(&v, &h, 0.3, 0.7),
                theory_value: f64::NAN,
                upper_bound: 0.3 * h.norm_squared() / 0.7,
            };
            prop_assert!(report.within_bound());
        }

        #[test]
        fn cp_approx_monotone_in_pilot_energy(m in 1usize..128, e1 in 0.0f64..50.0, de in 0.0f64..50.0) {
            let (g1, _) = snr_cp_approx(m, 1, e1, 1.0, 10.0, 1.0);
            let (g2, _) = snr_cp_approx(m, 1, e1 + de, 1.0, 10.0, 1.0);
            prop_assert!(g2 >= g1 - 1e-12);
            prop_assert!(g2 <= 10.0 + 1e-12);
        }
    }
}
