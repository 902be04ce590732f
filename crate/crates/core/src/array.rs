//! Array geometry, parametric multipath channel and received-signal synthesis.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMatrix, CVector, Cx, Error, Result};

/// Draws one circularly symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Cx {
    let scale = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(scale * re, scale * im)
}

pub(crate) fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > -FRAC_PI_2 && theta < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(theta))
    }
}

/// Uniform linear array with half-wavelength element spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlaGeometry {
    num_antennas: usize,
}

impl UlaGeometry {
    pub fn new(num_antennas: usize) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::InvalidArgument(
                "array needs at least one antenna".into(),
            ));
        }
        Ok(Self { num_antennas })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    /// Array response `a(theta)`: entry `m` is `exp(j*pi*m*sin(theta))`.
    pub fn steering_vector(&self, theta: f64) -> Result<CVector> {
        check_angle(theta)?;
        let s = theta.sin();
        Ok(CVector::from_fn(self.num_antennas, |m, _| {
            Cx::from_polar(1.0, PI * m as f64 * s)
        }))
    }

    /// `A(angles) = [a(theta_1), ..., a(theta_L)]`.
    pub fn steering_matrix(&self, angles: &[f64]) -> Result<CMatrix> {
        let mut a = CMatrix::zeros(self.num_antennas, angles.len());
        for (l, &theta) in angles.iter().enumerate() {
            a.set_column(l, &self.steering_vector(theta)?);
        }
        Ok(a)
    }
}

/// Angles and complex gains of the propagation paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    angles: Vec<f64>,
    gains: Vec<Cx>,
}

impl PathSet {
    pub fn new(angles: Vec<f64>, gains: Vec<Cx>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument(
                "path set needs at least one path".into(),
            ));
        }
        if angles.len() != gains.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} angles but {} gains",
                angles.len(),
                gains.len()
            )));
        }
        for &theta in &angles {
            check_angle(theta)?;
        }
        for (i, a) in angles.iter().enumerate() {
            if angles[i + 1..].contains(a) {
                return Err(Error::InvalidArgument(format!("duplicate path angle {a}")));
            }
        }
        Ok(Self { angles, gains })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn gains(&self) -> &[Cx] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// `h = A(angles) * gains`.
    pub fn synthesize_channel(&self, geom: &UlaGeometry) -> CVector {
        let mut h = CVector::zeros(geom.num_antennas());
        for (&theta, &g) in self.angles.iter().zip(&self.gains) {
            // angles were validated at construction
            let a = geom.steering_vector(theta).expect("validated angle");
            h.axpy(g, &a, Cx::new(1.0, 0.0));
        }
        h
    }
}

/// How path angles are chosen for each channel draw.
#[derive(Debug, Clone, PartialEq)]
pub enum AnglePolicy {
    /// Uniform in `[low, high]` (radians), redrawn until every pair satisfies
    /// `|sin(a) - sin(b)| >= sin(min_separation)`.
    Uniform {
        low: f64,
        high: f64,
        min_separation: f64,
    },
    /// The same angles on every draw.
    Fixed(Vec<f64>),
}

impl Default for AnglePolicy {
    fn default() -> Self {
        AnglePolicy::Uniform {
            low: (-60f64).to_radians(),
            high: 60f64.to_radians(),
            min_separation: 5f64.to_radians(),
        }
    }
}

/// Distribution of the complex path gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainModel {
    /// i.i.d. CN(0, 1).
    #[default]
    Rayleigh,
    /// Unit modulus with a uniformly random phase.
    UnitModulus,
}

const MAX_ANGLE_ATTEMPTS: usize = 10_000;

pub fn sample_angles<R: Rng + ?Sized>(
    num_paths: usize,
    rng: &mut R,
    policy: &AnglePolicy,
) -> Result<Vec<f64>> {
    if num_paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    match policy {
        AnglePolicy::Fixed(angles) => {
            if angles.len() != num_paths {
                return Err(Error::DimensionMismatch(format!(
                    "fixed angle list has {} entries, {} paths requested",
                    angles.len(),
                    num_paths
                )));
            }
            for &a in angles {
                check_angle(a)?;
            }
            Ok(angles.clone())
        }
        &AnglePolicy::Uniform {
            low,
            high,
            min_separation,
        } => {
            check_angle(low)?;
            check_angle(high)?;
            if low >= high {
                return Err(Error::InvalidArgument(format!(
                    "empty angle interval [{low}, {high}]"
                )));
            }
            let min_gap = min_separation.sin();
            for _ in 0..MAX_ANGLE_ATTEMPTS {
                let draw: Vec<f64> = (0..num_paths)
                    .map(|_| rng.random_range(low..high))
                    .collect();
                let separated = draw.iter().enumerate().all(|(i, a)| {
                    draw[i + 1..]
                        .iter()
                        .all(|b| (a.sin() - b.sin()).abs() >= min_gap)
                });
                if separated {
                    return Ok(draw);
                }
            }
            Err(Error::SeparationUnsatisfiable {
                paths: num_paths,
                attempts: MAX_ANGLE_ATTEMPTS,
            })
        }
    }
}

pub fn sample_gains<R: Rng + ?Sized>(num_paths: usize, rng: &mut R, model: GainModel) -> Vec<Cx> {
    (0..num_paths)
        .map(|_| match model {
            GainModel::Rayleigh => complex_gaussian(rng, 1.0),
            GainModel::UnitModulus => Cx::from_polar(1.0, rng.random_range(0.0..2.0 * PI)),
        })
        .collect()
}

/// Draws a full path set: angles per `policy`, then CN(0,1) gains.
pub fn sample_paths<R: Rng + ?Sized>(
    num_paths: usize,
    rng: &mut R,
    policy: &AnglePolicy,
) -> Result<PathSet> {
    let angles = sample_angles(num_paths, rng, policy)?;
    let gains = sample_gains(num_paths, rng, GainModel::Rayleigh);
    PathSet::new(angles, gains)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PilotKind {
    #[default]
    Ones,
    RandomPhase,
}

/// Unit-modulus pilot sequence of length `len`; its energy is exactly `len`.
pub fn generate_pilot_sequence<R: Rng + ?Sized>(
    len: usize,
    kind: PilotKind,
    rng: &mut R,
) -> Result<Vec<Cx>> {
    if len == 0 {
        return Err(Error::InvalidArgument(
            "pilot length must be at least 1".into(),
        ));
    }
    Ok(match kind {
        PilotKind::Ones => vec![Cx::new(1.0, 0.0); len],
        PilotKind::RandomPhase => (0..len)
            .map(|_| Cx::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
            .collect(),
    })
}

/// Frame layout and powers of one coherence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionConfig {
    pub pilot_len: usize,
    pub data_len: usize,
    pub pilot_power: f64,
    pub data_power: f64,
    pub noise_var: f64,
}

impl TransmissionConfig {
    /// Builds a config from transmit SNRs in dB (`P / noise_var`).
    pub fn from_snr_db(
        pilot_len: usize,
        data_len: usize,
        pilot_snr_db: f64,
        data_snr_db: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let cfg = Self {
            pilot_len,
            data_len,
            pilot_power: crate::db_to_linear(pilot_snr_db) * noise_var,
            data_power: crate::db_to_linear(data_snr_db) * noise_var,
            noise_var,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Powers must be positive; a zero noise variance is accepted for
    /// noiseless checks.
    pub fn validate(&self) -> Result<()> {
        if self.data_len == 0 {
            return Err(Error::InvalidArgument(
                "data length must be at least 1".into(),
            ));
        }
        if !(self.pilot_power > 0.0 && self.pilot_power.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pilot power {}",
                self.pilot_power
            )));
        }
        if !(self.data_power > 0.0 && self.data_power.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "data power {}",
                self.data_power
            )));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise variance {}",
                self.noise_var
            )));
        }
        Ok(())
    }
}

/// Pilot and data observations of one coherence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    /// M x rho, column n is `sqrt(P_t) h phi(n) + z_t(n)`.
    pub pilot_obs: CMatrix,
    /// M x kappa, column n is `sqrt(P_d) h s(n) + z_d(n)`.
    pub data_obs: CMatrix,
    pub pilot_seq: Vec<Cx>,
    /// Transmitted data symbols; ground truth for tests only, never read by
    /// the estimators.
    pub data_syms: Vec<Cx>,
}

impl ReceivedBlock {
    pub fn num_antennas(&self) -> usize {
        self.pilot_obs.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.pilot_obs.ncols() + self.data_obs.ncols()
    }

    pub fn pilot_len(&self) -> usize {
        self.pilot_seq.len()
    }
}

/// Synthesizes the received pilot and data blocks for channel `h`.
///
/// Draw order from `rng`: pilot noise columns, data symbols, data noise
/// columns.
pub fn simulate_reception<R: Rng + ?Sized>(
    h: &CVector,
    config: &TransmissionConfig,
    pilot_seq: &[Cx],
    rng: &mut R,
) -> Result<ReceivedBlock> {
    config.validate()?;
    if pilot_seq.len() != config.pilot_len {
        return Err(Error::DimensionMismatch(format!(
            "pilot sequence has {} symbols, config expects {}",
            pilot_seq.len(),
            config.pilot_len
        )));
    }
    let m = h.len();
    if m == 0 {
        return Err(Error::DimensionMismatch("empty channel vector".into()));
    }
    let sqrt_pt = config.pilot_power.sqrt();
    let sqrt_pd = config.data_power.sqrt();
    let nv = config.noise_var;

    let mut pilot_obs = CMatrix::zeros(m, config.pilot_len);
    for (n, &phi) in pilot_seq.iter().enumerate() {
        let tx = phi * sqrt_pt;
        for i in 0..m {
            pilot_obs[(i, n)] = h[i] * tx + complex_gaussian(rng, nv);
        }
    }

    let data_syms: Vec<Cx> = (0..config.data_len)
        .map(|_| complex_gaussian(rng, 1.0))
        .collect();
    let mut data_obs = CMatrix::zeros(m, config.data_len);
    for (n, &s) in data_syms.iter().enumerate() {
        let tx = s * sqrt_pd;
        for i in 0..m {
            data_obs[(i, n)] = h[i] * tx + complex_gaussian(rng, nv);
        }
    }

    Ok(ReceivedBlock {
        pilot_obs,
        data_obs,
        pilot_seq: pilot_seq.to_vec(),
        data_syms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn assert_cx_eq(a: Cx, b: Cx, tol: f64) {
        assert!((a - b).norm() < tol, "{a} != {b}");
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let g = UlaGeometry::new(4).unwrap();
        let a = g.steering_vector(0.0).unwrap();
        for v in a.iter() {
            assert_cx_eq(*v, c(1.0, 0.0), 1e-15);
        }
    }

    #[test]
    fn steering_at_thirty_degrees() {
        let g = UlaGeometry::new(3).unwrap();
        let a = g.steering_vector(PI / 6.0).unwrap();
        assert_cx_eq(a[0], c(1.0, 0.0), 1e-12);
        assert_cx_eq(a[1], c(0.0, 1.0), 1e-12);
        assert_cx_eq(a[2], c(-1.0, 0.0), 1e-12);
    }

    #[test]
    fn steering_rejects_endfire_and_nan() {
        let g = UlaGeometry::new(2).unwrap();
        assert!(matches!(
            g.steering_vector(FRAC_PI_2),
            Err(Error::AngleOutOfRange(_))
        ));
        assert!(g.steering_vector(-FRAC_PI_2).is_err());
        assert!(g.steering_vector(f64::NAN).is_err());
        // just inside the boundary the second entry approaches e^{j pi} = -1
        let a = g.steering_vector(FRAC_PI_2 - 1e-9).unwrap();
        assert_cx_eq(a[1], c(-1.0, 0.0), 1e-8);
    }

    #[test]
    fn zero_antennas_rejected() {
        assert!(UlaGeometry::new(0).is_err());
    }

    #[test]
    fn steering_matrix_columns() {
        let g = UlaGeometry::new(3).unwrap();
        let a = g.steering_matrix(&[0.0, PI / 6.0]).unwrap();
        assert_eq!(a.shape(), (3, 2));
        for i in 0..3 {
            assert_cx_eq(a[(i, 0)], c(1.0, 0.0), 1e-15);
        }
        assert_cx_eq(a[(1, 1)], c(0.0, 1.0), 1e-12);
        assert_cx_eq(a[(2, 1)], c(-1.0, 0.0), 1e-12);

        let single = UlaGeometry::new(4)
            .unwrap()
            .steering_matrix(&[0.0])
            .unwrap();
        assert_eq!(single.shape(), (4, 1));
        assert!(g.steering_matrix(&[0.1, 2.0]).is_err());
    }

    #[test]
    fn steering_columns_orthogonal_at_rayleigh_spacing() {
        // sum_{m<8} exp(j*pi*m*2/8) is a full turn of 8 unit phasors -> 0
        let g = UlaGeometry::new(8).unwrap();
        for k in [1i32, 2, 3, -1, -5] {
            let s1: f64 = 0.1;
            let s2 = s1 - 2.0 * k as f64 / 8.0;
            if s2.abs() >= 1.0 {
                continue;
            }
            let a = g.steering_matrix(&[s1.asin(), s2.asin()]).unwrap();
            let inner = a.column(0).dotc(&a.column(1));
            assert!(inner.norm() < 1e-12, "k={k}: {inner}");
        }
    }

    #[test]
    fn synthesize_single_path() {
        let g = UlaGeometry::new(4).unwrap();
        let p = PathSet::new(vec![0.0], vec![c(1.0, 0.0)]).unwrap();
        let h = p.synthesize_channel(&g);
        assert_relative_eq!(h.norm_squared(), 4.0, epsilon = 1e-12);

        let p = PathSet::new(vec![0.0], vec![c(0.0, 2.0)]).unwrap();
        let h = p.synthesize_channel(&g);
        for v in h.iter() {
            assert_cx_eq(*v, c(0.0, 2.0), 1e-15);
        }
    }

    #[test]
    fn synthesize_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = UlaGeometry::new(8).unwrap();
        let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
        let h = p.synthesize_channel(&g);
        for m in 0..8 {
            let mut acc = c(0.0, 0.0);
            for l in 0..3 {
                let phase = PI * m as f64 * p.angles()[l].sin();
                acc += p.gains()[l] * c(phase.cos(), phase.sin());
            }
            assert_cx_eq(h[m], acc, 1e-12);
        }
    }

    #[test]
    fn path_set_validation() {
        assert!(PathSet::new(vec![], vec![]).is_err());
        assert!(PathSet::new(vec![0.1], vec![]).is_err());
        assert!(PathSet::new(vec![0.1, 0.1], vec![c(1.0, 0.0); 2]).is_err());
        assert!(PathSet::new(vec![2.0], vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn sample_paths_is_deterministic() {
        let policy = AnglePolicy::default();
        let a = sample_paths(3, &mut ChaCha8Rng::seed_from_u64(5), &policy).unwrap();
        let b = sample_paths(3, &mut ChaCha8Rng::seed_from_u64(5), &policy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gain_second_moment_is_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let policy = AnglePolicy::Fixed(vec![0.2]);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_paths(1, &mut rng, &policy).unwrap().gains()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((0.98..=1.02).contains(&mean), "E|alpha|^2 = {mean}");
    }

    #[test]
    fn minimum_separation_respected() {
        let policy = AnglePolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let p = sample_paths(2, &mut rng, &policy).unwrap();
            let gap = (p.angles()[0].sin() - p.angles()[1].sin()).abs();
            assert!(gap >= 5f64.to_radians().sin());
            for a in p.angles() {
                assert!(a.abs() <= 60f64.to_radians());
            }
        }
    }

    #[test]
    fn impossible_separation_fails() {
        let policy = AnglePolicy::Uniform {
            low: -0.01,
            high: 0.01,
            min_separation: 0.5,
        };
        let err = sample_paths(2, &mut ChaCha8Rng::seed_from_u64(0), &policy).unwrap_err();
        assert!(matches!(err, Error::SeparationUnsatisfiable { .. }));
    }

    #[test]
    fn unit_modulus_gains() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in sample_gains(50, &mut rng, GainModel::UnitModulus) {
            assert_relative_eq!(g.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pilot_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            generate_pilot_sequence(3, PilotKind::Ones, &mut rng).unwrap(),
            vec![c(1.0, 0.0); 3]
        );
        assert_eq!(
            generate_pilot_sequence(1, PilotKind::Ones, &mut rng).unwrap(),
            vec![c(1.0, 0.0)]
        );
        let r = generate_pilot_sequence(4, PilotKind::RandomPhase, &mut rng).unwrap();
        let energy: f64 = r.iter().map(|p| p.norm_sqr()).sum();
        assert_relative_eq!(energy, 4.0, epsilon = 1e-12);
        assert!(generate_pilot_sequence(0, PilotKind::Ones, &mut rng).is_err());
    }

    fn noiseless_cfg(pilot_len: usize, data_len: usize) -> TransmissionConfig {
        TransmissionConfig {
            pilot_len,
            data_len,
            pilot_power: 0.5,
            data_power: 2.0,
            noise_var: 0.0,
        }
    }

    #[test]
    fn noiseless_reception() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = UlaGeometry::new(4).unwrap();
        let p = sample_paths(2, &mut rng, &AnglePolicy::default()).unwrap();
        let h = p.synthesize_channel(&g);
        let cfg = noiseless_cfg(2, 5);
        let phi = vec![c(1.0, 0.0); 2];
        let b = simulate_reception(&h, &cfg, &phi, &mut rng).unwrap();
        for n in 0..2 {
            for i in 0..4 {
                assert_cx_eq(b.pilot_obs[(i, n)], h[i] * 0.5f64.sqrt(), 1e-15);
            }
        }
        for n in 0..5 {
            for i in 0..4 {
                let ratio = b.data_obs[(i, n)] / (b.data_syms[n] * 2f64.sqrt());
                assert_cx_eq(ratio, h[i], 1e-12);
            }
        }
    }

    #[test]
    fn reception_dimension_mismatch() {
        let h = CVector::from_element(4, c(1.0, 0.0));
        let cfg = noiseless_cfg(3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            simulate_reception(&h, &cfg, &[c(1.0, 0.0)], &mut rng),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pilot_noise_variance() {
        let h = CVector::zeros(4);
        let cfg = TransmissionConfig {
            pilot_len: 1,
            data_len: 1,
            pilot_power: 1.0,
            data_power: 1.0,
            noise_var: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let phi = [c(1.0, 0.0)];
        let trials = 10_000;
        let mut acc = [0.0; 4];
        for _ in 0..trials {
            let b = simulate_reception(&h, &cfg, &phi, &mut rng).unwrap();
            for (i, a) in acc.iter_mut().enumerate() {
                *a += b.pilot_obs[(i, 0)].norm_sqr();
            }
        }
        for a in acc {
            let var = a / trials as f64;
            assert!((0.97..=1.03).contains(&var), "variance {var}");
        }
    }

    #[test]
    fn reception_is_reproducible() {
        let g = UlaGeometry::new(6).unwrap();
        let cfg = TransmissionConfig::from_snr_db(3, 10, -10.0, -10.0, 1.0).unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(2024);
            let p = sample_paths(3, &mut rng, &AnglePolicy::default()).unwrap();
            let h = p.synthesize_channel(&g);
            let phi = generate_pilot_sequence(3, PilotKind::RandomPhase, &mut rng).unwrap();
            simulate_reception(&h, &cfg, &phi, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    proptest! {
        #[test]
        fn steering_norm_is_array_size(m in 1usize..80, theta in -1.57f64..1.57) {
            let a = UlaGeometry::new(m).unwrap().steering_vector(theta).unwrap();
            prop_assert!((a.norm_squared() - m as f64).abs() < 1e-10 * m as f64);
            for v in a.iter() {
                prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn noiseless_pilot_columns_are_proportional_to_h(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = UlaGeometry::new(5).unwrap();
            let h = sample_paths(2, &mut rng, &AnglePolicy::default()).unwrap().synthesize_channel(&g);
            let phi = generate_pilot_sequence(3, PilotKind::RandomPhase, &mut rng).unwrap();
            let b = simulate_reception(&h, &noiseless_cfg(3, 2), &phi, &mut rng).unwrap();
            for n in 0..3 {
                let col = b.pilot_obs.column(n);
                let scale = h.dotc(&col) / h.norm_squared();
                let resid = (col - &h * scale).norm();
                prop_assert!(resid < 1e-12 * h.norm().max(1.0));
            }
        }
    }
}
