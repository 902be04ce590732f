//! Covariance estimation and subspace angle finding.
//!
//! Single-path blocks are scanned with the Bartlett spectrum of the full
//! array covariance. Coherent multipath destroys the rank of the source
//! covariance, so for `L > 1` the array is split into overlapping
//! subarrays whose covariances are averaged forward and backward before the
//! MUSIC noise-subspace scan.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;

use crate::array::{check_angle, ReceivedBlock};
use crate::{CMatrix, Cx, Error, Result};

const HERMITIAN_TOL: f64 = 1e-10;

/// Hermitian (after symmetrization) covariance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    matrix: CMatrix,
    num_snapshots: usize,
}

impl SampleCovariance {
    /// Wraps `matrix`, replacing it with `(R + R^H) / 2`.
    pub fn new(matrix: CMatrix, num_snapshots: usize) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be square and non-empty, got {:?}",
                matrix.shape()
            )));
        }
        Ok(Self {
            matrix: symmetrize(matrix),
            num_snapshots,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.num_snapshots
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: &self.matrix * Cx::new(c, 0.0),
            num_snapshots: self.num_snapshots,
        }
    }
}

fn symmetrize(m: CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = m;
    for i in 0..n {
        out[(i, i)] = Cx::new(out[(i, i)].re, 0.0);
        for j in i + 1..n {
            let v = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

/// `R = (1/(rho+kappa)) (sum y_t y_t^H + sum y_d y_d^H)` over every snapshot
/// of the block.
pub fn sample_covariance(block: &ReceivedBlock) -> Result<SampleCovariance> {
    let n = block.num_snapshots();
    if n == 0 {
        return Err(Error::Empty("received block has no snapshots"));
    }
    let m = block.num_antennas();
    let mut r = CMatrix::zeros(m, m);
    let one = Cx::new(1.0, 0.0);
    let w = Cx::new(1.0 / n as f64, 0.0);
    for y in [&block.pilot_obs, &block.data_obs] {
        r.gemm(w, y, &y.adjoint(), one);
    }
    SampleCovariance::new(r, n)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigendecomposition(r: &CMatrix) -> Result<HermitianEigen> {
    if !r.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} is not square",
            r.shape()
        )));
    }
    let scale = r.norm();
    let asym = (r - r.adjoint()).norm();
    if asym > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(if scale > 0.0 {
            asym / scale
        } else {
            asym
        }));
    }
    let eig = SymmetricEigen::new(r.clone());
    let mut order: Vec<usize> = (0..r.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(r.nrows(), r.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Number of eigenvalues above `rel_tol * lambda_max`.
pub fn numerical_rank(r: &SampleCovariance, rel_tol: f64) -> Result<usize> {
    let eig = hermitian_eigendecomposition(r.matrix())?;
    let max = eig.values.last().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|&&v| v > rel_tol * max).count())
}

/// Uniform scan grid in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub low_deg: f64,
    pub high_deg: f64,
    pub step_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            low_deg: -89.0,
            high_deg: 89.0,
            step_deg: 0.02,
        }
    }
}

impl GridSpec {
    /// Grid angles in radians, strictly increasing.
    pub fn angles(&self) -> Result<Vec<f64>> {
        if self.step_deg.is_nan()
            || self.step_deg <= 0.0
            || self.low_deg.partial_cmp(&self.high_deg) != Some(std::cmp::Ordering::Less)
        {
            return Err(Error::InvalidArgument(format!("bad grid {self:?}")));
        }
        check_angle(self.low_deg.to_radians())?;
        check_angle(self.high_deg.to_radians())?;
        let n = ((self.high_deg - self.low_deg) / self.step_deg + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|k| (self.low_deg + k as f64 * self.step_deg).to_radians())
            .collect())
    }
}

/// Spectrum values over an angle grid (radians).
#[derive(Debug, Clone, PartialEq)]
pub struct Pseudospectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl Pseudospectrum {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} points, spectrum {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "grid must be strictly increasing".into(),
            ));
        }
        for &t in &grid {
            check_angle(t)?;
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "spectrum values must be finite and >= 0".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| *v > self.values[b]) {
                best = Some(i);
            }
        }
        best
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("angle grid"));
    }
    grid.iter().try_for_each(|&t| check_angle(t))
}

/// Evaluates `a^H(theta) Q a(theta)` for Hermitian `Q` over `grid`.
///
/// With `z = exp(j pi sin(theta))` the form collapses to
/// `c_0 + 2 Re(sum_{d>0} c_d z^d)`, `c_d` being the sum of the `d`-th upper
/// diagonal of `Q`, so each grid point costs `O(n)` instead of `O(n^2)`.
fn scan_quadratic_form(q: &CMatrix, grid: &[f64]) -> Vec<f64> {
    let n = q.nrows();
    let coeffs: Vec<Cx> = (0..n)
        .map(|d| (0..n - d).map(|i| q[(i, i + d)]).sum())
        .collect();
    grid.iter()
        .map(|&theta| {
            let z = Cx::from_polar(1.0, PI * theta.sin());
            let mut w = z;
            let mut acc = Cx::default();
            for c in &coeffs[1..] {
                acc += c * w;
                w *= z;
            }
            coeffs[0].re + 2.0 * acc.re
        })
        .collect()
}

/// `P(theta) = a^H(theta) R a(theta)`.
pub fn bartlett_spectrum(r: &SampleCovariance, grid: &[f64]) -> Result<Pseudospectrum> {
    check_grid(grid)?;
    let values = scan_quadratic_form(r.matrix(), grid)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    Pseudospectrum::new(grid.to_vec(), values)
}

/// Subarray partition for spatial smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubarrayPlan {
    num_subarrays: usize,
    subarray_size: usize,
    parent_size: usize,
}

impl SubarrayPlan {
    pub fn new(parent_size: usize, num_subarrays: usize) -> Result<Self> {
        if num_subarrays == 0 || num_subarrays > parent_size {
            return Err(Error::InvalidArgument(format!(
                "{num_subarrays} subarrays do not fit a {parent_size}-element array"
            )));
        }
        Ok(Self {
            num_subarrays,
            subarray_size: parent_size - num_subarrays + 1,
            parent_size,
        })
    }

    /// Explicit sizes; rejected unless `subarray_size == parent_size - num_subarrays + 1`.
    pub fn with_sizes(
        parent_size: usize,
        num_subarrays: usize,
        subarray_size: usize,
    ) -> Result<Self> {
        let plan = Self::new(parent_size, num_subarrays)?;
        if plan.subarray_size != subarray_size {
            return Err(Error::InvalidArgument(format!(
                "subarray size {subarray_size} != {parent_size} - {num_subarrays} + 1"
            )));
        }
        Ok(plan)
    }

    /// Default plan for `num_sources` coherent paths: `P = ceil(L/2) + 1`.
    pub fn for_sources(parent_size: usize, num_sources: usize) -> Result<Self> {
        let plan = Self::new(parent_size, num_sources.div_ceil(2) + 1)?;
        plan.check_supports(num_sources)?;
        Ok(plan)
    }

    /// Full-rank conditions of the smoothed covariance: `M_sub >= L+1`, `2P >= L`.
    pub fn check_supports(&self, num_sources: usize) -> Result<()> {
        if self.subarray_size < num_sources + 1 || 2 * self.num_subarrays < num_sources {
            return Err(Error::InvalidArgument(format!(
                "plan {self:?} cannot resolve {num_sources} coherent sources"
            )));
        }
        Ok(())
    }

    pub fn num_subarrays(&self) -> usize {
        self.num_subarrays
    }

    pub fn subarray_size(&self) -> usize {
        self.subarray_size
    }

    pub fn parent_size(&self) -> usize {
        self.parent_size
    }
}

/// Per-subarray covariances over pilot and data snapshots.
///
/// Subarray `p` (0-based) sees rows `p .. p + M_sub` of every snapshot, so its
/// covariance is the matching principal block of the full sample covariance.
pub fn subarray_covariances(
    block: &ReceivedBlock,
    plan: &SubarrayPlan,
) -> Result<Vec<SampleCovariance>> {
    if plan.parent_size != block.num_antennas() {
        return Err(Error::DimensionMismatch(format!(
            "plan is for {} antennas, block has {}",
            plan.parent_size,
            block.num_antennas()
        )));
    }
    let full = sample_covariance(block)?;
    let k = plan.subarray_size;
    (0..plan.num_subarrays)
        .map(|p| {
            let sub = full.matrix().view((p, p), (k, k)).into_owned();
            SampleCovariance::new(sub, full.num_snapshots())
        })
        .collect()
}

/// `R_fb = (R_bar + J conj(R_bar) J) / 2` with `R_bar` the subarray average
/// and `J` the exchange matrix.
pub fn forward_backward_smooth(covs: &[SampleCovariance]) -> Result<SampleCovariance> {
    let first = covs
        .first()
        .ok_or(Error::Empty("no subarray covariances"))?;
    let n = first.dim();
    let mut avg = CMatrix::zeros(n, n);
    for c in covs {
        if c.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "subarray covariance sizes {} and {}",
                n,
                c.dim()
            )));
        }
        avg += c.matrix();
    }
    avg /= Cx::new(covs.len() as f64, 0.0);
    let fb = CMatrix::from_fn(n, n, |i, j| {
        (avg[(i, j)] + avg[(n - 1 - i, n - 1 - j)].conj()) * 0.5
    });
    SampleCovariance::new(fb, first.num_snapshots())
}

/// MUSIC spectrum `1 / (a^H E_n E_n^H a)` with `E_n` spanning the
/// `dim - num_sources` smallest eigenvalues.
pub fn music_spectrum(
    r: &SampleCovariance,
    num_sources: usize,
    grid: &[f64],
) -> Result<Pseudospectrum> {
    let n = r.dim();
    if num_sources == 0 || num_sources >= n {
        return Err(Error::InvalidArgument(format!(
            "MUSIC needs 1 <= L < {n}, got L = {num_sources}"
        )));
    }
    check_grid(grid)?;
    let eig = hermitian_eigendecomposition(r.matrix())?;
    let noise = eig.vectors.columns(0, n - num_sources);
    let projector = noise * noise.adjoint();
    let floor = f64::EPSILON * n as f64;
    let values = scan_quadratic_form(&projector, grid)
        .into_iter()
        .map(|d| 1.0 / d.max(floor))
        .collect();
    Pseudospectrum::new(grid.to_vec(), values)
}

/// Angles of the strongest spectral peaks, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleEstimates {
    pub angles: Vec<f64>,
    pub peak_values: Vec<f64>,
}

/// Picks the `count` highest local maxima of `spec`.
///
/// A local maximum is strictly above both neighbours; a flat top counts once,
/// at its centre. Equal heights resolve to the smaller angle. With `refine`,
/// each isolated peak is moved to the vertex of the parabola through it and
/// its two neighbours.
pub fn find_peaks(spec: &Pseudospectrum, count: usize, refine: bool) -> Result<AngleEstimates> {
    let v = &spec.values;
    let g = &spec.grid;
    let n = v.len();
    if count == 0 {
        return Err(Error::InvalidArgument("peak count must be positive".into()));
    }
    if n < 2 * count + 1 {
        return Err(Error::InvalidArgument(format!(
            "grid of {n} points is too coarse for {count} peaks"
        )));
    }

    // (index, is a single-sample peak)
    let mut peaks: Vec<(usize, bool)> = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                peaks.push(((i + j) / 2, i == j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if peaks.len() < count {
        return Err(Error::TooFewPeaks {
            found: peaks.len(),
            wanted: count,
        });
    }
    // stable: equal heights keep ascending-angle order
    peaks.sort_by(|a, b| v[b.0].total_cmp(&v[a.0]));
    peaks.truncate(count);

    let mut out: Vec<(f64, f64)> = peaks
        .into_iter()
        .map(|(k, isolated)| {
            if !(refine && isolated) {
                return (g[k], v[k]);
            }
            let (ym, y0, yp) = (v[k - 1], v[k], v[k + 1]);
            let curv = ym - 2.0 * y0 + yp;
            if curv.is_nan() || curv >= 0.0 {
                return (g[k], y0);
            }
            let delta = (0.5 * (ym - yp) / curv).clamp(-0.5, 0.5);
            let angle = if delta >= 0.0 {
                g[k] + delta * (g[k + 1] - g[k])
            } else {
                g[k] + delta * (g[k] - g[k - 1])
            };
            (angle, y0 - 0.25 * (ym - yp) * delta)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(AngleEstimates {
        angles: out.iter().map(|p| p.0).collect(),
        peak_values: out.iter().map(|p| p.1).collect(),
    })
}
