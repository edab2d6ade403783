//! Gaussian random fields and divergence-free Gaussian noise.
//!
//! Two constructions are provided:
//!
//! * **Spectral** (the default): sample a scalar stream function from a
//!   Gaussian random field whose Fourier coefficients have standard deviation
//!   proportional to `(4π²‖k‖² + τ²)^(−α/2)`, then push it through the
//!   perpendicular gradient. The resulting velocity samples lie exactly in
//!   the divergence-free, zero-mean subspace.
//! * **Finite difference**: grid white noise smoothed by a periodic Gaussian
//!   kernel, differentiated with central differences. The central-difference
//!   divergence vanishes by stencil commutation, while the spectral
//!   divergence is small but nonzero — this variant exists to mirror the
//!   stencil construction, and its residual is reported, never asserted.
//!
//! Samples are scaled so the expected squared L² norm is 1; callers that
//! need another amplitude rescale the returned fields.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, VectorField2};
use crate::grid::Grid;
use crate::rng::{derive_rng, StreamDomain};
use crate::spectral::curl_perp;

/// Parameters of the scalar Gaussian random field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrfSpec {
    /// Spectral decay exponent; must exceed 1 for a trace-class covariance.
    pub alpha: f64,
    /// Inverse length scale.
    pub tau: f64,
    pub seed: u64,
}

impl GrfSpec {
    pub fn new(alpha: f64, tau: f64, seed: u64) -> Result<Self> {
        if alpha <= 1.0 || tau <= 0.0 {
            return Err(Error::InvalidGrfSpec { alpha, tau });
        }
        Ok(Self { alpha, tau, seed })
    }
}

impl Default for GrfSpec {
    fn default() -> Self {
        Self {
            alpha: 2.5,
            tau: 7.0,
            seed: 0,
        }
    }
}

/// Which noise construction to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NoiseMode {
    Spectral,
    FiniteDifference,
}

/// Divergence-free noise source specification.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StreamNoiseSpec {
    pub mode: NoiseMode,
    /// Stream-function field law (spectral mode).
    pub grf: GrfSpec,
    /// Smoothing width in grid cells (finite-difference mode).
    pub blur_sigma: f64,
}

impl StreamNoiseSpec {
    pub fn spectral(grf: GrfSpec) -> Self {
        Self {
            mode: NoiseMode::Spectral,
            grf,
            blur_sigma: 2.0,
        }
    }

    pub fn finite_difference(seed: u64, blur_sigma: f64) -> Self {
        Self {
            mode: NoiseMode::FiniteDifference,
            grf: GrfSpec {
                seed,
                ..GrfSpec::default()
            },
            blur_sigma,
        }
    }
}

impl Default for StreamNoiseSpec {
    fn default() -> Self {
        Self::spectral(GrfSpec::default())
    }
}

/// A conjugate pair of retained Fourier modes: the coefficient lives at
/// `idx`, its conjugate at `conj_idx`. The zero mode and Nyquist rows are
/// never retained, so every retained mode belongs to a proper pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModePair {
    pub kx: i64,
    pub ky: i64,
    pub idx: (usize, usize),
    pub conj_idx: (usize, usize),
}

/// Canonical (half-spectrum) enumeration of retained mode pairs, in the fixed
/// row-major order that pins the sampling bitstream.
pub(crate) fn canonical_modes(grid: Grid) -> Vec<ModePair> {
    let table = grid.wavenumbers();
    let (ny, nx) = grid.shape();
    let nyq_x = -((nx / 2) as i64);
    let nyq_y = -((ny / 2) as i64);
    let mut out = Vec::new();
    for j in 0..ny {
        let ky = table.ky[j];
        for i in 0..nx {
            let kx = table.kx[i];
            if (kx == 0 && ky == 0) || kx == nyq_x || ky == nyq_y {
                continue;
            }
            let cj = (ny - j) % ny;
            let ci = (nx - i) % nx;
            if (j, i) < (cj, ci) {
                out.push(ModePair {
                    kx,
                    ky,
                    idx: (j, i),
                    conj_idx: (cj, ci),
                });
            }
        }
    }
    out
}

fn sigma_raw(spec: &GrfSpec, grid: Grid, kx: i64, ky: i64) -> f64 {
    let k2 = 4.0 * std::f64::consts::PI.powi(2) * ((kx * kx + ky * ky) as f64)
        / (grid.length() * grid.length());
    (k2 + spec.tau * spec.tau).powf(-spec.alpha / 2.0)
}

/// Per-mode standard deviations of the scalar GRF, normalized so the sampled
/// field has unit expected squared L² norm. Returned per canonical pair.
pub(crate) fn grf_mode_stds(spec: &GrfSpec, grid: Grid) -> (Vec<ModePair>, Vec<f64>) {
    let modes = canonical_modes(grid);
    let raw: Vec<f64> = modes
        .iter()
        .map(|m| sigma_raw(spec, grid, m.kx, m.ky))
        .collect();
    // Each pair contributes both ±k coefficients to the energy.
    let total: f64 = raw.iter().map(|s| 2.0 * s * s).sum();
    let scale = grid.length() / total.sqrt();
    let stds = raw.iter().map(|s| s * scale).collect();
    (modes, stds)
}

/// Draw one scalar GRF (frame 0 of the spec's seed).
pub fn sample_grf_scalar(spec: &GrfSpec, grid: Grid) -> ScalarField {
    sample_grf_scalar_frame(spec, grid, 0)
}

/// Draw frame `frame` of the scalar GRF stream for this seed.
///
/// Deterministic given `(spec.seed, frame)`; the mean mode and Nyquist rows
/// are zero, so every sample is zero-mean and band-representable.
pub fn sample_grf_scalar_frame(spec: &GrfSpec, grid: Grid, frame: u64) -> ScalarField {
    let (modes, stds) = grf_mode_stds(spec, grid);
    let mut rng = derive_rng(spec.seed, StreamDomain::GrfScalar, frame);
    let mut coeffs = Array2::from_elem(grid.shape(), Complex64::new(0.0, 0.0));
    let n2 = (grid.n_x() * grid.n_y()) as f64;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for (mode, std) in modes.iter().zip(&stds) {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        // Fourier-series coefficient std/√2 per real part; DFT scale n_x n_y.
        let c = Complex64::new(a, b) * (std * inv_sqrt2 * n2);
        coeffs[mode.idx] = c;
        coeffs[mode.conj_idx] = c.conj();
    }
    ScalarField::from_array(grid, fft::ifft2_real(&coeffs)).expect("shape preserved")
}

/// Variance of each solenoidal coordinate of spectral-mode noise.
///
/// In the orthonormal basis `{√2 e_k cos(2πk·x), √2 e_k sin(2πk·x)}` with
/// `e_k = k⊥/‖k‖`, the curl pushforward of the scalar GRF is diagonal: both
/// coordinates of pair `k` have variance `(2π‖k‖/L)² σ_ψ(k)²`, rescaled to
/// unit total expected energy. This is the spectrum of the covariance
/// operator of the noise measure.
pub fn divfree_noise_coordinate_variances(spec: &GrfSpec, grid: Grid) -> Vec<((i64, i64), f64)> {
    let (modes, stds) = grf_mode_stds(spec, grid);
    let two_pi = 2.0 * std::f64::consts::PI;
    let raw: Vec<f64> = modes
        .iter()
        .zip(&stds)
        .map(|(m, s)| {
            let knorm = (((m.kx * m.kx + m.ky * m.ky) as f64).sqrt()) * two_pi / grid.length();
            (knorm * s).powi(2)
        })
        .collect();
    let total: f64 = raw.iter().map(|v| 2.0 * v).sum();
    modes
        .iter()
        .zip(&raw)
        .map(|(m, v)| ((m.kx, m.ky), v / total))
        .collect()
}

/// Amplitude factor applied to `curl_perp(ψ)` so spectral-mode samples have
/// unit expected squared L² norm.
pub(crate) fn spectral_noise_scale(spec: &GrfSpec, grid: Grid) -> f64 {
    let (modes, stds) = grf_mode_stds(spec, grid);
    let two_pi = 2.0 * std::f64::consts::PI;
    let energy: f64 = modes
        .iter()
        .zip(&stds)
        .map(|(m, s)| {
            let k2 = ((m.kx * m.kx + m.ky * m.ky) as f64) * (two_pi / grid.length()).powi(2);
            2.0 * k2 * s * s
        })
        .sum();
    1.0 / energy.sqrt()
}

/// Draw `frames` independent divergence-free velocity fields.
pub fn sample_divfree_noise(spec: &StreamNoiseSpec, grid: Grid, frames: usize) -> Vec<VectorField2> {
    (0..frames as u64)
        .into_par_iter()
        .map(|frame| sample_divfree_noise_frame(spec, grid, frame))
        .collect()
}

/// Draw frame `frame` of the divergence-free noise stream.
pub fn sample_divfree_noise_frame(spec: &StreamNoiseSpec, grid: Grid, frame: u64) -> VectorField2 {
    match spec.mode {
        NoiseMode::Spectral => {
            let psi = sample_grf_scalar_frame(&spec.grf, grid, frame);
            curl_perp(&psi).scaled(spectral_noise_scale(&spec.grf, grid))
        }
        NoiseMode::FiniteDifference => sample_fd_noise_frame(spec, grid, frame),
    }
}

fn sample_fd_noise_frame(spec: &StreamNoiseSpec, grid: Grid, frame: u64) -> VectorField2 {
    let mut rng = derive_rng(spec.grf.seed, StreamDomain::WhiteNoise, frame);
    let white = Array2::from_shape_fn(grid.shape(), |_| rng.sample::<f64, _>(StandardNormal));
    let psi = gaussian_blur_periodic(&white, spec.blur_sigma);
    let (hx, hy) = grid.spacing();
    let u = central_difference(&psi, Axis2Fd::Y, hy);
    let mut v = central_difference(&psi, Axis2Fd::X, hx);
    v.mapv_inplace(|x| -x);
    let field = VectorField2::from_arrays(grid, u, v).expect("shape preserved");
    field.scaled(fd_noise_scale(grid, spec.blur_sigma))
}

/// 1/sqrt(E‖u‖²) for the finite-difference construction, from the impulse
/// response of blur-then-difference applied to unit white noise.
fn fd_noise_scale(grid: Grid, blur_sigma: f64) -> f64 {
    let (ny, nx) = grid.shape();
    let mut delta = Array2::zeros((ny, nx));
    delta[(0, 0)] = 1.0;
    let blurred = gaussian_blur_periodic(&delta, blur_sigma);
    let (hx, hy) = grid.spacing();
    let ku = central_difference(&blurred, Axis2Fd::Y, hy);
    let kv = central_difference(&blurred, Axis2Fd::X, hx);
    // Stationary variance per point is the squared kernel l2 norm; integrate
    // over the torus: E‖u‖² = (‖K_u‖² + ‖K_v‖²) n_x n_y h_x h_y.
    let energy: f64 = ku
        .iter()
        .chain(kv.iter())
        .map(|v| v * v)
        .sum::<f64>()
        * (nx * ny) as f64
        * grid.cell_area();
    1.0 / energy.sqrt()
}

enum Axis2Fd {
    X,
    Y,
}

/// Periodic central difference `(f(s+1) − f(s−1)) / (2h)`.
fn central_difference(f: &Array2<f64>, axis: Axis2Fd, h: f64) -> Array2<f64> {
    let (ny, nx) = f.dim();
    let mut out = Array2::zeros((ny, nx));
    match axis {
        Axis2Fd::X => {
            for j in 0..ny {
                for i in 0..nx {
                    out[(j, i)] = (f[(j, (i + 1) % nx)] - f[(j, (i + nx - 1) % nx)]) / (2.0 * h);
                }
            }
        }
        Axis2Fd::Y => {
            for j in 0..ny {
                for i in 0..nx {
                    out[(j, i)] = (f[((j + 1) % ny, i)] - f[((j + ny - 1) % ny, i)]) / (2.0 * h);
                }
            }
        }
    }
    out
}

/// Central-difference divergence `D_x u + D_y v`, the stencil-consistent
/// divergence of the finite-difference noise path.
pub fn central_difference_divergence(w: &VectorField2) -> ScalarField {
    let (hx, hy) = w.grid().spacing();
    let du = central_difference(w.u(), Axis2Fd::X, hx);
    let dv = central_difference(w.v(), Axis2Fd::Y, hy);
    ScalarField::from_array(w.grid(), du + dv).expect("shape preserved")
}

/// Separable periodic Gaussian blur with std `sigma` (grid cells), kernel
/// truncated at radius `⌈4σ⌉` and normalized to unit sum.
fn gaussian_blur_periodic(f: &Array2<f64>, sigma: f64) -> Array2<f64> {
    assert!(sigma > 0.0, "blur_sigma must be positive");
    let radius = (4.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= sum);

    let (ny, nx) = f.dim();
    let mut tmp = Array2::zeros((ny, nx));
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                let off = t as i64 - radius;
                let ii = (i as i64 + off).rem_euclid(nx as i64) as usize;
                acc += w * f[(j, ii)];
            }
            tmp[(j, i)] = acc;
        }
    }
    let mut out = Array2::zeros((ny, nx));
    for j in 0..ny {
        for i in 0..nx {
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                let off = t as i64 - radius;
                let jj = (j as i64 + off).rem_euclid(ny as i64) as usize;
                acc += w * tmp[(jj, i)];
            }
            out[(j, i)] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::divergence;

    #[test]
    fn same_seed_is_bitwise_identical() {
        let grid = Grid::new(16).unwrap();
        let spec = GrfSpec::default();
        let a = sample_grf_scalar(&spec, grid);
        let b = sample_grf_scalar(&spec, grid);
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn samples_are_zero_mean() {
        let grid = Grid::new(16).unwrap();
        for frame in 0..20 {
            let f = sample_grf_scalar_frame(&GrfSpec::default(), grid, frame);
            assert!(f.mean().abs() <= 1e-13 * f.norm_l2());
        }
    }

    #[test]
    fn spectral_noise_is_solenoidal_and_zero_mean() {
        let grid = Grid::new(32).unwrap();
        let spec = StreamNoiseSpec::default();
        for frame in 0..10 {
            let u = sample_divfree_noise_frame(&spec, grid, frame);
            assert!(divergence(&u).norm_l2() <= 1e-12 * u.norm_l2());
            let (mu, mv) = u.mean_components();
            assert!(mu.abs() <= 1e-13 * u.norm_l2());
            assert!(mv.abs() <= 1e-13 * u.norm_l2());
        }
    }

    #[test]
    fn fd_noise_divergence_vanishes_for_the_stencil() {
        let grid = Grid::new(64).unwrap();
        let spec = StreamNoiseSpec::finite_difference(3, 2.0);
        let u = sample_divfree_noise_frame(&spec, grid, 0);
        let div_fd = central_difference_divergence(&u);
        assert!(div_fd.norm_l2() <= 1e-12 * u.norm_l2());
        // spectral divergence is small but genuinely nonzero
        let div_sp = divergence(&u).norm_l2();
        assert!(div_sp > 1e-12 * u.norm_l2());
    }

    #[test]
    fn lemma_norm_identity_on_sampled_stream_functions() {
        let grid = Grid::new(32).unwrap();
        for frame in 0..20 {
            let psi = sample_grf_scalar_frame(&GrfSpec::default(), grid, frame);
            let w = curl_perp(&psi);
            let hat = crate::spectral::forward_fft2(&psi);
            let gx = crate::spectral::inverse_fft2(
                &crate::spectral::spectral_derivative(&hat, crate::spectral::Axis2::X, 1).unwrap(),
            );
            let gy = crate::spectral::inverse_fft2(
                &crate::spectral::spectral_derivative(&hat, crate::spectral::Axis2::Y, 1).unwrap(),
            );
            let grad = VectorField2::from_components(gx, gy).unwrap();
            let (a, b) = (w.norm_l2(), grad.norm_l2());
            assert!((a - b).abs() <= 1e-12 * a.max(b));
        }
    }

    #[test]
    fn frames_are_deterministic_and_order_independent() {
        let grid = Grid::new(16).unwrap();
        let spec = StreamNoiseSpec::default();
        let batch = sample_divfree_noise(&spec, grid, 4);
        let lone = sample_divfree_noise_frame(&spec, grid, 2);
        assert_eq!(batch[2].u(), lone.u());
        assert_eq!(batch[2].v(), lone.v());
    }

    #[test]
    fn distinct_frames_are_uncorrelated() {
        let grid = Grid::new(8).unwrap();
        let spec = StreamNoiseSpec::default();
        let n_pairs = 1000;
        let mut corr = Vec::with_capacity(n_pairs);
        for p in 0..n_pairs as u64 {
            let a = sample_divfree_noise_frame(&spec, grid, 2 * p);
            let b = sample_divfree_noise_frame(&spec, grid, 2 * p + 1);
            corr.push(crate::spectral::l2_inner(&a, &b));
        }
        let mean = corr.iter().sum::<f64>() / n_pairs as f64;
        let var = corr.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n_pairs as f64;
        let se = (var / n_pairs as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "cross-correlation {mean} vs se {se}");
    }

    #[test]
    fn ensemble_mean_is_centered() {
        let grid = Grid::new(8).unwrap();
        let spec = StreamNoiseSpec::default();
        let n = 10_000;
        let mut acc = VectorField2::zeros(grid);
        for frame in 0..n as u64 {
            acc.axpy(1.0 / n as f64, &sample_divfree_noise_frame(&spec, grid, frame));
        }
        // E‖mean‖² = E‖u‖²/n = 1/n, so ‖mean‖ concentrates near 1/√n.
        let expected_se = (1.0 / n as f64).sqrt();
        assert!(
            acc.norm_l2() <= 3.0 * expected_se,
            "ensemble mean norm {} vs {}",
            acc.norm_l2(),
            expected_se
        );
    }

    #[test]
    fn expected_unit_energy() {
        let grid = Grid::new(16).unwrap();
        let spec = StreamNoiseSpec::default();
        let n = 4000;
        let mean_energy: f64 = (0..n as u64)
            .map(|f| sample_divfree_noise_frame(&spec, grid, f).norm_l2().powi(2))
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean_energy - 1.0).abs() < 0.05,
            "expected unit energy, got {mean_energy}"
        );
    }

    #[test]
    fn rejects_bad_grf_parameters() {
        assert!(GrfSpec::new(1.0, 7.0, 0).is_err());
        assert!(GrfSpec::new(2.5, 0.0, 0).is_err());
        assert!(GrfSpec::new(2.5, 7.0, 0).is_ok());
    }
}
