//! Physical evaluation metrics: per-component MSE, divergence error, pressure
//! recovery, shell-binned spectra with slope fitting, and staged rollout
//! reports.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, VectorField2};
use crate::hodge::relative_divergence;
use crate::spectral::{
    apply_first_derivative, curl_scalar, dealias_in_place, divergence, forward_fft2, Axis2,
};

/// Per-component mean squared error.
pub fn mse(pred: &VectorField2, reference: &VectorField2) -> Result<(f64, f64)> {
    if pred.grid() != reference.grid() {
        return Err(Error::GridMismatch);
    }
    let n = (pred.grid().n_x() * pred.grid().n_y()) as f64;
    let u: f64 = pred
        .u()
        .iter()
        .zip(reference.u().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let v: f64 = pred
        .v()
        .iter()
        .zip(reference.v().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    Ok((u, v))
}

/// Mean of the squared spectral divergence over the grid, `mean((∇·u)²)`.
pub fn divergence_error(u: &VectorField2) -> f64 {
    let div = divergence(u);
    let n = (u.grid().n_x() * u.grid().n_y()) as f64;
    div.values().iter().map(|d| d * d).sum::<f64>() / n
}

/// Pressure recovery via the Poisson relation `−Δp = ∇·(u·∇u)`.
///
/// The advection term is formed pseudo-spectrally with 2/3 dealiasing and the
/// Poisson equation solved spectrally with zero-mean `p`. The reconstruction
/// is a consistency probe: on divergent inputs it still returns a field, but
/// the source term is contaminated, which is exactly what the probe exposes.
pub fn pressure_reconstruct(u: &VectorField2) -> ScalarField {
    let (p, warned) = pressure_reconstruct_checked(u);
    if warned {
        log::warn!(
            "pressure_reconstruct: input is not divergence-free to 1e-6; \
             reconstruction will be contaminated"
        );
    }
    p
}

/// As [`pressure_reconstruct`], also reporting whether the solenoidality
/// precondition (relative divergence ≤ 1e−6) was violated.
pub fn pressure_reconstruct_checked(u: &VectorField2) -> (ScalarField, bool) {
    let warned = relative_divergence(u) > 1e-6;
    let grid = u.grid();
    let u_hat = fft::fft2_real(u.u());
    let v_hat = fft::fft2_real(u.v());

    let deriv = |hat: &Array2<Complex64>, axis: Axis2| -> Array2<f64> {
        let mut d = hat.clone();
        apply_first_derivative(&mut d, grid, axis);
        fft::ifft2_real(&d)
    };
    let ux = deriv(&u_hat, Axis2::X);
    let uy = deriv(&u_hat, Axis2::Y);
    let vx = deriv(&v_hat, Axis2::X);
    let vy = deriv(&v_hat, Axis2::Y);

    let (ny, nx) = grid.shape();
    let mut a1 = Array2::zeros((ny, nx));
    let mut a2 = Array2::zeros((ny, nx));
    for j in 0..ny {
        for i in 0..nx {
            a1[(j, i)] = u.u()[(j, i)] * ux[(j, i)] + u.v()[(j, i)] * uy[(j, i)];
            a2[(j, i)] = u.u()[(j, i)] * vx[(j, i)] + u.v()[(j, i)] * vy[(j, i)];
        }
    }
    let mut a1_hat = fft::fft2_real(&a1);
    let mut a2_hat = fft::fft2_real(&a2);
    dealias_in_place(&mut a1_hat, grid);
    dealias_in_place(&mut a2_hat, grid);
    apply_first_derivative(&mut a1_hat, grid, Axis2::X);
    apply_first_derivative(&mut a2_hat, grid, Axis2::Y);

    // −Δp = ∇·a  ⇒  p̂ = (∇·a)^ / (4π²‖k‖²), zero-mean
    let table = grid.wavenumbers();
    let mut p_hat = a1_hat + a2_hat;
    for ((j, i), c) in p_hat.indexed_iter_mut() {
        let k2 = table.k2_physical(j, i, grid.length());
        if k2 == 0.0 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= k2;
        }
    }
    let p = ScalarField::from_array(grid, fft::ifft2_real(&p_hat)).expect("shape preserved");
    (p, warned)
}

/// Shell-binned spectrum over integer radial wavenumbers `1 ≤ k ≤ N/2`.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    pub shells: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Enstrophy,
    Energy,
}

/// Enstrophy spectrum: `½|ω̂(k)|²/(n_x n_y)²` summed into shells
/// `round(‖k‖)`. Shell totals reproduce the direct enstrophy `½∫ω²` exactly
/// for band-limited fields (all solver output is).
pub fn enstrophy_spectrum(u: &VectorField2) -> SpectrumCurve {
    let omega = curl_scalar(u);
    let omega_hat = forward_fft2(&omega);
    shell_bin(u.grid(), |j, i| 0.5 * omega_hat.coeffs()[(j, i)].norm_sqr())
}

/// Kinetic-energy spectrum: `½(|û|² + |v̂|²)/(n_x n_y)²` per shell.
pub fn energy_spectrum(u: &VectorField2) -> SpectrumCurve {
    let u_hat = fft::fft2_real(u.u());
    let v_hat = fft::fft2_real(u.v());
    shell_bin(u.grid(), |j, i| {
        0.5 * (u_hat[(j, i)].norm_sqr() + v_hat[(j, i)].norm_sqr())
    })
}

pub fn spectrum(u: &VectorField2, kind: SpectrumKind) -> SpectrumCurve {
    match kind {
        SpectrumKind::Enstrophy => enstrophy_spectrum(u),
        SpectrumKind::Energy => energy_spectrum(u),
    }
}

fn shell_bin(grid: crate::grid::Grid, density: impl Fn(usize, usize) -> f64) -> SpectrumCurve {
    let table = grid.wavenumbers();
    let max_shell = grid.n_x().min(grid.n_y()) / 2;
    let mut values = vec![0.0; max_shell + 1];
    let norm = ((grid.n_x() * grid.n_y()) as f64).powi(2) / (grid.length() * grid.length());
    let (ny, nx) = grid.shape();
    for j in 0..ny {
        for i in 0..nx {
            let kx = table.kx[i] as f64;
            let ky = table.ky[j] as f64;
            let shell = ((kx * kx + ky * ky).sqrt() + 0.5).floor() as usize;
            if shell >= 1 && shell <= max_shell {
                values[shell] += density(j, i) / norm;
            }
        }
    }
    SpectrumCurve {
        shells: (1..=max_shell).collect(),
        values: values[1..].to_vec(),
    }
}

/// Least-squares slope of `log(value)` against `log(k)` over shells
/// `k_min..=k_max`. Scale-invariant; errors on nonpositive values in range.
pub fn spectral_slope(curve: &SpectrumCurve, k_min: usize, k_max: usize) -> Result<f64> {
    if k_min < 1 || k_min >= k_max {
        return Err(Error::InvalidSolverConfig(format!(
            "bad fit range [{k_min}, {k_max}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (shell, value) in curve.shells.iter().zip(&curve.values) {
        if *shell >= k_min && *shell <= k_max {
            if *value <= 0.0 {
                return Err(Error::InvalidSolverConfig(format!(
                    "nonpositive spectrum value {value} in shell {shell}"
                )));
            }
            xs.push((*shell as f64).ln());
            ys.push(value.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::InvalidSolverConfig(format!(
            "fit range [{k_min}, {k_max}] covers fewer than two shells"
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Summary of one evaluation stage: population mean and std of the per-frame
/// metrics over the stage's frame range (both endpoints inclusive).
#[derive(Debug, Clone)]
pub struct StageReport {
    pub label: String,
    pub frame_range: (usize, usize),
    pub u_mse: f64,
    pub v_mse: f64,
    pub div_mse: f64,
    pub u_mse_std: f64,
    pub v_mse_std: f64,
    pub div_mse_std: f64,
    pub per_frame: Vec<FrameMetrics>,
}

#[derive(Debug, Clone, Copy)]
pub struct FrameMetrics {
    pub frame: usize,
    pub u_mse: f64,
    pub v_mse: f64,
    pub div_mse: f64,
}

fn stage_label(index: usize) -> String {
    match index {
        0 => "prediction".to_string(),
        1 => "short_term".to_string(),
        2 => "long_term".to_string(),
        n => format!("stage_{n}"),
    }
}

/// Staged rollout metrics of `pred` against `reference`.
///
/// `stages` holds inclusive frame ranges. Per frame: per-component MSE
/// against the reference and the divergence error of the prediction itself.
pub fn stage_report(
    pred: &[VectorField2],
    reference: &[VectorField2],
    stages: &[(usize, usize)],
) -> Result<Vec<StageReport>> {
    if pred.len() != reference.len() {
        return Err(Error::InvalidSolverConfig(format!(
            "trajectories misaligned: {} vs {} frames",
            pred.len(),
            reference.len()
        )));
    }
    let mut out = Vec::with_capacity(stages.len());
    for (s, &(start, end)) in stages.iter().enumerate() {
        if start > end || end >= pred.len() {
            return Err(Error::FrameOutOfRange {
                frame: end,
                frames: pred.len(),
            });
        }
        let mut per_frame = Vec::with_capacity(end - start + 1);
        for t in start..=end {
            let (u_mse, v_mse) = mse(&pred[t], &reference[t])?;
            per_frame.push(FrameMetrics {
                frame: t,
                u_mse,
                v_mse,
                div_mse: divergence_error(&pred[t]),
            });
        }
        let stat = |f: fn(&FrameMetrics) -> f64| -> (f64, f64) {
            let n = per_frame.len() as f64;
            let mean = per_frame.iter().map(f).sum::<f64>() / n;
            let var = per_frame
                .iter()
                .map(|m| (f(m) - mean) * (f(m) - mean))
                .sum::<f64>()
                / n;
            (mean, var.sqrt())
        };
        let (u_mean, u_std) = stat(|m| m.u_mse);
        let (v_mean, v_std) = stat(|m| m.v_mse);
        let (d_mean, d_std) = stat(|m| m.div_mse);
        out.push(StageReport {
            label: stage_label(s),
            frame_range: (start, end),
            u_mse: u_mean,
            v_mse: v_mean,
            div_mse: d_mean,
            u_mse_std: u_std,
            v_mse_std: v_std,
            div_mse_std: d_std,
            per_frame,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::hodge::leray_project;
    use crate::noise::{sample_divfree_noise_frame, StreamNoiseSpec};
    use crate::solver::taylor_green_velocity;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_vector(grid: Grid, seed: u64) -> VectorField2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Array2::from_shape_fn(grid.shape(), |_| rng.random::<f64>() - 0.5);
        let v = Array2::from_shape_fn(grid.shape(), |_| rng.random::<f64>() - 0.5);
        VectorField2::from_arrays(grid, u, v).unwrap()
    }

    #[test]
    fn mse_examples() {
        let grid = Grid::new(16).unwrap();
        let a = random_vector(grid, 1);
        assert_eq!(mse(&a, &a).unwrap(), (0.0, 0.0));

        let shifted =
            VectorField2::from_arrays(grid, a.u() + 0.1, a.v().clone()).unwrap();
        let (mu, mv) = mse(&shifted, &a).unwrap();
        assert!((mu - 0.01).abs() < 1e-14);
        assert_eq!(mv, 0.0);

        // naive loop oracle
        let b = random_vector(grid, 2);
        let (mu, mv) = mse(&a, &b).unwrap();
        let mut su = 0.0;
        let mut sv = 0.0;
        for j in 0..16 {
            for i in 0..16 {
                su += (a.u()[(j, i)] - b.u()[(j, i)]).powi(2);
                sv += (a.v()[(j, i)] - b.v()[(j, i)]).powi(2);
            }
        }
        assert!((mu - su / 256.0).abs() < 1e-14);
        assert!((mv - sv / 256.0).abs() < 1e-14);

        let other = Grid::new(8).unwrap();
        assert!(mse(&a, &random_vector(other, 3)).is_err());
    }

    #[test]
    fn divergence_error_examples() {
        let grid = Grid::new(32).unwrap();
        let sol = sample_divfree_noise_frame(&StreamNoiseSpec::default(), grid, 0);
        assert!(divergence_error(&sol) <= 1e-24);

        // u = ∇q, q = sin(2πx): mean (Δq)² = mean (4π² sin)² = 8π⁴
        let grad = VectorField2::from_fn(grid, |x, _| (2.0 * PI * (2.0 * PI * x).cos(), 0.0));
        let d = divergence_error(&grad);
        let expect = 8.0 * PI.powi(4);
        assert!((d - expect).abs() <= 1e-8 * expect, "{d} vs {expect}");

        // projection can only reduce the divergence error
        let w = random_vector(grid, 5);
        assert!(divergence_error(&leray_project(&w)) <= divergence_error(&w));
    }

    #[test]
    fn pressure_of_zero_is_zero() {
        let grid = Grid::new(16).unwrap();
        let (p, warned) = pressure_reconstruct_checked(&VectorField2::zeros(grid));
        assert!(!warned);
        assert_eq!(p.norm_l2(), 0.0);
    }

    #[test]
    fn taylor_green_pressure() {
        let grid = Grid::new(64).unwrap();
        // phase convention (cos·sin, −sin·cos), whose analytic pressure is
        // −¼(cos 4πx + cos 4πy)
        let u = VectorField2::from_fn(grid, |x, y| {
            (
                (2.0 * PI * x).cos() * (2.0 * PI * y).sin(),
                -(2.0 * PI * x).sin() * (2.0 * PI * y).cos(),
            )
        });
        let (p, warned) = pressure_reconstruct_checked(&u);
        assert!(!warned);
        let expect = ScalarField::from_fn(grid, |x, y| {
            -0.25 * ((4.0 * PI * x).cos() + (4.0 * PI * y).cos())
        });
        let rel = p.sub(&expect).norm_l2() / expect.norm_l2();
        assert!(rel <= 1e-8, "pressure error {rel}");

        // the solver's phase convention (sin·cos, −cos·sin) flips the sign
        let u2 = taylor_green_velocity(grid, 1.0);
        let (p2, _) = pressure_reconstruct_checked(&u2);
        let rel2 = p2.add(&expect).norm_l2() / expect.norm_l2();
        assert!(rel2 <= 1e-8, "pressure error {rel2}");
    }

    #[test]
    fn divergent_input_trips_the_warning_path() {
        let grid = Grid::new(16).unwrap();
        let sol = sample_divfree_noise_frame(&StreamNoiseSpec::default(), grid, 1);
        let grad = VectorField2::from_fn(grid, |x, _| (2.0 * PI * (2.0 * PI * x).cos(), 0.0));
        let noisy = sol.add(&grad.scaled(0.05));
        let (_, warned) = pressure_reconstruct_checked(&noisy);
        assert!(warned);
        let (p_clean, _) = pressure_reconstruct_checked(&sol);
        let (p_noisy, _) = pressure_reconstruct_checked(&noisy);
        // no equality contract; the reconstructions genuinely differ
        assert!(p_clean.sub(&p_noisy).norm_l2() > 0.0);
    }

    #[test]
    fn single_mode_lands_in_its_shell() {
        let grid = Grid::new(16).unwrap();
        // ω concentrated at k = (3, 0): u = ∇⊥ψ, ψ = sin(6πx)
        let psi = ScalarField::from_fn(grid, |x, _| (6.0 * PI * x).sin());
        let u = crate::spectral::curl_perp(&psi);
        let curve = enstrophy_spectrum(&u);
        for (shell, value) in curve.shells.iter().zip(&curve.values) {
            if *shell == 3 {
                assert!(*value > 0.0);
            } else {
                assert!(value.abs() < 1e-20, "shell {shell} leaked {value}");
            }
        }
    }

    #[test]
    fn white_noise_shells_follow_mode_counts() {
        let grid = Grid::new(32).unwrap();
        let n_avg = 400;
        let mut acc = vec![0.0; 16];
        for seed in 0..n_avg {
            // white-noise vorticity realized through its exact velocity field
            let omega = random_scalar_zero_mean(grid, 900 + seed);
            let u = crate::solver::velocity_from_vorticity(&omega);
            let curve = enstrophy_spectrum(&u);
            for (i, v) in curve.values.iter().enumerate() {
                acc[i] += v / n_avg as f64;
            }
        }
        // mode counts per shell, Nyquist rows excluded as in the transform
        let table = grid.wavenumbers();
        let mut counts = vec![0usize; 16];
        for &ky in &table.ky {
            for &kx in &table.kx {
                if kx == -16 || ky == -16 || (kx == 0 && ky == 0) {
                    continue;
                }
                let shell = (((kx * kx + ky * ky) as f64).sqrt() + 0.5).floor() as usize;
                if (1..=15).contains(&shell) {
                    counts[shell] += 1;
                }
            }
        }
        // compare value/count ratios across mid shells
        let ratios: Vec<f64> = (3..12)
            .map(|s| acc[s - 1] / counts[s] as f64)
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        for r in &ratios {
            assert!(
                (r - mean).abs() / mean < 0.10,
                "shell density not proportional to mode count: {ratios:?}"
            );
        }
    }

    fn random_scalar_zero_mean(grid: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Array2::from_shape_fn(grid.shape(), |_| rng.random::<f64>() - 0.5);
        let mean = values.mean().unwrap();
        values.mapv_inplace(|v| v - mean);
        ScalarField::from_array(grid, values).unwrap()
    }

    #[test]
    fn shell_totals_reproduce_direct_enstrophy() {
        let grid = Grid::new(32).unwrap();
        // dealiased vorticity, as the solver produces: all modes fall inside
        // the binned shells and the Parseval bookkeeping is exact
        let omega = crate::noise::sample_grf_scalar(&crate::noise::GrfSpec::default(), grid);
        let mut omega_hat = crate::spectral::forward_fft2(&omega).into_coeffs();
        dealias_in_place(&mut omega_hat, grid);
        let omega = crate::spectral::inverse_fft2(
            &crate::spectral::SpectralField::from_coeffs(grid, omega_hat).unwrap(),
        );
        let u = crate::solver::velocity_from_vorticity(&omega);
        let direct = 0.5 * curl_scalar(&u).norm_l2().powi(2);
        let total: f64 = enstrophy_spectrum(&u).values.iter().sum();
        assert!(
            (total - direct).abs() <= 1e-10 * direct,
            "shell total {total} vs direct {direct}"
        );
    }

    #[test]
    fn slope_of_exact_power_law() {
        let curve = SpectrumCurve {
            shells: (1..=16).collect(),
            values: (1..=16).map(|k| (k as f64).powi(-3)).collect(),
        };
        let slope = spectral_slope(&curve, 2, 14).unwrap();
        assert!((slope + 3.0).abs() <= 1e-10);

        // scale invariance
        let scaled = SpectrumCurve {
            shells: curve.shells.clone(),
            values: curve.values.iter().map(|v| 42.0 * v).collect(),
        };
        let slope2 = spectral_slope(&scaled, 2, 14).unwrap();
        assert!((slope - slope2).abs() <= 1e-12);
    }

    #[test]
    fn slope_rejects_nonpositive_values() {
        let curve = SpectrumCurve {
            shells: (1..=8).collect(),
            values: vec![1.0, 0.5, 0.0, 0.1, 0.1, 0.1, 0.1, 0.1],
        };
        assert!(spectral_slope(&curve, 1, 8).is_err());
    }

    #[test]
    fn stage_report_examples() {
        let grid = Grid::new(16).unwrap();
        let frames: Vec<VectorField2> = (0..10)
            .map(|f| sample_divfree_noise_frame(&StreamNoiseSpec::default(), grid, f))
            .collect();

        // pred == ref: MSEs vanish, divergence column is the data's own
        let reports = stage_report(&frames, &frames, &[(0, 4), (5, 9)]).unwrap();
        for r in &reports {
            assert_eq!(r.u_mse, 0.0);
            assert_eq!(r.v_mse, 0.0);
            assert!(r.div_mse <= 1e-24);
        }
        assert_eq!(reports[0].label, "prediction");
        assert_eq!(reports[1].label, "short_term");

        // single-frame stage has zero std
        let single = stage_report(&frames, &frames, &[(3, 3)]).unwrap();
        assert_eq!(single[0].u_mse_std, 0.0);
        assert_eq!(single[0].div_mse_std, 0.0);

        // out-of-range stage errors
        assert!(stage_report(&frames, &frames, &[(0, 10)]).is_err());
    }

    #[test]
    fn pooled_moments_recombine() {
        let grid = Grid::new(16).unwrap();
        let pred: Vec<VectorField2> = (0..8)
            .map(|f| sample_divfree_noise_frame(&StreamNoiseSpec::default(), grid, f))
            .collect();
        let reference: Vec<VectorField2> = (100..108)
            .map(|f| sample_divfree_noise_frame(&StreamNoiseSpec::default(), grid, f))
            .collect();
        let whole = stage_report(&pred, &reference, &[(0, 7)]).unwrap();
        let split = stage_report(&pred, &reference, &[(0, 2), (3, 7)]).unwrap();

        let n1 = 3.0;
        let n2 = 5.0;
        let n = 8.0;
        let mean = (n1 * split[0].u_mse + n2 * split[1].u_mse) / n;
        assert!((mean - whole[0].u_mse).abs() <= 1e-14 * whole[0].u_mse.max(1e-30));
        // pooled second moment
        let m2 = |r: &StageReport| r.u_mse_std.powi(2) + r.u_mse.powi(2);
        let pooled_m2 = (n1 * m2(&split[0]) + n2 * m2(&split[1])) / n;
        let whole_m2 = m2(&whole[0]);
        assert!((pooled_m2 - whole_m2).abs() <= 1e-14 * whole_m2.max(1e-30));
    }
}
