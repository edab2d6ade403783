//! Finite-dimensional marginal velocity field over a weighted data set.
//!
//! On a small grid the noise measure is an explicit Gaussian: in the
//! orthonormal solenoidal basis `{√2 e_k cos, √2 e_k sin}` its covariance is
//! diagonal with per-coordinate variance λ(k). Conditioned on a data sample
//! `y`, the path state at time τ is Gaussian with mean `τy` and covariance
//! `σ_τ² λ`. The marginal velocity is the density-ratio-weighted average of
//! the conditional velocities,
//!
//! `v_τ(x) = Σ_j π_j w_τ(x, y_j) v_τ^{y_j}(x)`,
//!
//! with `w_τ(x, y) = p(x | y) / Σ_l π_l p(x | y_l)` computed from Gaussian
//! log-densities via log-sum-exp. For a point mass the weight is exactly 1
//! and the marginal field coincides with the conditional one.

use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::flowmatch::{conditional_velocity, PathSpec};
use crate::grid::Grid;
use crate::hodge::relative_divergence;
use crate::noise::{canonical_modes, divfree_noise_coordinate_variances, GrfSpec};
use crate::{fft, noise::ModePair};

const GRID_LIMIT: usize = 16;
const VARIANCE_FLOOR: f64 = 1e-30;
const EXCLUDED_MASS_TOL: f64 = 1e-10;
const SOLENOIDAL_TOL: f64 = 1e-6;

/// Marginal velocity field of the finite-dimensional mixture path.
///
/// `data` carries probability weights that must sum to 1; `noise` fixes the
/// covariance spectrum of the reference measure (the spectral noise law).
/// Only grids up to 16×16 are accepted: the density computation is dense in
/// the mode basis and exists as an oracle, not a production path.
pub fn marginal_velocity_finite(
    spec: &PathSpec,
    data: &[(VectorField2, f64)],
    x: &VectorField2,
    tau: f64,
    noise: &GrfSpec,
) -> Result<VectorField2> {
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let grid = x.grid();
    if grid.n_x() > GRID_LIMIT || grid.n_y() > GRID_LIMIT {
        return Err(Error::GridTooLarge {
            n_x: grid.n_x(),
            n_y: grid.n_y(),
            limit: GRID_LIMIT,
        });
    }
    for (y, _) in data {
        if y.grid() != grid {
            return Err(Error::GridMismatch);
        }
    }
    let weight_sum: f64 = data.iter().map(|(_, w)| w).sum();
    if (weight_sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSolverConfig(format!(
            "data weights must sum to 1, got {weight_sum}"
        )));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    let sigma = spec.sigma(tau);
    if sigma <= f64::EPSILON {
        return Err(Error::DegenerateSchedule {
            tau,
            sigma_tau: sigma,
        });
    }

    let rel = relative_divergence(x);
    if rel > SOLENOIDAL_TOL {
        return Err(Error::NotSolenoidal {
            relative_divergence: rel,
            tolerance: SOLENOIDAL_TOL,
        });
    }
    for (y, _) in data {
        let rel = relative_divergence(y);
        if rel > SOLENOIDAL_TOL {
            return Err(Error::NotSolenoidal {
                relative_divergence: rel,
                tolerance: SOLENOIDAL_TOL,
            });
        }
    }

    let modes = canonical_modes(grid);
    let variances: Vec<f64> = divfree_noise_coordinate_variances(noise, grid)
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    debug_assert_eq!(modes.len(), variances.len());

    let x_coords = solenoidal_coordinates(x, &modes)?;
    let sigma2 = sigma * sigma;

    // log p(x | y_j) up to a shared constant
    let mut log_weights = Vec::with_capacity(data.len());
    for (y, pi) in data {
        let y_coords = solenoidal_coordinates(y, &modes)?;
        let mut logp = 0.0;
        for i in 0..modes.len() {
            let lam = variances[i];
            if lam < VARIANCE_FLOOR {
                let mode = modes[i];
                let dc = x_coords[2 * i] - tau * y_coords[2 * i];
                let ds = x_coords[2 * i + 1] - tau * y_coords[2 * i + 1];
                if dc.abs() > EXCLUDED_MASS_TOL || ds.abs() > EXCLUDED_MASS_TOL {
                    return Err(Error::SingularCovariance {
                        kx: mode.kx,
                        ky: mode.ky,
                    });
                }
                continue;
            }
            let dc = x_coords[2 * i] - tau * y_coords[2 * i];
            let ds = x_coords[2 * i + 1] - tau * y_coords[2 * i + 1];
            logp -= 0.5 * (dc * dc + ds * ds) / (sigma2 * lam);
        }
        logp += pi.ln();
        log_weights.push(logp);
    }

    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ratios: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let denom: f64 = ratios.iter().sum();

    let fields: Vec<VectorField2> = data
        .iter()
        .map(|(y, _)| conditional_velocity(spec, x, y, tau))
        .collect::<Result<_>>()?;
    let terms: Vec<(f64, &VectorField2)> = ratios
        .iter()
        .zip(&fields)
        .map(|(r, f)| (r / denom, f))
        .collect();
    Ok(VectorField2::linear_combination(&terms))
}

/// Coordinates of a field in the orthonormal solenoidal basis, with a check
/// that no L² mass sits outside the retained modes (zero mode, Nyquist rows,
/// and gradient directions all count as excluded).
fn solenoidal_coordinates(w: &VectorField2, modes: &[ModePair]) -> Result<Vec<f64>> {
    let grid: Grid = w.grid();
    let n2 = (grid.n_x() * grid.n_y()) as f64;
    let u_hat = fft::fft2_real(w.u());
    let v_hat = fft::fft2_real(w.v());
    let sqrt2 = std::f64::consts::SQRT_2;

    let mut coords = Vec::with_capacity(2 * modes.len());
    let mut explained = 0.0;
    for mode in modes {
        let knorm = ((mode.kx * mode.kx + mode.ky * mode.ky) as f64).sqrt();
        // e_k = k⊥ / ‖k‖ with k⊥ = (−k_y, k_x)
        let ex = -(mode.ky as f64) / knorm;
        let ey = mode.kx as f64 / knorm;
        let a = (u_hat[mode.idx] * ex + v_hat[mode.idx] * ey) / n2;
        let c = sqrt2 * a.re;
        let s = -sqrt2 * a.im;
        explained += c * c + s * s;
        coords.push(c);
        coords.push(s);
    }

    let total = w.norm_l2().powi(2);
    let excluded = total - explained;
    if total > 0.0 && excluded > EXCLUDED_MASS_TOL * total {
        // locate the worst offender for the error message
        let table = grid.wavenumbers();
        let mut worst = ((0i64, 0i64), 0.0f64);
        for ((j, i), c) in u_hat.indexed_iter() {
            let mass = c.norm_sqr() + v_hat[(j, i)].norm_sqr();
            let retained = modes
                .iter()
                .any(|m| m.idx == (j, i) || m.conj_idx == (j, i));
            if !retained && mass > worst.1 {
                worst = ((table.kx[i], table.ky[j]), mass);
            }
        }
        return Err(Error::SingularCovariance {
            kx: worst.0 .0,
            ky: worst.0 .1,
        });
    }
    Ok(coords)
}
