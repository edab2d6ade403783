//! Helmholtz–Hodge decomposition and the spectral Leray projector.
//!
//! Periodic vector fields split orthogonally into a solenoidal
//! (divergence-free, zero-mean) part and a gradient part. In Fourier space
//! the split is algebraic: mode `k ≠ 0` of the field decomposes along `k`
//! (gradient direction) and `k⊥` (solenoidal direction). The Leray projector
//! keeps the `k⊥` component and zeroes the mean mode, which also pins the
//! decomposition uniquely.
//!
//! The projector matrix `I − k kᵀ / ‖k‖²` is scale-free, so integer
//! wavenumbers are used directly. Nyquist rows (`k = −N/2` on either axis)
//! are zeroed rather than projected: first derivatives of real fields
//! annihilate them, so solenoidal content parked there would be invisible to
//! the divergence operator while breaking the machine-precision divergence
//! guarantee. With the mask the operator remains an exact orthogonal
//! projection (idempotent, self-adjoint, contractive) onto the representable
//! solenoidal subspace.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, VectorField2};
use crate::spectral::{curl_scalar, divergence, forward_fft2};

/// Result of [`helmholtz_decompose`]: `input = solenoidal + ∇potential + mean`.
#[derive(Debug, Clone)]
pub struct HodgeParts {
    /// Divergence-free, zero-mean part (the Leray projection of the input).
    pub solenoidal: VectorField2,
    /// Zero-mean scalar potential whose gradient is the irrotational part.
    pub potential: ScalarField,
}

/// L²-orthogonal projection onto divergence-free, zero-mean fields.
///
/// For every retained mode `k ≠ 0` the component along `k` is removed:
/// `ŵ ← ŵ − (k·ŵ / ‖k‖²) k`; the `k = 0` mode and the Nyquist rows are set
/// to zero. The output is the closest representable divergence-free field in
/// the L² sense, and its spectral divergence vanishes to machine precision.
pub fn leray_project(w: &VectorField2) -> VectorField2 {
    let grid = w.grid();
    let mut u_hat = fft::fft2_real(w.u());
    let mut v_hat = fft::fft2_real(w.v());
    project_coeffs(&mut u_hat, &mut v_hat, grid, None);
    VectorField2::from_arrays(grid, fft::ifft2_real(&u_hat), fft::ifft2_real(&v_hat))
        .expect("shape preserved")
}

/// Per-mode projection; optionally captures `α(k) = k·ŵ / ‖k‖²`.
fn project_coeffs(
    u_hat: &mut Array2<Complex64>,
    v_hat: &mut Array2<Complex64>,
    grid: crate::grid::Grid,
    mut alpha_out: Option<&mut Array2<Complex64>>,
) {
    let table = grid.wavenumbers();
    let (ny, nx) = grid.shape();
    let nyq_x = -((nx / 2) as i64);
    let nyq_y = -((ny / 2) as i64);
    let zero = Complex64::new(0.0, 0.0);
    for j in 0..ny {
        let ky = table.ky[j] as f64;
        for i in 0..nx {
            let kx = table.kx[i] as f64;
            if (table.kx[i] == 0 && table.ky[j] == 0)
                || table.kx[i] == nyq_x
                || table.ky[j] == nyq_y
            {
                u_hat[(j, i)] = zero;
                v_hat[(j, i)] = zero;
                continue;
            }
            let k2 = kx * kx + ky * ky;
            let alpha = (u_hat[(j, i)] * kx + v_hat[(j, i)] * ky) / k2;
            u_hat[(j, i)] -= alpha * kx;
            v_hat[(j, i)] -= alpha * ky;
            if let Some(alpha_arr) = alpha_out.as_deref_mut() {
                alpha_arr[(j, i)] = alpha;
            }
        }
    }
}

/// Split a field into its solenoidal part and a scalar potential.
///
/// The potential solves `Δq = ∇·w` spectrally with `q̂(0) = 0`, so that
/// `solenoidal + ∇q + mean(w)` reconstructs the input (exactly for fields
/// without Nyquist-row content; Nyquist gradient content has no real
/// antiderivative on the grid).
pub fn helmholtz_decompose(w: &VectorField2) -> HodgeParts {
    let grid = w.grid();
    let mut u_hat = fft::fft2_real(w.u());
    let mut v_hat = fft::fft2_real(w.v());
    let mut alpha = Array2::from_elem(grid.shape(), Complex64::new(0.0, 0.0));
    project_coeffs(&mut u_hat, &mut v_hat, grid, Some(&mut alpha));

    // Gradient part is α·k per mode; its potential has q̂ = −i α L / (2π),
    // since (∇q)^ = i (2π k / L) q̂ must equal α k.
    let q_scale = Complex64::new(0.0, -grid.length() / (2.0 * std::f64::consts::PI));
    alpha.mapv_inplace(|a| a * q_scale);
    let potential =
        ScalarField::from_array(grid, fft::ifft2_real(&alpha)).expect("shape preserved");
    let solenoidal =
        VectorField2::from_arrays(grid, fft::ifft2_real(&u_hat), fft::ifft2_real(&v_hat))
            .expect("shape preserved");
    HodgeParts {
        solenoidal,
        potential,
    }
}

/// `‖∇·u‖ / ‖u‖`, the relative divergence used by solenoidality gates.
pub fn relative_divergence(u: &VectorField2) -> f64 {
    let norm = u.norm_l2();
    if norm == 0.0 {
        return 0.0;
    }
    divergence(u).norm_l2() / norm
}

/// Recover the zero-mean stream function of a divergence-free field.
///
/// Solves `−Δψ = ω` with `ω = ∇×u`, so that `curl_perp(ψ) = u`. Errors with
/// [`Error::NotSolenoidal`] when the input's relative divergence exceeds 1e−8.
pub fn stream_function_of(u: &VectorField2) -> Result<ScalarField> {
    const TOL: f64 = 1e-8;
    let rel = relative_divergence(u);
    if rel > TOL {
        return Err(Error::NotSolenoidal {
            relative_divergence: rel,
            tolerance: TOL,
        });
    }
    let grid = u.grid();
    let omega_hat = forward_fft2(&curl_scalar(u));
    let table = grid.wavenumbers();
    let mut psi_hat = omega_hat.into_coeffs();
    for ((j, i), c) in psi_hat.indexed_iter_mut() {
        let k2 = table.k2_physical(j, i, grid.length());
        if k2 == 0.0 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= k2;
        }
    }
    Ok(ScalarField::from_array(grid, fft::ifft2_real(&psi_hat)).expect("shape preserved"))
}
