//! Spectral calculus on the periodic grid: transforms, derivatives,
//! divergence, curls, dealiasing, and L² inner products.
//!
//! Conventions, fixed once here and relied on everywhere else:
//!
//! * The forward transform is the unnormalized DFT; the inverse carries the
//!   full `1/(n_x n_y)` factor, so `inverse(forward(f)) = f` to rounding.
//! * Wavenumbers are stored as integers (see [`crate::grid::WavenumberTable`]);
//!   differentiation multiplies by `(i 2π k / L)^order`.
//! * Odd-order derivatives zero the Nyquist mode `k = −N/2` of their axis.
//!   A real field stays real under differentiation, at the price of
//!   annihilating Nyquist content; smooth (band-limited) fields are
//!   reproduced exactly.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, VectorField2};
use crate::grid::Grid;

/// Complex Fourier coefficients of a scalar field, in DFT layout.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Array2<Complex64>,
}

impl SpectralField {
    pub fn from_coeffs(grid: Grid, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                got: coeffs.dim(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: Array2::zeros(grid.shape()),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }
}

/// Unnormalized forward DFT of a real scalar field.
pub fn forward_fft2(f: &ScalarField) -> SpectralField {
    SpectralField {
        grid: f.grid(),
        coeffs: fft::fft2_real(f.values()),
    }
}

/// Inverse DFT back to a real field (imaginary residue dropped).
pub fn inverse_fft2(f: &SpectralField) -> ScalarField {
    ScalarField::from_array(f.grid, fft::ifft2_real(&f.coeffs)).expect("shape preserved")
}

/// Spatial axis selector for per-axis spectral operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis2 {
    X,
    Y,
}

/// Multiply coefficients by `(i 2π k / L)^order` along one axis.
///
/// Supports orders 1 and 2. Odd orders zero the Nyquist mode so that real
/// fields stay real under the inverse transform.
pub fn spectral_derivative(f: &SpectralField, axis: Axis2, order: u32) -> Result<SpectralField> {
    if order != 1 && order != 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut out = f.clone();
    derivative_in_place(&mut out, axis, order);
    Ok(out)
}

pub(crate) fn derivative_in_place(f: &mut SpectralField, axis: Axis2, order: u32) {
    let grid = f.grid;
    let table = grid.wavenumbers();
    let scale = 2.0 * std::f64::consts::PI / grid.length();
    let (ks, nyquist) = match axis {
        Axis2::X => (&table.kx, -((grid.n_x() / 2) as i64)),
        Axis2::Y => (&table.ky, -((grid.n_y() / 2) as i64)),
    };
    let factors: Vec<Complex64> = ks
        .iter()
        .map(|&k| {
            if order % 2 == 1 && k == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, scale * k as f64).powu(order)
            }
        })
        .collect();
    match axis {
        Axis2::X => {
            for ((_, i), c) in f.coeffs.indexed_iter_mut() {
                *c *= factors[i];
            }
        }
        Axis2::Y => {
            for ((j, _), c) in f.coeffs.indexed_iter_mut() {
                *c *= factors[j];
            }
        }
    }
}

/// `∂_x u + ∂_y v`, computed spectrally.
pub fn divergence(w: &VectorField2) -> ScalarField {
    let grid = w.grid();
    let mut u_hat = fft::fft2_real(w.u());
    let mut v_hat = fft::fft2_real(w.v());
    apply_first_derivative(&mut u_hat, grid, Axis2::X);
    apply_first_derivative(&mut v_hat, grid, Axis2::Y);
    let sum = u_hat + v_hat;
    ScalarField::from_array(grid, fft::ifft2_real(&sum)).expect("shape preserved")
}

/// Scalar curl `∂_x v − ∂_y u`, computed spectrally.
pub fn curl_scalar(w: &VectorField2) -> ScalarField {
    let grid = w.grid();
    let mut v_hat = fft::fft2_real(w.v());
    let mut u_hat = fft::fft2_real(w.u());
    apply_first_derivative(&mut v_hat, grid, Axis2::X);
    apply_first_derivative(&mut u_hat, grid, Axis2::Y);
    let diff = v_hat - u_hat;
    ScalarField::from_array(grid, fft::ifft2_real(&diff)).expect("shape preserved")
}

/// Perpendicular gradient `∇⊥ψ = (∂_y ψ, −∂_x ψ)`.
///
/// The output is divergence-free and zero-mean by construction: it is the
/// velocity field whose stream function is `ψ`.
pub fn curl_perp(psi: &ScalarField) -> VectorField2 {
    let grid = psi.grid();
    let psi_hat = fft::fft2_real(psi.values());
    let mut u_hat = psi_hat.clone();
    let mut v_hat = psi_hat;
    apply_first_derivative(&mut u_hat, grid, Axis2::Y);
    apply_first_derivative(&mut v_hat, grid, Axis2::X);
    v_hat.mapv_inplace(|c| -c);
    VectorField2::from_arrays(grid, fft::ifft2_real(&u_hat), fft::ifft2_real(&v_hat))
        .expect("shape preserved")
}

/// First derivative along `axis` in coefficient space, Nyquist mode zeroed.
pub(crate) fn apply_first_derivative(coeffs: &mut Array2<Complex64>, grid: Grid, axis: Axis2) {
    let table = grid.wavenumbers();
    let scale = 2.0 * std::f64::consts::PI / grid.length();
    match axis {
        Axis2::X => {
            let nyq = -((grid.n_x() / 2) as i64);
            let factors: Vec<Complex64> = table
                .kx
                .iter()
                .map(|&k| {
                    if k == nyq {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, scale * k as f64)
                    }
                })
                .collect();
            for ((_, i), c) in coeffs.indexed_iter_mut() {
                *c *= factors[i];
            }
        }
        Axis2::Y => {
            let nyq = -((grid.n_y() / 2) as i64);
            let factors: Vec<Complex64> = table
                .ky
                .iter()
                .map(|&k| {
                    if k == nyq {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, scale * k as f64)
                    }
                })
                .collect();
            for ((j, _), c) in coeffs.indexed_iter_mut() {
                *c *= factors[j];
            }
        }
    }
}

/// Zero every mode with `3 |k_x| > n_x` or `3 |k_y| > n_y` (the 2/3 rule).
/// Idempotent.
pub fn dealias_two_thirds(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(out.coeffs_mut(), f.grid);
    out
}

pub(crate) fn dealias_in_place(coeffs: &mut Array2<Complex64>, grid: Grid) {
    let table = grid.wavenumbers();
    let (nx, ny) = (grid.n_x() as i64, grid.n_y() as i64);
    for ((j, i), c) in coeffs.indexed_iter_mut() {
        if 3 * table.kx[i].abs() > nx || 3 * table.ky[j].abs() > ny {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// L² inner product `Σ (a·b) h_x h_y` of two vector fields on one grid.
pub fn l2_inner(a: &VectorField2, b: &VectorField2) -> f64 {
    assert_eq!(a.grid(), b.grid(), "fields live on different grids");
    let sum: f64 = a
        .u()
        .iter()
        .zip(b.u().iter())
        .chain(a.v().iter().zip(b.v().iter()))
        .map(|(x, y)| x * y)
        .sum();
    sum * a.grid().cell_area()
}

/// L² inner product of two scalar fields.
pub fn l2_inner_scalar(a: &ScalarField, b: &ScalarField) -> f64 {
    assert_eq!(a.grid(), b.grid(), "fields live on different grids");
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| x * y)
        .sum();
    sum * a.grid().cell_area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_scalar(grid: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = Array2::from_shape_fn(grid.shape(), |_| rng.random::<f64>() - 0.5);
        ScalarField::from_array(grid, values).unwrap()
    }

    fn random_vector(grid: Grid, seed: u64) -> VectorField2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let u = Array2::from_shape_fn(grid.shape(), |_| rng.random::<f64>() - 0.5);
        let v = Array2::from_shape_fn(grid.shape(), |_| rng.random::<f64>() - 0.5);
        VectorField2::from_arrays(grid, u, v).unwrap()
    }

    /// Naive O(N^4) DFT, the independent transform oracle.
    fn naive_dft(f: &ScalarField) -> Array2<Complex64> {
        let (ny, nx) = f.grid().shape();
        let mut out = Array2::from_elem((ny, nx), Complex64::new(0.0, 0.0));
        for kj in 0..ny {
            for ki in 0..nx {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..ny {
                    for i in 0..nx {
                        let phase = -2.0 * PI * (ki * i) as f64 / nx as f64
                            - 2.0 * PI * (kj * j) as f64 / ny as f64;
                        acc += f.values()[(j, i)] * Complex64::new(phase.cos(), phase.sin());
                    }
                }
                out[(kj, ki)] = acc;
            }
        }
        out
    }

    #[test]
    fn constant_field_has_dc_only_spectrum() {
        let grid = Grid::new(8).unwrap();
        let f = ScalarField::from_fn(grid, |_, _| 2.5);
        let hat = forward_fft2(&f);
        assert!((hat.coeffs()[(0, 0)].re - 2.5 * 64.0).abs() < 1e-10);
        assert!(hat.coeffs()[(0, 0)].im.abs() < 1e-10);
        for ((j, i), c) in hat.coeffs().indexed_iter() {
            if (j, i) != (0, 0) {
                assert!(c.norm() < 1e-10, "mode ({j},{i}) = {c}");
            }
        }
    }

    #[test]
    fn cosine_spectrum_matches_naive_dft() {
        let grid = Grid::new(8).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| (2.0 * PI * x).cos());
        let hat = forward_fft2(&f);
        // cos(2πx) puts n_x n_y / 2 at k = (±1, 0).
        assert!((hat.coeffs()[(0, 1)].re - 32.0).abs() < 1e-10);
        assert!((hat.coeffs()[(0, 7)].re - 32.0).abs() < 1e-10);
        let oracle = naive_dft(&f);
        for (a, b) in hat.coeffs().iter().zip(oracle.iter()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn round_trip_and_parseval_on_random_fields() {
        for (seed, n) in [(1u64, 8usize), (2, 16), (3, 64)] {
            for rep in 0..100 {
                let grid = Grid::new(n).unwrap();
                let f = random_scalar(grid, seed * 1000 + rep);
                let hat = forward_fft2(&f);
                let back = inverse_fft2(&hat);
                let err = back.sub(&f).norm_l2() / f.norm_l2();
                assert!(err < 1e-12, "round trip error {err}");

                let phys: f64 =
                    f.values().iter().map(|v| v * v).sum::<f64>() * grid.cell_area();
                let spec: f64 = hat.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
                    / (n * n) as f64
                    * grid.cell_area();
                assert!((phys - spec).abs() / phys < 1e-12, "Parseval violated");
            }
        }
    }

    #[test]
    fn derivative_of_sine_is_scaled_cosine() {
        let grid = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| (2.0 * PI * x).sin());
        let df = inverse_fft2(&spectral_derivative(&forward_fft2(&f), Axis2::X, 1).unwrap());
        let expect = ScalarField::from_fn(grid, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
        let err = df.sub(&expect).max_abs();
        assert!(err < 1e-10, "pointwise error {err}");
    }

    #[test]
    fn laplacian_eigenfunction() {
        let grid = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
        let hat = forward_fft2(&f);
        let dxx = spectral_derivative(&hat, Axis2::X, 2).unwrap();
        let dyy = spectral_derivative(&hat, Axis2::Y, 2).unwrap();
        let lap = inverse_fft2(
            &SpectralField::from_coeffs(grid, dxx.coeffs() + dyy.coeffs()).unwrap(),
        );
        let expect = f.scaled(-8.0 * PI * PI);
        assert!(lap.sub(&expect).max_abs() < 1e-8);
    }

    #[test]
    fn derivative_order_three_rejected() {
        let grid = Grid::new(8).unwrap();
        let hat = forward_fft2(&ScalarField::zeros(grid));
        assert!(matches!(
            spectral_derivative(&hat, Axis2::X, 3),
            Err(Error::UnsupportedOrder(3))
        ));
    }

    #[test]
    fn spectral_derivative_matches_fourth_order_differences() {
        // Single mode sin(2π m x): the centered 4th-order stencil has relative
        // error θ⁴/30 + O(θ⁶) with θ = 2π m h. Check the magnitude at 128² and
        // the 16× shrink from 64² to 128².
        let m = 5.0;
        let mut errs = Vec::new();
        for n in [64usize, 128] {
            let grid = Grid::new(n).unwrap();
            let f = ScalarField::from_fn(grid, |x, _| (2.0 * PI * m * x).sin());
            let df = inverse_fft2(&spectral_derivative(&forward_fft2(&f), Axis2::X, 1).unwrap());
            let h = grid.spacing().0;
            let vals = f.values();
            let mut max_err = 0.0_f64;
            for j in 0..n {
                for i in 0..n {
                    let ip1 = (i + 1) % n;
                    let ip2 = (i + 2) % n;
                    let im1 = (i + n - 1) % n;
                    let im2 = (i + n - 2) % n;
                    let fd = (-vals[(j, ip2)] + 8.0 * vals[(j, ip1)] - 8.0 * vals[(j, im1)]
                        + vals[(j, im2)])
                        / (12.0 * h);
                    max_err = max_err.max((fd - df.values()[(j, i)]).abs());
                }
            }
            let theta = 2.0 * PI * m * h;
            let predicted = 2.0 * PI * m * theta.powi(4) / 30.0;
            assert!(
                max_err < 1.2 * predicted,
                "n={n}: FD4 disagreement {max_err} exceeds O(h^4) bound {predicted}"
            );
            errs.push(max_err);
        }
        let ratio = errs[0] / errs[1];
        assert!((ratio - 16.0).abs() < 3.0, "not 4th order: ratio {ratio}");
    }

    #[test]
    fn divergence_of_curl_perp_vanishes() {
        let grid = Grid::new(16).unwrap();
        let psi = random_scalar(grid, 7);
        let w = curl_perp(&psi);
        let div = divergence(&w);
        assert!(div.norm_l2() <= 1e-12 * w.norm_l2());
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let grid = Grid::new(32).unwrap();
        // w = ∇q with q = sin(2πx): divergence must equal Δq = −4π² sin(2πx).
        let w = VectorField2::from_fn(grid, |x, _| (2.0 * PI * (2.0 * PI * x).cos(), 0.0));
        let div = divergence(&w);
        let expect = ScalarField::from_fn(grid, |x, _| -4.0 * PI * PI * (2.0 * PI * x).sin());
        assert!(div.sub(&expect).max_abs() < 1e-8);
    }

    #[test]
    fn divergence_matches_naive_dft_oracle() {
        let grid = Grid::new(8).unwrap();
        let w = random_vector(grid, 11);
        let div = divergence(&w);

        // Oracle: naive DFT of each component, multiply by ik (Nyquist zeroed
        // for realness), naive inverse sum.
        let table = grid.wavenumbers();
        let u_hat = naive_dft(&ScalarField::from_array(grid, w.u().clone()).unwrap());
        let v_hat = naive_dft(&ScalarField::from_array(grid, w.v().clone()).unwrap());
        let mut expect = Array2::zeros(grid.shape());
        for j in 0..8 {
            for i in 0..8 {
                let mut acc = Complex64::new(0.0, 0.0);
                for kj in 0..8 {
                    for ki in 0..8 {
                        let kx = if table.kx[ki] == -4 { 0 } else { table.kx[ki] } as f64;
                        let ky = if table.ky[kj] == -4 { 0 } else { table.ky[kj] } as f64;
                        let d = Complex64::new(0.0, 2.0 * PI)
                            * (kx * u_hat[(kj, ki)] + ky * v_hat[(kj, ki)]);
                        let phase = 2.0 * PI * ((ki as f64) * (i as f64) / 8.0
                            + (kj as f64) * (j as f64) / 8.0);
                        acc += d * Complex64::new(phase.cos(), phase.sin());
                    }
                }
                expect[(j, i)] = (acc / 64.0).re;
            }
        }
        let expect = ScalarField::from_array(grid, expect).unwrap();
        assert!(div.sub(&expect).max_abs() < 1e-12 * (1.0 + div.max_abs()));
    }

    #[test]
    fn curl_examples() {
        let grid = Grid::new(32).unwrap();
        let w = VectorField2::from_fn(grid, |_, y| (-(2.0 * PI * y).sin(), 0.0));
        let curl = curl_scalar(&w);
        let expect = ScalarField::from_fn(grid, |_, y| 2.0 * PI * (2.0 * PI * y).cos());
        assert!(curl.sub(&expect).max_abs() < 1e-9);

        // curl of a gradient vanishes
        let q_grad = VectorField2::from_fn(grid, |x, _| (2.0 * PI * (2.0 * PI * x).cos(), 0.0));
        assert!(curl_scalar(&q_grad).norm_l2() <= 1e-12 * q_grad.norm_l2());
    }

    #[test]
    fn curl_perp_examples_and_linearity() {
        let grid = Grid::new(32).unwrap();
        let psi = ScalarField::from_fn(grid, |_, y| (2.0 * PI * y).sin());
        let w = curl_perp(&psi);
        let expect = VectorField2::from_fn(grid, |_, y| (2.0 * PI * (2.0 * PI * y).cos(), 0.0));
        assert!(w.sub(&expect).max_abs() < 1e-9);
        let (mu, mv) = w.mean_components();
        assert!(mu.abs() <= 1e-13 * w.norm_l2() && mv.abs() <= 1e-13 * w.norm_l2());

        let psi1 = random_scalar(grid, 21);
        let psi2 = random_scalar(grid, 22);
        let (a, b) = (1.7, -0.3);
        let combo = curl_perp(&psi1.scaled(a).add(&psi2.scaled(b)));
        let parts = curl_perp(&psi1).scaled(a).add(&curl_perp(&psi2).scaled(b));
        assert!(combo.sub(&parts).norm_l2() <= 1e-13 * combo.norm_l2());
    }

    #[test]
    fn dealias_mask_and_idempotency() {
        let grid = Grid::new(64).unwrap();
        // place a mode at k = (31, 0): outside the 2/3 band
        let mut coeffs = Array2::from_elem(grid.shape(), Complex64::new(0.0, 0.0));
        coeffs[(0, 31)] = Complex64::new(1.0, 0.0);
        coeffs[(1, 1)] = Complex64::new(2.0, 0.0); // k = (1,1): inside
        let f = SpectralField::from_coeffs(grid, coeffs).unwrap();
        let d = dealias_two_thirds(&f);
        assert_eq!(d.coeffs()[(0, 31)], Complex64::new(0.0, 0.0));
        assert_eq!(d.coeffs()[(1, 1)], Complex64::new(2.0, 0.0));
        let dd = dealias_two_thirds(&d);
        assert_eq!(dd.coeffs(), d.coeffs(), "dealiasing must be idempotent");
    }

    #[test]
    fn inner_product_properties() {
        let grid = Grid::new(8).unwrap();
        let f = random_vector(grid, 31);
        assert!(l2_inner(&f, &f) > 0.0);
        let zero = VectorField2::zeros(grid);
        assert_eq!(l2_inner(&zero, &zero), 0.0);

        // midpoint-rule oracle: plain double loop
        let g = random_vector(grid, 32);
        let mut acc = 0.0;
        for j in 0..8 {
            for i in 0..8 {
                acc += f.u()[(j, i)] * g.u()[(j, i)] + f.v()[(j, i)] * g.v()[(j, i)];
            }
        }
        acc *= grid.cell_area();
        assert!((l2_inner(&f, &g) - acc).abs() < 1e-14);
    }

    #[test]
    fn hodge_orthogonality_of_curl_and_gradient() {
        let grid = Grid::new(16).unwrap();
        for seed in 0..20 {
            let psi = random_scalar(grid, 100 + seed);
            let q = random_scalar(grid, 200 + seed);
            let sol = curl_perp(&psi);
            let q_hat = forward_fft2(&q);
            let gx = inverse_fft2(&spectral_derivative(&q_hat, Axis2::X, 1).unwrap());
            let gy = inverse_fft2(&spectral_derivative(&q_hat, Axis2::Y, 1).unwrap());
            let grad = VectorField2::from_components(gx, gy).unwrap();
            let ip = l2_inner(&sol, &grad).abs();
            assert!(ip <= 1e-10 * sol.norm_l2() * grad.norm_l2());
        }
    }

    #[test]
    fn norm_identity_for_curl_perp() {
        let grid = Grid::new(16).unwrap();
        for seed in 0..100 {
            let psi = random_scalar(grid, 300 + seed);
            let w = curl_perp(&psi);
            let psi_hat = forward_fft2(&psi);
            let gx = inverse_fft2(&spectral_derivative(&psi_hat, Axis2::X, 1).unwrap());
            let gy = inverse_fft2(&spectral_derivative(&psi_hat, Axis2::Y, 1).unwrap());
            let grad = VectorField2::from_components(gx, gy).unwrap();
            let a = w.norm_l2();
            let b = grad.norm_l2();
            assert!((a - b).abs() <= 1e-12 * a.max(b), "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_of_real_field_is_real() {
        let grid = Grid::new(16).unwrap();
        let f = random_scalar(grid, 77);
        let hat = spectral_derivative(&forward_fft2(&f), Axis2::X, 1).unwrap();
        let complex = fft::ifft2(hat.coeffs());
        let imag: f64 = complex.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        let real: f64 = complex.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        assert!(imag <= 1e-12 * real.max(1.0));
    }
}
