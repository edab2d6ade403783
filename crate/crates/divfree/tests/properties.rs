//! Property tests for the algebraic invariants that should survive any
//! refactoring: transform round trips, projection structure, path endpoint
//! identities, and file-format round trips.

use divfree::field::{ScalarField, VectorField2};
use divfree::flowmatch::{interpolate, PathKind, PathSpec};
use divfree::grid::Grid;
use divfree::hodge::leray_project;
use divfree::io::FloFile;
use divfree::spectral::{dealias_two_thirds, forward_fft2, inverse_fft2, l2_inner};
use ndarray::Array2;
use proptest::prelude::*;

fn grid_and_values(max_n: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=max_n / 2).prop_flat_map(|half| {
        let n = 2 * half.max(2);
        (
            Just(n),
            proptest::collection::vec(-10.0..10.0f64, n * n),
        )
    })
}

fn scalar_from(n: usize, values: &[f64]) -> ScalarField {
    let grid = Grid::new(n).unwrap();
    let arr = Array2::from_shape_vec((n, n), values.to_vec()).unwrap();
    ScalarField::from_array(grid, arr).unwrap()
}

fn vector_from(n: usize, u: &[f64], v: &[f64]) -> VectorField2 {
    let grid = Grid::new(n).unwrap();
    let ua = Array2::from_shape_vec((n, n), u.to_vec()).unwrap();
    let va = Array2::from_shape_vec((n, n), v.to_vec()).unwrap();
    VectorField2::from_arrays(grid, ua, va).unwrap()
}

proptest! {
    #[test]
    fn fft_round_trip((n, values) in grid_and_values(16)) {
        let f = scalar_from(n, &values);
        let back = inverse_fft2(&forward_fft2(&f));
        let err = back.sub(&f).norm_l2();
        prop_assert!(err <= 1e-12 * f.norm_l2().max(1e-6));
    }

    #[test]
    fn dealias_is_idempotent((n, values) in grid_and_values(16)) {
        let hat = forward_fft2(&scalar_from(n, &values));
        let once = dealias_two_thirds(&hat);
        let twice = dealias_two_thirds(&once);
        prop_assert_eq!(once.coeffs(), twice.coeffs());
    }

    #[test]
    fn projection_is_idempotent_and_contractive(
        (n, u) in grid_and_values(16),
        v_extra in proptest::collection::vec(-10.0..10.0f64, 16 * 16),
    ) {
        let v = &v_extra[..n * n];
        let w = vector_from(n, &u, v);
        let p = leray_project(&w);
        let pp = leray_project(&p);
        prop_assert!(pp.sub(&p).norm_l2() <= 1e-12 * w.norm_l2().max(1e-9));
        prop_assert!(p.norm_l2() <= w.norm_l2() * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn projection_residual_is_orthogonal(
        (n, u) in grid_and_values(12),
        v_extra in proptest::collection::vec(-10.0..10.0f64, 12 * 12),
    ) {
        let v = &v_extra[..n * n];
        let w = vector_from(n, &u, v);
        let p = leray_project(&w);
        let residual = w.sub(&p);
        let ip = l2_inner(&p, &residual).abs();
        prop_assert!(ip <= 1e-10 * w.norm_l2().powi(2).max(1e-12));
    }

    #[test]
    fn path_endpoints(
        (n, u) in grid_and_values(8),
        y_extra in proptest::collection::vec(-10.0..10.0f64, 8 * 8),
        sigma_min in 1e-6..0.5f64,
    ) {
        let y = vector_from(n, &y_extra[..n * n], &u);
        let u0 = vector_from(n, &u, &y_extra[..n * n]);
        for spec in [PathSpec::linear(), PathSpec::affine(sigma_min).unwrap()] {
            let start = interpolate(&spec, &u0, &y, 0.0).unwrap();
            prop_assert!(start.sub(&u0).norm_l2() <= 1e-15 * u0.norm_l2().max(1e-9));
            let end = interpolate(&spec, &u0, &y, 1.0).unwrap();
            let expect = match spec.kind {
                PathKind::Linear => y.clone(),
                PathKind::AffineSigma => y.add(&u0.scaled(spec.sigma_min)),
            };
            prop_assert!(end.sub(&expect).norm_l2() <= 1e-15 * expect.norm_l2().max(1e-9));
        }
    }

    #[test]
    fn flo_round_trip_bit_exact(
        t in 1u32..4,
        half in 2u32..6,
        raw in proptest::collection::vec(proptest::num::f64::ANY, 0..64),
    ) {
        let (h, w) = (2 * half, 2 * half);
        let count = (t * 2 * h * w) as usize;
        // cycle the raw values (NaNs and infinities included) to fill payload
        let data: Vec<f64> = (0..count)
            .map(|i| if raw.is_empty() { i as f64 } else { raw[i % raw.len()] })
            .collect();
        let flo = FloFile::new([t, 2, h, w], data).unwrap();
        let back = FloFile::from_bytes(&flo.to_bytes()).unwrap();
        prop_assert_eq!(flo.dims, back.dims);
        // bit-exact, including any NaN payloads
        for (a, b) in flo.data.iter().zip(&back.data) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
