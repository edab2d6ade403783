//! Internal 2-D complex FFT built on rustfft.
//!
//! Plans are cached per thread, so all callers stay pure and thread-safe.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn transform(input: &Array2<Complex64>, inverse: bool) -> Array2<Complex64> {
    let (ny, nx) = input.dim();
    let mut data = input.to_owned();

    let row_plan = plan(nx, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); row_plan.get_inplace_scratch_len()];
    for mut row in data.rows_mut() {
        let slice = row.as_slice_mut().expect("row-major layout");
        row_plan.process_with_scratch(slice, &mut scratch);
    }

    let col_plan = plan(ny, inverse);
    scratch.resize(col_plan.get_inplace_scratch_len().max(1), Complex64::new(0.0, 0.0));
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = data[(j, i)];
        }
        col_plan.process_with_scratch(&mut col, &mut scratch);
        for j in 0..ny {
            data[(j, i)] = col[j];
        }
    }
    data
}

/// Unnormalized forward 2-D DFT.
pub(crate) fn fft2(values: &Array2<Complex64>) -> Array2<Complex64> {
    transform(values, false)
}

/// Inverse 2-D DFT carrying the full `1/(n_x n_y)` normalization.
pub(crate) fn ifft2(coeffs: &Array2<Complex64>) -> Array2<Complex64> {
    let (ny, nx) = coeffs.dim();
    let mut out = transform(coeffs, true);
    let scale = 1.0 / (nx * ny) as f64;
    out.mapv_inplace(|c| c * scale);
    out
}

pub(crate) fn fft2_real(values: &Array2<f64>) -> Array2<Complex64> {
    let complex = values.mapv(|v| Complex64::new(v, 0.0));
    fft2(&complex)
}

pub(crate) fn ifft2_real(coeffs: &Array2<Complex64>) -> Array2<f64> {
    ifft2(coeffs).mapv(|c| c.re)
}
