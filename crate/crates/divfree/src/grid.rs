//! Uniform periodic grids on the unit torus and their integer wavenumbers.

use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform periodic discretization of the square torus `[0, length)^2`.
///
/// Array data associated with a grid is stored row-major with the y index
/// outermost, i.e. shape `(n_y, n_x)`. Grid sides must be even and at least 4
/// so that the Nyquist and 2/3-dealiasing conventions are well defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    n_x: usize,
    n_y: usize,
    length: f64,
}

impl Grid {
    /// Square grid with `n` points per axis on the unit torus.
    pub fn new(n: usize) -> Result<Self> {
        Self::rectangular(n, n)
    }

    /// Rectangular grid on the unit torus.
    pub fn rectangular(n_x: usize, n_y: usize) -> Result<Self> {
        if n_x < 4 || n_y < 4 || n_x % 2 != 0 || n_y % 2 != 0 {
            return Err(Error::InvalidGrid { n_x, n_y });
        }
        Ok(Self {
            n_x,
            n_y,
            length: 1.0,
        })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    /// Domain side length (fixed to 1 for the unit torus).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `(h_x, h_y)` grid spacings.
    pub fn spacing(&self) -> (f64, f64) {
        (
            self.length / self.n_x as f64,
            self.length / self.n_y as f64,
        )
    }

    pub fn cell_area(&self) -> f64 {
        let (hx, hy) = self.spacing();
        hx * hy
    }

    /// Array shape `(n_y, n_x)` used by all field storage.
    pub fn shape(&self) -> (usize, usize) {
        (self.n_y, self.n_x)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.length / self.n_x as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.length / self.n_y as f64
    }

    pub fn wavenumbers(&self) -> WavenumberTable {
        WavenumberTable {
            kx: dft_wavenumbers(self.n_x),
            ky: dft_wavenumbers(self.n_y),
        }
    }
}

/// Integer wavevectors in standard DFT ordering `0, 1, …, N/2−1, −N/2, …, −1`.
///
/// The table stores bare integers; the physical differentiation wavenumber is
/// `2π k / length` and is applied only inside differential operators.
#[derive(Debug, Clone)]
pub struct WavenumberTable {
    pub kx: Vec<i64>,
    pub ky: Vec<i64>,
}

impl WavenumberTable {
    /// `4π² (k_x² + k_y²) / L²`, the (negated) Laplacian symbol at a mode.
    pub fn k2_physical(&self, j: usize, i: usize, length: f64) -> f64 {
        let kx = self.kx[i] as f64;
        let ky = self.ky[j] as f64;
        4.0 * std::f64::consts::PI.powi(2) * (kx * kx + ky * ky) / (length * length)
    }
}

fn dft_wavenumbers(n: usize) -> Vec<i64> {
    let half = (n / 2) as i64;
    (0..n as i64)
        .map(|i| if i < half { i } else { i - n as i64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny_grids() {
        assert!(Grid::new(2).is_err());
        assert!(Grid::new(7).is_err());
        assert!(Grid::rectangular(8, 6).is_ok());
        assert!(Grid::rectangular(8, 5).is_err());
    }

    #[test]
    fn spacing_is_positive() {
        let g = Grid::new(64).unwrap();
        let (hx, hy) = g.spacing();
        assert!(hx > 0.0 && hy > 0.0);
        assert!((hx - 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn wavenumber_ordering_matches_dft_convention() {
        let table = Grid::new(8).unwrap().wavenumbers();
        assert_eq!(table.kx, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(table.kx[0], 0);
        let mut sorted = table.kx.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (-4..4).collect::<Vec<_>>());
    }
}
