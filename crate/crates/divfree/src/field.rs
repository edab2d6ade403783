//! Real-valued scalar and two-component vector fields on a periodic grid.

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Real scalar field sampled on a [`Grid`], stored as `(n_y, n_x)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: Array2::zeros(grid.shape()),
        }
    }

    pub fn from_array(grid: Grid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                got: values.dim(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Evaluate `f(x, y)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(j, i)| f(grid.x(i), grid.y(j)));
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.mean().unwrap_or(0.0)
    }

    /// L² norm over the torus, `sqrt(Σ f² h_x h_y)`.
    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            values: &self.values + &other.values,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            values: &self.values - &other.values,
        }
    }
}

/// Two-component real velocity field `(u, v)` on a shared [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    grid: Grid,
    u: Array2<f64>,
    v: Array2<f64>,
}

impl VectorField2 {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            u: Array2::zeros(grid.shape()),
            v: Array2::zeros(grid.shape()),
        }
    }

    pub fn from_arrays(grid: Grid, u: Array2<f64>, v: Array2<f64>) -> Result<Self> {
        for arr in [&u, &v] {
            if arr.dim() != grid.shape() {
                return Err(Error::ShapeMismatch {
                    expected: grid.shape(),
                    got: arr.dim(),
                });
            }
        }
        Ok(Self { grid, u, v })
    }

    pub fn from_components(u: ScalarField, v: ScalarField) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::GridMismatch);
        }
        let grid = u.grid();
        Ok(Self {
            grid,
            u: u.into_values(),
            v: v.into_values(),
        })
    }

    /// Evaluate `(u, v) = f(x, y)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let u = Array2::from_shape_fn(grid.shape(), |(j, i)| f(grid.x(i), grid.y(j)).0);
        let v = Array2::from_shape_fn(grid.shape(), |(j, i)| f(grid.x(i), grid.y(j)).1);
        Self { grid, u, v }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn v(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn component(&self, c: usize) -> &Array2<f64> {
        match c {
            0 => &self.u,
            1 => &self.v,
            _ => panic!("vector field has two components"),
        }
    }

    /// Mean of each component over the grid.
    pub fn mean_components(&self) -> (f64, f64) {
        (
            self.u.mean().unwrap_or(0.0),
            self.v.mean().unwrap_or(0.0),
        )
    }

    /// L² norm, `sqrt(Σ (u² + v²) h_x h_y)`.
    pub fn norm_l2(&self) -> f64 {
        let sum: f64 = self
            .u
            .iter()
            .zip(self.v.iter())
            .map(|(a, b)| a * a + b * b)
            .sum();
        (sum * self.grid.cell_area()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(self.v.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            u: &self.u * factor,
            v: &self.v * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            u: &self.u + &other.u,
            v: &self.v + &other.v,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self {
            grid: self.grid,
            u: &self.u - &other.u,
            v: &self.v - &other.v,
        }
    }

    /// `self += factor * other`, in place.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Zip::from(&mut self.u)
            .and(&other.u)
            .for_each(|a, &b| *a += factor * b);
        Zip::from(&mut self.v)
            .and(&other.v)
            .for_each(|a, &b| *a += factor * b);
    }

    /// `Σ_i c_i f_i` over fields sharing one grid.
    pub fn linear_combination(terms: &[(f64, &VectorField2)]) -> VectorField2 {
        let (_, first) = terms.first().expect("at least one term");
        let mut out = VectorField2::zeros(first.grid());
        for &(c, f) in terms {
            out.axpy(c, f);
        }
        out
    }
}
