//! Flow-matching probability paths on the divergence-free subspace:
//! interpolants, conditional velocities, the projected regression loss, and
//! ODE sampling.
//!
//! Two path families are supported. The linear path `(1−τ)u₀ + τy` carries
//! target velocity `y − u₀`. The affine path `σ_τ u₀ + τ y` with
//! `σ_τ = 1 − (1 − σ_min)τ` keeps the conditional law Gaussian with positive
//! variance for all τ; its velocity field `(y − (1 − σ_min)x)/σ_τ` is the
//! unique field transporting the path, validated against a
//! finite-difference-in-τ oracle rather than trusted.
//!
//! Because the subspace is linear, every construction here stays inside it
//! whenever its inputs do: interpolants, targets, conditional and marginal
//! velocities, and projected-model ODE trajectories.

mod marginal;
mod ode;

pub use marginal::marginal_velocity_finite;
pub use ode::{generate_sample, ode_integrate, ode_integrate_observed, OdeSolution};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::hodge::{leray_project, relative_divergence};

/// Path family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathKind {
    Linear,
    AffineSigma,
}

/// Flow-matching schedule: path kind plus `σ_min` (affine mode only).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathSpec {
    pub kind: PathKind,
    pub sigma_min: f64,
}

impl PathSpec {
    pub fn linear() -> Self {
        Self {
            kind: PathKind::Linear,
            sigma_min: 0.0,
        }
    }

    /// Affine schedule; `sigma_min` must lie in `(0, 1)`.
    pub fn affine(sigma_min: f64) -> Result<Self> {
        if !(sigma_min > 0.0 && sigma_min < 1.0) {
            return Err(Error::InvalidSigmaMin(sigma_min));
        }
        Ok(Self {
            kind: PathKind::AffineSigma,
            sigma_min,
        })
    }

    /// Effective `σ_min`: zero for the linear path.
    fn sigma_min_eff(&self) -> f64 {
        match self.kind {
            PathKind::Linear => 0.0,
            PathKind::AffineSigma => self.sigma_min,
        }
    }

    /// Noise scale `σ_τ = 1 − (1 − σ_min)τ` (equals `1 − τ` for linear).
    pub fn sigma(&self, tau: f64) -> f64 {
        1.0 - (1.0 - self.sigma_min_eff()) * tau
    }
}

impl Default for PathSpec {
    fn default() -> Self {
        Self::affine(1e-4).expect("valid default sigma_min")
    }
}

/// One regression sample: a noise draw, a data sample, and a path time.
/// Conditioning is architectural, not numeric: models carry it by closure
/// capture.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub u0: VectorField2,
    pub y: VectorField2,
    pub tau: f64,
}

/// The opaque velocity-model contract `(state, τ) → velocity`.
///
/// Implemented by any closure; conditioning information is whatever state the
/// closure captures.
pub trait VelocityModel {
    fn eval(&self, state: &VectorField2, tau: f64) -> VectorField2;
}

impl<F> VelocityModel for F
where
    F: Fn(&VectorField2, f64) -> VectorField2,
{
    fn eval(&self, state: &VectorField2, tau: f64) -> VectorField2 {
        self(state, tau)
    }
}

/// Wraps a model so its output is Leray-projected at every evaluation.
pub struct Projected<M>(pub M);

impl<M: VelocityModel> VelocityModel for Projected<M> {
    fn eval(&self, state: &VectorField2, tau: f64) -> VectorField2 {
        leray_project(&self.0.eval(state, tau))
    }
}

/// Path state `σ_τ u₀ + τ y` (linear: `(1−τ)u₀ + τ y`).
pub fn interpolate(
    spec: &PathSpec,
    u0: &VectorField2,
    y: &VectorField2,
    tau: f64,
) -> Result<VectorField2> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    if u0.grid() != y.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(VectorField2::linear_combination(&[
        (spec.sigma(tau), u0),
        (tau, y),
    ]))
}

/// Regression target `d/dτ u_τ = y − (1 − σ_min) u₀` given the endpoints
/// (reduces to `y − u₀` for the linear path). Constant in τ.
pub fn target_velocity(spec: &PathSpec, u0: &VectorField2, y: &VectorField2) -> Result<VectorField2> {
    if u0.grid() != y.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(VectorField2::linear_combination(&[
        (1.0, y),
        (-(1.0 - spec.sigma_min_eff()), u0),
    ]))
}

/// Conditional velocity at a point: `v_τ^y(x) = (y − (1 − σ_min) x) / σ_τ`.
///
/// On the path (`x = u_τ^y`) this coincides with [`target_velocity`]. Errors
/// when `σ_τ` vanishes (linear path at τ = 1).
pub fn conditional_velocity(
    spec: &PathSpec,
    x: &VectorField2,
    y: &VectorField2,
    tau: f64,
) -> Result<VectorField2> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange(tau));
    }
    if x.grid() != y.grid() {
        return Err(Error::GridMismatch);
    }
    let sigma = spec.sigma(tau);
    if sigma <= f64::EPSILON {
        return Err(Error::DegenerateSchedule {
            tau,
            sigma_tau: sigma,
        });
    }
    Ok(VectorField2::linear_combination(&[
        (1.0 / sigma, y),
        (-(1.0 - spec.sigma_min_eff()) / sigma, x),
    ]))
}

/// The projected flow-matching objective: mean over the batch of
/// `‖P v_θ(u_τ, τ) − v_τ‖²_{L²}`, with `P` the Leray projection and `v_τ`
/// the conditional target. Adding any gradient field to the model output
/// leaves the value unchanged.
pub fn fm_loss<M: VelocityModel>(model: &M, spec: &PathSpec, batch: &[FlowSample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for sample in batch {
        for (name, field) in [("u0", &sample.u0), ("y", &sample.y)] {
            let rel = relative_divergence(field);
            if rel > 1e-8 {
                log::warn!("fm_loss: {name} is not solenoidal (relative divergence {rel:.3e})");
            }
        }
        let state = interpolate(spec, &sample.u0, &sample.y, sample.tau)?;
        let out = leray_project(&model.eval(&state, sample.tau));
        let target = target_velocity(spec, &sample.u0, &sample.y)?;
        total += out.sub(&target).norm_l2().powi(2);
    }
    Ok(total / batch.len() as f64)
}

pub use ode::{OdeMethod, OdeSolveSpec};
