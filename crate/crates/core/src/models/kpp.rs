//! Scalar KPP problem with the nonconvex flux `f(u) = (sin u, cos u)`.

use super::ConservationLaw;
use crate::operators::Axis;

/// KPP model with square entropy `η = u²/2`.
///
/// The flux Jacobian `(cos u, -sin u)` has unit norm, so the global bound
/// `λ = 1` is used for every Riemann problem.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Kpp;

impl ConservationLaw<1> for Kpp {
    const DIM: usize = 2;

    fn flux(&self, u: &[f64; 1], axis: Axis) -> [f64; 1] {
        match axis {
            Axis::X => [u[0].sin()],
            Axis::Y => [u[0].cos()],
        }
    }

    fn max_wavespeed(&self, _ul: &[f64; 1], _ur: &[f64; 1], _normal: [f64; 2]) -> f64 {
        1.0
    }

    fn entropy(&self, u: &[f64; 1]) -> f64 {
        0.5 * u[0] * u[0]
    }

    fn entropy_variables(&self, u: &[f64; 1]) -> [f64; 1] {
        *u
    }

    /// `ψ = (-cos u, sin u)`, the antiderivative of `f` in `v = u`.
    fn entropy_potential(&self, u: &[f64; 1], axis: Axis) -> f64 {
        match axis {
            Axis::X => -u[0].cos(),
            Axis::Y => u[0].sin(),
        }
    }

    fn is_admissible(&self, u: &[f64; 1]) -> bool {
        u[0].is_finite()
    }

    fn component_names(&self) -> &'static [&'static str] {
        &["u"]
    }
}
