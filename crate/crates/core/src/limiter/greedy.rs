//! Sorted greedy solver for the continuous knapsack problem
//! `max Σ x_i  s.t.  a^T x ≤ b,  0 ≤ x ≤ U`.

use thiserror::Error;

/// Coefficients below this value are treated as non-positive.
pub const GREEDY_TOLERANCE: f64 = 1e-14;

/// Relative slack accepted on a negative bound before it is clamped to 0.
pub const BOUND_TOLERANCE: f64 = 1e-10;

/// One knapsack instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    pub coefficients: Vec<f64>,
    pub bound: f64,
    pub upper: Vec<f64>,
    /// Sum of the magnitudes of the terms that were added up to form
    /// `bound`; its rounding error scales with this value.
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("bound {bound:e} is below the feasibility tolerance {tolerance:e}")]
pub struct InfeasibleBound {
    pub bound: f64,
    pub tolerance: f64,
}

impl LpInstance {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `Σ |a_i| U_i`, the scale of the constraint.
    pub fn scale(&self) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.upper)
            .map(|(a, u)| a.abs() * u)
            .sum()
    }

    /// Absolute tolerance on the bound:
    /// `1e-10 · max(1, Σ|a_i| U_i, magnitude)`.
    pub fn tolerance(&self) -> f64 {
        BOUND_TOLERANCE * self.scale().max(self.magnitude).max(1.0)
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, x)| a * x).sum()
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.upper)
            .all(|(x, u)| (0.0..=*u).contains(x))
            && self.lhs(x) <= self.bound.max(0.0) + self.tolerance()
    }
}

/// Solve `lp` by sorting the coefficients in decreasing order and lowering
/// the largest ones first. Ties are broken by index.
pub fn greedy_solve(lp: &LpInstance, eps: f64) -> Result<Vec<f64>, InfeasibleBound> {
    let mut x = Vec::with_capacity(lp.len());
    let mut order = Vec::with_capacity(lp.len());
    greedy_solve_into(lp, eps, &mut order, &mut x)?;
    Ok(x)
}

/// Allocation-free variant of [`greedy_solve`] reusing `order` and `x`.
pub fn greedy_solve_into(
    lp: &LpInstance,
    eps: f64,
    order: &mut Vec<usize>,
    x: &mut Vec<f64>,
) -> Result<(), InfeasibleBound> {
    let tolerance = lp.tolerance();
    if lp.bound < -tolerance || lp.bound.is_nan() {
        return Err(InfeasibleBound {
            bound: lp.bound,
            tolerance,
        });
    }
    let b = lp.bound.max(0.0);
    x.clear();
    x.extend_from_slice(&lp.upper);
    let mut s = lp.lhs(x);
    if s <= b {
        return Ok(());
    }
    order.clear();
    order.extend(0..lp.len());
    let a = &lp.coefficients;
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]));
    for &i in order.iter() {
        if a[i] < eps {
            break;
        }
        let rest = s - a[i] * lp.upper[i];
        if rest <= b {
            x[i] = ((b - rest) / a[i]).clamp(0.0, lp.upper[i]);
            return Ok(());
        }
        x[i] = 0.0;
        s = rest;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(a: &[f64], b: f64, u: &[f64]) -> LpInstance {
        LpInstance {
            coefficients: a.to_vec(),
            bound: b,
            upper: u.to_vec(),
            magnitude: 0.0,
        }
    }

    #[test]
    fn fractional_pivot() {
        let x = greedy_solve(&lp(&[2.0, 1.0], 2.0, &[1.0, 1.0]), GREEDY_TOLERANCE).unwrap();
        assert_eq!(x, vec![0.5, 1.0]);
    }

    #[test]
    fn non_positive_coefficient_stays_at_bound() {
        let x = greedy_solve(&lp(&[-1.0, 3.0], 0.0, &[1.0, 1.0]), GREEDY_TOLERANCE).unwrap();
        assert_eq!(x[0], 1.0);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn early_return_keeps_upper() {
        let u = [0.3, 0.9, 1.0];
        let x = greedy_solve(&lp(&[1.0, -2.0, 0.5], 1.0, &u), GREEDY_TOLERANCE).unwrap();
        assert_eq!(x, u.to_vec());
    }

    #[test]
    fn tiny_negative_bound_is_clamped() {
        let x = greedy_solve(&lp(&[1.0, 1.0], -1e-13, &[1.0, 1.0]), GREEDY_TOLERANCE).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn negative_bound_is_infeasible() {
        assert!(greedy_solve(&lp(&[1.0], -1e-3, &[1.0]), GREEDY_TOLERANCE).is_err());
    }

    #[test]
    fn bound_tolerance_follows_magnitude() {
        let mut instance = lp(&[1.0], -1e-3, &[1.0]);
        instance.magnitude = 1e8;
        assert_eq!(greedy_solve(&instance, GREEDY_TOLERANCE).unwrap(), vec![0.0]);
        instance.bound = -1.0e-1;
        assert!(greedy_solve(&instance, GREEDY_TOLERANCE).is_err());
    }

    #[test]
    fn ties_break_by_index() {
        let x = greedy_solve(&lp(&[1.0, 1.0, 1.0], 1.5, &[1.0; 3]), GREEDY_TOLERANCE).unwrap();
        assert_eq!(x, vec![0.0, 0.5, 1.0]);
    }
}
