//! Modal smoothness indicator and the elementwise blending function.

use crate::operators::OperatorSet;

/// Value of `s` used when the modal energy vanishes.
pub const SMOOTHNESS_FLOOR: f64 = -1e9;

/// Width `κ` of the smoothness ramp.
pub const RAMP_WIDTH: f64 = 1.0;

/// Ramp centre `s_0 = log10(N^-4)`.
pub fn ramp_center(degree: usize) -> f64 {
    -4.0 * (degree as f64).log10()
}

/// Legendre coefficients of a nodal field in the orthonormal tensor basis,
/// indexed `p + (N+1) q` with `p` along x.
pub fn modal_coefficients(ops: &OperatorSet, values: &[f64], dim: usize) -> Vec<f64> {
    let np = ops.nodes_1d();
    let vinv = &ops.modal_inverse;
    if dim == 1 {
        return (0..np)
            .map(|p| (0..np).map(|i| vinv[(p, i)] * values[i]).sum())
            .collect();
    }
    // transform along x, then along y
    let mut tmp = vec![0.0; np * np];
    for j in 0..np {
        for p in 0..np {
            tmp[p + np * j] = (0..np).map(|i| vinv[(p, i)] * values[i + np * j]).sum();
        }
    }
    let mut out = vec![0.0; np * np];
    for q in 0..np {
        for p in 0..np {
            out[p + np * q] = (0..np).map(|j| vinv[(q, j)] * tmp[p + np * j]).sum();
        }
    }
    out
}

/// `s = log10(max(E_N / E_{≤N}, E_{N-1} / E_{≤N-1}))` where `E_k` is the
/// energy in modes of tensor order `max(p, q) = k`.
pub fn smoothness_indicator(ops: &OperatorSet, values: &[f64], dim: usize) -> f64 {
    let np = ops.nodes_1d();
    let n = ops.degree();
    let modes = modal_coefficients(ops, values, dim);
    let mut by_order = vec![0.0; np];
    for (k, mu) in modes.iter().enumerate() {
        let order = if dim == 1 { k } else { (k % np).max(k / np) };
        by_order[order] += mu * mu;
    }
    let total: f64 = by_order.iter().sum();
    let below_top = total - by_order[n];
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    // for N = 1 the second-highest order is the mean itself
    let energy = ratio(by_order[n], total).max(if n >= 2 {
        ratio(by_order[n - 1], below_top)
    } else {
        0.0
    });
    if energy > 0.0 {
        energy.log10().max(SMOOTHNESS_FLOOR)
    } else {
        SMOOTHNESS_FLOOR
    }
}

/// Map `s` to `ε ∈ [0, 1]` with a sine ramp of half-width `κ` around `s_0`.
pub fn smoothness_ramp(s: f64, s0: f64, kappa: f64) -> f64 {
    if s < s0 - kappa {
        0.0
    } else if s > s0 + kappa {
        1.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (s - s0) / (2.0 * kappa)).sin())
    }
}

/// Elementwise smoothness factor `ε` of one nodal component.
pub fn modal_smoothness(ops: &OperatorSet, values: &[f64], dim: usize) -> f64 {
    let s = smoothness_indicator(ops, values, dim);
    smoothness_ramp(s, ramp_center(ops.degree()), RAMP_WIDTH)
}

/// Blending threshold `τ = 0.5 · 10^(-1.8 (N+1)^0.25)`.
pub fn blending_threshold(degree: usize) -> f64 {
    0.5 * 10f64.powf(-1.8 * ((degree + 1) as f64).powf(0.25))
}

/// Sharpness `ln(0.9999 / 0.0001)`.
pub fn blending_sharpness() -> f64 {
    (0.9999f64 / 0.0001).ln()
}

/// `α = 1 / (1 + exp(-(s/τ)(ε - τ)))`.
pub fn blending_alpha(eps: f64, degree: usize) -> f64 {
    let tau = blending_threshold(degree);
    let s = blending_sharpness();
    1.0 / (1.0 + (-(s / tau) * (eps - tau)).exp())
}
