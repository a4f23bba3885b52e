//! Independent oracles and the property suites behind `subcell check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{conservation_drift, total_magnitudes};
use crate::error::Result;
use crate::harness::{sod_case, vortex_case};
use crate::limiter::{greedy_solve, LimiterConfig, LpInstance, GREEDY_TOLERANCE};
use crate::operators::build_operator_set;
use crate::timeloop::TimeConfig;

/// Optimal value of the knapsack LP from its dual
/// `min_{y ≥ 0} b y + Σ U_i max(0, 1 - a_i y)`.
///
/// The dual objective is convex and piecewise linear with kinks at
/// `y = 1 / a_i`, so its minimum is attained at `y = 0` or at a kink.
pub fn dual_optimum(lp: &LpInstance) -> f64 {
    let b = lp.bound.max(0.0);
    let dual = |y: f64| -> f64 {
        b * y
            + lp
                .coefficients
                .iter()
                .zip(&lp.upper)
                .map(|(a, u)| u * (1.0 - a * y).max(0.0))
                .sum::<f64>()
    };
    lp.coefficients
        .iter()
        .filter(|a| **a > 0.0)
        .map(|a| dual(1.0 / a))
        .fold(dual(0.0), f64::min)
}

/// Largest instance size accepted by [`vertex_optimum`].
pub const MAX_VERTEX_ENUMERATION: usize = 30;

/// Optimal value by enumerating the vertices of the feasible polytope.
///
/// Raising a coordinate with `a_i ≤ 0` to its upper bound never breaks
/// feasibility nor lowers the objective, so those coordinates are fixed
/// at `U_i` and the remaining budget is shared by the positive ones. A
/// vertex of the reduced problem has every coordinate at a bound, or all
/// but one (`j`) with the budget active; both families are searched
/// exactly by splitting the coordinates in two halves.
///
/// Returns `None` for more than [`MAX_VERTEX_ENUMERATION`] coordinates.
pub fn vertex_optimum(lp: &LpInstance) -> Option<f64> {
    if lp.len() > MAX_VERTEX_ENUMERATION {
        return None;
    }
    let mut budget = lp.bound.max(0.0);
    let mut fixed = 0.0;
    let mut free = Vec::new();
    for (&a, &u) in lp.coefficients.iter().zip(&lp.upper) {
        if a > 0.0 {
            free.push((a, u));
        } else {
            budget -= a * u;
            fixed += u;
        }
    }

    let whole: Vec<Item> = free.iter().map(|&(a, u)| Item { weight: a * u, gain: u }).collect();
    let mut best = best_subset(&whole, f64::NEG_INFINITY, budget).unwrap_or(f64::NEG_INFINITY);
    for (j, &(aj, uj)) in free.iter().enumerate() {
        let others: Vec<Item> = free
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, &(a, u))| Item {
                weight: a * u,
                gain: u * (1.0 - a / aj),
            })
            .collect();
        // x_j = (budget - w_S) / a_j must lie in [0, U_j]
        if let Some(g) = best_subset(&others, budget - aj * uj, budget) {
            best = best.max(g + budget / aj);
        }
    }
    Some(fixed + best)
}

#[derive(Debug, Clone, Copy)]
struct Item {
    weight: f64,
    gain: f64,
}

fn subset_sums(items: &[Item]) -> Vec<Item> {
    let mut sums = vec![Item { weight: 0.0, gain: 0.0 }];
    for it in items {
        let extended: Vec<Item> = sums
            .iter()
            .map(|s| Item {
                weight: s.weight + it.weight,
                gain: s.gain + it.gain,
            })
            .collect();
        sums.extend(extended);
    }
    sums
}

/// Range-maximum table over a fixed sequence.
struct SparseMax {
    levels: Vec<Vec<f64>>,
}

impl SparseMax {
    fn new(values: Vec<f64>) -> Self {
        let mut levels = vec![values];
        let mut width = 1;
        while 2 * width <= levels[0].len() {
            let prev = levels.last().unwrap();
            let next = (0..prev.len() - width).map(|i| prev[i].max(prev[i + width])).collect();
            levels.push(next);
            width *= 2;
        }
        SparseMax { levels }
    }

    /// Maximum over `lo..hi`, `None` when empty.
    fn query(&self, lo: usize, hi: usize) -> Option<f64> {
        if lo >= hi {
            return None;
        }
        let level = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let row = &self.levels[level];
        Some(row[lo].max(row[hi - (1 << level)]))
    }
}

/// Largest total gain over subsets whose total weight lies in `[lo, hi]`.
fn best_subset(items: &[Item], lo: f64, hi: f64) -> Option<f64> {
    let (left, right) = items.split_at(items.len() / 2);
    let mut right = subset_sums(right);
    right.sort_by(|p, q| p.weight.total_cmp(&q.weight));
    let weights: Vec<f64> = right.iter().map(|s| s.weight).collect();
    let table = SparseMax::new(right.iter().map(|s| s.gain).collect());
    subset_sums(left)
        .iter()
        .filter_map(|l| {
            let start = weights.partition_point(|w| l.weight + w < lo);
            let end = weights.partition_point(|w| l.weight + w <= hi);
            table.query(start, end).map(|g| g + l.gain)
        })
        .reduce(f64::max)
}

/// Outcome of one property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Largest deviations of the 1D operator identities over degrees `1..=max_degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorDefects {
    /// `max |Q + Q^T - diag(-1, 0, …, 0, 1)|`.
    pub sbp: f64,
    /// Quadrature error on monomials of degree up to `2N - 1`.
    pub quadrature: f64,
    /// `max |1^T (Δ^vol + Δ^surf) - 1^T Δ^surf|`.
    pub column: f64,
}

impl OperatorDefects {
    pub fn max(&self) -> f64 {
        self.sbp.max(self.quadrature).max(self.column)
    }
}

pub fn operator_defects(max_degree: usize) -> Result<OperatorDefects> {
    let mut d = OperatorDefects {
        sbp: 0.0,
        quadrature: 0.0,
        column: 0.0,
    };
    for n in 1..=max_degree {
        let ops = build_operator_set(n)?;
        let q = &ops.sbp;
        for i in 0..=n {
            for j in 0..=n {
                let boundary = match (i, j) {
                    (0, 0) => -1.0,
                    (i, j) if i == n && j == n => 1.0,
                    _ => 0.0,
                };
                d.sbp = d.sbp.max((q[(i, j)] + q[(j, i)] - boundary).abs());
            }
        }
        for k in 0..2 * n {
            let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
            let quad: f64 = ops
                .rule
                .nodes
                .iter()
                .zip(&ops.rule.weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            d.quadrature = d.quadrature.max((quad - exact).abs());
        }
        let full = &ops.diff_volume + &ops.diff_surface;
        for j in 0..n + 2 {
            let total: f64 = full.column(j).sum();
            let surface: f64 = ops.diff_surface.column(j).sum();
            d.column = d.column.max((total - surface).abs());
        }
    }
    Ok(d)
}

/// A random LP with `1..=max_len` coefficients of mixed sign in `[-1, 1]`
/// (with exact zeros and repeated values), `U ∈ [0, 1]` and `b ≥ 0`.
pub fn random_lp(rng: &mut impl Rng, max_len: usize) -> LpInstance {
    let m = rng.random_range(1..=max_len);
    let mut coefficients: Vec<f64> = Vec::with_capacity(m);
    for _ in 0..m {
        let a = match rng.random_range(0..10) {
            0 => 0.0,
            1 if !coefficients.is_empty() => coefficients[rng.random_range(0..coefficients.len())],
            _ => rng.random_range(-1.0..1.0),
        };
        coefficients.push(a);
    }
    let upper: Vec<f64> = (0..m)
        .map(|_| if rng.random_bool(0.1) { 1.0 } else { rng.random_range(0.0..=1.0) })
        .collect();
    let positive: f64 = coefficients
        .iter()
        .zip(&upper)
        .map(|(a, u)| a.max(0.0) * u)
        .sum();
    let bound = if rng.random_bool(0.1) {
        0.0
    } else {
        rng.random_range(0.0..=1.2) * positive
    };
    LpInstance {
        coefficients,
        bound,
        upper,
        magnitude: 0.0,
    }
}

/// Result of comparing the greedy solver with both oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyComparison {
    pub instances: usize,
    pub infeasible: usize,
    /// Largest `|greedy - vertex oracle|`.
    pub vertex_gap: f64,
    /// Largest `|greedy - dual oracle|`.
    pub dual_gap: f64,
}

pub fn compare_greedy(instances: usize, seed: u64) -> GreedyComparison {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GreedyComparison {
        instances,
        infeasible: 0,
        vertex_gap: 0.0,
        dual_gap: 0.0,
    };
    for _ in 0..instances {
        let lp = random_lp(&mut rng, MAX_VERTEX_ENUMERATION);
        let Ok(x) = greedy_solve(&lp, GREEDY_TOLERANCE) else {
            out.infeasible += 1;
            continue;
        };
        if !lp.is_feasible(&x) {
            out.infeasible += 1;
        }
        let objective: f64 = x.iter().sum();
        let vertex = vertex_optimum(&lp).expect("instance within enumeration limit");
        out.vertex_gap = out.vertex_gap.max((objective - vertex).abs());
        out.dual_gap = out.dual_gap.max((objective - dual_optimum(&lp)).abs());
    }
    out
}

fn operators_suite() -> CheckOutcome {
    let name = "operator identities";
    match operator_defects(8) {
        Ok(d) => CheckOutcome {
            name,
            passed: d.max() <= 1e-12,
            detail: format!(
                "N = 1..8: SBP {:.1e}, quadrature {:.1e}, column {:.1e}",
                d.sbp, d.quadrature, d.column
            ),
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn greedy_suite() -> CheckOutcome {
    let c = compare_greedy(1000, 2024);
    CheckOutcome {
        name: "greedy vs oracle",
        passed: c.infeasible == 0 && c.vertex_gap <= 1e-10 && c.dual_gap <= 1e-10,
        detail: format!(
            "{} LPs: {} infeasible, vertex gap {:.1e}, dual gap {:.1e}",
            c.instances, c.infeasible, c.vertex_gap, c.dual_gap
        ),
    }
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Periodic vortex with entropy limiting: drift of every conserved total.
fn conservation_suite() -> CheckOutcome {
    outcome(
        "conservation",
        (|| {
            let case = vortex_case(1.4, 2, 10, 5)?;
            let initial = case.initial.totals(&case.disc.mesh, &case.disc.ops);
            let scale = total_magnitudes(&case.disc, &case.initial);
            let out = case
                .simulate(&LimiterConfig::default(), &TimeConfig::new(0.5))
                .map_err(|f| f.source)?;
            let drift = conservation_drift(&initial, &scale, &out.records);
            Ok((drift <= 1e-11, format!("vortex, {} steps: relative drift {drift:.1e}", out.steps)))
        })(),
    )
}

/// Entropy-limited Sod: per-element, per-axis entropy residual after limiting.
fn entropy_suite() -> CheckOutcome {
    outcome(
        "entropy residuals",
        (|| {
            let case = sod_case(1.4, 3, 50)?;
            let out = case
                .simulate(&LimiterConfig::default(), &TimeConfig::new(0.05))
                .map_err(|f| f.source)?;
            let worst = out
                .records
                .iter()
                .map(|r| r.max_entropy_residual)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((worst <= 1e-10, format!("Sod, {} steps: max residual {worst:.1e}", out.steps)))
        })(),
    )
}

/// Every property suite, in order.
pub fn run_checks() -> Vec<CheckOutcome> {
    vec![operators_suite(), greedy_suite(), conservation_suite(), entropy_suite()]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every candidate vertex of the unreduced polytope.
    fn brute_vertex_optimum(lp: &LpInstance) -> f64 {
        let m = lp.len();
        assert!(m <= 12);
        let (a, u) = (&lp.coefficients, &lp.upper);
        let b = lp.bound.max(0.0);
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1u32 << m) {
            let on = |i: usize| mask & (1 << i) != 0;
            let lhs: f64 = (0..m).filter(|&i| on(i)).map(|i| a[i] * u[i]).sum();
            let sum: f64 = (0..m).filter(|&i| on(i)).map(|i| u[i]).sum();
            if lhs <= b {
                best = best.max(sum);
            }
            for j in (0..m).filter(|&j| a[j] != 0.0 && !on(j)) {
                let xj = (b - lhs) / a[j];
                if (0.0..=u[j]).contains(&xj) {
                    best = best.max(sum + xj);
                }
            }
        }
        best
    }

    fn lp(a: &[f64], b: f64, u: &[f64]) -> LpInstance {
        LpInstance {
            coefficients: a.to_vec(),
            bound: b,
            upper: u.to_vec(),
            magnitude: 0.0,
        }
    }

    #[test]
    fn hand_solved_instances() {
        let cases = [
            (lp(&[2.0, 1.0], 2.0, &[1.0, 1.0]), 1.5),
            (lp(&[-1.0, 3.0], 0.0, &[1.0, 1.0]), 4.0 / 3.0),
            (lp(&[1.0, 1.0, 1.0], 10.0, &[0.5, 0.5, 0.5]), 1.5),
            (lp(&[1.0], 0.0, &[1.0]), 0.0),
        ];
        for (instance, expected) in cases {
            for value in [vertex_optimum(&instance).unwrap(), dual_optimum(&instance), brute_vertex_optimum(&instance)]
            {
                assert!((value - expected).abs() < 1e-15, "{instance:?}: {value}");
            }
        }
    }

    #[test]
    fn split_enumeration_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let instance = random_lp(&mut rng, 12);
            let fast = vertex_optimum(&instance).unwrap();
            let brute = brute_vertex_optimum(&instance);
            assert!((fast - brute).abs() < 1e-10, "{instance:?}: {fast} vs {brute}");
        }
    }

    #[test]
    fn primal_and_dual_oracles_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let instance = random_lp(&mut rng, MAX_VERTEX_ENUMERATION);
            let (p, d) = (vertex_optimum(&instance).unwrap(), dual_optimum(&instance));
            assert!((p - d).abs() < 1e-9, "{instance:?}: {p} vs {d}");
        }
    }

    #[test]
    fn oversized_instances_are_refused() {
        assert!(vertex_optimum(&lp(&[1.0; 31], 1.0, &[1.0; 31])).is_none());
    }

    #[test]
    fn range_max_queries() {
        let t = SparseMax::new(vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0]);
        assert_eq!(t.query(0, 0), None);
        assert_eq!(t.query(1, 2), Some(1.0));
        assert_eq!(t.query(0, 4), Some(4.0));
        assert_eq!(t.query(0, 7), Some(9.0));
        assert_eq!(t.query(6, 7), Some(2.0));
    }

    #[test]
    fn operator_identities_hold() {
        assert!(operator_defects(8).unwrap().max() <= 1e-12);
    }
}
