//! Legendre-Gauss-Lobatto quadrature and the reference-element operators.
//!
//! All one-dimensional operators are small dense matrices. Two-dimensional
//! actions are applied line by line following the tensor-product structure,
//! with node index `i + (N+1) * j` where `i` runs along `x` (fast index) and
//! `j` along `y` (slow index). In Kronecker notation `A ⊗ B` therefore means
//! `B` acts along `x` and `A` along `y`.

use nalgebra::DMatrix;

use crate::error::{Result, SolverError};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Coordinate direction of a tensor-product operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const ALL: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    /// Axes active in a `dim`-dimensional problem.
    pub fn active(dim: usize) -> &'static [Axis] {
        &Self::ALL[..dim]
    }

    pub fn unit_normal(self) -> [f64; 2] {
        match self {
            Axis::X => [1.0, 0.0],
            Axis::Y => [0.0, 1.0],
        }
    }
}

/// One-dimensional Lobatto quadrature rule of degree `N` (N+1 nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomials `P_0..=P_n` at `x`.
fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// Orthonormal Legendre polynomial of degree `k` on [-1, 1].
pub fn orthonormal_legendre(k: usize, x: f64) -> f64 {
    legendre_values(k, x)[k] * ((2 * k + 1) as f64 / 2.0).sqrt()
}

/// LGL nodes and weights for degree `n`.
///
/// The interior nodes are roots of `(1 - r^2) P'_N(r)`; they are found by
/// Newton iteration on `r P_N - P_{N-1}` started from Chebyshev-Lobatto
/// points, which keeps the endpoints fixed at exactly ±1.
pub fn lgl_rule(n: usize) -> Result<QuadratureRule1D> {
    if !(1..=MAX_DEGREE).contains(&n) {
        return Err(SolverError::config(
            "mesh.degree",
            format!("polynomial degree must be in 1..={MAX_DEGREE}, got {n}"),
        ));
    }
    let nf = n as f64;
    let mut x: Vec<f64> = (0..=n)
        .map(|k| (std::f64::consts::PI * k as f64 / nf).cos())
        .collect();
    let mut p_n = vec![0.0; n + 1];
    for _ in 0..NEWTON_MAX_ITER {
        let mut change: f64 = 0.0;
        for (xk, pk) in x.iter_mut().zip(p_n.iter_mut()) {
            let p = legendre_values(n, *xk);
            let step = (*xk * p[n] - p[n - 1]) / ((nf + 1.0) * p[n]);
            *xk -= step;
            *pk = p[n];
            change = change.max(step.abs());
        }
        if change <= NEWTON_TOL {
            break;
        }
    }
    for (xk, pk) in x.iter().zip(p_n.iter_mut()) {
        *pk = legendre_values(n, *xk)[n];
    }
    let mut nodes: Vec<f64> = x.iter().rev().copied().collect();
    let mut weights: Vec<f64> = p_n
        .iter()
        .rev()
        .map(|p| 2.0 / (nf * (nf + 1.0) * p * p))
        .collect();
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    // symmetrize to remove the last ulp of Newton noise
    for k in 0..=n / 2 {
        let r = 0.5 * (nodes[n - k] - nodes[k]);
        nodes[k] = -r;
        nodes[n - k] = r;
        let w = 0.5 * (weights[k] + weights[n - k]);
        weights[k] = w;
        weights[n - k] = w;
    }
    if n.is_multiple_of(2) {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule1D {
        degree: n,
        nodes,
        weights,
    })
}

/// Reference-element operators for one polynomial degree.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub rule: QuadratureRule1D,
    /// Diagonal of the lumped mass matrix.
    pub mass: Vec<f64>,
    /// `D[i][j] = L_j'(r_i)`.
    pub diff: DMatrix<f64>,
    /// `Q = M D`, satisfies `Q + Q^T = B^T diag(-1, 1) E`.
    pub sbp: DMatrix<f64>,
    /// Face boundary matrix, 2 x (N+1).
    pub boundary: DMatrix<f64>,
    /// Face extrapolation matrix, 2 x (N+1).
    pub extrapolation: DMatrix<f64>,
    /// Sparse low-order operator built from piecewise-linear subcells.
    pub low_order: DMatrix<f64>,
    /// Volume part of the subcell difference operator, (N+1) x (N+2).
    pub diff_volume: DMatrix<f64>,
    /// Surface part of the subcell difference operator, (N+1) x (N+2).
    pub diff_surface: DMatrix<f64>,
    /// Inverse of the orthonormal Legendre Vandermonde matrix (nodal -> modal).
    pub modal_inverse: DMatrix<f64>,
}

/// Build every 1D operator for degree `n`.
pub fn build_operator_set(n: usize) -> Result<OperatorSet> {
    let rule = lgl_rule(n)?;
    let np = n + 1;
    let r = &rule.nodes;

    // barycentric weights
    let bary: Vec<f64> = (0..np)
        .map(|j| {
            1.0 / (0..np)
                .filter(|&k| k != j)
                .map(|k| r[j] - r[k])
                .product::<f64>()
        })
        .collect();
    let mut diff = DMatrix::zeros(np, np);
    for i in 0..np {
        let mut diag = 0.0;
        for j in 0..np {
            if i != j {
                let dij = (bary[j] / bary[i]) / (r[i] - r[j]);
                diff[(i, j)] = dij;
                diag -= dij;
            }
        }
        diff[(i, i)] = diag;
    }
    let mass = rule.weights.clone();
    let sbp = DMatrix::from_fn(np, np, |i, j| mass[i] * diff[(i, j)]);

    let mut boundary = DMatrix::zeros(2, np);
    boundary[(0, 0)] = -1.0;
    boundary[(1, n)] = 1.0;
    let mut extrapolation = DMatrix::zeros(2, np);
    extrapolation[(0, 0)] = 1.0;
    extrapolation[(1, n)] = 1.0;

    let mut low_order = DMatrix::zeros(np, np);
    low_order[(0, 0)] = -0.5;
    low_order[(n, n)] = 0.5;
    for i in 0..n {
        low_order[(i, i + 1)] = 0.5;
        low_order[(i + 1, i)] = -0.5;
    }

    let mut diff_volume = DMatrix::zeros(np, np + 1);
    let mut diff_surface = DMatrix::zeros(np, np + 1);
    for i in 0..np {
        if i > 0 {
            diff_volume[(i, i)] = -1.0;
        }
        if i < n {
            diff_volume[(i, i + 1)] = 1.0;
        }
    }
    diff_surface[(0, 0)] = -1.0;
    diff_surface[(n, n + 1)] = 1.0;

    let vandermonde = DMatrix::from_fn(np, np, |i, k| orthonormal_legendre(k, r[i]));
    let modal_inverse = vandermonde.try_inverse().ok_or_else(|| {
        SolverError::Contract("singular Legendre Vandermonde matrix".to_string())
    })?;

    Ok(OperatorSet {
        rule,
        mass,
        diff,
        sbp,
        boundary,
        extrapolation,
        low_order,
        diff_volume,
        diff_surface,
        modal_inverse,
    })
}

impl OperatorSet {
    pub fn degree(&self) -> usize {
        self.rule.degree
    }

    pub fn nodes_1d(&self) -> usize {
        self.rule.degree + 1
    }

    /// Nodes per element in `dim` dimensions.
    pub fn nodes_per_element(&self, dim: usize) -> usize {
        self.nodes_1d().pow(dim as u32)
    }

    /// Nonzero pattern of the skew part `Q^L - Q^L^T`, which also defines the
    /// low-order stencil of each node.
    pub fn low_order_skew(&self, i: usize, j: usize) -> f64 {
        self.low_order[(i, j)] - self.low_order[(j, i)]
    }
}

/// Square reference operators that can be applied along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorId {
    /// `M ⊗ M`.
    Mass,
    /// `I ⊗ D` along x, `D ⊗ I` along y.
    Differentiation,
    /// `M ⊗ Q` along x, `Q ⊗ M` along y.
    Sbp,
    /// `M ⊗ Q^L` along x, `Q^L ⊗ M` along y.
    LowOrder,
}

fn line_nodes(np: usize, axis: Axis, line: usize) -> impl Iterator<Item = usize> {
    (0..np).map(move |k| match axis {
        Axis::X => k + np * line,
        Axis::Y => line + np * k,
    })
}

/// Apply a reference operator to a scalar nodal field without forming the
/// Kronecker product.
pub fn apply_axis(
    ops: &OperatorSet,
    op: OperatorId,
    axis: Axis,
    field: &[f64],
    dim: usize,
) -> Result<Vec<f64>> {
    let np = ops.nodes_1d();
    if !(1..=2).contains(&dim) || field.len() != np.pow(dim as u32) {
        return Err(SolverError::Contract(format!(
            "field of length {} does not match degree {} in {dim}D",
            field.len(),
            ops.degree()
        )));
    }
    if dim == 1 && axis == Axis::Y {
        return Err(SolverError::Contract("y axis in a 1D field".to_string()));
    }
    if op == OperatorId::Mass {
        return Ok(field
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let w = if dim == 1 {
                    ops.mass[n]
                } else {
                    ops.mass[n % np] * ops.mass[n / np]
                };
                w * v
            })
            .collect());
    }
    let (matrix, transverse_mass) = match op {
        OperatorId::Differentiation => (&ops.diff, false),
        OperatorId::Sbp => (&ops.sbp, true),
        OperatorId::LowOrder => (&ops.low_order, true),
        OperatorId::Mass => unreachable!(),
    };
    let lines = if dim == 1 { 1 } else { np };
    let mut out = vec![0.0; field.len()];
    let mut buf = vec![0.0; np];
    for line in 0..lines {
        let scale = if transverse_mass && dim == 2 {
            ops.mass[line]
        } else {
            1.0
        };
        for (k, n) in line_nodes(np, axis, line).enumerate() {
            buf[k] = field[n];
        }
        for (k, n) in line_nodes(np, axis, line).enumerate() {
            let s: f64 = (0..np).map(|m| matrix[(k, m)] * buf[m]).sum();
            out[n] = scale * s;
        }
    }
    Ok(out)
}

/// Which part of the subcell difference operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferencePart {
    Full,
    Volume,
    Surface,
}

/// Apply `Δ_k` to subcell fluxes stored line-major: entry `line * (N+2) + i`
/// is interface `i` on `line` (a row of constant `y` for the x axis, a column
/// of constant `x` for the y axis). Returns nodal values.
pub fn apply_difference(
    ops: &OperatorSet,
    part: DifferencePart,
    axis: Axis,
    fbar: &[f64],
    dim: usize,
) -> Result<Vec<f64>> {
    let np = ops.nodes_1d();
    let lines = if dim == 1 { 1 } else { np };
    if fbar.len() != lines * (np + 1) {
        return Err(SolverError::Contract(format!(
            "subcell flux array of length {} does not match degree {}",
            fbar.len(),
            ops.degree()
        )));
    }
    let mut out = vec![0.0; np.pow(dim as u32)];
    for line in 0..lines {
        let f = &fbar[line * (np + 1)..(line + 1) * (np + 1)];
        for (k, n) in line_nodes(np, axis, line).enumerate() {
            let mut s = 0.0;
            for (m, fm) in f.iter().enumerate() {
                let c = match part {
                    DifferencePart::Full => ops.diff_volume[(k, m)] + ops.diff_surface[(k, m)],
                    DifferencePart::Volume => ops.diff_volume[(k, m)],
                    DifferencePart::Surface => ops.diff_surface[(k, m)],
                };
                s += c * fm;
            }
            out[n] = s;
        }
    }
    Ok(out)
}
