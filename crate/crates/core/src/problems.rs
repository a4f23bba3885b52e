//! Initial and boundary data of the benchmark problems.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::SolverError;
use crate::mesh::{BoundaryCondition, Side};
use crate::models::{conservative_from_primitive, IdealGas};

/// The shipped benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Sod,
    Kpp,
    Vortex,
    KelvinHelmholtz,
    AstroJet,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Sod,
        ProblemKind::Kpp,
        ProblemKind::Vortex,
        ProblemKind::KelvinHelmholtz,
        ProblemKind::AstroJet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Sod => "sod",
            ProblemKind::Kpp => "kpp",
            ProblemKind::Vortex => "vortex",
            ProblemKind::KelvinHelmholtz => "kelvin_helmholtz",
            ProblemKind::AstroJet => "astro_jet",
        }
    }

    pub fn setup(self) -> ProblemSetup {
        let unit = |lo: f64, hi: f64| (lo, hi);
        match self {
            ProblemKind::Sod => ProblemSetup {
                kind: self,
                dim: 1,
                x_range: unit(0.0, 1.0),
                y_range: unit(0.0, 0.0),
                periodic: [false, false],
                aspect: [1, 1],
                gamma: Some(1.4),
                final_time: 0.2,
                plot_range: None,
            },
            ProblemKind::Kpp => ProblemSetup {
                kind: self,
                dim: 2,
                x_range: unit(0.0, 2.0),
                y_range: unit(0.0, 2.0),
                periodic: [false, false],
                aspect: [1, 1],
                gamma: None,
                final_time: 1.0,
                plot_range: Some((-0.5, 12.0)),
            },
            ProblemKind::Vortex => ProblemSetup {
                kind: self,
                dim: 2,
                x_range: unit(0.0, 20.0),
                y_range: unit(0.0, 10.0),
                periodic: [true, true],
                aspect: [2, 1],
                gamma: Some(1.4),
                final_time: 1.0,
                plot_range: None,
            },
            ProblemKind::KelvinHelmholtz => ProblemSetup {
                kind: self,
                dim: 2,
                x_range: unit(-1.0, 1.0),
                y_range: unit(-1.0, 1.0),
                periodic: [true, true],
                aspect: [1, 1],
                gamma: Some(1.4),
                final_time: 10.0,
                plot_range: Some((0.5, 2.5)),
            },
            ProblemKind::AstroJet => ProblemSetup {
                kind: self,
                dim: 2,
                x_range: unit(-0.5, 0.5),
                y_range: unit(-0.5, 0.5),
                periodic: [false, false],
                aspect: [1, 1],
                gamma: Some(5.0 / 3.0),
                final_time: 0.001,
                plot_range: Some((0.01, 30.0)),
            },
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SolverError::UnknownProblem(s.to_string()))
    }
}

/// Geometry and defaults of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSetup {
    pub kind: ProblemKind,
    pub dim: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub periodic: [bool; 2],
    /// Element counts per unit of `K` along x and y.
    pub aspect: [usize; 2],
    /// Default ratio of specific heats, `None` for scalar problems.
    pub gamma: Option<f64>,
    pub final_time: f64,
    /// Value range used by the reference figures.
    pub plot_range: Option<(f64, f64)>,
}

/// Exterior state for periodic meshes, which never query it.
#[derive(Debug, Clone, Copy)]
pub struct Periodic;

impl<const NC: usize> BoundaryCondition<NC> for Periodic {
    fn exterior(&self, _: Side, _: [f64; 2], interior: &[f64; NC]) -> [f64; NC] {
        *interior
    }
}

pub const SOD_INTERFACE: f64 = 0.3;
pub const SOD_LEFT: [f64; 3] = [1.0, 0.75, 1.0];
pub const SOD_RIGHT: [f64; 3] = [0.125, 0.0, 0.1];

/// Modified Sod primitive state `[ρ, u, p]`.
pub fn sod_primitive(x: f64) -> [f64; 3] {
    if x < SOD_INTERFACE {
        SOD_LEFT
    } else {
        SOD_RIGHT
    }
}

pub fn sod_initial(gas: &IdealGas, x: [f64; 2]) -> [f64; 3] {
    conservative_from_primitive(gas, &sod_primitive(x[0]))
}

/// Inflow of the left state on the left, zero-gradient
/// outflow on the right.
#[derive(Debug, Clone, Copy)]
pub struct SodBoundary {
    pub gas: IdealGas,
}

impl BoundaryCondition<3> for SodBoundary {
    fn exterior(&self, side: Side, _: [f64; 2], interior: &[f64; 3]) -> [f64; 3] {
        match side {
            Side::XLow => conservative_from_primitive(&self.gas, &SOD_LEFT),
            _ => *interior,
        }
    }
}

/// Exact self-similar solution `[ρ, u, p]` of the 1D Riemann problem with
/// primitive states `left`, `right` at `ξ = x / t`.
pub fn riemann_exact(gamma: f64, left: [f64; 3], right: [f64; 3], xi: f64) -> [f64; 3] {
    let g = gamma;
    let sound = |w: [f64; 3]| (g * w[2] / w[0]).sqrt();
    let (cl, cr) = (sound(left), sound(right));
    // pressure function of one side and its derivative
    let side = |p: f64, w: [f64; 3], c: f64| -> (f64, f64) {
        if p > w[2] {
            let a = 2.0 / ((g + 1.0) * w[0]);
            let b = (g - 1.0) / (g + 1.0) * w[2];
            let q = (a / (p + b)).sqrt();
            ((p - w[2]) * q, q * (1.0 - 0.5 * (p - w[2]) / (p + b)))
        } else {
            let r = p / w[2];
            (
                2.0 * c / (g - 1.0) * (r.powf((g - 1.0) / (2.0 * g)) - 1.0),
                r.powf(-(g + 1.0) / (2.0 * g)) / (w[0] * c),
            )
        }
    };
    let du = right[1] - left[1];
    let mut p = (0.5 * (left[2] + right[2])).max(1e-8);
    for _ in 0..100 {
        let (fl, dl) = side(p, left, cl);
        let (fr, dr) = side(p, right, cr);
        let next = (p - (fl + fr + du) / (dl + dr)).max(1e-12);
        let done = (next - p).abs() <= 1e-15 * p;
        p = next;
        if done {
            break;
        }
    }
    let (fl, _) = side(p, left, cl);
    let (fr, _) = side(p, right, cr);
    let u = 0.5 * (left[1] + right[1]) + 0.5 * (fr - fl);

    let (w, c, sign) = if xi <= u { (left, cl, 1.0) } else { (right, cr, -1.0) };
    // sign = 1: left wave family, sign = -1: right family (mirrored)
    let (rho_k, u_k, p_k) = (w[0], sign * w[1], w[2]);
    let (us, xs) = (sign * u, sign * xi);
    if p > p_k {
        let ratio = p / p_k;
        let gm = (g - 1.0) / (g + 1.0);
        let shock = u_k - c * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
        if xs <= shock {
            [rho_k, sign * u_k, p_k]
        } else {
            [rho_k * (ratio + gm) / (gm * ratio + 1.0), sign * us, p]
        }
    } else {
        let cs = c * (p / p_k).powf((g - 1.0) / (2.0 * g));
        let head = u_k - c;
        let tail = us - cs;
        if xs <= head {
            [rho_k, sign * u_k, p_k]
        } else if xs >= tail {
            [rho_k * (p / p_k).powf(1.0 / g), sign * us, p]
        } else {
            let k = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (u_k - xs);
            let vel = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * u_k + xs);
            [rho_k * k.powf(2.0 / (g - 1.0)), sign * vel, p_k * k.powf(2.0 * g / (g - 1.0))]
        }
    }
}

/// Exact modified Sod solution `[ρ, u, p]`.
pub fn sod_exact(gamma: f64, x: f64, t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return sod_primitive(x);
    }
    riemann_exact(gamma, SOD_LEFT, SOD_RIGHT, (x - SOD_INTERFACE) / t)
}

pub const KPP_CENTER: [f64; 2] = [1.0, 1.0];
pub const KPP_RADIUS: f64 = 0.5;
pub const KPP_INSIDE: f64 = 3.5 * PI;
pub const KPP_OUTSIDE: f64 = 0.25 * PI;

pub fn kpp_initial(x: [f64; 2]) -> [f64; 1] {
    let r2 = (x[0] - KPP_CENTER[0]).powi(2) + (x[1] - KPP_CENTER[1]).powi(2);
    if r2 <= KPP_RADIUS * KPP_RADIUS {
        [KPP_INSIDE]
    } else {
        [KPP_OUTSIDE]
    }
}

/// Far-field state on every side.
#[derive(Debug, Clone, Copy)]
pub struct KppBoundary;

impl BoundaryCondition<1> for KppBoundary {
    fn exterior(&self, _: Side, _: [f64; 2], _: &[f64; 1]) -> [f64; 1] {
        [KPP_OUTSIDE]
    }
}

/// Isentropic vortex parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    pub strength: f64,
    pub center: [f64; 2],
    /// Background `[ρ, u, v, p]`.
    pub background: [f64; 4],
    pub x_range: (f64, f64),
}

impl Default for Vortex {
    fn default() -> Self {
        Vortex {
            strength: 5.0,
            center: [5.0, 5.0],
            background: [1.0, 1.0, 0.0, 1.0],
            x_range: (0.0, 20.0),
        }
    }
}

impl Vortex {
    /// Exact primitive state at `x` and time `t`, advected with the
    /// background velocity and wrapped periodically in x.
    pub fn primitive(&self, gas: &IdealGas, x: [f64; 2], t: f64) -> [f64; 4] {
        let [_, u0, v0, _] = self.background;
        let length = self.x_range.1 - self.x_range.0;
        let cx = self.center[0] + u0 * t;
        let mut dx = (x[0] - cx) % length;
        if dx > 0.5 * length {
            dx -= length;
        } else if dx < -0.5 * length {
            dx += length;
        }
        let dy = x[1] - (self.center[1] + v0 * t);
        let r2 = dx * dx + dy * dy;
        let g = gas.gamma;
        let beta = self.strength;
        let bump = (0.5 * (1.0 - r2)).exp();
        let temperature = 1.0 - (g - 1.0) * beta * beta * (1.0 - r2).exp() / (8.0 * g * PI * PI);
        let rho = temperature.powf(1.0 / (g - 1.0));
        [
            rho,
            u0 - beta * bump * dy / (2.0 * PI),
            v0 + beta * bump * dx / (2.0 * PI),
            rho * temperature,
        ]
    }

    pub fn state(&self, gas: &IdealGas, x: [f64; 2], t: f64) -> [f64; 4] {
        conservative_from_primitive(gas, &self.primitive(gas, x, t))
    }
}

/// `B(y) = tanh(15y + 7.5) - tanh(15y - 7.5)`.
pub fn shear_layer(y: f64) -> f64 {
    (15.0 * y + 7.5).tanh() - (15.0 * y - 7.5).tanh()
}

pub fn kelvin_helmholtz_primitive(x: [f64; 2]) -> [f64; 4] {
    let b = shear_layer(x[1]);
    [
        0.5 + 0.75 * b,
        0.5 * (b - 1.0),
        0.1 * (2.0 * PI * x[0]).sin(),
        1.0,
    ]
}

pub fn kelvin_helmholtz_initial(gas: &IdealGas, x: [f64; 2]) -> [f64; 4] {
    conservative_from_primitive(gas, &kelvin_helmholtz_primitive(x))
}

pub const JET_AMBIENT: [f64; 4] = [0.5, 0.0, 0.0, 0.4127];
pub const JET_INFLOW: [f64; 4] = [5.0, 800.0, 0.0, 0.4127];
pub const JET_HALF_WIDTH: f64 = 0.05;

pub fn astro_jet_initial(gas: &IdealGas, _: [f64; 2]) -> [f64; 4] {
    conservative_from_primitive(gas, &JET_AMBIENT)
}

/// Jet inflow on the left strip `|y| ≤ 0.05`, the ambient state on the
/// rest of the left side, zero-gradient outflow on the other sides.
#[derive(Debug, Clone, Copy)]
pub struct AstroJetBoundary {
    pub gas: IdealGas,
}

/// Slack on the strip test so that nodes on `y = ±0.05` are treated alike.
const STRIP_SLACK: f64 = 1e-12;

impl BoundaryCondition<4> for AstroJetBoundary {
    fn exterior(&self, side: Side, point: [f64; 2], interior: &[f64; 4]) -> [f64; 4] {
        match side {
            Side::XLow if point[1].abs() <= JET_HALF_WIDTH + STRIP_SLACK => {
                conservative_from_primitive(&self.gas, &JET_INFLOW)
            }
            Side::XLow => conservative_from_primitive(&self.gas, &JET_AMBIENT),
            _ => *interior,
        }
    }
}
