//! Uniform Cartesian element meshes and their face topology.

use crate::error::{Result, SolverError};
use crate::operators::{Axis, OperatorSet};

/// Physical domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    XLow,
    XHigh,
    YLow,
    YHigh,
}

/// Supplies exterior states at non-periodic boundaries.
pub trait BoundaryCondition<const NC: usize>: Send + Sync {
    /// Exterior (ghost) state at `point` on `side`, given the interior trace.
    fn exterior(&self, side: Side, point: [f64; 2], interior: &[f64; NC]) -> [f64; NC];
}

/// What lies across an element face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Element(usize),
    Boundary(Side),
}

/// `kx × ky` uniform elements of degree `degree` on a rectangle. In 1D
/// `ky` is 1 and the y extent is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub degree: usize,
    pub kx: usize,
    pub ky: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub periodic: [bool; 2],
}

impl Mesh {
    pub fn new(
        dim: usize,
        degree: usize,
        kx: usize,
        ky: usize,
        x_range: (f64, f64),
        y_range: (f64, f64),
        periodic: [bool; 2],
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(SolverError::Contract(format!("dimension {dim} unsupported")));
        }
        if kx == 0 || ky == 0 {
            return Err(SolverError::config("mesh.k", "element counts must be positive"));
        }
        if dim == 1 && ky != 1 {
            return Err(SolverError::config("mesh.ky", "1D meshes have ky = 1"));
        }
        if !(x_range.1 > x_range.0) || (dim == 2 && !(y_range.1 > y_range.0)) {
            return Err(SolverError::Contract("empty domain".to_string()));
        }
        Ok(Mesh {
            dim,
            degree,
            kx,
            ky,
            x_range,
            y_range,
            periodic,
        })
    }

    pub fn hx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / self.kx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y_range.1 - self.y_range.0) / self.ky as f64
    }

    pub fn num_elements(&self) -> usize {
        self.kx * self.ky
    }

    pub fn nodes_1d(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_1d().pow(self.dim as u32)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_elements() * self.nodes_per_element()
    }

    /// Lines of nodes per element along one axis.
    pub fn lines_per_element(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.nodes_1d()
        }
    }

    pub fn element_coords(&self, e: usize) -> (usize, usize) {
        (e % self.kx, e / self.kx)
    }

    pub fn element_index(&self, ex: usize, ey: usize) -> usize {
        ex + self.kx * ey
    }

    /// Local node index of position `k` on `line` along `axis`.
    pub fn line_node(&self, axis: Axis, line: usize, k: usize) -> usize {
        let np = self.nodes_1d();
        match axis {
            Axis::X => k + np * line,
            Axis::Y => line + np * k,
        }
    }

    pub fn node_position(&self, ops: &OperatorSet, e: usize, n: usize) -> [f64; 2] {
        let np = self.nodes_1d();
        let (ex, ey) = self.element_coords(e);
        let r = &ops.rule.nodes;
        let x = self.x_range.0 + self.hx() * (ex as f64 + 0.5 * (r[n % np] + 1.0));
        let y = if self.dim == 1 {
            0.0
        } else {
            self.y_range.0 + self.hy() * (ey as f64 + 0.5 * (r[n / np] + 1.0))
        };
        [x, y]
    }

    /// Diagonal entry of the physical mass matrix at local node `n`.
    pub fn node_mass(&self, ops: &OperatorSet, n: usize) -> f64 {
        let np = self.nodes_1d();
        let w = &ops.mass;
        if self.dim == 1 {
            0.5 * self.hx() * w[n]
        } else {
            0.25 * self.hx() * self.hy() * w[n % np] * w[n / np]
        }
    }

    /// Transverse weight multiplying every 1D operator on `line` along
    /// `axis` (the `M_1D ⊗` factor together with the Jacobian).
    pub fn line_weight(&self, ops: &OperatorSet, axis: Axis, line: usize) -> f64 {
        match (self.dim, axis) {
            (1, _) => 1.0,
            (_, Axis::X) => 0.5 * self.hy() * ops.mass[line],
            (_, Axis::Y) => 0.5 * self.hx() * ops.mass[line],
        }
    }

    /// Faces per row (x) or column (y) of elements.
    pub fn faces_per_line(&self, axis: Axis) -> usize {
        let (k, periodic) = match axis {
            Axis::X => (self.kx, self.periodic[0]),
            Axis::Y => (self.ky, self.periodic[1]),
        };
        if periodic {
            k
        } else {
            k + 1
        }
    }

    /// Number of face quadrature nodes along `axis`.
    pub fn face_node_count(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.ky * self.faces_per_line(Axis::X) * self.lines_per_element(),
            Axis::Y => {
                if self.dim == 1 {
                    0
                } else {
                    self.kx * self.faces_per_line(Axis::Y) * self.nodes_1d()
                }
            }
        }
    }

    /// Face-table index of transverse node `k` on the low (`high = false`)
    /// or high face of element `e` along `axis`.
    pub fn face_slot(&self, e: usize, axis: Axis, high: bool, k: usize) -> usize {
        let (ex, ey) = self.element_coords(e);
        let nf = self.faces_per_line(axis);
        let per_face = match axis {
            Axis::X => self.lines_per_element(),
            Axis::Y => self.nodes_1d(),
        };
        let (row, pos) = match axis {
            Axis::X => (ey, ex),
            Axis::Y => (ex, ey),
        };
        let face = if high { (pos + 1) % nf } else { pos };
        (row * nf + face) * per_face + k
    }

    /// Element across the low or high face along `axis`.
    pub fn neighbor(&self, e: usize, axis: Axis, high: bool) -> Neighbor {
        let (ex, ey) = self.element_coords(e);
        let (pos, k, periodic) = match axis {
            Axis::X => (ex, self.kx, self.periodic[0]),
            Axis::Y => (ey, self.ky, self.periodic[1]),
        };
        let other = if high {
            if pos + 1 < k {
                Some(pos + 1)
            } else if periodic {
                Some(0)
            } else {
                None
            }
        } else if pos > 0 {
            Some(pos - 1)
        } else if periodic {
            Some(k - 1)
        } else {
            None
        };
        match (other, axis) {
            (Some(p), Axis::X) => Neighbor::Element(self.element_index(p, ey)),
            (Some(p), Axis::Y) => Neighbor::Element(self.element_index(ex, p)),
            (None, Axis::X) => Neighbor::Boundary(if high { Side::XHigh } else { Side::XLow }),
            (None, Axis::Y) => Neighbor::Boundary(if high { Side::YHigh } else { Side::YLow }),
        }
    }
}
