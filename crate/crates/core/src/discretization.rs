//! High-order DGSEM and low-order graph-viscosity residuals in algebraic
//! subcell flux form.
//!
//! Every residual is mass weighted (`M du/dt`). Along each axis an element
//! is a set of independent node lines; each line carries `N + 2` subcell
//! fluxes whose differences reproduce the line residual. The first and last
//! subcell fluxes equal the negated, line-weighted interface flux, so any
//! convex blend of high- and low-order subcell fluxes stays conservative.

use rayon::prelude::*;

use crate::error::{Result, SolverError};
use crate::mesh::{BoundaryCondition, Mesh, Neighbor};
use crate::models::{llf_flux_unchecked, ConservationLaw};
use crate::operators::{Axis, OperatorSet};

/// Conservative states at every node, element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField<const NC: usize> {
    pub nodes_per_element: usize,
    pub values: Vec<[f64; NC]>,
}

impl<const NC: usize> ElementField<NC> {
    pub fn new(mesh: &Mesh, values: Vec<[f64; NC]>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(SolverError::Contract(format!(
                "{} nodal states for a mesh of {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        Ok(ElementField {
            nodes_per_element: mesh.nodes_per_element(),
            values,
        })
    }

    /// Sample `init` at every node.
    pub fn from_fn(mesh: &Mesh, ops: &OperatorSet, init: impl Fn([f64; 2]) -> [f64; NC]) -> Self {
        let npe = mesh.nodes_per_element();
        let values = (0..mesh.num_elements())
            .flat_map(|e| (0..npe).map(move |n| (e, n)))
            .map(|(e, n)| init(mesh.node_position(ops, e, n)))
            .collect();
        ElementField {
            nodes_per_element: npe,
            values,
        }
    }

    pub fn num_elements(&self) -> usize {
        self.values.len() / self.nodes_per_element
    }

    pub fn element(&self, e: usize) -> &[[f64; NC]] {
        &self.values[e * self.nodes_per_element..(e + 1) * self.nodes_per_element]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [[f64; NC]] {
        let npe = self.nodes_per_element;
        &mut self.values[e * npe..(e + 1) * npe]
    }

    /// `Σ m_i u_i` per component.
    pub fn totals(&self, mesh: &Mesh, ops: &OperatorSet) -> [f64; NC] {
        let mut out = [0.0; NC];
        for (k, u) in self.values.iter().enumerate() {
            let m = mesh.node_mass(ops, k % self.nodes_per_element);
            for c in 0..NC {
                out[c] += m * u[c];
            }
        }
        out
    }
}

/// Interface data at one face quadrature node. `left` is the state on the
/// low-coordinate side, `right` on the high side, and `flux` the LLF flux
/// with normal `+e_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceNode<const NC: usize> {
    pub left: [f64; NC],
    pub right: [f64; NC],
    pub flux: [f64; NC],
    pub wavespeed: f64,
}

/// Numerical fluxes at every face node, computed once per stage.
#[derive(Debug, Clone)]
pub struct FaceTable<const NC: usize> {
    axes: [Vec<FaceNode<NC>>; 2],
}

impl<const NC: usize> FaceTable<NC> {
    pub fn get(&self, axis: Axis, slot: usize) -> &FaceNode<NC> {
        &self.axes[axis.index()][slot]
    }

    pub fn nodes(&self, axis: Axis) -> &[FaceNode<NC>] {
        &self.axes[axis.index()]
    }
}

/// Subcell fluxes of one element along one axis, stored line-major with
/// `N + 2` entries per line.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcellFluxes<const NC: usize> {
    pub high: Vec<[f64; NC]>,
    pub low: Vec<[f64; NC]>,
}

impl<const NC: usize> SubcellFluxes<NC> {
    pub fn zeros(lines: usize, degree: usize) -> Self {
        let n = lines * (degree + 2);
        SubcellFluxes {
            high: vec![[0.0; NC]; n],
            low: vec![[0.0; NC]; n],
        }
    }
}

/// Mass-weighted rate `M du/dt` at every node, element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual<const NC: usize> {
    pub values: Vec<[f64; NC]>,
}

/// Scratch buffers for one line.
#[derive(Debug, Clone)]
pub struct LineScratch<const NC: usize> {
    states: Vec<[f64; NC]>,
    fluxes: Vec<[f64; NC]>,
    residual: Vec<[f64; NC]>,
}

impl<const NC: usize> LineScratch<NC> {
    pub fn new(degree: usize) -> Self {
        LineScratch {
            states: vec![[0.0; NC]; degree + 1],
            fluxes: vec![[0.0; NC]; degree + 1],
            residual: vec![[0.0; NC]; degree + 1],
        }
    }
}

/// DGSEM residual of one line: `c [-Q f - E^T B (f* - f)]`.
#[allow(clippy::too_many_arguments)]
pub fn dgsem_line<M, const NC: usize>(
    ops: &OperatorSet,
    model: &M,
    axis: Axis,
    weight: f64,
    states: &[[f64; NC]],
    left_flux: &[f64; NC],
    right_flux: &[f64; NC],
    fluxes: &mut [[f64; NC]],
    out: &mut [[f64; NC]],
) where
    M: ConservationLaw<NC>,
{
    let np = states.len();
    let n = np - 1;
    for (f, u) in fluxes.iter_mut().zip(states) {
        *f = model.flux(u, axis);
    }
    for i in 0..np {
        let mut r = [0.0; NC];
        for m in 0..np {
            let q = ops.sbp[(i, m)];
            for c in 0..NC {
                r[c] -= q * fluxes[m][c];
            }
        }
        if i == 0 {
            for c in 0..NC {
                r[c] += left_flux[c] - fluxes[0][c];
            }
        }
        if i == n {
            for c in 0..NC {
                r[c] -= right_flux[c] - fluxes[n][c];
            }
        }
        for c in 0..NC {
            out[i][c] = weight * r[c];
        }
    }
}

/// Low-order residual of one line: skew-symmetric central fluxes plus
/// graph viscosity `½ |S_ij| λ_ij (u_j - u_i)` and the surface term
/// `-E^T B f*`.
#[allow(clippy::too_many_arguments)]
pub fn low_order_line<M, const NC: usize>(
    ops: &OperatorSet,
    model: &M,
    axis: Axis,
    weight: f64,
    states: &[[f64; NC]],
    left_flux: &[f64; NC],
    right_flux: &[f64; NC],
    fluxes: &mut [[f64; NC]],
    out: &mut [[f64; NC]],
) where
    M: ConservationLaw<NC>,
{
    let np = states.len();
    let n = np - 1;
    let normal = axis.unit_normal();
    for (f, u) in fluxes.iter_mut().zip(states) {
        *f = model.flux(u, axis);
    }
    for r in out.iter_mut() {
        *r = [0.0; NC];
    }
    // the stencil of Q^L - Q^L^T couples nearest neighbours only
    for i in 0..n {
        let j = i + 1;
        let s = ops.low_order_skew(i, j);
        let lambda = model.max_wavespeed(&states[i], &states[j], normal);
        let visc = 0.5 * s.abs() * lambda;
        for c in 0..NC {
            let central = 0.5 * s * (fluxes[i][c] + fluxes[j][c]);
            let diffusion = visc * (states[j][c] - states[i][c]);
            // S_ji = -S_ij and the viscosity is symmetric
            out[i][c] += -central + diffusion;
            out[j][c] += central - diffusion;
        }
    }
    for c in 0..NC {
        out[0][c] += left_flux[c];
        out[n][c] -= right_flux[c];
    }
    for r in out.iter_mut() {
        for v in r.iter_mut() {
            *v *= weight;
        }
    }
}

/// Relative tolerance of the per-line conservation check in recovery.
pub const RECOVERY_TOLERANCE: f64 = 1e-10;

/// Mismatch between the recovered last subcell flux and the interface flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryMismatch(pub f64);

/// Recover subcell fluxes from a full line residual (volume and surface
/// parts) by cumulative summation, starting from `-left_weighted` and
/// checking that the sum closes at `-right_weighted`. On success the last
/// entry is set to exactly `-right_weighted`.
pub fn recover_subcell_fluxes<const NC: usize>(
    residual: &[[f64; NC]],
    left_weighted: &[f64; NC],
    right_weighted: &[f64; NC],
    out: &mut [[f64; NC]],
) -> std::result::Result<(), RecoveryMismatch> {
    let np = residual.len();
    debug_assert_eq!(out.len(), np + 1);
    let mut acc = [0.0; NC];
    let mut scale = 0.0f64;
    for c in 0..NC {
        acc[c] = -left_weighted[c];
        scale = scale.max(acc[c].abs()).max(right_weighted[c].abs());
    }
    out[0] = acc;
    for (i, r) in residual.iter().enumerate() {
        for c in 0..NC {
            acc[c] += r[c];
            scale = scale.max(acc[c].abs());
        }
        out[i + 1] = acc;
    }
    let mismatch = (0..NC)
        .map(|c| (acc[c] + right_weighted[c]).abs())
        .fold(0.0, f64::max);
    if !(mismatch <= RECOVERY_TOLERANCE * scale) {
        return Err(RecoveryMismatch(mismatch));
    }
    for c in 0..NC {
        out[np][c] = -right_weighted[c];
    }
    Ok(())
}

/// Apply the full difference operator of one line: `r_i = f̄_{i+1} - f̄_i`,
/// accumulated into `out`.
fn add_line_difference<const NC: usize>(fbar: &[[f64; NC]], out: &mut [[f64; NC]]) {
    for (i, r) in out.iter_mut().enumerate() {
        for c in 0..NC {
            r[c] += fbar[i + 1][c] - fbar[i][c];
        }
    }
}

/// The semi-discretization: model, operators, mesh and boundary data.
pub struct Discretization<M, const NC: usize> {
    pub model: M,
    pub ops: OperatorSet,
    pub mesh: Mesh,
    pub boundary: Box<dyn BoundaryCondition<NC>>,
}

impl<M, const NC: usize> Discretization<M, NC>
where
    M: ConservationLaw<NC>,
{
    pub fn new(
        model: M,
        ops: OperatorSet,
        mesh: Mesh,
        boundary: Box<dyn BoundaryCondition<NC>>,
    ) -> Result<Self> {
        if M::DIM != mesh.dim {
            return Err(SolverError::Contract(format!(
                "{}D model on a {}D mesh",
                M::DIM,
                mesh.dim
            )));
        }
        if ops.degree() != mesh.degree {
            return Err(SolverError::Contract(
                "operator degree differs from mesh degree".to_string(),
            ));
        }
        Ok(Discretization {
            model,
            ops,
            mesh,
            boundary,
        })
    }

    pub fn axes(&self) -> &'static [Axis] {
        Axis::active(self.mesh.dim)
    }

    pub fn new_field(&self, values: Vec<[f64; NC]>) -> Result<ElementField<NC>> {
        ElementField::new(&self.mesh, values)
    }

    /// Fail with element and node on the first inadmissible state.
    pub fn check_admissible(&self, field: &ElementField<NC>) -> Result<()> {
        let npe = field.nodes_per_element;
        match field.values.iter().position(|u| !self.model.is_admissible(u)) {
            None => Ok(()),
            Some(k) => Err(SolverError::Admissibility {
                element: k / npe,
                node: k % npe,
                stage: None,
                state: field.values[k].to_vec(),
            }),
        }
    }

    /// Gather the states of `line` along `axis` in element `e`.
    pub fn gather_line(
        &self,
        field: &ElementField<NC>,
        e: usize,
        axis: Axis,
        line: usize,
        out: &mut [[f64; NC]],
    ) {
        let elem = field.element(e);
        for (k, u) in out.iter_mut().enumerate() {
            *u = elem[self.mesh.line_node(axis, line, k)];
        }
    }

    /// Compute interface states and LLF fluxes at every face node.
    pub fn face_table(&self, field: &ElementField<NC>) -> Result<FaceTable<NC>> {
        self.check_admissible(field)?;
        let mesh = &self.mesh;
        let n = mesh.degree;
        let empty = FaceNode {
            left: [0.0; NC],
            right: [0.0; NC],
            flux: [0.0; NC],
            wavespeed: 0.0,
        };
        let mut axes = [
            vec![empty; mesh.face_node_count(Axis::X)],
            vec![empty; mesh.face_node_count(Axis::Y)],
        ];
        for &axis in self.axes() {
            let table = &mut axes[axis.index()];
            for e in 0..mesh.num_elements() {
                let elem = field.element(e);
                for k in 0..mesh.lines_per_element() {
                    let low = elem[mesh.line_node(axis, k, 0)];
                    let high = elem[mesh.line_node(axis, k, n)];
                    table[mesh.face_slot(e, axis, true, k)].left = high;
                    table[mesh.face_slot(e, axis, false, k)].right = low;
                    for (is_high, trace) in [(false, low), (true, high)] {
                        if let Neighbor::Boundary(side) = mesh.neighbor(e, axis, is_high) {
                            let node = mesh.line_node(axis, k, if is_high { n } else { 0 });
                            let point = mesh.node_position(&self.ops, e, node);
                            let ghost = self.boundary.exterior(side, point, &trace);
                            if !self.model.is_admissible(&ghost) {
                                return Err(SolverError::InadmissibleState {
                                    state: ghost.to_vec(),
                                });
                            }
                            let slot = mesh.face_slot(e, axis, is_high, k);
                            if is_high {
                                table[slot].right = ghost;
                            } else {
                                table[slot].left = ghost;
                            }
                        }
                    }
                }
            }
            let normal = axis.unit_normal();
            table.par_iter_mut().for_each(|face| {
                let (flux, lambda) = llf_flux_unchecked(&self.model, &face.left, &face.right, normal);
                face.flux = flux;
                face.wavespeed = lambda;
            });
        }
        Ok(FaceTable { axes })
    }

    /// Interface fluxes bounding `line` of element `e` along `axis`.
    pub fn line_face_fluxes<'a>(
        &self,
        faces: &'a FaceTable<NC>,
        e: usize,
        axis: Axis,
        line: usize,
    ) -> (&'a FaceNode<NC>, &'a FaceNode<NC>) {
        (
            faces.get(axis, self.mesh.face_slot(e, axis, false, line)),
            faces.get(axis, self.mesh.face_slot(e, axis, true, line)),
        )
    }

    /// High- and low-order subcell fluxes of element `e` along every axis.
    pub fn element_subcell_fluxes(
        &self,
        field: &ElementField<NC>,
        faces: &FaceTable<NC>,
        e: usize,
        scratch: &mut LineScratch<NC>,
        out: &mut [SubcellFluxes<NC>],
    ) -> Result<()> {
        let n = self.mesh.degree;
        let stride = n + 2;
        for (&axis, fluxes) in self.axes().iter().zip(out.iter_mut()) {
            for line in 0..self.mesh.lines_per_element() {
                let c = self.mesh.line_weight(&self.ops, axis, line);
                let (lo, hi) = self.line_face_fluxes(faces, e, axis, line);
                let mut left = lo.flux;
                let mut right = hi.flux;
                for k in 0..NC {
                    left[k] *= c;
                    right[k] *= c;
                }
                self.gather_line(field, e, axis, line, &mut scratch.states);
                let range = line * stride..(line + 1) * stride;
                let mismatch = |m: RecoveryMismatch| SolverError::Consistency {
                    element: e,
                    axis: axis.index(),
                    line,
                    mismatch: m.0,
                };

                dgsem_line(
                    &self.ops,
                    &self.model,
                    axis,
                    c,
                    &scratch.states,
                    &lo.flux,
                    &hi.flux,
                    &mut scratch.fluxes,
                    &mut scratch.residual,
                );
                recover_subcell_fluxes(&scratch.residual, &left, &right, &mut fluxes.high[range.clone()])
                    .map_err(mismatch)?;

                low_order_line(
                    &self.ops,
                    &self.model,
                    axis,
                    c,
                    &scratch.states,
                    &lo.flux,
                    &hi.flux,
                    &mut scratch.fluxes,
                    &mut scratch.residual,
                );
                recover_subcell_fluxes(&scratch.residual, &left, &right, &mut fluxes.low[range])
                    .map_err(mismatch)?;
            }
        }
        Ok(())
    }

    /// Allocate per-axis subcell flux storage for one element.
    pub fn subcell_storage(&self) -> Vec<SubcellFluxes<NC>> {
        self.axes()
            .iter()
            .map(|_| SubcellFluxes::zeros(self.mesh.lines_per_element(), self.mesh.degree))
            .collect()
    }

    fn line_residual(
        &self,
        field: &ElementField<NC>,
        high_order: bool,
    ) -> Result<(Residual<NC>, FaceTable<NC>)> {
        let faces = self.face_table(field)?;
        let mesh = &self.mesh;
        let npe = mesh.nodes_per_element();
        let mut values = vec![[0.0; NC]; field.values.len()];
        values
            .par_chunks_mut(npe)
            .enumerate()
            .for_each_init(
                || LineScratch::new(mesh.degree),
                |scratch, (e, out)| {
                    for &axis in self.axes() {
                        for line in 0..mesh.lines_per_element() {
                            let c = mesh.line_weight(&self.ops, axis, line);
                            let (lo, hi) = self.line_face_fluxes(&faces, e, axis, line);
                            self.gather_line(field, e, axis, line, &mut scratch.states);
                            let kernel = if high_order {
                                dgsem_line::<M, NC>
                            } else {
                                low_order_line::<M, NC>
                            };
                            kernel(
                                &self.ops,
                                &self.model,
                                axis,
                                c,
                                &scratch.states,
                                &lo.flux,
                                &hi.flux,
                                &mut scratch.fluxes,
                                &mut scratch.residual,
                            );
                            for (k, r) in scratch.residual.iter().enumerate() {
                                let node = mesh.line_node(axis, line, k);
                                for comp in 0..NC {
                                    out[node][comp] += r[comp];
                                }
                            }
                        }
                    }
                },
            );
        Ok((Residual { values }, faces))
    }

    /// High-order DGSEM residual and the face fluxes it used.
    pub fn dgsem_residual(&self, field: &ElementField<NC>) -> Result<(Residual<NC>, FaceTable<NC>)> {
        self.line_residual(field, true)
    }

    /// Low-order graph-viscosity residual and the face fluxes it used.
    pub fn low_order_residual(
        &self,
        field: &ElementField<NC>,
    ) -> Result<(Residual<NC>, FaceTable<NC>)> {
        self.line_residual(field, false)
    }

    /// Residual of one element from blended subcell fluxes. `factors[a]`
    /// holds `N` factors per line for axis `a`, line-major.
    pub fn limited_element_residual(
        &self,
        fluxes: &[SubcellFluxes<NC>],
        factors: &[Vec<f64>],
        out: &mut [[f64; NC]],
    ) -> Result<()> {
        let n = self.mesh.degree;
        let stride = n + 2;
        for r in out.iter_mut() {
            *r = [0.0; NC];
        }
        let mut blended = vec![[0.0; NC]; stride];
        let mut line_out = vec![[0.0; NC]; n + 1];
        for ((&axis, f), l) in self.axes().iter().zip(fluxes).zip(factors) {
            if l.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(SolverError::Contract(
                    "limiting factor outside [0, 1]".to_string(),
                ));
            }
            for line in 0..self.mesh.lines_per_element() {
                let base = line * stride;
                blended[0] = f.high[base];
                blended[n + 1] = f.high[base + n + 1];
                for i in 1..=n {
                    let li = l[line * n + i - 1];
                    let (h, lo) = (&f.high[base + i], &f.low[base + i]);
                    for c in 0..NC {
                        blended[i][c] = lo[c] + li * (h[c] - lo[c]);
                    }
                }
                for r in line_out.iter_mut() {
                    *r = [0.0; NC];
                }
                add_line_difference(&blended, &mut line_out);
                for (k, r) in line_out.iter().enumerate() {
                    let node = self.mesh.line_node(axis, line, k);
                    for c in 0..NC {
                        out[node][c] += r[c];
                    }
                }
            }
        }
        Ok(())
    }

    /// Limited residual of the whole field for given per-element factors.
    pub fn limited_residual(
        &self,
        field: &ElementField<NC>,
        factors: &[Vec<Vec<f64>>],
    ) -> Result<Residual<NC>> {
        let faces = self.face_table(field)?;
        let npe = self.mesh.nodes_per_element();
        let mut values = vec![[0.0; NC]; field.values.len()];
        let mut scratch = LineScratch::new(self.mesh.degree);
        let mut fluxes = self.subcell_storage();
        for (e, out) in values.chunks_mut(npe).enumerate() {
            self.element_subcell_fluxes(field, &faces, e, &mut scratch, &mut fluxes)?;
            self.limited_element_residual(&fluxes, &factors[e], out)?;
        }
        Ok(Residual { values })
    }

    /// Signed sum of line-weighted interface fluxes entering element `e`.
    pub fn element_boundary_flux(&self, faces: &FaceTable<NC>, e: usize) -> [f64; NC] {
        let mut out = [0.0; NC];
        for &axis in self.axes() {
            for line in 0..self.mesh.lines_per_element() {
                let c = self.mesh.line_weight(&self.ops, axis, line);
                let (lo, hi) = self.line_face_fluxes(faces, e, axis, line);
                for k in 0..NC {
                    out[k] += c * (lo.flux[k] - hi.flux[k]);
                }
            }
        }
        out
    }
}
