//! Star-shaped capillary hypersurfaces as radial graphs `X = e^φ x` over
//! the closed upper half-sphere, their anisotropic geometry and capillary
//! quermassintegrals.
//!
//! Two routes produce a [`GeometryBundle`]: the `n = 2` lattice
//! ([`GraphSurface`], fourth-order differences across rows and spectral
//! along them, used by the flow) and exact
//! charts for analytically given `φ` ([`chart_geometry2`],
//! [`chart_geometry3`]), used for `n = 3` and as a reference.

mod boundary;
mod bundle;
mod export;
mod grid;
mod node;

pub use boundary::{periodic_derivatives, BoundaryTrace};
pub use bundle::{Bundle2, Bundle3, GeometryBundle};
pub use export::{fields_csv, write_obj};
pub use grid::{polar2, polar3, HalfSphereGrid};
pub use node::{chart_derivatives, node_geometry, normalized_symmetric, NodeData, NodeGeometry};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::wulff::{AnchorVector, CapillaryWulffShape};

/// Step of the exponential-chart differences.
pub const CHART_STEP: f64 = 2e-4;

/// Radial graph over the `n = 2` lattice. `phi` holds `N_β + 1` rows of
/// `N_λ` values; the last row is the ghost layer beyond the equator.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSurface {
    pub grid: HalfSphereGrid,
    pub phi: Vec<f64>,
    pub time: f64,
}

impl GraphSurface {
    pub fn new(grid: HalfSphereGrid, phi: Vec<f64>) -> Result<Self> {
        if grid.n != 2 {
            return Err(Error::Unsupported("lattice graphs are implemented for n = 2".into()));
        }
        if phi.len() != (grid.n_beta + 1) * grid.n_lambda {
            return Err(Error::Domain(format!("expected {} values of φ, got {}", (grid.n_beta + 1) * grid.n_lambda, phi.len())));
        }
        if let Some(k) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("φ is not finite at index {k}")));
        }
        Ok(GraphSurface { grid, phi, time: 0.0 })
    }

    /// Samples `ρ` at every cell, ghost row included.
    pub fn from_radial(grid: HalfSphereGrid, rho: impl Fn(&[f64; 3]) -> Result<f64>) -> Result<Self> {
        let mut phi = Vec::with_capacity((grid.n_beta + 1) * grid.n_lambda);
        for i in 0..=grid.n_beta {
            for j in 0..grid.n_lambda {
                let r = rho(&grid.direction2(i, j))?;
                if !(r > 0.0) {
                    return Err(Error::Domain(format!("radial function must be positive, got {r}")));
                }
                phi.push(r.ln());
            }
        }
        Self::new(grid, phi)
    }

    pub fn from_wulff_cap(grid: HalfSphereGrid, shape: &CapillaryWulffShape) -> Result<Self> {
        Self::from_radial(grid, |x| shape.radial_function(x))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.grid.n_lambda + j
    }

    /// `φ` at row `i`, column `j`; negative rows continue across the pole
    /// to `(−i − 1, j + N_λ/2)` and columns wrap.
    #[inline]
    pub fn value(&self, i: isize, j: isize) -> f64 {
        let nl = self.grid.n_lambda as isize;
        let (i, j) = if i < 0 { (-i - 1, j + nl / 2) } else { (i, j) };
        self.phi[self.idx(i as usize, j.rem_euclid(nl) as usize)]
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.phi[self.idx(i, j)].exp()
    }

    /// Spectral λ-derivatives of the interior rows, face slopes and the
    /// one-sided weights used next to the equator.
    pub fn stencils(&self) -> Stencils {
        let (nb, nl) = (self.grid.n_beta, self.grid.n_lambda);
        let (mut d1, mut d2) = (Vec::with_capacity(nb * nl), Vec::with_capacity(nb * nl));
        for row in self.phi[..nb * nl].chunks(nl) {
            let (a, b) = periodic_derivatives(row);
            d1.extend(a);
            d2.extend(b);
        }
        let slope: Vec<f64> = (0..nl).map(|j| self.face_slope(j)).collect();
        let slope_l = periodic_derivatives(&slope).0;
        Stencils { n_beta: nb, n_lambda: nl, d_beta: self.grid.d_beta(), d1, d2, slope, slope_l, edge: EdgeFit::new() }
    }

    /// Derivatives at interior cell `(i, j)` in the orthonormal frame
    /// `(e_β, e_λ)`: fourth-order differences across rows, spectral along them.
    pub fn node_data(&self, i: usize, j: usize, st: &Stencils) -> NodeData<3, 2> {
        let c = self.value(i as isize, j as isize);
        let (f_b, f_bb) = st.beta_derivatives(i, j, |r, jj| self.value(r, jj), |jj| st.slope[jj]);
        let (f_bl, _) = st.beta_derivatives(i, j, |r, jj| st.d1(r, jj), |jj| st.slope_l[jj]);
        let (f_l, f_ll) = (st.d1(i as isize, j as isize), st.d2(i as isize, j as isize));
        let (beta, lambda) = (self.grid.beta(i), self.grid.lambda(j));
        let (sb, cb) = beta.sin_cos();
        let cot = cb / sb;
        let p = [f_b, f_l / sb];
        let off = (f_bl - cot * f_l) / sb;
        let hess = [[f_bb, off], [off, f_ll / (sb * sb) + cot * f_b]];
        NodeData { dir: polar2(beta, lambda), frame: HalfSphereGrid::frame2(beta, lambda), phi: c, p, hess }
    }

    /// `φ_λ` on the equator faces, extrapolated from the four interior rows
    /// next to them.
    pub fn face_lambda_derivatives(&self) -> Vec<f64> {
        let nb = self.grid.n_beta;
        let rows: Vec<Vec<f64>> =
            (0..4).map(|m| periodic_derivatives(&self.phi[self.idx(nb - 1 - m, 0)..self.idx(nb - m, 0)]).0).collect();
        (0..self.grid.n_lambda).map(|j| (0..4).map(|m| FACE_EXTRAPOLATION[m] * rows[m][j]).sum()).collect()
    }

    /// Unnormalized outer normal `x + p_β E₃ − p_λ e_λ` at the equator face of
    /// column `j`, for co-normal slope `p_β = ∂_βφ` and face value `p_λ` of `φ_λ`.
    pub fn face_normal(&self, j: usize, p_beta: f64, p_lambda: f64) -> [f64; 3] {
        let (s, c) = self.grid.lambda(j).sin_cos();
        [c + p_lambda * s, s - p_lambda * c, p_beta]
    }

    /// `∂_βφ` at the equator face of column `j` from the ghost value.
    pub fn face_slope(&self, j: usize) -> f64 {
        let nb = self.grid.n_beta;
        (self.phi[self.idx(nb, j)] - self.phi[self.idx(nb - 1, j)]) / self.grid.d_beta()
    }

    /// Contact curve `r(λ_j) = e^{φ(π/2, λ_j)}`, the face value taken from
    /// the one-sided fit through the last rows and the face slope.
    pub fn boundary_trace(&self) -> BoundaryTrace {
        let st = self.stencils();
        let nl = self.grid.n_lambda;
        let lambda: Vec<f64> = (0..nl).map(|j| self.grid.lambda(j)).collect();
        let rho = (0..nl).map(|j| st.face_value(j, |r, jj| self.value(r, jj), |jj| st.slope[jj]).exp()).collect();
        BoundaryTrace::from_samples(lambda, rho)
    }

    /// Full geometry on the interior cells; `warm` may hold the
    /// [`NodeGeometry::warm`] values of a previous bundle.
    pub fn geometry(&self, norm: &crate::norms::Norm, anchor: &AnchorVector, warm: Option<&[[f64; 3]]>) -> Result<Bundle2> {
        if norm.d != 3 {
            return Err(Error::Domain("an n = 2 graph needs a norm on R³".into()));
        }
        let e_f: [f64; 3] = crate::linalg::arr(&anchor.e_f);
        let (nb, nl) = (self.grid.n_beta, self.grid.n_lambda);
        let mut nodes = Vec::with_capacity(nb * nl);
        let mut weights = Vec::with_capacity(nb * nl);
        let st = self.stencils();
        for i in 0..nb {
            let w = self.grid.weight2(i);
            for j in 0..nl {
                let k = self.idx(i, j);
                let data = self.node_data(i, j, &st);
                let node = node_geometry(&data, norm, anchor.omega0, &e_f, warm.map(|w| &w[k]))
                    .map_err(|e| at_node(e, k, self.time))?;
                nodes.push(node);
                weights.push(w);
            }
        }
        let boundary = self.boundary_trace();
        Ok(GeometryBundle { n: 2, nodes, weights, boundary: Some(boundary), omega0: anchor.omega0, e_f })
    }

    pub fn sup_abs_phi(&self) -> f64 {
        self.phi.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `r·Σ`.
    pub fn scaled(&self, r: f64) -> Self {
        let l = r.ln();
        GraphSurface { grid: self.grid.clone(), phi: self.phi.iter().map(|v| v + l).collect(), time: self.time }
    }
}

/// Weights extrapolating cell-centre values at `β_{N−1−m}`, `m = 0..4`, to the equator.
const FACE_EXTRAPOLATION: [f64; 4] = [35.0 / 16.0, -35.0 / 16.0, 21.0 / 16.0, -5.0 / 16.0];

/// Degree-4 fit through the four rows next to the equator and the face
/// slope, in units of `Δβ` with the face at `s = 0`. Each weight row acts on
/// `(φ_{N−1}, φ_{N−2}, φ_{N−3}, φ_{N−4}, Δβ·∂_βφ|_face)`.
#[derive(Clone, Debug, PartialEq)]
struct EdgeFit {
    /// First and second derivatives at rows `N−2` (index 0) and `N−1` (index 1).
    first: [[f64; 5]; 2],
    second: [[f64; 5]; 2],
    value: [f64; 5],
}

impl EdgeFit {
    fn new() -> Self {
        let nodes: [f64; 4] = [-0.5, -1.5, -2.5, -3.5];
        let mut m = nalgebra::SMatrix::<f64, 5, 5>::zeros();
        for (r, s) in nodes.iter().enumerate() {
            for k in 0..5 {
                m[(r, k)] = s.powi(k as i32);
            }
        }
        m[(4, 1)] = 1.0;
        let inv_t = m.try_inverse().expect("edge fit matrix is invertible").transpose();
        let weights = |basis: [f64; 5]| -> [f64; 5] {
            let w = inv_t * nalgebra::SVector::<f64, 5>::from(basis);
            std::array::from_fn(|k| w[k])
        };
        let d1 = |s: f64| std::array::from_fn(|k| if k == 0 { 0.0 } else { k as f64 * s.powi(k as i32 - 1) });
        let d2 = |s: f64| std::array::from_fn(|k| if k < 2 { 0.0 } else { (k * (k - 1)) as f64 * s.powi(k as i32 - 2) });
        EdgeFit {
            first: [weights(d1(-1.5)), weights(d1(-0.5))],
            second: [weights(d2(-1.5)), weights(d2(-0.5))],
            value: weights([1.0, 0.0, 0.0, 0.0, 0.0]),
        }
    }
}

/// Row-direction stencil data of a [`GraphSurface`]: spectral λ-derivatives
/// of the interior rows, the face slopes `∂_βφ|_face` with their
/// λ-derivatives, and the one-sided fit used on the last two rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencils {
    n_beta: usize,
    n_lambda: usize,
    d_beta: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    slope: Vec<f64>,
    slope_l: Vec<f64>,
    edge: EdgeFit,
}

impl Stencils {
    /// Index with the same pole continuation as [`GraphSurface::value`].
    fn at(&self, i: isize, j: isize) -> usize {
        let nl = self.n_lambda as isize;
        let (i, j) = if i < 0 { (-i - 1, j + nl / 2) } else { (i, j) };
        (i * nl + j.rem_euclid(nl)) as usize
    }

    pub fn d1(&self, i: isize, j: isize) -> f64 {
        self.d1[self.at(i, j)]
    }

    pub fn d2(&self, i: isize, j: isize) -> f64 {
        self.d2[self.at(i, j)]
    }

    /// `(∂_β, ∂_β²)` of a row field at `(i, j)`, given its values and its face slope.
    fn beta_derivatives(
        &self,
        i: usize,
        j: usize,
        value: impl Fn(isize, isize) -> f64,
        slope: impl Fn(usize) -> f64,
    ) -> (f64, f64) {
        let h = self.d_beta;
        let (ii, jj) = (i as isize, j as isize);
        if i + 2 < self.n_beta {
            let v = |k: isize| value(ii + k, jj);
            let d1 = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * h);
            let d2 = (-v(-2) + 16.0 * v(-1) - 30.0 * v(0) + 16.0 * v(1) - v(2)) / (12.0 * h * h);
            return (d1, d2);
        }
        let y = self.edge_inputs(j, &value, &slope);
        let r = i + 2 - self.n_beta;
        let dot = |w: &[f64; 5]| w.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        (dot(&self.edge.first[r]) / h, dot(&self.edge.second[r]) / (h * h))
    }

    fn edge_inputs(&self, j: usize, value: &impl Fn(isize, isize) -> f64, slope: &impl Fn(usize) -> f64) -> [f64; 5] {
        let nb = self.n_beta as isize;
        let jj = j as isize;
        [value(nb - 1, jj), value(nb - 2, jj), value(nb - 3, jj), value(nb - 4, jj), self.d_beta * slope(j)]
    }

    /// Value of a row field on the equator face of column `j`.
    fn face_value(&self, j: usize, value: impl Fn(isize, isize) -> f64, slope: impl Fn(usize) -> f64) -> f64 {
        let y = self.edge_inputs(j, &value, &slope);
        self.edge.value.iter().zip(&y).map(|(a, b)| a * b).sum()
    }
}

fn at_node(e: Error, k: usize, t: f64) -> Error {
    match e {
        Error::NoConvergence { what, iterations } => Error::NoConvergence { what: format!("{what} at node {k}"), iterations },
        Error::BlowUp { reason, .. } => Error::BlowUp { t, reason: format!("{reason} at node {k}") },
        Error::Hypothesis(m) => Error::Hypothesis(format!("{m} (node {k})")),
        other => other,
    }
}

/// Geometry of `X = e^{φ(x)}x` over the `n = 2` lattice cells with exact-chart
/// derivatives of an analytic `φ` (defined on a neighbourhood of `S²_+`).
pub fn chart_geometry2(
    grid: &HalfSphereGrid,
    phi: &dyn Fn(&[f64; 3]) -> Result<f64>,
    norm: &crate::norms::Norm,
    anchor: &AnchorVector,
) -> Result<Bundle2> {
    let e_f: [f64; 3] = crate::linalg::arr(&anchor.e_f);
    let mut nodes = Vec::with_capacity(grid.cells());
    let mut weights = Vec::with_capacity(grid.cells());
    let mut warm: Option<[f64; 3]> = None;
    for (k, (x, frame, w)) in grid.cells2().into_iter().enumerate() {
        let data = chart_derivatives(phi, &x, &frame, CHART_STEP)?;
        let node = node_geometry(&data, norm, anchor.omega0, &e_f, warm.as_ref()).map_err(|e| at_node(e, k, 0.0))?;
        warm = Some(node.warm);
        nodes.push(node);
        weights.push(w);
    }
    let lambda: Vec<f64> = (0..grid.n_lambda).map(|j| grid.lambda(j)).collect();
    let rho = lambda.iter().map(|&l| Ok(phi(&polar2(FRAC_PI_2, l))?.exp())).collect::<Result<Vec<f64>>>()?;
    let boundary = BoundaryTrace::from_samples(lambda, rho);
    Ok(GeometryBundle { n: 2, nodes, weights, boundary: Some(boundary), omega0: anchor.omega0, e_f })
}

/// As [`chart_geometry2`] on the `n = 3` lattice; no boundary trace.
pub fn chart_geometry3(
    grid: &HalfSphereGrid,
    phi: &dyn Fn(&[f64; 4]) -> Result<f64>,
    norm: &crate::norms::Norm,
    anchor: &AnchorVector,
) -> Result<Bundle3> {
    if grid.n != 3 || norm.d != 4 {
        return Err(Error::Domain("n = 3 geometry needs an n = 3 grid and a norm on R⁴".into()));
    }
    let e_f: [f64; 4] = crate::linalg::arr(&anchor.e_f);
    let mut nodes = Vec::with_capacity(grid.cells());
    let mut weights = Vec::with_capacity(grid.cells());
    let mut warm: Option<[f64; 4]> = None;
    for (k, (x, frame, w)) in grid.cells3().into_iter().enumerate() {
        let data = chart_derivatives(phi, &x, &frame, CHART_STEP)?;
        let node = node_geometry(&data, norm, anchor.omega0, &e_f, warm.as_ref()).map_err(|e| at_node(e, k, 0.0))?;
        warm = Some(node.warm);
        nodes.push(node);
        weights.push(w);
    }
    Ok(GeometryBundle { n: 3, nodes, weights, boundary: None, omega0: anchor.omega0, e_f })
}
