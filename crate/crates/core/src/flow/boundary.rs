//! The oblique capillary condition `⟨Ψ(ν), −E₃⟩ = ω₀` on the equator faces.

use crate::error::{Error, Result};
use crate::norms::{support_hessian_from, Norm};
use crate::surface::GraphSurface;

pub const BOUNDARY_MAX_ITER: usize = 50;

/// Outcome of one enforcement pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryReport {
    /// `max_j |⟨Ψ(ν_j), E₃⟩ + ω₀|` after the pass.
    pub max_residual: f64,
    pub max_iterations: usize,
}

/// Residual `ψ(p) = −Ψ₃(w(p)) − ω₀` and `dψ/dp = −D²F(w)₃₃` at face slope `p`.
fn residual(surface: &GraphSurface, norm: &Norm, omega0: f64, j: usize, p: f64, p_l: f64) -> Result<(f64, f64)> {
    let w = surface.face_normal(j, p, p_l);
    let len = crate::linalg::norm(&w);
    let nu = w.map(|c| c / len);
    let dp = norm.support_point(&nu, None)?;
    let h = support_hessian_from(&nu, &dp)?;
    Ok((-dp.z[2] - omega0, -h[2][2] / len))
}

/// Sets every ghost value so the discrete co-normal condition holds to `tol`.
///
/// `ψ` is strictly decreasing in the face slope because `F_nn > 0`, so
/// Newton is run inside a bracket that is widened until it changes sign.
pub fn boundary_enforce(surface: &mut GraphSurface, norm: &Norm, omega0: f64, tol: f64) -> Result<BoundaryReport> {
    let nb = surface.grid.n_beta;
    let db = surface.grid.d_beta();
    let mut report = BoundaryReport { max_residual: 0.0, max_iterations: 0 };
    let p_lambda = surface.face_lambda_derivatives();
    for j in 0..surface.grid.n_lambda {
        let mut p = surface.face_slope(j);
        if !p.is_finite() {
            p = 0.0;
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut done = None;
        for it in 0..BOUNDARY_MAX_ITER {
            let (r, dr) = residual(surface, norm, omega0, j, p, p_lambda[j])?;
            if r.abs() <= tol {
                done = Some((it, r));
                break;
            }
            if r > 0.0 {
                lo = lo.max(p);
            } else {
                hi = hi.min(p);
            }
            let mut next = if dr < 0.0 { p - r / dr } else { f64::NAN };
            if !(next > lo && next < hi) || !next.is_finite() {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0 + 2.0 * (lo - p).abs(),
                    (false, true) => hi - 1.0 - 2.0 * (hi - p).abs(),
                    (false, false) => p,
                };
            }
            if (next - p).abs() <= 1e-15 * (1.0 + p.abs()) {
                done = Some((it, r));
                break;
            }
            p = next;
        }
        let (it, r) = done.ok_or_else(|| Error::NoConvergence {
            what: format!("capillary boundary condition at boundary node {j}"),
            iterations: BOUNDARY_MAX_ITER,
        })?;
        let k_in = surface.idx(nb - 1, j);
        let k_ghost = surface.idx(nb, j);
        surface.phi[k_ghost] = surface.phi[k_in] + db * p;
        report.max_residual = report.max_residual.max(r.abs());
        report.max_iterations = report.max_iterations.max(it);
    }
    Ok(report)
}

/// `max_j |⟨Ψ(ν_j), E₃⟩ + ω₀|` for the current ghost layer.
pub fn capillarity_residual(surface: &GraphSurface, norm: &Norm, omega0: f64) -> Result<f64> {
    let mut m: f64 = 0.0;
    let p_lambda = surface.face_lambda_derivatives();
    for j in 0..surface.grid.n_lambda {
        let (r, _) = residual(surface, norm, omega0, j, surface.face_slope(j), p_lambda[j])?;
        m = m.max(r.abs());
    }
    Ok(m)
}
