//! Pointwise geometry of a radial graph `X = e^φ x` from the first and
//! second covariant derivatives of `φ` in an orthonormal frame of `T_x S^n`.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::norms::{support_hessian_from, Norm};

/// Input of [`node_geometry`]: the value of `φ`, its gradient `p` and its
/// covariant Hessian `Φ`, all in the frame `frame` at the unit vector `dir`.
#[derive(Clone, Copy, Debug)]
pub struct NodeData<const D: usize, const N: usize> {
    pub dir: [f64; D],
    pub frame: [[f64; D]; N],
    pub phi: f64,
    pub p: [f64; N],
    pub hess: [[f64; N]; N],
}

/// Geometry of the graph at one node.
#[derive(Clone, Copy, Debug)]
pub struct NodeGeometry<const D: usize, const N: usize> {
    pub dir: [f64; D],
    /// Position `X = ρx`.
    pub x: [f64; D],
    pub rho: f64,
    pub v: f64,
    pub nu: [f64; D],
    pub f_nu: f64,
    /// `ν_F = Ψ(ν)`.
    pub nu_f: [f64; D],
    /// `⟨X, ν⟩`.
    pub u: f64,
    /// `⟨X, ν⟩/F(ν)`.
    pub u_hat: f64,
    /// `⟨X, ν⟩/(F(ν) + ω₀⟨ν, E^F⟩)`.
    pub u_bar: f64,
    /// `G(ν_F)(ν_F, E^F) = ⟨ν, E^F⟩/F(ν)`.
    pub e_pair: f64,
    /// Induced metric in the frame coordinates.
    pub g: SMatrix<f64, N, N>,
    pub h: SMatrix<f64, N, N>,
    /// `dν = g⁻¹h`.
    pub weingarten: SMatrix<f64, N, N>,
    /// `S_F = A_F∘dν` acting on frame coordinates.
    pub s_f: SMatrix<f64, N, N>,
    /// `ĝ_ij = G(ν_F)(∂_iX, ∂_jX)`.
    pub g_hat: SMatrix<f64, N, N>,
    /// `ĥ_ij = G(ν_F)(∂_iν_F, ∂_jX)`.
    pub h_hat: SMatrix<f64, N, N>,
    /// Anisotropic principal curvatures, ascending.
    pub kappa: [f64; N],
    /// Normalized `H^F_k = σ_k(κ)/C(n, k)` for `k = 0..=n`; unused slots are zero.
    pub h_k: [f64; 4],
    /// `H_F = Σκ`.
    pub h_f: f64,
    /// `|ĥ − H_F ĝ/n|²_ĝ`.
    pub trace_free_sq: f64,
    /// `f = n + nω₀G(ν_F)(ν_F, E^F) − ûH_F`.
    pub speed: f64,
    /// `dμ_g/dΩ = ρⁿv`.
    pub area_density: f64,
    /// Largest eigenvalue of the principal part `(ρ/v)P` of `ûH_F` in `φ`.
    pub diffusion: f64,
    /// Dual-solve warm start for the next evaluation.
    pub warm: [f64; D],
}

/// Geometry at one node; `e_f` is the anchor vector and `warm` a previous
/// [`NodeGeometry::warm`].
pub fn node_geometry<const D: usize, const N: usize>(
    data: &NodeData<D, N>,
    norm: &Norm,
    omega0: f64,
    e_f: &[f64; D],
    warm: Option<&[f64; D]>,
) -> Result<NodeGeometry<D, N>> {
    let n = N as f64;
    let NodeData { dir, frame, phi, p, hess } = *data;
    let finite = phi.is_finite() && p.iter().all(|v| v.is_finite()) && hess.iter().flatten().all(|v| v.is_finite());
    if !finite {
        return Err(Error::BlowUp { t: f64::NAN, reason: "non-finite derivative of φ".into() });
    }
    let rho = phi.exp();
    let p2: f64 = p.iter().map(|a| a * a).sum();
    let v = (1.0 + p2).sqrt();
    let mut nu = dir;
    for i in 0..N {
        for a in 0..D {
            nu[a] -= p[i] * frame[i][a];
        }
    }
    let nu = nu.map(|c| c / v);
    let dp = norm.support_point(&nu, warm)?;
    let d2f = support_hessian_from(&nu, &dp)?;

    let tangents: [[f64; D]; N] = std::array::from_fn(|i| std::array::from_fn(|a| rho * (p[i] * dir[a] + frame[i][a])));
    let ppt = SMatrix::<f64, N, N>::from_fn(|i, j| p[i] * p[j]);
    let id = SMatrix::<f64, N, N>::identity();
    let g = (id + ppt) * (rho * rho);
    let h = (id + ppt - SMatrix::<f64, N, N>::from_fn(|i, j| hess[i][j])) * (rho / v);
    let ginv = (id - ppt / (v * v)) / (rho * rho);
    let b = SMatrix::<f64, N, N>::from_fn(|i, j| linalg::bilinear(&d2f, &tangents[i], &tangents[j]));
    let pm = ginv * b * ginv;
    let pm = (pm + pm.transpose()) * 0.5;
    let s_f = pm * h;
    let l = pm
        .cholesky()
        .ok_or_else(|| Error::Hypothesis("A_F is not positive definite at a node".into()))?
        .l();
    let m = l.transpose() * h * l;
    let eig = sym_eigenvalues(&((m + m.transpose()) * 0.5));
    let mut kappa: [f64; N] = std::array::from_fn(|i| eig[i]);
    kappa.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let h_k = normalized_symmetric(&kappa);
    let h_f: f64 = kappa.iter().sum();
    let trace_free_sq = kappa.iter().map(|k| k * k).sum::<f64>() - h_f * h_f / n;

    let gz = dp.g;
    let g_hat = SMatrix::<f64, N, N>::from_fn(|i, j| linalg::bilinear(&gz, &tangents[i], &tangents[j]));
    let h_hat = g_hat * s_f;
    let h_hat = (h_hat + h_hat.transpose()) * 0.5;

    let x = dir.map(|c| rho * c);
    let u = rho / v;
    let f_nu = dp.value;
    let pair = linalg::dot(&nu, e_f);
    let u_hat = u / f_nu;
    let e_pair = pair / f_nu;
    let u_bar = u / (f_nu + omega0 * pair);
    let speed = n + n * omega0 * e_pair - u_hat * h_f;
    let lmax = sym_eigenvalues(&pm).max();
    Ok(NodeGeometry {
        dir,
        x,
        rho,
        v,
        nu,
        f_nu,
        nu_f: dp.z,
        u,
        u_hat,
        u_bar,
        e_pair,
        g,
        h,
        weingarten: ginv * h,
        s_f,
        g_hat,
        h_hat,
        kappa,
        h_k,
        h_f,
        trace_free_sq,
        speed,
        area_density: rho.powi(N as i32) * v,
        diffusion: rho / v * lmax,
        warm: dp.y,
    })
}

fn sym_eigenvalues<const N: usize>(m: &SMatrix<f64, N, N>) -> nalgebra::DVector<f64> {
    nalgebra::DMatrix::from_fn(N, N, |i, j| m[(i, j)]).symmetric_eigenvalues()
}

/// `σ_k(κ)/C(n, k)` for `k = 0..=n`.
pub fn normalized_symmetric<const N: usize>(kappa: &[f64; N]) -> [f64; 4] {
    let mut sigma = [0.0; 4];
    sigma[0] = 1.0;
    for &k in kappa {
        for j in (1..=N.min(3)).rev() {
            sigma[j] += k * sigma[j - 1];
        }
    }
    let mut binom = 1.0;
    for k in 1..=N.min(3) {
        binom = binom * (N + 1 - k) as f64 / k as f64;
        sigma[k] /= binom;
    }
    sigma
}

/// Covariant derivatives of `φ` at `x` by central differences in the
/// exponential chart `t ↦ cos|t|·x + sin|t|·t/|t|`, `t = Σ t_i e_i`.
pub fn chart_derivatives<const D: usize, const N: usize>(
    phi: &dyn Fn(&[f64; D]) -> Result<f64>,
    dir: &[f64; D],
    frame: &[[f64; D]; N],
    step: f64,
) -> Result<NodeData<D, N>> {
    let at = |t: &[f64; N]| -> Result<f64> {
        let len = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 {
            return phi(dir);
        }
        let (s, c) = len.sin_cos();
        let y: [f64; D] = std::array::from_fn(|a| {
            let tv: f64 = (0..N).map(|i| t[i] * frame[i][a]).sum();
            c * dir[a] + s * tv / len
        });
        phi(&y)
    };
    let f0 = at(&[0.0; N])?;
    let mut p = [0.0; N];
    let mut hess = [[0.0; N]; N];
    let unit = |i: usize, s: f64| -> [f64; N] { std::array::from_fn(|k| if k == i { s } else { 0.0 }) };
    for i in 0..N {
        let fp = at(&unit(i, step))?;
        let fm = at(&unit(i, -step))?;
        p[i] = (fp - fm) / (2.0 * step);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (step * step);
        for j in 0..i {
            let t = |a: f64, b: f64| -> [f64; N] {
                std::array::from_fn(|k| if k == i { a } else if k == j { b } else { 0.0 })
            };
            let v = (at(&t(step, step))? - at(&t(step, -step))? - at(&t(-step, step))? + at(&t(-step, -step))?)
                / (4.0 * step * step);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(NodeData { dir: *dir, frame: *frame, phi: f0, p, hess })
}
