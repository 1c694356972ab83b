//! Global integrals over a sampled surface.

use crate::error::{Error, Result};
use crate::surface::{BoundaryTrace, NodeGeometry};
use crate::wulff::TranslatedNorm;

/// Geometry at every interior node with its round-metric quadrature weight.
#[derive(Clone, Debug)]
pub struct GeometryBundle<const D: usize, const N: usize> {
    pub n: usize,
    pub nodes: Vec<NodeGeometry<D, N>>,
    pub weights: Vec<f64>,
    /// Contact curve (`n = 2` only).
    pub boundary: Option<BoundaryTrace>,
    pub omega0: f64,
    pub e_f: [f64; D],
}

pub type Bundle2 = GeometryBundle<3, 2>;
pub type Bundle3 = GeometryBundle<4, 3>;

impl<const D: usize, const N: usize> GeometryBundle<D, N> {
    /// `∫_Σ w dμ_g`.
    pub fn integrate_g(&self, w: impl Fn(&NodeGeometry<D, N>) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, q)| q * p.area_density * w(p)).sum()
    }

    /// `∫_Σ w dμ_F`.
    pub fn integrate_f(&self, w: impl Fn(&NodeGeometry<D, N>) -> f64) -> f64 {
        self.integrate_g(|p| p.f_nu * w(p))
    }

    fn nn(&self) -> f64 {
        N as f64
    }

    /// `V₀ = (1/(n+1))∫⟨X, ν⟩ dμ_g`; the flat face contributes nothing.
    pub fn enclosed_volume(&self) -> f64 {
        self.integrate_g(|p| p.u) / (self.nn() + 1.0)
    }

    /// `|Σ|_F = ∫F(ν) dμ_g`.
    pub fn anisotropic_area(&self) -> f64 {
        self.integrate_g(|p| p.f_nu)
    }

    pub fn euclidean_area(&self) -> f64 {
        self.integrate_g(|_| 1.0)
    }

    fn trace(&self) -> Result<&BoundaryTrace> {
        self.boundary.as_ref().ok_or_else(|| Error::Unsupported("boundary integrals need the n = 2 contact curve".into()))
    }

    /// Area of the wetted region `∂Σ̂ ∩ {x₃ = 0}`.
    pub fn wetted_area(&self) -> Result<f64> {
        Ok(self.trace()?.wetted_area())
    }

    /// `V₁ = (|Σ|_F + ω₀|∂Σ̂|)/(n+1)`.
    pub fn capillary_area(&self) -> Result<f64> {
        Ok((self.anisotropic_area() + self.omega0 * self.wetted_area()?) / (self.nn() + 1.0))
    }

    /// `V_{k+1} = (1/(n+1))∫H^F_k(1 + ω₀G(ν_F)(ν_F, E^F)) dμ_F`, `k = 0..=n`.
    pub fn quermass_interior(&self, k: usize) -> Result<f64> {
        if k > N {
            return Err(Error::Domain(format!("quermassintegral index {} out of range for n = {N}", k + 1)));
        }
        let w = self.omega0;
        Ok(self.integrate_f(|p| p.h_k[k] * (1.0 + w * p.e_pair)) / (self.nn() + 1.0))
    }

    /// `V_{k+1} = (1/(n+1))(∫H^F_k F dμ_g + (ω₀/n)∮H^{F̄}_{k−1}F̄(ν̄) ds)`,
    /// `k = 1..=n`, for `n = 2`.
    pub fn quermass_boundary(&self, k: usize, tn: &TranslatedNorm) -> Result<f64> {
        if N != 2 {
            return Err(Error::Unsupported("the boundary form is implemented for n = 2; use the interior form".into()));
        }
        if !(1..=N).contains(&k) {
            return Err(Error::Domain(format!("quermassintegral index {} out of range for the boundary form", k + 1)));
        }
        let trace = self.trace()?;
        let mut curve = 0.0;
        for j in 0..trace.len() {
            let nb = trace.conormal(j);
            let s = tn.slice_support_point(&nb)?;
            let weight = if k == 1 {
                s.value
            } else {
                let t = [-nb[1], nb[0]];
                let q: f64 = (0..2).map(|a| (0..2).map(|b| t[a] * s.hessian[a][b] * t[b]).sum::<f64>()).sum();
                let a_bar = 1.0 / (s.value * q);
                a_bar * trace.curvature(j) * s.value
            };
            curve += weight * trace.line_element(j);
        }
        curve *= trace.d_lambda();
        let interior = self.integrate_f(|p| p.h_k[k]);
        Ok((interior + self.omega0 / self.nn() * curve) / (self.nn() + 1.0))
    }

    /// `∫[H_k(1 + ω₀G(ν_F)(ν_F, E^F)) − H_{k+1}û] dμ_F / ∫dμ_F`, `k = 0..n`.
    pub fn minkowski_residual(&self, k: usize) -> Result<f64> {
        if k >= N {
            return Err(Error::Domain(format!("Minkowski index {k} out of range for n = {N}")));
        }
        let w = self.omega0;
        let r = self.integrate_f(|p| p.h_k[k] * (1.0 + w * p.e_pair) - p.h_k[k + 1] * p.u_hat);
        Ok(r / self.integrate_f(|_| 1.0))
    }

    /// `∫f dμ_F`, the rate of `V₀`.
    pub fn volume_rate(&self) -> f64 {
        self.integrate_f(|p| p.speed)
    }

    /// `(1/(n+1))∫H_F f dμ_F`, the rate of `V₁`.
    pub fn area_rate(&self) -> f64 {
        self.integrate_f(|p| p.h_f * p.speed) / (self.nn() + 1.0)
    }

    /// `−n/((n+1)(n−1))∫|ĥ − H_F ĝ/n|² û dμ_F`, the same rate in trace-free form.
    pub fn area_rate_trace_free(&self) -> f64 {
        let n = self.nn();
        -n / ((n + 1.0) * (n - 1.0)) * self.integrate_f(|p| p.trace_free_sq * p.u_hat)
    }

    /// `((n+1−k)/(n+1))∫f H^F_k dμ_F`, the rate of `V_k`, `1 ≤ k ≤ n`.
    pub fn quermass_rate(&self, k: usize) -> Result<f64> {
        if !(1..=N).contains(&k) {
            return Err(Error::Domain(format!("rate index {k} out of range for n = {N}")));
        }
        let n = self.nn();
        Ok((n + 1.0 - k as f64) / (n + 1.0) * self.integrate_f(|p| p.speed * p.h_k[k]))
    }

    pub fn sup_speed(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, p| m.max(p.speed.abs()))
    }

    pub fn min_kappa(&self) -> f64 {
        self.nodes.iter().fold(f64::INFINITY, |m, p| m.min(p.kappa[0]))
    }

    pub fn min_u_bar(&self) -> f64 {
        self.nodes.iter().fold(f64::INFINITY, |m, p| m.min(p.u_bar))
    }

    pub fn max_diffusion(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, p| m.max(p.diffusion))
    }

    /// Warm starts for the next evaluation.
    pub fn warm_starts(&self) -> Vec<[f64; D]> {
        self.nodes.iter().map(|p| p.warm).collect()
    }
}
