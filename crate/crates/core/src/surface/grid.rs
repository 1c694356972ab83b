//! Cell-centred lattices on the closed upper half-sphere `S^n_+`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Lattice over `S^n_+` in polar coordinates about `E_{n+1}`.
///
/// For `n = 2` the cells are `(β_i, λ_j)`, `β_i = (i + ½)Δβ ∈ (0, π/2)`,
/// `λ_j = (j + ½)Δλ`. For `n = 3` a middle angle `γ ∈ (0, π)` is added:
/// `x = (sinβ sinγ cosλ, sinβ sinγ sinλ, sinβ cosγ, cosβ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSphereGrid {
    pub n: usize,
    pub n_beta: usize,
    pub n_lambda: usize,
    /// Cells in `γ`; zero for `n = 2`.
    pub n_gamma: usize,
}

impl HalfSphereGrid {
    pub fn new2(n_beta: usize, n_lambda: usize) -> Result<Self> {
        if n_beta < 4 || n_lambda < 8 || n_lambda % 2 != 0 {
            return Err(Error::Domain(format!("grid {n_beta}×{n_lambda}: need Nβ ≥ 4 and an even Nλ ≥ 8")));
        }
        Ok(HalfSphereGrid { n: 2, n_beta, n_lambda, n_gamma: 0 })
    }

    pub fn new3(n_beta: usize, n_gamma: usize, n_lambda: usize) -> Result<Self> {
        if n_beta < 2 || n_gamma < 2 || n_lambda < 4 {
            return Err(Error::Domain(format!("grid {n_beta}×{n_gamma}×{n_lambda} is too coarse")));
        }
        Ok(HalfSphereGrid { n: 3, n_beta, n_lambda, n_gamma })
    }

    pub fn d_beta(&self) -> f64 {
        FRAC_PI_2 / self.n_beta as f64
    }

    pub fn d_lambda(&self) -> f64 {
        TAU / self.n_lambda as f64
    }

    pub fn d_gamma(&self) -> f64 {
        PI / self.n_gamma.max(1) as f64
    }

    /// `β` of row `i`; row `n_beta` is the ghost row beyond the equator.
    pub fn beta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.d_beta()
    }

    pub fn lambda(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_lambda()
    }

    pub fn gamma(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.d_gamma()
    }

    /// Number of interior cells.
    pub fn cells(&self) -> usize {
        match self.n {
            2 => self.n_beta * self.n_lambda,
            _ => self.n_beta * self.n_gamma * self.n_lambda,
        }
    }

    /// Round-metric measure of an `n = 2` cell in row `i`.
    pub fn weight2(&self, i: usize) -> f64 {
        2.0 * self.beta(i).sin() * (0.5 * self.d_beta()).sin() * self.d_lambda()
    }

    /// Unit direction of the `n = 2` cell `(i, j)`; also valid for the ghost row.
    pub fn direction2(&self, i: usize, j: usize) -> [f64; 3] {
        polar2(self.beta(i), self.lambda(j))
    }

    /// Orthonormal frame `(e_β, e_λ)` at `(β, λ)`.
    pub fn frame2(beta: f64, lambda: f64) -> [[f64; 3]; 2] {
        let (sb, cb) = beta.sin_cos();
        let (sl, cl) = lambda.sin_cos();
        [[cb * cl, cb * sl, -sb], [-sl, cl, 0.0]]
    }

    /// Cell `(i, k, j)` of the `n = 3` lattice flattened to one index.
    pub fn index3(&self, i: usize, k: usize, j: usize) -> usize {
        (i * self.n_gamma + k) * self.n_lambda + j
    }

    /// Round-metric measure of the `n = 3` cell in rows `(i, k)`.
    pub fn weight3(&self, i: usize, k: usize) -> f64 {
        let (b0, b1) = (i as f64 * self.d_beta(), (i + 1) as f64 * self.d_beta());
        let (g0, g1) = (k as f64 * self.d_gamma(), (k + 1) as f64 * self.d_gamma());
        let wb = 0.5 * (b1 - b0) - 0.25 * ((2.0 * b1).sin() - (2.0 * b0).sin());
        wb * (g0.cos() - g1.cos()) * self.d_lambda()
    }

    pub fn direction3(&self, i: usize, k: usize, j: usize) -> [f64; 4] {
        polar3(self.beta(i), self.gamma(k), self.lambda(j))
    }

    /// Orthonormal frame `(e_β, e_γ, e_λ)` at a point of `S³`.
    pub fn frame3(beta: f64, gamma: f64, lambda: f64) -> [[f64; 4]; 3] {
        let (sb, cb) = beta.sin_cos();
        let (sg, cg) = gamma.sin_cos();
        let (sl, cl) = lambda.sin_cos();
        [
            [cb * sg * cl, cb * sg * sl, cb * cg, -sb],
            [cg * cl, cg * sl, -sg, 0.0],
            [-sl, cl, 0.0, 0.0],
        ]
    }

    /// Every interior cell as (direction, frame, weight); `n = 2` uses row-major `(i, j)`.
    pub fn cells2(&self) -> Vec<([f64; 3], [[f64; 3]; 2], f64)> {
        let mut out = Vec::with_capacity(self.cells());
        for i in 0..self.n_beta {
            let w = self.weight2(i);
            for j in 0..self.n_lambda {
                out.push((self.direction2(i, j), Self::frame2(self.beta(i), self.lambda(j)), w));
            }
        }
        out
    }

    pub fn cells3(&self) -> Vec<([f64; 4], [[f64; 4]; 3], f64)> {
        let mut out = Vec::with_capacity(self.cells());
        for i in 0..self.n_beta {
            for k in 0..self.n_gamma {
                let w = self.weight3(i, k);
                for j in 0..self.n_lambda {
                    let (b, g, l) = (self.beta(i), self.gamma(k), self.lambda(j));
                    out.push((polar3(b, g, l), Self::frame3(b, g, l), w));
                }
            }
        }
        out
    }

    /// Midpoint quadrature of `f` over `S^n_+`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        match self.n {
            2 => self.cells2().iter().map(|(x, _, w)| w * f(x)).sum(),
            _ => self.cells3().iter().map(|(x, _, w)| w * f(x)).sum(),
        }
    }
}

pub fn polar2(beta: f64, lambda: f64) -> [f64; 3] {
    let (sb, cb) = beta.sin_cos();
    let (sl, cl) = lambda.sin_cos();
    [sb * cl, sb * sl, cb]
}

pub fn polar3(beta: f64, gamma: f64, lambda: f64) -> [f64; 4] {
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let (sl, cl) = lambda.sin_cos();
    [sb * sg * cl, sb * sg * sl, sb * cg, cb]
}
