//! The contact curve `∂Σ ⊂ {x₃ = 0}` of an `n = 2` graph, in polar form `r(λ)`.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// First and second derivatives of samples of a `TAU`-periodic function on
/// a uniform grid, by Fourier differentiation.
pub fn periodic_derivatives(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut spec: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut spec);
    let mut d1 = spec.clone();
    let mut d2 = spec;
    for k in 0..n {
        let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let nyquist = n % 2 == 0 && k == n / 2;
        d1[k] *= if nyquist { Complex::new(0.0, 0.0) } else { Complex::new(0.0, m) };
        d2[k] *= -m * m;
    }
    inv.process(&mut d1);
    inv.process(&mut d2);
    let s = 1.0 / n as f64;
    (d1.iter().map(|c| c.re * s).collect(), d2.iter().map(|c| c.re * s).collect())
}

/// Polar samples `r(λ_j)` of the contact curve with spectral derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub lambda: Vec<f64>,
    pub rho: Vec<f64>,
    pub d_rho: Vec<f64>,
    pub dd_rho: Vec<f64>,
    /// `max |⟨ν_F, E₃⟩ + ω₀|` over the contact line, when known.
    pub capillarity_residual: Option<f64>,
}

impl BoundaryTrace {
    /// From samples at `λ_j = λ_0 + jTAU/N`.
    pub fn from_samples(lambda: Vec<f64>, rho: Vec<f64>) -> Self {
        let (d_rho, dd_rho) = periodic_derivatives(&rho);
        BoundaryTrace { lambda, rho, d_rho, dd_rho, capillarity_residual: None }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn d_lambda(&self) -> f64 {
        TAU / self.len() as f64
    }

    /// Area enclosed by the curve, `½∫r² dλ`.
    pub fn wetted_area(&self) -> f64 {
        0.5 * self.rho.iter().map(|r| r * r).sum::<f64>() * self.d_lambda()
    }

    pub fn point(&self, j: usize) -> [f64; 2] {
        let (s, c) = self.lambda[j].sin_cos();
        [self.rho[j] * c, self.rho[j] * s]
    }

    /// `ds/dλ = sqrt(r² + r'²)`.
    pub fn line_element(&self, j: usize) -> f64 {
        self.rho[j].hypot(self.d_rho[j])
    }

    /// Outer unit normal of the curve in the plane.
    pub fn conormal(&self, j: usize) -> [f64; 2] {
        let (r, dr) = (self.rho[j], self.d_rho[j]);
        let (s, c) = self.lambda[j].sin_cos();
        let len = self.line_element(j);
        [(r * c + dr * s) / len, (r * s - dr * c) / len]
    }

    /// Signed curvature, positive for a convex curve.
    pub fn curvature(&self, j: usize) -> f64 {
        let (r, dr, ddr) = (self.rho[j], self.d_rho[j], self.dd_rho[j]);
        (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5)
    }

    /// `∮ w ds` by the periodic trapezoid rule.
    pub fn integrate(&self, w: impl Fn(usize) -> f64) -> f64 {
        (0..self.len()).map(|j| w(j) * self.line_element(j)).sum::<f64>() * self.d_lambda()
    }
}
