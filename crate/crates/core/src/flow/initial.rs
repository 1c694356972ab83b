//! Initial surfaces: capillary Wulff caps and their seeded perturbations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::norms::Norm;
use crate::sampling;
use crate::surface::{GraphSurface, HalfSphereGrid};
use crate::wulff::CapillaryWulffShape;

/// How the flow is started.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSurface {
    /// `W_{r,ω₀}`.
    WulffCap { radius: f64 },
    /// `ρ = ρ_cap(1 + εP)` with `P = x₃²·C(x)`, `C` a seeded random cubic,
    /// scaled to `max|P| = 1` on the lattice. The factor `x₃²` leaves the
    /// contact angle of the cap untouched.
    PerturbedCap { radius: f64, epsilon: f64, seed: u64 },
    /// As `PerturbedCap` with a fixed low-order field `P = x₃²(x₁ + ½x₂² − ¼)`,
    /// also scaled to `max|P| = 1`.
    SmoothCap { radius: f64, epsilon: f64 },
}

/// Degree ≤ 3 monomial exponents in three variables.
fn monomials() -> Vec<[i32; 3]> {
    let mut out = Vec::new();
    for a in 0..=3 {
        for b in 0..=(3 - a) {
            for c in 0..=(3 - a - b) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// A seeded random cubic polynomial on `R³`.
pub fn random_cubic(seed: u64) -> impl Fn(&[f64; 3]) -> f64 {
    let mut rng = sampling::rng(seed);
    let terms: Vec<([i32; 3], f64)> = monomials().into_iter().map(|m| (m, rng.gen_range(-1.0..1.0))).collect();
    move |x: &[f64; 3]| terms.iter().map(|(m, c)| c * x[0].powi(m[0]) * x[1].powi(m[1]) * x[2].powi(m[2])).sum()
}

impl InitialSurface {
    /// Samples the surface on `grid` (ghost row included).
    pub fn build(&self, norm: &Norm, omega0: f64, grid: &HalfSphereGrid) -> Result<GraphSurface> {
        let (radius, epsilon, field): (f64, f64, Box<dyn Fn(&[f64; 3]) -> f64>) = match self {
            InitialSurface::WulffCap { radius } => (*radius, 0.0, Box::new(|_: &[f64; 3]| 0.0)),
            InitialSurface::PerturbedCap { radius, epsilon, seed } => {
                let c = random_cubic(*seed);
                (*radius, *epsilon, Box::new(move |x: &[f64; 3]| x[2] * x[2] * c(x)))
            }
            InitialSurface::SmoothCap { radius, epsilon } => {
                (*radius, *epsilon, Box::new(|x: &[f64; 3]| x[2] * x[2] * (x[0] + 0.5 * x[1] * x[1] - 0.25)))
            }
        };
        let shape = CapillaryWulffShape::new(norm, radius, omega0)?;
        let mut scale: f64 = 0.0;
        for i in 0..grid.n_beta {
            for j in 0..grid.n_lambda {
                scale = scale.max(field(&grid.direction2(i, j)).abs());
            }
        }
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let s = GraphSurface::from_radial(grid.clone(), |x| {
            Ok(shape.radial_function(x)? * (1.0 + epsilon * field(x) / scale))
        })?;
        if s.phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("initial surface is not star-shaped".into()));
        }
        Ok(s)
    }
}
