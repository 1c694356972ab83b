//! Right-hand side `∂_tφ = vF(ν)e^{−φ}f` and explicit time integrators.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::flow::boundary::{boundary_enforce, BoundaryReport};
use crate::norms::Norm;
use crate::surface::{Bundle2, GraphSurface};
use crate::wulff::AnchorVector;

/// Blow-up threshold on `sup|φ|`.
pub const PHI_LIMIT: f64 = 20.0;
pub const DT_MIN: f64 = 1e-12;

/// Time integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrator {
    Euler,
    /// Heun's method.
    Rk2,
    /// Second-order Runge–Kutta–Legendre super-time-stepping with `stages`
    /// stages; the step grows to `(s² + s − 2)/4` explicit steps.
    Rkl2 { stages: usize },
}

impl Integrator {
    /// Step length as a multiple of the explicit stability limit.
    pub fn step_factor(&self) -> f64 {
        match *self {
            Integrator::Euler | Integrator::Rk2 => 1.0,
            Integrator::Rkl2 { stages } => {
                let s = stages as f64;
                (s * s + s - 2.0) / 4.0
            }
        }
    }
}

/// Evaluates the flow speed on a lattice surface, keeping dual-solve warm starts.
pub struct Evaluator<'a> {
    pub norm: &'a Norm,
    pub anchor: &'a AnchorVector,
    pub boundary_tol: f64,
    warm: Option<Vec<[f64; 3]>>,
    filter: PolarFilter,
}

/// Damping of the λ-modes of lattice rows near the poles.
///
/// Slows the modes that the time step set by `Δβ` cannot resolve down to
/// that rate. The multipliers are positive, so a filtered field vanishes
/// exactly where the input does.
pub struct PolarFilter {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Per-row multipliers of the λ-modes `|m| = 0..=n_λ/2`, `None` when the row is unfiltered.
    damping: Vec<Option<Vec<f64>>>,
}

impl PolarFilter {
    /// Filter for rows at colatitudes `betas` with row spacing `d_beta` and `n_lambda` columns.
    pub fn new(betas: &[f64], d_beta: f64, n_lambda: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n_lambda);
        let inv = planner.plan_fft_inverse(n_lambda);
        let dl = std::f64::consts::TAU / n_lambda as f64;
        let damping = betas
            .iter()
            .map(|b| {
                let r = b.sin() * dl / d_beta;
                (r < 1.0).then(|| {
                    (0..=n_lambda / 2)
                        .map(|m| {
                            let s = 0.5 * m as f64 * dl;
                            if s <= r {
                                1.0
                            } else {
                                (r / s).powi(2)
                            }
                        })
                        .collect()
                })
            })
            .collect();
        PolarFilter { fwd, inv, damping }
    }

    /// Filters the row-major field `values` in place.
    pub fn apply(&self, values: &mut [f64]) {
        let nl = self.fwd.len();
        let mut buf = vec![Complex::new(0.0, 0.0); nl];
        for (i, damp) in self.damping.iter().enumerate() {
            let Some(damp) = damp else { continue };
            let row = &mut values[i * nl..(i + 1) * nl];
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex::new(*v, 0.0);
            }
            self.fwd.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                *b *= damp[k.min(nl - k)];
            }
            self.inv.process(&mut buf);
            for (v, b) in row.iter_mut().zip(&buf) {
                *v = b.re / nl as f64;
            }
        }
    }
}

/// What one right-hand-side evaluation produced.
pub struct Evaluation {
    pub bundle: Bundle2,
    /// `∂_tφ` on the interior cells, row-major.
    pub rhs: Vec<f64>,
    pub boundary: BoundaryReport,
}

impl<'a> Evaluator<'a> {
    pub fn new(norm: &'a Norm, anchor: &'a AnchorVector, surface: &GraphSurface, boundary_tol: f64) -> Self {
        let g = &surface.grid;
        let betas: Vec<f64> = (0..g.n_beta).map(|i| g.beta(i)).collect();
        let filter = PolarFilter::new(&betas, g.d_beta(), g.n_lambda);
        Evaluator { norm, anchor, boundary_tol, warm: None, filter }
    }

    /// Enforces the boundary condition on `surface`, then evaluates the geometry and `∂_tφ`.
    pub fn evaluate(&mut self, surface: &mut GraphSurface) -> Result<Evaluation> {
        let boundary = boundary_enforce(surface, self.norm, self.anchor.omega0, self.boundary_tol)?;
        let bundle = surface.geometry(self.norm, self.anchor, self.warm.as_deref())?;
        self.warm = Some(bundle.warm_starts());
        let mut rhs: Vec<f64> = bundle.nodes.iter().map(|p| p.v * p.f_nu / p.rho * p.speed).collect();
        self.filter.apply(&mut rhs);
        if let Some(k) = rhs.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t: surface.time, reason: format!("non-finite speed at node {k}") });
        }
        Ok(Evaluation { bundle, rhs, boundary })
    }

    /// Explicit limit `σΔβ²/(2n·D_max)`.
    pub fn stable_dt(&self, bundle: &Bundle2, surface: &GraphSurface, sigma: f64) -> f64 {
        let db = surface.grid.d_beta();
        sigma * db * db / (2.0 * bundle.n as f64 * bundle.max_diffusion())
    }
}

/// Result of one step.
pub struct StepOutput {
    pub dt: f64,
    /// Evaluation at the start of the step.
    pub start: Evaluation,
}

fn axpy(base: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = base.to_vec();
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

/// Replaces the interior values of `surface` by `interior` (row-major).
fn with_interior(surface: &GraphSurface, interior: Vec<f64>, time: f64) -> GraphSurface {
    let mut s = surface.clone();
    s.phi[..interior.len()].copy_from_slice(&interior);
    s.time = time;
    s
}

fn check(surface: &GraphSurface) -> Result<()> {
    if let Some(k) = surface.phi.iter().position(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t: surface.time, reason: format!("non-finite φ at index {k}") });
    }
    let m = surface.sup_abs_phi();
    if m > PHI_LIMIT {
        return Err(Error::BlowUp { t: surface.time, reason: format!("sup|φ| = {m:.3e} exceeds {PHI_LIMIT}") });
    }
    Ok(())
}

/// Advances `surface` by one step. The step is `dt` if given, otherwise the
/// explicit limit times [`Integrator::step_factor`]; the returned surface has
/// its ghost layer re-enforced.
pub fn step(
    surface: &mut GraphSurface,
    ev: &mut Evaluator,
    sigma: f64,
    integrator: Integrator,
    dt: Option<f64>,
) -> Result<StepOutput> {
    step_capped(surface, ev, sigma, integrator, dt, f64::INFINITY)
}

/// [`step`] with the automatic step shortened to at most `cap`.
pub fn step_capped(
    surface: &mut GraphSurface,
    ev: &mut Evaluator,
    sigma: f64,
    integrator: Integrator,
    dt: Option<f64>,
    cap: f64,
) -> Result<StepOutput> {
    let start = ev.evaluate(surface)?;
    let dt = dt.unwrap_or_else(|| (ev.stable_dt(&start.bundle, surface, sigma) * integrator.step_factor()).min(cap));
    if !(dt >= DT_MIN) {
        return Err(Error::BlowUp { t: surface.time, reason: format!("time step {dt:.3e} below {DT_MIN:e}") });
    }
    let m = start.rhs.len();
    let y0: Vec<f64> = surface.phi[..m].to_vec();
    let t0 = surface.time;
    let next = match integrator {
        Integrator::Euler => with_interior(surface, axpy(&y0, &[(dt, &start.rhs)]), t0 + dt),
        Integrator::Rk2 => {
            let mut s1 = with_interior(surface, axpy(&y0, &[(dt, &start.rhs)]), t0 + dt);
            check(&s1)?;
            let k2 = ev.evaluate(&mut s1)?.rhs;
            with_interior(surface, axpy(&y0, &[(0.5 * dt, &start.rhs), (0.5 * dt, &k2)]), t0 + dt)
        }
        Integrator::Rkl2 { stages } => rkl2(surface, ev, &y0, &start.rhs, dt, stages.max(2))?,
    };
    let mut next = next;
    check(&next)?;
    boundary_enforce(&mut next, ev.norm, ev.anchor.omega0, ev.boundary_tol)?;
    *surface = next;
    Ok(StepOutput { dt, start })
}

fn rkl2(surface: &GraphSurface, ev: &mut Evaluator, y0: &[f64], l0: &[f64], dt: f64, s: usize) -> Result<GraphSurface> {
    let sf = s as f64;
    let w1 = 4.0 / (sf * sf + sf - 2.0);
    let b = |j: usize| -> f64 {
        if j < 2 {
            1.0 / 3.0
        } else {
            let jf = j as f64;
            (jf * jf + jf - 2.0) / (2.0 * jf * (jf + 1.0))
        }
    };
    let t0 = surface.time;
    let mut prev2 = y0.to_vec();
    let mut prev = axpy(y0, &[(w1 / 3.0 * dt, l0)]);
    for j in 2..=s {
        let jf = j as f64;
        let mu = (2.0 * jf - 1.0) / jf * b(j) / b(j - 1);
        let nu = -(jf - 1.0) / jf * b(j) / b(j - 2);
        let mu_t = mu * w1;
        let gamma_t = -(1.0 - b(j - 1)) * mu_t;
        let mut stage = with_interior(surface, prev.clone(), t0);
        check(&stage)?;
        let lj = ev.evaluate(&mut stage)?.rhs;
        let mut y = vec![0.0; y0.len()];
        for k in 0..y.len() {
            y[k] = mu * prev[k] + nu * prev2[k] + (1.0 - mu - nu) * y0[k] + mu_t * dt * lj[k] + gamma_t * dt * l0[k];
        }
        prev2 = prev;
        prev = y;
    }
    Ok(with_interior(surface, prev, t0 + dt))
}
