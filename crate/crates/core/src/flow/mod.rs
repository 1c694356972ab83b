//! The volume-preserving anisotropic flow `∂_tX = fν_F + T` with
//! `f = n + nω₀G(ν_F)(ν_F, E^F) − ûH_F`, in its radial-graph form
//! `∂_tφ = vF(ν)e^{−φ}f` on the `n = 2` lattice, with the capillary
//! condition imposed through the ghost layer.

mod boundary;
mod initial;
mod step;
mod trace;

pub use boundary::{boundary_enforce, capillarity_residual, BoundaryReport, BOUNDARY_MAX_ITER};
pub use initial::{random_cubic, InitialSurface};
pub use step::{step, Evaluation, Evaluator, Integrator, PolarFilter, StepOutput, DT_MIN, PHI_LIMIT};
pub use trace::{FlowRecord, FlowTrace, MonitorReport, RateReport, MONITOR_HEADER, TRACE_HEADER};

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::norms::Norm;
use crate::surface::{write_obj, Bundle2, GraphSurface, HalfSphereGrid};
use crate::wulff::{anchor_vector, AnchorVector, CapillaryWulffShape, TranslatedNorm};

/// Parameters of a run.
#[derive(Clone, Debug)]
pub struct FlowConfig {
    pub norm: Norm,
    pub omega0: f64,
    pub initial: InitialSurface,
    pub n_beta: usize,
    pub n_lambda: usize,
    pub cfl_sigma: f64,
    pub t_end: f64,
    /// Stop once `sup|f|` falls below this.
    pub convergence_tol: f64,
    pub boundary_tol: f64,
    pub integrator: Integrator,
    /// Fixed step overriding the stability limit.
    pub dt: Option<f64>,
    pub max_steps: usize,
    /// OBJ snapshot period in steps (0 disables).
    pub snapshot_every: usize,
    /// Period, in records, of the boundary-form `V₂` monitor (0 disables).
    pub boundary_form_every: usize,
    /// Where trace, monitors and snapshots are written.
    pub output_dir: Option<PathBuf>,
}

impl FlowConfig {
    pub fn new(norm: Norm, omega0: f64, initial: InitialSurface) -> Self {
        FlowConfig {
            norm,
            omega0,
            initial,
            n_beta: 64,
            n_lambda: 128,
            cfl_sigma: 0.4,
            t_end: 10.0,
            convergence_tol: 1e-2,
            boundary_tol: 1e-8,
            integrator: Integrator::Euler,
            dt: None,
            max_steps: usize::MAX,
            snapshot_every: 0,
            boundary_form_every: 0,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        anchor_vector(&self.norm, self.omega0)?;
        if self.norm.d != 3 {
            return Err(Error::Config("the flow runs on surfaces in R³ (n = 2)".into()));
        }
        if !(self.cfl_sigma > 0.0 && self.cfl_sigma < 1.0) {
            return Err(Error::Config(format!("cfl_sigma must lie in (0, 1), got {}", self.cfl_sigma)));
        }
        if self.n_beta < 16 || self.n_lambda < 16 {
            return Err(Error::Config(format!("grid {}×{} is below the minimum 16×16", self.n_beta, self.n_lambda)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::Config("dt must be positive".into()));
            }
        }
        if let Integrator::Rkl2 { stages } = self.integrator {
            if stages < 2 {
                return Err(Error::Config("RKL2 needs at least 2 stages".into()));
            }
        }
        Ok(())
    }
}

/// `f` at every interior node.
pub fn speed_field(bundle: &Bundle2) -> Vec<f64> {
    bundle.nodes.iter().map(|p| p.speed).collect()
}

/// Static comparison caps `W_{r,ω₀} = r·W_{1,ω₀}` for the run.
#[derive(Clone, Debug, PartialEq)]
pub struct Barriers {
    /// `ρ_{W₁}` on the interior cells.
    pub rho_w1: Vec<f64>,
    /// Largest `r` with `W_r` inside `Σ₀`.
    pub r_inner: f64,
    /// Smallest `r` with `Σ₀` inside `W_r`.
    pub r_outer: f64,
    /// `C₃/(2(1 + F⁰(ω₀E^F)))`, `C₃ = min_{Σ₀} F⁰`.
    pub r1_coarse: f64,
    /// `2C₄/(1 − F⁰(−ω₀E^F))`, `C₄ = max_{Σ₀} F⁰`.
    pub r2_coarse: f64,
    /// Lattice volume of `W_{1,ω₀}`.
    pub v0_w1: f64,
}

impl Barriers {
    pub fn new(norm: &Norm, anchor: &AnchorVector, surface: &GraphSurface) -> Result<Self> {
        let g = &surface.grid;
        let unit = CapillaryWulffShape::with_anchor(norm, 1.0, anchor.clone());
        let m = g.n_beta * g.n_lambda;
        let mut rho_w1 = Vec::with_capacity(m);
        let (mut r_inner, mut r_outer) = (f64::INFINITY, 0.0f64);
        let (mut c3, mut c4) = (f64::INFINITY, 0.0f64);
        let mut v0_w1 = 0.0;
        for i in 0..g.n_beta {
            for j in 0..g.n_lambda {
                let x = g.direction2(i, j);
                let rw = unit.radial_function(&x)?;
                let rho = surface.rho(i, j);
                rho_w1.push(rw);
                r_inner = r_inner.min(rho / rw);
                r_outer = r_outer.max(rho / rw);
                let f0 = norm.f0(&x.map(|c| c * rho))?;
                c3 = c3.min(f0);
                c4 = c4.max(f0);
                v0_w1 += g.weight2(i) * rw.powi(3) / 3.0;
            }
        }
        let eta: Vec<f64> = anchor.e_f.iter().map(|v| anchor.omega0 * v).collect();
        let neg: Vec<f64> = eta.iter().map(|v| -v).collect();
        let f_eta = if anchor.omega0 == 0.0 { 0.0 } else { norm.f0(&eta)? };
        let f_neg = if anchor.omega0 == 0.0 { 0.0 } else { norm.f0(&neg)? };
        Ok(Barriers {
            rho_w1,
            r_inner,
            r_outer,
            r1_coarse: c3 / (2.0 * (1.0 + f_eta)),
            r2_coarse: 2.0 * c4 / (1.0 - f_neg),
            v0_w1,
        })
    }

    /// `(min(ρ − r_inner·ρ_{W₁}), min(r_outer·ρ_{W₁} − ρ))` over the nodes of `bundle`.
    pub fn gaps(&self, bundle: &Bundle2) -> (f64, f64) {
        let mut inner = f64::INFINITY;
        let mut outer = f64::INFINITY;
        for (p, rw) in bundle.nodes.iter().zip(&self.rho_w1) {
            inner = inner.min(p.rho - self.r_inner * rw);
            outer = outer.min(self.r_outer * rw - p.rho);
        }
        (inner, outer)
    }

    /// Whether the coarse caps `W_{r₁}` and `W_{r₂}` enclose the surface.
    pub fn coarse_contain(&self, bundle: &Bundle2) -> bool {
        bundle.nodes.iter().zip(&self.rho_w1).all(|(p, rw)| p.rho >= self.r1_coarse * rw && p.rho <= self.r2_coarse * rw)
    }
}

/// Fit of the final surface to `W_{r₀,ω₀}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceFit {
    /// `r₀ = (V₀/V₀(W_{1,ω₀}))^{1/(n+1)}`.
    pub r0: f64,
    /// `max|ρ − r₀ρ_{W₁}|/r₀` over the lattice.
    pub max_radial_deviation: f64,
}

impl ConvergenceFit {
    pub fn new(surface: &GraphSurface, barriers: &Barriers) -> Self {
        let g = &surface.grid;
        let mut v0 = 0.0;
        for i in 0..g.n_beta {
            for j in 0..g.n_lambda {
                v0 += g.weight2(i) * surface.rho(i, j).powi(3) / 3.0;
            }
        }
        let r0 = (v0 / barriers.v0_w1).cbrt();
        let mut dev: f64 = 0.0;
        for i in 0..g.n_beta {
            for j in 0..g.n_lambda {
                let k = i * g.n_lambda + j;
                dev = dev.max((surface.rho(i, j) - r0 * barriers.rho_w1[k]).abs() / r0);
            }
        }
        ConvergenceFit { r0, max_radial_deviation: dev }
    }
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowStatus {
    Converged,
    ReachedEnd,
    MaxSteps,
    BlowUp { t: f64, reason: String },
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub trace: FlowTrace,
    pub surface: GraphSurface,
    pub status: FlowStatus,
    pub fit: ConvergenceFit,
    pub barriers: Barriers,
    /// Whether the coarse caps enclosed every recorded state.
    pub coarse_barriers_hold: bool,
    pub steps: usize,
}

impl FlowOutcome {
    pub fn converged(&self) -> bool {
        self.status == FlowStatus::Converged
    }
}

fn record(
    step: usize,
    t: f64,
    dt: f64,
    b: &Bundle2,
    barriers: &Barriers,
    bc: f64,
    tn: Option<&TranslatedNorm>,
) -> Result<FlowRecord> {
    let (inner_gap, outer_gap) = barriers.gaps(b);
    Ok(FlowRecord {
        step,
        t,
        dt,
        v0: b.enclosed_volume(),
        v1_boundary: b.capillary_area()?,
        v1_interior: b.quermass_interior(0)?,
        v2_interior: b.quermass_interior(1)?,
        v3_interior: b.quermass_interior(2)?,
        v2_boundary: tn.map(|tn| b.quermass_boundary(1, tn)).transpose()?,
        sup_f: b.sup_speed(),
        min_kappa: b.min_kappa(),
        min_u_bar: b.min_u_bar(),
        mink_k0: b.minkowski_residual(0)?,
        mink_k1: b.minkowski_residual(1)?,
        rate_v0: b.volume_rate(),
        rate_v1: b.area_rate(),
        rate_v1_trace_free: b.area_rate_trace_free(),
        rate_v2: b.quermass_rate(2)?,
        inner_gap,
        outer_gap,
        bc_residual: bc,
        ..FlowRecord::default()
    })
}

/// Runs the flow until `sup|f| < convergence_tol`, `t_end` or `max_steps`.
///
/// A blow-up ends the run with [`FlowStatus::BlowUp`] and the partial trace.
/// With an output directory, `trace.csv`, `monitors.csv` and OBJ snapshots
/// are written there.
pub fn run(cfg: &FlowConfig) -> Result<FlowOutcome> {
    cfg.validate()?;
    let grid = HalfSphereGrid::new2(cfg.n_beta, cfg.n_lambda)?;
    let anchor = anchor_vector(&cfg.norm, cfg.omega0)?;
    let mut surface = cfg.initial.build(&cfg.norm, cfg.omega0, &grid)?;
    boundary_enforce(&mut surface, &cfg.norm, cfg.omega0, cfg.boundary_tol)?;
    let barriers = Barriers::new(&cfg.norm, &anchor, &surface)?;
    let tn = if cfg.boundary_form_every > 0 { Some(TranslatedNorm::with_anchor(&cfg.norm, anchor.clone())?) } else { None };
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut ev = Evaluator::new(&cfg.norm, &anchor, &surface, cfg.boundary_tol);
    let mut trace = FlowTrace::default();
    let mut coarse_ok = true;
    let mut steps = 0;
    let status = loop {
        let before = surface.clone();
        let remaining = cfg.t_end - surface.time;
        let at_end = remaining <= 1e-12 * cfg.t_end.max(1.0);
        let result = if at_end || steps >= cfg.max_steps {
            ev.evaluate(&mut surface).map(|e| (e, 0.0))
        } else {
            let dt = cfg.dt.map(|d| d.min(remaining));
            step::step_capped(&mut surface, &mut ev, cfg.cfl_sigma, cfg.integrator, dt, remaining)
                .map(|o| (o.start, o.dt))
        };
        let (start, dt) = match result {
            Ok(v) => v,
            Err(e) => {
                surface = before;
                let (t, reason) = match e {
                    Error::BlowUp { t, reason } => (t, reason),
                    other => (surface.time, other.to_string()),
                };
                break FlowStatus::BlowUp { t, reason };
            }
        };
        let want_boundary = cfg.boundary_form_every > 0 && trace.records.len() % cfg.boundary_form_every == 0;
        let rec = record(
            steps,
            before.time,
            dt,
            &start.bundle,
            &barriers,
            start.boundary.max_residual,
            if want_boundary { tn.as_ref() } else { None },
        )?;
        coarse_ok &= barriers.coarse_contain(&start.bundle);
        if let Some(dir) = &cfg.output_dir {
            if cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0 {
                write_obj(&dir.join(format!("snap_{steps}.obj")), &start.bundle, cfg.n_lambda)?;
            }
        }
        let converged = rec.sup_f < cfg.convergence_tol;
        trace.records.push(rec);
        if converged {
            surface = before;
            trace.records.last_mut().expect("record just pushed").dt = 0.0;
            break FlowStatus::Converged;
        }
        if at_end {
            break FlowStatus::ReachedEnd;
        }
        if steps >= cfg.max_steps {
            break FlowStatus::MaxSteps;
        }
        steps += 1;
    };
    trace.finalize();
    let fit = ConvergenceFit::new(&surface, &barriers);
    if let Some(dir) = &cfg.output_dir {
        std::fs::write(dir.join("trace.csv"), trace.to_csv())?;
        std::fs::write(dir.join("monitors.csv"), trace.monitors_csv())?;
    }
    Ok(FlowOutcome { trace, surface, status, fit, barriers, coarse_barriers_hold: coarse_ok, steps })
}
