//! Verification batteries: each suite evaluates a family of checks with
//! pinned tolerances and reports one line per check.

use std::f64::consts::PI;
use std::fmt;

use crate::condition::{self, ScanOutcome, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::flow::{self, boundary_enforce, random_cubic, FlowConfig, FlowOutcome, InitialSurface, Integrator};
use crate::norms::Norm;
use crate::sampling;
use crate::surface::{chart_geometry2, chart_geometry3, Bundle2, Bundle3, GraphSurface, HalfSphereGrid};
use crate::wulff::{anchor_vector, CapillaryWulffShape, TranslatedNorm};

pub const SUITES: &[&str] = &["duality", "wulff-static", "minkowski", "flow-conservation", "inequalities", "appendix-a"];

/// One verified quantity. `pass` is `None` for values that are only reported.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bar: String,
    pub pass: Option<bool>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bar: f64) -> Self {
        Check { name: name.into(), value, bar: format!("≤ {bar:e}"), pass: Some(value <= bar) }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bar: f64) -> Self {
        Check { name: name.into(), value, bar: format!("≥ {bar:e}"), pass: Some(value >= bar) }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: f64::from(u8::from(ok)), bar: "true".into(), pass: Some(ok) }
    }

    pub fn report(name: impl Into<String>, value: f64) -> Self {
        Check { name: name.into(), value, bar: "reported".into(), pass: None }
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        write!(f, "[{tag}] {}: {:.6e} ({})", self.name, self.value, self.bar)
    }
}

/// Runs the named suite.
pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    match name {
        "duality" => duality(),
        "wulff-static" => wulff_static(),
        "minkowski" => minkowski(),
        "flow-conservation" => flow_conservation(),
        "inequalities" => inequalities(),
        "appendix-a" => appendix_a(),
        other => Err(Error::Config(format!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")))),
    }
}

/// Norm identities and the vanishing of `Q` for quadratic norms.
pub fn duality() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let cases = [
        (Norm::sphere(3), "sphere", 1e-12),
        (Norm::ellipsoid(&[4.0, 1.0, 1.0])?, "ellipsoid(4,1,1)", 1e-7),
        (Norm::quartic_a2(), "quartic_a2", 1e-7),
    ];
    for (norm, label, tol) in &cases {
        let r = norm.verify_duality(100, sampling::DEFAULT_SEED)?;
        out.push(Check::at_most(format!("duality {label}: |F⁰(Ψ)−1|"), r.level_set, *tol));
        out.push(Check::at_most(format!("duality {label}: |DF⁰(Ψ)−x/F|"), r.gradient, *tol));
        out.push(Check::at_most(format!("duality {label}: |G(ν_F)(ν_F,Y)−⟨Y,ν⟩/F|"), r.metric_pairing, *tol));
    }
    for (norm, label, _) in cases.iter().take(2) {
        let mut m: f64 = 0.0;
        for x in sampling::sphere_samples(3, 100, sampling::DEFAULT_SEED) {
            let q = norm.tensor_q(&x)?;
            m = q.data.iter().fold(m, |a, v| a.max(v.abs()));
        }
        out.push(Check::at_most(format!("Q ≡ 0 for {label}: max |Q_ijk|"), m, 1e-10));
    }
    Ok(out)
}

/// Condition thresholds of the worked examples.
pub fn appendix_a() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (norm, label) in [(Norm::sphere(3), "sphere"), (Norm::quartic_a2(), "quartic_a2")] {
        match condition::scan_max_omega(&norm, -0.7, 0.8, DEFAULT_SLICE_SAMPLES)? {
            ScanOutcome::Threshold(t) => out.push(Check::at_most(format!("threshold ω₀* for {label} (|ω₀*|)"), t.abs(), 1e-3)),
            other => {
                out.push(Check { name: format!("threshold ω₀* for {label}: {other:?}"), value: f64::NAN, bar: "a sign change".into(), pass: Some(false) })
            }
        }
    }
    let a3 = Norm::quartic_a3(0.3)?;
    let r = condition::check(&a3, 0.3, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL)?;
    out.push(Check::holds("quartic_a3(z₀=0.3), ω₀=0.3 accepted", r.satisfied));
    out.push(Check::at_most("quartic_a3(z₀=0.3), ω₀=0.3: |min margin|", r.min_margin.abs(), 1e-5));
    let mut agree = r.both_forms_agree;
    for (norm, w) in [(Norm::sphere(3), -0.5), (Norm::sphere(3), 0.3), (Norm::quartic_a2(), -0.3), (Norm::quartic_a2(), 0.1)] {
        agree &= condition::check(&norm, w, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL)?.both_forms_agree;
    }
    out.push(Check::holds("original and translated forms agree in sign at every sample", agree));
    Ok(out)
}

/// The three static caps of the battery: sphere θ = π/3, θ = π/2 and the quartic at ω₀ = −0.3.
pub fn cap_battery() -> Result<Vec<(Norm, f64, &'static str)>> {
    Ok(vec![
        (Norm::sphere(3), -0.5, "sphere θ=π/3"),
        (Norm::sphere(3), 0.0, "sphere θ=π/2"),
        (Norm::quartic_a2(), -0.3, "quartic_a2 ω₀=−0.3"),
    ])
}

/// `W_{1,ω₀}` on the `n_β × 2n_β` lattice with the ghost layer set by the
/// boundary condition, and its geometry.
pub fn lattice_cap(norm: &Norm, omega0: f64, n_beta: usize) -> Result<(GraphSurface, Bundle2)> {
    let grid = HalfSphereGrid::new2(n_beta, 2 * n_beta)?;
    let shape = CapillaryWulffShape::new(norm, 1.0, omega0)?;
    let mut s = GraphSurface::from_wulff_cap(grid, &shape)?;
    boundary_enforce(&mut s, norm, omega0, 1e-12)?;
    let b = s.geometry(norm, &anchor_vector(norm, omega0)?, None)?;
    Ok((s, b))
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Static residuals and capillary quermassintegrals of Wulff caps.
pub fn wulff_static() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (norm, w, label) in cap_battery()? {
        let (_, b64) = lattice_cap(&norm, w, 64)?;
        let (_, b128) = lattice_cap(&norm, w, 128)?;
        let (f64_, f128) = (b64.sup_speed(), b128.sup_speed());
        out.push(Check::at_most(format!("{label}: sup|f| at 64×128"), f64_, 5e-3));
        out.push(Check::at_most(format!("{label}: sup|f| at 128×256"), f128, 1.5e-3));
        if f128 > 1e-10 {
            out.push(Check::report(format!("{label}: observed order of sup|f|"), order(f64_, f128)));
        }
        let v0 = b128.enclosed_volume();
        let v1 = b128.capillary_area()?;
        let v2 = b128.quermass_interior(1)?;
        out.push(Check::at_most(format!("{label}: |V₁(W)/V₀(W) − 1|"), (v1 / v0 - 1.0).abs(), 2e-3));
        out.push(Check::at_most(format!("{label}: |V₂(W)/V₀(W) − 1|"), (v2 / v0 - 1.0).abs(), 2e-3));
        if label == "sphere θ=π/3" {
            let exact = 5.0 * PI / 24.0;
            out.push(Check::at_most(format!("{label}: |V₀ − 5π/24|"), (v0 - exact).abs(), 1e-3));
            out.push(Check::at_most(format!("{label}: |V₁ − 5π/24|"), (v1 - exact).abs(), 1e-3));
        }
    }
    Ok(out)
}

/// Caps plus two smooth capillary perturbations.
fn minkowski_battery(n_beta: usize) -> Result<Vec<(String, Norm, f64, Bundle2)>> {
    let mut out = Vec::new();
    for (norm, w, label) in cap_battery()? {
        let (_, b) = lattice_cap(&norm, w, n_beta)?;
        out.push((format!("{label} cap"), norm, w, b));
    }
    for (norm, w, label) in [(Norm::sphere(3), -0.5, "sphere θ=π/3"), (Norm::quartic_a2(), -0.3, "quartic_a2 ω₀=−0.3")] {
        let grid = HalfSphereGrid::new2(n_beta, 2 * n_beta)?;
        let mut s = InitialSurface::SmoothCap { radius: 1.0, epsilon: 0.1 }.build(&norm, w, &grid)?;
        boundary_enforce(&mut s, &norm, w, 1e-12)?;
        let b = s.geometry(&norm, &anchor_vector(&norm, w)?, None)?;
        out.push((format!("{label} perturbed"), norm, w, b));
    }
    Ok(out)
}

/// Minkowski residuals with their refinement order, and the two forms of `V₂`.
pub fn minkowski() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let coarse = minkowski_battery(32)?;
    let fine = minkowski_battery(64)?;
    for ((label, norm, w, bc), (_, _, _, bf)) in coarse.iter().zip(&fine) {
        let gated = label.ends_with("cap");
        for k in 0..2 {
            let (rc, rf) = (bc.minkowski_residual(k)?.abs(), bf.minkowski_residual(k)?.abs());
            let name = format!("{label}: Minkowski residual k={k} at 64×128");
            out.push(if gated { Check::at_most(name, rf, 1e-3) } else { Check::report(name, rf) });
            if rc > 1e-9 {
                let name = format!("{label}: Minkowski k={k} refinement order");
                out.push(if gated { Check::at_least(name, order(rc, rf), 1.5) } else { Check::report(name, order(rc, rf)) });
            }
        }
        let tn = TranslatedNorm::new(norm, *w)?;
        let (vb, vi) = (bf.quermass_boundary(1, &tn)?, bf.quermass_interior(1)?);
        out.push(Check::at_most(format!("{label}: |V₂ boundary − V₂ interior|/V₂"), ((vb - vi) / vi).abs(), 5e-3));
    }
    Ok(out)
}

/// `ln ρ` of `r·W_{1,ω₀}` plus `ε·x₃²·C(x)`; the factor keeps the contact angle.
fn perturbed_cap2(norm: &Norm, omega0: f64, r: f64, eps: f64, seed: u64) -> Result<impl Fn(&[f64; 3]) -> Result<f64>> {
    let shape = CapillaryWulffShape::new(norm, r, omega0)?;
    let c = random_cubic(seed);
    Ok(move |x: &[f64; 3]| Ok(shape.radial_function(x)?.ln() + eps * x[2] * x[2] * c(x)))
}

fn perturbed_cap3(norm: &Norm, omega0: f64, r: f64, eps: f64) -> Result<impl Fn(&[f64; 4]) -> Result<f64>> {
    let shape = CapillaryWulffShape::new(norm, r, omega0)?;
    Ok(move |x: &[f64; 4]| {
        let p = 0.6 * x[0] - 0.4 * x[1] * x[2] + 0.3 * x[0] * x[0] - 0.2 * x[2] + 0.25 * x[0] * x[1] * x[2];
        Ok(shape.radial_function(x)?.ln() + eps * x[3] * x[3] * p)
    })
}

struct Ratios {
    v0: f64,
    vk: Vec<f64>,
}

fn ratios2(b: &Bundle2, w: &Bundle2) -> Result<Ratios> {
    Ok(Ratios { v0: b.enclosed_volume() / w.enclosed_volume(), vk: vec![b.capillary_area()? / w.capillary_area()?] })
}

fn ratios3(b: &Bundle3, w: &Bundle3) -> Result<Ratios> {
    let q = |x: &Bundle3, k: usize| x.quermass_interior(k);
    Ok(Ratios {
        v0: b.enclosed_volume() / w.enclosed_volume(),
        vk: vec![q(b, 0)? / q(w, 0)?, q(b, 1)? / q(w, 1)?],
    })
}

/// Isoperimetric and Alexandrov–Fenchel-type inequalities on surface batteries.
pub fn inequalities() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let grid = HalfSphereGrid::new2(64, 128)?;
    let star = [
        (Norm::sphere(3), -0.5, 1.0, 0.15, 1),
        (Norm::sphere(3), 0.3, 0.7, 0.12, 2),
        (Norm::quartic_a2(), -0.3, 1.3, 0.15, 3),
        (Norm::quartic_a2(), 0.2, 1.0, 0.10, 4),
        (Norm::ellipsoid(&[4.0, 1.0, 1.0])?, -0.2, 0.9, 0.12, 5),
    ];
    for (norm, w, r, eps, seed) in &star {
        let anchor = anchor_vector(norm, *w)?;
        let phi = perturbed_cap2(norm, *w, *r, *eps, *seed)?;
        let b = chart_geometry2(&grid, &phi, norm, &anchor)?;
        let reference = chart_geometry2(&grid, &perturbed_cap2(norm, *w, 1.0, 0.0, 0)?, norm, &anchor)?;
        let q = ratios2(&b, &reference)?;
        let n = 2.0;
        out.push(Check::at_least(
            format!("{} ω₀={w} seed {seed}: V₁ ratio − (V₀ ratio)^(n/(n+1))", norm.label),
            q.vk[0] - q.v0.powf(n / (n + 1.0)),
            -1e-3,
        ));
    }
    let convex2 = [(Norm::sphere(3), -0.5, 1.0, 0.05, 11), (Norm::quartic_a2(), -0.3, 1.2, 0.04, 12)];
    for (norm, w, r, eps, seed) in &convex2 {
        let anchor = anchor_vector(norm, *w)?;
        let b = chart_geometry2(&grid, &perturbed_cap2(norm, *w, *r, *eps, *seed)?, norm, &anchor)?;
        let reference = chart_geometry2(&grid, &perturbed_cap2(norm, *w, 1.0, 0.0, 0)?, norm, &anchor)?;
        let label = format!("n=2 {} ω₀={w}", norm.label);
        out.push(Check::holds(format!("{label}: condition holds"), condition::check(norm, *w, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL)?.satisfied));
        out.push(Check::at_least(format!("{label}: min κ^F"), b.min_kappa(), 0.0));
        let q = ratios2(&b, &reference)?;
        out.push(Check::at_least(format!("{label}: (V₁ ratio)^(1/2) − (V₀ ratio)^(1/3)"), q.vk[0].sqrt() - q.v0.cbrt(), -1e-3));
    }
    let grid3 = HalfSphereGrid::new3(16, 32, 32)?;
    let convex3 = [(Norm::sphere(4), -0.3, 1.0, 0.05), (Norm::ellipsoid(&[2.0, 1.0, 1.5, 1.0])?, -0.2, 0.8, 0.04)];
    for (norm, w, r, eps) in &convex3 {
        let anchor = anchor_vector(norm, *w)?;
        let b = chart_geometry3(&grid3, &perturbed_cap3(norm, *w, *r, *eps)?, norm, &anchor)?;
        let reference = chart_geometry3(&grid3, &perturbed_cap3(norm, *w, 1.0, 0.0)?, norm, &anchor)?;
        let label = format!("n=3 {} ω₀={w}", norm.label);
        out.push(Check::holds(format!("{label}: condition holds"), condition::check(norm, *w, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL)?.satisfied));
        out.push(Check::at_least(format!("{label}: min κ^F"), b.min_kappa(), 0.0));
        let q = ratios3(&b, &reference)?;
        for k in 1..=2 {
            let lhs = q.vk[k - 1].powf(1.0 / (4.0 - k as f64));
            out.push(Check::at_least(format!("{label}: (V_{k} ratio)^(1/(n+1−k)) − (V₀ ratio)^(1/(n+1))"), lhs - q.v0.powf(0.25), -1e-3));
        }
    }
    Ok(out)
}

/// Configuration of the battery flow runs: `ε = 0.1` perturbed caps on the
/// 64×128 lattice up to `t = 10`.
pub fn battery_flow_config(norm: Norm, omega0: f64) -> FlowConfig {
    let mut cfg = FlowConfig::new(
        norm,
        omega0,
        InitialSurface::PerturbedCap { radius: 1.0, epsilon: 0.1, seed: sampling::DEFAULT_SEED },
    );
    cfg.integrator = Integrator::Rkl2 { stages: 8 };
    cfg
}

/// Conservation, monotonicity, rate and convergence checks of one run.
pub fn flow_checks(label: &str, out: &FlowOutcome) -> Vec<Check> {
    let m = out.trace.monitors();
    let rates = out.trace.rate_checks(0.05);
    let mut c = vec![
        Check::at_most(format!("{label}: |ΔV₀|/V₀"), m.volume_drift, 5e-3),
        Check::at_most(format!("{label}: max per-step V₁ increase / V₁"), m.max_v1_increase, 1e-6),
        Check::at_most(format!("{label}: min ū(0) − min ū(t)"), m.min_u_bar_drop, 1e-4),
        Check::at_most(format!("{label}: barrier excursion"), m.barrier_violation, 1e-3),
        Check::at_least(format!("{label}: records in the transient window"), rates.window as f64, 3.0),
        Check::at_most(format!("{label}: dV₂/dt vs ((n−1)/(n+1))∫fH₂dμ_F, relative"), rates.max_rel_err_v2, 0.05),
        Check::at_most(format!("{label}: dV₁/dt vs (1/(n+1))∫H_F f dμ_F, relative"), rates.max_rel_err_v1, 0.05),
        Check::report(format!("{label}: dV₁/dt vs trace-free form, relative"), rates.max_rel_err_v1_trace_free),
        Check::report(format!("{label}: dV₂/dt relative error for t ≥ 0.005"), out.trace.rate_checks_from(0.05, 0.005).max_rel_err_v2),
        Check::holds(format!("{label}: reached sup|f| ≤ 1e−2"), out.converged()),
        Check::at_most(format!("{label}: radial deviation from W_(r₀,ω₀) / r₀"), out.fit.max_radial_deviation, 1e-2),
        Check::report(format!("{label}: r₀"), out.fit.r0),
        Check::report(format!("{label}: final time"), out.trace.records.last().map_or(0.0, |r| r.t)),
    ];
    c.push(Check::holds(format!("{label}: coarse barrier caps contain the flow"), out.coarse_barriers_hold));
    c
}

/// The two battery runs, the convexity witness and the control run.
pub fn flow_conservation() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (norm, w, label) in [(Norm::sphere(3), -0.5, "sphere θ=π/3"), (Norm::quartic_a2(), -0.3, "quartic_a2 ω₀=−0.3")] {
        let satisfied = condition::check(&norm, w, DEFAULT_SLICE_SAMPLES, DEFAULT_TOL)?.satisfied;
        let run = flow::run(&battery_flow_config(norm, w))?;
        out.extend(flow_checks(label, &run));
        let m = run.trace.monitors();
        let k0 = run.trace.records.first().map_or(f64::NAN, |r| r.min_kappa);
        out.push(Check::holds(format!("{label}: condition holds and min κ^F(0) > 0"), satisfied && k0 > 0.0));
        out.push(Check::at_least(format!("{label}: min_t min κ^F / min κ^F(0)"), m.min_kappa_ratio, 0.5));
    }
    let control = flow::run(&battery_flow_config(Norm::quartic_a2(), 0.3))?;
    let m = control.trace.monitors();
    out.push(Check::report("control quartic_a2 ω₀=+0.3: min κ^F(0)", control.trace.records.first().map_or(f64::NAN, |r| r.min_kappa)));
    out.push(Check::report("control quartic_a2 ω₀=+0.3: min_t min κ^F / min κ^F(0)", m.min_kappa_ratio));
    out.push(Check::report("control quartic_a2 ω₀=+0.3: converged", f64::from(u8::from(control.converged()))));
    Ok(out)
}
