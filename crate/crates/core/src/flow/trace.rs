//! Time series recorded along a run, finite-difference rate checks and monitor verdicts.

use std::fmt::Write as _;

/// One snapshot of the monitored quantities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowRecord {
    pub step: usize,
    pub t: f64,
    /// Length of the step taken from this state (0 for the final record).
    pub dt: f64,
    pub v0: f64,
    /// `(|Σ|_F + ω₀|∂Σ̂|)/(n+1)`.
    pub v1_boundary: f64,
    pub v1_interior: f64,
    pub v2_interior: f64,
    pub v3_interior: f64,
    /// Boundary-form `V₂`, when requested for this record.
    pub v2_boundary: Option<f64>,
    pub sup_f: f64,
    pub min_kappa: f64,
    pub min_u_bar: f64,
    pub mink_k0: f64,
    pub mink_k1: f64,
    /// `∫f dμ_F`.
    pub rate_v0: f64,
    /// `(1/(n+1))∫H_F f dμ_F`.
    pub rate_v1: f64,
    /// `−n/((n+1)(n−1))∫|ĥ − H_F ĝ/n|²û dμ_F`.
    pub rate_v1_trace_free: f64,
    /// `((n−1)/(n+1))∫f H^F₂ dμ_F`.
    pub rate_v2: f64,
    /// Finite-difference time derivatives, filled by [`FlowTrace::finalize`].
    pub fd_v0: f64,
    pub fd_v1: f64,
    pub fd_v2: f64,
    /// `min(ρ − r₁ρ_{W₁})` over the lattice.
    pub inner_gap: f64,
    /// `min(r₂ρ_{W₁} − ρ)` over the lattice.
    pub outer_gap: f64,
    pub bc_residual: f64,
}

impl FlowRecord {
    /// `|dV₀/dt − ∫f dμ_F|`.
    pub fn rate_err_k0(&self) -> f64 {
        (self.fd_v0 - self.rate_v0).abs()
    }

    /// `|dV₁/dt − (1/(n+1))∫H_F f dμ_F| / |(1/(n+1))∫H_F f dμ_F|`.
    pub fn rate_err_k1(&self) -> f64 {
        relative(self.fd_v1, self.rate_v1)
    }

    /// `dV₁/dt` against the trace-free form of its rate.
    pub fn rate_err_trace_free(&self) -> f64 {
        relative(self.fd_v1, self.rate_v1_trace_free)
    }

    pub fn rate_err_v2(&self) -> f64 {
        relative(self.fd_v2, self.rate_v2)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Every record of a run, in time order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowTrace {
    pub records: Vec<FlowRecord>,
}

/// Three-point derivative at `t₁` on a non-uniform grid.
fn centred(t: [f64; 3], y: [f64; 3]) -> f64 {
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    -h2 / (h1 * (h1 + h2)) * y[0] + (h2 - h1) / (h1 * h2) * y[1] + h1 / (h2 * (h1 + h2)) * y[2]
}

pub const TRACE_HEADER: &str =
    "t,dt,V0,V1_boundary,V1_interior,V2_interior,supF,min_kappaF,min_ubar,mink_res_k0,mink_res_k1,rate_err_k0,rate_err_k1";

pub const MONITOR_HEADER: &str = "step,t,V2_boundary,V3_interior,rate_V0,rate_V1,rate_V1_trace_free,rate_V2,dV0dt,dV1dt,dV2dt,rate_err_V1_trace_free,rate_err_V2,inner_gap,outer_gap,bc_residual";

impl FlowTrace {
    /// Fills the finite-difference derivatives: centred in the interior,
    /// one-sided at both ends.
    pub fn finalize(&mut self) {
        let r = &mut self.records;
        let m = r.len();
        if m < 2 {
            return;
        }
        let fd = |r: &[FlowRecord], k: usize, y: &dyn Fn(&FlowRecord) -> f64| -> f64 {
            if k == 0 {
                (y(&r[1]) - y(&r[0])) / (r[1].t - r[0].t)
            } else if k == r.len() - 1 {
                (y(&r[k]) - y(&r[k - 1])) / (r[k].t - r[k - 1].t)
            } else {
                centred([r[k - 1].t, r[k].t, r[k + 1].t], [y(&r[k - 1]), y(&r[k]), y(&r[k + 1])])
            }
        };
        for k in 0..m {
            let d0 = fd(r, k, &|x| x.v0);
            let d1 = fd(r, k, &|x| x.v1_boundary);
            let d2 = fd(r, k, &|x| x.v2_interior);
            r[k].fd_v0 = d0;
            r[k].fd_v1 = d1;
            r[k].fd_v2 = d2;
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(TRACE_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.dt,
                r.v0,
                r.v1_boundary,
                r.v1_interior,
                r.v2_interior,
                r.sup_f,
                r.min_kappa,
                r.min_u_bar,
                r.mink_k0,
                r.mink_k1,
                r.rate_err_k0(),
                r.rate_err_k1()
            );
        }
        s
    }

    pub fn monitors_csv(&self) -> String {
        let mut s = String::from(MONITOR_HEADER);
        s.push('\n');
        for r in &self.records {
            let v2b = r.v2_boundary.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.step,
                r.t,
                v2b,
                r.v3_interior,
                r.rate_v0,
                r.rate_v1,
                r.rate_v1_trace_free,
                r.rate_v2,
                r.fd_v0,
                r.fd_v1,
                r.fd_v2,
                r.rate_err_trace_free(),
                r.rate_err_v2(),
                r.inner_gap,
                r.outer_gap,
                r.bc_residual
            );
        }
        s
    }

    /// Rate comparisons over the records with `sup|f| > transient`, skipping
    /// the first and last records, whose differences are one-sided.
    pub fn rate_checks(&self, transient: f64) -> RateReport {
        self.rate_checks_from(transient, f64::NEG_INFINITY)
    }

    /// [`Self::rate_checks`] with the relative errors restricted to records at `t ≥ t_min`.
    pub fn rate_checks_from(&self, transient: f64, t_min: f64) -> RateReport {
        let mut rep = RateReport::default();
        let m = self.records.len();
        for r in self.records.iter().take(m.saturating_sub(1)).skip(1) {
            rep.max_abs_err_v0 = rep.max_abs_err_v0.max(r.rate_err_k0());
            if r.sup_f > transient && r.t >= t_min {
                rep.window += 1;
                rep.max_rel_err_v1 = rep.max_rel_err_v1.max(r.rate_err_k1());
                rep.max_rel_err_v1_trace_free = rep.max_rel_err_v1_trace_free.max(r.rate_err_trace_free());
                rep.max_rel_err_v2 = rep.max_rel_err_v2.max(r.rate_err_v2());
            }
        }
        rep
    }

    /// Monitor verdict quantities over the whole run.
    pub fn monitors(&self) -> MonitorReport {
        let mut rep = MonitorReport {
            volume_drift: 0.0,
            max_v1_increase: f64::NEG_INFINITY,
            max_vk_increase: f64::NEG_INFINITY,
            min_u_bar_drop: 0.0,
            barrier_violation: 0.0,
            min_kappa_ratio: f64::INFINITY,
            max_bc_residual: 0.0,
        };
        let Some(first) = self.records.first() else { return rep };
        for w in self.records.windows(2) {
            rep.max_v1_increase = rep.max_v1_increase.max((w[1].v1_boundary - w[0].v1_boundary) / w[0].v1_boundary.abs());
            rep.max_vk_increase = rep.max_vk_increase.max((w[1].v2_interior - w[0].v2_interior) / w[0].v2_interior.abs());
        }
        for r in &self.records {
            rep.volume_drift = rep.volume_drift.max((r.v0 - first.v0).abs() / first.v0);
            rep.min_u_bar_drop = rep.min_u_bar_drop.max(first.min_u_bar - r.min_u_bar);
            rep.barrier_violation = rep.barrier_violation.max(-r.inner_gap).max(-r.outer_gap);
            rep.min_kappa_ratio = rep.min_kappa_ratio.min(r.min_kappa / first.min_kappa);
            rep.max_bc_residual = rep.max_bc_residual.max(r.bc_residual);
        }
        rep
    }
}

/// Worst rate-formula mismatches over a trace.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RateReport {
    /// Records inside the transient window.
    pub window: usize,
    /// `max |dV₀/dt − ∫f dμ_F|`, absolute, over all interior records.
    pub max_abs_err_v0: f64,
    pub max_rel_err_v1: f64,
    pub max_rel_err_v1_trace_free: f64,
    pub max_rel_err_v2: f64,
}

/// Aggregated monitor values of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorReport {
    /// `max |V₀(t) − V₀(0)|/V₀(0)`.
    pub volume_drift: f64,
    /// Largest relative one-step increase of `V₁` (negative when strictly decreasing).
    pub max_v1_increase: f64,
    /// Same for `V₂`.
    pub max_vk_increase: f64,
    /// `max (min ū(0) − min ū(t))`.
    pub min_u_bar_drop: f64,
    /// Largest radial excursion outside the barrier caps.
    pub barrier_violation: f64,
    /// `min_t min κ^F(t) / min κ^F(0)`.
    pub min_kappa_ratio: f64,
    pub max_bc_residual: f64,
}
