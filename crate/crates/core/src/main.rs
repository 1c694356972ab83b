use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use capflow::config::RunConfig;
use capflow::flow::{self, FlowOutcome, FlowStatus};
use capflow::norms::Norm;
use capflow::{condition, verify, Error};

#[derive(Parser)]
#[command(name = "capflow", version, about = "Anisotropic capillary curvature flow toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the convexity condition for the config's norm and ω₀.
    CheckCondition {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        /// One of duality, wulff-static, minkowski, flow-conservation, inequalities, appendix-a.
        suite: String,
    },
    /// Print basic data of a norm.
    NormInfo(NormArgs),
}

#[derive(Args)]
struct NormArgs {
    /// Take the norm from a config file instead of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "sphere")]
    kind: String,
    /// Comma-separated parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// Expression for F⁰ when `kind = custom`.
    #[arg(long)]
    f0_expr: Option<String>,
    #[arg(long, default_value_t = 3)]
    dim: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BlowUp { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::CheckCondition { config } => check_condition(&config),
        Command::Verify { suite } => run_verify(&suite),
        Command::NormInfo(args) => norm_info(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn summary(out: &FlowOutcome) -> String {
    let m = out.trace.monitors();
    let rates = out.trace.rate_checks(0.05);
    let last = out.trace.records.last();
    let status = match &out.status {
        FlowStatus::Converged => "converged".to_string(),
        FlowStatus::ReachedEnd => "reached_end".to_string(),
        FlowStatus::MaxSteps => "max_steps".to_string(),
        FlowStatus::BlowUp { t, reason } => format!("blow_up at t = {t}: {reason}"),
    };
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("status", status);
    kv("converged", out.converged().to_string());
    kv("steps", out.steps.to_string());
    kv("final_t", last.map_or(0.0, |r| r.t).to_string());
    kv("final_sup_f", last.map_or(f64::NAN, |r| r.sup_f).to_string());
    kv("r0", out.fit.r0.to_string());
    kv("max_radial_deviation", out.fit.max_radial_deviation.to_string());
    kv("relative_radial_deviation", (out.fit.max_radial_deviation / out.fit.r0).to_string());
    kv("volume_drift", m.volume_drift.to_string());
    kv("max_v1_increase", m.max_v1_increase.to_string());
    kv("v1_non_increasing", (m.max_v1_increase <= 1e-6).to_string());
    kv("min_u_bar_drop", m.min_u_bar_drop.to_string());
    kv("barrier_violation", m.barrier_violation.to_string());
    kv("barriers_hold", (m.barrier_violation <= 1e-3).to_string());
    kv("coarse_barriers_hold", out.coarse_barriers_hold.to_string());
    kv("min_kappa_ratio", m.min_kappa_ratio.to_string());
    kv("max_bc_residual", m.max_bc_residual.to_string());
    kv("rate_window_records", rates.window.to_string());
    kv("rate_max_abs_err_v0", rates.max_abs_err_v0.to_string());
    kv("rate_max_rel_err_v1", rates.max_rel_err_v1.to_string());
    kv("rate_max_rel_err_v1_trace_free", rates.max_rel_err_v1_trace_free.to_string());
    kv("rate_max_rel_err_v2", rates.max_rel_err_v2.to_string());
    s
}

fn simulate(path: &Path) -> capflow::Result<u8> {
    let cfg = RunConfig::load(path)?;
    let mut flow_cfg = cfg.flow_config()?;
    let dir = flow_cfg.output_dir.get_or_insert_with(|| path.parent().unwrap_or(Path::new(".")).join("out")).clone();
    let out = flow::run(&flow_cfg)?;
    let report = summary(&out);
    let report_path = cfg.path("output.report")?.unwrap_or_else(|| dir.join("summary.txt"));
    std::fs::write(&report_path, &report)?;
    print!("{report}");
    Ok(match out.status {
        FlowStatus::BlowUp { .. } => 3,
        _ => 0,
    })
}

fn check_condition(path: &Path) -> capflow::Result<u8> {
    let cfg = RunConfig::load(path)?;
    let norm = cfg.norm()?;
    let omega0 = cfg.omega0()?;
    let (samples, tol) = cfg.condition_inputs()?;
    let report = condition::check(&norm, omega0, samples, tol)?;
    let csv = match cfg.path("output.samples_csv")? {
        Some(p) => p,
        None => cfg.path("output.dir")?.unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).to_path_buf()).join("condition_samples.csv"),
    };
    if let Some(dir) = csv.parent() {
        std::fs::create_dir_all(dir)?;
    }
    report.write_samples_csv(&csv)?;
    let mut s = String::new();
    let _ = writeln!(s, "norm = {}", report.norm);
    let _ = writeln!(s, "omega0 = {}", report.omega0);
    let _ = writeln!(s, "min_margin = {}", report.min_margin);
    let _ = writeln!(s, "satisfied = {}", report.satisfied);
    let _ = writeln!(s, "samples_csv_path = {}", csv.display());
    let _ = writeln!(s, "samples = {}", report.samples.len());
    let _ = writeln!(s, "min_margin_translated = {}", report.min_margin_translated);
    let _ = writeln!(s, "both_forms_agree = {}", report.both_forms_agree);
    let _ = writeln!(s, "degenerate_samples = {}", report.degenerate_count);
    if let Some(p) = cfg.path("output.report")? {
        std::fs::write(p, &s)?;
    }
    print!("{s}");
    Ok(0)
}

fn run_verify(suite: &str) -> capflow::Result<u8> {
    let checks = verify::run_suite(suite)?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| c.failed()).count();
    println!("{suite}: {} checks, {failed} failed", checks.len());
    Ok(u8::from(failed > 0))
}

fn norm_info(args: &NormArgs) -> capflow::Result<u8> {
    let norm = match &args.config {
        Some(p) => RunConfig::load(p)?.norm()?,
        None => Norm::from_spec(&args.kind, &args.params, args.f0_expr.as_deref(), args.dim)?,
    };
    let d = norm.d;
    let mut e = vec![0.0; d];
    e[d - 1] = 1.0;
    let up = norm.support_value(&e)?;
    e[d - 1] = -1.0;
    let down = norm.support_value(&e)?;
    let (lo, hi) = norm.admissible_interval()?;
    println!("norm = {}", norm.label);
    println!("dim = {d}");
    println!("F(E) = {up}");
    println!("F(-E) = {down}");
    println!("ellipticity_min_eigenvalue = {}", norm.ellipticity_min_eigenvalue(200)?);
    println!("admissible_omega0 = ({lo}, {hi})");
    Ok(0)
}
