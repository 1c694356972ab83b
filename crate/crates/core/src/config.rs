//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # θ = π/3 cap under the round norm
//! norm.kind = sphere
//! flow.omega0 = -0.5
//! flow.initial = perturbed_cap
//! flow.epsilon = 0.1
//! grid.n_beta = 64
//! output.dir = "out"
//! ```
//!
//! Values are numbers, `true`/`false`, bare or double-quoted strings, or
//! bracketed comma lists. `#` starts a comment. Unknown keys are rejected
//! and relative paths are resolved against the directory of the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::condition::{DEFAULT_SLICE_SAMPLES, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, InitialSurface, Integrator};
use crate::norms::Norm;
use crate::sampling::DEFAULT_SEED;

const KEYS: &[&str] = &[
    "norm.kind",
    "norm.params",
    "norm.f0_expr",
    "norm.dim",
    "flow.omega0",
    "flow.initial",
    "flow.radius",
    "flow.epsilon",
    "flow.seed",
    "flow.t_end",
    "flow.cfl_sigma",
    "flow.convergence_tol",
    "flow.boundary_tol",
    "flow.integrator",
    "flow.stages",
    "flow.dt",
    "flow.max_steps",
    "flow.snapshot_every",
    "flow.boundary_form_every",
    "grid.n_beta",
    "grid.n_lambda",
    "condition.samples",
    "condition.tol",
    "output.dir",
    "output.report",
    "output.samples_csv",
];

/// A parsed configuration value.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
    Text(String),
    List(Vec<f64>),
}

/// Raw entries plus the directory relative paths refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, Value>,
    base: PathBuf,
}

fn parse_value(raw: &str, line: usize) -> Result<Value> {
    let raw = raw.trim();
    let bad = |what: &str| Error::Config(format!("line {line}: {what}"));
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or_else(|| bad("unterminated list"))?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        let items = inner
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{}` is not a number", s.trim()))))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Value::List(items));
    }
    if let Some(inner) = raw.strip_prefix('"') {
        let inner = inner.strip_suffix('"').ok_or_else(|| bad("unterminated string"))?;
        return Ok(Value::Text(inner.to_string()));
    }
    match raw {
        "" => Err(bad("missing value")),
        "true" => Ok(Value::Bool(true)),
        "false" => Ok(Value::Bool(false)),
        _ => Ok(raw.parse::<f64>().map(Value::Number).unwrap_or_else(|_| Value::Text(raw.to_string()))),
    }
}

/// Drops a `#` comment that is not inside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (k, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..k],
            _ => {}
        }
    }
    line
}

impl RunConfig {
    /// Parses config text; relative paths will be resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", k + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", k + 1)));
            }
            if entries.insert(key.to_string(), parse_value(value, k + 1)?).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", k + 1)));
            }
        }
        Ok(RunConfig { entries, base: base.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(x)) => Ok(Some(*x)),
            Some(v) => Err(Error::Config(format!("`{key}` must be a number, got {v:?}"))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.number(key)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 => Ok(Some(x as usize)),
            Some(x) => Err(Error::Config(format!("`{key}` must be a non-negative integer, got {x}"))),
        }
    }

    pub fn text(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Text(s)) => Ok(Some(s)),
            Some(v) => Err(Error::Config(format!("`{key}` must be text, got {v:?}"))),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(Value::List(v)) => Ok(v.clone()),
            Some(Value::Number(x)) => Ok(vec![*x]),
            Some(v) => Err(Error::Config(format!("`{key}` must be a list, got {v:?}"))),
        }
    }

    /// A path value resolved against the config file's directory.
    pub fn path(&self, key: &str) -> Result<Option<PathBuf>> {
        Ok(self.text(key)?.map(|p| self.base.join(p)))
    }

    pub fn norm(&self) -> Result<Norm> {
        let kind = self.text("norm.kind")?.unwrap_or("sphere");
        let dim = self.count("norm.dim")?.unwrap_or(3);
        Norm::from_spec(kind, &self.list("norm.params")?, self.text("norm.f0_expr")?, dim)
    }

    pub fn omega0(&self) -> Result<f64> {
        self.number("flow.omega0")?.ok_or_else(|| Error::Config("`flow.omega0` is required".into()))
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.count("flow.seed")?.map(|s| s as u64).unwrap_or(DEFAULT_SEED))
    }

    pub fn initial(&self) -> Result<InitialSurface> {
        let radius = self.number("flow.radius")?.unwrap_or(1.0);
        let epsilon = self.number("flow.epsilon")?.unwrap_or(0.1);
        match self.text("flow.initial")?.unwrap_or("wulff_cap") {
            "wulff_cap" => Ok(InitialSurface::WulffCap { radius }),
            "perturbed_cap" => Ok(InitialSurface::PerturbedCap { radius, epsilon, seed: self.seed()? }),
            "smooth_cap" => Ok(InitialSurface::SmoothCap { radius, epsilon }),
            other => Err(Error::Config(format!("unknown initial surface `{other}`"))),
        }
    }

    pub fn integrator(&self) -> Result<Integrator> {
        match self.text("flow.integrator")?.unwrap_or("euler") {
            "euler" => Ok(Integrator::Euler),
            "rk2" => Ok(Integrator::Rk2),
            "rkl2" => Ok(Integrator::Rkl2 { stages: self.count("flow.stages")?.unwrap_or(8) }),
            other => Err(Error::Config(format!("unknown integrator `{other}`"))),
        }
    }

    /// The flow parameters, validated.
    pub fn flow_config(&self) -> Result<FlowConfig> {
        let mut cfg = FlowConfig::new(self.norm()?, self.omega0()?, self.initial()?);
        if let Some(n) = self.count("grid.n_beta")? {
            cfg.n_beta = n;
            cfg.n_lambda = 2 * n;
        }
        if let Some(n) = self.count("grid.n_lambda")? {
            cfg.n_lambda = n;
        }
        if let Some(x) = self.number("flow.t_end")? {
            cfg.t_end = x;
        }
        if let Some(x) = self.number("flow.cfl_sigma")? {
            cfg.cfl_sigma = x;
        }
        if let Some(x) = self.number("flow.convergence_tol")? {
            cfg.convergence_tol = x;
        }
        if let Some(x) = self.number("flow.boundary_tol")? {
            cfg.boundary_tol = x;
        }
        cfg.integrator = self.integrator()?;
        cfg.dt = self.number("flow.dt")?;
        if let Some(n) = self.count("flow.max_steps")? {
            cfg.max_steps = n;
        }
        if let Some(n) = self.count("flow.snapshot_every")? {
            cfg.snapshot_every = n;
        }
        if let Some(n) = self.count("flow.boundary_form_every")? {
            cfg.boundary_form_every = n;
        }
        cfg.output_dir = self.path("output.dir")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Slice sample count and acceptance tolerance of the condition check.
    pub fn condition_inputs(&self) -> Result<(usize, f64)> {
        Ok((
            self.count("condition.samples")?.unwrap_or(DEFAULT_SLICE_SAMPLES),
            self.number("condition.tol")?.unwrap_or(DEFAULT_TOL),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_resolves_paths() {
        let text = "norm.kind = ellipsoid # comment\nnorm.params = [4, 1, 1]\nflow.omega0 = -0.25\noutput.dir = \"run #1\"\n";
        let c = RunConfig::parse(text, Path::new("/cfg")).unwrap();
        assert_eq!(c.get("norm.params"), Some(&Value::List(vec![4.0, 1.0, 1.0])));
        assert_eq!(c.path("output.dir").unwrap(), Some(PathBuf::from("/cfg/run #1")));
        assert_eq!(c.omega0().unwrap(), -0.25);
        assert_eq!(c.norm().unwrap().label, "ellipsoid");
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(RunConfig::parse("flow.omega = 1", Path::new(".")), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("flow.omega0 = 1\nflow.omega0 = 2", Path::new(".")), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("flow.omega0", Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn inadmissible_omega_is_reported() {
        let c = RunConfig::parse("norm.kind = sphere\nflow.omega0 = -2", Path::new(".")).unwrap();
        let e = c.flow_config().unwrap_err();
        assert!(matches!(e, Error::Omega0OutOfRange { .. }), "{e}");
    }
}
