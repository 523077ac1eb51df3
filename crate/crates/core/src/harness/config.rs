//! Run configuration: one JSON file, every field optional with a documented default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::gevrey::{GevreyParams, VerticalProfile};

/// Environment variable that overrides the root of relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "HYPERPRANDTL_OUTPUT_ROOT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lx: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lx: 2.0 * std::f64::consts::PI,
            nx: 64,
            ny: 33,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub amplitude: f64,
    pub m_max: usize,
    pub profile: VerticalProfile,
    /// `u1 = u1_scale * u0`.
    pub u1_scale: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            amplitude: 0.05,
            m_max: 16,
            profile: VerticalProfile::Sin2Pi,
            u1_scale: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Fixed step; `None` means `0.25 * dy`.
    pub dt: Option<f64>,
    pub t_final: f64,
    /// Divergence cleanup cadence (steps) for the Navier-Stokes solver.
    pub cleanup_every: usize,
    /// Invariant and energy-growth check cadence (steps).
    pub check_every: usize,
    pub pressure_factor: f64,
    pub nonlinear: bool,
    /// Abort when the energy grows by more than this factor between checks.
    pub growth_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: None,
            t_final: 20.0,
            cleanup_every: 50,
            check_every: 10,
            pressure_factor: 1.0,
            nonlinear: true,
            growth_limit: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Prandtl,
    Hns,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// `eps` of a single Navier-Stokes run.
    pub eps: f64,
    /// Strictly decreasing `eps` values of a sweep.
    pub eps_list: Vec<f64>,
    /// Regularity index of the reported energy functional.
    pub s: f64,
    /// Sweep members use the Prandtl solver; errors are roundoff and no slope is fitted.
    pub self_check: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Prandtl,
            eps: 0.1,
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            s: 0.5,
            self_check: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Diagnostics cadence in steps.
    pub sample_every: usize,
    /// Snapshot cadence in steps; 0 writes only the final state.
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("runs/default"),
            sample_every: 10,
            snapshot_every: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub gevrey: GevreyParams,
    pub data: DataConfig,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
}

fn invalid(msg: String) -> Error {
    Error::Config(msg)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.lx, self.grid.nx, self.grid.ny)
    }

    pub fn dt(&self) -> f64 {
        self.solver
            .dt
            .unwrap_or(0.25 / (self.grid.ny.max(2) - 1) as f64)
    }

    /// Number of steps to reach `t_final`.
    pub fn steps(&self) -> usize {
        (self.solver.t_final / self.dt()).round() as usize
    }

    /// Output directory, resolved against the output-root variable when relative.
    pub fn output_dir(&self) -> PathBuf {
        let d = &self.output.directory;
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if d.is_relative() => PathBuf::from(root).join(d),
            _ => d.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid().map_err(|e| invalid(e.to_string()))?;
        self.gevrey.validate().map_err(|e| invalid(e.to_string()))?;
        let p = &self.gevrey;
        let identity = p.lambda * p.delta().sqrt() - p.a * p.kappa() / 4.0;
        if identity.abs() > 1e-12 * p.a {
            return Err(invalid(format!("lambda delta^(1/2) != a K / 4 (off by {identity:e})")));
        }
        let d = &self.data;
        if !(d.amplitude.is_finite() && d.amplitude >= 0.0) {
            return Err(invalid(format!("amplitude must be >= 0, got {}", d.amplitude)));
        }
        let resolved = (self.grid.nx - 1) / 3;
        if d.m_max == 0 || d.m_max > resolved {
            return Err(invalid(format!("m_max must lie in 1..={resolved}, got {}", d.m_max)));
        }
        if !d.u1_scale.is_finite() {
            return Err(invalid("u1_scale must be finite".into()));
        }
        let s = &self.solver;
        if let Some(dt) = s.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid(format!("dt must be > 0, got {dt}")));
            }
        }
        if !(s.t_final.is_finite() && s.t_final > 0.0) {
            return Err(invalid(format!("t_final must be > 0, got {}", s.t_final)));
        }
        if s.cleanup_every == 0 || s.check_every == 0 {
            return Err(invalid("cleanup_every and check_every must be >= 1".into()));
        }
        if !s.pressure_factor.is_finite() {
            return Err(invalid("pressure_factor must be finite".into()));
        }
        if !(s.growth_limit > 1.0) {
            return Err(invalid(format!("growth_limit must be > 1, got {}", s.growth_limit)));
        }
        let e = &self.experiment;
        if !(e.eps > 0.0 && e.eps <= 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1], got {}", e.eps)));
        }
        if !e.s.is_finite() {
            return Err(invalid("s must be finite".into()));
        }
        if e.kind == ExperimentKind::Sweep {
            if e.eps_list.len() < 3 {
                return Err(invalid(format!(
                    "a sweep needs at least 3 eps values, got {}",
                    e.eps_list.len()
                )));
            }
            if e.eps_list.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
                return Err(invalid("eps values must lie in (0, 1]".into()));
            }
            if e.eps_list.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid("eps values must be strictly decreasing".into()));
            }
        }
        if self.output.sample_every == 0 {
            return Err(invalid("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Documented schema with every default, for `config --schema`.
pub fn schema() -> serde_json::Value {
    let d = RunConfig::default();
    let f = |ty: &str, default: serde_json::Value, doc: &str| {
        json!({ "type": ty, "default": default, "description": doc })
    };
    json!({
        "title": "hyperprandtl run configuration",
        "type": "object",
        "description": "Every field is optional; omitted fields take the listed default.",
        "properties": {
            "grid": { "type": "object", "properties": {
                "lx": f("number", json!(d.grid.lx), "Horizontal period Lx (> 0)."),
                "nx": f("integer", json!(d.grid.nx), "Horizontal collocation points (even, >= 4)."),
                "ny": f("integer", json!(d.grid.ny), "Vertical nodes including both walls (>= 9)."),
            }},
            "gevrey": { "type": "object", "properties": {
                "a": f("number", json!(d.gevrey.a), "Initial Gevrey radius (> 0)."),
                "lambda": f("number", json!(d.gevrey.lambda), "Radius loss multiplier (>= 1)."),
                "poincare": f("number", json!(d.gevrey.poincare), "Poincare constant of the strip (> 0); the decay rate is min(1/6, 1/(4(1+poincare)))."),
            }},
            "data": { "type": "object", "properties": {
                "amplitude": f("number", json!(d.data.amplitude), "Amplitude c of the Gevrey data c e^{-a|xi|^{1/2}} P(y)."),
                "m_max": f("integer", json!(d.data.m_max), "Highest excited mode; at most (nx-1)/3."),
                "profile": f("string|object", json!("sin2pi"), "Vertical profile P: \"sin2pi\", \"sin4pi\", \"cubic\" or {\"custom\": [ny node values]} vanishing at the walls with zero mean."),
                "u1_scale": f("number", json!(d.data.u1_scale), "Initial time derivative u1 = u1_scale * u0."),
            }},
            "solver": { "type": "object", "properties": {
                "dt": f("number|null", serde_json::Value::Null, "Time step; null selects 0.25 dy."),
                "t_final": f("number", json!(d.solver.t_final), "Final time."),
                "cleanup_every": f("integer", json!(d.solver.cleanup_every), "Steps between divergence cleanups (Navier-Stokes)."),
                "check_every": f("integer", json!(d.solver.check_every), "Steps between invariant and energy-growth checks."),
                "pressure_factor": f("number", json!(d.solver.pressure_factor), "Coefficient of the quadratic pressure term (Prandtl); 1 conserves the vertical mean, 0.5 is selectable."),
                "nonlinear": f("boolean", json!(d.solver.nonlinear), "false drops the advection terms."),
                "growth_limit": f("number", json!(d.solver.growth_limit), "Abort when the energy grows by more than this factor between checks."),
            }},
            "experiment": { "type": "object", "properties": {
                "kind": f("string", json!("prandtl"), "\"prandtl\", \"hns\" or \"sweep\"."),
                "eps": f("number", json!(d.experiment.eps), "eps in (0, 1] for a single hns run."),
                "eps_list": f("array", json!(d.experiment.eps_list), "Sweep values: at least 3, strictly decreasing, in (0, 1]."),
                "s": f("number", json!(d.experiment.s), "Regularity index of the reported energy functional."),
                "self_check": f("boolean", json!(d.experiment.self_check), "Sweep test mode: members run the Prandtl solver, errors are roundoff, no slope fit."),
            }},
            "output": { "type": "object", "properties": {
                "directory": f("string", json!(d.output.directory), format!("Output directory; relative paths are joined to ${OUTPUT_ROOT_ENV} when set.").as_str()),
                "sample_every": f("integer", json!(d.output.sample_every), "Steps between diagnostic samples (CSV rows)."),
                "snapshot_every": f("integer", json!(d.output.snapshot_every), "Steps between snapshots; 0 writes the final state only."),
            }},
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let partial = RunConfig::from_json(r#"{"grid": {"nx": 32}, "data": {"m_max": 8}}"#).unwrap();
        assert_eq!(partial.grid.nx, 32);
        assert_eq!(partial.grid.ny, 33);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            r#"{"grid": {"nx": 31}}"#,
            r#"{"gevrey": {"lambda": 0.5}}"#,
            r#"{"data": {"m_max": 40}}"#,
            r#"{"solver": {"t_final": -1}}"#,
            r#"{"experiment": {"kind": "sweep", "eps_list": [0.1, 0.05]}}"#,
            r#"{"experiment": {"kind": "sweep", "eps_list": [0.1, 0.2, 0.05]}}"#,
            r#"{"unknown": 1}"#,
        ];
        for b in bad {
            assert!(RunConfig::from_json(b).is_err(), "{b}");
        }
    }

    #[test]
    fn schema_lists_every_section() {
        let s = schema();
        for key in ["grid", "gevrey", "data", "solver", "experiment", "output"] {
            assert!(s["properties"][key].is_object(), "{key}");
        }
    }
}
